#pragma once

// Compressible two-phase model in conservative variables (ρ, m = ρu, c = ρφ):
//
//   ρ_t = -div m
//   m_t = -div(m⊗u) - ∇p(ρ) - ε ∇φ Δφ + div S(u,φ)
//   c_t = -div(c u) + Δμ,   μ = -ε Δφ/ρ + f'(φ)/ε,   f(φ) = (φ²-1)²/4
//
// with p(ρ) = A ρ^γ, S = 2ν(φ)D(u) + λ(φ)(div u)I, ν(φ) = ν₀ + ν₁φ²,
// λ(φ) = λ₀, D(u) = (∇u + ∇uᵀ)/2.  The capillary force is applied in the
// equivalent non-divergence form -ε∇φΔφ (the ε∇|∇φ|²/2 part is absorbed into
// the pressure gauge and does not affect u).  Every nonlinear product is
// formed pointwise in physical space and 2/3-dealiased.

#include <cmath>
#include <stdexcept>
#include <string>

#include "nsch/norms.hpp"

namespace nsch {

struct ModelParams {
  double rho_bar = 1.0;  // reference (mean) density, > 0
  double gamma = 1.4;    // adiabatic exponent, > 1
  double p_coeff = 1.0;  // pressure coefficient A, > 0
  double nu0 = 0.1;      // constant part of shear viscosity, > 0
  double nu1 = 0.05;     // φ²-coefficient of shear viscosity, >= 0
  double lam0 = 0.0;     // bulk viscosity λ₀, >= 0
  double eps = 1.0;      // interface width parameter

  void validate() const {
    if (!(rho_bar > 0.0)) throw std::invalid_argument("ModelParams: rho_bar must be > 0");
    if (!(gamma > 1.0)) throw std::invalid_argument("ModelParams: gamma must be > 1");
    if (!(p_coeff > 0.0)) throw std::invalid_argument("ModelParams: p_coeff must be > 0");
    if (!(nu0 > 0.0)) throw std::invalid_argument("ModelParams: nu0 must be > 0");
    if (nu1 < 0.0) throw std::invalid_argument("ModelParams: nu1 must be >= 0");
    if (lam0 < 0.0) throw std::invalid_argument("ModelParams: lam0 must be >= 0");
    if (!(eps > 0.0)) throw std::invalid_argument("ModelParams: eps must be > 0");
  }

  double pressure(double rho) const { return p_coeff * std::pow(rho, gamma); }
  double dpressure(double rho) const {
    return p_coeff * gamma * std::pow(rho, gamma - 1.0);
  }
  double viscosity(double phi) const { return nu0 + nu1 * phi * phi; }
};

/// Potential energy density of compression: G(ρ) = ρ ∫_ρ̄^ρ (p(z)-p(ρ̄))/z² dz.
/// Closed form for the γ-law: G = A[ρ^γ - γρ̄^{γ-1}ρ + (γ-1)ρ̄^γ]/(γ-1),
/// which satisfies G(ρ̄) = G'(ρ̄) = 0 and ρG'' = p'.
inline double thermo_G_scalar(double rho, const ModelParams& p) {
  if (!(rho > 0.0))
    throw std::invalid_argument("thermo_G: density must be positive");
  const double rb = p.rho_bar, g = p.gamma;
  return p.p_coeff *
         (std::pow(rho, g) - g * std::pow(rb, g - 1.0) * rho +
          (g - 1.0) * std::pow(rb, g)) /
         (g - 1.0);
}

/// Blow-up signal: carries the time and the offending quantity so the harness
/// can emit a structured record instead of a crash.
struct BlowupError : std::runtime_error {
  double t;
  double offending_value;
  BlowupError(double time, const std::string& what_, double value)
      : std::runtime_error(what_), t(time), offending_value(value) {}
};

template <int D>
struct State {
  double t = 0.0;
  Field<D> rho;
  VectorField<D> m;  // momentum ρu
  Field<D> c;        // phase mass ρφ

  State() = default;
  explicit State(const GridPtr<D>& g) : rho(g), m(g), c(g) {}
  const GridPtr<D>& grid() const { return rho.grid; }

  /// Guard against vacuum/overflow before dividing by ρ.
  void check_density(const ModelParams& p, double floor_frac = 0.01) const {
    const double lo = rho.min();
    if (!(lo > floor_frac * p.rho_bar))
      throw BlowupError(t, "density reached the vacuum guard", lo);
    if (!rho.finite() || !m.finite() || !c.finite())
      throw BlowupError(t, "state contains non-finite values",
                        std::numeric_limits<double>::quiet_NaN());
  }

  VectorField<D> velocity() const {
    VectorField<D> u(grid());
    for (int a = 0; a < D; ++a) u[a] = m[a] / rho;
    return u;
  }
  Field<D> phase() const { return c / rho; }
};

template <int D>
Field<D> thermo_G(const Field<D>& rho, const ModelParams& p) {
  return map(rho, [&p](double r) { return thermo_G_scalar(r, p); });
}

/// μ = -ε Δφ/ρ + (φ³ - φ)/ε, dealiased pointwise compositions.
template <int D>
Field<D> chemical_potential(const Field<D>& rho, const Field<D>& phi,
                            const ModelParams& p) {
  Field<D> lap_phi = laplacian(phi);
  Field<D> visc_part = dealias(
      zip(lap_phi, rho, [&](double lp, double r) { return -p.eps * lp / r; }));
  Field<D> well_part =
      dealias(map(phi, [&](double f) { return (f * f * f - f) / p.eps; }));
  return visc_part + well_part;
}

/// Capillary force ∇φ Δφ (a vector field).
template <int D>
VectorField<D> capillary_force(const Field<D>& phi) {
  auto s = fft(phi);
  auto lap = s;
  laplacian_inplace(lap);
  Field<D> lap_phi = ifft(std::move(lap));
  VectorField<D> out(phi.grid);
  for (int a = 0; a < D; ++a) {
    auto da = s;
    derivative_inplace(da, a, 1);
    out[a] = multiply_dealiased(ifft(std::move(da)), lap_phi);
  }
  return out;
}

/// div S with S = 2ν(φ)D(u) + λ₀(div u)I; the divergence is taken spectrally
/// on the dealiased stress components.
template <int D>
VectorField<D> viscous_stress_div(const VectorField<D>& u, const Field<D>& phi,
                                  const ModelParams& p) {
  const auto& g = u.grid();
  // ∇u (all components), pointwise ν(φ).
  std::array<std::array<Field<D>, D>, D> du;  // du[i][j] = ∂_j u_i
  for (int i = 0; i < D; ++i) {
    auto s = fft(u[i]);
    for (int j = 0; j < D; ++j) {
      auto d = s;
      derivative_inplace(d, j, 1);
      du[i][j] = ifft(std::move(d));
    }
  }
  Field<D> nu = map(phi, [&](double f) { return p.viscosity(f); });
  Field<D> divu(g);
  for (int i = 0; i < D; ++i) axpy(1.0, du[i][i], divu);

  VectorField<D> out(g);
  for (int i = 0; i < D; ++i) {
    SpectralField<D> acc(g);
    for (int j = 0; j < D; ++j) {
      // S_ij = ν(φ)(∂_j u_i + ∂_i u_j) + λ₀ δ_ij div u
      Field<D> sij = zip(nu, du[i][j] + du[j][i],
                         [](double v, double d) { return v * d; });
      if (i == j && p.lam0 != 0.0) axpy(p.lam0, divu, sij);
      auto ss = fft(sij);
      dealias_inplace(ss);
      derivative_inplace(ss, j, 1);
      for (std::int64_t m2 = 0; m2 < g->spec_size(); ++m2) acc.c[m2] += ss.c[m2];
    }
    out[i] = ifft(std::move(acc));
  }
  return out;
}

template <int D>
struct Tendency {
  Field<D> drho;
  VectorField<D> dm;
  Field<D> dc;
  explicit Tendency(const GridPtr<D>& g) : drho(g), dm(g), dc(g) {}
};

/// Full right-hand side in conservative variables.  All transported products
/// are dealiased; divergence-form terms keep the zero-mode tendencies of ρ, m
/// and c at zero to rounding.
template <int D>
Tendency<D> rhs(const State<D>& st, const ModelParams& p,
                double rho_floor_frac = 0.01) {
  st.check_density(p, rho_floor_frac);
  const auto& g = st.grid();
  Tendency<D> out(g);

  Field<D> rho_d = dealias(st.rho);
  VectorField<D> u(g), m_d(g);
  for (int a = 0; a < D; ++a) {
    m_d[a] = dealias(st.m[a]);
    u[a] = dealias(m_d[a] / rho_d);
  }
  Field<D> phi = dealias(dealias(st.c) / rho_d);

  // mass: -div m
  {
    SpectralField<D> acc(g);
    for (int a = 0; a < D; ++a) {
      auto s = fft(st.m[a]);
      derivative_inplace(s, a, 1);
      for (std::int64_t k = 0; k < g->spec_size(); ++k) acc.c[k] -= s.c[k];
    }
    out.drho = ifft(std::move(acc));
  }

  // momentum: -div(m⊗u) - ∇p - ∇φΔφ + div S
  {
    Field<D> pfield = dealias(map(st.rho, [&](double r) { return p.pressure(r); }));
    auto ps = fft(pfield);
    VectorField<D> cap = capillary_force(phi);
    VectorField<D> vi = viscous_stress_div(u, phi, p);
    for (int i = 0; i < D; ++i) {
      SpectralField<D> acc(g);
      for (int j = 0; j < D; ++j) {
        auto flux = fft(multiply_dealiased(m_d[i], u[j]));
        derivative_inplace(flux, j, 1);
        for (std::int64_t k = 0; k < g->spec_size(); ++k) acc.c[k] -= flux.c[k];
      }
      auto gp = ps;
      derivative_inplace(gp, i, 1);
      for (std::int64_t k = 0; k < g->spec_size(); ++k) acc.c[k] -= gp.c[k];
      out.dm[i] = ifft(std::move(acc));
      axpy(-p.eps, cap[i], out.dm[i]);
      axpy(1.0, vi[i], out.dm[i]);
    }
  }

  // phase mass: -div(c u) + Δμ
  {
    Field<D> c_d = dealias(st.c);
    SpectralField<D> acc(g);
    for (int a = 0; a < D; ++a) {
      auto flux = fft(multiply_dealiased(c_d, u[a]));
      derivative_inplace(flux, a, 1);
      for (std::int64_t k = 0; k < g->spec_size(); ++k) acc.c[k] -= flux.c[k];
    }
    auto mu = fft(chemical_potential(rho_d, phi, p));
    laplacian_inplace(mu);
    for (std::int64_t k = 0; k < g->spec_size(); ++k) acc.c[k] += mu.c[k];
    out.dc = ifft(std::move(acc));
  }

  return out;
}

}  // namespace nsch
