#pragma once

// Second-order IMEX stepping.  The constant-coefficient stiff symbols
//
//   phase:    L_c(k)  = -(ε/ρ̄²)(2π|k|)⁴ - (2/(ερ̄))(2π|k|)²
//   momentum: L_m(k)  = -(ν₀/ρ̄)(2π|k|)² ⊥  and  -((2ν₀+λ₀)/ρ̄)(2π|k|)² ∥
//
// (the linearization of the fourth-order phase equation and of the viscous
// term about the uniform state) are integrated with the trapezoidal rule —
// the phase block with the O(dt)-shifted θ that damps its stiff limit, see
// the note above step() — while the remaining nonlinear / variable-
// coefficient part gets a two-stage explicit (Heun) treatment.  λ₀ is an
// exact constant, so its ∇div contribution joins the implicit multiplier
// with zero remainder.
//
// Updates are assembled in increment form,
//   U⁺ = U + (I - dt/2·L)⁻¹ [increment],
// and the result is projected onto the 2/3 band each step, so the state stays
// band-limited up to one step's worth of pointwise rounding.  Conserved zero
// modes (mass, phase mass, momentum) see only the rounding of the increments
// and of the projection round-trip (~1e-16 per step, random-walk in time).
//
// In the stiff limit the explicit remainder is stable whenever its symbol
// stays below the implicit one (per-mode amplification → -1 + 2r², r =
// remainder/implicit); adaptive_dt carries a time-step cap for states where
// that ratio is exceeded.

#include <algorithm>
#include <cmath>

#include "nsch/model.hpp"

namespace nsch {

struct StepConfig {
  double dt = 1e-3;          // step used by step() (run loop fills it in)
  bool adaptive = true;      // recompute dt from the state each step
  double cfl = 0.4;          // advective CFL target
  double dt_min = 1e-9;      // adaptive floor
  double dt_max = 5e-2;      // adaptive ceiling
  bool implicit_phase = true;    // trapezoidal solve on L_c
  bool implicit_viscous = true;  // trapezoidal solve on L_m
  double rho_floor_frac = 0.01;  // blow-up guard: ρ <= frac·ρ̄
  double stab_margin = 0.9;      // safety factor for the remainder cap
  double ramp_rate = 0.25;       // startup cap dt <= ramp_floor + rate·t (0 = off)
  double theta_shift = 2.0;      // phase solve uses θ = 1/2 + shift·dt (0 = plain
                                 // trapezoidal); see the note above step()

  void validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("StepConfig: dt must be > 0");
    if (!(cfl > 0.0)) throw std::invalid_argument("StepConfig: cfl must be > 0");
    if (!(dt_min > 0.0) || !(dt_max >= dt_min))
      throw std::invalid_argument("StepConfig: need 0 < dt_min <= dt_max");
    if (!(stab_margin > 0.0) || !(stab_margin <= 1.0))
      throw std::invalid_argument("StepConfig: stab_margin in (0,1]");
    if (!(rho_floor_frac > 0.0) || !(rho_floor_frac < 1.0))
      throw std::invalid_argument("StepConfig: rho_floor_frac in (0,1)");
    if (!(ramp_rate >= 0.0))
      throw std::invalid_argument("StepConfig: ramp_rate must be >= 0");
    if (!(theta_shift >= 0.0))
      throw std::invalid_argument("StepConfig: theta_shift must be >= 0");
  }
};

namespace detail {

/// -L_c(k) >= 0 (phase multiplier).
inline double phase_sym(double k2, const ModelParams& p) {
  return p.eps * k2 * k2 / (p.rho_bar * p.rho_bar) +
         2.0 * k2 / (p.eps * p.rho_bar);
}

/// Solve (I - θ dt L_c) x = w in place, or plain pass-through when disabled.
template <int D>
void solve_phase(SpectralField<D>& w, double dt, double theta,
                 const ModelParams& p, bool enabled) {
  if (!enabled) return;
  const auto& g = *w.grid;
  for (std::int64_t m = 0; m < g.spec_size(); ++m)
    w.c[m] /= 1.0 + theta * dt * phase_sym(g.kappa2(m), p);
}

/// Apply L_c to a copy of the spectrum.
template <int D>
SpectralField<D> apply_phase(const SpectralField<D>& s, const ModelParams& p) {
  SpectralField<D> out = s;
  const auto& g = *s.grid;
  for (std::int64_t m = 0; m < g.spec_size(); ++m)
    out.c[m] *= -phase_sym(g.kappa2(m), p);
  return out;
}

/// Momentum block: per mode, split into components along/normal to k and
/// apply f(sym) to each part.  f receives the non-negative symbol -L.
/// (The array extent is a separate template parameter: deducing D from both
/// the element type and the size position trips int/size_t mismatches.)
template <int D, std::size_t N, class F>
void momentum_map(std::array<SpectralField<D>, N>& w, const ModelParams& p,
                  F&& f) {
  static_assert(N == static_cast<std::size_t>(D));
  const auto& g = *w[0].grid;
  const double a_tr = p.nu0 / p.rho_bar;
  const double a_lg = (2.0 * p.nu0 + p.lam0) / p.rho_bar;
  for (std::int64_t m = 0; m < g.spec_size(); ++m) {
    const double k2 = g.kappa2(m);
    if (k2 == 0.0) continue;
    const auto kv = g.kvec(m);
    std::complex<double> dot{0.0, 0.0};
    double kk = 0.0;
    for (int a = 0; a < D; ++a) {
      dot += static_cast<double>(kv[a]) * w[a].c[m];
      kk += static_cast<double>(kv[a]) * kv[a];
    }
    dot /= kk;
    const double ftr = f(a_tr * k2), flg = f(a_lg * k2);
    for (int a = 0; a < D; ++a) {
      const std::complex<double> par = dot * static_cast<double>(kv[a]);
      w[a].c[m] = flg * par + ftr * (w[a].c[m] - par);
    }
  }
}

template <int D, std::size_t N>
void solve_momentum(std::array<SpectralField<D>, N>& w, double dt,
                    const ModelParams& p, bool enabled) {
  if (!enabled) return;
  momentum_map(w, p, [dt](double sym) { return 1.0 / (1.0 + 0.5 * dt * sym); });
}

template <int D, std::size_t N>
std::array<SpectralField<D>, N> apply_momentum(
    const std::array<SpectralField<D>, N>& s, const ModelParams& p) {
  auto out = s;
  momentum_map(out, p, [](double sym) { return -sym; });
  return out;
}

}  // namespace detail

/// One IMEX step of size cfg.dt.  Throws BlowupError via the density guard.
///
/// The phase solve uses θ = 1/2 + theta_shift·dt rather than the plain
/// trapezoidal θ = 1/2.  At θ = 1/2 the stiff-limit multiplier is exactly -1:
/// modes with dt·λ ≫ 1 ring forever, and because each step's physical-space
/// rounding (~1 ulp of the field) re-seeds them, their amplitude random-walks
/// upward without bound.  The O(dt) shift keeps the scheme second order while
/// giving the stiff limit a strict contraction, |r∞| = 1 - 8(shift·dt)², so the
/// rounding noise saturates at a bounded floor instead of growing.
template <int D>
State<D> step(const State<D>& st, const ModelParams& p, const StepConfig& cfg) {
  const double dt = cfg.dt;
  const double th = 0.5 + cfg.theta_shift * dt;
  const auto& g = st.grid();

  // Stage 1: preconditioned Euler predictor,
  //   Δ* = (I - θ dt L)⁻¹ dt·T(U),   U* = U + Δ*.
  Tendency<D> t1 = rhs(st, p, cfg.rho_floor_frac);

  SpectralField<D> dc = fft(t1.dc);
  for (auto& z : dc.c) z *= dt;
  detail::solve_phase(dc, dt, th, p, cfg.implicit_phase);

  std::array<SpectralField<D>, D> dm;
  for (int a = 0; a < D; ++a) {
    dm[a] = fft(t1.dm[a]);
    for (auto& z : dm[a].c) z *= dt;
  }
  detail::solve_momentum(dm, dt, p, cfg.implicit_viscous);

  State<D> mid(g);
  mid.t = st.t + dt;
  mid.rho = st.rho;
  axpy(dt, t1.drho, mid.rho);
  mid.c = st.c + ifft(dc);
  for (int a = 0; a < D; ++a) mid.m[a] = st.m[a] + ifft(SpectralField<D>(dm[a]));
  mid.check_density(p, cfg.rho_floor_frac);

  // Stage 2: trapezoidal correction,
  //   U⁺ = U + (I - θ dt L)⁻¹ [(dt/2)(T(U) + T(U*)) - θ dt L Δ*].
  Tendency<D> t2 = rhs(mid, p, cfg.rho_floor_frac);

  SpectralField<D> wc = fft(t1.dc + t2.dc);
  if (cfg.implicit_phase) {
    auto lc = detail::apply_phase(dc, p);
    for (std::int64_t m = 0; m < g->spec_size(); ++m)
      wc.c[m] -= 2.0 * th * lc.c[m];
  }
  for (auto& z : wc.c) z *= 0.5 * dt;
  detail::solve_phase(wc, dt, th, p, cfg.implicit_phase);

  std::array<SpectralField<D>, D> wm;
  for (int a = 0; a < D; ++a) wm[a] = fft(t1.dm[a] + t2.dm[a]);
  if (cfg.implicit_viscous) {
    auto lm = detail::apply_momentum(dm, p);
    for (int a = 0; a < D; ++a)
      for (std::int64_t m = 0; m < g->spec_size(); ++m)
        wm[a].c[m] -= lm[a].c[m];
  }
  for (int a = 0; a < D; ++a)
    for (auto& z : wm[a].c) z *= 0.5 * dt;
  detail::solve_momentum(wm, dt, p, cfg.implicit_viscous);

  State<D> out(g);
  out.t = st.t + dt;
  out.rho = st.rho;
  for (std::int64_t i = 0; i < g->size(); ++i)
    out.rho.v[i] += 0.5 * dt * (t1.drho.v[i] + t2.drho.v[i]);
  out.c = st.c + ifft(std::move(wc));
  for (int a = 0; a < D; ++a) out.m[a] = st.m[a] + ifft(std::move(wm[a]));
  // Project the state back onto the retained band.  The physical-space
  // additions above round pointwise, and rounding that lands outside the 2/3
  // band is invisible to the dynamics (every increment is dealiased), so it
  // would otherwise accumulate step after step into an undamped high-k
  // residue that pollutes high-derivative diagnostics.
  out.rho = dealias(out.rho);
  out.c = dealias(out.c);
  for (int a = 0; a < D; ++a) out.m[a] = dealias(out.m[a]);
  out.check_density(p, cfg.rho_floor_frac);
  return out;
}

/// State-dependent step size:
///   dt = max(dt_min, min(dt_max, cfl·h/(max|u|+c_s), remainder cap)).
/// c_s is evaluated at the densest point; the cap activates only when the
/// explicitly-treated variable-coefficient remainder exceeds the implicit
/// symbol somewhere in k (ratio >= 1), which cannot happen in the small-data
/// regime but does for large/stress configurations.
template <int D>
double adaptive_dt(const State<D>& st, const ModelParams& p,
                   const StepConfig& cfg) {
  st.check_density(p, cfg.rho_floor_frac);
  const auto& g = st.grid();

  double umax = 0.0, rho_min = st.rho.v[0], rho_max = st.rho.v[0], phi2_max = 0.0,
         well_dev = 0.0;
  const double a2_imp = 2.0 / (p.eps * p.rho_bar);
  for (std::int64_t i = 0; i < g->size(); ++i) {
    const double r = st.rho.v[i];
    rho_min = std::min(rho_min, r);
    rho_max = std::max(rho_max, r);
    double uu = 0.0;
    for (int a = 0; a < D; ++a) {
      const double u = st.m[a].v[i] / r;
      uu += u * u;
    }
    umax = std::max(umax, std::sqrt(uu));
    const double phi = st.c.v[i] / r;
    phi2_max = std::max(phi2_max, phi * phi);
    well_dev = std::max(
        well_dev, std::abs((3.0 * phi * phi - 1.0) / (p.eps * r) - a2_imp));
  }

  const double cs = std::sqrt(p.dpressure(rho_max));
  double dt = std::min(cfg.dt_max, cfg.cfl * g->h() / (umax + cs));

  // Explicit-remainder coefficients (worst case over the grid) vs the
  // implicit symbols, per power of κ².
  const double A4 = cfg.implicit_phase ? p.eps / (p.rho_bar * p.rho_bar) : 0.0;
  const double A2 = cfg.implicit_phase ? a2_imp : 0.0;
  const double B4 = p.eps / (rho_min * rho_min) - (cfg.implicit_phase ? A4 : 0.0);
  const double B2 = cfg.implicit_phase ? well_dev
                                       : (3.0 * phi2_max + 1.0) / (p.eps * rho_min);
  const double nu_max = p.viscosity(std::sqrt(phi2_max));
  const double Atr = cfg.implicit_viscous ? p.nu0 / p.rho_bar : 0.0;
  const double Alg = cfg.implicit_viscous ? (2.0 * p.nu0 + p.lam0) / p.rho_bar : 0.0;
  const double Btr = nu_max / rho_min - Atr;
  const double Blg = (2.0 * nu_max + p.lam0) / rho_min - Alg;

  double excess = 0.0;
  for (std::int64_t m = 0; m < g->spec_size(); ++m) {
    if (!g->keep(m)) continue;
    const double k2 = g->kappa2(m);
    excess = std::max(excess, (B4 - A4) * k2 * k2 + (B2 - A2) * k2);
    excess = std::max(excess, (Btr - Atr) * k2);
    excess = std::max(excess, (Blg - Alg) * k2);
  }
  if (excess > 0.0) dt = std::min(dt, 2.0 * cfg.stab_margin / excess);

  return std::max(dt, cfg.dt_min);
}

/// Startup floor for the time-step ramp: 2 / (largest stiff symbol over the
/// retained modes).  At dt <= 2/λ the trapezoidal multiplier (1-a)/(1+a),
/// a = dt·λ/2, is non-negative, so whatever spectral content the initial data
/// carries decays monotonically instead of ringing with |r| ≈ 1.  The run
/// loop caps dt by ramp_floor + ramp_rate·t; the cap is a pure function of t
/// so a resumed run reproduces the original step sequence exactly.  Without
/// the ramp, stiff modes excited at t = 0 flip sign every step for thousands
/// of steps, and their drawn-out pseudo-decay pollutes both the trajectory's
/// transient and any a-posteriori dissipation accounting.
template <int D>
double ramp_floor(const State<D>& st, const ModelParams& p,
                  const StepConfig& cfg) {
  const auto& g = st.grid();
  const double a_lg = (2.0 * p.nu0 + p.lam0) / p.rho_bar;
  double sym = 0.0;
  for (std::int64_t m = 0; m < g->spec_size(); ++m) {
    if (!g->keep(m)) continue;
    const double k2 = g->kappa2(m);
    sym = std::max(sym, detail::phase_sym(k2, p));
    sym = std::max(sym, a_lg * k2);
  }
  return sym > 0.0 ? 2.0 / sym : cfg.dt_max;
}

/// Rounds an adaptive step down to the dyadic lattice: the largest 2^-m that
/// is <= dt and divides the current time t exactly.  Every accepted step
/// then lands on a dyadic rational, time accumulates without rounding, and
/// integer target times are hit exactly rather than by truncating the last
/// step.  This is what makes a run stopped at t = 5 and resumed to t = 10
/// take the very same step sequence as an uninterrupted run to t = 10: both
/// pass through t = 5 exactly, so there is no seam perturbation at all.  If
/// t is far off the lattice (it can only get there through a fractional
/// final-step truncation at a non-dyadic t_end), alignment is abandoned
/// after a few refinement levels and dt is returned unchanged.
inline double dyadic_floor(double dt, double t) {
  if (!(dt > 0.0)) return dt;
  double q = 1.0;
  while (q > dt) q *= 0.5;  // largest power of two <= dt
  for (int extra = 0; extra < 8; ++extra) {
    const double steps = t / q;  // exact: q is a power of two
    if (steps == std::floor(steps)) return q;
    q *= 0.5;
  }
  return dt;
}

}  // namespace nsch
