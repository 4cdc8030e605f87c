#pragma once

// Trajectory diagnostics and verdicts.
//
//   * EnergyReport: the energy functional ∫ ρ|u|²/2 + G(ρ) + ε|∇φ|²/2
//     + ρ(φ²-1)²/(4ε), its exact dissipation, and the lower-bound dissipation
//     (ν₀/2)‖∇u‖² + ‖∇μ‖² used in the budget inequality.
//   * NormSuite: the H⁰..H⁴ hierarchy of (ρ-ρ̄, u, φ) plus pointwise bounds.
//   * measure(): one Sample = energies + norms + the low-mode energy
//     E₋ₛ = ‖Λ⁻ˢ(ρ-ρ̄)‖² + ‖Λ⁻ˢu‖² + ‖Λ⁻ˢ∇φ‖² + ‖Λ⁻ˢ(φ²-1)‖² (means removed).
//   * check_*(): pure functions from a sampled series to CheckReports
//     (conservation, energy budget, a-priori bounds, algebraic-decay
//     envelopes, low-mode boundedness).
//
// Checks never mutate samples and may run on series re-read from disk.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "nsch/model.hpp"

namespace nsch {

// ---------------------------------------------------------------------------
// Energy functional and dissipation
// ---------------------------------------------------------------------------

struct EnergyReport {
  double kinetic = 0.0;     // ∫ |m|²/(2ρ)
  double thermo = 0.0;      // ∫ G(ρ)
  double gradient = 0.0;    // (ε/2) ∫ |∇φ|²
  double doublewell = 0.0;  // ∫ ρ(φ²-1)²/(4ε)
  double total = 0.0;
  double diss_visc = 0.0;   // (1/2)∫ ν(φ)|∇u+∇uᵀ|² + ∫ λ₀(div u)²
  double diss_mu = 0.0;     // ∫ |∇μ|²
  double diss_lower = 0.0;  // (ν₀/2)∫ |∇u|² + ∫ |∇μ|²  (≤ diss_visc + diss_mu)
};

template <int D>
EnergyReport energy_report(const State<D>& st, const ModelParams& p) {
  const auto& g = st.grid();
  const auto N = g->size();
  EnergyReport r;

  VectorField<D> u = st.velocity();
  Field<D> phi = st.phase();

  double kin = 0.0, th = 0.0, dw = 0.0;
  for (std::int64_t i = 0; i < N; ++i) {
    double mm = 0.0;
    for (int a = 0; a < D; ++a) mm += st.m[a].v[i] * st.m[a].v[i];
    kin += 0.5 * mm / st.rho.v[i];
    th += thermo_G_scalar(st.rho.v[i], p);
    const double w = phi.v[i] * phi.v[i] - 1.0;
    dw += st.rho.v[i] * w * w;
  }
  r.kinetic = kin / N;
  r.thermo = th / N;
  r.doublewell = dw / N / (4.0 * p.eps);

  VectorField<D> gphi = grad(phi);
  double gg = 0.0;
  for (int a = 0; a < D; ++a)
    for (std::int64_t i = 0; i < N; ++i) gg += gphi[a].v[i] * gphi[a].v[i];
  r.gradient = 0.5 * p.eps * gg / N;
  r.total = r.kinetic + r.thermo + r.gradient + r.doublewell;

  // velocity gradient tensor du[i][j] = ∂_j u_i
  std::array<std::array<Field<D>, D>, D> du;
  for (int i = 0; i < D; ++i) {
    auto s = fft(u[i]);
    for (int j = 0; j < D; ++j) {
      auto d = s;
      derivative_inplace(d, j, 1);
      du[i][j] = ifft(std::move(d));
    }
  }
  double visc = 0.0, lower = 0.0;
  for (std::int64_t i = 0; i < N; ++i) {
    const double nu = p.viscosity(phi.v[i]);
    double dsq = 0.0, gsq = 0.0, divu = 0.0;
    for (int a = 0; a < D; ++a) {
      divu += du[a][a].v[i];
      for (int b = 0; b < D; ++b) {
        const double sym = du[a][b].v[i] + du[b][a].v[i];
        dsq += 0.5 * sym * sym;  // (1/2)|∇u+∇uᵀ|²
        gsq += du[a][b].v[i] * du[a][b].v[i];
      }
    }
    visc += nu * dsq + p.lam0 * divu * divu;
    lower += 0.5 * p.nu0 * gsq;
  }
  r.diss_visc = visc / N;

  Field<D> mu = chemical_potential(st.rho, phi, p);
  VectorField<D> gmu = grad(mu);
  double mm = 0.0;
  for (int a = 0; a < D; ++a)
    for (std::int64_t i = 0; i < N; ++i) mm += gmu[a].v[i] * gmu[a].v[i];
  r.diss_mu = mm / N;
  r.diss_lower = lower / N + r.diss_mu;
  return r;
}

/// The lower-bound dissipation (ν₀/2)‖∇u‖² + ‖∇μ‖² alone, via Parseval.
/// Matches EnergyReport::diss_lower (odd derivatives drop the Nyquist
/// planes, so those axes are excluded per mode).  Evaluating this at the
/// midpoint state (Uⁿ+Uⁿ⁺¹)/2 and multiplying by dt gives the quadrature of
/// the dissipation integral that reproduces the trapezoidal scheme's own
/// energy drop exactly on the stiff linear part; endpoint quadratures
/// overestimate that drop by O((dt·symbol)²) and are useless for stiff
/// content.
template <int D>
double diss_lower_value(const State<D>& st, const ModelParams& p) {
  const auto& g = *st.grid();
  auto grad_sq = [&](const Field<D>& f) {
    auto s = fft(f);
    double acc = 0.0;
    for (std::int64_t m = 0; m < g.spec_size(); ++m) {
      const double e = g.weight(m) * std::norm(s.c[m]);
      if (e == 0.0) continue;
      const auto k = g.kvec(m);
      double k2 = 0.0;
      for (int a = 0; a < D; ++a)
        if (2 * std::abs(k[a]) != g.n())
          k2 += (two_pi * k[a]) * (two_pi * k[a]);
      acc += k2 * e;
    }
    return acc;
  };
  VectorField<D> u = st.velocity();
  double gu = 0.0;
  for (int a = 0; a < D; ++a) gu += grad_sq(u[a]);
  Field<D> mu = chemical_potential(st.rho, st.phase(), p);
  return 0.5 * p.nu0 * gu + grad_sq(mu);
}

// ---------------------------------------------------------------------------
// Norm hierarchy
// ---------------------------------------------------------------------------

struct NormSuite {
  std::array<double, 5> hk_sigma{};  // ‖ρ-ρ̄‖_{H^k}, k = 0..4
  std::array<double, 5> hk_u{};      // ‖u‖_{H^k}
  std::array<double, 5> hk_phi{};    // ‖φ‖_{H^k} (mean included)
  double linf_phi = 0.0;
  double l2_phi2m1 = 0.0;  // ‖φ²-1‖_{L²}
  double min_rho = 0.0, max_rho = 0.0, mean_rho = 0.0, mean_c = 0.0;
  std::array<double, 3> mean_m{};  // zero-padded beyond D
};

/// One time sample: everything the verdicts consume.
struct Sample {
  double t = 0.0;
  double dt = 0.0;  // step size in use (filled by the run loop)
  EnergyReport energy;
  NormSuite norms;
  double neg_s = 0.0;                // the s of E₋ₛ below (0 = not computed)
  std::array<double, 4> neg_parts{};  // ‖Λ⁻ˢ·‖ of σ, u, ∇φ, φ²-1
  double neg_energy = 0.0;            // sum of squared parts
  // Running ∫₀ᵗ (ν₀/2)‖∇u‖² + ‖∇μ‖², accumulated by the run loop at step
  // resolution with midpoint-state evaluation (see diss_lower_value).
  double diss_integral = 0.0;
};

namespace detail {

/// Spectral moments Σ_k w·κ^{2j}|ĉ(k)|² for j = 0..4 plus the Λ-power sums
/// Σ_{k≠0} w·κ^{-2s}|ĉ|² and Σ_{k≠0} w·κ^{2-2s}|ĉ|².
template <int D>
void accumulate_moments(const SpectralField<D>& s, double neg_s,
                        std::array<double, 5>& M, double& neg, double& neg1) {
  const auto& g = *s.grid;
  for (std::int64_t m = 0; m < g.spec_size(); ++m) {
    const double e = g.weight(m) * std::norm(s.c[m]);
    if (e == 0.0) continue;
    const double k2 = g.kappa2(m);
    double pw = 1.0;
    for (int j = 0; j < 5; ++j) {
      M[j] += pw * e;
      pw *= k2;
    }
    if (k2 > 0.0 && neg_s > 0.0) {
      neg += e * std::pow(k2, -neg_s);
      neg1 += e * std::pow(k2, 1.0 - neg_s);
    }
  }
}

inline std::array<double, 5> partial_sqrt(const std::array<double, 5>& M) {
  std::array<double, 5> out{};
  double acc = 0.0;
  for (int k = 0; k < 5; ++k) {
    acc += M[k];
    out[k] = std::sqrt(acc);
  }
  return out;
}

}  // namespace detail

/// Full diagnostic sample.  neg_s ∈ [0, 1.5); 0 skips the E₋ₛ block.
template <int D>
Sample measure(const State<D>& st, const ModelParams& p, double neg_s) {
  if (neg_s < 0.0 || neg_s >= 1.5)
    throw std::invalid_argument("measure: neg_s must lie in [0, 1.5)");
  const auto& g = st.grid();
  const auto N = g->size();

  Sample out;
  out.t = st.t;
  out.neg_s = neg_s;
  out.energy = energy_report(st, p);

  // pointwise suite
  NormSuite& ns = out.norms;
  ns.min_rho = st.rho.min();
  ns.max_rho = st.rho.max();
  ns.mean_rho = st.rho.mean();
  ns.mean_c = st.c.mean();
  for (int a = 0; a < D; ++a) ns.mean_m[a] = st.m[a].mean();

  Field<D> phi = st.phase();
  double linf = 0.0, well2 = 0.0;
  for (std::int64_t i = 0; i < N; ++i) {
    linf = std::max(linf, std::abs(phi.v[i]));
    const double w = phi.v[i] * phi.v[i] - 1.0;
    well2 += w * w;
  }
  ns.linf_phi = linf;
  ns.l2_phi2m1 = std::sqrt(well2 / N);

  // spectral moments of σ = ρ-ρ̄, u, φ, φ²-1
  std::array<double, 5> Ms{}, Mu{}, Mp{}, Mw{};
  double ns_sig = 0.0, n1_sig = 0.0, ns_u = 0.0, n1_u = 0.0;
  double ns_phi = 0.0, n1_phi = 0.0, ns_w = 0.0, n1_w = 0.0;

  auto srho = fft(st.rho);
  srho.c[0] -= p.rho_bar;
  detail::accumulate_moments(srho, neg_s, Ms, ns_sig, n1_sig);

  VectorField<D> u = st.velocity();
  for (int a = 0; a < D; ++a)
    detail::accumulate_moments(fft(u[a]), neg_s, Mu, ns_u, n1_u);

  auto sphi = fft(phi);
  detail::accumulate_moments(sphi, neg_s, Mp, ns_phi, n1_phi);

  Field<D> well = map(phi, [](double f) { return f * f - 1.0; });
  detail::accumulate_moments(fft(well), neg_s, Mw, ns_w, n1_w);

  ns.hk_sigma = detail::partial_sqrt(Ms);
  ns.hk_u = detail::partial_sqrt(Mu);
  ns.hk_phi = detail::partial_sqrt(Mp);

  if (neg_s > 0.0) {
    out.neg_parts[0] = std::sqrt(ns_sig);
    out.neg_parts[1] = std::sqrt(ns_u);
    out.neg_parts[2] = std::sqrt(n1_phi);  // ‖Λ⁻ˢ∇φ‖² = Σ κ^{2-2s}|φ̂|²
    out.neg_parts[3] = std::sqrt(ns_w);
    for (double v : out.neg_parts) out.neg_energy += v * v;
  }
  return out;
}

template <int D>
NormSuite norm_suite(const State<D>& st, const ModelParams& p) {
  return measure(st, p, 0.0).norms;
}

// ---------------------------------------------------------------------------
// Spectral refinement (exact trigonometric interpolation onto a finer grid)
// ---------------------------------------------------------------------------

/// Zero-padded interpolation onto an (n·factor)^D grid.  Exact only for
/// fields band-limited below the dealias cutoff, so content above the cutoff
/// (beyond a rounding-level 1e-10 energy fraction) is rejected.
template <int D>
Field<D> refine(const Field<D>& f, int factor) {
  if (factor < 1) throw std::invalid_argument("refine: factor must be >= 1");
  if (factor == 1) return f;
  const auto& g = f.grid;
  auto s = fft(f);
  double total = 0.0, outside = 0.0;
  for (std::int64_t m = 0; m < g->spec_size(); ++m) {
    const double e = g->weight(m) * std::norm(s.c[m]);
    total += e;
    if (!g->keep(m)) outside += e;
  }
  if (total > 0.0 && outside > 1e-10 * total)
    throw std::invalid_argument(
        "refine: field has content above the dealias cutoff");

  auto g2 = Grid<D>::make(g->n() * factor);
  SpectralField<D> s2(g2);
  for (std::int64_t m = 0; m < g->spec_size(); ++m) {
    if (!g->keep(m) || s.c[m] == std::complex<double>{}) continue;
    const auto k = g->kvec(m);
    std::array<int, D> idx{};
    for (int a = 0; a < D; ++a)
      idx[a] = k[a] >= 0 ? k[a] : static_cast<int>(g2->n()) + k[a];
    s2.c[g2->spec_index(idx)] = s.c[m];
  }
  return ifft(std::move(s2));
}

// ---------------------------------------------------------------------------
// Verdicts
// ---------------------------------------------------------------------------

struct CheckReport {
  std::string name;   // machine id, e.g. "conservation.rho"
  std::string claim;  // what was verified, in words
  bool pass = false;
  double observed = 0.0;  // the decision scalar
  double allowed = 0.0;   // the threshold it was compared against
  double worst_t = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::pair<std::string, double>> stats;  // fitted constants etc.
};

namespace detail {

inline CheckReport empty_series(const std::string& name,
                                const std::string& claim) {
  CheckReport r;
  r.name = name;
  r.claim = claim;
  r.pass = false;
  r.observed = std::numeric_limits<double>::quiet_NaN();
  return r;
}

}  // namespace detail

/// Relative drift of the conserved means (mass, phase mass, momentum).
inline std::vector<CheckReport> check_conservation(
    const std::vector<Sample>& samples, double tol = 1e-10) {
  auto one = [&](const std::string& name, const std::string& claim,
                 auto&& value) {
    CheckReport r;
    r.name = name;
    r.claim = claim;
    r.allowed = tol;
    if (samples.empty()) return detail::empty_series(name, claim);
    const double v0 = value(samples.front());
    const double scale =
        std::max(std::abs(v0), std::abs(samples.front().norms.mean_rho));
    for (const auto& s : samples) {
      const double d = std::abs(value(s) - v0) / scale;
      if (d >= r.observed) {
        r.observed = d;
        r.worst_t = s.t;
      }
    }
    r.pass = r.observed <= tol;
    return r;
  };
  std::vector<CheckReport> out;
  out.push_back(one("conservation.mass",
                    "the mean density drifts by at most " + std::to_string(tol) +
                        " relative over the run",
                    [](const Sample& s) { return s.norms.mean_rho; }));
  out.push_back(one("conservation.phase_mass",
                    "the mean of the phase mass rho*phi drifts by at most " +
                        std::to_string(tol) + " relative over the run",
                    [](const Sample& s) { return s.norms.mean_c; }));
  for (int a = 0; a < 3; ++a)
    out.push_back(one(
        "conservation.momentum." + std::to_string(a),
        "the mean momentum component drifts by at most " + std::to_string(tol) +
            " relative over the run",
        [a](const Sample& s) { return s.norms.mean_m[a]; }));
  return out;
}

/// Cumulative budget: E(t_j) + ∫₀^{t_j} lower-bound dissipation must stay
/// within (1+slack)·E(0) for every sample.  The integral is the
/// step-resolution one carried in Sample::diss_integral (minus the first
/// sample's value, so resumed or windowed series measure from their start).
inline CheckReport check_energy_law(const std::vector<Sample>& samples,
                                    double slack = 0.05) {
  const std::string claim =
      "energy plus the accumulated lower-bound dissipation "
      "(nu0/2)*|grad u|^2 + |grad mu|^2 never exceeds (1+slack) of the "
      "initial energy";
  CheckReport r;
  r.name = "energy.budget";
  r.claim = claim;
  if (samples.empty()) return detail::empty_series(r.name, claim);
  const double E0 = samples.front().energy.total;
  const double I0 = samples.front().diss_integral;
  r.allowed = (1.0 + slack) * E0 + 1e-12 * (1.0 + std::abs(E0));
  r.observed = E0;
  r.worst_t = samples.front().t;
  for (std::size_t j = 1; j < samples.size(); ++j) {
    const auto& b = samples[j];
    const double budget = b.energy.total + (b.diss_integral - I0);
    if (budget > r.observed) {
      r.observed = budget;
      r.worst_t = b.t;
    }
  }
  r.pass = r.observed <= r.allowed;
  r.stats = {{"initial_energy", E0},
             {"final_energy", samples.back().energy.total},
             {"dissipation_integral", samples.back().diss_integral - I0}};
  return r;
}

/// Largest positive jump of the total energy between consecutive samples.
inline double max_positive_increment(const std::vector<Sample>& samples) {
  double m = 0.0;
  for (std::size_t j = 1; j < samples.size(); ++j)
    m = std::max(m, samples[j].energy.total - samples[j - 1].energy.total);
  return m;
}

/// A-priori bounds: the H³/H² bracket ratio stays finite, the density stays
/// inside [ρ̄/2, ∞) and |φ| stays within 1 + 10δ.
inline std::vector<CheckReport> check_apriori(
    const std::vector<Sample>& samples, double delta) {
  std::vector<CheckReport> out;
  const std::string c1 =
      "the squared bracket |rho-rho_bar|_{H3}^2 + |u|_{H3}^2 + "
      "|grad phi|_{H2}^2 + |phi^2-1|_{L2}^2, relative to its initial value, "
      "stays finite over the run";
  const std::string c2 =
      "the pointwise density never falls below half its mean";
  const std::string c3 = "sup |phi| stays within 1 + 10*delta";
  if (samples.empty()) {
    out.push_back(detail::empty_series("apriori.bracket", c1));
    out.push_back(detail::empty_series("apriori.density", c2));
    out.push_back(detail::empty_series("apriori.phase_max", c3));
    return out;
  }
  auto bracket2 = [](const Sample& s) {
    const auto& n = s.norms;
    const double gphi =
        std::max(0.0, n.hk_phi[3] * n.hk_phi[3] - n.hk_phi[0] * n.hk_phi[0]);
    return n.hk_sigma[3] * n.hk_sigma[3] + n.hk_u[3] * n.hk_u[3] + gphi +
           n.l2_phi2m1 * n.l2_phi2m1;
  };
  const double b0 = bracket2(samples.front());
  CheckReport r1;
  r1.name = "apriori.bracket";
  r1.claim = c1;
  r1.allowed = std::numeric_limits<double>::infinity();
  double bmax = 0.0;
  for (const auto& s : samples) {
    const double b = bracket2(s);
    if (b >= bmax) {
      bmax = b;
      r1.worst_t = s.t;
    }
  }
  r1.observed = b0 > 1e-30 ? bmax / b0 : (bmax <= 1e-30 ? 1.0 : INFINITY);
  r1.pass = std::isfinite(r1.observed);
  r1.stats = {{"initial_bracket2", b0}, {"max_bracket2", bmax}};
  out.push_back(r1);

  CheckReport r2;
  r2.name = "apriori.density";
  r2.claim = c2;
  const double rho_bar = samples.front().norms.mean_rho;
  r2.allowed = 0.5 * rho_bar;
  r2.observed = std::numeric_limits<double>::infinity();
  for (const auto& s : samples)
    if (s.norms.min_rho < r2.observed) {
      r2.observed = s.norms.min_rho;
      r2.worst_t = s.t;
    }
  r2.pass = r2.observed >= r2.allowed;
  out.push_back(r2);

  CheckReport r3;
  r3.name = "apriori.phase_max";
  r3.claim = c3;
  // The 1e-12 term is a measurement floor (pointwise rounding of phi = c/rho
  // sits at ~1e-16); it only matters for delta = 0 equilibrium runs.
  r3.allowed = 1.0 + 10.0 * delta + 1e-12;
  r3.observed = 0.0;
  for (const auto& s : samples)
    if (s.norms.linf_phi > r3.observed) {
      r3.observed = s.norms.linf_phi;
      r3.worst_t = s.t;
    }
  r3.pass = r3.observed <= r3.allowed;
  out.push_back(r3);
  return out;
}

/// Low bracket ‖u‖²_{L²} + ‖φ²-1‖_{L²}; decays like (1+t)^{-s}.
inline double decay_low_value(const Sample& s) {
  return s.norms.hk_u[0] * s.norms.hk_u[0] + s.norms.l2_phi2m1;
}

/// High bracket ‖ρ-ρ̄‖²_{H³} + ‖∇u‖²_{H²} + ‖∇φ‖²_{H²}; decays (1+t)^{-(2+s)}.
inline double decay_high_value(const Sample& s) {
  const auto& n = s.norms;
  const double gu =
      std::max(0.0, n.hk_u[3] * n.hk_u[3] - n.hk_u[0] * n.hk_u[0]);
  const double gphi =
      std::max(0.0, n.hk_phi[3] * n.hk_phi[3] - n.hk_phi[0] * n.hk_phi[0]);
  return n.hk_sigma[3] * n.hk_sigma[3] + gu + gphi;
}

namespace detail {

/// Largest r such that v(t) ≤ v(t₀)·((1+t)/(1+t₀))^{-r} holds on the series
/// (NaN if no admissible pair).  Metadata, not itself asserted directly.
template <class F>
double fitted_rate(const std::vector<Sample>& samples, std::size_t anchor,
                   F&& value) {
  const double t0 = samples[anchor].t;
  const double v0 = value(samples[anchor]);
  double r = std::numeric_limits<double>::infinity();
  bool any = false;
  if (v0 <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  for (std::size_t j = anchor + 1; j < samples.size(); ++j) {
    const double v = value(samples[j]);
    if (v <= 0.0) continue;
    const double denom = std::log((1.0 + samples[j].t) / (1.0 + t0));
    if (denom <= 0.0) continue;
    r = std::min(r, std::log(v0 / v) / denom);
    any = true;
  }
  return any ? r : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

/// Envelope domination: anchor C = v(t₀)(1+t₀)^r at the first sample with
/// t ≥ t₀, then require v(t)(1+t)^r ≤ C(1+1e-9) for every later sample.
/// Faster-than-algebraic decay passes (upper-bound semantics).
template <class F>
CheckReport check_decay_envelope(const std::vector<Sample>& samples,
                                 double rate, double t0, F&& value,
                                 const std::string& name,
                                 const std::string& claim) {
  CheckReport r;
  r.name = name;
  r.claim = claim;
  if (t0 < 1.0) throw std::invalid_argument("check_decay: need t0 >= 1");
  if (samples.empty() || samples.back().t < 10.0 * t0) {
    r = detail::empty_series(name, claim);
    r.stats = {{"required_final_t", 10.0 * t0}};
    return r;
  }
  std::size_t anchor = 0;
  while (anchor < samples.size() && samples[anchor].t < t0) ++anchor;
  if (anchor == samples.size()) return detail::empty_series(name, claim);

  const double ta = samples[anchor].t;
  const double C = value(samples[anchor]) * std::pow(1.0 + ta, rate);
  r.allowed = C * (1.0 + 1e-9) + 1e-28;
  r.observed = C;
  r.worst_t = ta;
  for (std::size_t j = anchor + 1; j < samples.size(); ++j) {
    const double nv = value(samples[j]) * std::pow(1.0 + samples[j].t, rate);
    if (nv > r.observed) {
      r.observed = nv;
      r.worst_t = samples[j].t;
    }
  }
  r.pass = r.observed <= r.allowed;
  r.stats = {{"envelope_C", C},
             {"anchor_t", ta},
             {"rate", rate},
             {"fitted_rate",
              detail::fitted_rate(samples, anchor, std::forward<F>(value))}};
  return r;
}

inline CheckReport check_decay_low(const std::vector<Sample>& samples,
                                   double s = 1.0, double t0 = 1.0) {
  return check_decay_envelope(
      samples, s, t0, decay_low_value, "decay.low",
      "|u|_{L2}^2 + |phi^2-1|_{L2} is dominated by its envelope "
      "C(1+t)^{-s} anchored at t0");
}

inline CheckReport check_decay_high(const std::vector<Sample>& samples,
                                    double s = 1.0, double t0 = 1.0) {
  return check_decay_envelope(
      samples, 2.0 + s, t0, decay_high_value, "decay.high",
      "|rho-rho_bar|_{H3}^2 + |grad u|_{H2}^2 + |grad phi|_{H2}^2 is "
      "dominated by its envelope C(1+t)^{-(2+s)} anchored at t0");
}

/// Norm ordering: the high bracket admits an envelope rate at least as large
/// as the low bracket's on the same series.
inline CheckReport check_rate_ordering(const std::vector<Sample>& samples,
                                       double t0 = 1.0) {
  CheckReport r;
  r.name = "decay.rate_ordering";
  r.claim =
      "the fitted minimal envelope rate of the high-norm bracket is at "
      "least the fitted rate of the low-norm bracket";
  if (samples.empty()) return detail::empty_series(r.name, r.claim);
  std::size_t anchor = 0;
  while (anchor < samples.size() && samples[anchor].t < t0) ++anchor;
  if (anchor >= samples.size()) return detail::empty_series(r.name, r.claim);
  const double rl = detail::fitted_rate(samples, anchor, decay_low_value);
  const double rh = detail::fitted_rate(samples, anchor, decay_high_value);
  r.observed = rh;
  r.allowed = rl;
  r.stats = {{"rate_low", rl}, {"rate_high", rh}};
  if (std::isnan(rl) || std::isnan(rh)) {
    // degenerate (identically zero) series carry no ordering information
    r.pass = true;
    return r;
  }
  r.pass = rh >= rl - 1e-12;
  return r;
}

/// Low-mode energy boundedness: E₋ₛ(t) ≤ factor · sup of E₋ₛ over the first
/// `frac` fraction of the samples.
inline CheckReport check_neg_energy(const std::vector<Sample>& samples,
                                    double factor = 1.1, double frac = 0.1) {
  CheckReport r;
  r.name = "neg_energy.bounded";
  r.claim =
      "the negative-order energy E_{-s} never exceeds " +
      std::to_string(factor) +
      " times its supremum over the first tenth of the samples";
  if (samples.empty()) return detail::empty_series(r.name, r.claim);
  const std::size_t k =
      std::max<std::size_t>(1, static_cast<std::size_t>(samples.size() * frac));
  double sup10 = 0.0;
  for (std::size_t j = 0; j < k; ++j)
    sup10 = std::max(sup10, samples[j].neg_energy);
  r.allowed = factor * sup10 + 1e-28;
  r.observed = 0.0;
  for (const auto& s : samples)
    if (s.neg_energy > r.observed) {
      r.observed = s.neg_energy;
      r.worst_t = s.t;
    }
  r.pass = r.observed <= r.allowed;
  r.stats = {{"early_sup", sup10},
             {"prefix_samples", static_cast<double>(k)}};
  return r;
}

}  // namespace nsch
