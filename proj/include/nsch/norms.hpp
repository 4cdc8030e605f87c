#pragma once

// Norm hierarchy on the unit torus: L^p by grid quadrature, H^k and Ḣ^{-s}
// spectrally via Parseval, plus ratio/defect helpers for the interpolation,
// Poincaré, Gagliardo–Nirenberg, product and convolution inequalities the
// verification harness reports on.
//
// Conventions: |T^d| = 1, so integrals are means.  ‖∇^j f‖² sums over all
// ordered multi-indices of length j, which on the Fourier side is the single
// multiplier (2π|k|)^{2j}.  Vector fields use the root-sum-of-squares of their
// components.

#include <cmath>
#include <limits>
#include <stdexcept>

#include "nsch/spectral.hpp"

namespace nsch {

/// L^p norm by grid quadrature (h^d Σ|f|^p)^{1/p}; p = ∞ gives max|f|.
template <int D>
double lp_norm(const Field<D>& f, double p) {
  if (p < 1.0) throw std::invalid_argument("lp_norm: p must be >= 1");
  const std::int64_t n = f.grid->size();
  if (std::isinf(p)) {
    double m = 0.0;
    for (double x : f.v) m = std::max(m, std::abs(x));
    return m;
  }
  double s = 0.0;
  if (p == 2.0) {
    for (double x : f.v) s += x * x;
  } else {
    for (double x : f.v) s += std::pow(std::abs(x), p);
  }
  return std::pow(s / static_cast<double>(n), 1.0 / p);
}

template <int D>
double lp_norm(const VectorField<D>& u, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    const auto mag = u.magnitude();
    for (double x : mag.v) m = std::max(m, x);
    return m;
  }
  return lp_norm(u.magnitude(), p);
}

/// Homogeneous seminorm ‖∇^j f‖_{L²} from the spectrum.
template <int D>
double grad_seminorm(const SpectralField<D>& s, int j) {
  const auto& g = *s.grid;
  double sum = 0.0;
  for (std::int64_t m = 0; m < g.spec_size(); ++m)
    sum += g.weight(m) * std::pow(g.kappa2(m), j) * std::norm(s.c[m]);
  return std::sqrt(sum);
}

template <int D>
double grad_seminorm(const Field<D>& f, int j) {
  return grad_seminorm(fft(f), j);
}

/// Full H^k norm.  The j = 0 term uses the same grid quadrature as lp_norm,
/// so sobolev_norm(f, 0) == lp_norm(f, 2) exactly.
template <int D>
double sobolev_norm(const Field<D>& f, int k) {
  if (k < 0) throw std::invalid_argument("sobolev_norm: k must be >= 0");
  const double l2 = lp_norm(f, 2.0);
  double sum = l2 * l2;
  if (k > 0) {
    auto s = fft(f);
    for (int j = 1; j <= k; ++j) {
      const double t = grad_seminorm(s, j);
      sum += t * t;
    }
  }
  return std::sqrt(sum);
}

template <int D>
double sobolev_norm(const VectorField<D>& u, int k) {
  double sum = 0.0;
  for (int a = 0; a < D; ++a) {
    const double t = sobolev_norm(u[a], k);
    sum += t * t;
  }
  return std::sqrt(sum);
}

/// Negative-order norm ‖f‖_{Ḣ^{-s}} = ‖Λ^{-s}(f - ⨏f)‖_{L²}, 0 < s < 3/2.
/// The mean is removed unconditionally (on the torus that is the only
/// obstruction to Ḣ^{-s} membership).
template <int D>
double neg_sobolev_norm(const Field<D>& f, double s) {
  if (!(s > 0.0) || !(s < 1.5))
    throw std::invalid_argument("neg_sobolev_norm: need 0 < s < 3/2");
  auto sp = fft(f);
  sp.c[0] = 0.0;
  double sum = 0.0;
  const auto& g = *sp.grid;
  for (std::int64_t m = 1; m < g.spec_size(); ++m)
    sum += g.weight(m) * std::pow(g.kappa2(m), -s) * std::norm(sp.c[m]);
  return std::sqrt(sum);
}

template <int D>
double neg_sobolev_norm(const VectorField<D>& u, double s) {
  double sum = 0.0;
  for (int a = 0; a < D; ++a) {
    const double t = neg_sobolev_norm(u[a], s);
    sum += t * t;
  }
  return std::sqrt(sum);
}

/// ‖∇^l f‖ vs ‖∇^{l+1} f‖^{1-θ} ‖f‖_{Ḣ^{-s}}^θ with θ = 1/(l+s+1).
/// On the Fourier side this is Hölder with sharp constant 1.
struct InterpolationReport {
  double lhs = 0.0, rhs = 0.0, ratio = 0.0, theta = 0.0;
};

template <int D>
InterpolationReport check_interpolation(const Field<D>& f, int l, double s) {
  if (l < 0) throw std::invalid_argument("check_interpolation: l must be >= 0");
  InterpolationReport r;
  r.theta = 1.0 / (l + s + 1.0);
  auto sp = fft(f);
  sp.c[0] = 0.0;  // the inequality concerns the mean-free part
  r.lhs = grad_seminorm(sp, l);
  const double hi = grad_seminorm(sp, l + 1);
  double lo = 0.0;
  {
    const auto& g = *sp.grid;
    for (std::int64_t m = 1; m < g.spec_size(); ++m)
      lo += g.weight(m) * std::pow(g.kappa2(m), -s) * std::norm(sp.c[m]);
    lo = std::sqrt(lo);
  }
  r.rhs = std::pow(hi, 1.0 - r.theta) * std::pow(lo, r.theta);
  r.ratio = (r.rhs > 0.0) ? r.lhs / r.rhs
                          : (r.lhs > 0.0 ? std::numeric_limits<double>::infinity()
                                         : 0.0);
  return r;
}

/// ‖f - ⨏f‖_{L^p} / ‖∇f‖_{L^p}.  For p = 2 the sharp constant on the unit
/// torus is 1/(2π) (spectral gap at |k| = 1).
template <int D>
double poincare_defect(const Field<D>& f, double p) {
  Field<D> cent = f - f.mean();
  const double num = lp_norm(cent, p);
  const double den = lp_norm(grad(f), p);
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

/// Gagliardo–Nirenberg ratio ‖∇^l f‖_{L^p} / (‖∇^s f‖_{L^r}^{1-θ} ‖∇^k f‖_{L^q}^θ)
/// for integer derivative counts; θ is supplied by the caller (it is pinned by
/// scaling).  The constant is not specified by the source estimate, so only
/// the ratio is reported.
struct GNReport {
  double lhs = 0.0, rhs = 0.0, ratio = 0.0;
};

template <int D>
Field<D> derivative_tensor_magnitude(const Field<D>& f, int order) {
  // |∇^j f|(x) = sqrt(Σ over ordered multi-indices |D^α f|²), assembled by
  // recursive application of the gradient.
  std::vector<Field<D>> cur{f};
  for (int j = 0; j < order; ++j) {
    std::vector<Field<D>> next;
    next.reserve(cur.size() * D);
    for (const auto& g : cur) {
      auto dg = grad(g);
      for (int a = 0; a < D; ++a) next.push_back(std::move(dg[a]));
    }
    cur = std::move(next);
  }
  Field<D> out(f.grid);
  for (std::int64_t i = 0; i < f.grid->size(); ++i) {
    double s = 0.0;
    for (const auto& g : cur) s += g.v[i] * g.v[i];
    out.v[i] = std::sqrt(s);
  }
  return out;
}

template <int D>
GNReport check_gagliardo_nirenberg(const Field<D>& f, int l, double p, int s,
                                   double r_exp, int k, double q, double theta) {
  GNReport rep;
  rep.lhs = lp_norm(derivative_tensor_magnitude(f, l), p);
  const double a = lp_norm(derivative_tensor_magnitude(f, s), r_exp);
  const double b = lp_norm(derivative_tensor_magnitude(f, k), q);
  rep.rhs = std::pow(a, 1.0 - theta) * std::pow(b, theta);
  rep.ratio = (rep.rhs > 0.0)
                  ? rep.lhs / rep.rhs
                  : (rep.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  return rep;
}

/// Convolution-inequality ratio ‖Λ^{-s} f‖_{L^q} / ‖f‖_{L^p} on mean-free f.
template <int D>
double hls_ratio(const Field<D>& f, double s, double p, double q) {
  Field<D> cent = f - f.mean();
  const double den = lp_norm(cent, p);
  if (den == 0.0) return 0.0;
  return lp_norm(lambda_pow(cent, -s), q) / den;
}

/// Product-rule ratio ‖∇^m(fg)‖ / (‖f‖_∞‖∇^m g‖ + ‖g‖_∞‖∇^m f‖).
template <int D>
double moser_ratio(const Field<D>& f, const Field<D>& g, int m) {
  const double num = grad_seminorm(f * g, m);
  const double den = lp_norm(f, std::numeric_limits<double>::infinity()) *
                         grad_seminorm(g, m) +
                     lp_norm(g, std::numeric_limits<double>::infinity()) *
                         grad_seminorm(f, m);
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

}  // namespace nsch
