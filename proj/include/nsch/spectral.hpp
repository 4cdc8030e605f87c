#pragma once

// Fourier-multiplier operators on fields: derivatives, (bi)Laplacian, the
// fractional operator Λ^s = (-Δ)^{s/2} (symbol (2π|k|)^s), and 2/3-rule
// dealiasing.  Real-space products of band-limited factors are exact after the
// post-product mask, which is what the model layer relies on.

#include <cmath>
#include <complex>
#include <stdexcept>

#include "nsch/field.hpp"

namespace nsch {

/// Forward transform.  Rejects non-finite input.
template <int D>
SpectralField<D> fft(const Field<D>& f) {
  if (!f.finite())
    throw std::invalid_argument("fft: field contains non-finite values");
  SpectralField<D> out(f.grid);
  f.grid->fft(f.v.data(), out.c.data());
  return out;
}

/// Inverse transform (consumes a copy; the c2r pass clobbers its input).
template <int D>
Field<D> ifft(SpectralField<D> s) {
  Field<D> out(s.grid);
  s.grid->ifft(s.c.data(), out.v.data());
  return out;
}

/// In-place ∂^order/∂x_axis^order.  Odd orders zero the Nyquist plane along
/// `axis` (its sign is ambiguous on an even grid, and any real-output
/// convention must drop it).
template <int D>
void derivative_inplace(SpectralField<D>& s, int axis, int order) {
  if (axis < 0 || axis >= D) throw std::invalid_argument("derivative: bad axis");
  if (order < 1) throw std::invalid_argument("derivative: order must be >= 1");
  const auto& g = *s.grid;
  const int n = g.n();
  for (std::int64_t m = 0; m < g.spec_size(); ++m) {
    const int k = g.kvec(m)[axis];
    if (order % 2 == 1 && (k == n / 2 || k == -n / 2)) {
      s.c[m] = 0.0;
      continue;
    }
    const std::complex<double> ik(0.0, two_pi * k);
    std::complex<double> mult = 1.0;
    for (int j = 0; j < order; ++j) mult *= ik;
    s.c[m] *= mult;
  }
}

template <int D>
Field<D> derivative(const Field<D>& f, int axis, int order = 1) {
  auto s = fft(f);
  derivative_inplace(s, axis, order);
  return ifft(std::move(s));
}

/// In-place multiplication by a function of (2π|k|)².
template <int D, class F>
void multiplier_inplace(SpectralField<D>& s, F&& symbol) {
  const auto& g = *s.grid;
  for (std::int64_t m = 0; m < g.spec_size(); ++m) s.c[m] *= symbol(g.kappa2(m));
}

template <int D>
void laplacian_inplace(SpectralField<D>& s) {
  multiplier_inplace(s, [](double k2) { return -k2; });
}

template <int D>
Field<D> laplacian(const Field<D>& f) {
  auto s = fft(f);
  laplacian_inplace(s);
  return ifft(std::move(s));
}

template <int D>
Field<D> bilaplacian(const Field<D>& f) {
  auto s = fft(f);
  multiplier_inplace(s, [](double k2) { return k2 * k2; });
  return ifft(std::move(s));
}

/// Λ^s with symbol (2π|k|)^s.  For s >= 0 the zero mode passes through
/// (symbol 0^s·f̂(0) with the convention 0^0 = 1 for s = 0); for s < 0 the
/// input must be mean-free and the zero mode of the output is zero.
template <int D>
void lambda_pow_inplace(SpectralField<D>& s, double p, double mean_tol = 1e-12) {
  if (p < 0.0) {
    double scale = 0.0;
    for (auto& c : s.c) scale = std::max(scale, std::abs(c));
    if (std::abs(s.c[0]) > mean_tol * std::max(scale, 1e-300))
      throw std::invalid_argument(
          "lambda_pow: negative exponent requires a mean-free field");
    s.c[0] = 0.0;
  }
  const auto& g = *s.grid;
  for (std::int64_t m = 1; m < g.spec_size(); ++m)
    s.c[m] *= std::pow(g.kappa2(m), 0.5 * p);
  if (p > 0.0) s.c[0] = 0.0;  // (2π·0)^p = 0
}

template <int D>
Field<D> lambda_pow(const Field<D>& f, double p) {
  auto s = fft(f);
  lambda_pow_inplace(s, p);
  return ifft(std::move(s));
}

template <int D>
void dealias_inplace(SpectralField<D>& s) {
  const auto& g = *s.grid;
  for (std::int64_t m = 0; m < g.spec_size(); ++m)
    if (!g.keep(m)) s.c[m] = 0.0;
}

/// 2/3-rule projection: zero every mode with any |k_i| > n/3.
template <int D>
Field<D> dealias(const Field<D>& f) {
  auto s = fft(f);
  dealias_inplace(s);
  return ifft(std::move(s));
}

template <int D>
VectorField<D> grad(const Field<D>& f) {
  VectorField<D> out(f.grid);
  auto s = fft(f);
  for (int a = 0; a < D; ++a) {
    auto da = s;
    derivative_inplace(da, a, 1);
    out[a] = ifft(std::move(da));
  }
  return out;
}

template <int D>
Field<D> div(const VectorField<D>& u) {
  SpectralField<D> acc(u.grid());
  for (int a = 0; a < D; ++a) {
    auto s = fft(u[a]);
    derivative_inplace(s, a, 1);
    for (std::int64_t m = 0; m < acc.grid->spec_size(); ++m) acc.c[m] += s.c[m];
  }
  return ifft(std::move(acc));
}

/// Pointwise product with a post-product 2/3 mask.  For factors already
/// band-limited to |k_i| <= n/3 this equals the exact (truncated) convolution.
template <int D>
Field<D> multiply_dealiased(const Field<D>& a, const Field<D>& b) {
  return dealias(a * b);
}

/// Parseval sum Σ_k |f̂(k)|² over the full lattice (= ∫|f|² for exact data).
template <int D>
double spectral_energy(const SpectralField<D>& s) {
  const auto& g = *s.grid;
  double sum = 0.0;
  for (std::int64_t m = 0; m < g.spec_size(); ++m)
    sum += g.weight(m) * std::norm(s.c[m]);
  return sum;
}

}  // namespace nsch
