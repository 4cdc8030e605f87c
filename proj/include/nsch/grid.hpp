#pragma once

// Uniform periodic grid on the unit torus (0,1)^D with the FFT machinery the
// rest of the library runs on.  A Grid is immutable after construction and is
// shared between fields via shared_ptr; plans are created once (FFTW_ESTIMATE,
// so planning is deterministic) and executed through the new-array interface.

#include <array>
#include <complex>
#include <cstdint>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <fftw3.h>

namespace nsch {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

template <int D>
class Grid {
  static_assert(D == 2 || D == 3, "only 2D and 3D tori are supported");

public:
  static constexpr int dim = D;

  /// Build a grid with n points per axis (n even, n >= 8).
  static std::shared_ptr<const Grid> make(int n) {
    return std::shared_ptr<const Grid>(new Grid(n));
  }

  ~Grid() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }

  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;

  int n() const { return n_; }
  std::int64_t size() const { return nreal_; }        // # real samples, n^D
  std::int64_t spec_size() const { return nspec_; }   // # stored complex modes
  double h() const { return 1.0 / n_; }               // grid spacing
  int dealias_cutoff() const { return kcut_; }        // keep |k_i| <= kcut

  /// Signed integer wavenumber along `axis` for grid index i along that axis.
  int wavenumber(int axis, int i) const {
    return (axis == D - 1 || i <= n_ / 2) ? i : i - n_;
  }

  /// (2π|k|)^2 for stored mode s.
  double kappa2(std::int64_t s) const { return kappa2_[s]; }
  /// 1 if the mode survives the 2/3-rule mask, else 0.
  bool keep(std::int64_t s) const { return keep_[s] != 0; }
  /// Hermitian multiplicity of stored mode s (1 on the self-conjugate planes,
  /// 2 where the conjugate partner is not stored).  Σ_k |f̂|² over the full
  /// lattice equals Σ_s weight(s)|f̂_s|².
  double weight(std::int64_t s) const { return weight_[s]; }

  /// Decode stored-mode index into signed integer wavenumbers.
  std::array<int, D> kvec(std::int64_t s) const {
    std::array<int, D> k{};
    auto i = coords(s);
    for (int a = 0; a < D; ++a) k[a] = wavenumber(a, i[a]);
    return k;
  }

  /// Decode stored-mode index into per-axis array indices (last axis halved).
  std::array<int, D> coords(std::int64_t s) const {
    std::array<int, D> i{};
    const int nlast = n_ / 2 + 1;
    i[D - 1] = static_cast<int>(s % nlast);
    s /= nlast;
    for (int a = D - 2; a >= 0; --a) {
      i[a] = static_cast<int>(s % n_);
      s /= n_;
    }
    return i;
  }

  /// Flat index of a real-space sample.
  std::int64_t real_index(const std::array<int, D>& i) const {
    std::int64_t r = 0;
    for (int a = 0; a < D; ++a) r = r * n_ + i[a];
    return r;
  }

  /// Flat index of a stored mode from per-axis array indices.
  std::int64_t spec_index(const std::array<int, D>& i) const {
    std::int64_t r = 0;
    for (int a = 0; a < D - 1; ++a) r = r * n_ + i[a];
    return r * (n_ / 2 + 1) + i[D - 1];
  }

  /// Coordinates of a real-space sample (components in [0,1)).
  std::array<double, D> point(std::int64_t flat) const {
    std::array<double, D> x{};
    for (int a = D - 1; a >= 0; --a) {
      x[a] = static_cast<double>(flat % n_) / n_;
      flat /= n_;
    }
    return x;
  }

  /// Forward transform, normalized so out[0] is the spatial mean.
  void fft(const double* in, std::complex<double>* out) const {
    // r2c out-of-place preserves its input; FFTW just wants non-const pointers.
    fftw_execute_dft_r2c(fwd_, const_cast<double*>(in),
                         reinterpret_cast<fftw_complex*>(out));
    const double inv = 1.0 / static_cast<double>(nreal_);
    for (std::int64_t s = 0; s < nspec_; ++s) out[s] *= inv;
  }

  /// Inverse transform (synthesis Σ f̂(k)e^{2πik·x}); clobbers `in`.
  void ifft(std::complex<double>* in, double* out) const {
    fftw_execute_dft_c2r(bwd_, reinterpret_cast<fftw_complex*>(in), out);
  }

private:
  explicit Grid(int n) : n_(n) {
    if (n < 8 || n % 2 != 0)
      throw std::invalid_argument("Grid: n must be even and >= 8, got " +
                                  std::to_string(n));
    nreal_ = 1;
    for (int a = 0; a < D; ++a) nreal_ *= n_;
    nspec_ = nreal_ / n_ * (n_ / 2 + 1);
    kcut_ = n_ / 3;  // keep |k_i| <= floor(n/3): zeroed iff |k_i| > n/3

    kappa2_.resize(nspec_);
    keep_.resize(nspec_);
    weight_.resize(nspec_);
    for (std::int64_t s = 0; s < nspec_; ++s) {
      auto k = kvec(s);
      double k2 = 0.0;
      bool inside = true;
      for (int a = 0; a < D; ++a) {
        k2 += static_cast<double>(k[a]) * k[a];
        if (k[a] > kcut_ || k[a] < -kcut_) inside = false;
      }
      kappa2_[s] = two_pi * two_pi * k2;
      keep_[s] = inside ? 1 : 0;
      const int ilast = coords(s)[D - 1];
      weight_[s] = (ilast == 0 || ilast == n_ / 2) ? 1.0 : 2.0;
    }

    // Plan with scratch arrays; FFTW_UNALIGNED keeps the plans valid for the
    // new-array execute calls on whatever buffers callers hand us.
    std::vector<double> re(nreal_);
    std::vector<std::complex<double>> sp(nspec_);
    auto* spc = reinterpret_cast<fftw_complex*>(sp.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    if constexpr (D == 2) {
      fwd_ = fftw_plan_dft_r2c_2d(n_, n_, re.data(), spc, flags);
      bwd_ = fftw_plan_dft_c2r_2d(n_, n_, spc, re.data(), flags);
    } else {
      fwd_ = fftw_plan_dft_r2c_3d(n_, n_, n_, re.data(), spc, flags);
      bwd_ = fftw_plan_dft_c2r_3d(n_, n_, n_, spc, re.data(), flags);
    }
    if (!fwd_ || !bwd_) throw std::runtime_error("Grid: FFTW planning failed");
  }

  int n_;
  std::int64_t nreal_ = 0, nspec_ = 0;
  int kcut_ = 0;
  std::vector<double> kappa2_;
  std::vector<std::uint8_t> keep_;
  std::vector<double> weight_;
  fftw_plan fwd_ = nullptr, bwd_ = nullptr;
};

template <int D>
using GridPtr = std::shared_ptr<const Grid<D>>;

}  // namespace nsch
