#pragma once

// Scalar and vector fields on a Grid.  Fields are plain value types: a shared
// grid pointer plus a flat sample (or coefficient) vector.  All operations on
// them are free functions that return new fields, so sharing across threads is
// safe by construction.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "nsch/grid.hpp"

namespace nsch {

template <int D>
struct Field {
  GridPtr<D> grid;
  std::vector<double> v;

  Field() = default;
  explicit Field(GridPtr<D> g) : grid(std::move(g)), v(grid->size(), 0.0) {}
  Field(GridPtr<D> g, std::vector<double> data)
      : grid(std::move(g)), v(std::move(data)) {
    if (static_cast<std::int64_t>(v.size()) != grid->size())
      throw std::invalid_argument("Field: sample count does not match grid");
  }

  /// Sample a function of position x in [0,1)^D.
  template <class F>
  static Field sample(GridPtr<D> g, F&& f) {
    Field out(g);
    for (std::int64_t i = 0; i < g->size(); ++i) out.v[i] = f(g->point(i));
    return out;
  }

  double mean() const {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  }
  double min() const { return *std::min_element(v.begin(), v.end()); }
  double max() const { return *std::max_element(v.begin(), v.end()); }
  bool finite() const {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  }
};

/// Spectral twin of Field: stored r2c half-spectrum, normalized so c[0] is the
/// spatial mean (f̂(k) = ∫ f e^{-2πik·x} dx on the unit torus).
template <int D>
struct SpectralField {
  GridPtr<D> grid;
  std::vector<std::complex<double>> c;

  SpectralField() = default;
  explicit SpectralField(GridPtr<D> g)
      : grid(std::move(g)), c(grid->spec_size(), {0.0, 0.0}) {}
};

template <int D>
struct VectorField {
  std::array<Field<D>, D> comp;

  VectorField() = default;
  explicit VectorField(const GridPtr<D>& g) {
    for (int a = 0; a < D; ++a) comp[a] = Field<D>(g);
  }
  const GridPtr<D>& grid() const { return comp[0].grid; }
  Field<D>& operator[](int a) { return comp[a]; }
  const Field<D>& operator[](int a) const { return comp[a]; }

  /// Pointwise Euclidean magnitude |v(x)|.
  Field<D> magnitude() const {
    Field<D> out(grid());
    for (std::int64_t i = 0; i < out.grid->size(); ++i) {
      double s = 0.0;
      for (int a = 0; a < D; ++a) s += comp[a].v[i] * comp[a].v[i];
      out.v[i] = std::sqrt(s);
    }
    return out;
  }

  bool finite() const {
    for (int a = 0; a < D; ++a)
      if (!comp[a].finite()) return false;
    return true;
  }
};

// -- small pointwise helpers (used throughout the model layer) --------------

template <int D, class F>
Field<D> map(const Field<D>& a, F&& f) {
  Field<D> out(a.grid);
  for (std::int64_t i = 0; i < a.grid->size(); ++i) out.v[i] = f(a.v[i]);
  return out;
}

template <int D, class F>
Field<D> zip(const Field<D>& a, const Field<D>& b, F&& f) {
  Field<D> out(a.grid);
  for (std::int64_t i = 0; i < a.grid->size(); ++i)
    out.v[i] = f(a.v[i], b.v[i]);
  return out;
}

template <int D>
Field<D> operator+(const Field<D>& a, const Field<D>& b) {
  return zip(a, b, [](double x, double y) { return x + y; });
}
template <int D>
Field<D> operator-(const Field<D>& a, const Field<D>& b) {
  return zip(a, b, [](double x, double y) { return x - y; });
}
template <int D>
Field<D> operator*(const Field<D>& a, const Field<D>& b) {
  return zip(a, b, [](double x, double y) { return x * y; });
}
template <int D>
Field<D> operator/(const Field<D>& a, const Field<D>& b) {
  return zip(a, b, [](double x, double y) { return x / y; });
}
template <int D>
Field<D> operator*(double s, const Field<D>& a) {
  return map(a, [s](double x) { return s * x; });
}
template <int D>
Field<D> operator+(const Field<D>& a, double s) {
  return map(a, [s](double x) { return x + s; });
}
template <int D>
Field<D> operator-(const Field<D>& a, double s) {
  return map(a, [s](double x) { return x - s; });
}

template <int D>
void axpy(double alpha, const Field<D>& x, Field<D>& y) {
  for (std::int64_t i = 0; i < y.grid->size(); ++i) y.v[i] += alpha * x.v[i];
}

}  // namespace nsch
