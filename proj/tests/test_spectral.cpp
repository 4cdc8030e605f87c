#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "nsch/norms.hpp"
#include "nsch/spectral.hpp"

using namespace nsch;

namespace {

// Random real trig polynomial evaluated by direct summation — no FFTs, so it
// serves as an independent reference for the transform-based operators.
template <int D>
struct TrigPoly {
  struct Mode {
    std::array<int, D> k;
    double amp, phase;
  };
  std::vector<Mode> modes;

  static TrigPoly random(int kmax, std::mt19937_64& rng, bool mean_free = true) {
    TrigPoly tp;
    std::uniform_real_distribution<double> uamp(-1.0, 1.0), uph(0.0, two_pi);
    std::array<int, D> k{};
    // enumerate a half-space of the cube |k_i| <= kmax (conjugates implied)
    auto rec = [&](auto&& self, int axis) -> void {
      if (axis == D) {
        bool zero = true, lead_neg = false;
        for (int a = 0; a < D; ++a) {
          if (k[a] != 0) {
            if (zero) lead_neg = k[a] < 0;
            zero = false;
          }
        }
        if (zero ? !mean_free : !lead_neg)
          tp.modes.push_back({k, 0.3 * uamp(rng), uph(rng)});
        return;
      }
      for (int v = -kmax; v <= kmax; ++v) {
        k[axis] = v;
        self(self, axis + 1);
      }
    };
    rec(rec, 0);
    return tp;
  }

  double eval(const std::array<double, D>& x) const {
    double s = 0.0;
    for (const auto& m : modes) {
      double arg = m.phase;
      for (int a = 0; a < D; ++a) arg += two_pi * m.k[a] * x[a];
      s += m.amp * std::cos(arg);
    }
    return s;
  }

  // Analytic ∂^order/∂x_axis^order.
  double eval_deriv(const std::array<double, D>& x, int axis, int order) const {
    double s = 0.0;
    for (const auto& m : modes) {
      double arg = m.phase;
      for (int a = 0; a < D; ++a) arg += two_pi * m.k[a] * x[a];
      const double w = two_pi * m.k[axis];
      double amp = m.amp;
      for (int j = 0; j < order; ++j) amp *= w;
      const double shifted = arg + 0.5 * std::numbers::pi * order;
      s += amp * std::cos(shifted);
    }
    return s;
  }

  Field<D> sample(const GridPtr<D>& g) const {
    return Field<D>::sample(g, [this](const std::array<double, D>& x) {
      return eval(x);
    });
  }
};

template <int D>
double max_abs_diff(const Field<D>& a, const Field<D>& b) {
  double m = 0.0;
  for (std::int64_t i = 0; i < a.grid->size(); ++i)
    m = std::max(m, std::abs(a.v[i] - b.v[i]));
  return m;
}

template <int D>
double max_abs(const Field<D>& a) {
  double m = 0.0;
  for (double x : a.v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("transform of a constant is its mean", "[spectral]") {
  auto g = Grid<2>::make(16);
  Field<2> f = Field<2>::sample(g, [](const std::array<double, 2>&) { return 3.75; });
  auto s = fft(f);
  REQUIRE(std::abs(s.c[0] - 3.75) < 1e-13);
  for (std::int64_t m = 1; m < g->spec_size(); ++m)
    REQUIRE(std::abs(s.c[m]) < 1e-13);
}

TEST_CASE("single cosine lands on its conjugate mode pair", "[spectral]") {
  auto g = Grid<2>::make(16);
  Field<2> f = Field<2>::sample(g, [](const std::array<double, 2>& x) {
    return std::cos(two_pi * (2 * x[0] + 3 * x[1]));
  });
  auto s = fft(f);
  const auto idx = g->spec_index({2, 3});
  REQUIRE(std::abs(s.c[idx] - 0.5) < 1e-13);
  for (std::int64_t m = 0; m < g->spec_size(); ++m)
    if (m != idx) REQUIRE(std::abs(s.c[m]) < 1e-13);

  // negative first-axis wavenumber is stored at index n + k
  Field<2> f2 = Field<2>::sample(g, [](const std::array<double, 2>& x) {
    return std::cos(two_pi * (-2 * x[0] + 3 * x[1]));
  });
  auto s2 = fft(f2);
  REQUIRE(std::abs(s2.c[g->spec_index({14, 3})] - 0.5) < 1e-13);
  REQUIRE(std::abs(spectral_energy(s2) - 0.5) < 1e-13);
}

TEMPLATE_TEST_CASE_SIG("transform matches the direct DFT", "[spectral]",
                       ((int D), D), 2, 3) {
  auto g = Grid<D>::make(8);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Field<D> f(g);
  for (auto& x : f.v) x = u(rng);
  auto s = fft(f);
  for (std::int64_t m = 0; m < g->spec_size(); m += 5) {
    const auto k = g->kvec(m);
    std::complex<double> direct{0.0, 0.0};
    for (std::int64_t i = 0; i < g->size(); ++i) {
      const auto x = g->point(i);
      double arg = 0.0;
      for (int a = 0; a < D; ++a) arg -= two_pi * k[a] * x[a];
      direct += f.v[i] * std::polar(1.0, arg);
    }
    direct /= static_cast<double>(g->size());
    REQUIRE(std::abs(s.c[m] - direct) < 1e-13);
  }
}

TEMPLATE_TEST_CASE_SIG("round trip reproduces the samples", "[spectral]",
                       ((int D), D), 2, 3) {
  auto g = Grid<D>::make(D == 2 ? 32 : 16);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Field<D> f(g);
  for (auto& x : f.v) x = u(rng);
  Field<D> back = ifft(fft(f));
  REQUIRE(max_abs_diff(f, back) < 1e-13 * std::max(1.0, max_abs(f)));
}

TEST_CASE("derivatives match high-order finite differences", "[spectral]") {
  // Analytic non-band-limited field; O(h^6) central differences on n = 256.
  auto g = Grid<2>::make(256);
  Field<2> f = Field<2>::sample(g, [](const std::array<double, 2>& x) {
    return std::exp(std::sin(two_pi * x[0])) *
           (1.0 + 0.3 * std::cos(two_pi * x[1] - 1.0));
  });
  const int n = g->n();
  const double h = g->h();
  auto at = [&](int i, int j) {
    return f.v[g->real_index({(i % n + n) % n, (j % n + n) % n})];
  };
  for (int axis = 0; axis < 2; ++axis) {
    Field<2> d1 = derivative(f, axis, 1);
    Field<2> d2 = derivative(f, axis, 2);
    double e1 = 0.0, e2 = 0.0, m1 = 0.0, m2 = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        auto off = [&](int o) { return axis == 0 ? at(i + o, j) : at(i, j + o); };
        const double fd1 = (-off(-3) + 9 * off(-2) - 45 * off(-1) + 45 * off(1) -
                            9 * off(2) + off(3)) /
                           (60 * h);
        const double fd2 = (2 * off(-3) - 27 * off(-2) + 270 * off(-1) -
                            490 * off(0) + 270 * off(1) - 27 * off(2) +
                            2 * off(3)) /
                           (180 * h * h);
        const std::int64_t idx = g->real_index({i, j});
        e1 = std::max(e1, std::abs(d1.v[idx] - fd1));
        e2 = std::max(e2, std::abs(d2.v[idx] - fd2));
        m1 = std::max(m1, std::abs(fd1));
        m2 = std::max(m2, std::abs(fd2));
      }
    REQUIRE(e1 / m1 < 1e-8);
    REQUIRE(e2 / m2 < 1e-8);
  }
}

TEST_CASE("analytic derivatives of trig polynomials", "[spectral]") {
  std::mt19937_64 rng(3);
  auto g = Grid<2>::make(32);
  for (int rep = 0; rep < 5; ++rep) {
    auto tp = TrigPoly<2>::random(4, rng, false);
    Field<2> f = tp.sample(g);
    for (int axis = 0; axis < 2; ++axis)
      for (int order = 1; order <= 3; ++order) {
        Field<2> want = Field<2>::sample(g, [&](const std::array<double, 2>& x) {
          return tp.eval_deriv(x, axis, order);
        });
        Field<2> got = derivative(f, axis, order);
        REQUIRE(max_abs_diff(want, got) <
                1e-10 * std::max(1.0, max_abs(want)));
      }
  }
}

TEST_CASE("odd derivative orders drop the Nyquist mode", "[spectral]") {
  auto g = Grid<2>::make(16);
  Field<2> f = Field<2>::sample(g, [](const std::array<double, 2>& x) {
    return std::cos(two_pi * 8 * x[0]);
  });
  REQUIRE(max_abs(derivative(f, 0, 1)) < 1e-12);
  // even orders keep it: f'' = -(2π·8)² f on the grid samples
  Field<2> d2 = derivative(f, 0, 2);
  const double w2 = std::pow(two_pi * 8, 2);
  Field<2> want = map(f, [w2](double v) { return -w2 * v; });
  REQUIRE(max_abs_diff(d2, want) < 1e-9);
}

TEST_CASE("lambda_pow inverse pair and laplacian consistency", "[spectral]") {
  auto g = Grid<2>::make(32);
  std::mt19937_64 rng(5);
  auto tp = TrigPoly<2>::random(5, rng);  // mean-free
  Field<2> f = tp.sample(g);

  Field<2> back = lambda_pow(lambda_pow(f, 1.3), -1.3);
  REQUIRE(max_abs_diff(back, f) < 1e-11 * std::max(1.0, max_abs(f)));

  Field<2> l2f = lambda_pow(f, 2.0);
  Field<2> lap = laplacian(f);
  Field<2> sum = l2f + lap;
  REQUIRE(max_abs(sum) < 1e-10 * std::max(1.0, max_abs(lap)));

  Field<2> with_mean = f + 2.0;
  REQUIRE_THROWS_AS(lambda_pow(with_mean, -0.5), std::invalid_argument);
}

TEST_CASE("dealias keeps the boundary mode and kills the next", "[spectral]") {
  auto g = Grid<2>::make(16);  // cutoff floor(16/3) = 5
  Field<2> keep = Field<2>::sample(g, [](const std::array<double, 2>& x) {
    return std::cos(two_pi * 5 * x[0]);
  });
  REQUIRE(max_abs_diff(dealias(keep), keep) < 1e-13);
  Field<2> kill = Field<2>::sample(g, [](const std::array<double, 2>& x) {
    return std::cos(two_pi * 6 * x[0]);
  });
  REQUIRE(max_abs(dealias(kill)) < 1e-13);
  Field<2> mixed = Field<2>::sample(g, [](const std::array<double, 2>& x) {
    return std::cos(two_pi * (5 * x[0] + 6 * x[1]));
  });
  REQUIRE(max_abs(dealias(mixed)) < 1e-13);
}

TEST_CASE("Parseval identity on random fields", "[spectral]") {
  auto g = Grid<2>::make(32);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    Field<2> f(g);
    for (auto& x : f.v) x = u(rng);
    const double l2 = lp_norm(f, 2.0);
    const double se = spectral_energy(fft(f));
    REQUIRE(std::abs(se - l2 * l2) < 1e-12 * l2 * l2);
  }
}

TEST_CASE("div of grad is the laplacian", "[spectral]") {
  auto g = Grid<2>::make(32);
  std::mt19937_64 rng(23);
  Field<2> f = TrigPoly<2>::random(5, rng).sample(g);
  Field<2> dg = div(grad(f));
  Field<2> lap = laplacian(f);
  REQUIRE(max_abs_diff(dg, lap) < 1e-10 * std::max(1.0, max_abs(lap)));
}

TEST_CASE("capillary stress divergence decomposition", "[spectral]") {
  // div(∇φ⊗∇φ) = ∇(|∇φ|²/2) + ∇φΔφ, checked where the discrete calculus is
  // exact: φ band-limited to |k|_∞ <= (n-2)/4 so all products stay below the
  // representable band.
  auto g = Grid<2>::make(64);
  std::mt19937_64 rng(29);
  for (int rep = 0; rep < 100; ++rep) {
    Field<2> phi = TrigPoly<2>::random(7, rng).sample(g);
    auto gphi = grad(phi);
    Field<2> lap = laplacian(phi);
    Field<2> half_sq(g);
    for (std::int64_t i = 0; i < g->size(); ++i) {
      double s = 0.0;
      for (int a = 0; a < 2; ++a) s += gphi[a].v[i] * gphi[a].v[i];
      half_sq.v[i] = 0.5 * s;
    }
    double scale = std::max(1.0, max_abs(lap));
    for (int i = 0; i < 2; ++i) {
      Field<2> lhs(g);
      for (int j = 0; j < 2; ++j)
        axpy(1.0, derivative(gphi[i] * gphi[j], j, 1), lhs);
      Field<2> rhs_f = derivative(half_sq, i, 1) + gphi[i] * lap;
      REQUIRE(max_abs_diff(lhs, rhs_f) < 1e-8 * scale);
    }
  }
}

TEMPLATE_TEST_CASE_SIG("mode index helpers round-trip", "[grid]",
                       ((int D), D), 2, 3) {
  auto g = Grid<D>::make(8);
  for (std::int64_t s = 0; s < g->spec_size(); ++s) {
    REQUIRE(g->spec_index(g->coords(s)) == s);
    const auto k = g->kvec(s);
    for (int a = 0; a < D; ++a) {
      REQUIRE(k[a] >= -g->n() / 2);
      REQUIRE(k[a] <= g->n() / 2);
    }
  }
  for (std::int64_t i = 0; i < g->size(); ++i) {
    const auto x = g->point(i);
    std::array<int, D> idx{};
    for (int a = 0; a < D; ++a) idx[a] = static_cast<int>(std::lround(x[a] * g->n()));
    REQUIRE(g->real_index(idx) == i);
  }
}

TEST_CASE("grid and transform input validation", "[grid]") {
  REQUIRE_THROWS_AS(Grid<2>::make(7), std::invalid_argument);
  REQUIRE_THROWS_AS(Grid<2>::make(4), std::invalid_argument);
  auto g = Grid<2>::make(8);
  Field<2> f(g);
  f.v[3] = std::numeric_limits<double>::quiet_NaN();
  REQUIRE_THROWS_AS(fft(f), std::invalid_argument);
}
