#include <catch2/catch_amalgamated.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>

#include "nsch/model.hpp"

using namespace nsch;

namespace {

template <int D>
double max_abs(const Field<D>& a) {
  double m = 0.0;
  for (double x : a.v) m = std::max(m, std::abs(x));
  return m;
}

template <int D>
double max_abs_diff(const Field<D>& a, const Field<D>& b) {
  double m = 0.0;
  for (std::int64_t i = 0; i < a.grid->size(); ++i)
    m = std::max(m, std::abs(a.v[i] - b.v[i]));
  return m;
}

/// G by adaptive quadrature of its defining integral (the oracle route).
double G_quadrature(double rho, const ModelParams& p) {
  auto integrand = [&](double z) {
    return (p.pressure(z) - p.pressure(p.rho_bar)) / (z * z);
  };
  const double I = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, p.rho_bar, rho, 12, 1e-14);
  return rho * I;
}

/// Small band-limited random state around (ρ̄, 0, base) without using the
/// library generator.
template <int D>
State<D> random_state(const GridPtr<D>& g, const ModelParams& p, double amp,
                      double base, std::uint64_t seed, int kmax = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ua(-1.0, 1.0), uph(0.0, two_pi);
  auto band = [&]() {
    Field<D> f(g);
    std::array<int, D> k{};
    auto rec = [&](auto&& self, int axis) -> void {
      if (axis == D) {
        bool zero = true, lead_neg = false;
        for (int a = 0; a < D; ++a)
          if (k[a] != 0) {
            if (zero) lead_neg = k[a] < 0;
            zero = false;
          }
        if (zero || !lead_neg) return;
        const double a0 = ua(rng), ph = uph(rng);
        for (std::int64_t i = 0; i < g->size(); ++i) {
          const auto x = g->point(i);
          double arg = ph;
          for (int a = 0; a < D; ++a) arg += two_pi * k[a] * x[a];
          f.v[i] += a0 * std::cos(arg);
        }
        return;
      }
      for (int v = -kmax; v <= kmax; ++v) {
        k[axis] = v;
        self(self, axis + 1);
      }
    };
    rec(rec, 0);
    return f;
  };
  State<D> st(g);
  st.rho = map(band(), [&](double v) { return p.rho_bar + amp * v; });
  for (int a = 0; a < D; ++a)
    st.m[a] = map(band(), [&](double v) { return amp * v; });
  Field<D> phi = map(band(), [&](double v) { return base + amp * v; });
  st.c = st.rho * phi;
  return st;
}

}  // namespace

TEST_CASE("compression energy matches its defining integral", "[model]") {
  ModelParams p;
  for (double gamma : {1.4, 2.0, 1.1}) {
    p.gamma = gamma;
    p.rho_bar = 1.3;
    p.p_coeff = 0.7;
    for (int i = 0; i <= 50; ++i) {
      const double rho = 0.5 * p.rho_bar + 1.5 * p.rho_bar * i / 50.0;
      const double closed = thermo_G_scalar(rho, p);
      const double quad = G_quadrature(rho, p);
      REQUIRE(std::abs(closed - quad) <=
              1e-8 * std::max({std::abs(closed), std::abs(quad), 1e-12}));
    }
  }
}

TEST_CASE("compression energy vanishes to second order at the reference",
          "[model]") {
  ModelParams p;
  p.gamma = 1.4;
  REQUIRE(std::abs(thermo_G_scalar(p.rho_bar, p)) < 1e-14);
  const double h = 1e-6;
  const double d = (thermo_G_scalar(p.rho_bar + h, p) -
                    thermo_G_scalar(p.rho_bar - h, p)) /
                   (2 * h);
  REQUIRE(std::abs(d) < 1e-9);
  // ρ G'' = p': finite-difference second derivative against the pressure slope
  const double h2 = 1e-4;
  for (double rho : {0.7, 1.0, 1.8}) {
    const double g2 = (thermo_G_scalar(rho + h2, p) -
                       2 * thermo_G_scalar(rho, p) +
                       thermo_G_scalar(rho - h2, p)) /
                      (h2 * h2);
    REQUIRE(rho * g2 == Catch::Approx(p.dpressure(rho)).epsilon(1e-6));
  }
  REQUIRE_THROWS_AS(thermo_G_scalar(0.0, p), std::invalid_argument);
}

TEST_CASE("compression energy is squeezed between quadratics", "[model]") {
  ModelParams p;
  double clo = std::numeric_limits<double>::infinity(), chi = 0.0;
  for (int i = 0; i <= 60; ++i) {
    const double rho = 0.5 * p.rho_bar + 1.5 * p.rho_bar * i / 60.0;
    if (std::abs(rho - p.rho_bar) < 1e-3) continue;
    const double ratio =
        thermo_G_scalar(rho, p) / ((rho - p.rho_bar) * (rho - p.rho_bar));
    clo = std::min(clo, ratio);
    chi = std::max(chi, ratio);
  }
  REQUIRE(clo > 0.0);
  REQUIRE(std::isfinite(chi));
  REQUIRE(chi < 10.0 * clo);  // same-order envelope on [ρ̄/2, 2ρ̄]
}

TEST_CASE("model parameter validation", "[model]") {
  ModelParams p;
  p.gamma = 1.0;
  REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
  p = ModelParams{};
  p.nu0 = 0.0;
  REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
  p = ModelParams{};
  p.rho_bar = -1.0;
  REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
  REQUIRE_NOTHROW(ModelParams{}.validate());
}

TEST_CASE("chemical potential linearizes about the pure phase", "[model]") {
  auto g = Grid<2>::make(32);
  ModelParams p;
  const double delta = 1e-6;
  Field<2> rho = Field<2>::sample(g, [&](const std::array<double, 2>&) {
    return p.rho_bar;
  });
  Field<2> phi = Field<2>::sample(g, [&](const std::array<double, 2>& x) {
    return 1.0 + delta * std::cos(two_pi * x[0]);
  });
  Field<2> mu = chemical_potential(rho, phi, p);
  const double coef = p.eps * two_pi * two_pi / p.rho_bar + 2.0 / p.eps;
  Field<2> want = Field<2>::sample(g, [&](const std::array<double, 2>& x) {
    return coef * delta * std::cos(two_pi * x[0]);
  });
  REQUIRE(max_abs_diff(mu, want) < 5.0 * delta * delta * std::abs(coef) + 1e-14);
}

TEST_CASE("capillary force on an analytic profile", "[model]") {
  auto g = Grid<2>::make(32);
  Field<2> phi = Field<2>::sample(g, [](const std::array<double, 2>& x) {
    return std::sin(two_pi * x[0]);
  });
  VectorField<2> cap = capillary_force(phi);
  // ∂xφ·Δφ = 2πcos·(−4π²sin) = −4π³ sin(4πx)
  Field<2> want = Field<2>::sample(g, [](const std::array<double, 2>& x) {
    return -4.0 * std::pow(std::numbers::pi, 3) * std::sin(2 * two_pi * x[0]);
  });
  REQUIRE(max_abs_diff(cap[0], want) < 1e-10 * max_abs(want));
  REQUIRE(max_abs(cap[1]) < 1e-12);
}

TEST_CASE("capillary force agrees with the stress-divergence route", "[model]") {
  // For φ band-limited under half the dealias cutoff the masked products are
  // exact, so div(∇φ⊗∇φ) − ∇(|∇φ|²/2) must reproduce capillary_force.
  auto g = Grid<2>::make(64);  // cutoff 21, band 10
  std::mt19937_64 rng(61);
  for (int rep = 0; rep < 20; ++rep) {
    State<2> st = random_state(g, ModelParams{}, 0.3, 0.0, rng(), 5);
    Field<2> phi = st.phase();
    auto gphi = grad(phi);
    Field<2> half(g);
    for (std::int64_t i = 0; i < g->size(); ++i)
      half.v[i] = 0.5 * (gphi[0].v[i] * gphi[0].v[i] + gphi[1].v[i] * gphi[1].v[i]);
    VectorField<2> cap = capillary_force(phi);
    for (int i = 0; i < 2; ++i) {
      Field<2> route(g);
      for (int j = 0; j < 2; ++j)
        axpy(1.0, derivative(gphi[i] * gphi[j], j, 1), route);
      Field<2> diff = route - derivative(half, i, 1) - cap[i];
      REQUIRE(max_abs(diff) < 1e-8 * std::max(1.0, max_abs(cap[i])));
    }
  }
}

TEST_CASE("viscous stress divergence: constant-coefficient oracle", "[model]") {
  auto g = Grid<2>::make(64);
  ModelParams p;
  p.nu1 = 0.0;
  p.lam0 = 0.3;
  std::mt19937_64 rng(67);
  State<2> st = random_state(g, p, 0.2, 0.0, rng(), 5);
  VectorField<2> u(g);
  for (int a = 0; a < 2; ++a) u[a] = st.m[a];  // any smooth band-limited field
  Field<2> phi = st.phase();
  VectorField<2> got = viscous_stress_div(u, phi, p);
  // ν constant: div S = ν Δu + (ν + λ) ∇ div u
  Field<2> divu = div(u);
  for (int i = 0; i < 2; ++i) {
    Field<2> want = map(laplacian(u[i]), [&](double v) { return p.nu0 * v; });
    axpy(p.nu0 + p.lam0, derivative(divu, i, 1), want);
    REQUIRE(max_abs_diff(got[i], want) < 1e-9 * std::max(1.0, max_abs(want)));
  }
}

TEST_CASE("viscous stress divergence: variable viscosity analytic case",
          "[model]") {
  auto g = Grid<2>::make(64);
  ModelParams p;
  p.nu0 = 0.2;
  p.nu1 = 0.05;
  p.lam0 = 0.0;
  // u = (0, sin(2πx)), φ = cos(2πx):
  //   div S = (0, -4π² sin(2πx)(ν₀ + 3ν₁cos²(2πx)))
  VectorField<2> u(g);
  u[1] = Field<2>::sample(g, [](const std::array<double, 2>& x) {
    return std::sin(two_pi * x[0]);
  });
  u[0] = Field<2>(g);
  Field<2> phi = Field<2>::sample(g, [](const std::array<double, 2>& x) {
    return std::cos(two_pi * x[0]);
  });
  VectorField<2> got = viscous_stress_div(u, phi, p);
  Field<2> want = Field<2>::sample(g, [&](const std::array<double, 2>& x) {
    const double c = std::cos(two_pi * x[0]);
    return -4.0 * std::numbers::pi * std::numbers::pi *
           std::sin(two_pi * x[0]) * (p.nu0 + 3.0 * p.nu1 * c * c);
  });
  REQUIRE(max_abs_diff(got[1], want) < 1e-10 * max_abs(want));
  REQUIRE(max_abs(got[0]) < 1e-10 * max_abs(want));
}

TEST_CASE("uniform states are near-exact equilibria of the right-hand side",
          "[model]") {
  auto g = Grid<2>::make(32);
  ModelParams p;
  State<2> st(g);
  st.rho = Field<2>::sample(g, [&](const std::array<double, 2>&) {
    return p.rho_bar;
  });
  st.c = Field<2>::sample(g, [&](const std::array<double, 2>&) {
    return -p.rho_bar;  // φ ≡ -1
  });
  Tendency<2> t = rhs(st, p);
  REQUIRE(max_abs(t.drho) < 1e-12);
  REQUIRE(max_abs(t.dm[0]) < 1e-12);
  REQUIRE(max_abs(t.dm[1]) < 1e-12);
  REQUIRE(max_abs(t.dc) < 1e-12);
}

TEST_CASE("tendencies preserve the conserved means", "[model]") {
  auto g = Grid<2>::make(32);
  ModelParams p;
  std::mt19937_64 rng(71);
  for (int rep = 0; rep < 5; ++rep) {
    State<2> st = random_state(g, p, 0.05, 1.0, rng());
    Tendency<2> t = rhs(st, p);
    const double scale = std::max({max_abs(t.drho), max_abs(t.dc), 1.0});
    REQUIRE(std::abs(t.drho.mean()) < 1e-13 * scale);
    REQUIRE(std::abs(t.dc.mean()) < 1e-13 * scale);
  }
}

TEST_CASE("acoustic linearization of the momentum equation", "[model]") {
  auto g = Grid<2>::make(32);
  ModelParams p;
  const double delta = 1e-6;
  State<2> st(g);
  st.rho = Field<2>::sample(g, [&](const std::array<double, 2>& x) {
    return p.rho_bar + delta * std::cos(two_pi * x[0]);
  });
  st.c = st.rho;  // φ ≡ 1 exactly
  Tendency<2> t = rhs(st, p);
  // dm = -∇p ≈ p'(ρ̄)·2πδ·sin(2πx)
  Field<2> want = Field<2>::sample(g, [&](const std::array<double, 2>& x) {
    return p.dpressure(p.rho_bar) * two_pi * delta * std::sin(two_pi * x[0]);
  });
  REQUIRE(max_abs_diff(t.dm[0], want) < 1e-4 * max_abs(want));
  REQUIRE(max_abs(t.drho) < 1e-15);
  REQUIRE(max_abs(t.dc) < 1e-11 * delta);
}

TEST_CASE("right-hand side commutes with grid translation", "[model]") {
  auto g = Grid<2>::make(32);
  ModelParams p;
  State<2> st = random_state(g, p, 0.05, 1.0, 73);
  Tendency<2> t = rhs(st, p);
  auto shift = [&](const Field<2>& f) {
    Field<2> out(g);
    const int n = g->n();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        out.v[g->real_index({i, j})] = f.v[g->real_index({(i + 1) % n, j})];
    return out;
  };
  State<2> st2(g);
  st2.rho = shift(st.rho);
  st2.c = shift(st.c);
  for (int a = 0; a < 2; ++a) st2.m[a] = shift(st.m[a]);
  Tendency<2> t2 = rhs(st2, p);
  const double scale = std::max(1.0, max_abs(t.dm[0]));
  REQUIRE(max_abs_diff(shift(t.drho), t2.drho) < 1e-10 * scale);
  REQUIRE(max_abs_diff(shift(t.dm[0]), t2.dm[0]) < 1e-10 * scale);
  REQUIRE(max_abs_diff(shift(t.dm[1]), t2.dm[1]) < 1e-10 * scale);
  REQUIRE(max_abs_diff(shift(t.dc), t2.dc) < 1e-10 * scale);
}

TEST_CASE("density guard raises a structured blow-up signal", "[model]") {
  auto g = Grid<2>::make(16);
  ModelParams p;
  State<2> st(g);
  st.t = 2.5;
  st.rho = Field<2>::sample(g, [](const std::array<double, 2>&) { return 1.0; });
  st.c = st.rho;
  st.rho.v[5] = 0.005;  // below the 1% floor
  try {
    st.check_density(p);
    FAIL("expected BlowupError");
  } catch (const BlowupError& e) {
    REQUIRE(e.t == 2.5);
    REQUIRE(e.offending_value == 0.005);
  }
  st.rho.v[5] = 1.0;
  st.m[0].v[3] = std::numeric_limits<double>::infinity();
  REQUIRE_THROWS_AS(st.check_density(p), BlowupError);
}

TEST_CASE("3D right-hand side sanity", "[model]") {
  auto g = Grid<3>::make(16);
  ModelParams p;
  State<3> st = random_state<3>(g, p, 0.02, 1.0, 79, 2);
  Tendency<3> t = rhs(st, p);
  REQUIRE(t.drho.finite());
  REQUIRE(t.dc.finite());
  const double scale = std::max({max_abs(t.drho), max_abs(t.dc), 1.0});
  REQUIRE(std::abs(t.drho.mean()) < 1e-13 * scale);
  REQUIRE(std::abs(t.dc.mean()) < 1e-13 * scale);
}
