#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "tipcast/errors.hpp"
#include "tipcast/ews.hpp"
#include "tipcast/random.hpp"

using namespace tipcast;

namespace {

// x_t = phi x_{t-1} + eta_t, eta_t = rho eta_{t-1} + e_t.
std::vector<double> red_ar1(double phi, double rho, std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed, {});
  std::normal_distribution<double> nd;
  std::vector<double> x(n);
  double xv = 0.0, eta = 0.0;
  for (std::size_t i = 0; i < n + 1000; ++i) {
    eta = rho * eta + nd(rng);
    xv = phi * xv + eta;
    if (i >= 1000) x[i - 1000] = xv;
  }
  return x;
}

// x_t = a1 x_{t-1} + a2 x_{t-2} + e_t.
std::vector<double> ar2(double a1, double a2, std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed, {});
  std::normal_distribution<double> nd;
  std::vector<double> x(n + 1000, 0.0);
  for (std::size_t i = 2; i < x.size(); ++i) x[i] = a1 * x[i - 1] + a2 * x[i - 2] + nd(rng);
  return {x.begin() + 1000, x.end()};
}

}  // namespace

TEST_CASE("lag-1 coefficient is exact on a geometric series") {
  std::vector<double> g;
  for (int i = 0; i < 50; ++i) g.push_back(std::pow(0.9, i));
  // Centered estimator: compare with the direct formula.
  double m = 0;
  for (double v : g) m += v;
  m /= g.size();
  double num = 0, den = 0;
  for (std::size_t i = 1; i < g.size(); ++i) {
    num += (g[i] - m) * (g[i - 1] - m);
    den += (g[i - 1] - m) * (g[i - 1] - m);
  }
  CHECK(lag1_coefficient(g) == doctest::Approx(num / den).epsilon(1e-14));
  CHECK_THROWS_AS(lag1_coefficient(std::vector<double>(10, 2.0)), DataError);
}

TEST_CASE("degenerate fingerprinting projects onto the leading component") {
  const auto z = red_ar1(0.8, 0.0, 20000, 1);
  Rng rng = make_rng(2, {});
  std::normal_distribution<double> nd;
  std::vector<double> a, b, c;
  for (double v : z) {
    a.push_back(3.0 * v + 0.01 * nd(rng));
    b.push_back(-2.0 * v + 0.01 * nd(rng));
    c.push_back(1.5);
  }
  CHECK(degenerate_fingerprinting({a, b, c}) == doctest::Approx(0.8).epsilon(0.02));
  CHECK(degenerate_fingerprinting({z}) == lag1_coefficient(z));
  CHECK_THROWS_AS(degenerate_fingerprinting({std::vector<double>(10, 0.0)}), DataError);
}

TEST_CASE("naive lag-1 under red noise follows the AR(2) autocorrelation") {
  for (auto [phi, rho] : {std::pair{0.6, 0.3}, {0.3, 0.6}, {0.9, 0.0}, {0.5, 0.5}}) {
    const auto x = red_ar1(phi, rho, 100000, 7);
    const BbEstimate est = bb_estimate(x);
    CHECK(est.phi_b == doctest::Approx(bb_naive_phi_b(phi, rho)).epsilon(0.02).scale(1.0));
  }
}

TEST_CASE("BB recovers phi on the branch matching the dominant coefficient") {
  struct Case {
    double phi, rho;
    BbBranch branch;
  };
  for (const Case c : {Case{0.6, 0.3, BbBranch::phi_dominant}, Case{0.3, 0.6, BbBranch::rho_dominant},
                       Case{0.9, 0.0, BbBranch::phi_dominant}, Case{0.9, 0.0, BbBranch::automatic}}) {
    const auto x = red_ar1(c.phi, c.rho, 100000, 11);
    const BbEstimate est = bb_estimate(x, c.branch);
    CHECK_FALSE(est.degraded);
    CHECK(est.phi == doctest::Approx(c.phi).epsilon(0.03).scale(1.0));
  }
}

TEST_CASE("BB degrades to the naive value on a negative discriminant") {
  // Alternating series: strongly negative lag-1 residual correlation.
  std::vector<double> x;
  Rng rng = make_rng(5, {});
  for (int i = 0; i < 200; ++i) x.push_back((i % 2 ? 1.0 : -1.0) + uniform_real(rng, -0.5, 0.5));
  const BbEstimate est = bb_estimate(x);
  if (est.degraded) CHECK(est.phi == est.phi_b);
  CHECK(std::isfinite(est.phi));
}

TEST_CASE("DEV recovers the dominant root of linear AR systems") {
  for (double root : {0.7, 0.9, 0.99}) {
    const auto x = red_ar1(root, 0.0, 5000, 13);
    for (int e : {1, 2, 3}) {
      const DevResult r = dev(x, SmapConfig{e, 1, 0.0});
      CHECK(r.modulus == doctest::Approx(root).epsilon(0.03).scale(1.0));
    }
  }
}

TEST_CASE("DEV sees a complex dominant pair") {
  // Roots +-0.9i: x_t = -0.81 x_{t-2} + e_t.
  const auto x = ar2(0.0, -0.81, 5000, 3);
  const DevResult r = dev(x, SmapConfig{2, 1, 0.0});
  CHECK(r.modulus == doctest::Approx(0.9).epsilon(0.03).scale(1.0));
  CHECK(std::abs(r.eigenvalue.imag()) > 0.5);
  CHECK_THROWS_AS(dev(std::vector<double>(5, 1.0), SmapConfig{3, 1, 0.0}), DataError);
}

TEST_CASE("DEV with theta > 0 on a linear system still finds the root") {
  const auto x = red_ar1(0.8, 0.0, 5000, 17);
  CHECK(dev(x, SmapConfig{2, 1, 1.0}).modulus == doctest::Approx(0.8).epsilon(0.06).scale(1.0));
}

TEST_CASE("rolling indicator windows end at their last parameter value") {
  std::vector<double> mu, x;
  const auto z = red_ar1(0.5, 0.0, 200, 1);
  for (int i = 0; i < 200; ++i) mu.push_back(0.01 * i);
  const IndicatorSeries s = indicator_series({z}, mu, EwsMethod::df);
  REQUIRE(s.mu.size() == 101);
  CHECK(s.mu.front() == mu[99]);
  CHECK(s.mu.back() == mu[199]);
  CHECK(s.value.front() == lag1_coefficient(std::span<const double>(z.data(), 100)));
  std::vector<double> flat(200, 1.0);
  const IndicatorSeries g = indicator_series({flat}, mu, EwsMethod::bb);
  CHECK(g.gaps == 101);
  CHECK(g.mu.empty());
}

TEST_CASE("quadratic extrapolation finds the threshold crossing") {
  IndicatorSeries s;
  for (int i = 0; i < 50; ++i) {
    const double m = 0.02 * i;
    s.mu.push_back(m);
    s.value.push_back(0.5 + 0.1 * m * m);
  }
  const auto r = extrapolate_tipping(s);
  REQUIRE(r);
  CHECK(*r == doctest::Approx(std::sqrt(5.0)).epsilon(1e-9));

  IndicatorSeries down;
  for (int i = 0; i < 50; ++i) {
    const double m = 1.0 - 0.02 * i;
    down.mu.push_back(m);
    down.value.push_back(0.2 + 0.4 * (1.0 - m));
  }
  const auto rd = extrapolate_tipping(down);
  REQUIRE(rd);
  CHECK(*rd == doctest::Approx(-1.0).epsilon(1e-9));

  IndicatorSeries falling = s;
  for (auto& v : falling.value) v = 0.9 - v * 0.1;
  CHECK_FALSE(extrapolate_tipping(falling));

  IndicatorSeries above = s;
  for (auto& v : above.value) v += 1.0;
  CHECK(*extrapolate_tipping(above) == s.mu.back());
}

TEST_CASE("indicator CSV header") {
  IndicatorSeries s;
  s.mu = {0.1};
  s.value = {0.5};
  std::ostringstream out;
  write_indicator_csv(out, s);
  CHECK(out.str().rfind("mu,value,method,window_frac\n", 0) == 0);
}
