#include <cmath>
#include <numeric>

#include "doctest.h"
#include "tipcast/errors.hpp"
#include "tipcast/ews.hpp"
#include "tipcast/integrate.hpp"

using namespace tipcast;

namespace {

DynamicalSystem decay(double k) {
  CustomSystem c;
  c.dim = 1;
  c.rhs = [k](const StateVector& s, double) { return StateVector::Constant(1, -k * s(0)); };
  c.jacobian = [k](const StateVector&, double) { return JacobianMatrix::Constant(1, 1, -k); };
  return DynamicalSystem(c);
}

}  // namespace

TEST_CASE("Euler on linear decay is geometric") {
  const double dt = 0.01, k = 2.0;
  const Trajectory t = euler_run(decay(k), make_state({1.0}), RampSpec::fixed(0.0), dt,
                                 RunOptions{100, 1, 0.0, 1e8});
  REQUIRE(t.x.size() == 101);
  CHECK(t.x.back()(0) == doctest::Approx(std::pow(1.0 - k * dt, 100)).epsilon(1e-12));
  CHECK(t.t.back() == doctest::Approx(1.0));
}

TEST_CASE("ramp clamps at mu_end and counts steps") {
  const RampSpec r{0.0, 0.5, 1.0};
  CHECK(ramp_steps(r, 0.01) == 200);
  CHECK(ramp_mu(r, 100, 0.01) == doctest::Approx(0.5));
  CHECK(ramp_mu(r, 1000, 0.01) == 1.0);
  const RampSpec down{1.0, -0.5, 0.0};
  CHECK(ramp_steps(down, 0.01) == 200);
  CHECK_THROWS_AS((RampSpec{0.0, -1.0, 1.0}).validate(), ArgumentError);
}

TEST_CASE("zero noise reproduces the deterministic path bit for bit") {
  const DynamicalSystem sys(NormalForm{NormalFormKind::hopf_supercritical});
  const RampSpec ramp{-1.0, 0.1, -0.5};
  Rng rng = make_rng(1, {});
  const Trajectory a = euler_run(sys, make_state({0.1, 0.2}), ramp, 0.01);
  const Trajectory b =
      euler_maruyama_run(sys, make_state({0.1, 0.2}), ramp, NoiseSpec::white(0.0), 0.01, rng);
  REQUIRE(a.x.size() == b.x.size());
  for (std::size_t i = 0; i < a.x.size(); ++i) CHECK((a.x[i] - b.x[i]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Euler-Maruyama OU variance matches the discrete stationary value") {
  // x' = (1 - k dt) x + sigma sqrt(dt) N: var = sigma^2 dt / (1 - (1 - k dt)^2).
  const double k = 1.0, sigma = 0.5, dt = 0.01;
  Rng rng = make_rng(9, {});
  const auto sys = decay(k);
  RunOptions ro;
  ro.steps = 400000;
  const Trajectory t =
      euler_maruyama_run(sys, make_state({0.0}), RampSpec::fixed(0.0), NoiseSpec::white(sigma), dt, rng, ro);
  double s2 = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 2000; i < t.x.size(); ++i, ++n) s2 += t.x[i](0) * t.x[i](0);
  const double a = 1.0 - k * dt;
  const double expected = sigma * sigma * dt / (1.0 - a * a);
  CHECK(s2 / n == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("AR(1) generator has the requested lag-1 coefficient and variance") {
  for (double phi : {-0.5, 0.3, 0.8}) {
    Rng rng = make_rng(4, {});
    Ar1Process p(phi, 1.0, 1.0);
    const auto v = p.generate(200000, rng);
    CHECK(lag1_coefficient(v) == doctest::Approx(phi).epsilon(0.02).scale(1.0));
    double s2 = 0.0;
    for (double x : v) s2 += x * x;
    CHECK(s2 / v.size() == doctest::Approx(1.0 / (1.0 - phi * phi)).epsilon(0.05));
  }
}

TEST_CASE("red noise on a system is AR(1) filtered") {
  // With zero drift the state is the running sum of eta; its increments are AR(1).
  CustomSystem c;
  c.dim = 1;
  c.rhs = [](const StateVector&, double) { return StateVector::Zero(1); };
  const DynamicalSystem sys(c);
  Rng rng = make_rng(2, {});
  RunOptions ro;
  ro.steps = 100000;
  const Trajectory t =
      euler_maruyama_run(sys, make_state({0.0}), RampSpec::fixed(0.0), NoiseSpec::red(1.0, 0.6), 1.0, rng, ro);
  std::vector<double> inc;
  for (std::size_t i = 1; i < t.x.size(); ++i) inc.push_back(t.x[i](0) - t.x[i - 1](0));
  CHECK(lag1_coefficient(inc) == doctest::Approx(0.6).epsilon(0.03));
}

TEST_CASE("same seed, same noisy run") {
  const DynamicalSystem sys(NormalForm{NormalFormKind::fold});
  Rng r1 = make_rng(5, {1});
  Rng r2 = make_rng(5, {1});
  const RampSpec ramp{-1.0, 0.01, -0.5};
  const auto a = euler_maruyama_run(sys, make_state({-1.0}), ramp, NoiseSpec::white(0.01), 0.01, r1);
  const auto b = euler_maruyama_run(sys, make_state({-1.0}), ramp, NoiseSpec::white(0.01), 0.01, r2);
  CHECK(a.x.back()(0) == b.x.back()(0));
  Rng r3 = make_rng(5, {2});
  const auto c = euler_maruyama_run(sys, make_state({-1.0}), ramp, NoiseSpec::white(0.01), 0.01, r3);
  CHECK(a.x.back()(0) != c.x.back()(0));
}

TEST_CASE("divergence raises with the partial trajectory") {
  const DynamicalSystem sys(NormalForm{NormalFormKind::fold});
  try {
    euler_run(sys, make_state({0.0}), RampSpec{1.0, 0.0, 1.0}, 0.01, RunOptions{100000, 1, 0.0, 1e8});
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    REQUIRE(e.partial());
    CHECK(e.partial()->x.size() == e.last_valid_step() + 1);
    CHECK(std::abs(e.partial()->x.back()(0)) <= 1e8);
  }
}

TEST_CASE("convergence to a stable equilibrium") {
  const DynamicalSystem sys(NormalForm{NormalFormKind::fold});
  const auto eq = converge_to_equilibrium(sys, make_state({0.0}), -0.25);
  REQUIRE(eq);
  CHECK((*eq)(0) == doctest::Approx(-0.5).epsilon(1e-6));
  CHECK_FALSE(converge_to_equilibrium(sys, make_state({0.0}), 0.25));
}

TEST_CASE("training sigma stays within the triangular support") {
  Rng rng = make_rng(8, {});
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double s = sample_training_sigma(rng);
    CHECK(s >= 0.0075);
    CHECK(s <= 0.0125);
    sum += s;
  }
  CHECK(sum / n == doctest::Approx(0.01).epsilon(0.01));
}
