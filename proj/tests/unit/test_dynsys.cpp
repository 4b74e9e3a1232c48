#include <cmath>

#include "doctest.h"
#include "tipcast/bifurcation.hpp"
#include "tipcast/dynsys.hpp"
#include "tipcast/errors.hpp"
#include "tipcast/models.hpp"

using namespace tipcast;

TEST_CASE("polynomial rhs matches the expanded monomials") {
  PolynomialSystem2D p;
  for (int i = 0; i < 10; ++i) {
    p.a[i] = 0.1 * (i + 1);
    p.b[i] = -0.05 * (i + 2);
  }
  p.a[6] = -1.0;
  p.b[9] = -2.0;
  p.bif_param_index = 1;
  const double x = 0.7, y = -1.3, mu = 0.25;
  const double m[10] = {1, x, y, x * x, x * y, y * y, x * x * x, x * x * y, x * y * y, y * y * y};
  double fx = 0, fy = 0;
  for (int i = 0; i < 10; ++i) {
    fx += (i == 1 ? mu : p.a[i]) * m[i];
    fy += p.b[i] * m[i];
  }
  const StateVector f = p.rhs(make_state({x, y}), mu);
  CHECK(f(0) == doctest::Approx(fx).epsilon(1e-14));
  CHECK(f(1) == doctest::Approx(fy).epsilon(1e-14));
}

TEST_CASE("bifurcation index can address the second equation") {
  PolynomialSystem2D p;
  p.b[0] = 5.0;
  p.bif_param_index = 10;
  CHECK(p.mu() == 5.0);
  const StateVector f = p.rhs(make_state({0.0, 0.0}), -3.0);
  CHECK(f(1) == -3.0);
  CHECK(PolynomialSystem2D::is_cubic_index(16));
  CHECK_FALSE(PolynomialSystem2D::is_cubic_index(15));
}

TEST_CASE("analytic jacobians agree with central differences") {
  Rng rng = make_rng(11, {});
  for (int trial = 0; trial < 20; ++trial) {
    const PolynomialSystem2D p = sample_random_system(rng);
    const DynamicalSystem sys(p);
    const StateVector x = make_state({uniform_real(rng, -1, 1), uniform_real(rng, -1, 1)});
    const JacobianMatrix ja = jacobian(sys, x, p.mu());
    const JacobianMatrix jf = finite_difference_jacobian(sys, x, p.mu());
    CHECK((ja - jf).cwiseAbs().maxCoeff() < 1e-6);
  }
  for (auto kind : {NormalFormKind::fold, NormalFormKind::hopf_supercritical,
                    NormalFormKind::hopf_subcritical, NormalFormKind::transcritical}) {
    const DynamicalSystem sys(NormalForm{kind});
    StateVector x(sys.state_dim());
    x.setConstant(0.3);
    CHECK((jacobian(sys, x, -0.2) - finite_difference_jacobian(sys, x, -0.2)).cwiseAbs().maxCoeff() <
          1e-6);
  }
}

TEST_CASE("random systems honor the generation invariants") {
  Rng rng = make_rng(3, {});
  for (int trial = 0; trial < 200; ++trial) {
    const PolynomialSystem2D p = sample_random_system(rng);
    CHECK_NOTHROW(p.validate());
    const auto nz = p.nonzero_indices();
    CHECK(nz.size() == 10);
    CHECK(p.bif_param_index == nz.front());
    for (int i : nz) {
      if (PolynomialSystem2D::is_cubic_index(i)) CHECK(p.coefficient(i) < 0.0);
    }
  }
}

TEST_CASE("same seed gives the same random system") {
  Rng r1 = make_rng(42, {5});
  Rng r2 = make_rng(42, {5});
  const auto a = sample_random_system(r1);
  const auto b = sample_random_system(r2);
  CHECK(a.a == b.a);
  CHECK(a.b == b.b);
  CHECK(to_json(a) == to_json(b));
  const auto c = polynomial_system_from_json(to_json(a));
  CHECK(c.a == a.a);
  CHECK(c.bif_param_index == a.bif_param_index);
}

TEST_CASE("model registry round-trips names") {
  for (ModelId id : all_model_ids()) CHECK(model_id_from_string(to_string(id)) == id);
  CHECK_THROWS_AS(model_id_from_string("lorenz"), ArgumentError);
  CHECK_THROWS_AS(NamedModel(ModelId::may_fold, {{"zz", 1.0}}), ArgumentError);
}

TEST_CASE("Sprott B equilibrium has a closed form") {
  // x = y, x y = b, x z = -beta cos k
  const NamedModel m(ModelId::sprott_b_hysteresis);
  const double k = 1.2 * M_PI;
  const double b = m.param("b"), beta = m.param("beta");
  const double x = std::sqrt(b);
  const StateVector f = m.rhs(make_state({x, x, -beta * std::cos(k) / x}), k);
  CHECK(f.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Rosenzweig-MacArthur predator invasion threshold") {
  // Predator-free state (k, 0) loses stability where e a k / (1 + a h k) = m.
  const NamedModel m(ModelId::rosenzweig_transcritical);
  const double k = m.param("k"), e = m.param("e"), h = m.param("h"), mort = m.param("m");
  const double a_c = mort / (k * (e - mort * h));
  CHECK(a_c == doctest::Approx(5.882).epsilon(1e-3));
  const DynamicalSystem sys(m);
  CHECK(recovery_rate(sys, make_state({k, 0.0}), a_c - 0.01) < 0.0);
  CHECK(recovery_rate(sys, make_state({k, 0.0}), a_c + 0.01) > 0.0);
}

TEST_CASE("energy balance equilibrium balances outgoing and incoming flux") {
  const NamedModel m(ModelId::energy_balance_fold);
  const ModelProfile p = model_profile(ModelId::energy_balance_fold);
  const double u = 1.2;
  const StateVector t = model_equilibrium(m, p.x_guess, u, p.dt);
  const double lhs = m.param("e") * m.param("rho") * std::pow(t(0), 4);
  const double rhs = 0.25 * u * m.param("I_0") * (1.0 - (m.param("a") - m.param("b") * t(0)));
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
}

TEST_CASE("checked rhs rejects wrong dimensions and non-finite input") {
  const DynamicalSystem sys(NormalForm{NormalFormKind::fold});
  CHECK_THROWS_AS(eval_rhs(sys, make_state({1.0, 2.0}), 0.0), ArgumentError);
  CHECK_THROWS_AS(eval_rhs(sys, make_state({NAN}), 0.0), ArgumentError);
}
