#include <cmath>

#include "doctest.h"
#include "tipcast/bifurcation.hpp"
#include "tipcast/errors.hpp"
#include "tipcast/integrate.hpp"
#include "tipcast/models.hpp"

using namespace tipcast;

namespace {

// mu at which x reaches 0 on dx/dmu = (mu + x^2) / r, classical RK4 in mu.
double fold_delay_oracle(double r, double mu0) {
  double mu = mu0;
  double x = -std::sqrt(-mu0);
  const double h = 1e-5;
  const auto f = [r](double m, double y) { return (m + y * y) / r; };
  while (x < 0.0) {
    const double k1 = f(mu, x);
    const double k2 = f(mu + h / 2, x + h / 2 * k1);
    const double k3 = f(mu + h / 2, x + h / 2 * k2);
    const double k4 = f(mu + h, x + h * k3);
    const double xn = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    if (xn >= 0.0) return mu + h * (-x) / (xn - x);
    x = xn;
    mu += h;
  }
  return mu;
}

}  // namespace

TEST_CASE("recovery rate closed forms of the normal forms") {
  for (int i = 0; i < 20; ++i) {
    const double mu = -1.0 + 0.049 * i;  // strictly negative
    const DynamicalSystem fold(NormalForm{NormalFormKind::fold});
    CHECK(recovery_rate(fold, make_state({-std::sqrt(-mu)}), mu) ==
          doctest::Approx(-2.0 * std::sqrt(-mu)).epsilon(1e-10));
    const DynamicalSystem tc(NormalForm{NormalFormKind::transcritical});
    CHECK(recovery_rate(tc, make_state({0.0}), mu) == doctest::Approx(mu).epsilon(1e-12));
    for (auto k : {NormalFormKind::hopf_supercritical, NormalFormKind::hopf_subcritical}) {
      const DynamicalSystem hopf(NormalForm{k});
      const double m2 = -1.0 + 0.1 * i;  // both signs
      CHECK(recovery_rate(hopf, make_state({0.0, 0.0}), m2) == doctest::Approx(m2).epsilon(1e-12));
    }
  }
}

TEST_CASE("recovery rate requires an equilibrium") {
  const DynamicalSystem fold(NormalForm{NormalFormKind::fold});
  CHECK_THROWS_AS(recovery_rate(fold, make_state({0.3}), -1.0), PreconditionError);
}

TEST_CASE("eigenvalues of small matrices") {
  JacobianMatrix j(2, 2);
  j << 0, -1, 1, 0;
  const auto ev = eigenvalues(j);
  REQUIRE(ev.size() == 2);
  CHECK(std::abs(ev[0].imag()) == doctest::Approx(1.0));
  CHECK(max_real_eigenvalue(j) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(leading_eigen(j).complex_near_critical);
  // Cancellation-prone trace: eigenvalues 1e8 and 1e-8.
  JacobianMatrix k(2, 2);
  k << 1e8, 0, 0, 1e-8;
  k(0, 1) = 0.0;
  const auto e2 = eigenvalues(k);
  const double small = std::min(e2[0].real(), e2[1].real());
  CHECK(small == doctest::Approx(1e-8).epsilon(1e-6));
  JacobianMatrix m(3, 3);
  m << -1, 0, 0, 0, -2, 0, 0, 0, 0.5;
  CHECK(max_real_eigenvalue(m) == doctest::Approx(0.5));
}

TEST_CASE("continuation finds the fold of the normal form") {
  const DynamicalSystem fold(NormalForm{NormalFormKind::fold});
  const auto branch = continue_branch(fold, make_state({-1.0}), -1.0, 1.0);
  CHECK(branch.termination == BranchTermination::newton_failure);
  const auto label = locate_crossing(branch);
  CHECK(label.bif_type == BifurcationType::fold);
  CHECK(label.mu_c == doctest::Approx(0.0).epsilon(2e-3).scale(1.0));
  for (std::size_t i = 0; i < branch.size(); ++i) {
    CHECK(branch.lambda[i] == doctest::Approx(2.0 * branch.x_star[i](0)).epsilon(1e-9).scale(1.0));
    // Points within Newton tolerance of the fold can sit at mu ~ +1e-11.
    if (branch.mu[i] < -1e-6) {
      CHECK(branch.lambda[i] == doctest::Approx(-2.0 * std::sqrt(-branch.mu[i])).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("continuation labels transcritical and Hopf crossings") {
  const DynamicalSystem tc(NormalForm{NormalFormKind::transcritical});
  const auto t = locate_crossing(continue_branch(tc, make_state({0.0}), -1.0, 1.0));
  CHECK(t.bif_type == BifurcationType::transcritical);
  CHECK(t.mu_c == doctest::Approx(0.0).epsilon(1e-9).scale(1.0));
  for (auto k : {NormalFormKind::hopf_supercritical, NormalFormKind::hopf_subcritical}) {
    const DynamicalSystem hopf(NormalForm{k});
    const auto h = locate_crossing(continue_branch(hopf, make_state({0.0, 0.0}), -1.0, 1.0));
    CHECK(h.bif_type == BifurcationType::hopf);
    CHECK(h.mu_c == doctest::Approx(0.0).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("continuation runs in the decreasing direction") {
  // -mu + x^2 has its fold at 0 coming from above.
  CustomSystem c;
  c.dim = 1;
  c.rhs = [](const StateVector& s, double mu) { return StateVector::Constant(1, -mu + s(0) * s(0)); };
  const DynamicalSystem sys(c);
  const auto label = locate_crossing(continue_branch(sys, make_state({-1.0}), 1.0, -1.0));
  CHECK(label.bif_type == BifurcationType::fold);
  CHECK(label.mu_c == doctest::Approx(0.0).epsilon(2e-3).scale(1.0));
}

TEST_CASE("a stable branch without crossing has no label") {
  const DynamicalSystem tc(NormalForm{NormalFormKind::transcritical});
  const auto branch = continue_branch(tc, make_state({0.0}), -2.0, -1.0);
  CHECK(branch.termination == BranchTermination::reached_end);
  CHECK_THROWS_AS(locate_crossing(branch), NotFoundError);
  CHECK_THROWS_AS(continue_branch(tc, make_state({5.0}), 1.0, 1.0), ArgumentError);
}

TEST_CASE("rate-delayed fold tipping follows the slow-passage equation") {
  const DynamicalSystem fold(NormalForm{NormalFormKind::fold});
  double previous = -1.0;
  for (double r : {0.25, 0.5, 1.0}) {
    LabelOptions lo;
    lo.classify = false;
    const auto label = label_ramped_run(fold, make_state({-1.0}), RampSpec{-1.0, r, 3.0}, 0.01, lo);
    const double oracle = fold_delay_oracle(r, -1.0);
    CHECK(label.mu_c > previous);
    CHECK(label.mu_c == doctest::Approx(oracle).epsilon(0.02));
    previous = label.mu_c;
  }
}

TEST_CASE("streaming monitor matches the stored-trajectory labeler") {
  const DynamicalSystem tc(NormalForm{NormalFormKind::transcritical});
  const RampSpec ramp{-1.0, 0.05, 1.0};
  const Trajectory traj = euler_run(tc, make_state({0.0}), ramp, 0.01);
  LabelOptions lo;
  lo.classify = false;
  const auto a = label_tipping_from_run(tc, traj, lo);
  const auto b = label_ramped_run(tc, make_state({0.0}), ramp, 0.01, lo);
  CHECK(a.mu_c == b.mu_c);
  CHECK(a.mu_c == doctest::Approx(0.0).epsilon(1e-6).scale(1.0));
}

TEST_CASE("branch and label serialization") {
  const TippingLabel l{0.268, BifurcationType::fold};
  const auto back = tipping_label_from_json(to_json(l));
  CHECK(back.mu_c == 0.268);
  CHECK(back.bif_type == BifurcationType::fold);
  CHECK(bifurcation_type_from_string("hopf") == BifurcationType::hopf);
  CHECK_THROWS_AS(bifurcation_type_from_string("cusp"), ArgumentError);
}

TEST_CASE("benchmark static crossings against the analytic threshold") {
  // Rosenzweig-MacArthur: m / (k (e - m h)).
  const NamedModel rm(ModelId::rosenzweig_transcritical);
  const ModelProfile p = model_profile(ModelId::rosenzweig_transcritical);
  const StateVector eq = model_equilibrium(rm, p.x_guess, p.initial_values.front(), p.dt);
  const auto label = locate_crossing(continue_branch(rm, eq, p.initial_values.front(), 8.0));
  CHECK(label.mu_c == doctest::Approx(2.0 / (1.7 * 0.2)).epsilon(1e-4));
  CHECK(label.bif_type == BifurcationType::transcritical);
}
