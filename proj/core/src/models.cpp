#include "tipcast/models.hpp"

#include <cmath>
#include <numbers>

namespace tipcast {

std::string_view to_string(SweepDirection d) {
  return d == SweepDirection::increasing ? "up" : "down";
}

SweepDirection sweep_direction_from_string(std::string_view name) {
  if (name == "up" || name == "increasing") return SweepDirection::increasing;
  if (name == "down" || name == "decreasing") return SweepDirection::decreasing;
  throw ArgumentError("direction must be up or down, got " + std::string(name));
}

namespace {

std::vector<double> grid(double first, double step, int count) {
  std::vector<double> v;
  for (int i = 0; i < count; ++i) v.push_back(first + step * i);
  return v;
}

SweepDirection default_direction(ModelId id) {
  switch (id) {
    case ModelId::energy_balance_fold:
    case ModelId::triffid_transcritical:
      return SweepDirection::decreasing;
    default:
      return SweepDirection::increasing;
  }
}

}  // namespace

bool has_direction(ModelId id, SweepDirection direction) {
  if (id == ModelId::sleep_wake_hysteresis || id == ModelId::sprott_b_hysteresis) return true;
  return direction == default_direction(id);
}

ModelProfile model_profile(ModelId id) { return model_profile(id, default_direction(id)); }

ModelProfile model_profile(ModelId id, SweepDirection direction) {
  if (!has_direction(id, direction)) {
    throw ArgumentError("model " + std::string(to_string(id)) + " has no " +
                        std::string(to_string(direction)) + " sweep");
  }
  constexpr double pi = std::numbers::pi;
  ModelProfile p;
  p.id = id;
  p.direction = direction;
  switch (id) {
    case ModelId::may_fold:
      p.rate = 6.25e-4;
      p.initial_values = grid(0.0, 0.02, 11);
      p.mu_limit = 0.4;
      p.reference_mu_c = 0.268;
      p.expected_type = BifurcationType::fold;
      p.x_guess = make_state({1.0});
      break;
    case ModelId::food_chain_hopf:
      p.rate = 1.54e-3;
      p.initial_values = grid(0.20, 0.02, 11);
      p.mu_limit = 0.7;
      p.reference_mu_c = 0.480;
      p.expected_type = BifurcationType::hopf;
      p.x_guess = make_state({0.5, 0.3, 0.3});
      break;
    case ModelId::rosenzweig_transcritical:
      p.rate = 8.112e-3;
      p.initial_values = grid(0.0, 0.5, 11);
      p.mu_limit = 8.0;
      p.reference_mu_c = 5.882;
      p.expected_type = BifurcationType::transcritical;
      p.x_guess = make_state({1.0, 0.5});
      break;
    case ModelId::energy_balance_fold:
      p.rate = -6e-7;
      p.dt = 1.0;
      p.noise = NoiseKind::red;
      p.initial_values = grid(1.4, -0.02, 11);
      p.mu_limit = 0.8;
      p.reference_mu_c = 0.962;
      p.expected_type = BifurcationType::fold;
      p.x_guess = make_state({300.0});
      break;
    case ModelId::pleistocene_hopf:
      p.rate = 8.4e-6;
      p.noise = NoiseKind::red;
      p.initial_values = grid(0.0, 0.03, 11);
      p.mu_limit = 0.6;
      p.reference_mu_c = 0.355;
      p.expected_type = BifurcationType::hopf;
      p.x_guess = make_state({0.1, 0.1, 0.1});
      break;
    case ModelId::triffid_transcritical:
      p.rate = -2.4e-3;
      p.noise = NoiseKind::red;
      p.initial_values = grid(0.90, -0.08, 11);
      p.mu_limit = -0.1;
      p.reference_mu_c = -0.005;
      p.expected_type = BifurcationType::transcritical;
      p.x_guess = make_state({0.5});
      break;
    case ModelId::sleep_wake_hysteresis:
      p.expected_type = BifurcationType::fold;
      if (direction == SweepDirection::increasing) {
        p.rate = 1.0 / 7200.0;
        p.initial_values = {0.1};
        p.mu_limit = 1.9;
        p.reference_mu_c = 1.153;
        p.x_guess = make_state({-10.0, 1.0});
      } else {
        p.rate = -1.0 / 7200.0;
        p.initial_values = {1.9};
        p.mu_limit = 0.1;
        p.reference_mu_c = 0.883;
        p.x_guess = make_state({1.0, -10.0});
      }
      break;
    case ModelId::sprott_b_hysteresis:
      p.expected_type = BifurcationType::hopf;
      if (direction == SweepDirection::increasing) {
        p.rate = pi * 1e-3;
        p.initial_values = {pi};
        p.mu_limit = 2.0 * pi;
        p.reference_mu_c = 1.461 * pi;
        p.x_guess = make_state({-1.7, -1.7, -2.9});
      } else {
        p.rate = -pi * 1e-3;
        p.initial_values = {2.0 * pi};
        p.mu_limit = pi;
        p.reference_mu_c = 1.539 * pi;
        p.x_guess = make_state({1.7, 1.7, -2.9});
      }
      break;
  }
  return p;
}

StateVector model_equilibrium(const NamedModel& model, const StateVector& guess, double mu,
                              double dt) {
  const DynamicalSystem sys(model);
  StateVector x = guess;
  RunOptions run;
  run.steps = 200000;
  try {
    run_observed(sys, guess, RampSpec::fixed(mu), NoiseSpec::none(), dt, nullptr, run,
                 [&](const StepView& v) {
                   x = v.x;
                   return true;
                 });
  } catch (const DivergenceError&) {
    throw NotFoundError("relaxation diverged while seeking the model equilibrium");
  }
  auto polished = newton_correct(sys, x, mu);
  if (!polished) throw NotFoundError("no equilibrium found near the relaxed state");
  return *polished;
}

}  // namespace tipcast
