#pragma once

#include <string_view>
#include <vector>

#include "tipcast/bifurcation.hpp"
#include "tipcast/dynsys.hpp"
#include "tipcast/integrate.hpp"

namespace tipcast {

enum class SweepDirection { increasing, decreasing };

std::string_view to_string(SweepDirection d);
SweepDirection sweep_direction_from_string(std::string_view name);

/// Simulation protocol of one benchmark model in one sweep direction.
struct ModelProfile {
  ModelId id = ModelId::may_fold;
  SweepDirection direction = SweepDirection::increasing;
  /// Signed sweep rate per unit time.
  double rate = 0.0;
  double dt = kDefaultDt;
  NoiseKind noise = NoiseKind::white;
  double sigma = 0.01;
  std::vector<double> initial_values;
  /// Far end of the sweep used when labeling, beyond the reference crossing.
  double mu_limit = 0.0;
  /// Reference tipping point.
  double reference_mu_c = 0.0;
  BifurcationType expected_type = BifurcationType::unclassified;
  /// Starting guess for the equilibrium at the first initial value.
  StateVector x_guess;
  /// Observed state component for prediction.
  int observed = 0;
};

/// Profiles exist for both directions only for the hysteresis models; the
/// others accept just their default direction.
ModelProfile model_profile(ModelId id, SweepDirection direction);
ModelProfile model_profile(ModelId id);
bool has_direction(ModelId id, SweepDirection direction);

/// Equilibrium of the model at mu, found by Newton from the guess and, failing
/// that, by Euler relaxation followed by Newton polishing.
StateVector model_equilibrium(const NamedModel& model, const StateVector& guess, double mu,
                              double dt = kDefaultDt);

}  // namespace tipcast
