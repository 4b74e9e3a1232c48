#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "tipcast/dynsys.hpp"
#include "tipcast/errors.hpp"
#include "tipcast/random.hpp"

namespace tipcast {

inline constexpr double kDefaultDt = 0.01;
inline constexpr double kDivergenceGuard = 1e8;

/// Linear sweep mu(t) = mu0 + rate * t, held at mu_end once reached.
struct RampSpec {
  double mu0 = 0.0;
  double rate = 0.0;
  double mu_end = 0.0;

  void validate() const;
  static RampSpec fixed(double mu) { return {mu, 0.0, mu}; }
};

enum class NoiseKind { none, white, red };

std::string_view to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(std::string_view name);

struct NoiseSpec {
  NoiseKind kind = NoiseKind::none;
  double sigma = 0.0;
  double phi = 0.0;

  void validate() const;
  static NoiseSpec none() { return {}; }
  static NoiseSpec white(double sigma) { return {NoiseKind::white, sigma, 0.0}; }
  static NoiseSpec red(double sigma, double phi) { return {NoiseKind::red, sigma, phi}; }
};

struct Trajectory {
  std::vector<double> t;
  std::vector<double> mu;
  std::vector<StateVector> x;
  double dt = kDefaultDt;

  std::size_t size() const { return t.size(); }
  bool empty() const { return t.empty(); }
  void push_back(double tn, double mun, const StateVector& xn) {
    t.push_back(tn);
    mu.push_back(mun);
    x.push_back(xn);
  }
  /// Values of one state component.
  std::vector<double> component(int index) const;
};

struct RunOptions {
  /// Number of Euler steps. 0 derives it from the ramp, which requires rate != 0.
  std::size_t steps = 0;
  /// Record every k-th step (the final step is always recorded).
  std::size_t record_stride = 1;
  double t0 = 0.0;
  double divergence_guard = kDivergenceGuard;
};

/// The state left the guard region or became non-finite. `last_valid_step`
/// is the step index of the last finite, in-guard state.
class DivergenceError : public NumericError {
 public:
  DivergenceError(const std::string& what, std::size_t last_valid_step,
                  std::shared_ptr<const Trajectory> partial)
      : NumericError(what), last_valid_step_(last_valid_step), partial_(std::move(partial)) {}
  std::size_t last_valid_step() const noexcept { return last_valid_step_; }
  /// Recorded points up to the last valid step; may be null for observer runs.
  const std::shared_ptr<const Trajectory>& partial() const noexcept { return partial_; }

 private:
  std::size_t last_valid_step_;
  std::shared_ptr<const Trajectory> partial_;
};

struct StepView {
  std::size_t step;
  double t;
  double mu;
  const StateVector& x;
};

/// Return false to stop the run early.
using StepObserver = std::function<bool(const StepView&)>;

/// Number of steps a ramp needs to reach mu_end at step size dt.
std::size_t ramp_steps(const RampSpec& ramp, double dt);

/// mu at step n, clamped to mu_end.
double ramp_mu(const RampSpec& ramp, std::size_t n, double dt);

/// Stateful per-component noise source implementing the white and AR(1) increments.
class NoiseSource {
 public:
  NoiseSource(const NoiseSpec& spec, int dim, double dt, Rng* rng);
  bool active() const { return active_; }
  /// Adds the next increment to x in place.
  void apply(StateVector& x);

 private:
  NoiseSpec spec_;
  double scale_;
  bool active_;
  Rng* rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  StateVector eta_;
};

/// Shared stepping core. Calls `observer` at step 0 and after every step,
/// returns the number of steps taken.
std::size_t run_observed(const DynamicalSystem& system, const StateVector& x0,
                         const RampSpec& ramp, const NoiseSpec& noise, double dt, Rng* rng,
                         const RunOptions& options, const StepObserver& observer);

Trajectory euler_run(const DynamicalSystem& system, const StateVector& x0, const RampSpec& ramp,
                     double dt = kDefaultDt, const RunOptions& options = {});

Trajectory euler_maruyama_run(const DynamicalSystem& system, const StateVector& x0,
                              const RampSpec& ramp, const NoiseSpec& noise, double dt, Rng& rng,
                              const RunOptions& options = {});

struct ConvergeOptions {
  std::size_t steps = 10000;
  double dt = kDefaultDt;
  double tolerance = 1e-8;
  std::size_t tail = 10;
};

/// Euler run at fixed mu; the final state if the last `tail` points agree
/// within `tolerance` componentwise, otherwise nullopt (divergence included).
std::optional<StateVector> converge_to_equilibrium(const DynamicalSystem& system,
                                                   const StateVector& x0, double mu,
                                                   const ConvergeOptions& options = {});

/// Fixed-mu noisy run of `duration` time units; returns the final state.
StateVector burn_in(const DynamicalSystem& system, const StateVector& x0, double mu,
                    const NoiseSpec& noise, double dt, double duration, Rng* rng);

/// Stand-alone AR(1) generator eta_{n+1} = phi eta_n + sigma sqrt(dt) N(0,1).
class Ar1Process {
 public:
  Ar1Process(double phi, double sigma, double dt);
  double next(Rng& rng);
  std::vector<double> generate(std::size_t n, Rng& rng);

 private:
  double phi_;
  double scale_;
  double eta_ = 0.0;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Noise amplitude for training simulations: triangular(0.0075, 0.01, 0.0125).
double sample_training_sigma(Rng& rng);

/// CSV with header t,mu,x0[,x1[,x2]] and 17 significant digits.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace tipcast
