#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tipcast/dynsys.hpp"
#include "tipcast/errors.hpp"
#include "tipcast/integrate.hpp"

namespace tipcast {

inline constexpr double kNewtonTol = 1e-10;

enum class BifurcationType { fold, hopf, transcritical, unclassified };

std::string_view to_string(BifurcationType type);
BifurcationType bifurcation_type_from_string(std::string_view name);

/// Eigenvalues of a 1x1..3x3 matrix: closed form for n <= 2, QR (Eigen) for n = 3.
std::vector<std::complex<double>> eigenvalues(const JacobianMatrix& j);

struct LeadingEigen {
  double max_real = 0.0;
  /// A complex pair lies within `band * spectral_radius` of max_real.
  bool complex_near_critical = false;
  double spectral_radius = 0.0;
};

LeadingEigen leading_eigen(const JacobianMatrix& j, double complex_band = 0.01);
double max_real_eigenvalue(const JacobianMatrix& j);

/// Max Re(eig J) at an arbitrary state; no equilibrium check.
double instantaneous_recovery_rate(const DynamicalSystem& system, const StateVector& x,
                                   double mu);

/// Max Re(eig J) at an equilibrium; throws PreconditionError when
/// ||f(x_star, mu)||_inf >= tol.
double recovery_rate(const DynamicalSystem& system, const StateVector& x_star, double mu,
                     double tol = kNewtonTol);

struct NewtonOptions {
  int max_iterations = 50;
  double tolerance = kNewtonTol;
};

/// Newton iteration on f(., mu) = 0; nullopt on failure.
std::optional<StateVector> newton_correct(const DynamicalSystem& system, const StateVector& guess,
                                          double mu, const NewtonOptions& options = {});

enum class BranchTermination { reached_end, newton_failure, lambda_stop, step_limit };

std::string_view to_string(BranchTermination t);

struct EquilibriumBranch {
  std::vector<double> mu;
  std::vector<StateVector> x_star;
  std::vector<double> lambda;
  std::vector<char> complex_near_critical;
  BranchTermination termination = BranchTermination::reached_end;
  /// Nominal continuation step.
  double d_mu = 0.0;

  std::size_t size() const { return mu.size(); }
  void push_back(double m, const StateVector& x, double l, bool near_complex) {
    mu.push_back(m);
    x_star.push_back(x);
    lambda.push_back(l);
    complex_near_critical.push_back(near_complex ? 1 : 0);
  }
};

struct ContinuationOptions {
  NewtonOptions newton;
  double lambda_stop = 0.5;
  /// Minimum step, and local grid around sign changes, as a fraction of |mu_end - mu0|.
  double refine_fraction = 1e-4;
  std::size_t max_steps_past_crossing = std::numeric_limits<std::size_t>::max();
  double complex_band = 0.01;
};

/// Newton failed to correct the seed at mu0.
class SeedError : public NotFoundError {
 public:
  using NotFoundError::NotFoundError;
};

/// Natural-parameter continuation. d_mu = 0 selects (mu_end - mu0) / 2000.
EquilibriumBranch continue_branch(const DynamicalSystem& system, const StateVector& seed,
                                  double mu0, double mu_end, double d_mu = 0.0,
                                  const ContinuationOptions& options = {});

struct TippingLabel {
  double mu_c = 0.0;
  BifurcationType bif_type = BifurcationType::unclassified;
};

/// First lambda <= 0 < lambda' pair, linearly interpolated. A branch that ends
/// in Newton failure with lambda approaching 0 and no sign change is a fold,
/// located by extrapolating lambda^2 to zero. Throws NotFoundError otherwise.
TippingLabel locate_crossing(const EquilibriumBranch& branch);

/// Tracks the instantaneous recovery rate along a run and reports the first
/// negative-to-positive sign change.
class RecoveryRateMonitor {
 public:
  explicit RecoveryRateMonitor(const DynamicalSystem& system, double complex_band = 0.01);

  /// Returns true once a crossing has been seen.
  bool observe(double mu, const StateVector& x);
  bool crossed() const { return crossed_; }
  double mu_c() const { return mu_c_; }
  bool complex_at_crossing() const { return complex_at_crossing_; }
  std::size_t observations() const { return count_; }

 private:
  const DynamicalSystem* system_;
  double band_;
  bool seen_stable_ = false;
  bool crossed_ = false;
  double prev_mu_ = 0.0;
  double prev_lambda_ = 0.0;
  bool prev_complex_ = false;
  double mu_c_ = std::numeric_limits<double>::quiet_NaN();
  bool complex_at_crossing_ = false;
  std::size_t count_ = 0;
};

struct LabelOptions {
  /// Classify real crossings by static continuation from the run's first point.
  bool classify = true;
  double complex_band = 0.01;
};

/// Rate-delayed label from a noise-free ramped trajectory. NotFoundError if
/// lambda never changes sign.
TippingLabel label_tipping_from_run(const DynamicalSystem& system, const Trajectory& trajectory,
                                    const LabelOptions& options = {});

/// Integrates a noise-free ramp from x0 and stops at the first crossing;
/// nothing is stored. NotFoundError if none before the ramp ends.
TippingLabel label_ramped_run(const DynamicalSystem& system, const StateVector& x0,
                              const RampSpec& ramp, double dt = kDefaultDt,
                              const LabelOptions& options = {});

/// Static classification of what happens to the equilibrium branch through x0
/// at mu0 when mu moves toward mu_target.
BifurcationType classify_static(const DynamicalSystem& system, const StateVector& x0, double mu0,
                                double mu_target, double complex_band = 0.01);

std::string to_json(const TippingLabel& label);
TippingLabel tipping_label_from_json(std::string_view text);

/// CSV with header mu,x0[,x1[,x2]],lambda.
void write_branch_csv(std::ostream& out, const EquilibriumBranch& branch);

}  // namespace tipcast
