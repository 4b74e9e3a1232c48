#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tipcast/errors.hpp"

namespace tipcast {

inline constexpr std::size_t kMinWindowSamples = 30;

/// Lag-1 least-squares coefficient of the mean-centered series:
/// sum (x_i - m)(x_{i-1} - m) / sum (x_{i-1} - m)^2.
double lag1_coefficient(std::span<const double> series);

/// Columns are variables, all of equal length. PCA on the sample covariance,
/// lag-1 coefficient of the leading-component projection. Zero-variance
/// columns are dropped; a single remaining column gives its plain lag-1 value.
double degenerate_fingerprinting(const std::vector<std::vector<double>>& columns);

enum class BbBranch {
  /// Root in (-1, 1) closest to phi_b, the phi > rho root on ties.
  automatic,
  /// The "+" root, valid when phi > rho.
  phi_dominant,
  /// The "-" root, valid when rho > phi.
  rho_dominant,
};

std::string_view to_string(BbBranch b);
BbBranch bb_branch_from_string(std::string_view name);

struct BbEstimate {
  double phi = 0.0;
  double phi_b = 0.0;
  double rho_b = 0.0;
  /// Negative discriminant or phi_b = 0: phi falls back to phi_b.
  bool degraded = false;
};

BbEstimate bb_estimate(std::span<const double> window, BbBranch branch = BbBranch::automatic);

/// Expected naive lag-1 coefficient of an AR(1) process with coefficient phi
/// observed through AR(1) red noise with coefficient rho.
double bb_naive_phi_b(double phi, double rho);

struct SmapConfig {
  int E = 3;
  int tau = 1;
  double theta = 0.0;
};

struct DevResult {
  double modulus = 0.0;
  std::complex<double> eigenvalue;
  std::vector<double> coefficients;
  /// The weighted normal equations were rank deficient and were ridge-regularized.
  bool ridge = false;
};

DevResult dev(std::span<const double> window, const SmapConfig& cfg = {});

enum class EwsMethod { df, bb, dev };

std::string_view to_string(EwsMethod m);
EwsMethod ews_method_from_string(std::string_view name);

struct IndicatorOptions {
  double window_frac = 0.5;
  std::size_t step = 1;
  SmapConfig smap;
  BbBranch bb_branch = BbBranch::automatic;
};

struct IndicatorSeries {
  std::vector<double> mu;
  std::vector<double> value;
  double threshold = 1.0;
  EwsMethod method = EwsMethod::df;
  double window_frac = 0.5;
  /// Windows whose estimator failed and were omitted.
  std::size_t gaps = 0;
};

/// Rolling-window indicator. `columns` holds one series per state component;
/// bb and dev use only the first column, df all of them.
IndicatorSeries indicator_series(const std::vector<std::vector<double>>& columns,
                                 std::span<const double> mu_seq, EwsMethod method,
                                 const IndicatorOptions& options = {});

/// Least-squares quadratic of value against mu; the first mu at or beyond the
/// last window (ramp direction) where the fit reaches the threshold. If the fit
/// is already at or above the threshold there, the last mu is returned.
/// nullopt is a prediction failure.
std::optional<double> extrapolate_tipping(const IndicatorSeries& indicator);

/// CSV with header mu,value,method,window_frac.
void write_indicator_csv(std::ostream& out, const IndicatorSeries& indicator);

}  // namespace tipcast
