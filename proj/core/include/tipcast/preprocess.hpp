#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tipcast/bifurcation.hpp"
#include "tipcast/integrate.hpp"
#include "tipcast/random.hpp"

namespace tipcast {

inline constexpr std::size_t kInstanceLength = 500;
inline constexpr std::size_t kMaxZeroPrefix = 250;
inline constexpr double kLabelMin = 1.01;
inline constexpr double kLabelMax = 3.0;

struct RawSample {
  std::vector<double> mu_seq;
  std::vector<double> state_seq;
  /// Trajectory step indices of the kept samples.
  std::vector<std::size_t> grid_index;
  double mu_c_true = 0.0;
  /// Number of candidate points drawn before truncation to 500.
  std::size_t draw_count = 0;
};

struct TrainingInstance {
  std::vector<double> residual;
  std::vector<double> mu_norm;
  double label_norm = 0.0;
  std::size_t prefix = 0;
  /// Raw parameter values mapped to 0 and 1; NaN when read back from CSV.
  double mu_first = 0.0;
  double mu_last = 0.0;
};

struct SamplingOptions {
  std::size_t min_draw = 505;
  std::size_t max_draw = 1000;
  std::size_t keep = kInstanceLength;
  int component = 0;
};

/// Draws l_s ~ U{min_draw..max_draw} distinct trajectory points, uniformly
/// among those with mu in [window_start, mu_c) along the ramp, sorts them in
/// ramp order and keeps the first `keep`.
RawSample irregular_sample(const Trajectory& trajectory, double window_start, double mu_c,
                           Rng& rng, const SamplingOptions& options = {});

/// Locally weighted linear fit (tricube kernel, one pass, no robustness
/// iterations) over the nearest floor(span * n) points by position.
std::vector<double> lowess_fit(std::span<const double> series, std::span<const double> positions,
                               double span = 0.2);

/// series - lowess_fit(series, positions, span).
std::vector<double> lowess_detrend(std::span<const double> series,
                                   std::span<const double> positions, double span = 0.2);

/// Zero prefix p ~ U{0..max_prefix}, then normalization.
TrainingInstance zero_and_normalize(std::span<const double> residual,
                                    std::span<const double> mu_seq, double mu_c, Rng& rng,
                                    std::size_t max_prefix = kMaxZeroPrefix);

/// Same with a caller-chosen prefix length.
TrainingInstance zero_and_normalize_with_prefix(std::span<const double> residual,
                                                std::span<const double> mu_seq, double mu_c,
                                                std::size_t prefix);

/// mu_first + label_norm * (mu_last - mu_first).
double denormalize_label(double label_norm, double mu_first, double mu_last);
double denormalize_label(const TrainingInstance& instance);

struct RegularSeries {
  std::vector<double> mu;
  std::vector<double> value;
};

/// n_out equidistant points over [mu_seq.front(), mu_seq.back()], linear interpolation.
RegularSeries linear_interpolate_regular(std::span<const double> mu_seq,
                                         std::span<const double> state_seq, std::size_t n_out);

/// Encodes a test series of length L <= 500: Lowess-detrend, normalize over
/// all L points, left-pad with 500 - L zeros. label_norm is NaN when mu_c is NaN.
TrainingInstance encode_test_instance(std::span<const double> mu_seq,
                                      std::span<const double> state_seq, double mu_c,
                                      double lowess_span = 0.2);

/// One CSV row: 500 residual values, 500 mu_norm values, label_norm.
void write_instance_row(std::ostream& out, const TrainingInstance& instance);
std::vector<TrainingInstance> read_instances(std::istream& in);
std::vector<TrainingInstance> read_instances_file(const std::filesystem::path& path);
void write_instances_file(const std::filesystem::path& path,
                          const std::vector<TrainingInstance>& instances);

struct InstanceSidecar {
  std::size_t count = 0;
  std::map<std::string, std::size_t> bif_type_counts;
  std::string noise_kind;
  std::uint64_t seed = 0;
};

std::string sidecar_to_json(const InstanceSidecar& sidecar);
InstanceSidecar sidecar_from_json(std::string_view text);

}  // namespace tipcast
