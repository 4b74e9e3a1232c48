#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tipcast/ews.hpp"
#include "tipcast/pipeline.hpp"

namespace tipcast {

/// Relative error assigned to prediction failures.
inline constexpr double kEpsilonMax = 2.0;

/// |mu_hat - mu_c| / |mu_end - mu_c|.
double relative_error(double mu_hat, double mu_c, double mu_end);

enum class Method { dl, df, bb, dev, null };

std::string_view to_string(Method m);
Method method_from_string(std::string_view name);
/// Comma-separated list, duplicates rejected.
std::vector<Method> parse_methods(std::string_view list);

struct PredictionResult {
  Method method = Method::null;
  std::optional<double> mu_hat;
  double mu_c = 0.0;
  double mu_end = 0.0;
  /// kEpsilonMax when the prediction failed.
  double epsilon = 0.0;

  bool failed() const { return !mu_hat.has_value(); }
};

PredictionResult score(Method method, std::optional<double> mu_hat, double mu_c, double mu_end);

struct Aggregate {
  double mean = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t n = 0;
  std::size_t n_fail = 0;
};

/// Linear-interpolation percentile (0 <= q <= 1) of unsorted values.
double percentile(std::vector<double> values, double q);

/// Mean and empirical 5th/95th percentiles of epsilon; needs >= 2 results.
Aggregate aggregate(std::span<const PredictionResult> results);

struct BaselineConfig {
  IndicatorOptions indicator;
  double lowess_span = 0.2;
};

/// Interpolates every component onto a regular grid of the same length,
/// Lowess-detrends, computes the rolling indicator and extrapolates it.
/// `columns` holds every state component; bb and dev use `observed`.
/// nullopt is a prediction failure.
std::optional<double> predict_baseline(Method method, std::span<const double> mu_seq,
                                       const std::vector<std::vector<double>>& columns,
                                       int observed, const BaselineConfig& config = {});

/// External predictor run as `<command> predict --model <model> --in <instances> --out <out>`.
struct DlBridge {
  std::string command;
  std::string model;
};

/// Reads `index,label_norm_hat` rows; the indices must be 0..expected_count-1.
std::vector<double> read_prediction_csv(const std::filesystem::path& path,
                                        std::size_t expected_count);
void write_prediction_csv(const std::filesystem::path& path, std::span<const double> label_norm_hat);

/// Runs the bridge on an instance file and returns normalized predictions.
std::vector<double> run_dl_bridge(const DlBridge& bridge, const std::filesystem::path& instances,
                                  const std::filesystem::path& output, std::size_t expected_count);

struct CompareConfig {
  BaselineConfig baseline;
  /// Required for Method::null: the predictor returns this normalized label.
  std::optional<double> null_label_mean;
  /// Required for Method::dl.
  std::optional<DlBridge> dl;
  /// Scratch directory for the bridge's files.
  std::filesystem::path work_dir;
  unsigned jobs = 1;
};

struct SeriesPrediction {
  std::size_t initial_index = 0;
  double initial_value = 0.0;
  std::size_t series_index = 0;
  PredictionResult result;
};

struct ComparisonRow {
  std::string model;
  double initial_value = 0.0;
  Method method = Method::null;
  Aggregate stats;
};

struct Comparison {
  std::vector<ComparisonRow> rows;
  std::vector<SeriesPrediction> predictions;
};

/// Label of a suite in the tables: model id, plus the sweep direction for
/// models that have both.
std::string suite_label(const TestSuite& suite);

Comparison compare_methods(const TestSuite& suite, const std::vector<Method>& methods,
                           const CompareConfig& config);

/// model,initial_value,method,mean_eps,ci_lo,ci_hi,n_fail
void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows,
                          bool header = true);
/// initial_value, then <method>_mean,<method>_ci_lo,<method>_ci_hi per method.
void write_plotdata_csv(std::ostream& out, std::span<const ComparisonRow> rows);
/// model,initial_value,series_index,method,mu_hat,mu_c,mu_end,epsilon,failed
void write_predictions_csv(std::ostream& out, const std::string& model,
                           std::span<const SeriesPrediction> predictions, bool header = true);

}  // namespace tipcast
