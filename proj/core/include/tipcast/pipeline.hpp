#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tipcast/bifurcation.hpp"
#include "tipcast/models.hpp"
#include "tipcast/preprocess.hpp"

namespace tipcast {

/// Instance types counted against the per-type quota.
inline constexpr std::array<BifurcationType, 3> kCorpusTypes = {
    BifurcationType::fold, BifurcationType::hopf, BifurcationType::transcritical};

struct CorpusConfig {
  std::size_t target_count_per_type = 2000;
  NoiseKind noise_kind = NoiseKind::white;
  std::uint64_t seed = 0;
  double dt = kDefaultDt;
  std::vector<int> rate_ratios = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::size_t runs_per_bifurcation = 5;
  std::filesystem::path output_dir;
  /// Systems examined before giving up on unfilled quotas.
  std::size_t max_attempts = 1000000;
  /// Continuation reaches this far from the starting coefficient in each direction.
  double continuation_span = 5.0;
  /// Steps of the slowest sweep, from mu0 to mu0 + 1.2 (mu_static - mu0).
  std::size_t base_sweep_steps = 100000;
  double burn_in_time = 100.0;
  /// Execution parameters; they do not affect the output.
  unsigned jobs = 1;
  std::size_t batch_size = 32;

  void validate() const;
};

struct InstanceMeta {
  std::uint64_t system_index = 0;
  int bif_param_index = 0;
  int direction = 1;
  BifurcationType bif_type = BifurcationType::unclassified;
  int rate_ratio = 1;
  double mu0 = 0.0;
  double mu_static = 0.0;
  double mu_c = 0.0;
  double sigma = 0.0;
  double phi = 0.0;
  std::size_t draw_count = 0;
};

struct GeneratedInstance {
  TrainingInstance instance;
  InstanceMeta meta;
};

/// Everything one candidate system contributes, with types in `skip` left out.
struct SystemOutcome {
  bool converged = false;
  std::size_t bifurcations_found = 0;
  std::vector<GeneratedInstance> instances;
};

SystemOutcome process_system(const CorpusConfig& cfg, std::uint64_t system_index,
                             const std::array<bool, 3>& skip = {false, false, false});

struct CorpusManifest {
  CorpusConfig config;
  std::map<std::string, std::size_t> counts;
  std::uint64_t next_system_index = 0;
  std::uint64_t systems_converged = 0;
  std::uint64_t instances_bytes = 0;
  std::uint64_t meta_bytes = 0;
  std::string content_hash;
  bool complete = false;
  bool null_model = false;
};

std::string manifest_to_json(const CorpusManifest& manifest);
CorpusManifest manifest_from_json(std::string_view text);
CorpusManifest read_manifest(const std::filesystem::path& corpus_dir);

/// Quotas not reached within max_attempts; the partial corpus is on disk.
class PartialCorpusError : public DataError {
 public:
  PartialCorpusError(const std::string& what, std::map<std::string, std::size_t> counts)
      : DataError(what), counts_(std::move(counts)) {}
  const std::map<std::string, std::size_t>& counts() const noexcept { return counts_; }

 private:
  std::map<std::string, std::size_t> counts_;
};

using ProgressCallback = std::function<void(const CorpusManifest&)>;

/// Writes instances.csv, instances.json (sidecar), instances_meta.csv and
/// manifest.json into cfg.output_dir. Resumes an incomplete corpus with the
/// same configuration.
CorpusManifest generate_corpus(const CorpusConfig& cfg, const ProgressCallback& progress = {});

/// Copies a corpus, permuting each instance's non-zero residual segment.
CorpusManifest make_null_corpus(const std::filesystem::path& source_dir,
                                const std::filesystem::path& output_dir, Rng& rng);

/// Mean label_norm of a corpus's instances.
double corpus_label_mean(const std::filesystem::path& corpus_dir);

enum class SamplingKind { regular, irregular };

std::string_view to_string(SamplingKind s);
SamplingKind sampling_kind_from_string(std::string_view name);

struct TestSuiteConfig {
  ModelId model = ModelId::may_fold;
  /// Empty selects the model's default sweep.
  std::optional<SweepDirection> direction;
  /// Empty selects the model's standard initial values.
  std::vector<double> initial_values;
  std::size_t n_series = 50;
  SamplingKind sampling = SamplingKind::regular;
  std::uint64_t seed = 0;
  std::size_t min_length = 250;
  std::size_t max_length = 500;
  /// Distance from the last sample to the tip relative to the observed span.
  double min_rel_distance = 0.01;
  double max_rel_distance = 2.0;
  /// Noise amplitude; test models use 0.01.
  double sigma = 0.01;
  unsigned jobs = 1;

  void validate() const;
};

struct TestSeries {
  std::size_t initial_index = 0;
  double initial_value = 0.0;
  std::size_t series_index = 0;
  std::vector<double> mu;
  std::vector<StateVector> x;
  double phi = 0.0;
};

struct TestSuite {
  TestSuiteConfig config;
  double mu_c = 0.0;
  std::vector<double> initial_values;
  int observed = 0;
  NoiseKind noise = NoiseKind::white;
  std::vector<TestSeries> series;

  std::vector<double> observed_series(std::size_t i) const;
};

TestSuite generate_test_suite(const TestSuiteConfig& cfg);

/// series.csv, instances.csv, ground_truth.json and manifest.json in dir.
void write_test_suite(const TestSuite& suite, const std::filesystem::path& dir);
TestSuite read_test_suite(const std::filesystem::path& dir);

/// Rate-delayed ground truth of a benchmark model, from the noise-free
/// labeled run started at the equilibrium of `initial_value`.
TippingLabel model_ground_truth(ModelId id, SweepDirection direction, double initial_value);

}  // namespace tipcast
