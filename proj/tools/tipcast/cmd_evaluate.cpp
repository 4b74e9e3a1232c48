#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "cli_common.hpp"
#include "tipcast/eval.hpp"
#include "tipcast/io.hpp"

namespace tipcast::cli {

namespace {

struct EvaluateArgs {
  std::vector<std::string> models = {"may_fold"};
  std::string direction;
  std::size_t n_series = 50;
  std::string sampling = "regular";
  std::uint64_t seed = 0;
  std::string methods = "df,bb,dev,null";
  std::vector<double> initial_values;
  std::string corpus;
  std::optional<double> label_mean;
  std::string dl_cmd;
  std::string dl_model;
  std::string out;
  unsigned jobs = 1;
  int E = 3;
  int tau = 1;
  double theta = 0.0;
  double window_frac = 0.5;
  std::string bb_branch = "automatic";
};

}  // namespace

Runner add_evaluate(CLI::App& root) {
  auto* app = root.add_subcommand("evaluate", "Generate test suites and compare predictors");
  auto a = std::make_shared<EvaluateArgs>();
  std::vector<std::string> names;
  for (ModelId id : all_model_ids()) names.emplace_back(to_string(id));
  option(*app, "model", a->models, "Benchmark model ids (comma separated)")
      ->delimiter(',')
      ->check(CLI::IsMember(names))
      ->capture_default_str();
  option(*app, "direction", a->direction, "Sweep direction of hysteresis models")
      ->check(CLI::IsMember({"up", "down"}));
  option(*app, "n-series", a->n_series, "Series per initial value")
      ->check(CLI::Range(2, 100000))
      ->capture_default_str();
  option(*app, "sampling", a->sampling, "regular or irregular")
      ->check(CLI::IsMember({"regular", "irregular"}))
      ->capture_default_str();
  option(*app, "seed", a->seed, "Seed")->capture_default_str();
  option(*app, "methods", a->methods, "Comma-separated subset of dl,df,bb,dev,null")->capture_default_str();
  option(*app, "initial-values", a->initial_values, "Override the standard initial values")->delimiter(',');
  option(*app, "corpus", a->corpus, "Corpus whose label mean drives the null method")->check(CLI::ExistingDirectory);
  option(*app, "label-mean", a->label_mean, "Normalized label returned by the null method");
  option(*app, "dl-cmd", a->dl_cmd, "Command of the dl predictor");
  option(*app, "dl-model", a->dl_model, "Model artifacts of the dl predictor");
  option(*app, "out", a->out, "Output directory")->required();
  option(*app, "jobs", a->jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  option(*app, "E", a->E, "DEV embedding dimension")->check(CLI::Range(1, 10))->capture_default_str();
  option(*app, "tau", a->tau, "DEV delay")->check(CLI::PositiveNumber)->capture_default_str();
  option(*app, "theta", a->theta, "DEV S-map nonlinearity")->check(CLI::NonNegativeNumber)->capture_default_str();
  option(*app, "window-frac", a->window_frac, "Rolling window fraction")
      ->check(CLI::Range(0.05, 1.0))
      ->capture_default_str();
  option(*app, "bb-branch", a->bb_branch, "BB root choice")
      ->check(CLI::IsMember({"automatic", "phi_dominant", "rho_dominant"}))
      ->capture_default_str();

  return [app, a]() -> int {
    std::vector<Method> methods;
    try {
      methods = parse_methods(a->methods);
    } catch (const ArgumentError& e) {
      throw UsageError(e.what());
    }
    const bool want_dl = std::find(methods.begin(), methods.end(), Method::dl) != methods.end();
    const bool want_null = std::find(methods.begin(), methods.end(), Method::null) != methods.end();
    if (want_dl && (a->dl_cmd.empty() || a->dl_model.empty())) {
      throw UsageError("method dl needs --dl-cmd and --dl-model");
    }
    if (want_null && !a->label_mean && a->corpus.empty()) {
      throw UsageError("method null needs --corpus or --label-mean");
    }
    const std::filesystem::path out(a->out);
    write_config_echo(*app, out);

    CompareConfig cc;
    cc.baseline.indicator.window_frac = a->window_frac;
    cc.baseline.indicator.smap = {a->E, a->tau, a->theta};
    cc.baseline.indicator.bb_branch = bb_branch_from_string(a->bb_branch);
    cc.jobs = a->jobs;
    if (want_null) cc.null_label_mean = a->label_mean ? *a->label_mean : corpus_label_mean(a->corpus);
    if (want_dl) cc.dl = DlBridge{a->dl_cmd, a->dl_model};

    std::ostringstream comparison;
    std::ostringstream predictions;
    bool first = true;
    for (const auto& name : a->models) {
      TestSuiteConfig tc;
      tc.model = model_id_from_string(name);
      if (!a->direction.empty()) tc.direction = sweep_direction_from_string(a->direction);
      tc.initial_values = a->initial_values;
      tc.n_series = a->n_series;
      tc.sampling = sampling_kind_from_string(a->sampling);
      tc.seed = a->seed;
      tc.jobs = a->jobs;
      const TestSuite suite = generate_test_suite(tc);
      const std::string label = suite_label(suite);
      write_test_suite(suite, out / ("suite_" + label));
      cc.work_dir = out / ("suite_" + label);
      const Comparison cmp = compare_methods(suite, methods, cc);
      write_comparison_csv(comparison, cmp.rows, first);
      write_predictions_csv(predictions, label, cmp.predictions, first);
      std::ostringstream plot;
      write_plotdata_csv(plot, cmp.rows);
      write_text_file_atomic(out / ("plotdata_" + label + ".csv"), plot.str());
      first = false;
      for (const auto& r : cmp.rows) {
        std::cerr << label << " " << format_double(r.initial_value) << " " << to_string(r.method)
                  << " mean_eps " << format_double(r.stats.mean) << " n_fail " << r.stats.n_fail << "\n";
      }
    }
    write_text_file_atomic(out / "comparison.csv", comparison.str());
    write_text_file_atomic(out / "predictions.csv", predictions.str());
    std::cout << "comparison " << (out / "comparison.csv").string() << " hash "
              << git_blob_sha1_file(out / "comparison.csv") << "\n";
    return 0;
  };
}

}  // namespace tipcast::cli
