#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include "cli_common.hpp"
#include "tipcast/empirical.hpp"
#include "tipcast/eval.hpp"
#include "tipcast/io.hpp"

namespace tipcast::cli {

namespace {

struct PredictArgs {
  std::string method;
  std::string in;
  std::optional<double> truth;
  std::optional<double> mu_end;
  int observed = 0;
  // Empirical record input.
  std::string param_col;
  std::string state_col = "state";
  std::string direction = "up";
  bool sort = false;
  std::optional<double> window_lo;
  std::optional<double> window_hi;
  std::size_t n = 400;
  std::uint64_t seed = 0;
  // Baselines.
  int E = 3;
  int tau = 1;
  double theta = 0.0;
  double window_frac = 0.5;
  std::string bb_branch = "automatic";
  double lowess_span = 0.2;
  // Null and dl.
  std::optional<double> label_mean;
  std::string corpus;
  std::string dl_cmd;
  std::string dl_model;
  std::string out;
};

struct Series {
  std::vector<double> mu;
  std::vector<std::vector<double>> columns;
};

// First column is the parameter, the rest are state components.
Series read_series_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty series file");
  const auto header = split_csv_line(line);
  if (header.size() < 2) throw DataError("series file needs a parameter and a state column");
  Series s;
  s.columns.resize(header.size() - 1);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) throw IngestError("wrong field count", row, "");
    for (std::size_t c = 0; c < f.size(); ++c) {
      const auto v = parse_double(f[c]);
      if (!v || !std::isfinite(*v)) throw IngestError("non-numeric cell '" + f[c] + "'", row, header[c]);
      if (c == 0) {
        s.mu.push_back(*v);
      } else {
        s.columns[c - 1].push_back(*v);
      }
    }
  }
  if (s.mu.size() < 3) throw DataError("series needs at least 3 rows");
  return s;
}

}  // namespace

Runner add_predict(CLI::App& root) {
  auto* app = root.add_subcommand("predict", "Predict the tipping point of one series");
  auto a = std::make_shared<PredictArgs>();
  option(*app, "method", a->method, "dl, df, bb, dev or null")
      ->required()
      ->check(CLI::IsMember({"dl", "df", "bb", "dev", "null"}));
  option(*app, "in", a->in, "Series CSV (parameter column, then state columns)")
      ->required()
      ->check(CLI::ExistingFile);
  option(*app, "truth", a->truth, "True tipping point, to report the relative error");
  option(*app, "mu-end", a->mu_end, "Parameter at the last point (default: last row)");
  option(*app, "observed", a->observed, "Observed state column for bb, dev and dl")->capture_default_str();
  option(*app, "param-col", a->param_col, "Read an empirical record with this parameter column");
  option(*app, "state-col", a->state_col, "State column of an empirical record")->capture_default_str();
  option(*app, "direction", a->direction, "Ramp direction of an empirical record")
      ->check(CLI::IsMember({"up", "down"}))
      ->capture_default_str();
  flag(*app, "sort", a->sort, "Sort an empirical record by its parameter");
  option(*app, "window-lo", a->window_lo, "Lower parameter bound of the empirical window");
  option(*app, "window-hi", a->window_hi, "Upper parameter bound of the empirical window");
  option(*app, "n", a->n, "Points drawn from the empirical window")->capture_default_str();
  option(*app, "seed", a->seed, "Seed for window sampling")->capture_default_str();
  option(*app, "E", a->E, "DEV embedding dimension")->check(CLI::Range(1, 10))->capture_default_str();
  option(*app, "tau", a->tau, "DEV delay")->check(CLI::PositiveNumber)->capture_default_str();
  option(*app, "theta", a->theta, "DEV S-map nonlinearity")->check(CLI::NonNegativeNumber)->capture_default_str();
  option(*app, "window-frac", a->window_frac, "Rolling window fraction")
      ->check(CLI::Range(0.05, 1.0))
      ->capture_default_str();
  option(*app, "bb-branch", a->bb_branch, "BB root choice")
      ->check(CLI::IsMember({"automatic", "phi_dominant", "rho_dominant"}))
      ->capture_default_str();
  option(*app, "lowess-span", a->lowess_span, "Lowess span")->check(CLI::Range(0.01, 1.0))->capture_default_str();
  option(*app, "label-mean", a->label_mean, "Normalized label returned by the null method");
  option(*app, "corpus", a->corpus, "Corpus whose label mean drives the null method")->check(CLI::ExistingDirectory);
  option(*app, "dl-cmd", a->dl_cmd, "Command of the dl predictor");
  option(*app, "dl-model", a->dl_model, "Model artifacts of the dl predictor");
  option(*app, "out", a->out, "Directory for the config echo and bridge files");

  return [app, a]() -> int {
    const Method method = method_from_string(a->method);
    if (method == Method::dl && (a->dl_cmd.empty() || a->dl_model.empty())) {
      throw UsageError("--method dl needs --dl-cmd and --dl-model");
    }
    if (method == Method::null && !a->label_mean && a->corpus.empty()) {
      throw UsageError("--method null needs --label-mean or --corpus");
    }
    if (a->window_lo.has_value() != a->window_hi.has_value()) {
      throw UsageError("--window-lo and --window-hi go together");
    }
    const std::filesystem::path out =
        a->out.empty() ? std::filesystem::temp_directory_path() / "tipcast_predict" : std::filesystem::path(a->out);
    write_config_echo(*app, out);

    Series s;
    std::string units;
    if (!a->param_col.empty()) {
      RecordSchema schema;
      schema.param_column = a->param_col;
      schema.state_column = a->state_col;
      schema.direction = sweep_direction_from_string(a->direction);
      schema.sort = a->sort;
      const EmpiricalRecord rec = load_record(a->in, schema);
      if (a->window_lo) {
        Rng rng = make_rng(a->seed, {0});
        const EmpiricalWindow w = window_record(rec, *a->window_lo, *a->window_hi, rng, a->n);
        s.mu = w.sample.mu_seq;
        s.columns = {w.sample.state_seq};
      } else {
        s.mu = rec.param;
        s.columns = {rec.state};
      }
    } else {
      s = read_series_csv(a->in);
    }
    if (a->observed < 0 || static_cast<std::size_t>(a->observed) >= s.columns.size()) {
      throw UsageError("--observed is out of range");
    }

    std::optional<double> mu_hat;
    const double mu_first = s.mu.front();
    const double mu_last = s.mu.back();
    if (method == Method::null) {
      const double mean = a->label_mean ? *a->label_mean : corpus_label_mean(a->corpus);
      mu_hat = denormalize_label(mean, mu_first, mu_last);
    } else if (method == Method::dl) {
      const auto& state = s.columns[static_cast<std::size_t>(a->observed)];
      const TrainingInstance inst =
          encode_test_instance(s.mu, state, std::nan(""), a->lowess_span);
      write_instances_file(out / "dl_instances.csv", {inst});
      const auto norm = run_dl_bridge({a->dl_cmd, a->dl_model}, out / "dl_instances.csv",
                                      out / "dl_predictions.csv", 1);
      mu_hat = denormalize_label(norm.front(), mu_first, mu_last);
    } else {
      BaselineConfig bc;
      bc.lowess_span = a->lowess_span;
      bc.indicator.window_frac = a->window_frac;
      bc.indicator.smap = {a->E, a->tau, a->theta};
      bc.indicator.bb_branch = bb_branch_from_string(a->bb_branch);
      mu_hat = predict_baseline(method, s.mu, s.columns, a->observed, bc);
    }

    if (mu_hat) {
      std::cout << "mu_hat " << format_double(*mu_hat) << "\n";
    } else {
      std::cout << "mu_hat failed\n";
    }
    if (a->truth) {
      const double mu_end = a->mu_end.value_or(mu_last);
      const PredictionResult r = score(method, mu_hat, *a->truth, mu_end);
      std::cout << "epsilon " << format_double(r.epsilon) << (r.failed() ? " (failure, clipped)" : "") << "\n";
    }
    return 0;
  };
}

}  // namespace tipcast::cli
