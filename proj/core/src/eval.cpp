#include "tipcast/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <sys/wait.h>

#include "parallel.hpp"
#include "tipcast/io.hpp"

namespace tipcast {

namespace fs = std::filesystem;

double relative_error(double mu_hat, double mu_c, double mu_end) {
  const double denom = std::abs(mu_end - mu_c);
  if (!(denom > 0.0)) throw ArgumentError("relative error undefined: mu_end equals mu_c");
  return std::abs(mu_hat - mu_c) / denom;
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::dl: return "dl";
    case Method::df: return "df";
    case Method::bb: return "bb";
    case Method::dev: return "dev";
    case Method::null: return "null";
  }
  return "null";
}

Method method_from_string(std::string_view name) {
  for (Method m : {Method::dl, Method::df, Method::bb, Method::dev, Method::null}) {
    if (to_string(m) == name) return m;
  }
  throw ArgumentError("unknown method '" + std::string(name) + "' (dl, df, bb, dev, null)");
}

std::vector<Method> parse_methods(std::string_view list) {
  std::vector<Method> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const auto end = std::min(list.find(',', start), list.size());
    const auto item = list.substr(start, end - start);
    if (item.empty()) throw ArgumentError("empty method name in list");
    const Method m = method_from_string(item);
    if (std::find(out.begin(), out.end(), m) != out.end()) {
      throw ArgumentError("method '" + std::string(item) + "' listed twice");
    }
    out.push_back(m);
    start = end + 1;
  }
  return out;
}

PredictionResult score(Method method, std::optional<double> mu_hat, double mu_c, double mu_end) {
  PredictionResult r;
  r.method = method;
  r.mu_c = mu_c;
  r.mu_end = mu_end;
  if (mu_hat && !std::isfinite(*mu_hat)) mu_hat.reset();
  r.mu_hat = mu_hat;
  r.epsilon = mu_hat ? relative_error(*mu_hat, mu_c, mu_end) : kEpsilonMax;
  return r;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw ArgumentError("percentile of an empty set");
  if (!(q >= 0.0 && q <= 1.0)) throw ArgumentError("percentile level must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Aggregate aggregate(std::span<const PredictionResult> results) {
  if (results.size() < 2) throw ArgumentError("aggregate needs at least 2 results");
  std::vector<double> eps;
  eps.reserve(results.size());
  Aggregate a;
  for (const auto& r : results) {
    eps.push_back(r.epsilon);
    if (r.failed()) ++a.n_fail;
  }
  // Sorted before summing so the mean does not depend on result order.
  std::sort(eps.begin(), eps.end());
  a.n = eps.size();
  a.mean = std::accumulate(eps.begin(), eps.end(), 0.0) / static_cast<double>(a.n);
  a.ci_lo = percentile(eps, 0.05);
  a.ci_hi = percentile(eps, 0.95);
  return a;
}

std::optional<double> predict_baseline(Method method, std::span<const double> mu_seq,
                                       const std::vector<std::vector<double>>& columns,
                                       int observed, const BaselineConfig& config) {
  if (method != Method::df && method != Method::bb && method != Method::dev) {
    throw ArgumentError("predict_baseline handles df, bb and dev only");
  }
  if (columns.empty()) throw ArgumentError("no state columns");
  if (observed < 0 || static_cast<std::size_t>(observed) >= columns.size()) {
    throw ArgumentError("observed component out of range");
  }
  try {
    const std::size_t n = mu_seq.size();
    std::vector<double> grid;
    std::vector<std::vector<double>> residuals;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (method != Method::df && c != static_cast<std::size_t>(observed)) continue;
      const RegularSeries reg = linear_interpolate_regular(mu_seq, columns[c], n);
      grid = reg.mu;
      residuals.push_back(lowess_detrend(reg.value, reg.mu, config.lowess_span));
    }
    const EwsMethod em = method == Method::df ? EwsMethod::df
                         : method == Method::bb ? EwsMethod::bb
                                                : EwsMethod::dev;
    const IndicatorSeries ind = indicator_series(residuals, grid, em, config.indicator);
    return extrapolate_tipping(ind);
  } catch (const std::runtime_error&) {
    return std::nullopt;
  } catch (const ArgumentError&) {
    return std::nullopt;
  }
}

std::vector<double> read_prediction_csv(const fs::path& path, std::size_t expected_count) {
  std::ifstream in(path);
  if (!in) throw ExternalToolError("prediction file " + path.string() + " was not written");
  std::string line;
  if (!std::getline(in, line)) throw DataError("prediction file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "index,label_norm_hat") {
    throw DataError("prediction file header must be index,label_norm_hat");
  }
  std::vector<double> out(expected_count, std::nan(""));
  std::vector<char> seen(expected_count, 0);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    const auto idx = f.size() == 2 ? parse_double(f[0]) : std::nullopt;
    const auto val = f.size() == 2 ? parse_double(f[1]) : std::nullopt;
    if (!idx || !val || *idx < 0 || *idx != std::floor(*idx)) {
      throw DataError("prediction file row " + std::to_string(row) + " is malformed");
    }
    const auto i = static_cast<std::size_t>(*idx);
    if (i >= expected_count || seen[i]) {
      throw DataError("prediction file row " + std::to_string(row) + " has a bad index");
    }
    seen[i] = 1;
    out[i] = *val;
  }
  if (std::count(seen.begin(), seen.end(), 1) != static_cast<std::ptrdiff_t>(expected_count)) {
    throw DataError("prediction file has fewer rows than instances");
  }
  return out;
}

void write_prediction_csv(const fs::path& path, std::span<const double> label_norm_hat) {
  std::ostringstream out;
  out << "index,label_norm_hat\n";
  for (std::size_t i = 0; i < label_norm_hat.size(); ++i) {
    out << i << ',' << format_double(label_norm_hat[i]) << '\n';
  }
  write_text_file_atomic(path, out.str());
}

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out.push_back(c);
    }
  }
  return out + "'";
}

}  // namespace

std::vector<double> run_dl_bridge(const DlBridge& bridge, const fs::path& instances,
                                  const fs::path& output, std::size_t expected_count) {
  if (bridge.command.empty()) throw ArgumentError("dl predictor command is not set");
  if (bridge.model.empty()) throw ArgumentError("dl predictor needs a model path");
  std::error_code ec;
  fs::remove(output, ec);
  // The command is a shell prefix so that interpreters can be named with it.
  const std::string cmd = bridge.command + " predict --model " + shell_quote(bridge.model) +
                          " --in " + shell_quote(instances.string()) + " --out " +
                          shell_quote(output.string());
  const int status = std::system(cmd.c_str());
  if (status == -1) throw ExternalToolError("cannot start the dl predictor");
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    throw ExternalToolError("dl predictor failed with status " + std::to_string(code) + ": " + cmd);
  }
  return read_prediction_csv(output, expected_count);
}

std::string suite_label(const TestSuite& suite) {
  std::string s(to_string(suite.config.model));
  const SweepDirection dir = suite.config.direction.value_or(model_profile(suite.config.model).direction);
  const auto other = dir == SweepDirection::increasing
                         ? SweepDirection::decreasing
                         : SweepDirection::increasing;
  if (has_direction(suite.config.model, other)) s += "_" + std::string(to_string(dir));
  return s;
}

Comparison compare_methods(const TestSuite& suite, const std::vector<Method>& methods,
                           const CompareConfig& config) {
  if (methods.empty()) throw ArgumentError("no methods to compare");
  const bool want_null = std::find(methods.begin(), methods.end(), Method::null) != methods.end();
  const bool want_dl = std::find(methods.begin(), methods.end(), Method::dl) != methods.end();
  if (want_null && !config.null_label_mean) {
    throw ArgumentError("null method needs the corpus label mean");
  }
  if (want_dl && !config.dl) throw ArgumentError("dl method needs a predictor command and model");

  const std::size_t n_series = suite.series.size();
  std::vector<double> dl_norm;
  if (want_dl) {
    const fs::path dir = config.work_dir.empty() ? fs::temp_directory_path() : config.work_dir;
    fs::create_directories(dir);
    std::vector<TrainingInstance> inst;
    inst.reserve(n_series);
    for (std::size_t k = 0; k < n_series; ++k) {
      inst.push_back(encode_test_instance(suite.series[k].mu, suite.observed_series(k), suite.mu_c,
                                          config.baseline.lowess_span));
    }
    write_instances_file(dir / "dl_instances.csv", inst);
    dl_norm = run_dl_bridge(*config.dl, dir / "dl_instances.csv", dir / "dl_predictions.csv",
                            n_series);
  }

  std::vector<std::vector<PredictionResult>> per_series(n_series);
  detail::parallel_for(n_series, config.jobs, [&](std::size_t k) {
    const TestSeries& s = suite.series[k];
    const double mu_first = s.mu.front();
    const double mu_end = s.mu.back();
    std::vector<std::vector<double>> columns(static_cast<std::size_t>(s.x.front().size()));
    for (const auto& x : s.x) {
      for (std::size_t c = 0; c < columns.size(); ++c) columns[c].push_back(x(static_cast<int>(c)));
    }
    for (Method m : methods) {
      std::optional<double> mu_hat;
      switch (m) {
        case Method::null:
          mu_hat = denormalize_label(*config.null_label_mean, mu_first, mu_end);
          break;
        case Method::dl:
          mu_hat = denormalize_label(dl_norm[k], mu_first, mu_end);
          break;
        default:
          mu_hat = predict_baseline(m, s.mu, columns, suite.observed, config.baseline);
      }
      per_series[k].push_back(score(m, mu_hat, suite.mu_c, mu_end));
    }
  });

  Comparison out;
  const std::string label = suite_label(suite);
  for (std::size_t i = 0; i < suite.initial_values.size(); ++i) {
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      std::vector<PredictionResult> cell;
      for (std::size_t k = 0; k < n_series; ++k) {
        if (suite.series[k].initial_index == i) cell.push_back(per_series[k][mi]);
      }
      ComparisonRow row;
      row.model = label;
      row.initial_value = suite.initial_values[i];
      row.method = methods[mi];
      if (cell.size() >= 2) {
        row.stats = aggregate(cell);
      } else {
        row.stats.n = cell.size();
        row.stats.n_fail = cell.size();
        row.stats.mean = row.stats.ci_lo = row.stats.ci_hi = cell.empty() ? kEpsilonMax : cell[0].epsilon;
      }
      out.rows.push_back(row);
    }
  }
  for (std::size_t k = 0; k < n_series; ++k) {
    for (const auto& r : per_series[k]) {
      out.predictions.push_back(
          {suite.series[k].initial_index, suite.series[k].initial_value, suite.series[k].series_index, r});
    }
  }
  return out;
}

void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows, bool header) {
  if (header) out << "model,initial_value,method,mean_eps,ci_lo,ci_hi,n_fail\n";
  for (const auto& r : rows) {
    out << r.model << ',' << format_double(r.initial_value) << ',' << to_string(r.method) << ','
        << format_double(r.stats.mean) << ',' << format_double(r.stats.ci_lo) << ','
        << format_double(r.stats.ci_hi) << ',' << r.stats.n_fail << '\n';
  }
}

void write_plotdata_csv(std::ostream& out, std::span<const ComparisonRow> rows) {
  std::vector<Method> methods;
  std::vector<double> ivs;
  for (const auto& r : rows) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    if (std::find(ivs.begin(), ivs.end(), r.initial_value) == ivs.end()) ivs.push_back(r.initial_value);
  }
  out << "initial_value";
  for (Method m : methods) {
    out << ',' << to_string(m) << "_mean," << to_string(m) << "_ci_lo," << to_string(m) << "_ci_hi";
  }
  out << '\n';
  for (double iv : ivs) {
    out << format_double(iv);
    for (Method m : methods) {
      const auto it = std::find_if(rows.begin(), rows.end(), [&](const ComparisonRow& r) {
        return r.initial_value == iv && r.method == m;
      });
      if (it == rows.end()) {
        out << ",,,";
      } else {
        out << ',' << format_double(it->stats.mean) << ',' << format_double(it->stats.ci_lo) << ','
            << format_double(it->stats.ci_hi);
      }
    }
    out << '\n';
  }
}

void write_predictions_csv(std::ostream& out, const std::string& model,
                           std::span<const SeriesPrediction> predictions, bool header) {
  if (header) out << "model,initial_value,series_index,method,mu_hat,mu_c,mu_end,epsilon,failed\n";
  for (const auto& p : predictions) {
    const auto& r = p.result;
    out << model << ',' << format_double(p.initial_value) << ',' << p.series_index << ','
        << to_string(r.method) << ',' << (r.mu_hat ? format_double(*r.mu_hat) : std::string()) << ','
        << format_double(r.mu_c) << ',' << format_double(r.mu_end) << ','
        << format_double(r.epsilon) << ',' << (r.failed() ? 1 : 0) << '\n';
  }
}

}  // namespace tipcast
