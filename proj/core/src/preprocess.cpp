#include "tipcast/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "tipcast/io.hpp"

namespace tipcast {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_monotone(std::span<const double> positions) {
  if (positions.size() < 2) throw ArgumentError("need at least 2 positions");
  bool inc = true;
  bool dec = true;
  for (std::size_t i = 1; i < positions.size(); ++i) {
    if (!std::isfinite(positions[i]) || !std::isfinite(positions[i - 1])) {
      throw ArgumentError("positions must be finite");
    }
    if (positions[i] < positions[i - 1]) inc = false;
    if (positions[i] > positions[i - 1]) dec = false;
  }
  if (inc && dec) throw ArgumentError("positions are constant");
  if (!inc && !dec) throw ArgumentError("positions must be monotone");
}

}  // namespace

RawSample irregular_sample(const Trajectory& trajectory, double window_start, double mu_c,
                           Rng& rng, const SamplingOptions& options) {
  if (options.min_draw < options.keep || options.max_draw < options.min_draw) {
    throw ArgumentError("irregular_sample: need keep <= min_draw <= max_draw");
  }
  if (mu_c == window_start) throw ArgumentError("irregular_sample: empty window");
  const bool up = mu_c > window_start;
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const double m = trajectory.mu[i];
    const bool inside = up ? (m >= window_start && m < mu_c) : (m <= window_start && m > mu_c);
    if (inside) candidates.push_back(i);
  }
  if (candidates.size() < options.keep) {
    throw DataError("window holds " + std::to_string(candidates.size()) +
                    " points, fewer than the " + std::to_string(options.keep) + " required");
  }
  std::size_t draws = uniform_integer(rng, options.min_draw, options.max_draw);
  draws = std::min(draws, candidates.size());
  std::vector<std::size_t> picked;
  picked.reserve(draws);
  std::sample(candidates.begin(), candidates.end(), std::back_inserter(picked), draws, rng);

  RawSample out;
  out.mu_c_true = mu_c;
  out.draw_count = draws;
  for (std::size_t j = 0; j < options.keep; ++j) {
    const std::size_t i = picked[j];
    out.grid_index.push_back(i);
    out.mu_seq.push_back(trajectory.mu[i]);
    out.state_seq.push_back(trajectory.x[i](options.component));
  }
  return out;
}

std::vector<double> lowess_fit(std::span<const double> series, std::span<const double> positions,
                               double span) {
  if (series.size() != positions.size()) throw ArgumentError("lowess: length mismatch");
  if (!(span > 0.0 && span <= 1.0)) throw ArgumentError("lowess: span must be in (0, 1]");
  require_monotone(positions);
  const std::size_t n = series.size();
  const std::size_t k =
      std::clamp<std::size_t>(static_cast<std::size_t>(span * static_cast<double>(n) + 1e-10), 2, n);
  std::vector<double> fit(n);
  std::vector<double> w(k);
  std::size_t lo = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = positions[i];
    while (lo + k < n && std::abs(positions[lo + k] - xi) < std::abs(xi - positions[lo])) ++lo;
    const double h = std::max(std::abs(xi - positions[lo]), std::abs(positions[lo + k - 1] - xi));
    double sw = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double d = h > 0.0 ? std::abs(positions[lo + j] - xi) / h : 0.0;
      const double t = d < 1.0 ? 1.0 - d * d * d : 0.0;
      w[j] = t * t * t;
      sw += w[j];
    }
    // Centered at (x_i, y_i) so that constant input is reproduced exactly.
    const double yi = series[i];
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      mx += w[j] * (positions[lo + j] - xi);
      my += w[j] * (series[lo + j] - yi);
    }
    mx /= sw;
    my /= sw;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double dx = positions[lo + j] - xi - mx;
      sxx += w[j] * dx * dx;
      sxy += w[j] * dx * (series[lo + j] - yi - my);
    }
    const double slope = sxx > 1e-12 * h * h * sw ? sxy / sxx : 0.0;
    fit[i] = yi + my - slope * mx;
  }
  return fit;
}

std::vector<double> lowess_detrend(std::span<const double> series,
                                   std::span<const double> positions, double span) {
  auto fit = lowess_fit(series, positions, span);
  for (std::size_t i = 0; i < fit.size(); ++i) fit[i] = series[i] - fit[i];
  return fit;
}

TrainingInstance zero_and_normalize_with_prefix(std::span<const double> residual,
                                                std::span<const double> mu_seq, double mu_c,
                                                std::size_t prefix) {
  const std::size_t n = residual.size();
  if (mu_seq.size() != n) throw ArgumentError("normalize: residual and mu lengths differ");
  if (n < 2 || prefix + 2 > n) throw ArgumentError("normalize: prefix leaves fewer than 2 points");
  const double mu_first = mu_seq[prefix];
  const double mu_last = mu_seq[n - 1];
  if (mu_last == mu_first) throw DataError("degenerate ramp: mu_last equals mu_first");
  double mean_abs = 0.0;
  for (std::size_t i = prefix; i < n; ++i) mean_abs += std::abs(residual[i]);
  mean_abs /= static_cast<double>(n - prefix);
  if (!(mean_abs > 0.0) || !std::isfinite(mean_abs)) {
    throw DataError("residual has zero or non-finite mean absolute value");
  }
  TrainingInstance out;
  out.prefix = prefix;
  out.mu_first = mu_first;
  out.mu_last = mu_last;
  out.residual.assign(n, 0.0);
  out.mu_norm.assign(n, 0.0);
  const double range = mu_last - mu_first;
  for (std::size_t i = prefix; i < n; ++i) {
    out.residual[i] = residual[i] / mean_abs;
    out.mu_norm[i] = (mu_seq[i] - mu_first) / range;
  }
  out.label_norm = (mu_c - mu_first) / range;
  return out;
}

TrainingInstance zero_and_normalize(std::span<const double> residual,
                                    std::span<const double> mu_seq, double mu_c, Rng& rng,
                                    std::size_t max_prefix) {
  const std::size_t prefix = uniform_integer(rng, 0, max_prefix);
  return zero_and_normalize_with_prefix(residual, mu_seq, mu_c, prefix);
}

double denormalize_label(double label_norm, double mu_first, double mu_last) {
  return mu_first + label_norm * (mu_last - mu_first);
}

double denormalize_label(const TrainingInstance& instance) {
  return denormalize_label(instance.label_norm, instance.mu_first, instance.mu_last);
}

RegularSeries linear_interpolate_regular(std::span<const double> mu_seq,
                                         std::span<const double> state_seq, std::size_t n_out) {
  if (mu_seq.size() != state_seq.size()) throw ArgumentError("interpolate: length mismatch");
  if (n_out < 2) throw ArgumentError("interpolate: n_out must be >= 2");
  require_monotone(mu_seq);
  const std::size_t n = mu_seq.size();
  const bool up = mu_seq.back() > mu_seq.front();
  RegularSeries out;
  out.mu.resize(n_out);
  out.value.resize(n_out);
  const double a = mu_seq.front();
  const double b = mu_seq.back();
  std::size_t seg = 0;
  for (std::size_t i = 0; i < n_out; ++i) {
    double m = i + 1 == n_out ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n_out - 1);
    out.mu[i] = m;
    const auto before = [&](double lhs, double rhs) { return up ? lhs < rhs : lhs > rhs; };
    while (seg + 2 < n && !before(m, mu_seq[seg + 1])) ++seg;
    const double m0 = mu_seq[seg];
    const double m1 = mu_seq[seg + 1];
    if (m == m0 || m1 == m0) {
      out.value[i] = state_seq[seg];
    } else if (m == m1) {
      out.value[i] = state_seq[seg + 1];
    } else {
      const double t = (m - m0) / (m1 - m0);
      out.value[i] = state_seq[seg] + t * (state_seq[seg + 1] - state_seq[seg]);
    }
  }
  return out;
}

TrainingInstance encode_test_instance(std::span<const double> mu_seq,
                                      std::span<const double> state_seq, double mu_c,
                                      double lowess_span) {
  const std::size_t len = mu_seq.size();
  if (state_seq.size() != len) throw ArgumentError("encode: length mismatch");
  if (len > kInstanceLength) throw ArgumentError("encode: series longer than 500 points");
  if (len < 3) throw ArgumentError("encode: series needs at least 3 points");
  const auto residual = lowess_detrend(state_seq, mu_seq, lowess_span);
  const std::size_t prefix = kInstanceLength - len;
  std::vector<double> r(kInstanceLength, 0.0);
  std::vector<double> m(kInstanceLength, 0.0);
  std::copy(residual.begin(), residual.end(), r.begin() + static_cast<std::ptrdiff_t>(prefix));
  std::copy(mu_seq.begin(), mu_seq.end(), m.begin() + static_cast<std::ptrdiff_t>(prefix));
  return zero_and_normalize_with_prefix(r, m, mu_c, prefix);
}

void write_instance_row(std::ostream& out, const TrainingInstance& instance) {
  if (instance.residual.size() != kInstanceLength || instance.mu_norm.size() != kInstanceLength) {
    throw ArgumentError("instance rows must hold 500 + 500 values");
  }
  std::string line;
  line.reserve(1001 * 24);
  for (double v : instance.residual) {
    line += format_double(v);
    line.push_back(',');
  }
  for (double v : instance.mu_norm) {
    line += format_double(v);
    line.push_back(',');
  }
  line += format_double(instance.label_norm);
  line.push_back('\n');
  out << line;
}

std::vector<TrainingInstance> read_instances(std::istream& in) {
  std::vector<TrainingInstance> out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 2 * kInstanceLength + 1) {
      throw DataError("instance row " + std::to_string(row) + " has " +
                      std::to_string(fields.size()) + " fields, expected 1001");
    }
    TrainingInstance inst;
    inst.residual.resize(kInstanceLength);
    inst.mu_norm.resize(kInstanceLength);
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const auto v = parse_double(fields[i]);
      if (!v) throw DataError("instance row " + std::to_string(row) + " field " +
                              std::to_string(i) + " is not a number");
      if (i < kInstanceLength) {
        inst.residual[i] = *v;
      } else if (i < 2 * kInstanceLength) {
        inst.mu_norm[i - kInstanceLength] = *v;
      } else {
        inst.label_norm = *v;
      }
    }
    std::size_t first_nonzero = 0;
    while (first_nonzero < kInstanceLength && inst.mu_norm[first_nonzero] == 0.0) ++first_nonzero;
    inst.prefix = first_nonzero == 0 ? 0 : first_nonzero - 1;
    inst.mu_first = kNaN;
    inst.mu_last = kNaN;
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<TrainingInstance> read_instances_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_instances(in);
}

void write_instances_file(const std::filesystem::path& path,
                          const std::vector<TrainingInstance>& instances) {
  std::ostringstream ss;
  for (const auto& inst : instances) write_instance_row(ss, inst);
  write_text_file_atomic(path, ss.str());
}

std::string sidecar_to_json(const InstanceSidecar& sidecar) {
  nlohmann::json j;
  j["count"] = sidecar.count;
  j["bif_type_counts"] = sidecar.bif_type_counts;
  j["noise_kind"] = sidecar.noise_kind;
  j["seed"] = sidecar.seed;
  return j.dump(2);
}

InstanceSidecar sidecar_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    InstanceSidecar s;
    s.count = j.at("count").get<std::size_t>();
    s.bif_type_counts = j.at("bif_type_counts").get<std::map<std::string, std::size_t>>();
    s.noise_kind = j.at("noise_kind").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid instance sidecar: ") + e.what());
  }
}

}  // namespace tipcast
