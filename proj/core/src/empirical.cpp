#include "tipcast/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "tipcast/errors.hpp"
#include "tipcast/io.hpp"

namespace tipcast {

namespace {

std::size_t column_of(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw IngestError("missing column '" + name + "'", 1, name);
  return static_cast<std::size_t>(it - header.begin());
}

// +1 weakly increasing, -1 weakly decreasing, 0 neither or constant.
int monotone_sign(const std::vector<double>& v) {
  bool up = true;
  bool down = true;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] < v[i - 1]) up = false;
    if (v[i] > v[i - 1]) down = false;
  }
  if (up && down) return 0;
  return up ? 1 : (down ? -1 : 0);
}

}  // namespace

EmpiricalRecord parse_record(std::istream& in, const RecordSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw IngestError("empty record", 0, "");
  auto header = split_csv_line(line);
  for (auto& h : header) {
    while (!h.empty() && (h.back() == '\r' || h.back() == ' ')) h.pop_back();
  }
  const std::size_t pc = column_of(header, schema.param_column);
  const std::size_t sc = column_of(header, schema.state_column);

  EmpiricalRecord rec;
  rec.meta = {schema.name, schema.direction, schema.param_units, schema.state_units};
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) {
      throw IngestError("expected " + std::to_string(header.size()) + " fields", row, "");
    }
    const auto p = parse_double(f[pc]);
    if (!p || !std::isfinite(*p)) {
      throw IngestError("non-numeric cell '" + f[pc] + "'", row, schema.param_column);
    }
    const auto s = parse_double(f[sc]);
    if (!s || !std::isfinite(*s)) {
      throw IngestError("non-numeric cell '" + f[sc] + "'", row, schema.state_column);
    }
    rec.param.push_back(*p);
    rec.state.push_back(*s);
  }
  if (rec.param.size() < schema.min_rows) {
    throw IngestError("record has " + std::to_string(rec.param.size()) + " rows, need " +
                          std::to_string(schema.min_rows),
                      row, "");
  }

  const int want = schema.direction == SweepDirection::increasing ? 1 : -1;
  int sign = monotone_sign(rec.param);
  if (sign == -want) {
    std::reverse(rec.param.begin(), rec.param.end());
    std::reverse(rec.state.begin(), rec.state.end());
    sign = want;
  }
  if (sign != want) {
    if (!schema.sort) {
      throw IngestError("parameter column is not monotone", 0, schema.param_column);
    }
    std::vector<std::size_t> order(rec.param.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return want > 0 ? rec.param[a] < rec.param[b] : rec.param[a] > rec.param[b];
    });
    EmpiricalRecord sorted;
    sorted.meta = rec.meta;
    for (auto i : order) {
      sorted.param.push_back(rec.param[i]);
      sorted.state.push_back(rec.state[i]);
    }
    if (monotone_sign(sorted.param) != want) {
      throw IngestError("parameter column is constant", 0, schema.param_column);
    }
    rec = std::move(sorted);
  }
  return rec;
}

EmpiricalRecord load_record(const std::filesystem::path& path, const RecordSchema& schema) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open record " + path.string());
  RecordSchema s = schema;
  if (s.name.empty()) s.name = path.stem().string();
  return parse_record(in, s);
}

void export_record(std::ostream& out, const EmpiricalRecord& record,
                   const std::string& param_column, const std::string& state_column) {
  out << param_column << ',' << state_column << '\n';
  for (std::size_t i = 0; i < record.param.size(); ++i) {
    out << format_double(record.param[i]) << ',' << format_double(record.state[i]) << '\n';
  }
}

EmpiricalWindow window_record(const EmpiricalRecord& record, double param_lo, double param_hi,
                              Rng& rng, std::size_t n) {
  if (!(param_lo < param_hi)) throw ArgumentError("window needs param_lo < param_hi");
  if (record.param.empty()) throw DataError("empty record");
  const auto [mn, mx] = std::minmax_element(record.param.begin(), record.param.end());
  if (param_lo < *mn || param_hi > *mx) {
    throw ArgumentError("window [" + format_double(param_lo) + ", " + format_double(param_hi) +
                        "] lies outside the record range [" + format_double(*mn) + ", " +
                        format_double(*mx) + "]");
  }
  if (n < 3 || n > kInstanceLength) throw ArgumentError("window size must be in [3, 500]");
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < record.param.size(); ++i) {
    if (record.param[i] >= param_lo && record.param[i] <= param_hi) rows.push_back(i);
  }
  if (rows.size() < 3) throw DataError("window holds fewer than 3 rows");
  std::vector<std::size_t> picked;
  std::sample(rows.begin(), rows.end(), std::back_inserter(picked), std::min(n, rows.size()), rng);

  EmpiricalWindow w;
  w.sample.mu_c_true = std::numeric_limits<double>::quiet_NaN();
  w.sample.draw_count = picked.size();
  for (auto i : picked) {
    w.sample.mu_seq.push_back(record.param[i]);
    w.sample.state_seq.push_back(record.state[i]);
    w.sample.grid_index.push_back(i);
  }
  w.instance = encode_test_instance(w.sample.mu_seq, w.sample.state_seq,
                                    std::numeric_limits<double>::quiet_NaN());
  return w;
}

}  // namespace tipcast
