#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tipcast/models.hpp"
#include "tipcast/preprocess.hpp"
#include "tipcast/random.hpp"

namespace tipcast {

struct RecordMeta {
  std::string name;
  /// Direction in which the parameter drifts over the recorded history.
  SweepDirection direction = SweepDirection::increasing;
  std::string param_units;
  std::string state_units;
};

/// Rows are ordered along the ramp: param is monotone in meta.direction.
struct EmpiricalRecord {
  std::vector<double> param;
  std::vector<double> state;
  RecordMeta meta;
};

struct RecordSchema {
  std::string param_column = "param";
  std::string state_column = "state";
  SweepDirection direction = SweepDirection::increasing;
  /// Sort rows by param instead of rejecting a non-monotone column.
  bool sort = false;
  std::size_t min_rows = 500;
  std::string name;
  std::string param_units;
  std::string state_units;
};

EmpiricalRecord parse_record(std::istream& in, const RecordSchema& schema);
EmpiricalRecord load_record(const std::filesystem::path& path, const RecordSchema& schema);

/// Two-column CSV with the schema's column names, rows in ramp order.
void export_record(std::ostream& out, const EmpiricalRecord& record,
                   const std::string& param_column = "param",
                   const std::string& state_column = "state");

struct EmpiricalWindow {
  RawSample sample;
  /// Zero-padded to the 500-slot layout; label_norm is NaN.
  TrainingInstance instance;
};

/// Sorted-uniform draw of n rows with param inside [param_lo, param_hi]
/// (all of them when fewer are available), encoded as a test instance.
EmpiricalWindow window_record(const EmpiricalRecord& record, double param_lo, double param_hi,
                              Rng& rng, std::size_t n = 400);

}  // namespace tipcast
