#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace rfgap {

enum class ColumnKind { numeric, categorical };
enum class ColumnRole { feature, target, ignore };
enum class Task { classification, regression };

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  ColumnRole role = ColumnRole::feature;
};

// One feature column, columnar.  Numeric columns fill `values`; categorical
// columns fill `codes` (dense in [0, labels.size()), assigned by first
// appearance in file order) plus the code->label table.
struct FeatureColumn {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  std::vector<double> values;
  std::vector<int32_t> codes;
  std::vector<std::string> labels;
  std::vector<uint8_t> missing;             // 1 = missing now
  std::vector<uint8_t> originally_missing;  // provenance kept by initialize_impute

  size_t n_categories() const { return labels.size(); }
  bool is_missing(size_t row) const { return !missing.empty() && missing[row] != 0; }
  bool was_missing(size_t row) const {
    return !originally_missing.empty() && originally_missing[row] != 0;
  }
};

// Categorical columns are limited to what a split bitmask can hold.
inline constexpr size_t kMaxCategories = 64;

struct Dataset {
  std::vector<ColumnSchema> file_schema;  // source columns in file order
  std::vector<FeatureColumn> features;
  Task task = Task::classification;
  std::string target_name;
  std::vector<int32_t> y_class;  // classification: codes into class_labels
  std::vector<std::string> class_labels;
  std::vector<double> y_real;  // regression targets
  size_t n_rows = 0;

  size_t n_features() const { return features.size(); }
  size_t n_classes() const { return class_labels.size(); }
  bool has_missing() const;
  size_t missing_cell_count() const;

  // Row-slice that keeps the full schema, category coding and class-label
  // tables (so predictions on the slice stay comparable).
  Dataset subset(const std::vector<int32_t>& rows) const;

  // Stable hash of task, target and per-feature name/kind/category tables;
  // guards forest deserialization and cross-file prediction.
  uint64_t schema_fingerprint() const;
};

// One masked cell with its held-back original value (numeric or code).
struct MissingCell {
  int32_t row = 0;
  int32_t col = 0;  // feature index
  double value = 0.0;
  int32_t code = -1;
};

struct MissingnessRecord {
  std::vector<MissingCell> cells;  // sorted by (row, col), no duplicates
};

struct ColumnScale {
  double min = 0.0;
  double max = 1.0;
};

struct UnitScaling {
  std::vector<ColumnScale> columns;  // parallel to Dataset::features
};

// ---- CSV / schema ingestion ------------------------------------------------
// RFC-4180 CSV with a mandatory header row.  Missing tokens: "" and "NA".
// Inferred schema: a column is numeric iff every non-missing cell parses as a
// finite real; the last column is the target.  Rows with a missing target are
// a DataError, as are ragged rows and empty tables.
Dataset load_csv(const std::string& path);
Dataset load_csv(const std::string& path, const std::vector<ColumnSchema>& schema);

// Schema override file: one `name,kind,role` line per column, in file order.
std::vector<ColumnSchema> load_schema_file(const std::string& path);

// ---- transforms -------------------------------------------------------------
// Masks exactly round(fraction * n_rows * n_feature_columns) feature cells,
// chosen uniformly without replacement under `seed`.  The target is never
// masked.  Requires a dataset with no pre-existing missing feature cells.
std::pair<Dataset, MissingnessRecord> remove_mcar(const Dataset& ds, double fraction,
                                                  uint64_t seed);

// Median/mode fill: per-class donors for classification (global fallback when
// a class has no observed value in a column), global donors for regression.
// Clears the missing mask and stores it as `originally_missing` provenance.
Dataset initialize_impute(const Dataset& ds);

// Maps every numeric feature column onto [0,1] (constant columns onto 0).
std::pair<Dataset, UnitScaling> scale_unit(const Dataset& ds);
Dataset unscale(const Dataset& ds, const UnitScaling& scaling);

// ---- splitting ---------------------------------------------------------------
struct Split {
  Dataset train;
  Dataset test;
  std::vector<int32_t> train_rows;
  std::vector<int32_t> test_rows;
};

// Seeded stratified split for classification (every class keeps at least one
// training row); plain seeded split for regression.
Split stratified_split(const Dataset& ds, double train_fraction, uint64_t seed);

// Mode with the pinned tie rule (smallest code wins).
int32_t mode_code(const std::vector<int32_t>& codes, size_t n_categories);

}  // namespace rfgap
