#include "rfgap/dataset.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "rfgap/common.hpp"
#include "rfgap/numeric.hpp"
#include "rfgap/rng.hpp"

namespace rfgap {

namespace {

bool is_missing_token(const std::string& s) { return s.empty() || s == "NA"; }

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE) return false;
  if (!std::isfinite(v)) return false;
  out = v;
  return true;
}

// Full-file RFC-4180 parse: quoted fields may contain commas, doubled quotes
// and line breaks; rows end with \n or \r\n.
std::vector<std::vector<std::string>> parse_csv(const std::string& text,
                                                const std::string& origin) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;

  size_t i = 0;
  // Skip a UTF-8 BOM if present.
  if (text.size() >= 3 && text.compare(0, 3, "\xef\xbb\xbf") == 0) i = 3;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
  };

  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started && field.empty()) {
          in_quotes = true;
          field_started = true;
        } else {
          field += c;  // stray quote inside an unquoted field: keep literally
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_row();
        break;
      case '\n':
        end_row();
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (in_quotes) throw DataError(origin + ": unterminated quoted field");
  if (field_started || !field.empty() || !row.empty()) end_row();
  return rows;
}

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> cells;  // rows x columns
};

RawTable read_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  auto rows = parse_csv(buf.str(), path);
  if (rows.empty()) throw DataError(path + ": empty file (header row required)");
  RawTable t;
  t.header = std::move(rows.front());
  rows.erase(rows.begin());
  if (rows.empty()) throw DataError(path + ": no data rows");
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != t.header.size()) {
      throw DataError(path + ": row " + std::to_string(r + 2) + " has " +
                      std::to_string(rows[r].size()) + " fields, header has " +
                      std::to_string(t.header.size()));
    }
  }
  t.cells = std::move(rows);
  return t;
}

std::vector<ColumnSchema> infer_schema(const RawTable& t, const std::string& origin) {
  std::vector<ColumnSchema> schema(t.header.size());
  for (size_t c = 0; c < t.header.size(); ++c) {
    schema[c].name = t.header[c];
    schema[c].role = (c + 1 == t.header.size()) ? ColumnRole::target : ColumnRole::feature;
    bool numeric = true;
    for (const auto& row : t.cells) {
      if (is_missing_token(row[c])) continue;
      double v;
      if (!parse_number(row[c], v)) {
        numeric = false;
        break;
      }
    }
    schema[c].kind = numeric ? ColumnKind::numeric : ColumnKind::categorical;
  }
  (void)origin;
  return schema;
}

Dataset build_dataset(const RawTable& t, const std::vector<ColumnSchema>& schema,
                      const std::string& origin) {
  if (schema.size() != t.header.size())
    throw DataError(origin + ": schema has " + std::to_string(schema.size()) +
                    " columns, file has " + std::to_string(t.header.size()));
  size_t n_targets = 0;
  for (size_t c = 0; c < schema.size(); ++c) {
    if (schema[c].name != t.header[c])
      throw DataError(origin + ": schema column '" + schema[c].name +
                      "' does not match header '" + t.header[c] + "'");
    if (schema[c].role == ColumnRole::target) ++n_targets;
  }
  if (n_targets != 1)
    throw DataError(origin + ": expected exactly one target column, got " +
                    std::to_string(n_targets));

  Dataset ds;
  ds.file_schema = schema;
  ds.n_rows = t.cells.size();

  for (size_t c = 0; c < schema.size(); ++c) {
    const auto& col = schema[c];
    if (col.role == ColumnRole::ignore) continue;

    if (col.role == ColumnRole::target) {
      ds.target_name = col.name;
      ds.task = col.kind == ColumnKind::numeric ? Task::regression : Task::classification;
      if (ds.task == Task::regression) {
        ds.y_real.reserve(ds.n_rows);
        for (size_t r = 0; r < ds.n_rows; ++r) {
          const auto& cell = t.cells[r][c];
          double v;
          if (is_missing_token(cell))
            throw DataError(origin + ": missing target value at row " + std::to_string(r + 2));
          if (!parse_number(cell, v))
            throw DataError(origin + ": non-numeric target '" + cell + "' at row " +
                            std::to_string(r + 2));
          ds.y_real.push_back(v);
        }
      } else {
        ds.y_class.reserve(ds.n_rows);
        for (size_t r = 0; r < ds.n_rows; ++r) {
          const auto& cell = t.cells[r][c];
          if (is_missing_token(cell))
            throw DataError(origin + ": missing target value at row " + std::to_string(r + 2));
          auto it = std::find(ds.class_labels.begin(), ds.class_labels.end(), cell);
          if (it == ds.class_labels.end()) {
            ds.class_labels.push_back(cell);
            it = std::prev(ds.class_labels.end());
          }
          ds.y_class.push_back(int32_t(it - ds.class_labels.begin()));
        }
      }
      continue;
    }

    FeatureColumn fc;
    fc.name = col.name;
    fc.kind = col.kind;
    fc.missing.assign(ds.n_rows, 0);
    if (col.kind == ColumnKind::numeric) {
      fc.values.assign(ds.n_rows, 0.0);
      for (size_t r = 0; r < ds.n_rows; ++r) {
        const auto& cell = t.cells[r][c];
        if (is_missing_token(cell)) {
          fc.missing[r] = 1;
          continue;
        }
        double v;
        if (!parse_number(cell, v))
          throw DataError(origin + ": column '" + col.name + "' declared numeric but row " +
                          std::to_string(r + 2) + " holds '" + cell + "'");
        fc.values[r] = v;
      }
    } else {
      fc.codes.assign(ds.n_rows, -1);
      for (size_t r = 0; r < ds.n_rows; ++r) {
        const auto& cell = t.cells[r][c];
        if (is_missing_token(cell)) {
          fc.missing[r] = 1;
          continue;
        }
        auto it = std::find(fc.labels.begin(), fc.labels.end(), cell);
        if (it == fc.labels.end()) {
          if (fc.labels.size() >= kMaxCategories)
            throw DataError(origin + ": column '" + col.name + "' exceeds " +
                            std::to_string(kMaxCategories) + " categories");
          fc.labels.push_back(cell);
          it = std::prev(fc.labels.end());
        }
        fc.codes[r] = int32_t(it - fc.labels.begin());
      }
    }
    ds.features.push_back(std::move(fc));
  }

  if (ds.features.empty()) throw DataError(origin + ": no feature columns");
  return ds;
}

double observed_median(const FeatureColumn& col, const std::vector<int32_t>* rows) {
  std::vector<double> vals;
  if (rows) {
    for (int32_t r : *rows)
      if (!col.is_missing(r)) vals.push_back(col.values[r]);
  } else {
    for (size_t r = 0; r < col.values.size(); ++r)
      if (!col.is_missing(r)) vals.push_back(col.values[r]);
  }
  if (vals.empty()) return std::numeric_limits<double>::quiet_NaN();
  return median(std::move(vals));
}

int32_t observed_mode(const FeatureColumn& col, const std::vector<int32_t>* rows) {
  std::vector<int32_t> codes;
  if (rows) {
    for (int32_t r : *rows)
      if (!col.is_missing(r)) codes.push_back(col.codes[r]);
  } else {
    for (size_t r = 0; r < col.codes.size(); ++r)
      if (!col.is_missing(r)) codes.push_back(col.codes[r]);
  }
  if (codes.empty()) return -1;
  return mode_code(codes, col.n_categories());
}

uint64_t fnv1a(uint64_t h, const void* data, size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t fnv1a_str(uint64_t h, const std::string& s) {
  h = fnv1a(h, s.data(), s.size());
  return fnv1a(h, "\x1f", 1);  // separator so ("ab","c") != ("a","bc")
}

}  // namespace

bool Dataset::has_missing() const { return missing_cell_count() > 0; }

size_t Dataset::missing_cell_count() const {
  size_t n = 0;
  for (const auto& f : features)
    for (uint8_t m : f.missing) n += m;
  return n;
}

Dataset Dataset::subset(const std::vector<int32_t>& rows) const {
  for (int32_t r : rows)
    if (r < 0 || size_t(r) >= n_rows) throw InternalError("subset: row index out of range");
  Dataset out;
  out.file_schema = file_schema;
  out.task = task;
  out.target_name = target_name;
  out.class_labels = class_labels;
  out.n_rows = rows.size();
  out.features.reserve(features.size());
  for (const auto& f : features) {
    FeatureColumn fc;
    fc.name = f.name;
    fc.kind = f.kind;
    fc.labels = f.labels;
    for (int32_t r : rows) {
      if (!f.values.empty()) fc.values.push_back(f.values[r]);
      if (!f.codes.empty()) fc.codes.push_back(f.codes[r]);
      if (!f.missing.empty()) fc.missing.push_back(f.missing[r]);
      if (!f.originally_missing.empty())
        fc.originally_missing.push_back(f.originally_missing[r]);
    }
    out.features.push_back(std::move(fc));
  }
  for (int32_t r : rows) {
    if (!y_class.empty()) out.y_class.push_back(y_class[r]);
    if (!y_real.empty()) out.y_real.push_back(y_real[r]);
  }
  return out;
}

uint64_t Dataset::schema_fingerprint() const {
  uint64_t h = 0xcbf29ce484222325ULL;
  h = fnv1a_str(h, task == Task::classification ? "classification" : "regression");
  h = fnv1a_str(h, target_name);
  for (const auto& label : class_labels) h = fnv1a_str(h, label);
  for (const auto& f : features) {
    h = fnv1a_str(h, f.name);
    h = fnv1a_str(h, f.kind == ColumnKind::numeric ? "num" : "cat");
    for (const auto& label : f.labels) h = fnv1a_str(h, label);
  }
  return h;
}

Dataset load_csv(const std::string& path) {
  RawTable t = read_table(path);
  return build_dataset(t, infer_schema(t, path), path);
}

Dataset load_csv(const std::string& path, const std::vector<ColumnSchema>& schema) {
  RawTable t = read_table(path);
  return build_dataset(t, schema, path);
}

std::vector<ColumnSchema> load_schema_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open schema file");
  std::vector<ColumnSchema> schema;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string name, kind, role;
    if (!std::getline(ss, name, ',') || !std::getline(ss, kind, ',') ||
        !std::getline(ss, role))
      throw DataError(path + ": line " + std::to_string(line_no) +
                      ": expected `name,kind,role`");
    ColumnSchema col;
    col.name = name;
    if (kind == "numeric")
      col.kind = ColumnKind::numeric;
    else if (kind == "categorical")
      col.kind = ColumnKind::categorical;
    else
      throw DataError(path + ": line " + std::to_string(line_no) + ": unknown kind '" +
                      kind + "'");
    if (role == "feature")
      col.role = ColumnRole::feature;
    else if (role == "target")
      col.role = ColumnRole::target;
    else if (role == "ignore")
      col.role = ColumnRole::ignore;
    else
      throw DataError(path + ": line " + std::to_string(line_no) + ": unknown role '" +
                      role + "'");
    schema.push_back(std::move(col));
  }
  if (schema.empty()) throw DataError(path + ": empty schema file");
  return schema;
}

std::pair<Dataset, MissingnessRecord> remove_mcar(const Dataset& ds, double fraction,
                                                  uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw UsageError("remove_mcar: fraction must lie strictly between 0 and 1");
  if (ds.has_missing())
    throw DataError("remove_mcar: dataset already contains missing feature cells");

  const size_t n_cells = ds.n_rows * ds.n_features();
  const auto k = size_t(std::llround(fraction * double(n_cells)));

  std::vector<uint32_t> cell_ids(n_cells);
  std::iota(cell_ids.begin(), cell_ids.end(), 0u);
  Rng rng = Rng::stream(seed, 0x6d636172ULL);  // dedicated substream for masking
  rng.shuffle(cell_ids);
  cell_ids.resize(k);
  std::sort(cell_ids.begin(), cell_ids.end());

  Dataset out = ds;
  MissingnessRecord record;
  record.cells.reserve(k);
  for (uint32_t id : cell_ids) {
    const auto row = int32_t(id / ds.n_features());
    const auto col = int32_t(id % ds.n_features());
    auto& fc = out.features[col];
    if (fc.missing.empty()) fc.missing.assign(ds.n_rows, 0);  // column had no mask yet
    MissingCell cell;
    cell.row = row;
    cell.col = col;
    if (fc.kind == ColumnKind::numeric)
      cell.value = fc.values[row];
    else
      cell.code = fc.codes[row];
    fc.missing[row] = 1;
    record.cells.push_back(cell);
  }
  std::sort(record.cells.begin(), record.cells.end(),
            [](const MissingCell& a, const MissingCell& b) {
              return a.row != b.row ? a.row < b.row : a.col < b.col;
            });
  return {std::move(out), std::move(record)};
}

Dataset initialize_impute(const Dataset& ds) {
  if (!ds.has_missing()) return ds;

  Dataset out = ds;
  std::vector<std::vector<int32_t>> class_rows;
  if (ds.task == Task::classification) {
    class_rows.resize(ds.n_classes());
    for (size_t r = 0; r < ds.n_rows; ++r) class_rows[ds.y_class[r]].push_back(int32_t(r));
  }

  for (size_t c = 0; c < ds.n_features(); ++c) {
    const auto& src = ds.features[c];
    auto& dst = out.features[c];
    dst.originally_missing = src.missing;

    bool any = false;
    for (uint8_t m : src.missing) any |= (m != 0);
    if (!any) {
      std::fill(dst.missing.begin(), dst.missing.end(), uint8_t(0));
      continue;
    }

    if (src.kind == ColumnKind::numeric) {
      const double global = observed_median(src, nullptr);
      if (std::isnan(global))
        throw DataError("initialize_impute: column '" + src.name + "' has no observed values");
      std::vector<double> per_class(class_rows.size(),
                                    std::numeric_limits<double>::quiet_NaN());
      for (size_t r = 0; r < ds.n_rows; ++r) {
        if (!src.is_missing(r)) continue;
        double fill = global;
        if (ds.task == Task::classification) {
          const int32_t k = ds.y_class[r];
          if (std::isnan(per_class[k])) per_class[k] = observed_median(src, &class_rows[k]);
          if (!std::isnan(per_class[k])) fill = per_class[k];
        }
        dst.values[r] = fill;
      }
    } else {
      const int32_t global = observed_mode(src, nullptr);
      if (global < 0)
        throw DataError("initialize_impute: column '" + src.name + "' has no observed values");
      std::vector<int32_t> per_class(class_rows.size(), -2);  // -2 = not yet computed
      for (size_t r = 0; r < ds.n_rows; ++r) {
        if (!src.is_missing(r)) continue;
        int32_t fill = global;
        if (ds.task == Task::classification) {
          const int32_t k = ds.y_class[r];
          if (per_class[k] == -2) per_class[k] = observed_mode(src, &class_rows[k]);
          if (per_class[k] >= 0) fill = per_class[k];
        }
        dst.codes[r] = fill;
      }
    }
    std::fill(dst.missing.begin(), dst.missing.end(), uint8_t(0));
  }
  return out;
}

std::pair<Dataset, UnitScaling> scale_unit(const Dataset& ds) {
  Dataset out = ds;
  UnitScaling scaling;
  scaling.columns.resize(ds.n_features());
  for (size_t c = 0; c < ds.n_features(); ++c) {
    auto& fc = out.features[c];
    auto& sc = scaling.columns[c];
    if (fc.kind != ColumnKind::numeric) continue;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (size_t r = 0; r < ds.n_rows; ++r) {
      if (fc.is_missing(r)) continue;
      lo = std::min(lo, fc.values[r]);
      hi = std::max(hi, fc.values[r]);
    }
    if (!(lo <= hi)) {  // no observed values: leave column untouched
      sc.min = 0.0;
      sc.max = 1.0;
      continue;
    }
    sc.min = lo;
    sc.max = hi;
    const double span = hi - lo;
    for (size_t r = 0; r < ds.n_rows; ++r) {
      if (fc.is_missing(r)) continue;
      fc.values[r] = span > 0.0 ? (fc.values[r] - lo) / span : 0.0;
    }
  }
  return {std::move(out), std::move(scaling)};
}

Dataset unscale(const Dataset& ds, const UnitScaling& scaling) {
  if (scaling.columns.size() != ds.n_features())
    throw InternalError("unscale: scaling does not match dataset");
  Dataset out = ds;
  for (size_t c = 0; c < ds.n_features(); ++c) {
    auto& fc = out.features[c];
    if (fc.kind != ColumnKind::numeric) continue;
    const auto& sc = scaling.columns[c];
    const double span = sc.max - sc.min;
    for (size_t r = 0; r < ds.n_rows; ++r) {
      if (fc.is_missing(r)) continue;
      fc.values[r] = span > 0.0 ? fc.values[r] * span + sc.min : sc.min;
    }
  }
  return out;
}

Split stratified_split(const Dataset& ds, double train_fraction, uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw UsageError("split: train fraction must lie strictly between 0 and 1");
  Rng rng = Rng::stream(seed, 0x73706c69ULL);
  Split split;

  auto take = [&](std::vector<int32_t>& pool, size_t n_train) {
    rng.shuffle(pool);
    for (size_t i = 0; i < pool.size(); ++i)
      (i < n_train ? split.train_rows : split.test_rows).push_back(pool[i]);
  };

  if (ds.task == Task::classification) {
    std::vector<std::vector<int32_t>> by_class(ds.n_classes());
    for (size_t r = 0; r < ds.n_rows; ++r) by_class[ds.y_class[r]].push_back(int32_t(r));
    for (auto& pool : by_class) {
      if (pool.empty()) continue;
      const auto want = size_t(std::llround(train_fraction * double(pool.size())));
      take(pool, std::clamp<size_t>(want, 1, pool.size()));
    }
  } else {
    std::vector<int32_t> pool(ds.n_rows);
    std::iota(pool.begin(), pool.end(), 0);
    const auto want = size_t(std::llround(train_fraction * double(pool.size())));
    take(pool, std::clamp<size_t>(want, 1, pool.size() - 1));
  }

  std::sort(split.train_rows.begin(), split.train_rows.end());
  std::sort(split.test_rows.begin(), split.test_rows.end());
  if (split.test_rows.empty())
    throw DataError("split: empty test partition (dataset too small for fraction)");
  split.train = ds.subset(split.train_rows);
  split.test = ds.subset(split.test_rows);
  return split;
}

int32_t mode_code(const std::vector<int32_t>& codes, size_t n_categories) {
  std::vector<size_t> counts(std::max<size_t>(n_categories, 1), 0);
  for (int32_t c : codes) {
    if (c < 0 || size_t(c) >= counts.size()) throw InternalError("mode_code: code out of range");
    ++counts[c];
  }
  size_t best = 0;
  for (size_t k = 1; k < counts.size(); ++k)
    if (counts[k] > counts[best]) best = k;  // strict: ties keep the smaller code
  return int32_t(best);
}

}  // namespace rfgap
