#include "rfgap/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rfgap/common.hpp"
#include "rfgap/rng.hpp"

namespace rfgap {

namespace {

// Assembles a classification dataset the same way load_csv would: codes and
// class labels registered in first-appearance (row) order, so a dataset
// written to CSV and re-loaded carries the identical schema fingerprint.
struct Builder {
  Dataset ds;

  explicit Builder(const std::string& target_name) { ds.target_name = target_name; }

  FeatureColumn& add_numeric(const std::string& name) {
    FeatureColumn fc;
    fc.name = name;
    fc.kind = ColumnKind::numeric;
    ds.features.push_back(std::move(fc));
    return ds.features.back();
  }

  FeatureColumn& add_categorical(const std::string& name) {
    FeatureColumn fc;
    fc.name = name;
    fc.kind = ColumnKind::categorical;
    ds.features.push_back(std::move(fc));
    return ds.features.back();
  }

  static void push_label(FeatureColumn& fc, const std::string& label) {
    auto it = std::find(fc.labels.begin(), fc.labels.end(), label);
    if (it == fc.labels.end()) {
      fc.labels.push_back(label);
      it = std::prev(fc.labels.end());
    }
    fc.codes.push_back(int32_t(it - fc.labels.begin()));
  }

  void push_class(const std::string& label) {
    auto it = std::find(ds.class_labels.begin(), ds.class_labels.end(), label);
    if (it == ds.class_labels.end()) {
      ds.class_labels.push_back(label);
      it = std::prev(ds.class_labels.end());
    }
    ds.y_class.push_back(int32_t(it - ds.class_labels.begin()));
  }

  Dataset finish(Task task, size_t n_rows) {
    ds.task = task;
    ds.n_rows = n_rows;
    for (const auto& f : ds.features)
      ds.file_schema.push_back({f.name, f.kind, ColumnRole::feature});
    ds.file_schema.push_back({ds.target_name,
                              task == Task::classification ? ColumnKind::categorical
                                                           : ColumnKind::numeric,
                              ColumnRole::target});
    return std::move(ds);
  }
};

}  // namespace

Dataset synth_gaussian_classes(size_t n_rows, uint64_t seed) {
  if (n_rows < 4) throw UsageError("synth: need at least 4 rows");
  Rng rng = Rng::stream(seed, 0x73796e3161ULL);  // "syn1a"
  Builder b("class");
  constexpr int d = 10;
  for (int k = 0; k < d; ++k) b.add_numeric("x" + std::to_string(k));
  for (size_t i = 0; i < n_rows; ++i) {
    const int cls = int(i % 2);
    for (int k = 0; k < d; ++k) {
      const double mean = cls == 1 ? double(k) / double(d - 1) : 0.0;
      b.ds.features[k].values.push_back(mean + rng.normal());
    }
    b.push_class(cls == 0 ? "c0" : "c1");
  }
  return b.finish(Task::classification, n_rows);
}

Dataset synth_two_clusters(size_t n_rows, double separation, uint64_t seed) {
  if (n_rows < 4) throw UsageError("synth: need at least 4 rows");
  if (!(separation > 0.0)) throw UsageError("synth: separation must be positive");
  Rng rng = Rng::stream(seed, 0x73796e636cULL);  // "syncl"
  Builder b("class");
  b.add_numeric("x0");
  b.add_numeric("x1");
  for (size_t i = 0; i < n_rows; ++i) {
    const int cls = int(i % 2);
    b.ds.features[0].values.push_back((cls == 1 ? separation : 0.0) + rng.normal());
    b.ds.features[1].values.push_back(rng.normal());
    b.push_class(cls == 0 ? "c0" : "c1");
  }
  return b.finish(Task::classification, n_rows);
}

Dataset synth_mixed(size_t n_rows, uint64_t seed) {
  if (n_rows < 4) throw UsageError("synth: need at least 4 rows");
  Rng rng = Rng::stream(seed, 0x73796e6d78ULL);  // "synmx"
  Builder b("class");
  b.add_numeric("x0");
  b.add_numeric("x1");
  b.add_categorical("cat_a");
  b.add_categorical("cat_b");
  static const char* a_labels[4] = {"a0", "a1", "a2", "a3"};
  static const char* b_labels[6] = {"b0", "b1", "b2", "b3", "b4", "b5"};
  for (size_t i = 0; i < n_rows; ++i) {
    const double x0 = rng.normal();
    const double x1 = rng.normal();
    const uint64_t a = rng.uniform_below(4);
    const uint64_t bb = rng.uniform_below(6);
    b.ds.features[0].values.push_back(x0);
    b.ds.features[1].values.push_back(x1);
    Builder::push_label(b.ds.features[2], a_labels[a]);
    Builder::push_label(b.ds.features[3], b_labels[bb]);
    // Deterministic rule in the features: continuous x0 keeps rows unique.
    const double score = x0 + (a >= 2 ? 1.0 : 0.0) + (bb % 2 == 1 ? 0.5 : 0.0) - 0.75;
    b.push_class(score > 0.0 ? "pos" : "neg");
  }
  return b.finish(Task::classification, n_rows);
}

Dataset synth_friedman(size_t n_rows, uint64_t seed) {
  if (n_rows < 4) throw UsageError("synth: need at least 4 rows");
  Rng rng = Rng::stream(seed, 0x73796e6672ULL);  // "synfr"
  Builder b("y");
  constexpr int d = 10;
  for (int k = 0; k < d; ++k) b.add_numeric("x" + std::to_string(k));
  for (size_t i = 0; i < n_rows; ++i) {
    double x[d];
    for (int k = 0; k < d; ++k) {
      x[k] = rng.uniform();
      b.ds.features[k].values.push_back(x[k]);
    }
    const double y = 10.0 * std::sin(std::numbers::pi * x[0] * x[1]) +
                     20.0 * (x[2] - 0.5) * (x[2] - 0.5) + 10.0 * x[3] + 5.0 * x[4] +
                     rng.normal();
    b.ds.y_real.push_back(y);
  }
  return b.finish(Task::regression, n_rows);
}

Dataset synth_by_name(const std::string& name, size_t n_rows, uint64_t seed) {
  if (name == "gaussian") return synth_gaussian_classes(n_rows, seed);
  if (name == "mixed") return synth_mixed(n_rows, seed);
  if (name == "friedman") return synth_friedman(n_rows, seed);
  if (name.rfind("clusters:", 0) == 0) {
    const std::string arg = name.substr(9);
    try {
      return synth_two_clusters(n_rows, std::stod(arg), seed);
    } catch (const std::invalid_argument&) {
      throw UsageError("synth: bad separation '" + arg + "'");
    } catch (const std::out_of_range&) {
      throw UsageError("synth: bad separation '" + arg + "'");
    }
  }
  throw UsageError("synth: unknown generator '" + name +
                   "' (expected gaussian, clusters:<sep>, mixed, friedman)");
}

}  // namespace rfgap
