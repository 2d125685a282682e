#include "rfgap/prediction.hpp"

#include <algorithm>
#include <cmath>

#include "rfgap/common.hpp"
#include "rfgap/numeric.hpp"
#include "rfgap/parallel.hpp"

namespace rfgap {

namespace {

// Absolute tolerance for calling two class masses tied.  Genuine vote gaps
// are at least 1/n_trees (≥ 2e-3 at 1000 trees); float accumulation noise is
// ~1e-13, so any value between separates them with huge margin.
constexpr double kVoteTol = 1e-9;

constexpr double kRegressionMismatch = 1e-8;

void vote(const std::vector<double>& scores, int32_t& label, uint8_t& tied) {
  size_t best = 0;
  for (size_t k = 1; k < scores.size(); ++k)
    if (scores[k] > scores[best]) best = k;
  size_t argmax = best;
  for (size_t k = 0; k < scores.size(); ++k) {
    if (scores[k] >= scores[best] - kVoteTol) {
      argmax = k;  // smallest index reaching the max within tolerance
      break;
    }
  }
  tied = 0;
  for (size_t k = 0; k < scores.size(); ++k)
    if (k != argmax && scores[k] >= scores[argmax] - kVoteTol) tied = 1;
  label = int32_t(argmax);
}

PredictionVector forest_aggregate(const Forest& f, const Dataset& ds,
                                  const std::vector<std::vector<int32_t>>* per_row_trees) {
  // per_row_trees = S_i for OOB prediction, nullptr = all trees (test rows).
  const size_t n = ds.n_rows;
  PredictionVector out;
  out.task = f.task();
  out.defined.assign(n, 1);
  if (out.task == Task::classification) {
    out.labels.assign(n, -1);
    out.tied.assign(n, 0);
  } else {
    out.values.assign(n, 0.0);
  }

  const auto assign = leaf_assignments(f, ds);
  const size_t n_trees = f.trees.size();

  parallel_for(0, n, f.params.n_threads, [&](size_t i) {
    std::vector<int32_t> all;
    const std::vector<int32_t>* trees = per_row_trees ? &(*per_row_trees)[i] : &all;
    if (!per_row_trees) {
      all.resize(n_trees);
      for (size_t t = 0; t < n_trees; ++t) all[t] = int32_t(t);
    }
    if (trees->empty()) {
      out.defined[i] = 0;
      return;
    }
    if (out.task == Task::classification) {
      std::vector<int64_t> votes(f.n_classes, 0);
      bool leaf_tie = false;
      for (const int32_t t : *trees) {
        const Leaf& leaf = f.trees[t].leaves[assign[t][i]];
        ++votes[leaf.majority];
        leaf_tie |= leaf.majority_tied;
      }
      size_t best = 0;
      for (size_t k = 1; k < votes.size(); ++k)
        if (votes[k] > votes[best]) best = k;
      size_t argmax = votes.size();
      for (size_t k = 0; k < votes.size(); ++k)
        if (votes[k] == votes[best]) {
          argmax = std::min(argmax, k);
          if (k != argmax) out.tied[i] = 1;
        }
      if (leaf_tie) out.tied[i] = 1;
      out.labels[i] = int32_t(argmax);
    } else {
      KahanSum sum;
      for (const int32_t t : *trees) sum.add(f.trees[t].leaves[assign[t][i]].mean);
      out.values[i] = sum.value() / double(trees->size());
    }
  });
  return out;
}

// Weight-row normalization per the pinned rules.  Returns false when the row
// carries no usable weight (missing prediction marker).
struct WeightRow {
  std::vector<std::pair<int32_t, double>> entries;
};

bool weight_row(const ProximityMatrix& p, size_t i, WeightRow& row) {
  row.entries.clear();
  const bool exclude_diag = p.kind == ProximityKind::original && p.is_square();
  p.for_each_in_row(i, [&](int32_t j, double v) {
    if (exclude_diag && size_t(j) == i) return;
    if (v != 0.0) row.entries.push_back({j, v});
  });
  if (!p.row_undefined.empty() && p.row_undefined[i]) return false;
  if (row.entries.empty()) return false;

  if (p.kind == ProximityKind::gap) {
    // Proposition 1 guarantees these rows are already weights.
    KahanSum s;
    for (const auto& [j, v] : row.entries) s.add(v);
    if (std::abs(s.value() - 1.0) > 1e-8)
      throw InternalError("GAP row does not sum to 1; diagonal policy must be 'zeroed'");
    return true;
  }
  KahanSum s;
  for (const auto& [j, v] : row.entries) s.add(v);
  const double total = s.value();
  if (total <= 0.0) return false;
  for (auto& [j, v] : row.entries) v /= total;
  return true;
}

void check_gap_policy(const ProximityMatrix& p) {
  if (p.kind == ProximityKind::gap && p.diagonal != DiagonalPolicy::zeroed)
    throw UsageError(
        "proximity-weighted prediction requires GAP matrices with the zeroed diagonal");
}

}  // namespace

PredictionVector oob_predict(const Forest& f, const Dataset& train) {
  f.check_routable(train);
  RFGAP_REQUIRE(train.n_rows == f.n_rows, "oob_predict: dataset is not the training set");
  return forest_aggregate(f, train, &f.oob_trees);
}

PredictionVector predict(const Forest& f, const Dataset& queries) {
  f.check_routable(queries);
  return forest_aggregate(f, queries, nullptr);
}

PredictionVector prox_weighted_regression(const ProximityMatrix& p,
                                          const std::vector<double>& y) {
  RFGAP_REQUIRE(p.n_train() == y.size(), "prox_weighted_regression: size mismatch");
  check_gap_policy(p);
  PredictionVector out;
  out.task = Task::regression;
  out.values.assign(p.n_query(), 0.0);
  out.defined.assign(p.n_query(), 1);
  WeightRow row;
  for (size_t i = 0; i < p.n_query(); ++i) {
    if (!weight_row(p, i, row)) {
      out.defined[i] = 0;
      continue;
    }
    KahanSum sum;
    for (const auto& [j, v] : row.entries) sum.add(v * y[j]);
    out.values[i] = sum.value();
  }
  return out;
}

PredictionVector prox_weighted_classification(const ProximityMatrix& p,
                                              const std::vector<int32_t>& y,
                                              size_t n_classes) {
  RFGAP_REQUIRE(p.n_train() == y.size(), "prox_weighted_classification: size mismatch");
  check_gap_policy(p);
  for (const int32_t c : y)
    if (c < 0 || size_t(c) >= n_classes)
      throw UsageError("prox_weighted_classification: class code out of range");

  PredictionVector out;
  out.task = Task::classification;
  out.labels.assign(p.n_query(), -1);
  out.tied.assign(p.n_query(), 0);
  out.defined.assign(p.n_query(), 1);
  WeightRow row;
  std::vector<double> scores(n_classes);
  for (size_t i = 0; i < p.n_query(); ++i) {
    if (!weight_row(p, i, row)) {
      out.defined[i] = 0;
      continue;
    }
    std::fill(scores.begin(), scores.end(), 0.0);
    for (const auto& [j, v] : row.entries) scores[y[j]] += v;
    vote(scores, out.labels[i], out.tied[i]);
  }
  return out;
}

namespace {

PredictionReport compare(const Forest& f, const Dataset& labels_from,
                         const ProximityMatrix& p, const PredictionVector& forest_pred,
                         ProximityKind kind, bool test_side) {
  PredictionReport rep;
  rep.kind = kind;
  rep.test_side = test_side;
  rep.forest = forest_pred;
  if (f.task() == Task::classification)
    rep.prox = prox_weighted_classification(p, labels_from.y_class, f.n_classes);
  else
    rep.prox = prox_weighted_regression(p, labels_from.y_real);

  const auto& fp = rep.forest;
  const auto& pp = rep.prox;
  RFGAP_REQUIRE(fp.size() == pp.size(), "equivalence: prediction length mismatch");
  for (size_t i = 0; i < fp.size(); ++i) {
    if (!fp.defined[i] || !pp.defined[i]) continue;
    ++rep.compared;
    if (f.task() == Task::classification) {
      if (pp.tied[i]) ++rep.tie_count;
      if (fp.labels[i] != pp.labels[i]) ++rep.mismatches;
    } else {
      const double d = std::abs(fp.values[i] - pp.values[i]);
      rep.max_abs_diff = std::max(rep.max_abs_diff, d);
      if (d > kRegressionMismatch) ++rep.mismatches;
    }
  }
  rep.mismatch = rep.compared ? double(rep.mismatches) / double(rep.compared) : 0.0;
  return rep;
}

void fill_errors(PredictionReport& rep, const Dataset& truth) {
  if (truth.task == Task::classification) {
    rep.prox_error = classification_error(rep.prox, truth.y_class);
    rep.forest_error = classification_error(rep.forest, truth.y_class);
  } else {
    rep.prox_error = regression_mse(rep.prox, truth.y_real);
    rep.forest_error = regression_mse(rep.forest, truth.y_real);
  }
}

}  // namespace

PredictionReport equivalence_report(const Forest& f, const Dataset& train,
                                    ProximityKind kind) {
  const ProximityMatrix p = prox_matrix(f, train, kind, DiagonalPolicy::zeroed);
  PredictionReport rep = compare(f, train, p, oob_predict(f, train), kind, false);
  fill_errors(rep, train);
  return rep;
}

PredictionReport equivalence_report_test(const Forest& f, const Dataset& train,
                                         const Dataset& test, ProximityKind kind) {
  const ProximityMatrix p = prox_test(f, train, test, kind);
  // The weighted sums read *training* labels; comparisons and errors use the
  // test rows' own predictions and truth.
  PredictionReport rep;
  rep.kind = kind;
  rep.test_side = true;
  rep.forest = predict(f, test);
  if (f.task() == Task::classification)
    rep.prox = prox_weighted_classification(p, train.y_class, f.n_classes);
  else
    rep.prox = prox_weighted_regression(p, train.y_real);
  for (size_t i = 0; i < test.n_rows; ++i) {
    if (!rep.forest.defined[i] || !rep.prox.defined[i]) continue;
    ++rep.compared;
    if (f.task() == Task::classification) {
      if (rep.prox.tied[i]) ++rep.tie_count;
      if (rep.forest.labels[i] != rep.prox.labels[i]) ++rep.mismatches;
    } else {
      const double d = std::abs(rep.forest.values[i] - rep.prox.values[i]);
      rep.max_abs_diff = std::max(rep.max_abs_diff, d);
      if (d > kRegressionMismatch) ++rep.mismatches;
    }
  }
  rep.mismatch = rep.compared ? double(rep.mismatches) / double(rep.compared) : 0.0;
  fill_errors(rep, test);
  return rep;
}

double classification_error(const PredictionVector& pred, const std::vector<int32_t>& y) {
  RFGAP_REQUIRE(pred.size() == y.size(), "classification_error: size mismatch");
  size_t wrong = 0, counted = 0;
  for (size_t i = 0; i < y.size(); ++i) {
    if (!pred.defined[i]) continue;
    ++counted;
    wrong += pred.labels[i] != y[i];
  }
  return counted ? double(wrong) / double(counted) : 0.0;
}

double regression_mse(const PredictionVector& pred, const std::vector<double>& y) {
  RFGAP_REQUIRE(pred.size() == y.size(), "regression_mse: size mismatch");
  KahanSum sum;
  size_t counted = 0;
  for (size_t i = 0; i < y.size(); ++i) {
    if (!pred.defined[i]) continue;
    ++counted;
    const double d = pred.values[i] - y[i];
    sum.add(d * d);
  }
  return counted ? sum.value() / double(counted) : 0.0;
}

}  // namespace rfgap
