#pragma once

#include <cstdint>
#include <vector>

#include "rfgap/forest.hpp"
#include "rfgap/proximity.hpp"

namespace rfgap {

struct PredictionVector {
  Task task = Task::classification;
  std::vector<int32_t> labels;   // classification
  std::vector<double> values;    // regression
  std::vector<uint8_t> tied;     // classification: a tie was broken somewhere
  std::vector<uint8_t> defined;  // 0 = missing prediction marker (S_i = ∅ etc.)

  size_t size() const { return defined.size(); }
};

// Forest OOB predictions: regression ŷ_i = mean over S_i of leaf means;
// classification ŷ_i = majority over per-tree leaf votes, ties to the
// smallest class code with the tie flag set (at either level).
PredictionVector oob_predict(const Forest& f, const Dataset& train);

// Same aggregation over all trees (queries are out-of-bag everywhere).
PredictionVector predict(const Forest& f, const Dataset& queries);

// ŷ_i = Σ_j p̃(i,j)·y_j.  GAP rows are used as-is (their sums are asserted
// close to 1); Original rows are L1-normalized after excluding the diagonal;
// OOB rows are L1-normalized as stored.  All-zero rows yield missing markers.
PredictionVector prox_weighted_regression(const ProximityMatrix& p,
                                          const std::vector<double>& y);

// argmax_k Σ_j p̃(i,j)·I(y_j = k), ties to smallest code with flag.  Class
// masses are compared with a small absolute tolerance so float accumulation
// noise cannot split an exact vote tie (true vote gaps are ≥ 1/n_trees).
PredictionVector prox_weighted_classification(const ProximityMatrix& p,
                                              const std::vector<int32_t>& y,
                                              size_t n_classes);

struct PredictionReport {
  ProximityKind kind = ProximityKind::gap;
  bool test_side = false;
  PredictionVector prox;
  PredictionVector forest;
  size_t compared = 0;     // rows where both predictions are defined
  size_t mismatches = 0;
  double mismatch = 0.0;   // mismatches / compared (0 when nothing compared)
  size_t tie_count = 0;    // proximity-side ties among compared rows
  double max_abs_diff = 0.0;  // regression: max |prox − forest| over compared
  double prox_error = 0.0;    // vs true targets (error rate / MSE)
  double forest_error = 0.0;
};

// Train-side harness: builds the kind's proximity (zeroed diagonal for GAP),
// weights, and compares against oob_predict.  Regression disagreement
// threshold: |Δ| > 1e-8.
PredictionReport equivalence_report(const Forest& f, const Dataset& train,
                                    ProximityKind kind);

// Test-side: prox_test vs predict(f, test).
PredictionReport equivalence_report_test(const Forest& f, const Dataset& train,
                                         const Dataset& test, ProximityKind kind);

double classification_error(const PredictionVector& pred, const std::vector<int32_t>& y);
double regression_mse(const PredictionVector& pred, const std::vector<double>& y);

}  // namespace rfgap
