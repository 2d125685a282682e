#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rfgap/forest.hpp"

namespace rfgap {

enum class ProximityKind { original, oob, gap };
enum class DiagonalPolicy { zeroed, duplicate_oob, identity };

const char* to_string(ProximityKind kind);
const char* to_string(DiagonalPolicy policy);
ProximityKind proximity_kind_from_string(const std::string& s);

// N_query x N_train proximity matrix.  Dense below kDenseRowLimit rows,
// coordinate-sparse (per-row sorted column/value pairs) above — GAP rows hold
// at most |S_i| * (average leaf size) nonzeros, so sparsity is real.
class ProximityMatrix {
 public:
  static constexpr size_t kDenseRowLimit = 2000;

  ProximityMatrix() = default;
  ProximityMatrix(ProximityKind kind, size_t n_query, size_t n_train);

  ProximityKind kind = ProximityKind::gap;
  DiagonalPolicy diagonal = DiagonalPolicy::zeroed;
  bool symmetric = false;
  // Train-side rows with S_i = ∅: all-zero and excluded from comparisons.
  std::vector<uint8_t> row_undefined;
  // OOB kind: unordered train pairs (i<j) never jointly out-of-bag.
  std::vector<std::pair<int32_t, int32_t>> undefined_pairs;

  size_t n_query() const { return n_query_; }
  size_t n_train() const { return n_train_; }
  bool is_dense() const { return dense_; }
  bool is_square() const { return n_query_ == n_train_; }

  // Entries must be sorted by column and unique; replaces the row.
  void commit_row(size_t i, const std::vector<std::pair<int32_t, double>>& entries);
  void set(size_t i, size_t j, double value);

  double at(size_t i, size_t j) const;
  double row_sum(size_t i) const;
  size_t nonzero_count() const;

  // f(column, value) over the stored nonzeros of row i, column-ascending.
  template <typename F>
  void for_each_in_row(size_t i, F f) const {
    if (dense_) {
      const double* row = values_.data() + i * n_train_;
      for (size_t j = 0; j < n_train_; ++j)
        if (row[j] != 0.0) f(int32_t(j), row[j]);
    } else {
      for (const auto& [j, v] : rows_[i]) f(j, v);
    }
  }

 private:
  size_t n_query_ = 0;
  size_t n_train_ = 0;
  bool dense_ = true;
  std::vector<double> values_;                                // dense storage
  std::vector<std::vector<std::pair<int32_t, double>>> rows_; // sparse storage
};

// Leaf id of every training-format row in every tree: result[t][row].
std::vector<std::vector<int32_t>> leaf_assignments(const Forest& f, const Dataset& ds);

// p(i,j) = (1/T) Σ_t I(j ∈ v_i(t)) — co-leaf proportion regardless of
// bootstrap status.  Symmetric, diagonal 1.
ProximityMatrix prox_original(const Forest& f, const Dataset& train);

// p(i,j) = Σ_{t∈S_i} I(j ∈ O(t) ∩ v_i(t)) / Σ_{t∈S_i} I(j ∈ O(t)); pairs with
// zero denominator get 0 and are flagged.  Symmetric.
ProximityMatrix prox_oob(const Forest& f, const Dataset& train);

// p(i,j) = (1/|S_i|) Σ_{t∈S_i} c_j(t) · I(j ∈ J_i(t)) / |M_i(t)|.  Rows with
// S_i ≠ ∅ are nonnegative and sum to 1 under the zeroed diagonal; the
// duplicate-oob diagonal is p(i,i) = (1/T) Σ_t c_i(t)/|M_i(t)| (a clone of i
// routed as out-of-bag through every tree).
ProximityMatrix prox_gap(const Forest& f, const Dataset& train, DiagonalPolicy diagonal);

// Test-row extension: test rows are out-of-bag in every tree (S_q = all).
ProximityMatrix prox_test(const Forest& f, const Dataset& train, const Dataset& test,
                          ProximityKind kind);

inline ProximityMatrix prox_gap_test(const Forest& f, const Dataset& train,
                                     const Dataset& test) {
  return prox_test(f, train, test, ProximityKind::gap);
}

// Train-side dispatcher (diagonal applies to GAP only).
ProximityMatrix prox_matrix(const Forest& f, const Dataset& train, ProximityKind kind,
                            DiagonalPolicy diagonal = DiagonalPolicy::zeroed);

// (p + pᵀ)/2; requires a square matrix.
ProximityMatrix symmetrize(const ProximityMatrix& p);

// Mean over all ordered (i,j) of (p(i,j) − p(j,i))²; requires square.
double asymmetry_mse(const ProximityMatrix& p);

}  // namespace rfgap
