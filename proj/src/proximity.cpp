#include "rfgap/proximity.hpp"

#include <algorithm>
#include <cmath>

#include "rfgap/common.hpp"
#include "rfgap/parallel.hpp"

namespace rfgap {

namespace {

// Per-tree buckets of rows by leaf id.
std::vector<std::vector<int32_t>> bucket_by_leaf(const Tree& tree,
                                                 const std::vector<int32_t>& assign,
                                                 const std::vector<int32_t>& rows) {
  std::vector<std::vector<int32_t>> buckets(tree.leaves.size());
  for (const int32_t row : rows) buckets[assign[row]].push_back(row);
  return buckets;
}

std::vector<int32_t> all_rows(size_t n) {
  std::vector<int32_t> v(n);
  for (size_t i = 0; i < n; ++i) v[i] = int32_t(i);
  return v;
}

// Bit masks of OOB membership per row: word t/64, bit t%64.
std::vector<std::vector<uint64_t>> oob_bitsets(const Forest& f) {
  const size_t words = (f.trees.size() + 63) / 64;
  std::vector<std::vector<uint64_t>> bits(f.n_rows, std::vector<uint64_t>(words, 0));
  for (size_t t = 0; t < f.bootstraps.size(); ++t)
    for (const int32_t row : f.bootstraps[t].oob) bits[row][t / 64] |= 1ULL << (t % 64);
  return bits;
}

size_t joint_popcount(const std::vector<uint64_t>& a, const std::vector<uint64_t>& b) {
  size_t n = 0;
  for (size_t w = 0; w < a.size(); ++w) n += size_t(__builtin_popcountll(a[w] & b[w]));
  return n;
}

// Sparse row accumulator: dense scratch plus a touched-column list so row
// construction is O(nonzeros) and the accumulation order stays tree-major.
class RowAccumulator {
 public:
  explicit RowAccumulator(size_t n) : acc_(n, 0.0) {}

  void add(int32_t col, double v) {
    if (acc_[col] == 0.0) touched_.push_back(col);
    acc_[col] += v;
  }

  // Extracts (col, value * scale) sorted by column and resets.
  std::vector<std::pair<int32_t, double>> drain(double scale) {
    std::sort(touched_.begin(), touched_.end());
    std::vector<std::pair<int32_t, double>> entries;
    entries.reserve(touched_.size());
    for (const int32_t col : touched_) {
      if (acc_[col] != 0.0) entries.push_back({col, acc_[col] * scale});
      acc_[col] = 0.0;
    }
    touched_.clear();
    return entries;
  }

 private:
  std::vector<double> acc_;
  std::vector<int32_t> touched_;
};

}  // namespace

const char* to_string(ProximityKind kind) {
  switch (kind) {
    case ProximityKind::original: return "original";
    case ProximityKind::oob: return "oob";
    case ProximityKind::gap: return "gap";
  }
  return "?";
}

const char* to_string(DiagonalPolicy policy) {
  switch (policy) {
    case DiagonalPolicy::zeroed: return "zeroed";
    case DiagonalPolicy::duplicate_oob: return "duplicate-oob";
    case DiagonalPolicy::identity: return "identity";
  }
  return "?";
}

ProximityKind proximity_kind_from_string(const std::string& s) {
  if (s == "original") return ProximityKind::original;
  if (s == "oob") return ProximityKind::oob;
  if (s == "gap") return ProximityKind::gap;
  throw UsageError("unknown proximity kind '" + s + "' (original|oob|gap)");
}

ProximityMatrix::ProximityMatrix(ProximityKind kind_, size_t n_query, size_t n_train)
    : kind(kind_), n_query_(n_query), n_train_(n_train) {
  dense_ = n_query <= kDenseRowLimit && n_train <= kDenseRowLimit;
  if (dense_)
    values_.assign(n_query * n_train, 0.0);
  else
    rows_.resize(n_query);
  row_undefined.assign(n_query, 0);
}

void ProximityMatrix::commit_row(size_t i,
                                 const std::vector<std::pair<int32_t, double>>& entries) {
  if (dense_) {
    double* row = values_.data() + i * n_train_;
    std::fill(row, row + n_train_, 0.0);
    for (const auto& [j, v] : entries) row[j] = v;
  } else {
    rows_[i] = entries;
  }
}

void ProximityMatrix::set(size_t i, size_t j, double value) {
  if (dense_) {
    values_[i * n_train_ + j] = value;
    return;
  }
  auto& row = rows_[i];
  auto it = std::lower_bound(row.begin(), row.end(), int32_t(j),
                             [](const auto& e, int32_t col) { return e.first < col; });
  if (it != row.end() && it->first == int32_t(j))
    it->second = value;
  else if (value != 0.0)
    row.insert(it, {int32_t(j), value});
}

double ProximityMatrix::at(size_t i, size_t j) const {
  if (dense_) return values_[i * n_train_ + j];
  const auto& row = rows_[i];
  auto it = std::lower_bound(row.begin(), row.end(), int32_t(j),
                             [](const auto& e, int32_t col) { return e.first < col; });
  return (it != row.end() && it->first == int32_t(j)) ? it->second : 0.0;
}

double ProximityMatrix::row_sum(size_t i) const {
  double s = 0.0;
  for_each_in_row(i, [&](int32_t, double v) { s += v; });
  return s;
}

size_t ProximityMatrix::nonzero_count() const {
  size_t n = 0;
  for (size_t i = 0; i < n_query_; ++i)
    for_each_in_row(i, [&](int32_t, double) { ++n; });
  return n;
}

std::vector<std::vector<int32_t>> leaf_assignments(const Forest& f, const Dataset& ds) {
  std::vector<std::vector<int32_t>> assign(f.trees.size());
  parallel_for(0, f.trees.size(), f.params.n_threads, [&](size_t t) {
    auto& a = assign[t];
    a.resize(ds.n_rows);
    for (size_t r = 0; r < ds.n_rows; ++r) a[r] = f.trees[t].leaf_of(ds, r);
  });
  return assign;
}

ProximityMatrix prox_original(const Forest& f, const Dataset& train) {
  f.check_routable(train);
  RFGAP_REQUIRE(train.n_rows == f.n_rows, "prox_original: dataset is not the training set");
  const size_t n = f.n_rows;
  const size_t n_trees = f.trees.size();
  const auto assign = leaf_assignments(f, train);

  std::vector<std::vector<std::vector<int32_t>>> buckets(n_trees);
  const auto everyone = all_rows(n);
  for (size_t t = 0; t < n_trees; ++t)
    buckets[t] = bucket_by_leaf(f.trees[t], assign[t], everyone);

  ProximityMatrix p(ProximityKind::original, n, n);
  p.diagonal = DiagonalPolicy::identity;
  p.symmetric = true;
  parallel_for(0, n, f.params.n_threads, [&](size_t i) {
    RowAccumulator acc(n);
    for (size_t t = 0; t < n_trees; ++t)
      for (const int32_t j : buckets[t][assign[t][i]]) acc.add(j, 1.0);
    p.commit_row(i, acc.drain(1.0 / double(n_trees)));
  });
  return p;
}

ProximityMatrix prox_oob(const Forest& f, const Dataset& train) {
  f.check_routable(train);
  RFGAP_REQUIRE(train.n_rows == f.n_rows, "prox_oob: dataset is not the training set");
  const size_t n = f.n_rows;
  const auto assign = leaf_assignments(f, train);
  const auto oob_bits = oob_bitsets(f);

  std::vector<std::vector<std::vector<int32_t>>> oob_buckets(f.trees.size());
  for (size_t t = 0; t < f.trees.size(); ++t)
    oob_buckets[t] = bucket_by_leaf(f.trees[t], assign[t], f.bootstraps[t].oob);

  ProximityMatrix p(ProximityKind::oob, n, n);
  p.diagonal = DiagonalPolicy::identity;
  p.symmetric = true;

  std::vector<std::vector<std::pair<int32_t, int32_t>>> flagged(n);
  parallel_for(0, n, f.params.n_threads, [&](size_t i) {
    // Flag never-jointly-OOB pairs (zero denominator); their value stays 0.
    for (size_t j = i + 1; j < n; ++j)
      if (joint_popcount(oob_bits[i], oob_bits[j]) == 0)
        flagged[i].push_back({int32_t(i), int32_t(j)});
    const auto& s_i = f.oob_trees[i];
    if (s_i.empty()) {
      p.row_undefined[i] = 1;
      p.commit_row(i, {});
      return;
    }
    // Numerators: joint-OOB co-leaf counts, accumulated tree-major.
    std::vector<int32_t> num(n, 0);
    std::vector<int32_t> touched;
    for (const int32_t t : s_i) {
      for (const int32_t j : oob_buckets[t][assign[t][i]]) {
        if (num[j] == 0) touched.push_back(j);
        ++num[j];
      }
    }
    std::sort(touched.begin(), touched.end());
    std::vector<std::pair<int32_t, double>> entries;
    entries.reserve(touched.size());
    for (const int32_t j : touched) {
      const size_t den = joint_popcount(oob_bits[i], oob_bits[j]);
      entries.push_back({j, double(num[j]) / double(den)});
    }
    p.commit_row(i, entries);
  });
  for (auto& rows : flagged)
    p.undefined_pairs.insert(p.undefined_pairs.end(), rows.begin(), rows.end());
  return p;
}

ProximityMatrix prox_gap(const Forest& f, const Dataset& train, DiagonalPolicy diagonal) {
  f.check_routable(train);
  RFGAP_REQUIRE(train.n_rows == f.n_rows, "prox_gap: dataset is not the training set");
  const size_t n = f.n_rows;
  const size_t n_trees = f.trees.size();
  const auto assign = leaf_assignments(f, train);

  ProximityMatrix p(ProximityKind::gap, n, n);
  p.diagonal = diagonal;

  parallel_for(0, n, f.params.n_threads, [&](size_t i) {
    const auto& s_i = f.oob_trees[i];
    RowAccumulator acc(n);
    if (s_i.empty()) {
      p.row_undefined[i] = 1;
      p.commit_row(i, {});
    } else {
      for (const int32_t t : s_i) {
        const Leaf& leaf = f.trees[t].leaves[assign[t][i]];
        const double inv_m = 1.0 / double(leaf.weight);
        for (size_t k = 0; k < leaf.members.size(); ++k)
          acc.add(leaf.members[k], double(leaf.counts[k]) * inv_m);
      }
      // c_i(t) = 0 on every t ∈ S_i, so the diagonal is already 0.
      p.commit_row(i, acc.drain(1.0 / double(s_i.size())));
    }
    if (diagonal == DiagonalPolicy::duplicate_oob) {
      // Clone of i passed through all T trees with out-of-bag status.
      double self = 0.0;
      for (size_t t = 0; t < n_trees; ++t) {
        const int32_t c_i = f.bootstraps[t].counts[i];
        if (c_i == 0) continue;
        self += double(c_i) / double(f.trees[t].leaves[assign[t][i]].weight);
      }
      p.set(i, i, self / double(n_trees));
    } else if (diagonal == DiagonalPolicy::identity) {
      p.set(i, i, 1.0);
    }
  });
  return p;
}

ProximityMatrix prox_test(const Forest& f, const Dataset& train, const Dataset& test,
                          ProximityKind kind) {
  f.check_routable(train);
  f.check_routable(test);
  RFGAP_REQUIRE(train.n_rows == f.n_rows, "prox_test: train set mismatch");
  const size_t n = f.n_rows;
  const size_t n_trees = f.trees.size();
  const size_t q_rows = test.n_rows;
  const auto assign = leaf_assignments(f, train);

  std::vector<std::vector<int32_t>> test_assign(n_trees);
  parallel_for(0, n_trees, f.params.n_threads, [&](size_t t) {
    test_assign[t].resize(q_rows);
    for (size_t q = 0; q < q_rows; ++q) test_assign[t][q] = f.trees[t].leaf_of(test, q);
  });

  ProximityMatrix p(kind, q_rows, n);
  p.diagonal = kind == ProximityKind::gap ? DiagonalPolicy::zeroed : DiagonalPolicy::identity;

  if (kind == ProximityKind::gap) {
    parallel_for(0, q_rows, f.params.n_threads, [&](size_t q) {
      RowAccumulator acc(n);
      for (size_t t = 0; t < n_trees; ++t) {
        const Leaf& leaf = f.trees[t].leaves[test_assign[t][q]];
        const double inv_m = 1.0 / double(leaf.weight);
        for (size_t k = 0; k < leaf.members.size(); ++k)
          acc.add(leaf.members[k], double(leaf.counts[k]) * inv_m);
      }
      p.commit_row(q, acc.drain(1.0 / double(n_trees)));
    });
    return p;
  }

  if (kind == ProximityKind::original) {
    std::vector<std::vector<std::vector<int32_t>>> buckets(n_trees);
    const auto everyone = all_rows(n);
    for (size_t t = 0; t < n_trees; ++t)
      buckets[t] = bucket_by_leaf(f.trees[t], assign[t], everyone);
    parallel_for(0, q_rows, f.params.n_threads, [&](size_t q) {
      RowAccumulator acc(n);
      for (size_t t = 0; t < n_trees; ++t)
        for (const int32_t j : buckets[t][test_assign[t][q]]) acc.add(j, 1.0);
      p.commit_row(q, acc.drain(1.0 / double(n_trees)));
    });
    return p;
  }

  // OOB kind: a test row counts as out-of-bag in every tree.
  const auto oob_bits = oob_bitsets(f);
  std::vector<size_t> oob_count(n, 0);
  for (size_t j = 0; j < n; ++j)
    for (const uint64_t w : oob_bits[j]) oob_count[j] += size_t(__builtin_popcountll(w));
  std::vector<std::vector<std::vector<int32_t>>> oob_buckets(n_trees);
  for (size_t t = 0; t < n_trees; ++t)
    oob_buckets[t] = bucket_by_leaf(f.trees[t], assign[t], f.bootstraps[t].oob);

  std::vector<std::vector<std::pair<int32_t, int32_t>>> flagged(q_rows);
  parallel_for(0, q_rows, f.params.n_threads, [&](size_t q) {
    std::vector<int32_t> num(n, 0);
    std::vector<int32_t> touched;
    for (size_t t = 0; t < n_trees; ++t) {
      for (const int32_t j : oob_buckets[t][test_assign[t][q]]) {
        if (num[j] == 0) touched.push_back(j);
        ++num[j];
      }
    }
    std::sort(touched.begin(), touched.end());
    std::vector<std::pair<int32_t, double>> entries;
    for (const int32_t j : touched)
      entries.push_back({j, double(num[j]) / double(oob_count[j])});
    p.commit_row(q, entries);
    for (size_t j = 0; j < n; ++j)
      if (oob_count[j] == 0) flagged[q].push_back({int32_t(q), int32_t(j)});
  });
  for (auto& rows : flagged)
    p.undefined_pairs.insert(p.undefined_pairs.end(), rows.begin(), rows.end());
  return p;
}

ProximityMatrix prox_matrix(const Forest& f, const Dataset& train, ProximityKind kind,
                            DiagonalPolicy diagonal) {
  switch (kind) {
    case ProximityKind::original: return prox_original(f, train);
    case ProximityKind::oob: return prox_oob(f, train);
    case ProximityKind::gap: return prox_gap(f, train, diagonal);
  }
  throw InternalError("prox_matrix: bad kind");
}

ProximityMatrix symmetrize(const ProximityMatrix& p) {
  if (!p.is_square()) throw UsageError("symmetrize: matrix is not square");
  const size_t n = p.n_query();
  ProximityMatrix out(p.kind, n, n);
  out.diagonal = p.diagonal;
  out.symmetric = true;
  out.row_undefined = p.row_undefined;
  out.undefined_pairs = p.undefined_pairs;

  if (out.is_dense()) {
    for (size_t i = 0; i < n; ++i) {
      std::vector<std::pair<int32_t, double>> entries;
      for (size_t j = 0; j < n; ++j) {
        const double v = (p.at(i, j) + p.at(j, i)) / 2.0;
        if (v != 0.0) entries.push_back({int32_t(j), v});
      }
      out.commit_row(i, entries);
    }
    return out;
  }

  // Sparse: build transposed row lists once, then merge per row.
  std::vector<std::vector<std::pair<int32_t, double>>> transposed(n);
  for (size_t i = 0; i < n; ++i)
    p.for_each_in_row(i, [&](int32_t j, double v) { transposed[j].push_back({int32_t(i), v}); });

  for (size_t i = 0; i < n; ++i) {
    std::vector<std::pair<int32_t, double>> merged;
    p.for_each_in_row(i, [&](int32_t j, double v) { merged.push_back({j, v / 2.0}); });
    size_t insert_from = merged.size();
    for (const auto& [j, v] : transposed[i]) {
      auto it = std::lower_bound(merged.begin(), merged.begin() + insert_from,
                                 std::pair<int32_t, double>{j, 0.0});
      if (it != merged.begin() + insert_from && it->first == j)
        it->second += v / 2.0;
      else
        merged.push_back({j, v / 2.0});
    }
    std::sort(merged.begin(), merged.end());
    out.commit_row(i, merged);
  }
  return out;
}

double asymmetry_mse(const ProximityMatrix& p) {
  if (!p.is_square()) throw UsageError("asymmetry_mse: matrix is not square");
  const size_t n = p.n_query();
  double total = 0.0;
  if (p.is_dense()) {
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) {
        const double d = p.at(i, j) - p.at(j, i);
        total += d * d;
      }
    return total / double(n * n);
  }
  for (size_t i = 0; i < n; ++i) {
    p.for_each_in_row(i, [&](int32_t j, double v) {
      if (size_t(j) > i) {
        const double d = v - p.at(j, i);
        total += 2.0 * d * d;
      } else if (size_t(j) < i && p.at(j, i) == 0.0) {
        total += 2.0 * v * v;
      }
    });
  }
  return total / double(n * n);
}

}  // namespace rfgap
