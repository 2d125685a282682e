#include "rfgap/impute.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rfgap/common.hpp"
#include "rfgap/numeric.hpp"

namespace rfgap {

namespace {

// Unit scaler fitted on the *reconstructed original* column — observed values
// plus the held-back originals — so the trace is comparable across iterations
// and against the truth.
struct MseScaler {
  std::vector<double> lo, span;

  MseScaler(const Dataset& ds, const MissingnessRecord& record) {
    lo.assign(ds.n_features(), 0.0);
    span.assign(ds.n_features(), 0.0);
    std::vector<double> hi(ds.n_features(), -std::numeric_limits<double>::infinity());
    std::vector<double> min(ds.n_features(), std::numeric_limits<double>::infinity());
    for (size_t c = 0; c < ds.n_features(); ++c) {
      const auto& fc = ds.features[c];
      if (fc.kind != ColumnKind::numeric) continue;
      for (size_t r = 0; r < ds.n_rows; ++r) {
        if (fc.is_missing(r)) continue;
        min[c] = std::min(min[c], fc.values[r]);
        hi[c] = std::max(hi[c], fc.values[r]);
      }
    }
    for (const auto& cell : record.cells) {
      if (ds.features[cell.col].kind != ColumnKind::numeric) continue;
      min[cell.col] = std::min(min[cell.col], cell.value);
      hi[cell.col] = std::max(hi[cell.col], cell.value);
    }
    for (size_t c = 0; c < ds.n_features(); ++c) {
      if (min[c] <= hi[c]) {
        lo[c] = min[c];
        span[c] = hi[c] - min[c];
      }
    }
  }

  double mse(const Dataset& current, const MissingnessRecord& record) const {
    KahanSum sum;
    size_t cells = 0;
    for (const auto& cell : record.cells) {
      const auto& fc = current.features[cell.col];
      if (fc.kind != ColumnKind::numeric) continue;
      ++cells;
      if (span[cell.col] <= 0.0) continue;  // constant column: exact by definition
      const double d = (fc.values[cell.row] - cell.value) / span[cell.col];
      sum.add(d * d);
    }
    return cells ? sum.value() / double(cells) : 0.0;
  }
};

}  // namespace

ImputationRunResult impute(const Dataset& with_missing, const MissingnessRecord& record,
                           ProximityKind kind, ForestParams params, int iterations) {
  if (iterations < 1) throw UsageError("impute: iterations must be >= 1");
  for (const auto& cell : record.cells) {
    if (cell.col < 0 || size_t(cell.col) >= with_missing.n_features() || cell.row < 0 ||
        size_t(cell.row) >= with_missing.n_rows)
      throw DataError("impute: record cell out of range");
    if (!with_missing.features[cell.col].is_missing(cell.row))
      throw DataError("impute: record lists a cell that is not missing");
  }

  ImputationRunResult result;
  result.kind = kind;
  result.iterations = iterations;

  if (!with_missing.has_missing()) {
    result.imputed = with_missing;
    result.mse_trace.assign(size_t(iterations) + 1, 0.0);
    return result;
  }

  const MseScaler scaler(with_missing, record);
  Dataset cur = initialize_impute(with_missing);
  result.mse_trace.push_back(scaler.mse(cur, record));

  for (int it = 1; it <= iterations; ++it) {
    const Forest f = fit_forest(cur, params);
    const ProximityMatrix p = symmetrize(
        kind == ProximityKind::gap ? prox_gap(f, cur, DiagonalPolicy::duplicate_oob)
                                   : prox_matrix(f, cur, kind));

    for (size_t c = 0; c < cur.n_features(); ++c) {
      auto& fc = cur.features[c];
      if (fc.originally_missing.empty()) continue;
      // Donors: rows originally observed in this column.  A missing cell's
      // own row is never a donor for it, so the diagonal cannot leak back.
      for (size_t i = 0; i < cur.n_rows; ++i) {
        if (!fc.was_missing(i)) continue;
        if (fc.kind == ColumnKind::numeric) {
          KahanSum weighted, total;
          p.for_each_in_row(i, [&](int32_t j, double w) {
            if (fc.was_missing(j)) return;
            weighted.add(w * fc.values[j]);
            total.add(w);
          });
          if (total.value() > 0.0) fc.values[i] = weighted.value() / total.value();
        } else {
          std::vector<double> scores(fc.n_categories(), 0.0);
          bool any = false;
          p.for_each_in_row(i, [&](int32_t j, double w) {
            if (fc.was_missing(j)) return;
            scores[fc.codes[j]] += w;
            any = true;
          });
          if (!any) continue;
          size_t best = 0;
          for (size_t k = 1; k < scores.size(); ++k)
            if (scores[k] > scores[best]) best = k;  // ties keep the smaller code
          fc.codes[i] = int32_t(best);
        }
      }
    }
    result.mse_trace.push_back(scaler.mse(cur, record));
  }

  result.imputed = std::move(cur);
  return result;
}

}  // namespace rfgap
