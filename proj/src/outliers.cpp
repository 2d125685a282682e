#include "rfgap/outliers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rfgap/common.hpp"
#include "rfgap/numeric.hpp"

namespace rfgap {

OutlierResult outlier_scores(const ProximityMatrix& p, const std::vector<int32_t>& y,
                             size_t n_classes) {
  if (!p.is_square()) throw UsageError("outlier_scores: matrix must be square");
  if (!p.symmetric) throw UsageError("outlier_scores: matrix must be symmetrized first");
  const size_t n = p.n_query();
  if (y.size() != n) throw UsageError("outlier_scores: label vector length mismatch");

  std::vector<size_t> class_size(n_classes, 0);
  for (const int32_t c : y) {
    if (c < 0 || size_t(c) >= n_classes)
      throw UsageError("outlier_scores: class code out of range");
    ++class_size[c];
  }
  for (size_t k = 0; k < n_classes; ++k)
    if (class_size[k] == 1)
      throw DataError("outlier_scores: class " + std::to_string(k) + " has a single member");

  OutlierResult out;
  out.raw.assign(n, 0.0);
  out.normalized.assign(n, 0.0);
  out.flagged.assign(n, 0);
  out.class_median.assign(n_classes, 0.0);
  out.class_mad.assign(n_classes, 0.0);

  for (size_t i = 0; i < n; ++i) {
    KahanSum ss;
    p.for_each_in_row(i, [&](int32_t j, double v) {
      if (size_t(j) != i && y[j] == y[i]) ss.add(v * v);
    });
    if (ss.value() > 0.0)
      out.raw[i] = double(n) / ss.value();
    else
      out.flagged[i] = 1;  // no within-class proximity mass: sentinel later
  }

  for (size_t k = 0; k < n_classes; ++k) {
    std::vector<double> finite;
    for (size_t i = 0; i < n; ++i)
      if (size_t(y[i]) == k && !out.flagged[i]) finite.push_back(out.raw[i]);
    if (finite.empty()) continue;  // whole class flagged; scores stay 0

    const double med = median(finite);
    const double mad = mean_abs_deviation(finite, med);
    out.class_median[k] = med;
    out.class_mad[k] = mad;

    double top = -std::numeric_limits<double>::infinity();
    double top_raw = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < n; ++i) {
      if (size_t(y[i]) != k || out.flagged[i]) continue;
      out.normalized[i] = mad > 0.0 ? (out.raw[i] - med) / mad : 0.0;
      top = std::max(top, out.normalized[i]);
      top_raw = std::max(top_raw, out.raw[i]);
    }
    for (size_t i = 0; i < n; ++i)
      if (size_t(y[i]) == k && out.flagged[i]) {
        out.raw[i] = top_raw + 1.0;  // sentinel: strictly above every finite score
        out.normalized[i] = top + 1.0;
      }
  }
  return out;
}

}  // namespace rfgap
