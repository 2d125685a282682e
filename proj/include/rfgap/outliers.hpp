#pragma once

#include <cstdint>
#include <vector>

#include "rfgap/proximity.hpp"

namespace rfgap {

struct OutlierResult {
  std::vector<double> raw;         // n / Σ_{j in class(i), j≠i} p(i,j)²
  std::vector<double> normalized;  // (raw − class median) / class MAD
  std::vector<double> class_median;
  std::vector<double> class_mad;   // mean absolute deviation from the median
  std::vector<uint8_t> flagged;    // zero within-class proximity mass
};

// Within-class outlier scores from a symmetrized proximity matrix.  Rows
// whose within-class proximities are all zero get a sentinel score (largest
// finite normalized score in their class plus one) and are flagged.  A class
// with MAD = 0 yields all-zero normalized scores.
OutlierResult outlier_scores(const ProximityMatrix& p, const std::vector<int32_t>& y,
                             size_t n_classes);

}  // namespace rfgap
