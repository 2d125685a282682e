#pragma once

#include <vector>

#include "rfgap/dataset.hpp"
#include "rfgap/forest.hpp"
#include "rfgap/proximity.hpp"

namespace rfgap {

struct ImputationRunResult {
  // Length iterations+1; index 0 is the median/mode fill (unit-scaled MSE
  // over the masked numeric cells in the record).
  std::vector<double> mse_trace;
  Dataset imputed;
  int iterations = 0;
  ProximityKind kind = ProximityKind::gap;
};

// Iterative proximity-weighted imputation: median/mode initialization, then
// per iteration fit a forest on the current fill, build the symmetrized
// kind-proximity (duplicate-oob diagonal for GAP), and replace each
// originally-missing cell with the proximity-weighted sum (numeric) or
// weighted majority (categorical) over donors that were originally observed
// in that column.  Observed cells are never altered.
ImputationRunResult impute(const Dataset& with_missing, const MissingnessRecord& record,
                           ProximityKind kind, ForestParams params, int iterations);

}  // namespace rfgap
