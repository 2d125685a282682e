#pragma once

// Brute-force reference implementations for the proximity definitions and the
// forest's OOB aggregation.  Deliberately structured unlike the library code
// (per-pair loops over raw bootstrap records, no bucketing or sparse
// accumulation) so agreement is evidence, not tautology.

#include <cstdint>
#include <vector>

#include "rfgap/dataset.hpp"
#include "rfgap/forest.hpp"
#include "rfgap/prediction.hpp"

namespace rfgap::oracle {

using Matrix = std::vector<std::vector<double>>;  // [n_query][n_train]

// p(i,j) = (1/T) · #{t : leaf_i(t) = leaf_j(t)} over all trees and rows.
Matrix original(const Forest& f, const Dataset& ds);

// p(i,j) = #{t : i,j both OOB, co-leafed} / #{t : i,j both OOB}; 0/0 → 0.
// `undefined` is set per pair (i,j) when the denominator is zero.
Matrix oob(const Forest& f, const Dataset& ds, std::vector<std::vector<uint8_t>>* undefined);

// p(i,j) = (1/|S_i|) Σ_{t∈S_i} c_j(t)·[co-leafed]/|M_i(t)|; zero diagonal.
// When duplicate_diagonal, p(i,i) = (1/T) Σ_t c_i(t)/|M_i(t)| instead.
Matrix gap(const Forest& f, const Dataset& ds, bool duplicate_diagonal);

// Test-side variants (queries OOB in every tree).
Matrix original_test(const Forest& f, const Dataset& train, const Dataset& test);
Matrix oob_test(const Forest& f, const Dataset& train, const Dataset& test,
                std::vector<std::vector<uint8_t>>* undefined);
Matrix gap_test(const Forest& f, const Dataset& train, const Dataset& test);

// Forest OOB aggregation recomputed from bootstrap counts and labels alone
// (leaf statistics re-derived per tree, not read from Leaf).
PredictionVector oob_predict(const Forest& f, const Dataset& ds);

// RMS pointwise distance between two n×d configurations after the optimal
// rigid alignment (translation + rotation/reflection; no scaling).
double procrustes_error(const std::vector<double>& a, const std::vector<double>& b,
                        size_t n, size_t d);

}  // namespace rfgap::oracle
