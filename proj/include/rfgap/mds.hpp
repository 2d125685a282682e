#pragma once

#include <cstddef>
#include <vector>

#include "rfgap/proximity.hpp"

namespace rfgap {

struct Embedding {
  size_t n = 0;
  size_t dims = 0;                  // columns actually produced (≤ requested)
  std::vector<double> coords;       // row-major n × dims, eigenvalue-descending
  std::vector<double> eigenvalues;  // the retained ones
  double stress = 0.0;              // Kruskal stress-1 against the input D
  bool truncated = false;           // fewer usable eigenvalues than requested

  double coord(size_t i, size_t k) const { return coords[i * dims + k]; }
};

// Classical (Torgerson) MDS of D(i,j) = sqrt(max(0, 1 − p(i,j))), D(i,i)=0:
// double-center B = −½·J·D²·J, take the leading nonnegative eigenpairs,
// coordinates = eigenvectors · sqrt(eigenvalues).
Embedding mds_embed(const ProximityMatrix& p, int dims);

// Same on an explicit distance matrix (row-major n×n, symmetric, zero
// diagonal) — also the entry point the geometry tests drive directly.
Embedding mds_from_distances(const std::vector<double>& dist, size_t n, int dims);

}  // namespace rfgap
