#pragma once

#include <string>
#include <vector>

#include "rfgap/forest.hpp"
#include "rfgap/impute.hpp"
#include "rfgap/mds.hpp"
#include "rfgap/outliers.hpp"
#include "rfgap/proximity.hpp"

namespace rfgap {

inline constexpr const char* kVersion = "rfgap-0.1.0";

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

// Forest file: JSON-lines.  First line is a header object (format tag,
// version, resolved params, row/class counts, schema fingerprint); each
// following line is one tree {nodes, counts}.  Leaf statistics are not
// stored — they are rebuilt from the bootstrap counts on load.
void forest_save(const Forest& f, const std::string& path);

// Throws DataError when the file does not match the format or when the
// dataset's schema fingerprint differs from the stored one.
Forest forest_load(const std::string& path, const Dataset& ds);

// Feature columns then target, header included; numeric cells in shortest
// round-trip form, missing cells empty.  Loading the file back yields a
// dataset with the identical schema fingerprint.
void write_dataset_csv(const Dataset& ds, const std::string& path);

// Dense: header `row,<id0>,<id1>,...`, one CSV row per query row.
// Sparse: header `i,j,value`, nonzeros only, row-major then column order.
void write_matrix_csv(const ProximityMatrix& p, const std::string& path, bool sparse);

// Header `row_id,dim1..dimd`.
void write_embedding_csv(const Embedding& e, const std::string& path);

// Header `row_id,class,raw,normalized,flag` (class as the dataset label).
void write_outliers_csv(const OutlierResult& r, const Dataset& ds, const std::string& path);

// Header `iteration,kind,seed,mse`; one row per run per iteration >= 1 (the
// shared iteration-0 fill MSE belongs in the run's JSON sidecar).
void write_trace_csv(const std::vector<ImputationRunResult>& runs, uint64_t seed,
                     const std::string& path);

}  // namespace rfgap
