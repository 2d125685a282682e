#pragma once

#include <cstdint>

#include "rfgap/dataset.hpp"

namespace rfgap {

// Two balanced classes over 10 unit-variance normal features: class c0 has
// all means 0; class c1's means are linearly spaced 0..1, giving features a
// gradient of importance.
Dataset synth_gaussian_classes(size_t n_rows, uint64_t seed);

// Two balanced classes in the plane: unit-variance isotropic Gaussians whose
// centers sit `separation` standard deviations apart (Bayes error
// Φ(−separation/2)).
Dataset synth_two_clusters(size_t n_rows, double separation, uint64_t seed);

// Two numeric plus two categorical features (4 and 6 levels) with a
// deterministic label rule; the continuous feature makes duplicate feature
// rows measure-zero, so fully-grown trees can always reach purity.
Dataset synth_mixed(size_t n_rows, uint64_t seed);

// Friedman's first regression benchmark: x0..x9 ~ U(0,1),
// y = 10·sin(π·x0·x1) + 20·(x2 − ½)² + 10·x3 + 5·x4 + N(0,1).
Dataset synth_friedman(size_t n_rows, uint64_t seed);

// Generators by name ("gaussian", "clusters:<sep>", "mixed", "friedman") for
// the CLI; throws UsageError on unknown names.
Dataset synth_by_name(const std::string& name, size_t n_rows, uint64_t seed);

}  // namespace rfgap
