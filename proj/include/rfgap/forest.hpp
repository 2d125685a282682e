#pragma once

#include <cstdint>
#include <vector>

#include "rfgap/dataset.hpp"
#include "rfgap/rng.hpp"

namespace rfgap {

// One tree's bootstrap: counts[j] = multiplicity of row j (sums to N),
// in_bag = {j : counts[j] > 0}, oob = {j : counts[j] = 0}, both ascending.
struct BootstrapRecord {
  std::vector<int32_t> counts;
  std::vector<int32_t> in_bag;
  std::vector<int32_t> oob;
};

BootstrapRecord bootstrap_sample(size_t n_rows, Rng& rng);

struct ForestParams {
  int n_trees = 500;
  int mtry = 0;           // 0 resolves to floor(sqrt(d)) / max(1, floor(d/3))
  int min_node_size = 0;  // 0 resolves to 1 (classification) / 5 (regression)
  Task task = Task::classification;
  uint64_t seed = 0;
  int n_threads = 1;

  int resolved_mtry(size_t n_features) const;
  int resolved_min_node_size() const;
};

struct TreeNode {
  int32_t feature = -1;
  int32_t left = -1;
  int32_t right = -1;
  int32_t leaf_id = -1;           // >= 0 marks a leaf
  double threshold = 0.0;         // numeric split: x <= threshold goes left
  uint64_t left_mask = 0;         // categorical split: codes routed left
  uint64_t seen_mask = 0;         // codes present in the node when split
  bool categorical = false;
  bool unseen_left = false;       // unseen codes follow the heavier child

  bool is_leaf() const { return leaf_id >= 0; }
};

// Leaf statistics over the in-bag multiset: members/counts realize M_i(t),
// weight = |M|, and the vote/mean is multiplicity-weighted.
struct Leaf {
  std::vector<int32_t> members;  // ascending training-row ids with count > 0
  std::vector<int32_t> counts;
  int64_t weight = 0;
  int32_t majority = -1;  // classification; ties resolved to smallest code
  bool majority_tied = false;
  double mean = 0.0;  // regression
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root; may itself be a leaf
  std::vector<Leaf> leaves;
  int depth = 0;

  int32_t leaf_of(const Dataset& ds, size_t row) const;
};

struct Forest {
  ForestParams params;  // resolved values (mtry / min_node_size concrete)
  size_t n_rows = 0;
  size_t n_classes = 0;  // classification only
  uint64_t schema_fp = 0;
  std::vector<Tree> trees;
  std::vector<BootstrapRecord> bootstraps;
  // S_i = trees in which row i is out-of-bag; ascending tree ids.
  std::vector<std::vector<int32_t>> oob_trees;

  Task task() const { return params.task; }
  void check_routable(const Dataset& ds) const;  // fingerprint + missing cells
};

Forest fit_forest(const Dataset& ds, ForestParams params);

Tree fit_tree(const Dataset& ds, const BootstrapRecord& boot, const ForestParams& params,
              Rng& rng);

// Recomputes leaf membership and label statistics by routing the in-bag rows;
// used after deserialization (the file stores only nodes and counts) and by
// the leaf-integrity tests.
void rebuild_leaves(Tree& tree, const Dataset& ds, const BootstrapRecord& boot,
                    const ForestParams& params, size_t n_classes);

// Builds Forest::oob_trees from the bootstrap records.
void index_oob_trees(Forest& f);

}  // namespace rfgap
