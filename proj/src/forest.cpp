#include "rfgap/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rfgap/common.hpp"
#include "rfgap/parallel.hpp"

namespace rfgap {

namespace {

using i128 = __int128;

// Candidate split statistics.  Classification scores are compared in exact
// integer arithmetic (weights are bootstrap multiplicities, hence integers):
// the children score SSl/Wl + SSr/Wr with SS = Σ_k (class weight)² is ranked
// by cross-multiplication, which removes any float-epsilon ambiguity from
// split selection and makes purity arguments airtight.
struct Candidate {
  int64_t wl = 0, wr = 0;
  int64_t ssl = 0, ssr = 0;  // classification: Σ_k weight², left/right
  double score = 0.0;        // regression: suml²/wl + sumr²/wr
};

bool cls_better(const Candidate& a, const Candidate& b) {
  const i128 lhs = (i128(a.ssl) * a.wr + i128(a.ssr) * a.wl) * (i128(b.wl) * b.wr);
  const i128 rhs = (i128(b.ssl) * b.wr + i128(b.ssr) * b.wl) * (i128(a.wl) * a.wr);
  return lhs > rhs;
}

// Gini decrease > 0  ⟺  SSl/Wl + SSr/Wr > SSp/Wp.
bool cls_positive(const Candidate& a, int64_t ssp, int64_t wp) {
  const i128 lhs = (i128(a.ssl) * a.wr + i128(a.ssr) * a.wl) * wp;
  const i128 rhs = i128(ssp) * a.wl * a.wr;
  return lhs > rhs;
}

struct SplitChoice {
  bool found = false;
  int32_t feature = -1;
  bool categorical = false;
  double threshold = 0.0;
  uint64_t left_mask = 0;
  uint64_t seen_mask = 0;
  bool unseen_left = false;
  Candidate cand;
};

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& ds, const BootstrapRecord& boot, const ForestParams& params,
              Rng& rng)
      : ds_(ds),
        boot_(boot),
        rng_(rng),
        classification_(params.task == Task::classification),
        n_classes_(classification_ ? ds.n_classes() : 0),
        mtry_(params.resolved_mtry(ds.n_features())),
        min_node_(params.resolved_min_node_size()) {}

  Tree build() {
    rows_ = boot_.in_bag;  // each distinct in-bag row once; weight = counts
    scratch_.resize(rows_.size());

    Tree tree;
    struct Work {
      int32_t node;
      int32_t begin, end;
      int depth;
    };
    std::vector<Work> stack;
    tree.nodes.emplace_back();
    stack.push_back({0, 0, int32_t(rows_.size()), 0});

    while (!stack.empty()) {
      const Work w = stack.back();
      stack.pop_back();
      tree.depth = std::max(tree.depth, w.depth);

      const NodeStats stats = node_stats(w.begin, w.end);
      if (should_stop(stats)) {
        make_leaf(tree, w.node, w.begin, w.end, stats);
        continue;
      }
      const SplitChoice split = find_split(w.begin, w.end, stats);
      if (!split.found) {
        make_leaf(tree, w.node, w.begin, w.end, stats);
        continue;
      }

      const int32_t mid = partition(w.begin, w.end, split);
      auto& node = tree.nodes[w.node];
      node.feature = split.feature;
      node.categorical = split.categorical;
      node.threshold = split.threshold;
      node.left_mask = split.left_mask;
      node.seen_mask = split.seen_mask;
      node.unseen_left = split.unseen_left;
      node.left = int32_t(tree.nodes.size());
      node.right = node.left + 1;
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      const auto& fixed = tree.nodes[w.node];  // emplace may reallocate
      stack.push_back({fixed.right, mid, w.end, w.depth + 1});
      stack.push_back({fixed.left, w.begin, mid, w.depth + 1});
    }
    return tree;
  }

 private:
  struct NodeStats {
    int64_t weight = 0;
    std::vector<int64_t> class_w;  // classification
    int64_t ss = 0;                // Σ class_w² (classification)
    double sum = 0.0, sumsq = 0.0; // Σ c·y, Σ c·y² (regression)
    bool pure = false;
  };

  NodeStats node_stats(int32_t begin, int32_t end) const {
    NodeStats s;
    if (classification_) {
      s.class_w.assign(n_classes_, 0);
      for (int32_t i = begin; i < end; ++i) {
        const int32_t row = rows_[i];
        const int64_t c = boot_.counts[row];
        s.class_w[ds_.y_class[row]] += c;
        s.weight += c;
      }
      int present = 0;
      for (int64_t w : s.class_w) {
        s.ss += w * w;
        present += (w > 0);
      }
      s.pure = present <= 1;
    } else {
      for (int32_t i = begin; i < end; ++i) {
        const int32_t row = rows_[i];
        const double c = double(boot_.counts[row]);
        const double y = ds_.y_real[row];
        s.weight += boot_.counts[row];
        s.sum += c * y;
        s.sumsq += c * y * y;
      }
      const double sse = s.sumsq - s.sum * s.sum / double(s.weight);
      s.pure = sse <= 1e-12 * std::max(s.sumsq, 1e-300);
    }
    return s;
  }

  bool should_stop(const NodeStats& s) const {
    return s.pure || s.weight <= min_node_;
  }

  SplitChoice find_split(int32_t begin, int32_t end, const NodeStats& stats) {
    perm_.resize(ds_.n_features());
    std::iota(perm_.begin(), perm_.end(), 0);
    rng_.shuffle(perm_);

    SplitChoice best;
    int considered = 0;
    for (const int32_t f : perm_) {
      if (considered >= mtry_) {
        // Classification trees must reach purity (vote equivalence depends
        // on it), so an impure node that found nothing among its mtry draw
        // keeps scanning the permutation.  Regression stops at mtry.
        if (!classification_ || best.found) break;
      }
      if (ds_.features[f].kind == ColumnKind::numeric)
        eval_numeric(f, begin, end, stats, best);
      else
        eval_categorical(f, begin, end, stats, best);
      ++considered;
    }
    return best;
  }

  // Accept `cand` if its decrease is positive and it beats the incumbent.
  void consider(const Candidate& cand, const NodeStats& stats, SplitChoice& best,
                int32_t feature, bool categorical, double threshold, uint64_t left_mask,
                uint64_t seen_mask, bool unseen_left) const {
    if (classification_) {
      if (!cls_positive(cand, stats.ss, stats.weight)) return;
      if (best.found && !cls_better(cand, best.cand)) return;
    } else {
      const double parent = stats.sum * stats.sum / double(stats.weight);
      const double guard = 1e-12 * std::max(stats.sumsq, 1e-300);
      if (!(cand.score > parent + guard)) return;
      if (best.found && !(cand.score > best.cand.score)) return;
    }
    best.found = true;
    best.feature = feature;
    best.categorical = categorical;
    best.threshold = threshold;
    best.left_mask = left_mask;
    best.seen_mask = seen_mask;
    best.unseen_left = unseen_left;
    best.cand = cand;
  }

  void eval_numeric(int32_t f, int32_t begin, int32_t end, const NodeStats& stats,
                    SplitChoice& best) {
    const auto& values = ds_.features[f].values;
    vals_.clear();
    for (int32_t i = begin; i < end; ++i) vals_.push_back({values[rows_[i]], rows_[i]});
    std::sort(vals_.begin(), vals_.end());
    if (vals_.front().first == vals_.back().first) return;  // constant in node

    if (classification_) {
      left_w_.assign(n_classes_, 0);
      Candidate c;
      c.wr = stats.weight;
      c.ssr = stats.ss;
      for (size_t i = 0; i + 1 < vals_.size(); ++i) {
        const int32_t row = vals_[i].second;
        const int64_t cnt = boot_.counts[row];
        const int32_t cls = ds_.y_class[row];
        int64_t& w = left_w_[cls];
        // Moving `cnt` of class `cls` left: (w+cnt)²−w² and (r−cnt)²−r².
        c.ssl += cnt * (2 * w + cnt);
        c.ssr += cnt * (cnt - 2 * (stats.class_w[cls] - w));
        w += cnt;
        c.wl += cnt;
        c.wr -= cnt;
        if (vals_[i + 1].first != vals_[i].first) {
          const double lo = vals_[i].first;
          consider(c, stats, best, f, false, lo + (vals_[i + 1].first - lo) / 2, 0, 0,
                   false);
        }
      }
    } else {
      Candidate c;
      double suml = 0.0;
      int64_t wl = 0;
      for (size_t i = 0; i + 1 < vals_.size(); ++i) {
        const int32_t row = vals_[i].second;
        const double cnt = double(boot_.counts[row]);
        suml += cnt * ds_.y_real[row];
        wl += boot_.counts[row];
        if (vals_[i + 1].first != vals_[i].first) {
          const int64_t wr = stats.weight - wl;
          const double sumr = stats.sum - suml;
          c.wl = wl;
          c.wr = wr;
          c.score = suml * suml / double(wl) + sumr * sumr / double(wr);
          const double lo = vals_[i].first;
          consider(c, stats, best, f, false, lo + (vals_[i + 1].first - lo) / 2, 0, 0,
                   false);
        }
      }
    }
  }

  void eval_categorical(int32_t f, int32_t begin, int32_t end, const NodeStats& stats,
                        SplitChoice& best) {
    const auto& codes = ds_.features[f].codes;
    // Tally weight (and class weights / label sums) per category present.
    int32_t index_of[kMaxCategories];
    std::fill(std::begin(index_of), std::end(index_of), int32_t(-1));
    present_.clear();
    cat_w_.clear();
    cat_cls_.clear();
    cat_sum_.clear();
    for (int32_t i = begin; i < end; ++i) {
      const int32_t row = rows_[i];
      const int32_t code = codes[row];
      int32_t k = index_of[code];
      if (k < 0) {
        k = int32_t(present_.size());
        index_of[code] = k;
        present_.push_back(code);
        cat_w_.push_back(0);
        cat_sum_.push_back(0.0);
        if (classification_) cat_cls_.insert(cat_cls_.end(), n_classes_, 0);
      }
      const int64_t cnt = boot_.counts[row];
      cat_w_[k] += cnt;
      if (classification_)
        cat_cls_[size_t(k) * n_classes_ + ds_.y_class[row]] += cnt;
      else
        cat_sum_[k] += double(cnt) * ds_.y_real[row];
    }
    const size_t kp = present_.size();
    if (kp < 2) return;

    // Present codes in ascending order so candidate enumeration is stable.
    order_.resize(kp);
    std::iota(order_.begin(), order_.end(), 0);
    std::sort(order_.begin(), order_.end(),
              [&](int32_t a, int32_t b) { return present_[a] < present_[b]; });

    uint64_t seen = 0;
    for (const int32_t code : present_) seen |= 1ULL << code;

    auto try_mask = [&](uint64_t member_bits) {
      // member_bits indexes `order_`; bit i set = category order_[i] left.
      Candidate c;
      uint64_t left_mask = 0;
      double suml = 0.0;
      left_w_.assign(classification_ ? n_classes_ : 0, 0);
      for (size_t i = 0; i < kp; ++i) {
        if (!(member_bits & (1ULL << i))) continue;
        const int32_t k = order_[i];
        left_mask |= 1ULL << present_[k];
        c.wl += cat_w_[k];
        if (classification_)
          for (size_t cls = 0; cls < n_classes_; ++cls)
            left_w_[cls] += cat_cls_[size_t(k) * n_classes_ + cls];
        else
          suml += cat_sum_[k];
      }
      c.wr = stats.weight - c.wl;
      if (c.wl == 0 || c.wr == 0) return;
      if (classification_) {
        for (size_t cls = 0; cls < n_classes_; ++cls) {
          const int64_t l = left_w_[cls];
          const int64_t r = stats.class_w[cls] - l;
          c.ssl += l * l;
          c.ssr += r * r;
        }
      } else {
        const double sumr = stats.sum - suml;
        c.score = suml * suml / double(c.wl) + sumr * sumr / double(c.wr);
      }
      consider(c, stats, best, f, true, 0.0, left_mask, seen, c.wl > c.wr);
    };

    if (kp <= 10) {
      // All binary partitions; the highest-ordered category stays right, so
      // each unordered partition is enumerated exactly once.
      for (uint64_t mask = 1; mask < (1ULL << (kp - 1)); ++mask) try_mask(mask);
    } else {
      for (size_t i = 0; i < kp; ++i) try_mask(1ULL << i);  // one-vs-rest
    }
  }

  int32_t partition(int32_t begin, int32_t end, const SplitChoice& split) {
    const auto& fc = ds_.features[split.feature];
    auto goes_left = [&](int32_t row) {
      if (split.categorical) return (split.left_mask & (1ULL << fc.codes[row])) != 0;
      return fc.values[row] <= split.threshold;
    };
    int32_t out = 0;
    for (int32_t i = begin; i < end; ++i)
      if (goes_left(rows_[i])) scratch_[out++] = rows_[i];
    const int32_t mid = begin + out;
    for (int32_t i = begin; i < end; ++i)
      if (!goes_left(rows_[i])) scratch_[out++] = rows_[i];
    std::copy(scratch_.begin(), scratch_.begin() + out, rows_.begin() + begin);
    return mid;
  }

  void make_leaf(Tree& tree, int32_t node, int32_t begin, int32_t end,
                 const NodeStats& stats) {
    tree.nodes[node].leaf_id = int32_t(tree.leaves.size());
    Leaf leaf;
    leaf.members.assign(rows_.begin() + begin, rows_.begin() + end);
    std::sort(leaf.members.begin(), leaf.members.end());
    leaf.counts.reserve(leaf.members.size());
    for (const int32_t row : leaf.members) leaf.counts.push_back(boot_.counts[row]);
    leaf.weight = stats.weight;
    if (classification_) {
      int32_t argmax = 0;
      for (size_t k = 1; k < n_classes_; ++k)
        if (stats.class_w[k] > stats.class_w[argmax]) argmax = int32_t(k);
      leaf.majority = argmax;
      for (size_t k = 0; k < n_classes_; ++k)
        if (int32_t(k) != argmax && stats.class_w[k] == stats.class_w[argmax])
          leaf.majority_tied = true;
    } else {
      // Summed in ascending member order so rebuild_leaves reproduces the
      // exact same double after deserialization.
      double sum = 0.0;
      for (size_t i = 0; i < leaf.members.size(); ++i)
        sum += double(leaf.counts[i]) * ds_.y_real[leaf.members[i]];
      leaf.mean = sum / double(stats.weight);
    }
    tree.leaves.push_back(std::move(leaf));
  }

  const Dataset& ds_;
  const BootstrapRecord& boot_;
  Rng& rng_;
  const bool classification_;
  const size_t n_classes_;
  const int mtry_;
  const int64_t min_node_;

  std::vector<int32_t> rows_;
  std::vector<int32_t> scratch_;
  std::vector<int32_t> perm_;
  std::vector<std::pair<double, int32_t>> vals_;
  std::vector<int64_t> left_w_;
  std::vector<int32_t> present_;
  std::vector<int32_t> order_;
  std::vector<int64_t> cat_w_;
  std::vector<int64_t> cat_cls_;
  std::vector<double> cat_sum_;
};

}  // namespace

BootstrapRecord bootstrap_sample(size_t n_rows, Rng& rng) {
  RFGAP_REQUIRE(n_rows >= 1, "bootstrap_sample: empty dataset");
  BootstrapRecord b;
  b.counts.assign(n_rows, 0);
  for (size_t i = 0; i < n_rows; ++i) ++b.counts[rng.uniform_below(uint32_t(n_rows))];
  for (size_t j = 0; j < n_rows; ++j)
    (b.counts[j] > 0 ? b.in_bag : b.oob).push_back(int32_t(j));
  return b;
}

int ForestParams::resolved_mtry(size_t n_features) const {
  if (mtry > 0) return std::min<int>(mtry, int(n_features));
  if (task == Task::classification)
    return std::max(1, int(std::floor(std::sqrt(double(n_features)))));
  return std::max(1, int(n_features / 3));
}

int ForestParams::resolved_min_node_size() const {
  if (min_node_size > 0) return min_node_size;
  return task == Task::classification ? 1 : 5;
}

int32_t Tree::leaf_of(const Dataset& ds, size_t row) const {
  const TreeNode* n = &nodes[0];
  while (!n->is_leaf()) {
    const auto& fc = ds.features[n->feature];
    bool left;
    if (n->categorical) {
      const int32_t code = fc.codes[row];
      const uint64_t bit = 1ULL << code;
      left = (n->seen_mask & bit) ? (n->left_mask & bit) != 0 : n->unseen_left;
    } else {
      left = fc.values[row] <= n->threshold;
    }
    n = &nodes[left ? n->left : n->right];
  }
  return n->leaf_id;
}

void Forest::check_routable(const Dataset& ds) const {
  if (ds.schema_fingerprint() != schema_fp)
    throw DataError("dataset schema does not match the forest's training schema");
  if (ds.has_missing())
    throw DataError("dataset contains missing feature cells; impute before routing");
}

Tree fit_tree(const Dataset& ds, const BootstrapRecord& boot, const ForestParams& params,
              Rng& rng) {
  RFGAP_REQUIRE(boot.counts.size() == ds.n_rows, "fit_tree: bootstrap size mismatch");
  TreeBuilder builder(ds, boot, params, rng);
  return builder.build();
}

Forest fit_forest(const Dataset& ds, ForestParams params) {
  params.task = ds.task;
  if (params.n_trees < 1) throw UsageError("n_trees must be >= 1");
  if (params.mtry < 0 || size_t(params.mtry) > ds.n_features())
    throw UsageError("mtry must lie in [1, n_features] (0 = default)");
  if (params.min_node_size < 0) throw UsageError("min_node_size must be >= 1 (0 = default)");
  if (ds.has_missing())
    throw DataError("fit_forest: dataset contains missing feature cells; impute first");
  params.mtry = params.resolved_mtry(ds.n_features());
  params.min_node_size = params.resolved_min_node_size();

  Forest f;
  f.params = params;
  f.n_rows = ds.n_rows;
  f.n_classes = ds.task == Task::classification ? ds.n_classes() : 0;
  f.schema_fp = ds.schema_fingerprint();
  f.trees.resize(params.n_trees);
  f.bootstraps.resize(params.n_trees);

  parallel_for(0, size_t(params.n_trees), params.n_threads, [&](size_t t) {
    Rng rng = Rng::stream(params.seed, t);
    f.bootstraps[t] = bootstrap_sample(ds.n_rows, rng);
    f.trees[t] = fit_tree(ds, f.bootstraps[t], params, rng);
  });

  index_oob_trees(f);
  return f;
}

void rebuild_leaves(Tree& tree, const Dataset& ds, const BootstrapRecord& boot,
                    const ForestParams& params, size_t n_classes) {
  int32_t max_leaf = -1;
  for (const auto& n : tree.nodes) max_leaf = std::max(max_leaf, n.leaf_id);
  tree.leaves.assign(size_t(max_leaf) + 1, Leaf{});

  for (const int32_t row : boot.in_bag) {
    Leaf& leaf = tree.leaves[tree.leaf_of(ds, row)];
    leaf.members.push_back(row);
    leaf.counts.push_back(boot.counts[row]);
    leaf.weight += boot.counts[row];
  }

  std::vector<int64_t> class_w;
  for (auto& leaf : tree.leaves) {
    RFGAP_REQUIRE(!leaf.members.empty(), "rebuild_leaves: leaf with no in-bag members");
    if (params.task == Task::classification) {
      class_w.assign(n_classes, 0);
      for (size_t i = 0; i < leaf.members.size(); ++i)
        class_w[ds.y_class[leaf.members[i]]] += leaf.counts[i];
      int32_t argmax = 0;
      for (size_t k = 1; k < n_classes; ++k)
        if (class_w[k] > class_w[argmax]) argmax = int32_t(k);
      leaf.majority = argmax;
      leaf.majority_tied = false;
      for (size_t k = 0; k < n_classes; ++k)
        if (int32_t(k) != argmax && class_w[k] == class_w[argmax]) leaf.majority_tied = true;
    } else {
      double sum = 0.0;
      for (size_t i = 0; i < leaf.members.size(); ++i)
        sum += double(leaf.counts[i]) * ds.y_real[leaf.members[i]];
      leaf.mean = sum / double(leaf.weight);
    }
  }
}

void index_oob_trees(Forest& f) {
  f.oob_trees.assign(f.n_rows, {});
  for (size_t t = 0; t < f.bootstraps.size(); ++t)
    for (const int32_t row : f.bootstraps[t].oob) f.oob_trees[row].push_back(int32_t(t));
}

}  // namespace rfgap
