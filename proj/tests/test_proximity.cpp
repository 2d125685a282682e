#include <cmath>
#include <set>
#include <utility>

#include "doctest.h"
#include "rfgap/common.hpp"
#include "rfgap/dataset.hpp"
#include "rfgap/forest.hpp"
#include "rfgap/numeric.hpp"
#include "rfgap/proximity.hpp"
#include "rfgap/synthetic.hpp"
#include "support/oracles.hpp"

using namespace rfgap;

namespace {

Forest small_forest(const Dataset& ds, uint64_t seed, int trees = 25) {
  ForestParams p;
  p.n_trees = trees;
  p.seed = seed;
  return fit_forest(ds, p);
}

void check_against(const ProximityMatrix& got, const oracle::Matrix& want, double tol) {
  REQUIRE(got.n_query() == want.size());
  for (size_t i = 0; i < got.n_query(); ++i) {
    std::vector<double> row(got.n_train(), 0.0);
    got.for_each_in_row(i, [&](int32_t j, double v) { row[j] = v; });
    for (size_t j = 0; j < got.n_train(); ++j) {
      INFO("entry (", i, ",", j, ")");
      CHECK(std::abs(row[j] - want[i][j]) <= tol);
    }
  }
}

}  // namespace

TEST_CASE("all three definitions match their brute-force oracles") {
  for (const uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
    const Dataset cls = synth_mixed(40, seed);
    const Dataset reg = synth_friedman(35, seed);
    for (const Dataset* ds : {&cls, &reg}) {
      const Forest f = small_forest(*ds, seed);

      check_against(prox_original(f, *ds), oracle::original(f, *ds), 1e-12);

      std::vector<std::vector<uint8_t>> undef;
      check_against(prox_oob(f, *ds), oracle::oob(f, *ds, &undef), 1e-12);

      check_against(prox_gap(f, *ds, DiagonalPolicy::zeroed),
                    oracle::gap(f, *ds, false), 1e-12);
      check_against(prox_gap(f, *ds, DiagonalPolicy::duplicate_oob),
                    oracle::gap(f, *ds, true), 1e-12);
    }
  }
}

TEST_CASE("oob: undefined pairs match the oracle's zero denominators") {
  const Dataset ds = synth_mixed(30, 6);
  const Forest f = small_forest(ds, 6, 8);  // few trees → some pairs never co-OOB
  const ProximityMatrix p = prox_oob(f, ds);
  std::vector<std::vector<uint8_t>> undef;
  oracle::oob(f, ds, &undef);

  std::set<std::pair<int32_t, int32_t>> got(p.undefined_pairs.begin(),
                                            p.undefined_pairs.end());
  size_t expected = 0;
  for (size_t i = 0; i < ds.n_rows; ++i)
    for (size_t j = i + 1; j < ds.n_rows; ++j)
      if (undef[i][j]) {
        ++expected;
        CHECK(got.count({int32_t(i), int32_t(j)}) == 1);
      }
  CHECK(got.size() == expected);
}

TEST_CASE("structural invariants: symmetry, diagonals, row sums") {
  const Dataset ds = synth_gaussian_classes(60, 2);
  const Forest f = small_forest(ds, 9, 40);

  const ProximityMatrix orig = prox_original(f, ds);
  const ProximityMatrix oobm = prox_oob(f, ds);
  const ProximityMatrix gap = prox_gap(f, ds, DiagonalPolicy::zeroed);

  CHECK(orig.symmetric);
  CHECK(oobm.symmetric);
  CHECK_FALSE(gap.symmetric);

  for (size_t i = 0; i < ds.n_rows; ++i) {
    CHECK(orig.at(i, i) == 1.0);
    CHECK(gap.at(i, i) == 0.0);
    if (!oobm.row_undefined[i]) CHECK(oobm.at(i, i) == 1.0);
    for (size_t j = 0; j < ds.n_rows; ++j) {
      CHECK(orig.at(i, j) == orig.at(j, i));
      CHECK(oobm.at(i, j) == oobm.at(j, i));
      CHECK(orig.at(i, j) >= 0.0);
      CHECK(gap.at(i, j) >= 0.0);
    }
    if (!gap.row_undefined[i])
      CHECK(gap.row_sum(i) == doctest::Approx(1.0).epsilon(1e-12));
  }

  const ProximityMatrix dup = prox_gap(f, ds, DiagonalPolicy::duplicate_oob);
  const ProximityMatrix idn = prox_gap(f, ds, DiagonalPolicy::identity);
  for (size_t i = 0; i < ds.n_rows; ++i) {
    CHECK(dup.at(i, i) > 0.0);
    CHECK(idn.at(i, i) == 1.0);
    for (size_t j = 0; j < ds.n_rows; ++j)
      if (i != j) {
        CHECK(dup.at(i, j) == gap.at(i, j));
        CHECK(idn.at(i, j) == gap.at(i, j));
      }
  }
}

TEST_CASE("single tree: in-bag rows have no judging trees") {
  const Dataset ds = synth_mixed(25, 3);
  const Forest f = small_forest(ds, 4, 1);
  const ProximityMatrix gap = prox_gap(f, ds, DiagonalPolicy::zeroed);
  for (size_t i = 0; i < ds.n_rows; ++i) {
    const bool in_bag = f.bootstraps[0].counts[i] > 0;
    CHECK(gap.row_undefined[i] == (in_bag ? 1 : 0));
    if (in_bag) CHECK(gap.row_sum(i) == 0.0);
  }
}

TEST_CASE("test-side proximities match their oracles and sum to 1 for gap") {
  const Dataset ds = synth_mixed(45, 8);
  const Split sp = stratified_split(ds, 0.7, 8);
  const Forest f = small_forest(sp.train, 8);

  check_against(prox_test(f, sp.train, sp.test, ProximityKind::gap),
                oracle::gap_test(f, sp.train, sp.test), 1e-12);
  check_against(prox_test(f, sp.train, sp.test, ProximityKind::original),
                oracle::original_test(f, sp.train, sp.test), 1e-12);
  std::vector<std::vector<uint8_t>> undef;
  check_against(prox_test(f, sp.train, sp.test, ProximityKind::oob),
                oracle::oob_test(f, sp.train, sp.test, &undef), 1e-12);

  const ProximityMatrix g = prox_test(f, sp.train, sp.test, ProximityKind::gap);
  for (size_t q = 0; q < sp.test.n_rows; ++q)
    CHECK(g.row_sum(q) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sparse storage agrees with the oracle on sampled rows") {
  const Dataset ds = synth_gaussian_classes(2100, 4);  // above the dense limit
  const Forest f = small_forest(ds, 5, 12);
  const ProximityMatrix p = prox_gap(f, ds, DiagonalPolicy::zeroed);
  CHECK_FALSE(p.is_dense());

  // Row-level oracle, recomputed directly for a handful of rows.
  for (const size_t i : {size_t(0), size_t(977), size_t(2099)}) {
    std::vector<double> want(ds.n_rows, 0.0);
    size_t s_i = 0;
    for (size_t t = 0; t < f.trees.size(); ++t) {
      if (f.bootstraps[t].counts[i] != 0) continue;
      ++s_i;
      const int32_t leaf = f.trees[t].leaf_of(ds, i);
      int64_t m = 0;
      for (size_t k = 0; k < ds.n_rows; ++k)
        if (f.bootstraps[t].counts[k] > 0 && f.trees[t].leaf_of(ds, k) == leaf)
          m += f.bootstraps[t].counts[k];
      for (size_t j = 0; j < ds.n_rows; ++j)
        if (f.bootstraps[t].counts[j] > 0 && f.trees[t].leaf_of(ds, j) == leaf)
          want[j] += double(f.bootstraps[t].counts[j]) / double(m);
    }
    REQUIRE(s_i > 0);
    std::vector<double> got(ds.n_rows, 0.0);
    p.for_each_in_row(i, [&](int32_t j, double v) { got[j] = v; });
    for (size_t j = 0; j < ds.n_rows; ++j)
      CHECK(std::abs(got[j] - want[j] / double(s_i)) <= 1e-12);
    CHECK(p.row_sum(i) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("symmetrize averages ordered pairs and preserves metadata") {
  const Dataset ds = synth_mixed(35, 10);
  const Forest f = small_forest(ds, 10);
  const ProximityMatrix p = prox_gap(f, ds, DiagonalPolicy::duplicate_oob);
  const ProximityMatrix s = symmetrize(p);
  CHECK(s.symmetric);
  CHECK(s.kind == p.kind);
  CHECK(s.diagonal == p.diagonal);
  for (size_t i = 0; i < ds.n_rows; ++i)
    for (size_t j = 0; j < ds.n_rows; ++j)
      CHECK(s.at(i, j) == doctest::Approx((p.at(i, j) + p.at(j, i)) / 2.0).epsilon(1e-15));

  // sparse path
  const Dataset big = synth_gaussian_classes(2050, 6);
  const Forest fb = small_forest(big, 6, 8);
  const ProximityMatrix pb = prox_gap(fb, big, DiagonalPolicy::zeroed);
  const ProximityMatrix sb = symmetrize(pb);
  CHECK_FALSE(sb.is_dense());
  for (const size_t i : {size_t(3), size_t(1024)})
    for (const size_t j : {size_t(0), size_t(512), size_t(2049)})
      CHECK(sb.at(i, j) ==
            doctest::Approx((pb.at(i, j) + pb.at(j, i)) / 2.0).epsilon(1e-15));
  CHECK(asymmetry_mse(sb) == 0.0);
}

TEST_CASE("asymmetry_mse on a handcrafted matrix") {
  ProximityMatrix p(ProximityKind::gap, 2, 2);
  p.set(0, 1, 0.4);
  p.set(1, 0, 0.2);
  // ordered pairs: (0,1) and (1,0) each contribute 0.04; diagonal zero; /4
  CHECK(asymmetry_mse(p) == doctest::Approx(0.02).epsilon(1e-15));

  const Dataset ds = synth_mixed(30, 12);
  const Forest f = small_forest(ds, 12);
  const ProximityMatrix g = prox_gap(f, ds, DiagonalPolicy::zeroed);
  const oracle::Matrix w = oracle::gap(f, ds, false);
  KahanSum acc;
  for (size_t i = 0; i < ds.n_rows; ++i)
    for (size_t j = 0; j < ds.n_rows; ++j) {
      const double d = w[i][j] - w[j][i];
      acc.add(d * d);
    }
  CHECK(asymmetry_mse(g) ==
        doctest::Approx(acc.value() / double(ds.n_rows * ds.n_rows)).epsilon(1e-12));
}

TEST_CASE("asymmetry shrinks as trees grow") {
  const Dataset ds = synth_gaussian_classes(200, 1);
  double prev = 1e9;
  for (const int trees : {20, 80, 320}) {
    const Forest f = small_forest(ds, 3, trees);
    const double a = asymmetry_mse(prox_gap(f, ds, DiagonalPolicy::zeroed));
    CHECK(a < prev);
    prev = a;
  }
}

TEST_CASE("kind round-trips through names") {
  CHECK(proximity_kind_from_string("gap") == ProximityKind::gap);
  CHECK(proximity_kind_from_string("oob") == ProximityKind::oob);
  CHECK(proximity_kind_from_string("original") == ProximityKind::original);
  CHECK_THROWS_AS(proximity_kind_from_string("nope"), UsageError);
  CHECK(std::string(to_string(ProximityKind::gap)) == "gap");
  CHECK(std::string(to_string(DiagonalPolicy::duplicate_oob)) == "duplicate-oob");
}
