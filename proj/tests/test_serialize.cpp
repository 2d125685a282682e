#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "rfgap/common.hpp"
#include "rfgap/dataset.hpp"
#include "rfgap/forest.hpp"
#include "rfgap/mds.hpp"
#include "rfgap/outliers.hpp"
#include "rfgap/prediction.hpp"
#include "rfgap/proximity.hpp"
#include "rfgap/serialize.hpp"
#include "rfgap/synthetic.hpp"
#include "support/tmpdir.hpp"

using namespace rfgap;
using rfgap::testing::read_file;
using rfgap::testing::scratch_path;
using rfgap::testing::write_file;

TEST_CASE("format_double round-trips exactly") {
  const std::vector<double> values = {0.0,
                                      -0.0,
                                      1.0,
                                      -1.0,
                                      1.0 / 3.0,
                                      0.1,
                                      1e-308,
                                      1.7976931348623157e308,
                                      std::numeric_limits<double>::denorm_min(),
                                      6.02214076e23,
                                      -3.55271367880050092936e-15};
  for (const double v : values) {
    const std::string s = format_double(v);
    // strtod, not stod: stod throws on the ERANGE that subnormals set even
    // though the parsed value is exact
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_double(0.1) == "0.1");  // shortest form, not 0.1000000000000000055...
}

namespace {

void check_forest_roundtrip(const Dataset& ds, uint64_t seed) {
  ForestParams params;
  params.n_trees = 30;
  params.seed = seed;
  const Forest f = fit_forest(ds, params);

  const std::string path = scratch_path("forest-" + std::to_string(seed) + ".json");
  forest_save(f, path);
  const Forest g = forest_load(path, ds);

  REQUIRE(g.trees.size() == f.trees.size());
  // Bit-identical behaviour: OOB predictions, fresh-row predictions,
  // and all three proximity matrices.
  const PredictionVector oob_f = oob_predict(f, ds);
  const PredictionVector oob_g = oob_predict(g, ds);
  REQUIRE(oob_f.size() == oob_g.size());
  for (size_t i = 0; i < oob_f.size(); ++i) {
    CHECK(oob_f.defined[i] == oob_g.defined[i]);
    if (!oob_f.defined[i]) continue;
    if (ds.task == Task::classification)
      CHECK(oob_f.labels[i] == oob_g.labels[i]);
    else
      CHECK(oob_f.values[i] == oob_g.values[i]);  // bit-exact, not approximate
  }
  const PredictionVector pf = predict(f, ds);
  const PredictionVector pg = predict(g, ds);
  for (size_t i = 0; i < ds.n_rows; ++i) {
    if (ds.task == Task::classification)
      CHECK(pf.labels[i] == pg.labels[i]);
    else
      CHECK(pf.values[i] == pg.values[i]);
  }
  for (const ProximityKind kind :
       {ProximityKind::original, ProximityKind::oob, ProximityKind::gap}) {
    const ProximityMatrix a = prox_matrix(f, ds, kind);
    const ProximityMatrix b = prox_matrix(g, ds, kind);
    REQUIRE(a.n_query() == b.n_query());
    for (size_t i = 0; i < a.n_query(); ++i)
      for (size_t j = 0; j < a.n_train(); ++j) CHECK(a.at(i, j) == b.at(i, j));
  }

  // Saving the loaded forest reproduces the file byte for byte.
  const std::string path2 = scratch_path("forest-" + std::to_string(seed) + "-resave.json");
  forest_save(g, path2);
  CHECK(read_file(path) == read_file(path2));
}

}  // namespace

TEST_CASE("forest save/load round-trips classification with categoricals") {
  check_forest_roundtrip(synth_mixed(90, 31), 31);
}

TEST_CASE("forest save/load round-trips regression") {
  check_forest_roundtrip(synth_friedman(80, 32), 32);
}

TEST_CASE("forest_load rejects foreign or damaged files") {
  const Dataset ds = synth_gaussian_classes(40, 9);
  ForestParams params;
  params.n_trees = 5;
  params.seed = 9;
  const Forest f = fit_forest(ds, params);
  const std::string path = scratch_path("guard.json");
  forest_save(f, path);

  // fingerprint mismatch: same shape, different class labels
  Dataset other = synth_two_clusters(40, 1.0, 9);
  CHECK_THROWS_AS(forest_load(path, other), DataError);

  // truncated file
  const std::string full = read_file(path);
  const std::string cut = write_file("guard-cut.json", full.substr(0, full.size() / 2));
  CHECK_THROWS_AS(forest_load(cut, ds), DataError);

  // not JSON at all
  const std::string junk = write_file("guard-junk.json", "not a forest\n");
  CHECK_THROWS_AS(forest_load(junk, ds), DataError);

  // wrong format tag
  const std::string tag = write_file("guard-tag.json", "{\"format\":\"something-else\"}\n");
  CHECK_THROWS_AS(forest_load(tag, ds), DataError);

  // missing file
  CHECK_THROWS_AS(forest_load(scratch_path("does-not-exist.json"), ds), DataError);
}

TEST_CASE("dataset CSV round-trip preserves fingerprint and cells") {
  for (const Dataset& ds : {synth_mixed(60, 4), synth_friedman(45, 4)}) {
    const std::string path = scratch_path("ds-roundtrip.csv");
    write_dataset_csv(ds, path);
    const Dataset back = load_csv(path);
    CHECK(back.schema_fingerprint() == ds.schema_fingerprint());
    REQUIRE(back.n_rows == ds.n_rows);
    REQUIRE(back.n_features() == ds.n_features());
    for (size_t c = 0; c < ds.n_features(); ++c) {
      const auto& a = ds.features[c];
      const auto& b = back.features[c];
      CHECK(a.name == b.name);
      CHECK(a.kind == b.kind);
      if (a.kind == ColumnKind::numeric)
        CHECK(a.values == b.values);  // shortest round-trip form: bit-exact
      else
        CHECK(a.codes == b.codes);
    }
    if (ds.task == Task::classification)
      CHECK(back.y_class == ds.y_class);
    else
      CHECK(back.y_real == ds.y_real);
  }
}

TEST_CASE("dataset CSV round-trip preserves missing cells and quoting") {
  const std::string csv = write_file("quirks.csv",
                                     "name,x,y\n"
                                     "\"a,b\",1.5,0.25\n"
                                     "\"line\nbreak\",NA,0.5\n"
                                     "plain,2.5,0.75\n");
  const Dataset ds = load_csv(csv);
  REQUIRE(ds.features[1].is_missing(1));
  const std::string out = scratch_path("quirks-out.csv");
  write_dataset_csv(ds, out);
  const Dataset back = load_csv(out);
  CHECK(back.schema_fingerprint() == ds.schema_fingerprint());
  CHECK(back.features[1].is_missing(1));
  CHECK(back.features[0].codes == ds.features[0].codes);
  // writing the reloaded dataset again is byte-stable
  const std::string out2 = scratch_path("quirks-out2.csv");
  write_dataset_csv(back, out2);
  CHECK(read_file(out) == read_file(out2));
}

TEST_CASE("matrix CSV: dense layout") {
  ProximityMatrix p(ProximityKind::original, 2, 2);
  p.set(0, 0, 1.0);
  p.set(0, 1, 0.25);
  p.set(1, 0, 0.25);
  p.set(1, 1, 1.0);
  const std::string path = scratch_path("dense.csv");
  write_matrix_csv(p, path, /*sparse=*/false);
  CHECK(read_file(path) ==
        "row,0,1\n"
        "0,1,0.25\n"
        "1,0.25,1\n");
}

TEST_CASE("matrix CSV: sparse layout lists nonzeros in row-major order") {
  ProximityMatrix p(ProximityKind::gap, 3, 3);
  p.set(0, 2, 0.5);
  p.set(0, 1, 0.5);
  p.set(2, 0, 1.0);
  const std::string path = scratch_path("sparse.csv");
  write_matrix_csv(p, path, /*sparse=*/true);
  CHECK(read_file(path) ==
        "i,j,value\n"
        "0,1,0.5\n"
        "0,2,0.5\n"
        "2,0,1\n");
}

TEST_CASE("matrix CSV: sparse and dense agree cell by cell") {
  const Dataset ds = synth_gaussian_classes(30, 6);
  ForestParams params;
  params.n_trees = 20;
  params.seed = 6;
  const Forest f = fit_forest(ds, params);
  const ProximityMatrix p = prox_gap(f, ds, DiagonalPolicy::zeroed);

  const std::string dense_path = scratch_path("agree-dense.csv");
  const std::string sparse_path = scratch_path("agree-sparse.csv");
  write_matrix_csv(p, dense_path, false);
  write_matrix_csv(p, sparse_path, true);

  // parse both back and compare
  std::vector<double> dense(p.n_query() * p.n_train(), 0.0);
  {
    std::istringstream in(read_file(dense_path));
    std::string line;
    REQUIRE(std::getline(in, line));  // header
    size_t i = 0;
    while (std::getline(in, line)) {
      std::istringstream row(line);
      std::string cell;
      REQUIRE(std::getline(row, cell, ','));  // row id
      REQUIRE(std::stoul(cell) == i);
      size_t j = 0;
      while (std::getline(row, cell, ','))
        dense[i * p.n_train() + j++] = std::stod(cell);
      REQUIRE(j == p.n_train());
      ++i;
    }
    REQUIRE(i == p.n_query());
  }
  std::vector<double> sparse(p.n_query() * p.n_train(), 0.0);
  {
    std::istringstream in(read_file(sparse_path));
    std::string line;
    REQUIRE(std::getline(in, line));
    while (std::getline(in, line)) {
      std::istringstream row(line);
      std::string i, j, v;
      REQUIRE(std::getline(row, i, ','));
      REQUIRE(std::getline(row, j, ','));
      REQUIRE(std::getline(row, v, ','));
      sparse[std::stoul(i) * p.n_train() + std::stoul(j)] = std::stod(v);
    }
  }
  for (size_t i = 0; i < p.n_query(); ++i)
    for (size_t j = 0; j < p.n_train(); ++j) {
      CHECK(dense[i * p.n_train() + j] == p.at(i, j));
      CHECK(sparse[i * p.n_train() + j] == p.at(i, j));
    }
}

TEST_CASE("embedding CSV shape") {
  Embedding e;
  e.n = 2;
  e.dims = 2;
  e.coords = {0.5, -0.25, -0.5, 0.25};
  const std::string path = scratch_path("embed.csv");
  write_embedding_csv(e, path);
  CHECK(read_file(path) ==
        "row_id,dim1,dim2\n"
        "0,0.5,-0.25\n"
        "1,-0.5,0.25\n");
}

TEST_CASE("outlier CSV uses dataset class labels") {
  const std::string csv = write_file("out-labels.csv",
                                     "x,cls\n"
                                     "1,apple\n"
                                     "2,apple\n"
                                     "3,pear\n"
                                     "4,pear\n");
  const Dataset ds = load_csv(csv);
  OutlierResult r;
  r.raw = {1.0, 2.0, 3.0, 4.0};
  r.normalized = {0.5, -0.5, 1.5, -1.5};
  r.flagged = {0, 1, 0, 0};
  const std::string path = scratch_path("out-scores.csv");
  write_outliers_csv(r, ds, path);
  CHECK(read_file(path) ==
        "row_id,class,raw,normalized,flag\n"
        "0,apple,1,0.5,0\n"
        "1,apple,2,-0.5,1\n"
        "2,pear,3,1.5,0\n"
        "3,pear,4,-1.5,0\n");
}

TEST_CASE("trace CSV: one row per run per iteration, fill row omitted") {
  std::vector<ImputationRunResult> runs(2);
  runs[0].kind = ProximityKind::original;
  runs[0].mse_trace = {0.5, 0.25, 0.125};
  runs[1].kind = ProximityKind::gap;
  runs[1].mse_trace = {0.5, 0.2, 0.1};
  const std::string path = scratch_path("trace.csv");
  write_trace_csv(runs, 7, path);
  CHECK(read_file(path) ==
        "iteration,kind,seed,mse\n"
        "1,original,7,0.25\n"
        "2,original,7,0.125\n"
        "1,gap,7,0.2\n"
        "2,gap,7,0.1\n");
}
