// rfgap — random-forest proximities (original / oob / gap) with
// proximity-weighted prediction checks, imputation, outlier scoring and
// MDS embedding.  File-based, deterministic: a command re-run with the same
// config and inputs produces byte-identical outputs.
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rfgap/common.hpp"
#include "rfgap/dataset.hpp"
#include "rfgap/forest.hpp"
#include "rfgap/impute.hpp"
#include "rfgap/mds.hpp"
#include "rfgap/outliers.hpp"
#include "rfgap/prediction.hpp"
#include "rfgap/proximity.hpp"
#include "rfgap/serialize.hpp"
#include "rfgap/synthetic.hpp"

namespace {

using nlohmann::json;
using namespace rfgap;

// Options shared by every forest-fitting subcommand.
struct CommonOpts {
  std::string input;
  std::string schema;
  int trees = 500;
  int mtry = 0;           // 0 = task default
  int min_node_size = 0;  // 0 = task default
  uint64_t seed = 1;
  int threads = 1;
};

void add_forest_flags(CLI::App* cmd, CommonOpts& o, bool with_input = true) {
  if (with_input)
    cmd->add_option("--input", o.input, "input CSV (header row required)")->required();
  cmd->add_option("--schema", o.schema, "schema override file (name,kind,role per line)");
  cmd->add_option("--trees", o.trees, "number of trees");
  cmd->add_option("--mtry", o.mtry, "features tried per split (0 = task default)");
  cmd->add_option("--min-node-size", o.min_node_size,
                  "minimal node weight to attempt a split (0 = task default)");
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--threads", o.threads, "worker threads for tree fitting");
}

Dataset load_input(const CommonOpts& o) {
  if (o.input.empty()) throw UsageError("--input is required");
  if (!o.schema.empty()) return load_csv(o.input, load_schema_file(o.schema));
  return load_csv(o.input);
}

ForestParams forest_params(const CommonOpts& o) {
  ForestParams p;
  p.n_trees = o.trees;
  p.mtry = o.mtry;
  p.min_node_size = o.min_node_size;
  p.seed = o.seed;
  p.n_threads = o.threads;
  return p;
}

json common_config(const std::string& command, const CommonOpts& o) {
  json cfg;
  cfg["command"] = command;
  if (!o.input.empty()) cfg["--input"] = o.input;
  if (!o.schema.empty()) cfg["--schema"] = o.schema;
  cfg["--trees"] = o.trees;
  cfg["--mtry"] = o.mtry;
  cfg["--min-node-size"] = o.min_node_size;
  cfg["--seed"] = o.seed;
  cfg["--threads"] = o.threads;
  return cfg;
}

// <out>.meta.json: version + full config echo (re-runnable) + op extras.
void write_sidecar(const std::string& out_path, const json& config, const json& extra) {
  json side;
  side["version"] = kVersion;
  side["config"] = config;
  side["outputs"] = json::array({out_path});
  for (auto it = extra.begin(); it != extra.end(); ++it) side[it.key()] = it.value();
  std::ofstream f(out_path + ".meta.json", std::ios::binary);
  if (!f) throw DataError("cannot open for writing: " + out_path + ".meta.json");
  f << side.dump(2) << '\n';
  if (!f) throw DataError("write failed: " + out_path + ".meta.json");
}

json report_side_json(const PredictionReport& r) {
  return json{{"compared", r.compared},
              {"mismatches", r.mismatches},
              {"mismatch", r.mismatch},
              {"ties", r.tie_count},
              {"max_abs_diff", r.max_abs_diff},
              {"prox_error", r.prox_error},
              {"forest_error", r.forest_error}};
}

constexpr const char* kReportCsvHeader =
    "dataset,kind,seed,split,side,n_trees,min_node_size,rows,compared,mismatches,"
    "mismatch,ties,forest_error,prox_error,max_abs_diff\n";

void report_csv_row(std::ostream& out, const std::string& dataset,
                    const PredictionReport& r, uint64_t seed, double split,
                    const ForestParams& p, size_t rows) {
  out << dataset << ',' << to_string(r.kind) << ',' << seed << ','
      << format_double(split) << ',' << (r.test_side ? "test" : "train") << ','
      << p.n_trees << ',' << p.min_node_size << ',' << rows << ',' << r.compared << ','
      << r.mismatches << ',' << format_double(r.mismatch) << ',' << r.tie_count << ','
      << format_double(r.forest_error) << ',' << format_double(r.prox_error) << ','
      << format_double(r.max_abs_diff) << '\n';
}

DiagonalPolicy diagonal_from_string(const std::string& s) {
  if (s == "zeroed") return DiagonalPolicy::zeroed;
  if (s == "duplicate-oob" || s == "dup-oob") return DiagonalPolicy::duplicate_oob;
  if (s == "identity") return DiagonalPolicy::identity;
  throw UsageError("unknown diagonal policy '" + s + "' (zeroed|duplicate-oob|identity)");
}

std::vector<ProximityKind> parse_kinds(const std::vector<std::string>& names) {
  std::vector<ProximityKind> kinds;
  if (names.empty())
    kinds = {ProximityKind::original, ProximityKind::oob, ProximityKind::gap};
  else
    for (const auto& n : names) kinds.push_back(proximity_kind_from_string(n));
  return kinds;
}

// ---- train ------------------------------------------------------------------

int cmd_train(const CommonOpts& o, const std::string& out) {
  const Dataset ds = load_input(o);
  const Forest f = fit_forest(ds, forest_params(o));
  forest_save(f, out);

  const PredictionVector oob = oob_predict(f, ds);
  size_t undefined = 0;
  for (const uint8_t d : oob.defined)
    if (!d) ++undefined;

  json report;
  report["task"] = ds.task == Task::classification ? "classification" : "regression";
  report["n_rows"] = ds.n_rows;
  report["n_features"] = ds.n_features();
  report["n_trees"] = f.params.n_trees;
  report["mtry"] = f.params.mtry;
  report["min_node_size"] = f.params.min_node_size;
  report["seed"] = f.params.seed;
  report["undefined_oob_rows"] = undefined;
  if (ds.task == Task::classification)
    report["oob_error"] = classification_error(oob, ds.y_class);
  else
    report["oob_mse"] = regression_mse(oob, ds.y_real);
  {
    std::ofstream rf(out + ".report.json", std::ios::binary);
    if (!rf) throw DataError("cannot open for writing: " + out + ".report.json");
    rf << report.dump(2) << '\n';
  }

  json cfg = common_config("train", o);
  cfg["--out"] = out;
  write_sidecar(out, cfg, json{{"report", out + ".report.json"}});
  return 0;
}

// ---- prox -------------------------------------------------------------------

struct ProxOpts {
  CommonOpts common;
  std::string forest_file;
  std::string kind = "gap";
  std::string diagonal = "zeroed";
  bool symmetrize_out = false;
  bool sparse = false;
  bool dense = false;
  std::string out;
};

int cmd_prox(const ProxOpts& o) {
  const Dataset ds = load_input(o.common);
  const ProximityKind kind = proximity_kind_from_string(o.kind);
  const DiagonalPolicy diagonal = diagonal_from_string(o.diagonal);
  if (kind != ProximityKind::gap && diagonal != DiagonalPolicy::zeroed)
    throw UsageError("--diagonal applies to --kind gap only");

  Forest f;
  if (!o.forest_file.empty())
    f = forest_load(o.forest_file, ds);
  else
    f = fit_forest(ds, forest_params(o.common));

  ProximityMatrix p = prox_matrix(f, ds, kind, diagonal);
  if (o.symmetrize_out) p = symmetrize(p);

  if (o.sparse && o.dense) throw UsageError("--sparse and --dense are exclusive");
  const bool sparse = o.sparse || (!o.dense && !p.is_dense());
  write_matrix_csv(p, o.out, sparse);

  json cfg = common_config("prox", o.common);
  if (!o.forest_file.empty()) cfg["--forest"] = o.forest_file;
  cfg["--kind"] = o.kind;
  cfg["--diagonal"] = o.diagonal;
  if (o.symmetrize_out) cfg["--symmetrize"] = true;
  if (o.sparse) cfg["--sparse"] = true;
  if (o.dense) cfg["--dense"] = true;
  cfg["--out"] = o.out;
  write_sidecar(o.out, cfg,
                json{{"kind", to_string(kind)},
                     {"diagonal", to_string(diagonal)},
                     {"symmetrized", o.symmetrize_out},
                     {"format", sparse ? "sparse" : "dense"},
                     {"n_query", p.n_query()},
                     {"n_train", p.n_train()},
                     {"undefined_rows", size_t(std::count(p.row_undefined.begin(),
                                                          p.row_undefined.end(), 1))},
                     {"undefined_pairs", p.undefined_pairs.size()}});
  return 0;
}

// ---- predict-check ------------------------------------------------------------

struct CheckOpts {
  CommonOpts common;
  std::string kind = "gap";
  double split = 0.0;
  std::string out;
  std::string csv;
};

int cmd_predict_check(const CheckOpts& o) {
  const Dataset ds = load_input(o.common);
  const ProximityKind kind = proximity_kind_from_string(o.kind);
  if (o.split < 0.0 || o.split >= 1.0)
    throw UsageError("--split must lie in [0, 1) (0 disables the test side)");

  json out_json;
  out_json["dataset"] = o.common.input;
  out_json["kind"] = to_string(kind);
  out_json["seed"] = o.common.seed;
  out_json["split"] = o.split;

  std::optional<std::ofstream> csv;
  if (!o.csv.empty()) {
    csv.emplace(o.csv, std::ios::binary);
    if (!*csv) throw DataError("cannot open for writing: " + o.csv);
    *csv << kReportCsvHeader;
  }

  if (o.split > 0.0) {
    const Split sp = stratified_split(ds, o.split, o.common.seed);
    const Forest f = fit_forest(sp.train, forest_params(o.common));
    const PredictionReport train_rep = equivalence_report(f, sp.train, kind);
    const PredictionReport test_rep = equivalence_report_test(f, sp.train, sp.test, kind);
    out_json["train"] = report_side_json(train_rep);
    out_json["test"] = report_side_json(test_rep);
    if (csv) {
      report_csv_row(*csv, o.common.input, train_rep, o.common.seed, o.split, f.params,
                     sp.train.n_rows);
      report_csv_row(*csv, o.common.input, test_rep, o.common.seed, o.split, f.params,
                     sp.test.n_rows);
    }
  } else {
    const Forest f = fit_forest(ds, forest_params(o.common));
    const PredictionReport rep = equivalence_report(f, ds, kind);
    out_json["train"] = report_side_json(rep);
    if (csv)
      report_csv_row(*csv, o.common.input, rep, o.common.seed, o.split, f.params,
                     ds.n_rows);
  }

  std::ofstream jf(o.out, std::ios::binary);
  if (!jf) throw DataError("cannot open for writing: " + o.out);
  jf << out_json.dump(2) << '\n';
  jf.close();

  json cfg = common_config("predict-check", o.common);
  cfg["--kind"] = o.kind;
  cfg["--split"] = o.split;
  cfg["--out"] = o.out;
  if (!o.csv.empty()) cfg["--csv"] = o.csv;
  write_sidecar(o.out, cfg, json::object());
  return 0;
}

// ---- impute -------------------------------------------------------------------

struct ImputeOpts {
  CommonOpts common;
  std::vector<std::string> kinds;
  double mcar = 0.0;
  int iterations = 1;
  std::string out;
  std::string write_imputed;
};

int cmd_impute(const ImputeOpts& o) {
  const Dataset loaded = load_input(o.common);
  const std::vector<ProximityKind> kinds = parse_kinds(o.kinds);
  if (!o.write_imputed.empty() && kinds.size() != 1)
    throw UsageError("--write-imputed needs exactly one --kind");
  if (o.mcar < 0.0 || o.mcar >= 0.9)
    throw UsageError("--mcar must lie in [0, 0.9)");

  Dataset masked = loaded;
  MissingnessRecord record;
  if (o.mcar > 0.0) {
    auto[m, r] = remove_mcar(loaded, o.mcar, o.common.seed);
    masked = std::move(m);
    record = std::move(r);
  }

  std::vector<ImputationRunResult> runs;
  for (const ProximityKind kind : kinds)
    runs.push_back(impute(masked, record, kind, forest_params(o.common), o.iterations));

  write_trace_csv(runs, o.common.seed, o.out);
  if (!o.write_imputed.empty()) write_dataset_csv(runs.front().imputed, o.write_imputed);

  json cfg = common_config("impute", o.common);
  for (const auto& k : o.kinds) cfg["--kind"].push_back(k);
  cfg["--mcar"] = o.mcar;
  cfg["--iterations"] = o.iterations;
  cfg["--out"] = o.out;
  if (!o.write_imputed.empty()) cfg["--write-imputed"] = o.write_imputed;

  json extra;
  extra["masked_cells"] = record.cells.size();
  extra["iteration0_mse"] = runs.front().mse_trace.front();
  json kind_names = json::array();
  for (const ProximityKind k : kinds) kind_names.push_back(to_string(k));
  extra["kinds"] = kind_names;
  write_sidecar(o.out, cfg, extra);
  return 0;
}

// ---- outliers -------------------------------------------------------------------

struct OutlierOpts {
  CommonOpts common;
  std::string kind = "gap";
  std::string out;
};

int cmd_outliers(const OutlierOpts& o) {
  const Dataset ds = load_input(o.common);
  if (ds.task != Task::classification)
    throw DataError("outlier scores need a classification dataset");
  const ProximityKind kind = proximity_kind_from_string(o.kind);

  const Forest f = fit_forest(ds, forest_params(o.common));
  const DiagonalPolicy diag = kind == ProximityKind::gap ? DiagonalPolicy::duplicate_oob
                                                         : DiagonalPolicy::zeroed;
  const ProximityMatrix p = symmetrize(prox_matrix(f, ds, kind, diag));
  const OutlierResult res = outlier_scores(p, ds.y_class, ds.n_classes());
  write_outliers_csv(res, ds, o.out);

  json cfg = common_config("outliers", o.common);
  cfg["--kind"] = o.kind;
  cfg["--out"] = o.out;
  write_sidecar(o.out, cfg,
                json{{"kind", to_string(kind)},
                     {"class_median", res.class_median},
                     {"class_mad", res.class_mad},
                     {"flagged", size_t(std::count(res.flagged.begin(), res.flagged.end(),
                                                   1))}});
  return 0;
}

// ---- embed ---------------------------------------------------------------------

struct EmbedOpts {
  CommonOpts common;
  std::string kind = "gap";
  int dims = 2;
  std::string out;
};

int cmd_embed(const EmbedOpts& o) {
  const Dataset ds = load_input(o.common);
  const ProximityKind kind = proximity_kind_from_string(o.kind);
  if (o.dims < 1) throw UsageError("--dims must be >= 1");

  const Forest f = fit_forest(ds, forest_params(o.common));
  const DiagonalPolicy diag = kind == ProximityKind::gap ? DiagonalPolicy::duplicate_oob
                                                         : DiagonalPolicy::zeroed;
  const ProximityMatrix p = symmetrize(prox_matrix(f, ds, kind, diag));
  const Embedding emb = mds_embed(p, o.dims);
  write_embedding_csv(emb, o.out);
  if (emb.truncated)
    std::cerr << "embed: only " << emb.dims << " of " << o.dims
              << " requested dimensions carry positive eigenvalues\n";

  json cfg = common_config("embed", o.common);
  cfg["--kind"] = o.kind;
  cfg["--dims"] = o.dims;
  cfg["--out"] = o.out;
  write_sidecar(o.out, cfg,
                json{{"kind", to_string(kind)},
                     {"eigenvalues", emb.eigenvalues},
                     {"stress", emb.stress},
                     {"dims_requested", o.dims},
                     {"dims", emb.dims},
                     {"truncated", emb.truncated}});
  return 0;
}

// ---- experiment ------------------------------------------------------------------

struct ExperimentOpts {
  CommonOpts common;  // --input unused; datasets come from the manifest
  std::string manifest;
  std::vector<std::string> kinds;
  int seeds = 5;
  double split = 0.7;
  std::vector<int> node_sizes;
  std::vector<int> tree_counts;
  std::string out;
};

int cmd_experiment(const ExperimentOpts& o) {
  if (o.split <= 0.0 || o.split >= 1.0) throw UsageError("--split must lie in (0, 1)");
  if (o.seeds < 1) throw UsageError("--seeds must be >= 1");
  const std::vector<ProximityKind> kinds = parse_kinds(o.kinds);

  std::ifstream mf(o.manifest);
  if (!mf) throw DataError("cannot open manifest: " + o.manifest);
  std::vector<std::string> paths;
  std::string line;
  while (std::getline(mf, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty() && line[0] != '#') paths.push_back(line);
  }
  if (paths.empty()) throw DataError("manifest lists no datasets: " + o.manifest);

  std::ofstream out(o.out, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + o.out);
  out << kReportCsvHeader;

  json failures = json::array();
  size_t processed = 0;
  for (const std::string& path : paths) {
    try {
      const Dataset ds = load_csv(path);
      // Parameter grid: always the configured point; sweeps add theirs.
      std::vector<std::pair<int, int>> grid = {{o.common.trees, o.common.min_node_size}};
      for (const int s : o.node_sizes)
        if (s != o.common.min_node_size) grid.push_back({o.common.trees, s});
      for (const int t : o.tree_counts)
        if (t != o.common.trees) grid.push_back({t, o.common.min_node_size});

      for (const auto& [n_trees, node_size] : grid) {
        for (int s = 1; s <= o.seeds; ++s) {
          const uint64_t seed = uint64_t(s);
          const Split sp = stratified_split(ds, o.split, seed);
          CommonOpts fit = o.common;
          fit.trees = n_trees;
          fit.min_node_size = node_size;
          fit.seed = seed;
          const Forest f = fit_forest(sp.train, forest_params(fit));
          for (const ProximityKind kind : kinds) {
            const PredictionReport train_rep = equivalence_report(f, sp.train, kind);
            const PredictionReport test_rep =
                equivalence_report_test(f, sp.train, sp.test, kind);
            report_csv_row(out, path, train_rep, seed, o.split, f.params, sp.train.n_rows);
            report_csv_row(out, path, test_rep, seed, o.split, f.params, sp.test.n_rows);
          }
        }
      }
      ++processed;
    } catch (const std::exception& e) {
      std::cerr << "experiment: " << path << ": " << e.what() << " (skipped)\n";
      failures.push_back(json{{"dataset", path}, {"error", e.what()}});
    }
  }
  out.close();

  json cfg = common_config("experiment", o.common);
  cfg.erase("--input");
  cfg["--manifest"] = o.manifest;
  for (const auto& k : o.kinds) cfg["--kind"].push_back(k);
  cfg["--seeds"] = o.seeds;
  cfg["--split"] = o.split;
  if (!o.node_sizes.empty()) cfg["--node-sizes"] = o.node_sizes;
  if (!o.tree_counts.empty()) cfg["--tree-counts"] = o.tree_counts;
  cfg["--out"] = o.out;
  write_sidecar(o.out, cfg,
                json{{"datasets", processed}, {"failures", failures}});
  return 0;
}

// ---- synth ----------------------------------------------------------------------

struct SynthOpts {
  std::string name;
  size_t rows = 500;
  uint64_t seed = 1;
  std::string out;
};

int cmd_synth(const SynthOpts& o) {
  const Dataset ds = synth_by_name(o.name, o.rows, o.seed);
  write_dataset_csv(ds, o.out);
  json cfg;
  cfg["command"] = "synth";
  cfg["--name"] = o.name;
  cfg["--rows"] = o.rows;
  cfg["--seed"] = o.seed;
  cfg["--out"] = o.out;
  write_sidecar(o.out, cfg,
                json{{"n_rows", ds.n_rows},
                     {"n_features", ds.n_features()},
                     {"task", ds.task == Task::classification ? "classification"
                                                              : "regression"}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"random-forest proximities: original, oob and gap"};
  app.require_subcommand(1);

  int rc = 0;

  // train
  CommonOpts train_opts;
  std::string train_out;
  auto* train = app.add_subcommand("train", "fit a forest, save it with an OOB report");
  add_forest_flags(train, train_opts);
  train->add_option("--out", train_out, "forest file path")->required();
  train->callback([&] { rc = cmd_train(train_opts, train_out); });

  // prox
  ProxOpts prox_opts;
  auto* prox = app.add_subcommand("prox", "compute a proximity matrix");
  add_forest_flags(prox, prox_opts.common);
  prox->add_option("--forest", prox_opts.forest_file, "load this forest instead of fitting");
  prox->add_option("--kind", prox_opts.kind, "original|oob|gap");
  prox->add_option("--diagonal", prox_opts.diagonal,
                   "gap diagonal policy: zeroed|duplicate-oob|identity");
  prox->add_flag("--symmetrize", prox_opts.symmetrize_out, "emit (p+pᵀ)/2");
  prox->add_flag("--sparse", prox_opts.sparse, "triplet i,j,value output");
  prox->add_flag("--dense", prox_opts.dense, "dense matrix output");
  prox->add_option("--out", prox_opts.out, "matrix CSV path")->required();
  prox->callback([&] { rc = cmd_prox(prox_opts); });

  // predict-check
  CheckOpts check_opts;
  auto* check = app.add_subcommand(
      "predict-check", "compare proximity-weighted predictions with the forest's");
  add_forest_flags(check, check_opts.common);
  check->add_option("--kind", check_opts.kind, "original|oob|gap");
  check->add_option("--split", check_opts.split,
                    "train fraction for a held-out test side (0 = train only)");
  check->add_option("--out", check_opts.out, "report JSON path")->required();
  check->add_option("--csv", check_opts.csv, "also write report rows as CSV");
  check->callback([&] { rc = cmd_predict_check(check_opts); });

  // impute
  ImputeOpts impute_opts;
  auto* imp = app.add_subcommand("impute", "mask cells, impute, trace the masked-cell MSE");
  add_forest_flags(imp, impute_opts.common);
  imp->add_option("--kind", impute_opts.kinds,
                  "proximity kind(s); default runs original, oob and gap");
  imp->add_option("--mcar", impute_opts.mcar, "fraction of feature cells to mask");
  imp->add_option("--iterations", impute_opts.iterations, "imputation refits");
  imp->add_option("--out", impute_opts.out, "trace CSV path")->required();
  imp->add_option("--write-imputed", impute_opts.write_imputed,
                  "write the imputed dataset (single kind only)");
  imp->callback([&] { rc = cmd_impute(impute_opts); });

  // outliers
  OutlierOpts outlier_opts;
  auto* outl = app.add_subcommand("outliers", "within-class outlier scores");
  add_forest_flags(outl, outlier_opts.common);
  outl->add_option("--kind", outlier_opts.kind, "original|oob|gap");
  outl->add_option("--out", outlier_opts.out, "scores CSV path")->required();
  outl->callback([&] { rc = cmd_outliers(outlier_opts); });

  // embed
  EmbedOpts embed_opts;
  auto* emb = app.add_subcommand("embed", "metric MDS embedding of √(1−proximity)");
  add_forest_flags(emb, embed_opts.common);
  emb->add_option("--kind", embed_opts.kind, "original|oob|gap");
  emb->add_option("--dims", embed_opts.dims, "embedding dimensions");
  emb->add_option("--out", embed_opts.out, "coordinates CSV path")->required();
  emb->callback([&] { rc = cmd_embed(embed_opts); });

  // experiment
  ExperimentOpts exp_opts;
  auto* expc = app.add_subcommand(
      "experiment", "equivalence reports over a manifest of datasets");
  add_forest_flags(expc, exp_opts.common, /*with_input=*/false);
  expc->add_option("--manifest", exp_opts.manifest, "file with one dataset path per line")
      ->required();
  expc->add_option("--kind", exp_opts.kinds, "kind(s); default original, oob and gap");
  expc->add_option("--seeds", exp_opts.seeds, "run seeds 1..N");
  expc->add_option("--split", exp_opts.split, "train fraction");
  expc->add_option("--node-sizes", exp_opts.node_sizes, "min-node-size sweep")
      ->delimiter(',');
  expc->add_option("--tree-counts", exp_opts.tree_counts, "tree-count sweep")
      ->delimiter(',');
  expc->add_option("--out", exp_opts.out, "results CSV path")->required();
  expc->callback([&] { rc = cmd_experiment(exp_opts); });

  // synth
  SynthOpts synth_opts;
  auto* syn = app.add_subcommand("synth", "generate a synthetic dataset CSV");
  syn->add_option("--name", synth_opts.name,
                  "gaussian | clusters:<separation> | mixed | friedman")
      ->required();
  syn->add_option("--rows", synth_opts.rows, "number of rows");
  syn->add_option("--seed", synth_opts.seed, "RNG seed");
  syn->add_option("--out", synth_opts.out, "dataset CSV path")->required();
  syn->callback([&] { rc = cmd_synth(synth_opts); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // help/version stay 0; usage problems map to 2
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 4;
  }
  return rc;
}
