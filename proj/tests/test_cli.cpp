// End-to-end checks of the command-line tool: exit codes, byte-stable
// reruns, and the re-runnable config echo in the .meta.json sidecars.
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "support/tmpdir.hpp"

using json = nlohmann::json;
using rfgap::testing::read_file;
using rfgap::testing::scratch_path;
using rfgap::testing::write_file;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun run_cli(const std::string& args) {
  static int counter = 0;
  const std::string out_path = scratch_path("cli-out-" + std::to_string(counter) + ".txt");
  const std::string err_path = scratch_path("cli-err-" + std::to_string(counter) + ".txt");
  ++counter;
  const std::string cmd =
      std::string(RFGAP_CLI_PATH) + " " + args + " >" + out_path + " 2>" + err_path;
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.code = status == -1 ? -1 : WEXITSTATUS(status);
  r.out = read_file(out_path);
  r.err = read_file(err_path);
  return r;
}

std::string iris_path() { return std::string(RFGAP_DATA_DIR) + "/iris.csv"; }

// Rebuild the command line from a sidecar's config echo: booleans become
// bare flags, arrays repeat the flag, everything else is `--flag value`.
std::string rebuild_command(const json& cfg) {
  std::string cmd = cfg.at("command").get<std::string>();
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    if (it.key().rfind("--", 0) != 0) continue;
    const json& v = it.value();
    if (v.is_boolean()) {
      if (v.get<bool>()) cmd += " " + it.key();
    } else if (v.is_array()) {
      for (const json& e : v)
        cmd += " " + it.key() + " " + (e.is_string() ? e.get<std::string>() : e.dump());
    } else if (v.is_string()) {
      cmd += " " + it.key() + " " + v.get<std::string>();
    } else {
      cmd += " " + it.key() + " " + v.dump();
    }
  }
  return cmd;
}

size_t count_lines(const std::string& text) {
  size_t n = 0;
  for (const char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("cli: exit codes by failure class") {
  CHECK(run_cli("").code == 2);                 // a subcommand is required
  CHECK(run_cli("--help").code == 0);
  CHECK(run_cli("definitely-not-a-command").code == 2);

  const std::string out = scratch_path("codes-forest.json");
  // usage error surfaced by the library, not the parser
  CHECK(run_cli("train --input " + iris_path() + " --trees 0 --out " + out).code == 2);
  // bad enum value
  CHECK(run_cli("prox --input " + iris_path() + " --kind nope --out " + out).code == 2);
  // unreadable input is a data error
  CHECK(run_cli("train --input " + scratch_path("missing.csv") + " --out " + out).code == 3);
  // exclusive flags
  CHECK(run_cli("prox --input " + iris_path() + " --trees 10 --sparse --dense --out " +
                out)
            .code == 2);
}

TEST_CASE("cli: train is byte-stable across reruns and thread counts") {
  const std::string forest = scratch_path("stable-forest.json");
  const std::string args =
      "train --input " + iris_path() + " --trees 40 --seed 11 --out " + forest;
  REQUIRE(run_cli(args).code == 0);
  const std::string forest_bytes = read_file(forest);
  const std::string report_bytes = read_file(forest + ".report.json");
  const std::string meta_bytes = read_file(forest + ".meta.json");

  REQUIRE(run_cli(args).code == 0);  // same command, same bytes
  CHECK(read_file(forest) == forest_bytes);
  CHECK(read_file(forest + ".report.json") == report_bytes);
  CHECK(read_file(forest + ".meta.json") == meta_bytes);

  // a different worker count must not change the model, only the sidecar echo
  REQUIRE(run_cli("train --input " + iris_path() + " --trees 40 --seed 11 --threads 3 --out " +
                  forest)
              .code == 0);
  CHECK(read_file(forest) == forest_bytes);
  CHECK(read_file(forest + ".report.json") == report_bytes);

  const json report = json::parse(report_bytes);
  CHECK(report.at("task") == "classification");
  CHECK(report.at("n_rows") == 150);
  const double oob_error = report.at("oob_error").get<double>();
  CHECK(oob_error > 0.0);
  CHECK(oob_error < 0.12);
}

TEST_CASE("cli: sidecar config echo reproduces the run") {
  const std::string matrix = scratch_path("echo-prox.csv");
  const std::string args = "prox --input " + iris_path() +
                           " --trees 30 --seed 4 --kind gap --diagonal zeroed"
                           " --symmetrize --dense --out " +
                           matrix;
  REQUIRE(run_cli(args).code == 0);
  const std::string matrix_bytes = read_file(matrix);
  const json meta = json::parse(read_file(matrix + ".meta.json"));

  const std::string rebuilt = rebuild_command(meta.at("config"));
  REQUIRE(run_cli(rebuilt).code == 0);  // overwrites the same --out
  CHECK(read_file(matrix) == matrix_bytes);
  CHECK(json::parse(read_file(matrix + ".meta.json")) == meta);

  CHECK(meta.at("version").is_string());
  CHECK(meta.at("outputs") == json::array({matrix}));
  CHECK(meta.at("symmetrized") == true);
  CHECK(meta.at("format") == "dense");
}

TEST_CASE("cli: gap matrix rows sum to one, sparse and dense alike") {
  const std::string matrix = scratch_path("gap-sparse.csv");
  REQUIRE(run_cli("prox --input " + iris_path() +
                  " --trees 60 --seed 5 --kind gap --sparse --out " + matrix)
              .code == 0);
  std::istringstream in(read_file(matrix));
  std::string line;
  REQUIRE(std::getline(in, line));
  REQUIRE(line == "i,j,value");
  std::vector<double> row_sum(150, 0.0);
  while (std::getline(in, line)) {
    std::istringstream cells(line);
    std::string i, j, v;
    REQUIRE(std::getline(cells, i, ','));
    REQUIRE(std::getline(cells, j, ','));
    REQUIRE(std::getline(cells, v, ','));
    REQUIRE(i != j);  // gap diagonal is zero, so never stored
    row_sum[std::stoul(i)] += std::stod(v);
  }
  for (const double s : row_sum) CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("cli: impute trace has one row per kind per iteration") {
  std::string csv = "a,b,c,cls\n";
  for (int i = 0; i < 12; ++i) {
    const int cls = i % 2;
    csv += std::to_string(i) + "," + std::to_string((i * 7) % 5) + "," +
           std::to_string(10 - i) + "," + (cls == 0 ? "u" : "w") + "\n";
  }
  const std::string input = write_file("impute-toy.csv", csv);
  const std::string trace = scratch_path("impute-trace.csv");
  REQUIRE(run_cli("impute --input " + input +
                  " --trees 12 --seed 2 --mcar 0.2 --iterations 2 --out " + trace)
              .code == 0);
  const std::string bytes = read_file(trace);
  CHECK(count_lines(bytes) == 1 + 3 * 2);  // header + 3 kinds x 2 iterations
  CHECK(bytes.rfind("iteration,kind,seed,mse\n", 0) == 0);

  const json meta = json::parse(read_file(trace + ".meta.json"));
  CHECK(meta.at("masked_cells").get<size_t>() == 7);  // round(0.2 * 12 * 3)
  CHECK(meta.at("iteration0_mse").get<double>() >= 0.0);
  CHECK(meta.at("kinds") == json::array({"original", "oob", "gap"}));

  // --write-imputed requires exactly one kind
  CHECK(run_cli("impute --input " + input + " --trees 12 --mcar 0.2 --out " + trace +
                " --write-imputed " + scratch_path("imp.csv"))
            .code == 2);
  REQUIRE(run_cli("impute --input " + input + " --trees 12 --seed 2 --mcar 0.2 --kind gap" +
                  " --out " + trace + " --write-imputed " + scratch_path("imp.csv"))
              .code == 0);
  const std::string imputed = read_file(scratch_path("imp.csv"));
  CHECK(imputed.rfind("a,b,c,cls\n", 0) == 0);
  CHECK(count_lines(imputed) == 13);
  CHECK(imputed.find("NA") == std::string::npos);  // every cell filled
}

TEST_CASE("cli: experiment processes good datasets and logs bad ones") {
  const std::string data_a = scratch_path("exp-a.csv");
  const std::string data_b = scratch_path("exp-b.csv");
  REQUIRE(run_cli("synth --name clusters:3.0 --rows 40 --seed 1 --out " + data_a).code == 0);
  REQUIRE(run_cli("synth --name mixed --rows 44 --seed 2 --out " + data_b).code == 0);
  const std::string manifest = write_file("exp-manifest.txt",
                                          "# comment line\n" + data_a + "\n" +
                                              scratch_path("exp-bogus.csv") + "\n" + data_b +
                                              "  \n\n");

  const std::string report = scratch_path("exp-report.csv");
  const CliRun r = run_cli("experiment --manifest " + manifest +
                           " --trees 20 --seeds 2 --split 0.5 --kind gap --out " + report);
  REQUIRE(r.code == 0);  // failures are logged, not fatal
  CHECK(r.err.find("exp-bogus.csv") != std::string::npos);
  CHECK(r.err.find("skipped") != std::string::npos);

  const std::string bytes = read_file(report);
  // 2 datasets x 1 grid point x 2 seeds x 1 kind x {train,test} = 8 rows
  CHECK(count_lines(bytes) == 1 + 8);
  CHECK(bytes.rfind("dataset,kind,seed,split,side,", 0) == 0);
  CHECK(bytes.find(data_a + ",gap,1,0.5,train,") != std::string::npos);
  CHECK(bytes.find(data_b + ",gap,2,0.5,test,") != std::string::npos);

  const json meta = json::parse(read_file(report + ".meta.json"));
  CHECK(meta.at("datasets") == 2);
  REQUIRE(meta.at("failures").size() == 1);
  CHECK(meta.at("failures")[0].at("dataset") == scratch_path("exp-bogus.csv"));
}

TEST_CASE("cli: predict-check reports the gap equivalence") {
  const std::string out = scratch_path("check.json");
  REQUIRE(run_cli("predict-check --input " + iris_path() +
                  " --trees 80 --seed 6 --min-node-size 1 --kind gap --out " + out)
              .code == 0);
  const json rep = json::parse(read_file(out));
  CHECK(rep.at("train").at("mismatches") == 0);
  CHECK(rep.at("train").at("compared") == 150);
  CHECK(rep.at("train").at("prox_error") == rep.at("train").at("forest_error"));
}
