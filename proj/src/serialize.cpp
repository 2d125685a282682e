#include "rfgap/serialize.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rfgap/common.hpp"

namespace rfgap {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  RFGAP_REQUIRE(res.ec == std::errc{}, "format_double: to_chars failed");
  return std::string(buf, res.ptr);
}

namespace {

constexpr const char* kForestFormat = "rfgap-forest";
constexpr int kForestVersion = 1;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  return out;
}

const char* task_name(Task t) {
  return t == Task::classification ? "classification" : "regression";
}

Task task_from_name(const std::string& s) {
  if (s == "classification") return Task::classification;
  if (s == "regression") return Task::regression;
  throw DataError("forest file: unknown task '" + s + "'");
}

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

uint64_t from_hex64(const std::string& s) {
  uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw DataError("forest file: bad hexadecimal field '" + s + "'");
  return v;
}

json encode_node(const TreeNode& n) {
  if (n.is_leaf()) return json::array({"L", n.leaf_id});
  if (n.categorical)
    return json::array(
        {"C", n.feature, hex64(n.left_mask), hex64(n.seen_mask), int(n.unseen_left), n.left, n.right});
  return json::array({"N", n.feature, n.threshold, n.left, n.right});
}

TreeNode decode_node(const json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_string())
    throw DataError("forest file: malformed node record");
  TreeNode n;
  const std::string tag = j[0].get<std::string>();
  if (tag == "L" && j.size() == 2) {
    n.leaf_id = j[1].get<int32_t>();
  } else if (tag == "N" && j.size() == 5) {
    n.feature = j[1].get<int32_t>();
    n.threshold = j[2].get<double>();
    n.left = j[3].get<int32_t>();
    n.right = j[4].get<int32_t>();
  } else if (tag == "C" && j.size() == 7) {
    n.categorical = true;
    n.feature = j[1].get<int32_t>();
    n.left_mask = from_hex64(j[2].get<std::string>());
    n.seen_mask = from_hex64(j[3].get<std::string>());
    n.unseen_left = j[4].get<int>() != 0;
    n.left = j[5].get<int32_t>();
    n.right = j[6].get<int32_t>();
  } else {
    throw DataError("forest file: malformed node record");
  }
  return n;
}

}  // namespace

void forest_save(const Forest& f, const std::string& path) {
  std::ofstream out = open_out(path);
  json header = {
      {"format", kForestFormat},
      {"version", kForestVersion},
      {"task", task_name(f.params.task)},
      {"n_trees", f.params.n_trees},
      {"mtry", f.params.mtry},
      {"min_node_size", f.params.min_node_size},
      {"seed", f.params.seed},
      {"n_rows", f.n_rows},
      {"n_classes", f.n_classes},
      {"schema_fingerprint", hex64(f.schema_fp)},
  };
  out << header.dump() << '\n';
  for (size_t t = 0; t < f.trees.size(); ++t) {
    json nodes = json::array();
    for (const auto& n : f.trees[t].nodes) nodes.push_back(encode_node(n));
    json line = {{"nodes", std::move(nodes)},
                 {"counts", f.bootstraps[t].counts},
                 {"depth", f.trees[t].depth}};
    out << line.dump() << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

Forest forest_load(const std::string& path, const Dataset& ds) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open forest file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError("forest file is empty: " + path);
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw DataError(std::string("forest file: bad header: ") + e.what());
  }
  if (header.value("format", "") != kForestFormat)
    throw DataError("not a forest file: " + path);
  if (header.value("version", 0) != kForestVersion)
    throw DataError("forest file: unsupported version");

  Forest f;
  try {
    f.params.task = task_from_name(header.at("task").get<std::string>());
    f.params.n_trees = header.at("n_trees").get<int>();
    f.params.mtry = header.at("mtry").get<int>();
    f.params.min_node_size = header.at("min_node_size").get<int>();
    f.params.seed = header.at("seed").get<uint64_t>();
    f.n_rows = header.at("n_rows").get<size_t>();
    f.n_classes = header.at("n_classes").get<size_t>();
    f.schema_fp = from_hex64(header.at("schema_fingerprint").get<std::string>());
  } catch (const json::exception& e) {
    throw DataError(std::string("forest file: bad header: ") + e.what());
  }
  if (f.params.task != ds.task) throw DataError("forest task does not match dataset");
  f.check_routable(ds);
  if (f.n_rows != ds.n_rows) throw DataError("forest row count does not match dataset");

  size_t t = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (int(t) >= f.params.n_trees) throw DataError("forest file: extra tree records");
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(std::string("forest file: bad tree record: ") + e.what());
    }
    Tree tree;
    try {
      for (const auto& jn : rec.at("nodes")) tree.nodes.push_back(decode_node(jn));
      tree.depth = rec.value("depth", 0);
      BootstrapRecord boot;
      boot.counts = rec.at("counts").get<std::vector<int32_t>>();
      if (boot.counts.size() != f.n_rows)
        throw DataError("forest file: bootstrap count length mismatch");
      for (size_t r = 0; r < boot.counts.size(); ++r) {
        if (boot.counts[r] < 0) throw DataError("forest file: negative bootstrap count");
        (boot.counts[r] > 0 ? boot.in_bag : boot.oob).push_back(int32_t(r));
      }
      rebuild_leaves(tree, ds, boot, f.params, f.n_classes);
      f.trees.push_back(std::move(tree));
      f.bootstraps.push_back(std::move(boot));
    } catch (const json::exception& e) {
      throw DataError(std::string("forest file: bad tree record: ") + e.what());
    }
    ++t;
  }
  if (int(t) != f.params.n_trees) throw DataError("forest file: missing tree records");
  index_oob_trees(f);
  return f;
}

namespace {

// RFC-4180 quoting for the rare label containing a delimiter or quote.
std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

void write_dataset_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out = open_out(path);
  for (const auto& f : ds.features) out << csv_escape(f.name) << ',';
  out << csv_escape(ds.target_name) << '\n';
  for (size_t r = 0; r < ds.n_rows; ++r) {
    for (const auto& f : ds.features) {
      if (!f.is_missing(r)) {
        if (f.kind == ColumnKind::numeric)
          out << format_double(f.values[r]);
        else
          out << csv_escape(f.labels[f.codes[r]]);
      }
      out << ',';
    }
    if (ds.task == Task::classification)
      out << csv_escape(ds.class_labels[ds.y_class[r]]);
    else
      out << format_double(ds.y_real[r]);
    out << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

void write_matrix_csv(const ProximityMatrix& p, const std::string& path, bool sparse) {
  std::ofstream out = open_out(path);
  if (sparse) {
    out << "i,j,value\n";
    for (size_t i = 0; i < p.n_query(); ++i)
      p.for_each_in_row(i, [&](int32_t j, double v) {
        out << i << ',' << j << ',' << format_double(v) << '\n';
      });
  } else {
    out << "row";
    for (size_t j = 0; j < p.n_train(); ++j) out << ',' << j;
    out << '\n';
    std::vector<double> dense(p.n_train());
    for (size_t i = 0; i < p.n_query(); ++i) {
      std::fill(dense.begin(), dense.end(), 0.0);
      p.for_each_in_row(i, [&](int32_t j, double v) { dense[j] = v; });
      out << i;
      for (size_t j = 0; j < p.n_train(); ++j) out << ',' << format_double(dense[j]);
      out << '\n';
    }
  }
  if (!out) throw DataError("write failed: " + path);
}

void write_embedding_csv(const Embedding& e, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "row_id";
  for (size_t k = 0; k < e.dims; ++k) out << ",dim" << (k + 1);
  out << '\n';
  for (size_t i = 0; i < e.n; ++i) {
    out << i;
    for (size_t k = 0; k < e.dims; ++k) out << ',' << format_double(e.coord(i, k));
    out << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

void write_outliers_csv(const OutlierResult& r, const Dataset& ds, const std::string& path) {
  RFGAP_REQUIRE(r.raw.size() == ds.n_rows, "write_outliers_csv: size mismatch");
  std::ofstream out = open_out(path);
  out << "row_id,class,raw,normalized,flag\n";
  for (size_t i = 0; i < ds.n_rows; ++i) {
    out << i << ',' << ds.class_labels[ds.y_class[i]] << ',' << format_double(r.raw[i])
        << ',' << format_double(r.normalized[i]) << ',' << int(r.flagged[i]) << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

void write_trace_csv(const std::vector<ImputationRunResult>& runs, uint64_t seed,
                     const std::string& path) {
  std::ofstream out = open_out(path);
  out << "iteration,kind,seed,mse\n";
  for (const auto& run : runs)
    for (size_t it = 1; it < run.mse_trace.size(); ++it)
      out << it << ',' << to_string(run.kind) << ',' << seed << ','
          << format_double(run.mse_trace[it]) << '\n';
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace rfgap
