#include "gpb/graph/bundle.hpp"

#include <fstream>
#include <map>
#include <string>

#include "gpb/error.hpp"
#include "gpb/text.hpp"

#include "json.hpp"

namespace gpb::graph {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CsvTable {
  std::string name;
  std::vector<std::string> lines;  // data rows, header stripped
};

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFileError("missing bundle file: " + path.string());
  CsvTable t{path.filename().string(), {}};
  std::string line;
  if (!std::getline(in, line)) throw ParseError(t.name + ": missing header row");
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    t.lines.push_back(line);
  }
  return t;
}

std::size_t as_index(std::string_view field, const std::string& where) {
  long long v;
  try {
    v = parse_int(field);
  } catch (const InvalidArgument& e) {
    throw ParseError(where + ": " + e.what());
  }
  if (v < 0) throw ParseError(where + ": negative id " + std::to_string(v));
  return static_cast<std::size_t>(v);
}

}  // namespace

Dataset load_bundle(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  std::ifstream mf(manifest_path);
  if (!mf) throw MissingFileError("missing bundle file: " + manifest_path.string());
  json manifest;
  try {
    mf >> manifest;
  } catch (const json::exception& e) {
    throw ParseError("manifest.json: " + std::string(e.what()));
  }

  Dataset ds;
  std::size_t declared_dim = 0;
  bool directed = false;
  try {
    ds.name = manifest.at("name").get<std::string>();
    ds.level = parse_level(manifest.at("level").get<std::string>());
    ds.num_classes = manifest.at("num_classes").get<std::size_t>();
    declared_dim = manifest.at("feature_dim").get<std::size_t>();
    directed = manifest.at("directed").get<bool>();
  } catch (const json::exception& e) {
    throw ParseError("manifest.json: " + std::string(e.what()));
  } catch (const InvalidArgument& e) {
    throw ParseError("manifest.json: " + std::string(e.what()));
  }

  const CsvTable nodes = read_csv(dir / "nodes.csv");
  const CsvTable edges = read_csv(dir / "edges.csv");

  // graph_id -> rows of (node_id, label, features)
  struct NodeRow {
    std::size_t node;
    int label;
    std::vector<double> feats;
  };
  std::map<std::size_t, std::vector<NodeRow>> by_graph;
  for (std::size_t i = 0; i < nodes.lines.size(); ++i) {
    const std::string where = "nodes.csv row " + std::to_string(i + 2);
    auto fields = split(nodes.lines[i], ',');
    if (fields.size() != 3 + declared_dim)
      throw RaggedRowError(where + ": expected " + std::to_string(3 + declared_dim) +
                           " fields, found " + std::to_string(fields.size()));
    NodeRow row;
    const std::size_t gid = as_index(fields[0], where);
    row.node = as_index(fields[1], where);
    long long label;
    try {
      label = parse_int(fields[2]);
    } catch (const InvalidArgument& e) {
      throw ParseError(where + ": " + e.what());
    }
    if (label != kUnlabeled && (label < 0 || static_cast<std::size_t>(label) >= ds.num_classes))
      throw LabelRangeError(where + ": label " + std::to_string(label) + " outside [0, " +
                            std::to_string(ds.num_classes) + ")");
    row.label = static_cast<int>(label);
    row.feats.reserve(declared_dim);
    for (std::size_t j = 0; j < declared_dim; ++j) {
      try {
        row.feats.push_back(parse_double(fields[3 + j]));
      } catch (const InvalidArgument& e) {
        throw ParseError(where + ": " + e.what());
      }
    }
    by_graph[gid].push_back(std::move(row));
  }
  if (by_graph.empty()) throw ParseError("nodes.csv: no nodes");
  const std::size_t num_graphs = by_graph.rbegin()->first + 1;
  if (by_graph.size() != num_graphs) throw ParseError("nodes.csv: graph ids are not contiguous");

  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> edge_lists(num_graphs);
  for (std::size_t i = 0; i < edges.lines.size(); ++i) {
    const std::string where = "edges.csv row " + std::to_string(i + 2);
    auto fields = split(edges.lines[i], ',');
    if (fields.size() != 3)
      throw RaggedRowError(where + ": expected 3 fields, found " + std::to_string(fields.size()));
    const std::size_t gid = as_index(fields[0], where);
    const std::size_t src = as_index(fields[1], where);
    const std::size_t dst = as_index(fields[2], where);
    if (gid >= num_graphs) throw DanglingEdgeError(where + ": unknown graph " + std::to_string(gid));
    const std::size_t n = by_graph[gid].size();
    if (src >= n || dst >= n)
      throw DanglingEdgeError(where + ": edge (" + std::to_string(src) + ", " +
                              std::to_string(dst) + ") references a node outside graph " +
                              std::to_string(gid) + " with " + std::to_string(n) + " nodes");
    edge_lists[gid].emplace_back(src, dst);
  }

  std::vector<std::optional<int>> graph_labels(num_graphs);
  if (fs::exists(dir / "graphs.csv")) {
    const CsvTable graphs = read_csv(dir / "graphs.csv");
    for (std::size_t i = 0; i < graphs.lines.size(); ++i) {
      const std::string where = "graphs.csv row " + std::to_string(i + 2);
      auto fields = split(graphs.lines[i], ',');
      if (fields.size() != 2)
        throw RaggedRowError(where + ": expected 2 fields, found " + std::to_string(fields.size()));
      const std::size_t gid = as_index(fields[0], where);
      if (gid >= num_graphs) throw ParseError(where + ": unknown graph " + std::to_string(gid));
      long long label;
      try {
        label = parse_int(fields[1]);
      } catch (const InvalidArgument& e) {
        throw ParseError(where + ": " + e.what());
      }
      if (label < 0 || static_cast<std::size_t>(label) >= ds.num_classes)
        throw LabelRangeError(where + ": label " + std::to_string(label) + " outside [0, " +
                              std::to_string(ds.num_classes) + ")");
      graph_labels[gid] = static_cast<int>(label);
    }
  }

  for (std::size_t gid = 0; gid < num_graphs; ++gid) {
    auto& rows = by_graph[gid];
    const std::size_t n = rows.size();
    std::vector<const NodeRow*> ordered(n, nullptr);
    for (const auto& r : rows) {
      if (r.node >= n || ordered[r.node])
        throw ParseError("nodes.csv: node ids of graph " + std::to_string(gid) +
                         " are not 0-based and contiguous");
      ordered[r.node] = &r;
    }
    Graph g;
    g.directed = directed;
    g.adj = SparseAdj::from_edges(n, edge_lists[gid], !directed);
    if (declared_dim == 0) {
      g.features = degree_one_hot(g.adj);
    } else {
      g.features = Matrix(n, declared_dim);
      for (std::size_t u = 0; u < n; ++u)
        std::copy(ordered[u]->feats.begin(), ordered[u]->feats.end(), g.features.row(u).begin());
    }
    bool any_label = false;
    for (const auto* r : ordered) any_label = any_label || r->label != kUnlabeled;
    if (any_label || ds.level == TaskLevel::node) {
      g.node_labels.resize(n);
      for (std::size_t u = 0; u < n; ++u) g.node_labels[u] = ordered[u]->label;
    }
    g.graph_label = graph_labels[gid];
    ds.graphs.push_back(std::move(g));
  }
  ds.validate();
  return ds;
}

void write_bundle(const Dataset& ds, const fs::path& dir) {
  ds.validate();
  fs::create_directories(dir);
  const std::size_t d = ds.feature_dim();
  json manifest = {{"name", ds.name},
                   {"level", to_string(ds.level)},
                   {"num_classes", ds.num_classes},
                   {"feature_dim", d},
                   {"directed", ds.graphs.front().directed}};
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";

  std::ofstream nodes(dir / "nodes.csv");
  nodes << "graph_id,node_id,label";
  for (std::size_t j = 0; j < d; ++j) nodes << ",f" << (j + 1);
  nodes << "\n";
  std::ofstream edges(dir / "edges.csv");
  edges << "graph_id,src,dst\n";
  for (std::size_t gid = 0; gid < ds.graphs.size(); ++gid) {
    const Graph& g = ds.graphs[gid];
    for (std::size_t u = 0; u < g.num_nodes(); ++u) {
      nodes << gid << ',' << u << ',' << (g.node_labels.empty() ? kUnlabeled : g.node_labels[u]);
      for (double v : g.features.row(u)) nodes << ',' << format_double(v);
      nodes << "\n";
    }
    for (auto [u, v] : g.adj.edge_list()) edges << gid << ',' << u << ',' << v << "\n";
  }
  if (ds.level == TaskLevel::graph) {
    std::ofstream graphs(dir / "graphs.csv");
    graphs << "graph_id,label\n";
    for (std::size_t gid = 0; gid < ds.graphs.size(); ++gid)
      graphs << gid << ',' << *ds.graphs[gid].graph_label << "\n";
  }
}

}  // namespace gpb::graph
