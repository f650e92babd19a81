#include "afgcl/dataset.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "afgcl/io.hpp"

namespace afgcl {

namespace {

std::vector<std::string> split_on(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string trimmed(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

void Dataset::validate() const {
  graph.validate();
  const int n = graph.num_nodes;
  if (features.rows() != n)
    throw std::runtime_error("feature matrix must have one row per node");
  if (static_cast<int>(labels.size()) != n)
    throw std::runtime_error("labels length must equal node count");
  for (int i = 0; i < n; ++i)
    if (labels[i] < 0 || labels[i] >= num_classes)
      throw std::runtime_error("label of node " + std::to_string(i) +
                               " outside [0, num_classes)");
  if (!features.allFinite())
    throw std::runtime_error("features contain non-finite values");
  if (splits) {
    std::set<int> seen;
    for (const auto* part : {&splits->train, &splits->valid, &splits->test}) {
      for (int v : *part) {
        if (v < 0 || v >= n)
          throw std::runtime_error("split node id out of range");
        if (!seen.insert(v).second)
          throw std::runtime_error("splits overlap at node " +
                                   std::to_string(v));
      }
    }
  }
}

Dataset load_dataset(const std::string& graph_path,
                     const std::string& features_path,
                     const std::string& labels_path) {
  // Graph.
  const auto glines = io::split_lines(io::read_file(graph_path));
  if (glines.empty())
    throw std::runtime_error(graph_path + ":1: empty graph file");
  const auto header = split_on(trimmed(glines[0]), ' ');
  if (header.size() != 2)
    throw std::runtime_error(graph_path + ":1: expected header \"N E\"");
  const int n = io::parse_int(header[0], graph_path, 1);
  const int e = io::parse_int(header[1], graph_path, 1);
  if (n < 0 || e < 0)
    throw std::runtime_error(graph_path + ":1: negative count in header");
  if (static_cast<int>(glines.size()) != e + 1)
    throw std::runtime_error(graph_path + ": header promises " +
                             std::to_string(e) + " edge lines, found " +
                             std::to_string(glines.size() - 1));
  std::vector<std::pair<int, int>> edges;
  edges.reserve(e);
  for (int k = 0; k < e; ++k) {
    const std::size_t line_no = static_cast<std::size_t>(k) + 2;
    const auto toks = split_on(trimmed(glines[k + 1]), ' ');
    if (toks.size() != 2)
      throw std::runtime_error(graph_path + ":" + std::to_string(line_no) +
                               ": expected \"u v\"");
    const int u = io::parse_int(toks[0], graph_path, line_no);
    const int v = io::parse_int(toks[1], graph_path, line_no);
    if (u < 0 || u >= n || v < 0 || v >= n)
      throw std::runtime_error(graph_path + ":" + std::to_string(line_no) +
                               ": node id out of range [0, " +
                               std::to_string(n) + ")");
    edges.emplace_back(u, v);
  }

  Dataset ds;
  ds.graph = Graph::build(n, edges);

  // Features.
  const auto flines = io::split_lines(io::read_file(features_path));
  if (static_cast<int>(flines.size()) != n)
    throw std::runtime_error(features_path + ": row-count mismatch: graph has " +
                             std::to_string(n) + " nodes, features file has " +
                             std::to_string(flines.size()) + " rows");
  int f = -1;
  for (int i = 0; i < n; ++i) {
    const auto cells = split_on(flines[i], ',');
    if (f == -1) {
      f = static_cast<int>(cells.size());
      ds.features.resize(n, f);
    } else if (static_cast<int>(cells.size()) != f) {
      throw std::runtime_error(features_path + ":" + std::to_string(i + 1) +
                               ": expected " + std::to_string(f) +
                               " columns, found " +
                               std::to_string(cells.size()));
    }
    for (int j = 0; j < f; ++j)
      ds.features(i, j) = io::parse_double(trimmed(cells[j]), features_path,
                                           static_cast<std::size_t>(i) + 1);
  }

  // Labels.
  const auto llines = io::split_lines(io::read_file(labels_path));
  if (static_cast<int>(llines.size()) != n)
    throw std::runtime_error(labels_path + ": row-count mismatch: graph has " +
                             std::to_string(n) + " nodes, labels file has " +
                             std::to_string(llines.size()) + " lines");
  ds.labels.resize(n);
  int max_label = 0;
  for (int i = 0; i < n; ++i) {
    const int y = io::parse_int(trimmed(llines[i]), labels_path,
                                static_cast<std::size_t>(i) + 1);
    if (y < 0)
      throw std::runtime_error(labels_path + ":" + std::to_string(i + 1) +
                               ": labels must be non-negative");
    ds.labels[i] = y;
    max_label = std::max(max_label, y);
  }
  ds.num_classes = max_label + 1;

  ds.validate();
  return ds;
}

Splits load_splits(const std::string& path, int num_nodes) {
  const auto lines = io::split_lines(io::read_file(path));
  if (static_cast<int>(lines.size()) != num_nodes)
    throw std::runtime_error(path + ": expected " + std::to_string(num_nodes) +
                             " lines, found " + std::to_string(lines.size()));
  Splits s;
  for (int i = 0; i < num_nodes; ++i) {
    const std::string tag = trimmed(lines[i]);
    if (tag == "train")
      s.train.push_back(i);
    else if (tag == "valid")
      s.valid.push_back(i);
    else if (tag == "test")
      s.test.push_back(i);
    else if (tag != "none")
      throw std::runtime_error(path + ":" + std::to_string(i + 1) +
                               ": expected train/valid/test/none, got '" +
                               tag + "'");
  }
  return s;
}

void save_dataset(const Dataset& ds, const std::string& graph_path,
                  const std::string& features_path,
                  const std::string& labels_path) {
  std::string g = std::to_string(ds.graph.num_nodes) + " " +
                  std::to_string(ds.graph.num_edges) + "\n";
  for (const auto& [u, v] : ds.graph.undirected_edges())
    g += std::to_string(u) + " " + std::to_string(v) + "\n";
  io::write_file(graph_path, g);

  std::string x;
  for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < ds.features.cols(); ++j) {
      if (j > 0) x += ",";
      x += io::format_double(ds.features(i, j));
    }
    x += "\n";
  }
  io::write_file(features_path, x);

  std::string y;
  for (int label : ds.labels) y += std::to_string(label) + "\n";
  io::write_file(labels_path, y);
}

}  // namespace afgcl
