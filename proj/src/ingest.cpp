#include "tlnet/ingest.hpp"

#include "tlnet/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace tlnet {

namespace {

// Tokens of a line with any '#' comment removed.
std::vector<std::string> tokens_of(std::string line) {
  if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
  std::vector<std::string> out;
  std::istringstream ss(line);
  for (std::string tok; ss >> tok;) out.push_back(std::move(tok));
  return out;
}

std::string where(const std::string& source, std::size_t line_no) {
  return source + ":" + std::to_string(line_no) + ": ";
}

class LabelIndex {
 public:
  Index id(const std::string& label) {
    auto [it, inserted] = ids_.try_emplace(label, static_cast<Index>(labels_.size()));
    if (inserted) labels_.push_back(label);
    return it->second;
  }
  std::vector<std::string>& labels() { return labels_; }

 private:
  std::unordered_map<std::string, Index> ids_;
  std::vector<std::string> labels_;
};

bool parse_unsigned(const std::string& s, unsigned long long& v) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

LabeledGraph graph_from_edges(std::vector<std::string> labels,
                              const std::vector<std::pair<Index, Index>>& edges) {
  const Index n = static_cast<Index>(labels.size());
  Matrix a = Matrix::Zero(n, n);
  for (auto [u, v] : edges) a(u, v) = a(v, u) = 1.0;
  return {std::move(labels), AdjMatrix(std::move(a))};
}

}  // namespace

LabeledGraph parse_edge_list(std::istream& in, const std::string& source) {
  LabelIndex index;
  std::vector<std::pair<Index, Index>> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tok = tokens_of(line);
    if (tok.empty()) continue;
    if (tok.size() != 2) throw DataError(where(source, line_no) + "expected 'u v', got '" + line + "'");
    const Index u = index.id(tok[0]);
    const Index v = index.id(tok[1]);
    if (u != v) edges.emplace_back(u, v);
  }
  return graph_from_edges(std::move(index.labels()), edges);
}

LabeledGraph load_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_edge_list(in, path.string());
}

TemporalLog parse_temporal_log(std::istream& in, const std::string& source) {
  TemporalLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tok = tokens_of(line);
    if (tok.empty()) continue;
    if (tok.size() != 3) throw DataError(where(source, line_no) + "expected 'u v t', got '" + line + "'");
    double t = 0.0;
    const auto& ts = tok[2];
    const auto [ptr, ec] = std::from_chars(ts.data(), ts.data() + ts.size(), t);
    if (ec != std::errc() || ptr != ts.data() + ts.size() || !std::isfinite(t) || t < 0.0)
      throw DataError(where(source, line_no) + "bad timestamp '" + ts + "'");
    if (tok[0] == tok[1]) continue;
    log.triples.push_back({tok[0], tok[1], t});
  }
  return log;
}

TemporalLog load_temporal_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_temporal_log(in, path.string());
}

void sort_labels(std::vector<std::string>& labels) {
  std::vector<unsigned long long> values(labels.size());
  bool numeric = true;
  for (std::size_t i = 0; i < labels.size() && numeric; ++i) numeric = parse_unsigned(labels[i], values[i]);
  if (!numeric) {
    std::sort(labels.begin(), labels.end());
    return;
  }
  std::vector<std::size_t> order(labels.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] != values[b] ? values[a] < values[b] : labels[a] < labels[b];
  });
  std::vector<std::string> sorted;
  sorted.reserve(labels.size());
  for (std::size_t i : order) sorted.push_back(std::move(labels[i]));
  labels = std::move(sorted);
}

std::vector<LabeledGraph> bin_temporal(const TemporalLog& log, int bins) {
  if (bins < 1) throw std::invalid_argument("bin_temporal: bins must be positive");
  if (log.triples.empty()) throw std::invalid_argument("bin_temporal: empty log");

  std::set<std::string> unique;
  for (const auto& e : log.triples) {
    unique.insert(e.u);
    unique.insert(e.v);
  }
  std::vector<std::string> labels(unique.begin(), unique.end());
  sort_labels(labels);
  std::unordered_map<std::string, Index> id;
  for (std::size_t i = 0; i < labels.size(); ++i) id[labels[i]] = static_cast<Index>(i);

  std::vector<double> times;
  times.reserve(log.triples.size());
  for (const auto& e : log.triples) times.push_back(e.t);
  std::sort(times.begin(), times.end());
  const std::size_t total = times.size();
  std::vector<double> bounds;
  for (int k = 1; k < bins; ++k)
    bounds.push_back(times[static_cast<std::size_t>(k) * total / static_cast<std::size_t>(bins)]);

  const Index n = static_cast<Index>(labels.size());
  std::vector<Matrix> adj(static_cast<std::size_t>(bins), Matrix::Zero(n, n));
  for (const auto& e : log.triples) {
    const auto bin = static_cast<std::size_t>(std::upper_bound(bounds.begin(), bounds.end(), e.t) - bounds.begin());
    const Index u = id.at(e.u), v = id.at(e.v);
    adj[bin](u, v) = adj[bin](v, u) = 1.0;
  }

  std::vector<LabeledGraph> out;
  out.reserve(adj.size());
  for (auto& a : adj) out.push_back({labels, AdjMatrix(std::move(a))});
  return out;
}

std::vector<LabeledGraph> intersect_nodes(const std::vector<LabeledGraph>& graphs) {
  if (graphs.empty()) throw std::invalid_argument("intersect_nodes: no graphs");
  std::set<std::string> common(graphs.front().labels.begin(), graphs.front().labels.end());
  for (std::size_t g = 1; g < graphs.size(); ++g) {
    const std::set<std::string> other(graphs[g].labels.begin(), graphs[g].labels.end());
    std::set<std::string> keep;
    std::set_intersection(common.begin(), common.end(), other.begin(), other.end(),
                          std::inserter(keep, keep.end()));
    common = std::move(keep);
  }
  if (common.empty()) throw std::invalid_argument("intersect_nodes: node sets are disjoint");
  std::vector<std::string> labels(common.begin(), common.end());
  sort_labels(labels);

  std::vector<LabeledGraph> out;
  for (const auto& g : graphs) {
    std::unordered_map<std::string, Index> pos;
    for (std::size_t i = 0; i < g.labels.size(); ++i) pos[g.labels[i]] = static_cast<Index>(i);
    std::vector<Index> rows;
    rows.reserve(labels.size());
    for (const auto& l : labels) rows.push_back(pos.at(l));
    out.push_back({labels, restrict(g.adj, rows)});
  }
  return out;
}

}  // namespace tlnet
