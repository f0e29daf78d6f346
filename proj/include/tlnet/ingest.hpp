#pragma once

// Static edge lists and temporal interaction logs.

#include "tlnet/netmodel.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace tlnet {

struct LabeledGraph {
  std::vector<std::string> labels;  // distinct; row order of adj
  AdjMatrix adj;

  Index size() const { return static_cast<Index>(labels.size()); }
};

struct Interaction {
  std::string u;
  std::string v;
  double t = 0.0;
};

struct TemporalLog {
  std::vector<Interaction> triples;  // file order, self-loops removed
};

/// "u v" per line, '#' starts a comment. Undirected, duplicates collapsed,
/// self-loops dropped, labels in order of first appearance. Throws DataError
/// with the line number on a malformed line.
LabeledGraph parse_edge_list(std::istream& in, const std::string& source = "<stream>");
LabeledGraph load_edge_list(const std::filesystem::path& path);

/// "u v t" per line with a finite nonnegative timestamp.
TemporalLog parse_temporal_log(std::istream& in, const std::string& source = "<stream>");
TemporalLog load_temporal_log(const std::filesystem::path& path);

/// Orders labels numerically when every label is an unsigned integer,
/// lexicographically otherwise.
void sort_labels(std::vector<std::string>& labels);

/// Splits the log at timestamp percentiles into `bins` graphs over the
/// sorted union node set. Boundary k (k = 1..bins-1) is the order statistic
/// at zero-based rank floor(k N / bins); bins are [b_k, b_{k+1}).
std::vector<LabeledGraph> bin_temporal(const TemporalLog& log, int bins = 10);

/// Restricts every graph to the sorted intersection of their label sets.
std::vector<LabeledGraph> intersect_nodes(const std::vector<LabeledGraph>& graphs);

}  // namespace tlnet
