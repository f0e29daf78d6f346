#include "tlnet/graphdist.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tlnet {

namespace {

void check_bandwidth(double h) {
  if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("bandwidth h must lie in (0,1]");
}

}  // namespace

DistanceMatrix graph_distance_matrix(const Matrix& m, DistanceKind kind) {
  if (m.rows() != m.cols()) throw std::invalid_argument("graph_distance: matrix must be square");
  if (((m - m.transpose()).array().abs() > 1e-12).any())
    throw std::invalid_argument("graph_distance: matrix must be symmetric");
  return {graph_distance_full(m), kind};
}

DistanceMatrix graph_distance_matrix(const ProbMatrix& m) {
  return {graph_distance_full(m.values()), DistanceKind::population};
}

DistanceMatrix graph_distance_matrix(const AdjMatrix& a) {
  return {graph_distance_full(a.values()), DistanceKind::empirical};
}

Index quantile_size(double h, Index count) {
  return std::max<Index>(1, static_cast<Index>(std::floor(h * static_cast<double>(count))));
}

NeighborhoodIndex quantile_neighborhoods_from_block(const Matrix& to_observed,
                                                    const ObservationSplit& split, double h) {
  check_bandwidth(h);
  if (to_observed.rows() != split.n() || to_observed.cols() != split.n_q())
    throw std::invalid_argument("quantile_neighborhoods: distance block does not match split");

  const auto members = split.members();
  NeighborhoodIndex out;
  out.h = h;
  out.quantile = quantile_size(h, split.n_q());
  out.sets.resize(static_cast<std::size_t>(split.n()));

  std::vector<Index> order;
  for (Index i = 0; i < split.n(); ++i) {
    order.clear();
    for (Index r = 0; r < split.n_q(); ++r)
      if (members[static_cast<std::size_t>(r)] != i) order.push_back(r);

    const auto take = std::min<std::size_t>(static_cast<std::size_t>(out.quantile), order.size());
    // Columns are in ascending node order, so comparing column positions
    // breaks ties by node index.
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      [&](Index a, Index b) {
                        const double da = to_observed(i, a), db = to_observed(i, b);
                        return da < db || (da == db && a < b);
                      });

    auto& set = out.sets[static_cast<std::size_t>(i)];
    set.reserve(take + 1);
    for (std::size_t t = 0; t < take; ++t) set.push_back(members[static_cast<std::size_t>(order[t])]);
    if (split.contains(i)) set.push_back(i);
    std::sort(set.begin(), set.end());
  }
  return out;
}

NeighborhoodIndex quantile_neighborhoods(const DistanceMatrix& d, const ObservationSplit& split,
                                         double h) {
  if (d.size() != split.n())
    throw std::invalid_argument("quantile_neighborhoods: distance size does not match split");
  Matrix block(split.n(), split.n_q());
  const auto members = split.members();
  for (Index r = 0; r < split.n_q(); ++r) block.col(r) = d.values.col(members[static_cast<std::size_t>(r)]);
  return quantile_neighborhoods_from_block(block, split, h);
}

std::vector<double> default_c_grid() { return {1.0, 1.5, 2.0, 3.0, 5.0, 10.0}; }

namespace {

// Per-row tie-inclusive quantile thresholds over j != i.
Vector quantile_thresholds(const Matrix& d, double q) {
  const Index n = d.rows();
  const Index others = n - 1;
  const Index k = std::min(others, quantile_size(q, others));
  Vector out(n);
  std::vector<double> row;
  for (Index i = 0; i < n; ++i) {
    row.clear();
    double scale = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      row.push_back(d(i, j));
      scale = std::max(scale, std::abs(d(i, j)));
    }
    std::nth_element(row.begin(), row.begin() + (k - 1), row.end());
    out(i) = row[static_cast<std::size_t>(k - 1)] + 1e-9 * scale;
  }
  return out;
}

}  // namespace

RankingsReport rankings_constant(const DistanceMatrix& d_p, const DistanceMatrix& d_q, double h,
                                 std::span<const double> c_grid) {
  check_bandwidth(h);
  if (c_grid.empty()) throw std::invalid_argument("rankings_constant: empty C grid");
  if (c_grid.front() < 1.0 || !std::is_sorted(c_grid.begin(), c_grid.end()))
    throw std::invalid_argument("rankings_constant: C grid must be ascending and start at >= 1");
  if (d_p.size() != d_q.size())
    throw std::invalid_argument("rankings_constant: dimension mismatch");

  RankingsReport report;
  report.h = h;
  const Index n = d_p.size();
  if (n < 2) {
    report.c_hat = c_grid.front();
    return report;
  }

  const Vector p_thr = quantile_thresholds(d_p.values, h);
  for (double c : c_grid) {
    const Vector q_thr = quantile_thresholds(d_q.values, std::min(1.0, c * h));
    std::optional<std::pair<Index, Index>> violation;
    for (Index i = 0; i < n && !violation; ++i) {
      for (Index j = 0; j < n; ++j) {
        if (j == i) continue;
        if (d_p.values(i, j) <= p_thr(i) && d_q.values(i, j) > q_thr(i)) {
          violation = std::pair{i, j};
          break;
        }
      }
    }
    if (!violation) {
      report.c_hat = c;
      report.witness.reset();
      return report;
    }
    report.witness = violation;
  }
  return report;
}

}  // namespace tlnet
