#pragma once

// Common-neighbor graph distance, quantile neighborhoods over the observed
// set, and the rankings containment check.

#include "tlnet/netmodel.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace tlnet {

enum class DistanceKind { population, empirical };

struct DistanceMatrix {
  Matrix values;  // symmetric, zero diagonal, nonnegative
  DistanceKind kind = DistanceKind::population;

  Index size() const { return values.rows(); }
};

/// d(i, j) = sum over l != i, j of ((M^2)_il - (M^2)_jl)^2, for every row i
/// and each column j in `cols`. Returns an n x |cols| block; entries with
/// i == cols[c] are zero.
template <typename Derived>
Matrix graph_distance_block(const Eigen::MatrixBase<Derived>& m, std::span<const Index> cols) {
  if (m.rows() != m.cols()) throw std::invalid_argument("graph_distance: matrix must be square");
  const Index n = m.rows();
  for (Index j : cols)
    if (j < 0 || j >= n) throw std::out_of_range("graph_distance: column out of range");

  // M^2 is symmetric: row i is read as column i.
  const Matrix g = m * m;
  Matrix out(n, static_cast<Index>(cols.size()));
  Vector diff(n);
  for (Index c = 0; c < out.cols(); ++c) {
    const Index j = cols[static_cast<std::size_t>(c)];
    for (Index i = 0; i < n; ++i) {
      if (i == j) {
        out(i, c) = 0.0;
        continue;
      }
      diff.noalias() = g.col(i) - g.col(j);
      diff(i) = 0.0;
      diff(j) = 0.0;
      out(i, c) = diff.squaredNorm();
    }
  }
  return out;
}

/// Full n x n distance matrix; only the upper triangle is computed.
template <typename Derived>
Matrix graph_distance_full(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("graph_distance: matrix must be square");
  const Index n = m.rows();
  const Matrix g = m * m;
  Matrix out = Matrix::Zero(n, n);
  Vector diff(n);
  for (Index j = 1; j < n; ++j) {
    for (Index i = 0; i < j; ++i) {
      diff.noalias() = g.col(i) - g.col(j);
      diff(i) = 0.0;
      diff(j) = 0.0;
      out(i, j) = out(j, i) = diff.squaredNorm();
    }
  }
  return out;
}

DistanceMatrix graph_distance_matrix(const ProbMatrix& m);
DistanceMatrix graph_distance_matrix(const AdjMatrix& a);
/// Any square symmetric real matrix; throws if asymmetric.
DistanceMatrix graph_distance_matrix(const Matrix& m, DistanceKind kind);

/// Quantile size max(1, floor(h * count)).
Index quantile_size(double h, Index count);

struct NeighborhoodIndex {
  double h = 1.0;
  Index quantile = 1;                   // max(1, floor(h * n_q))
  std::vector<std::vector<Index>> sets; // T_i as node ids in [n], ascending

  Index size() const { return static_cast<Index>(sets.size()); }
};

/// T_i = the `quantile` members of S \ {i} nearest to i (ties by node index),
/// plus i itself when i is in S.
NeighborhoodIndex quantile_neighborhoods(const DistanceMatrix& d, const ObservationSplit& split,
                                         double h);
/// Same from the n x n_q block of distances to S (column r is the r-th
/// member of S).
NeighborhoodIndex quantile_neighborhoods_from_block(const Matrix& to_observed,
                                                    const ObservationSplit& split, double h);

struct RankingsReport {
  double h = 0.0;
  std::optional<double> c_hat;                     // smallest grid C that works
  std::optional<std::pair<Index, Index>> witness;  // violating (i, j) at the largest C
};

std::vector<double> default_c_grid();

/// Checks: j in the bottom h-quantile of d_P(i, .) implies j in the bottom
/// C*h-quantile of d_Q(i, .), for all i. Quantiles are over all j != i and
/// tie-inclusive (j is in the bottom q-quantile when d(i, j) does not exceed
/// the max(1, floor(q (n-1)))-th smallest value, up to 1e-9 relative).
RankingsReport rankings_constant(const DistanceMatrix& d_p, const DistanceMatrix& d_q, double h,
                                 std::span<const double> c_grid);

}  // namespace tlnet
