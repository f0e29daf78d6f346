#include "tlnet/estimators.hpp"

#include "tlnet/rng.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace tlnet {

double default_bandwidth(Index n_q) {
  if (n_q < 1) throw std::invalid_argument("default_bandwidth: n_q must be positive");
  const double nq = static_cast<double>(n_q);
  return std::clamp(std::sqrt(std::log(nq) / nq), 1.0 / nq, 1.0);
}

ProbMatrix average_over_neighborhoods(const AdjMatrix& a_q, const ObservationSplit& split,
                                      const NeighborhoodIndex& nbhd, const RowwiseOptions& opts) {
  if (a_q.size() != split.n_q())
    throw std::invalid_argument("estimate_rowwise: A_Q size does not match |S|");
  if (nbhd.size() != split.n())
    throw std::invalid_argument("estimate_rowwise: neighborhood index does not match split");

  const Index n = split.n();
  // Row i of R spreads weight 1/|T_i| over T_i, so R A_Q R^T averages over T_i x T_j.
  Matrix r = Matrix::Zero(n, split.n_q());
  for (Index i = 0; i < n; ++i) {
    const auto& set = nbhd.sets[static_cast<std::size_t>(i)];
    if (set.empty()) throw std::invalid_argument("estimate_rowwise: empty neighborhood");
    const double w = 1.0 / static_cast<double>(set.size());
    for (Index node : set) {
      const Index pos = split.position(node);
      if (pos < 0) throw std::invalid_argument("estimate_rowwise: neighborhood member outside S");
      r(i, pos) = w;
    }
  }
  Matrix est = r * a_q.values() * r.transpose();

  for (Index i = 0; i < n; ++i) {
    if (!opts.fill_diagonal) {
      est(i, i) = 0.0;
      continue;
    }
    // A_Q has a zero diagonal, so dropping the r == s pairs only shrinks the
    // denominator from t^2 to t(t-1).
    const double t = static_cast<double>(nbhd.sets[static_cast<std::size_t>(i)].size());
    if (t > 1.0) est(i, i) *= t / (t - 1.0);
  }
  est = est.cwiseMax(0.0).cwiseMin(1.0);
  return ProbMatrix(0.5 * (est + est.transpose()));
}

ProbMatrix estimate_rowwise(const AdjMatrix& a_p, const AdjMatrix& a_q,
                            const ObservationSplit& split, double h, const RowwiseOptions& opts) {
  if (a_p.size() != split.n())
    throw std::invalid_argument("estimate_rowwise: A_P size does not match n");
  const Matrix to_observed = graph_distance_block(a_p.values(), split.members());
  const NeighborhoodIndex nbhd = quantile_neighborhoods_from_block(to_observed, split, h);
  return average_over_neighborhoods(a_q, split, nbhd, opts);
}

Matrix Clustering::one_hot() const {
  Matrix z = Matrix::Zero(size(), k);
  for (Index i = 0; i < size(); ++i) z(i, labels[static_cast<std::size_t>(i)]) = 1.0;
  return z;
}

std::vector<Index> Clustering::cluster_sizes() const {
  std::vector<Index> sizes(static_cast<std::size_t>(k), 0);
  for (int z : labels) ++sizes[static_cast<std::size_t>(z)];
  return sizes;
}

namespace {

Matrix kmeans_plus_plus(const Matrix& x, int k, Rng& rng) {
  const Index m = x.rows();
  Matrix centers(k, x.cols());
  std::uniform_int_distribution<Index> first(0, m - 1);
  centers.row(0) = x.row(first(rng));
  Vector d2 = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Index pick = 0;
    if (total > 0.0) {
      double u = uniform01(rng) * total;
      pick = m - 1;
      for (Index i = 0; i < m; ++i) {
        u -= d2(i);
        if (u < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = first(rng);
    }
    centers.row(c) = x.row(pick);
    d2 = d2.cwiseMin((x.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return centers;
}

// Returns whether any label changed.
bool assign(const Matrix& x, const Matrix& centers, std::vector<int>& labels) {
  bool changed = false;
  for (Index i = 0; i < x.rows(); ++i) {
    Index best = 0;
    (centers.rowwise() - x.row(i)).rowwise().squaredNorm().minCoeff(&best);
    auto& label = labels[static_cast<std::size_t>(i)];
    if (label != static_cast<int>(best)) {
      label = static_cast<int>(best);
      changed = true;
    }
  }
  return changed;
}

// Moves the point farthest from its centroid into each empty cluster.
bool repair_empty(const Matrix& x, Matrix& centers, std::vector<int>& labels) {
  const int k = static_cast<int>(centers.rows());
  bool changed = false;
  for (;;) {
    std::vector<Index> sizes(static_cast<std::size_t>(k), 0);
    for (int z : labels) ++sizes[static_cast<std::size_t>(z)];
    const auto empty = std::find(sizes.begin(), sizes.end(), Index{0});
    if (empty == sizes.end()) return changed;

    Index far = -1;
    double far_d = -1.0;
    for (Index i = 0; i < x.rows(); ++i) {
      const int z = labels[static_cast<std::size_t>(i)];
      if (sizes[static_cast<std::size_t>(z)] <= 1) continue;
      const double d = (x.row(i) - centers.row(z)).squaredNorm();
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    const int target = static_cast<int>(empty - sizes.begin());
    labels[static_cast<std::size_t>(far)] = target;
    centers.row(target) = x.row(far);
    changed = true;
  }
}

void update_centers(const Matrix& x, const std::vector<int>& labels, Matrix& centers) {
  Vector counts = Vector::Zero(centers.rows());
  centers.setZero();
  for (Index i = 0; i < x.rows(); ++i) {
    const int z = labels[static_cast<std::size_t>(i)];
    centers.row(z) += x.row(i);
    counts(z) += 1.0;
  }
  for (Index c = 0; c < centers.rows(); ++c)
    if (counts(c) > 0.0) centers.row(c) /= counts(c);
}

std::vector<int> relabel_by_first_appearance(const std::vector<int>& labels, int k) {
  std::vector<int> map(static_cast<std::size_t>(k), -1);
  int next = 0;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto& m = map[static_cast<std::size_t>(labels[i])];
    if (m < 0) m = next++;
    out[i] = m;
  }
  return out;
}

}  // namespace

Clustering kmeans(const Matrix& points, int k, std::uint64_t seed, const KMeansOptions& opts) {
  const Index m = points.rows();
  if (k < 1) throw std::invalid_argument("kmeans: k must be positive");
  if (k > m) throw std::invalid_argument("kmeans: k exceeds the number of points");
  if (k == 1) return {std::vector<int>(static_cast<std::size_t>(m), 0), 1};

  Rng rng(seed);
  std::vector<int> best;
  double best_inertia = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < std::max(1, opts.restarts); ++restart) {
    Matrix centers = kmeans_plus_plus(points, k, rng);
    std::vector<int> labels(static_cast<std::size_t>(m), -1);
    assign(points, centers, labels);
    repair_empty(points, centers, labels);
    for (int it = 0; it < opts.max_iterations; ++it) {
      update_centers(points, labels, centers);
      bool changed = assign(points, centers, labels);
      changed = repair_empty(points, centers, labels) || changed;
      if (!changed) break;
    }
    update_centers(points, labels, centers);
    double inertia = 0.0;
    for (Index i = 0; i < m; ++i)
      inertia += (points.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best = std::move(labels);
    }
  }
  return {relabel_by_first_appearance(best, k), k};
}

Clustering spectral_cluster(const AdjMatrix& a, int k, std::uint64_t seed,
                            const KMeansOptions& opts) {
  const Index m = a.size();
  if (k < 1) throw std::invalid_argument("spectral_cluster: k must be positive");
  if (k > m) throw std::invalid_argument("spectral_cluster: k exceeds the number of nodes");
  if (k == 1) return {std::vector<int>(static_cast<std::size_t>(m), 0), 1};

  const Eigen::SelfAdjointEigenSolver<Matrix> eig(a.values());
  if (eig.info() != Eigen::Success) throw std::runtime_error("spectral_cluster: eigensolver failed");
  const Vector& values = eig.eigenvalues();
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) {
    return std::abs(values(x)) > std::abs(values(y));
  });
  Matrix embedding(m, k);
  for (int c = 0; c < k; ++c) embedding.col(c) = eig.eigenvectors().col(order[static_cast<std::size_t>(c)]);
  return kmeans(embedding, k, seed, opts);
}

namespace {

void check_clusterings(const Clustering& z_p, const Clustering& z_q, const ObservationSplit& split) {
  if (z_p.size() != split.n()) throw std::invalid_argument("community_map: Z_P must cover [n]");
  if (z_q.size() != split.n_q()) throw std::invalid_argument("community_map: Z_Q must cover S");
}

}  // namespace

CommunityMap community_map_exact(const Clustering& z_p, const Clustering& z_q,
                                 const ObservationSplit& split) {
  check_clusterings(z_p, z_q, split);
  CommunityMap map{Matrix::Zero(z_p.k, z_q.k), MapMode::exact, 0};
  std::vector<int> chosen(static_cast<std::size_t>(z_p.k), -1);
  const auto members = split.members();
  for (std::size_t r = 0; r < members.size(); ++r) {
    const int row = z_p.labels[static_cast<std::size_t>(members[r])];
    const int col = z_q.labels[r];
    int& prev = chosen[static_cast<std::size_t>(row)];
    if (prev >= 0 && prev != col) ++map.conflicts;
    map.pi.row(row).setZero();
    map.pi(row, col) = 1.0;
    prev = col;
  }
  return map;
}

CommunityMap community_map_lsq(const Clustering& z_p, const Clustering& z_q,
                               const ObservationSplit& split) {
  check_clusterings(z_p, z_q, split);
  const auto members = split.members();
  Matrix design = Matrix::Zero(split.n_q(), z_p.k);
  for (std::size_t r = 0; r < members.size(); ++r)
    design(static_cast<Index>(r), z_p.labels[static_cast<std::size_t>(members[r])]) = 1.0;
  const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(design);
  return {cod.solve(z_q.one_hot()), MapMode::lsq, 0};
}

Matrix block_average(const AdjMatrix& a_q, const Clustering& z_q) {
  if (z_q.size() != a_q.size()) throw std::invalid_argument("block_average: clustering size mismatch");
  const auto sizes = z_q.cluster_sizes();
  Vector inv(z_q.k);
  for (int c = 0; c < z_q.k; ++c) {
    if (sizes[static_cast<std::size_t>(c)] == 0)
      throw std::invalid_argument("block_average: empty cluster");
    inv(c) = 1.0 / static_cast<double>(sizes[static_cast<std::size_t>(c)]);
  }
  const Matrix z = z_q.one_hot();
  return inv.asDiagonal() * (z.transpose() * a_q.values() * z) * inv.asDiagonal();
}

ProbMatrix estimate_sbm_from_clusterings(const Clustering& z_p, const Clustering& z_q,
                                         const AdjMatrix& a_q, const ObservationSplit& split,
                                         MapMode mode) {
  if (a_q.size() != split.n_q()) throw std::invalid_argument("estimate_sbm: A_Q size does not match |S|");
  const CommunityMap map = mode == MapMode::exact ? community_map_exact(z_p, z_q, split)
                                                  : community_map_lsq(z_p, z_q, split);
  const Matrix b_q = block_average(a_q, z_q);
  Matrix blocks = map.pi * b_q * map.pi.transpose();
  blocks = (0.5 * (blocks + blocks.transpose())).cwiseMax(0.0).cwiseMin(1.0);

  const Index n = split.n();
  Matrix est(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      est(i, j) = blocks(z_p.labels[static_cast<std::size_t>(i)], z_p.labels[static_cast<std::size_t>(j)]);
  return ProbMatrix(std::move(est));
}

ProbMatrix estimate_sbm(const AdjMatrix& a_p, const AdjMatrix& a_q, const ObservationSplit& split,
                        const SbmOptions& opts, std::uint64_t seed) {
  if (a_p.size() != split.n()) throw std::invalid_argument("estimate_sbm: A_P size does not match n");
  auto ceil_sqrt = [](Index m) {
    return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(m))));
  };
  const int k_p = opts.k_p > 0 ? opts.k_p : std::min<int>(ceil_sqrt(split.n()), static_cast<int>(split.n()));
  const int k_q = opts.k_q > 0 ? opts.k_q : std::min<int>(ceil_sqrt(split.n_q()), static_cast<int>(split.n_q()));
  const Clustering z_p = spectral_cluster(a_p, k_p, derive_seed(seed, 1), opts.kmeans);
  const Clustering z_q = spectral_cluster(a_q, k_q, derive_seed(seed, 2), opts.kmeans);
  return estimate_sbm_from_clusterings(z_p, z_q, a_q, split, opts.mode);
}

AdjMatrix oracle_observation(const ProbMatrix& q, const ObservationSplit& split, double p_flip,
                             std::uint64_t seed) {
  if (!(p_flip >= 0.0 && p_flip <= 1.0)) throw std::invalid_argument("oracle: p_flip must lie in [0,1]");
  if (q.size() != split.n()) throw std::invalid_argument("oracle: Q size does not match split");
  const Index n = q.size();
  Rng rng(seed);
  Matrix a = Matrix::Zero(n, n);
  for (Index j = 1; j < n; ++j) {
    for (Index i = 0; i < j; ++i) {
      const bool y = uniform01(rng) < q(i, j);
      const bool x = uniform01(rng) < p_flip;
      const bool observed = split.contains(i) && split.contains(j);
      const bool edge = observed ? y : (x ? !y : y);
      if (edge) a(i, j) = a(j, i) = 1.0;
    }
  }
  return AdjMatrix(std::move(a));
}

ProbMatrix oracle_estimate(const ProbMatrix& q, const ObservationSplit& split,
                           const OracleConfig& cfg, std::uint64_t seed) {
  if (!(cfg.eta > 0.0)) throw std::invalid_argument("oracle: eta must be positive");
  return usvt(oracle_observation(q, split, cfg.p_flip, seed).values(), cfg.eta);
}

}  // namespace tlnet
