#pragma once

// Estimators of the full target matrix Q from (A_P, A_Q on S):
//  - quantile-neighborhood averaging over graph-distance rankings,
//  - cluster-and-transfer for block models (exact or least-squares map),
//  - the flip-noise oracle baseline denoised by singular value thresholding.

#include "tlnet/graphdist.hpp"
#include "tlnet/netmodel.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace tlnet {

/// sqrt(log n_q / n_q), kept inside [1/n_q, 1].
double default_bandwidth(Index n_q);

struct RowwiseOptions {
  /// Fill Q̂_ii by averaging over T_i x T_i without the r == s pairs. When
  /// false the diagonal stays zero.
  bool fill_diagonal = true;
};

/// Averages A_Q over T_i x T_j for every pair (i, j). `a_q` rows follow the
/// sorted order of `split`.
ProbMatrix average_over_neighborhoods(const AdjMatrix& a_q, const ObservationSplit& split,
                                      const NeighborhoodIndex& nbhd,
                                      const RowwiseOptions& opts = {});

/// Graph distances on A_P (only the columns in S are needed), quantile
/// neighborhoods at bandwidth h, then neighborhood averaging.
ProbMatrix estimate_rowwise(const AdjMatrix& a_p, const AdjMatrix& a_q,
                            const ObservationSplit& split, double h,
                            const RowwiseOptions& opts = {});

struct Clustering {
  std::vector<int> labels;  // zero-based, every label < k
  int k = 0;

  Index size() const { return static_cast<Index>(labels.size()); }
  /// m x k indicator matrix.
  Matrix one_hot() const;
  std::vector<Index> cluster_sizes() const;
};

struct KMeansOptions {
  int restarts = 10;
  int max_iterations = 100;
};

/// k-means++ seeded Lloyd iterations on the rows of `points`; best of
/// `restarts` by inertia. Empty clusters take the point farthest from its
/// centroid. Labels are renumbered by first appearance.
Clustering kmeans(const Matrix& points, int k, std::uint64_t seed, const KMeansOptions& opts = {});

/// Embeds nodes with the k eigenvectors of largest |eigenvalue| and clusters
/// the embedding with kmeans.
Clustering spectral_cluster(const AdjMatrix& a, int k, std::uint64_t seed,
                            const KMeansOptions& opts = {});

enum class MapMode { exact, lsq };

struct CommunityMap {
  Matrix pi;  // k_P x k_Q
  MapMode mode = MapMode::exact;
  Index conflicts = 0;  // exact mode: rows overwritten with a different column
};

/// For each i in S (ascending), sets row z_P(i) of Π to the indicator of
/// z_Q(i); later nodes overwrite earlier ones.
CommunityMap community_map_exact(const Clustering& z_p, const Clustering& z_q,
                                 const ObservationSplit& split);

/// Minimum-norm solution of min ||J_S Z_P Π - Z_Q||_F.
CommunityMap community_map_lsq(const Clustering& z_p, const Clustering& z_q,
                               const ObservationSplit& split);

/// W Z^T A Z W with W = diag(1 / cluster size); throws on an empty cluster.
Matrix block_average(const AdjMatrix& a_q, const Clustering& z_q);

struct SbmOptions {
  int k_p = 0;  // 0 = ceil(sqrt(n))
  int k_q = 0;  // 0 = ceil(sqrt(n_q))
  MapMode mode = MapMode::lsq;
  KMeansOptions kmeans;
};

/// Z_P Π B̂_Q Π^T Z_P^T, clipped to [0,1].
ProbMatrix estimate_sbm_from_clusterings(const Clustering& z_p, const Clustering& z_q,
                                         const AdjMatrix& a_q, const ObservationSplit& split,
                                         MapMode mode);

ProbMatrix estimate_sbm(const AdjMatrix& a_p, const AdjMatrix& a_q, const ObservationSplit& split,
                        const SbmOptions& opts, std::uint64_t seed);

/// Universal singular value thresholding: keep singular values >= eta sqrt(m),
/// reconstruct, clip to [0,1], symmetrize.
template <typename Derived>
ProbMatrix usvt(const Eigen::MatrixBase<Derived>& observed, double eta = 2.02) {
  if (observed.rows() != observed.cols()) throw std::invalid_argument("usvt: matrix must be square");
  if (!(eta > 0.0)) throw std::invalid_argument("usvt: eta must be positive");
  const Index m = observed.rows();
  if (m == 0) return ProbMatrix(Matrix(0, 0));

  Eigen::BDCSVD<Matrix> svd(observed.derived().template cast<double>(),
                            Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double threshold = eta * std::sqrt(static_cast<double>(m));
  const Vector& sigma = svd.singularValues();
  Index kept = 0;
  while (kept < sigma.size() && sigma(kept) >= threshold) ++kept;

  Matrix est = svd.matrixU().leftCols(kept) * sigma.head(kept).asDiagonal() *
               svd.matrixV().leftCols(kept).transpose();
  est = est.cwiseMax(0.0).cwiseMin(1.0);
  return ProbMatrix(0.5 * (est + est.transpose()));
}

struct OracleConfig {
  double p_flip = 0.1;
  double eta = 2.02;
};

/// A'_Q: Y_ij ~ Bernoulli(Q_ij) on every pair; pairs outside S x S are flipped
/// with probability p_flip. Draws are coupled across p_flip for a fixed seed.
AdjMatrix oracle_observation(const ProbMatrix& q, const ObservationSplit& split, double p_flip,
                             std::uint64_t seed);

ProbMatrix oracle_estimate(const ProbMatrix& q, const ObservationSplit& split,
                           const OracleConfig& cfg, std::uint64_t seed);

}  // namespace tlnet
