#pragma once

// Latent-variable network models: latent sampling, edge-probability matrices
// and Bernoulli adjacency sampling.

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace tlnet {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Symmetric n x n matrix with entries in [0,1]. Holds P, Q and estimates.
class ProbMatrix {
 public:
  ProbMatrix() = default;
  /// Validates symmetry (within 1e-12) and range; throws std::invalid_argument.
  explicit ProbMatrix(Matrix values);

  const Matrix& values() const { return values_; }
  Index size() const { return values_.rows(); }
  double operator()(Index i, Index j) const { return values_(i, j); }

 private:
  Matrix values_;
};

/// Symmetric binary matrix with zero diagonal. Holds A_P, A_Q and A'_Q.
class AdjMatrix {
 public:
  AdjMatrix() = default;
  explicit AdjMatrix(Matrix values);
  static AdjMatrix empty(Index n) { return AdjMatrix(Matrix::Zero(n, n)); }

  const Matrix& values() const { return values_; }
  Index size() const { return values_.rows(); }
  double operator()(Index i, Index j) const { return values_(i, j); }
  /// Number of undirected edges.
  Index edge_count() const;

 private:
  Matrix values_;
};

enum class LatentSpace { box, simplex, sphere };

/// n latent points stored as rows of an n x d matrix.
struct LatentSample {
  Matrix points;
  LatentSpace space = LatentSpace::box;

  Index size() const { return points.rows(); }
  Index dim() const { return points.cols(); }
  /// Membership test of every point in its space (tolerance 1e-9).
  bool valid() const;
};

// Generator families.

struct Sbm {
  Matrix connectivity;     // k x k, symmetric, entries in [0,1]
  std::vector<int> labels; // z: [n] -> [k], zero-based; empty until instantiated
};

struct SmoothGraphon {
  double gamma = 1.0;
};

enum class SineTransform { none, flip, fold };

struct SineGraphon {
  SineTransform transform = SineTransform::none;
};

/// Map from the source simplex onto the first k_Q coordinates.
enum class SimplexProjection { euclidean, renormalize };

struct NoisyMmsb {
  double a = 0.7;
  double b = 0.3;
  double eps = 0.0;
  int k = 0;                   // 0 = resolved from n at instantiation
  std::uint64_t noise_seed = 0;
  double concentration = 0.0;  // Dirichlet concentration; 0 = 1/k
  SimplexProjection projection = SimplexProjection::euclidean;
};

struct LatentDistance {
  double scale = 1.0;
  int dim = 2;
};

struct Custom {
  Matrix probs;
};

using ModelSpec =
    std::variant<Sbm, SmoothGraphon, SineGraphon, NoisyMmsb, LatentDistance, Custom>;

/// Which side of the transfer pair a spec plays; decides "auto" sizes.
enum class ModelRole { source, target };

std::string family_name(const ModelSpec& spec);
bool has_latents(const ModelSpec& spec);

/// Validates family parameters; throws std::invalid_argument.
void validate(const ModelSpec& spec);

/// Resolves size-dependent defaults: NoisyMmsb k = floor(sqrt(n)) for the
/// source and floor(sqrt(n_q)) for the target; Sbm labels = balanced
/// contiguous blocks over [n]. Explicit values are kept.
ModelSpec instantiate(const ModelSpec& spec, Index n, Index n_q, ModelRole role);

/// z(i) = floor(i * k / n).
std::vector<int> balanced_assignment(Index n, int k);

/// clip((a-b) I + b 11^T + (E+E^T)/2, 0, 1) with E ~ Uniform(-eps, eps)^{k x k}
/// drawn from `noise_seed`.
Matrix mmsb_connectivity(const NoisyMmsb& spec);

/// Maps each row onto the simplex over its first k coordinates.
///  euclidean:   nearest point of that face (1-Lipschitz).
///  renormalize: divide by the retained mass; zero mass maps to the uniform point.
Matrix project_simplex(const Matrix& points, int k,
                       SimplexProjection mode = SimplexProjection::euclidean);

LatentSample sample_latents(const ModelSpec& spec, Index n, std::uint64_t seed);

/// For Sbm and Custom (no latent space).
ProbMatrix build_prob_matrix(const ModelSpec& spec);
/// For latent families. The diagonal holds f(x_i, x_i).
ProbMatrix build_prob_matrix(const ModelSpec& spec, const LatentSample& latents);

/// A_ij ~ Bernoulli(M_ij) independently for i < j, mirrored; zero diagonal.
AdjMatrix sample_adjacency(const ProbMatrix& probs, std::uint64_t seed);

/// Sorted set S of observed target nodes.
class ObservationSplit {
 public:
  ObservationSplit() = default;
  /// Validates: distinct, in range, sorts.
  ObservationSplit(Index n, std::vector<Index> members);

  Index n() const { return n_; }
  Index n_q() const { return static_cast<Index>(members_.size()); }
  std::span<const Index> members() const { return members_; }
  bool contains(Index i) const { return position_[static_cast<std::size_t>(i)] >= 0; }
  /// Row of node i inside A_Q, or -1.
  Index position(Index i) const { return position_[static_cast<std::size_t>(i)]; }

 private:
  Index n_ = 0;
  std::vector<Index> members_;
  std::vector<Index> position_;
};

ObservationSplit sample_target_split(Index n, Index n_q, std::uint64_t seed);

/// Principal submatrix M[S,S] in the order of `indices`.
template <typename Derived>
Matrix principal_submatrix(const Eigen::MatrixBase<Derived>& m,
                           std::span<const Index> indices) {
  for (Index idx : indices) {
    if (idx < 0 || idx >= m.rows()) throw std::out_of_range("principal_submatrix: index out of range");
  }
  const Index k = static_cast<Index>(indices.size());
  Matrix out(k, k);
  for (Index c = 0; c < k; ++c)
    for (Index r = 0; r < k; ++r) out(r, c) = m(indices[r], indices[c]);
  return out;
}

ProbMatrix restrict(const ProbMatrix& m, std::span<const Index> indices);
AdjMatrix restrict(const AdjMatrix& m, std::span<const Index> indices);
inline ProbMatrix restrict(const ProbMatrix& m, const ObservationSplit& s) {
  return restrict(m, s.members());
}
inline AdjMatrix restrict(const AdjMatrix& m, const ObservationSplit& s) {
  return restrict(m, s.members());
}

}  // namespace tlnet
