#include "tlnet/netmodel.hpp"

#include "tlnet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace tlnet {

namespace {

constexpr double kSymmetryTol = 1e-12;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return ((m - m.transpose()).array().abs() <= tol).all();
}

double sine_base(double x, double y) {
  return (1.0 + std::sin(std::numbers::pi * (1.0 + 3.0 * (x + y - 1.0)))) / 2.0;
}

double fold(double x) { return 0.5 + std::abs(x - 0.5); }

// Fills M_ij = f(i, j) for j <= i and mirrors.
template <typename F>
Matrix symmetric_from(Index n, F&& f) {
  Matrix m(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = j; i < n; ++i) {
      const double v = std::clamp(f(i, j), 0.0, 1.0);
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return m;
}

Matrix symmetrize_clip(const Matrix& m) {
  Matrix s = 0.5 * (m + m.transpose());
  return s.cwiseMax(0.0).cwiseMin(1.0);
}

}  // namespace

ProbMatrix::ProbMatrix(Matrix values) : values_(std::move(values)) {
  require(values_.rows() == values_.cols(), "ProbMatrix: matrix must be square");
  require(values_.allFinite(), "ProbMatrix: non-finite entry");
  require(is_symmetric(values_, kSymmetryTol), "ProbMatrix: matrix must be symmetric");
  require((values_.array() >= 0.0).all() && (values_.array() <= 1.0).all(),
          "ProbMatrix: entries must lie in [0,1]");
}

AdjMatrix::AdjMatrix(Matrix values) : values_(std::move(values)) {
  require(values_.rows() == values_.cols(), "AdjMatrix: matrix must be square");
  require((values_.array() == 0.0 || values_.array() == 1.0).all(),
          "AdjMatrix: entries must be 0 or 1");
  require(values_ == values_.transpose(), "AdjMatrix: matrix must be symmetric");
  require((values_.diagonal().array() == 0.0).all(), "AdjMatrix: diagonal must be zero");
}

Index AdjMatrix::edge_count() const {
  return static_cast<Index>(std::llround(values_.sum() / 2.0));
}

bool LatentSample::valid() const {
  constexpr double tol = 1e-9;
  for (Index i = 0; i < points.rows(); ++i) {
    const auto row = points.row(i);
    switch (space) {
      case LatentSpace::box:
        if ((row.array() < 0.0).any() || (row.array() > 1.0).any()) return false;
        break;
      case LatentSpace::simplex:
        if ((row.array() < 0.0).any() || std::abs(row.sum() - 1.0) > tol) return false;
        break;
      case LatentSpace::sphere:
        if (std::abs(row.norm() - 1.0) > tol) return false;
        break;
    }
  }
  return true;
}

std::string family_name(const ModelSpec& spec) {
  return std::visit(
      overloaded{
          [](const Sbm&) { return std::string("sbm"); },
          [](const SmoothGraphon&) { return std::string("smooth_graphon"); },
          [](const SineGraphon&) { return std::string("sine_graphon"); },
          [](const NoisyMmsb&) { return std::string("noisy_mmsb"); },
          [](const LatentDistance&) { return std::string("latent_distance"); },
          [](const Custom&) { return std::string("custom"); },
      },
      spec);
}

bool has_latents(const ModelSpec& spec) {
  return !std::holds_alternative<Sbm>(spec) && !std::holds_alternative<Custom>(spec);
}

void validate(const ModelSpec& spec) {
  std::visit(
      overloaded{
          [](const Sbm& s) {
            const Matrix& b = s.connectivity;
            require(b.rows() >= 1 && b.rows() == b.cols(), "sbm: connectivity must be square and nonempty");
            require(is_symmetric(b, kSymmetryTol), "sbm: connectivity must be symmetric");
            require((b.array() >= 0.0).all() && (b.array() <= 1.0).all(),
                    "sbm: connectivity entries must lie in [0,1]");
            for (int z : s.labels)
              require(z >= 0 && z < b.rows(), "sbm: label out of range");
          },
          [](const SmoothGraphon& s) { require(s.gamma > 0.0, "smooth_graphon: gamma must be positive"); },
          [](const SineGraphon&) {},
          [](const NoisyMmsb& s) {
            require(0.0 <= s.b && s.b <= s.a && s.a <= 1.0, "noisy_mmsb: need 0 <= b <= a <= 1");
            require(0.0 <= s.eps && s.eps <= 1.0, "noisy_mmsb: eps must lie in [0,1]");
            require(s.k >= 0, "noisy_mmsb: k must be positive");
            require(s.concentration >= 0.0, "noisy_mmsb: concentration must be positive");
          },
          [](const LatentDistance& s) {
            require(s.scale > 0.0, "latent_distance: scale must be positive");
            require(s.dim >= 1, "latent_distance: dim must be positive");
          },
          [](const Custom& s) { ProbMatrix check(s.probs); },
      },
      spec);
}

std::vector<int> balanced_assignment(Index n, int k) {
  require(k >= 1, "balanced_assignment: k must be positive");
  std::vector<int> z(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = static_cast<int>(i * k / n);
  return z;
}

ModelSpec instantiate(const ModelSpec& spec, Index n, Index n_q, ModelRole role) {
  ModelSpec out = spec;
  if (auto* m = std::get_if<NoisyMmsb>(&out); m && m->k == 0) {
    const Index size = role == ModelRole::source ? n : n_q;
    m->k = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(size)))));
  }
  if (auto* s = std::get_if<Sbm>(&out); s && s->labels.empty()) {
    s->labels = balanced_assignment(n, static_cast<int>(s->connectivity.rows()));
  }
  return out;
}

Matrix mmsb_connectivity(const NoisyMmsb& spec) {
  require(spec.k >= 1, "noisy_mmsb: k unresolved");
  const Index k = spec.k;
  Rng rng(spec.noise_seed);
  std::uniform_real_distribution<double> noise(-spec.eps, spec.eps);
  Matrix e(k, k);
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < k; ++i) e(i, j) = spec.eps > 0.0 ? noise(rng) : 0.0;
  Matrix b = (spec.a - spec.b) * Matrix::Identity(k, k) +
             Matrix::Constant(k, k, spec.b) + 0.5 * (e + e.transpose());
  return b.cwiseMax(0.0).cwiseMin(1.0);
}

Matrix project_simplex(const Matrix& points, int k, SimplexProjection mode) {
  require(k >= 1 && k <= points.cols(), "project_simplex: k out of range");
  Matrix out = points.leftCols(k);
  if (mode == SimplexProjection::renormalize) {
    for (Index i = 0; i < out.rows(); ++i) {
      const double mass = out.row(i).sum();
      if (mass > 0.0)
        out.row(i) /= mass;
      else
        out.row(i).setConstant(1.0 / k);
    }
    return out;
  }
  // Sort-and-threshold projection onto {y >= 0, sum y = 1}.
  std::vector<double> sorted(static_cast<std::size_t>(k));
  for (Index i = 0; i < out.rows(); ++i) {
    for (Index c = 0; c < k; ++c) sorted[static_cast<std::size_t>(c)] = out(i, c);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cum = 0.0, theta = 0.0;
    for (int c = 0; c < k; ++c) {
      cum += sorted[static_cast<std::size_t>(c)];
      const double t = (cum - 1.0) / (c + 1);
      if (sorted[static_cast<std::size_t>(c)] - t > 0.0) theta = t;
    }
    out.row(i) = (out.row(i).array() - theta).cwiseMax(0.0);
  }
  return out;
}

LatentSample sample_latents(const ModelSpec& spec, Index n, std::uint64_t seed) {
  require(n >= 1, "sample_latents: n must be positive");
  require(has_latents(spec), "sample_latents: family has no latent space");
  validate(spec);
  Rng rng(seed);
  LatentSample out;

  if (const auto* m = std::get_if<NoisyMmsb>(&spec)) {
    require(m->k >= 1, "sample_latents: noisy_mmsb k unresolved");
    const double alpha = m->concentration > 0.0 ? m->concentration : 1.0 / m->k;
    std::gamma_distribution<double> gamma(alpha, 1.0);
    out.space = LatentSpace::simplex;
    out.points.resize(n, m->k);
    for (Index i = 0; i < n; ++i) {
      double total = 0.0;
      while (total <= 0.0) {
        for (Index c = 0; c < m->k; ++c) out.points(i, c) = gamma(rng);
        total = out.points.row(i).sum();
      }
      out.points.row(i) /= total;
    }
  } else if (const auto* d = std::get_if<LatentDistance>(&spec)) {
    std::normal_distribution<double> normal(0.0, 1.0);
    out.space = LatentSpace::sphere;
    out.points.resize(n, d->dim);
    for (Index i = 0; i < n; ++i) {
      double norm = 0.0;
      while (norm == 0.0) {
        for (Index c = 0; c < d->dim; ++c) out.points(i, c) = normal(rng);
        norm = out.points.row(i).norm();
      }
      out.points.row(i) /= norm;
    }
  } else {
    out.space = LatentSpace::box;
    out.points.resize(n, 1);
    for (Index i = 0; i < n; ++i) out.points(i, 0) = uniform01(rng);
  }
  return out;
}

ProbMatrix build_prob_matrix(const ModelSpec& spec) {
  validate(spec);
  if (const auto* s = std::get_if<Sbm>(&spec)) {
    const Index n = static_cast<Index>(s->labels.size());
    require(n >= 1, "build_prob_matrix: sbm labels not assigned");
    return ProbMatrix(symmetric_from(n, [&](Index i, Index j) {
      return s->connectivity(s->labels[static_cast<std::size_t>(i)],
                             s->labels[static_cast<std::size_t>(j)]);
    }));
  }
  if (const auto* c = std::get_if<Custom>(&spec)) return ProbMatrix(c->probs);
  throw std::invalid_argument("build_prob_matrix: " + family_name(spec) + " requires latents");
}

ProbMatrix build_prob_matrix(const ModelSpec& spec, const LatentSample& latents) {
  validate(spec);
  require(has_latents(spec), "build_prob_matrix: family takes no latents");
  require(latents.size() >= 1, "build_prob_matrix: empty latent sample");
  const Index n = latents.size();
  const Matrix& x = latents.points;

  return std::visit(
      overloaded{
          [&](const SmoothGraphon& s) {
            require(latents.space == LatentSpace::box && latents.dim() == 1,
                    "build_prob_matrix: smooth_graphon needs scalar latents in [0,1]");
            const Vector powered = x.col(0).array().pow(s.gamma);
            return ProbMatrix(symmetric_from(n, [&](Index i, Index j) {
              return (powered(i) + powered(j)) / 2.0;
            }));
          },
          [&](const SineGraphon& s) {
            require(latents.space == LatentSpace::box && latents.dim() == 1,
                    "build_prob_matrix: sine_graphon needs scalar latents in [0,1]");
            return ProbMatrix(symmetric_from(n, [&](Index i, Index j) {
              const double xi = x(i, 0), xj = x(j, 0);
              switch (s.transform) {
                case SineTransform::flip: return 1.0 - sine_base(xi, xj);
                case SineTransform::fold: return sine_base(fold(xi), fold(xj));
                case SineTransform::none: break;
              }
              return sine_base(xi, xj);
            }));
          },
          [&](const NoisyMmsb& m) {
            require(latents.space == LatentSpace::simplex,
                    "build_prob_matrix: noisy_mmsb needs simplex latents");
            require(m.k >= 1 && m.k <= latents.dim(),
                    "build_prob_matrix: noisy_mmsb k exceeds latent dimension");
            const Matrix z = m.k == latents.dim() ? x : project_simplex(x, m.k, m.projection);
            const Matrix b = mmsb_connectivity(m);
            return ProbMatrix(symmetrize_clip(z * b * z.transpose()));
          },
          [&](const LatentDistance& d) {
            require(latents.space == LatentSpace::sphere && latents.dim() == d.dim,
                    "build_prob_matrix: latent_distance dimension mismatch");
            return ProbMatrix(symmetric_from(n, [&](Index i, Index j) {
              return std::exp(-d.scale * (x.row(i) - x.row(j)).norm());
            }));
          },
          [](const auto&) -> ProbMatrix {
            throw std::invalid_argument("build_prob_matrix: unreachable family");
          },
      },
      spec);
}

AdjMatrix sample_adjacency(const ProbMatrix& probs, std::uint64_t seed) {
  const Index n = probs.size();
  Rng rng(seed);
  Matrix a = Matrix::Zero(n, n);
  for (Index j = 1; j < n; ++j) {
    for (Index i = 0; i < j; ++i) {
      if (uniform01(rng) < probs(i, j)) {
        a(i, j) = 1.0;
        a(j, i) = 1.0;
      }
    }
  }
  return AdjMatrix(std::move(a));
}

ObservationSplit::ObservationSplit(Index n, std::vector<Index> members)
    : n_(n), members_(std::move(members)) {
  require(n >= 0, "ObservationSplit: negative n");
  require(static_cast<Index>(members_.size()) <= n, "ObservationSplit: more members than nodes");
  std::sort(members_.begin(), members_.end());
  require(std::adjacent_find(members_.begin(), members_.end()) == members_.end(),
          "ObservationSplit: duplicate member");
  position_.assign(static_cast<std::size_t>(n), -1);
  for (std::size_t r = 0; r < members_.size(); ++r) {
    const Index i = members_[r];
    if (i < 0 || i >= n) throw std::out_of_range("ObservationSplit: member out of range");
    position_[static_cast<std::size_t>(i)] = static_cast<Index>(r);
  }
}

ObservationSplit sample_target_split(Index n, Index n_q, std::uint64_t seed) {
  require(n_q >= 1, "sample_target_split: n_q must be positive");
  require(n_q <= n, "sample_target_split: n_q exceeds n");
  std::vector<Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Index{0});
  Rng rng(seed);
  // Partial Fisher-Yates.
  for (Index r = 0; r < n_q; ++r) {
    std::uniform_int_distribution<Index> pick(r, n - 1);
    std::swap(all[static_cast<std::size_t>(r)], all[static_cast<std::size_t>(pick(rng))]);
  }
  all.resize(static_cast<std::size_t>(n_q));
  return ObservationSplit(n, std::move(all));
}

ProbMatrix restrict(const ProbMatrix& m, std::span<const Index> indices) {
  return ProbMatrix(principal_submatrix(m.values(), indices));
}

AdjMatrix restrict(const AdjMatrix& m, std::span<const Index> indices) {
  return AdjMatrix(principal_submatrix(m.values(), indices));
}

}  // namespace tlnet
