#include "doctest.h"

#include "tlnet/netmodel.hpp"
#include "tlnet/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

using namespace tlnet;

namespace {

double sine_oracle(double x, double y) {
  return (1.0 + std::sin(std::numbers::pi * (1.0 + 3.0 * (x + y - 1.0)))) / 2.0;
}

bool symmetric_in_unit_range(const Matrix& m) {
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 && m.minCoeff() >= 0.0 &&
         m.maxCoeff() <= 1.0;
}

std::vector<Index> random_permutation(Index n, std::uint64_t seed) {
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

}  // namespace

TEST_CASE("latents are deterministic and inside their space") {
  const auto a = sample_latents(SmoothGraphon{0.5}, 3, 7);
  const auto b = sample_latents(SmoothGraphon{0.5}, 3, 7);
  CHECK(a.points == b.points);
  CHECK(a.valid());
  CHECK(a.points.minCoeff() >= 0.0);
  CHECK(a.points.maxCoeff() <= 1.0);

  const auto sphere = sample_latents(LatentDistance{1.0, 10}, 5, 3);
  REQUIRE(sphere.dim() == 10);
  for (Index i = 0; i < 5; ++i) CHECK(std::abs(sphere.points.row(i).norm() - 1.0) <= 1e-9);
}

TEST_CASE("dirichlet latents have mean 1/k") {
  NoisyMmsb m;
  m.k = 4;
  const auto lat = sample_latents(m, 10000, 11);
  CHECK(lat.valid());
  const Vector mean = lat.points.colwise().mean();
  for (Index c = 0; c < 4; ++c) CHECK(std::abs(mean(c) - 0.25) <= 0.02);
}

TEST_CASE("latent sampling rejects families without latents") {
  CHECK_THROWS_AS(sample_latents(Sbm{}, 5, 1), std::invalid_argument);
  CHECK_THROWS_AS(sample_latents(SmoothGraphon{}, 0, 1), std::invalid_argument);
}

TEST_CASE("prob matrix formulas") {
  SUBCASE("smooth graphon gamma 1") {
    LatentSample lat{Matrix{{0.0}, {1.0}}, LatentSpace::box};
    const auto p = build_prob_matrix(SmoothGraphon{1.0}, lat);
    CHECK(p.values().isApprox(Matrix{{0.0, 0.5}, {0.5, 1.0}}));
  }
  SUBCASE("sbm lookup") {
    Sbm s{Matrix{{0.9, 0.1}, {0.1, 0.9}}, {0, 0, 1}};
    const auto p = build_prob_matrix(s);
    CHECK(p(0, 1) == doctest::Approx(0.9));
    CHECK(p(0, 2) == doctest::Approx(0.1));
  }
  SUBCASE("sine graphon at 1/3") {
    LatentSample lat{Matrix{{1.0 / 3.0}, {1.0 / 3.0}}, LatentSpace::box};
    const auto p = build_prob_matrix(SineGraphon{}, lat);
    CHECK(p(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("sine transforms against a scalar oracle") {
    const auto lat = sample_latents(SineGraphon{}, 30, 5);
    const auto base = build_prob_matrix(SineGraphon{SineTransform::none}, lat);
    const auto flip = build_prob_matrix(SineGraphon{SineTransform::flip}, lat);
    const auto fold = build_prob_matrix(SineGraphon{SineTransform::fold}, lat);
    auto phi = [](double x) { return 0.5 + std::abs(x - 0.5); };
    for (Index i = 0; i < 30; ++i) {
      for (Index j = 0; j < 30; ++j) {
        const double x = lat.points(i, 0), y = lat.points(j, 0);
        CHECK(base(i, j) == doctest::Approx(sine_oracle(x, y)));
        CHECK(flip(i, j) == doctest::Approx(1.0 - sine_oracle(x, y)));
        CHECK(fold(i, j) == doctest::Approx(sine_oracle(phi(x), phi(y))));
      }
    }
  }
  SUBCASE("latent distance kernel") {
    const auto lat = sample_latents(LatentDistance{2.5, 10}, 20, 9);
    const auto p = build_prob_matrix(LatentDistance{2.5, 10}, lat);
    for (Index i = 0; i < 20; ++i) {
      CHECK(p(i, i) == doctest::Approx(1.0));
      for (Index j = 0; j < 20; ++j)
        CHECK(p(i, j) == doctest::Approx(std::exp(-2.5 * (lat.points.row(i) - lat.points.row(j)).norm())));
    }
  }
  SUBCASE("family and latent mismatch") {
    const auto sphere = sample_latents(LatentDistance{1.0, 3}, 4, 1);
    CHECK_THROWS_AS(build_prob_matrix(SmoothGraphon{}, sphere), std::invalid_argument);
    CHECK_THROWS_AS(build_prob_matrix(SmoothGraphon{}), std::invalid_argument);
  }
}

TEST_CASE("noisy mmsb connectivity") {
  NoisyMmsb m{0.7, 0.3, 0.01, 5, 42, 0.0};
  const Matrix b = mmsb_connectivity(m);
  CHECK(b == mmsb_connectivity(m));
  CHECK((b - b.transpose()).cwiseAbs().maxCoeff() == 0.0);
  for (Index r = 0; r < 5; ++r)
    for (Index c = 0; c < 5; ++c)
      CHECK(std::abs(b(r, c) - (r == c ? 0.7 : 0.3)) <= 0.01 + 1e-15);

  m.eps = 0.0;
  const Matrix exact = mmsb_connectivity(m);
  CHECK(exact.diagonal().isConstant(0.7));
  CHECK(exact(0, 1) == doctest::Approx(0.3));
}

TEST_CASE("simplex projection") {
  const Matrix x{{0.5, 0.3, 0.2}, {0.0, 0.0, 1.0}, {0.1, 0.1, 0.8}};
  const Matrix e = project_simplex(x, 2);
  CHECK(e.row(0).isApprox(Eigen::RowVector2d(0.6, 0.4)));
  CHECK(e.row(1).isApprox(Eigen::RowVector2d(0.5, 0.5)));
  CHECK(e.row(2).isApprox(Eigen::RowVector2d(0.5, 0.5)));

  const Matrix r = project_simplex(x, 2, SimplexProjection::renormalize);
  CHECK(r.row(0).isApprox(Eigen::RowVector2d(0.625, 0.375)));
  CHECK(r.row(1).isApprox(Eigen::RowVector2d(0.5, 0.5)));

  // Euclidean projection is the nearest point: no simplex point on a grid is closer.
  const Eigen::RowVector2d y = project_simplex(Matrix{{0.9, 0.05, 0.05}}, 2).row(0);
  const double best = (y - Eigen::RowVector2d(0.9, 0.05)).norm();
  for (int g = 0; g <= 100; ++g) {
    const Eigen::RowVector2d cand(g / 100.0, 1.0 - g / 100.0);
    CHECK(best <= (cand - Eigen::RowVector2d(0.9, 0.05)).norm() + 1e-12);
  }
}

TEST_CASE("every family yields a symmetric matrix in [0,1]") {
  const Index n = 40;
  NoisyMmsb mm{0.9, 0.1, 0.05, 0, 3, 0.0};
  const std::vector<ModelSpec> specs = {SmoothGraphon{0.1}, SmoothGraphon{0.5}, SineGraphon{},
                                        SineGraphon{SineTransform::fold}, mm,
                                        LatentDistance{1.0, 3}};
  for (const auto& raw : specs) {
    const auto spec = instantiate(raw, n, 10, ModelRole::source);
    const auto lat = sample_latents(spec, n, 17);
    CHECK(symmetric_in_unit_range(build_prob_matrix(spec, lat).values()));
  }
  const auto sbm = instantiate(Sbm{Matrix{{0.8, 0.2}, {0.2, 0.8}}, {}}, n, 10, ModelRole::source);
  CHECK(symmetric_in_unit_range(build_prob_matrix(sbm).values()));
}

TEST_CASE("instantiate resolves defaults") {
  const auto src = std::get<NoisyMmsb>(instantiate(NoisyMmsb{}, 200, 50, ModelRole::source));
  const auto tgt = std::get<NoisyMmsb>(instantiate(NoisyMmsb{}, 200, 50, ModelRole::target));
  CHECK(src.k == 14);
  CHECK(tgt.k == 7);
  CHECK(balanced_assignment(8, 4) == std::vector<int>{0, 0, 1, 1, 2, 2, 3, 3});
  const auto s = std::get<Sbm>(instantiate(Sbm{Matrix::Constant(3, 3, 0.5), {}}, 9, 3, ModelRole::source));
  CHECK(s.labels == std::vector<int>{0, 0, 0, 1, 1, 1, 2, 2, 2});
}

TEST_CASE("adjacency sampling") {
  SUBCASE("degenerate probabilities") {
    const auto full = sample_adjacency(ProbMatrix(Matrix::Ones(6, 6)), 1);
    CHECK(full.edge_count() == 15);
    CHECK(full.values().diagonal().isZero());
    CHECK(sample_adjacency(ProbMatrix(Matrix::Zero(6, 6)), 1).edge_count() == 0);
  }
  SUBCASE("density") {
    const auto a = sample_adjacency(ProbMatrix(Matrix::Constant(200, 200, 0.5)), 4);
    const double density = static_cast<double>(a.edge_count()) / (200.0 * 199.0 / 2.0);
    CHECK(std::abs(density - 0.5) <= 0.02);
    CHECK(a.values() == a.values().transpose());
  }
  SUBCASE("per-pair frequency") {
    const Matrix m{{0.0, 0.3, 0.8}, {0.3, 0.0, 0.05}, {0.8, 0.05, 0.0}};
    const ProbMatrix p(m);
    Matrix counts = Matrix::Zero(3, 3);
    const int reps = 10000;
    for (int s = 0; s < reps; ++s) counts += sample_adjacency(p, derive_seed(99, s)).values();
    for (Index i = 0; i < 3; ++i) {
      for (Index j = i + 1; j < 3; ++j) {
        const double q = m(i, j);
        CHECK(std::abs(counts(i, j) / reps - q) <= 3.0 * std::sqrt(q * (1 - q) / reps));
      }
    }
  }
  SUBCASE("determinism") {
    const ProbMatrix p(Matrix::Constant(30, 30, 0.3));
    CHECK(sample_adjacency(p, 5).values() == sample_adjacency(p, 5).values());
    CHECK(sample_adjacency(p, 5).values() != sample_adjacency(p, 6).values());
  }
}

TEST_CASE("matrix invariants are validated") {
  CHECK_THROWS_AS(ProbMatrix(Matrix{{0.0, 0.2}, {0.3, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(ProbMatrix(Matrix{{0.0, 1.2}, {1.2, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(AdjMatrix(Matrix{{1.0, 0.0}, {0.0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(AdjMatrix(Matrix{{0.0, 0.5}, {0.5, 0.0}}), std::invalid_argument);
}

TEST_CASE("target split") {
  const auto full = sample_target_split(5, 5, 1);
  CHECK(std::vector<Index>(full.members().begin(), full.members().end()) ==
        std::vector<Index>{0, 1, 2, 3, 4});
  const auto single = sample_target_split(10, 1, 2);
  REQUIRE(single.n_q() == 1);
  CHECK(single.members()[0] >= 0);
  CHECK(single.members()[0] < 10);
  CHECK_THROWS(sample_target_split(3, 4, 1));

  const Index n = 10000, n_q = 100;
  const int reps = 400;
  std::vector<int> hits(static_cast<std::size_t>(n), 0);
  for (int s = 0; s < reps; ++s)
    for (Index i : sample_target_split(n, n_q, derive_seed(7, s)).members()) ++hits[static_cast<std::size_t>(i)];
  // Aggregate over blocks of 100 indices so each frequency estimate has 4e4 draws.
  for (Index block = 0; block < n; block += 100) {
    int total = 0;
    for (Index i = block; i < block + 100; ++i) total += hits[static_cast<std::size_t>(i)];
    CHECK(std::abs(total / (100.0 * reps) - 0.01) <= 0.003);
  }
}

TEST_CASE("restrict") {
  const Matrix m{{0.1, 0.2, 0.3}, {0.2, 0.4, 0.5}, {0.3, 0.5, 0.6}};
  const ProbMatrix p(m);
  const std::vector<Index> all{0, 1, 2};
  CHECK(restrict(p, all).values() == m);
  const std::vector<Index> s{0, 2};
  CHECK(restrict(p, s).values() == Matrix{{0.1, 0.3}, {0.3, 0.6}});
  CHECK_THROWS_AS(restrict(p, std::vector<Index>{0, 3}), std::out_of_range);

  const auto big = sample_latents(SmoothGraphon{0.3}, 12, 1);
  const auto q = build_prob_matrix(SmoothGraphon{0.3}, big);
  const std::vector<Index> outer{1, 3, 4, 7, 9, 11};
  const std::vector<Index> inner{0, 2, 5};  // positions inside outer
  const std::vector<Index> composed{1, 4, 11};
  CHECK(restrict(restrict(q, outer), inner).values() == restrict(q, composed).values());
}

TEST_CASE("permutation equivariance of the prob matrix") {
  const auto spec = instantiate(NoisyMmsb{0.7, 0.3, 0.01, 0, 5, 0.0}, 30, 10, ModelRole::target);
  const auto lat = sample_latents(spec, 30, 21);
  const auto perm = random_permutation(30, 8);
  LatentSample permuted = lat;
  for (Index i = 0; i < 30; ++i) permuted.points.row(i) = lat.points.row(perm[static_cast<std::size_t>(i)]);
  const Matrix before = build_prob_matrix(spec, lat).values();
  const Matrix after = build_prob_matrix(spec, permuted).values();
  for (Index i = 0; i < 30; ++i)
    for (Index j = 0; j < 30; ++j)
      CHECK(after(i, j) == doctest::Approx(before(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)])));
}
