#pragma once

// Metrics, error diagnostics and the Monte Carlo trial runner.

#include "tlnet/estimators.hpp"
#include "tlnet/graphdist.hpp"
#include "tlnet/netmodel.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tlnet {

/// (1/n^2) ||Q - Q̂||_F^2 over all entries. With include_diagonal = false the
/// diagonal is dropped and the sum is normalized by n(n-1).
double mse(const ProbMatrix& q, const ProbMatrix& qhat, bool include_diagonal = true);

struct ErrorDecomposition {
  double total_bound = 0.0;    // (2/n^2) sum (J_S + J_B)
  double smoothing_avg = 0.0;  // (2/n^2) sum J_S
  double bernoulli_avg = 0.0;  // (2/n^2) sum J_B
};

/// Smoothing and Bernoulli error terms of neighborhood averaging:
///   J_S(i,j) = (Q_ij - mean_{T_i x T_j} Q_rs)^2
///   J_B(i,j) = (mean_{T_i x T_j} (Q_rs - A_rs))^2
/// The diagonal averages over the same pairs the estimator uses (see
/// RowwiseOptions), so mse(Q, Q̂) <= total_bound holds for every draw when
/// the diagonal is filled.
ErrorDecomposition error_decomposition(const ProbMatrix& q, const AdjMatrix& a_q,
                                       const ObservationSplit& split,
                                       const NeighborhoodIndex& nbhd,
                                       const RowwiseOptions& opts = {});

/// (p - q) / sqrt(p (1 - q)), p = min diagonal, q = max off-diagonal.
double snr(const Matrix& b);

struct MembershipCounts {
  std::vector<Index> psi;  // psi[r] for the r-th member of S
  Index max = 0;
};

MembershipCounts membership_counts(const NeighborhoodIndex& nbhd, const ObservationSplit& split);

struct TrialStats {
  double mean = 0.0;
  double two_sigma = 0.0;  // 2 x sample standard deviation
  double p01 = 0.0;
  double p99 = 0.0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
};

/// Linear-interpolation percentile, q in [0, 100].
double percentile(std::vector<double> values, double q);
TrialStats summarize(const std::vector<double>& values, std::uint64_t seed);

enum class EstimatorKind { rowwise, sbm, oracle, truth };

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::rowwise;
  std::string label;
  double h = 0.0;  // rowwise bandwidth; 0 = default_bandwidth(n_q)
  RowwiseOptions rowwise;
  SbmOptions sbm;
  OracleConfig oracle;
};

/// Parses "rowwise", "rowwise(h=0.2,diag=zero)", "sbm(map=exact,kp=4,kq=2)",
/// "oracle(p=0.1,eta=2.02)" or "truth". Throws std::invalid_argument.
EstimatorSpec parse_estimator(std::string_view text);
/// Splits a list on whitespace or top-level commas.
std::vector<EstimatorSpec> parse_estimator_list(std::string_view text);

struct ExperimentConfig {
  std::string name = "experiment";
  ModelSpec source;
  ModelSpec target;
  Index n = 200;
  Index n_q = 50;
  std::size_t trials = 50;
  std::uint64_t seed = 1;
  std::vector<EstimatorSpec> estimators;
};

/// One draw of the transfer problem. Latents are shared by P and Q.
struct TrialInstance {
  std::uint64_t seed = 0;
  std::optional<LatentSample> latents;
  ProbMatrix p;
  ProbMatrix q;
  AdjMatrix a_p;
  ObservationSplit split;
  AdjMatrix a_q;  // on S, rows in sorted order of S
};

/// Throws std::invalid_argument when the pair cannot share latents.
void check_compatible(const ModelSpec& source, const ModelSpec& target);

/// Trial t uses seed derive_seed(cfg.seed, t), independent of other trials.
TrialInstance generate_trial(const ExperimentConfig& cfg, std::size_t t);

ProbMatrix run_estimator(const EstimatorSpec& spec, const TrialInstance& trial);

struct EstimatorResult {
  std::string label;
  TrialStats stats;
  std::vector<double> per_trial;  // MSE in trial order
};

/// Runs every estimator on every trial. `threads` = 0 uses the hardware
/// concurrency. Output does not depend on the thread count.
std::vector<EstimatorResult> run_experiment(const ExperimentConfig& cfg, unsigned threads = 0);

/// setting,estimator,mean,two_sigma,p01,p99,trials
void write_stats_csv_header(std::ostream& out);
void write_stats_csv(std::ostream& out, const std::string& setting,
                     const std::vector<EstimatorResult>& results);
std::string stats_json(const std::string& setting, const std::vector<EstimatorResult>& results);

}  // namespace tlnet
