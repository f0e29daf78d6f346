#include "tlnet/evalkit.hpp"

#include "tlnet/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace tlnet {

double mse(const ProbMatrix& q, const ProbMatrix& qhat, bool include_diagonal) {
  if (q.size() != qhat.size()) throw std::invalid_argument("mse: dimension mismatch");
  const Index n = q.size();
  if (n == 0) return 0.0;
  Matrix diff = q.values() - qhat.values();
  if (!include_diagonal) {
    if (n < 2) return 0.0;
    diff.diagonal().setZero();
    return diff.squaredNorm() / static_cast<double>(n * (n - 1));
  }
  return diff.squaredNorm() / static_cast<double>(n * n);
}

ErrorDecomposition error_decomposition(const ProbMatrix& q, const AdjMatrix& a_q,
                                       const ObservationSplit& split,
                                       const NeighborhoodIndex& nbhd, const RowwiseOptions& opts) {
  if (q.size() != split.n() || a_q.size() != split.n_q() || nbhd.size() != split.n())
    throw std::invalid_argument("error_decomposition: dimension mismatch");
  const Index n = split.n();
  Matrix r = Matrix::Zero(n, split.n_q());
  for (Index i = 0; i < n; ++i) {
    const auto& set = nbhd.sets[static_cast<std::size_t>(i)];
    for (Index node : set) r(i, split.position(node)) = 1.0 / static_cast<double>(set.size());
  }
  const Matrix q_s = principal_submatrix(q.values(), split.members());
  Matrix mean_q = r * q_s * r.transpose();
  Matrix mean_a = r * a_q.values() * r.transpose();
  if (opts.fill_diagonal) {
    for (Index i = 0; i < n; ++i) {
      const auto& set = nbhd.sets[static_cast<std::size_t>(i)];
      const double t = static_cast<double>(set.size());
      if (t <= 1.0) continue;
      double q_diag = 0.0;
      for (Index node : set) q_diag += q(node, node);
      mean_q(i, i) = (t * t * mean_q(i, i) - q_diag) / (t * (t - 1.0));
      mean_a(i, i) *= t / (t - 1.0);
    }
  }
  const double scale = 2.0 / static_cast<double>(n * n);
  ErrorDecomposition out;
  out.smoothing_avg = scale * (q.values() - mean_q).squaredNorm();
  out.bernoulli_avg = scale * (mean_q - mean_a).squaredNorm();
  out.total_bound = out.smoothing_avg + out.bernoulli_avg;
  return out;
}

double snr(const Matrix& b) {
  if (b.rows() != b.cols()) throw std::invalid_argument("snr: matrix must be square");
  if (b.rows() < 2) throw std::invalid_argument("snr: need at least two communities");
  const double p = b.diagonal().minCoeff();
  double q = -std::numeric_limits<double>::infinity();
  for (Index j = 0; j < b.cols(); ++j)
    for (Index i = 0; i < b.rows(); ++i)
      if (i != j) q = std::max(q, b(i, j));
  const double denom = p * (1.0 - q);
  if (!(denom > 0.0)) throw std::invalid_argument("snr: p (1 - q) must be positive");
  return (p - q) / std::sqrt(denom);
}

MembershipCounts membership_counts(const NeighborhoodIndex& nbhd, const ObservationSplit& split) {
  MembershipCounts out;
  out.psi.assign(static_cast<std::size_t>(split.n_q()), 0);
  for (const auto& set : nbhd.sets) {
    for (Index node : set) {
      const Index pos = split.position(node);
      if (pos < 0) throw std::invalid_argument("membership_counts: neighbor outside S");
      ++out.psi[static_cast<std::size_t>(pos)];
    }
  }
  if (!out.psi.empty()) out.max = *std::max_element(out.psi.begin(), out.psi.end());
  return out;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile: no values");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

TrialStats summarize(const std::vector<double>& values, std::uint64_t seed) {
  if (values.empty()) throw std::invalid_argument("summarize: no trials");
  TrialStats s;
  s.trials = values.size();
  s.seed = seed;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.two_sigma = 2.0 * std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  s.p01 = percentile(values, 1.0);
  s.p99 = percentile(values, 99.0);
  return s;
}

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

double to_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size())
    throw std::invalid_argument("estimator option " + key + ": not a number: " + value);
  return v;
}

int to_int(const std::string& key, const std::string& value) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw std::invalid_argument("estimator option " + key + ": not an integer: " + value);
  return v;
}

}  // namespace

EstimatorSpec parse_estimator(std::string_view text) {
  const std::string full = trim(text);
  const auto open = full.find('(');
  const std::string name = trim(std::string_view(full).substr(0, open));
  EstimatorSpec spec;
  spec.label = full;
  if (name == "rowwise") {
    spec.kind = EstimatorKind::rowwise;
  } else if (name == "sbm") {
    spec.kind = EstimatorKind::sbm;
  } else if (name == "oracle") {
    spec.kind = EstimatorKind::oracle;
  } else if (name == "truth") {
    spec.kind = EstimatorKind::truth;
  } else {
    throw std::invalid_argument("unknown estimator: " + name);
  }
  if (open == std::string::npos) return spec;
  if (full.back() != ')') throw std::invalid_argument("estimator: missing ')' in " + full);

  std::stringstream args(full.substr(open + 1, full.size() - open - 2));
  std::string item;
  while (std::getline(args, item, ',')) {
    if (trim(item).empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("estimator option without '=': " + item);
    const std::string key = trim(std::string_view(item).substr(0, eq));
    const std::string value = trim(std::string_view(item).substr(eq + 1));
    if (spec.kind == EstimatorKind::rowwise && key == "h") {
      spec.h = value == "auto" ? 0.0 : to_double(key, value);
    } else if (spec.kind == EstimatorKind::rowwise && key == "diag") {
      if (value != "fill" && value != "zero") throw std::invalid_argument("diag must be fill or zero");
      spec.rowwise.fill_diagonal = value == "fill";
    } else if (spec.kind == EstimatorKind::sbm && key == "map") {
      if (value != "exact" && value != "lsq") throw std::invalid_argument("map must be exact or lsq");
      spec.sbm.mode = value == "exact" ? MapMode::exact : MapMode::lsq;
    } else if (spec.kind == EstimatorKind::sbm && key == "kp") {
      spec.sbm.k_p = value == "auto" ? 0 : to_int(key, value);
    } else if (spec.kind == EstimatorKind::sbm && key == "kq") {
      spec.sbm.k_q = value == "auto" ? 0 : to_int(key, value);
    } else if (spec.kind == EstimatorKind::oracle && (key == "p" || key == "p_flip")) {
      spec.oracle.p_flip = to_double(key, value);
    } else if (spec.kind == EstimatorKind::oracle && key == "eta") {
      spec.oracle.eta = to_double(key, value);
    } else {
      throw std::invalid_argument("unknown option '" + key + "' for estimator " + name);
    }
  }
  if (spec.h < 0.0 || spec.h > 1.0) throw std::invalid_argument("rowwise: h must lie in (0,1]");
  if (spec.oracle.p_flip < 0.0 || spec.oracle.p_flip > 1.0)
    throw std::invalid_argument("oracle: p must lie in [0,1]");
  if (!(spec.oracle.eta > 0.0)) throw std::invalid_argument("oracle: eta must be positive");
  if (spec.sbm.k_p < 0 || spec.sbm.k_q < 0) throw std::invalid_argument("sbm: k must be positive");
  return spec;
}

std::vector<EstimatorSpec> parse_estimator_list(std::string_view text) {
  std::vector<EstimatorSpec> out;
  std::string current;
  int depth = 0;
  auto flush = [&] {
    if (!trim(current).empty()) out.push_back(parse_estimator(current));
    current.clear();
  };
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (depth == 0 && (c == ',' || std::isspace(static_cast<unsigned char>(c)))) {
      flush();
      continue;
    }
    current.push_back(c);
  }
  flush();
  return out;
}

namespace {

struct LatentShape {
  LatentSpace space;
  Index dim;
};

std::optional<LatentShape> latent_shape(const ModelSpec& spec) {
  if (std::holds_alternative<SmoothGraphon>(spec) || std::holds_alternative<SineGraphon>(spec))
    return LatentShape{LatentSpace::box, 1};
  if (const auto* m = std::get_if<NoisyMmsb>(&spec)) return LatentShape{LatentSpace::simplex, m->k};
  if (const auto* d = std::get_if<LatentDistance>(&spec)) return LatentShape{LatentSpace::sphere, d->dim};
  return std::nullopt;
}

}  // namespace

void check_compatible(const ModelSpec& source, const ModelSpec& target) {
  const auto s = latent_shape(source);
  const auto t = latent_shape(target);
  if (s.has_value() != t.has_value())
    throw std::invalid_argument("incompatible pair: " + family_name(source) + " and " +
                                family_name(target) + " cannot share latents");
  if (!s) return;
  if (s->space != t->space)
    throw std::invalid_argument("incompatible pair: latent spaces differ (" + family_name(source) +
                                " vs " + family_name(target) + ")");
  if (s->space == LatentSpace::sphere && s->dim != t->dim)
    throw std::invalid_argument("incompatible pair: latent dimensions differ");
  if (s->space == LatentSpace::simplex && s->dim > 0 && t->dim > s->dim)
    throw std::invalid_argument("incompatible pair: target k exceeds source k");
}

TrialInstance generate_trial(const ExperimentConfig& cfg, std::size_t t) {
  if (cfg.n_q < 1 || cfg.n_q > cfg.n) throw std::invalid_argument("experiment: need 1 <= n_q <= n");
  const ModelSpec source = instantiate(cfg.source, cfg.n, cfg.n_q, ModelRole::source);
  const ModelSpec target = instantiate(cfg.target, cfg.n, cfg.n_q, ModelRole::target);
  check_compatible(source, target);

  TrialInstance trial;
  trial.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(t));
  if (has_latents(source)) {
    trial.latents = sample_latents(source, cfg.n, derive_seed(trial.seed, Stream::latents));
    trial.p = build_prob_matrix(source, *trial.latents);
    trial.q = build_prob_matrix(target, *trial.latents);
  } else {
    trial.p = build_prob_matrix(source);
    trial.q = build_prob_matrix(target);
  }
  if (trial.p.size() != cfg.n || trial.q.size() != cfg.n)
    throw std::invalid_argument("experiment: model size does not match n");
  trial.a_p = sample_adjacency(trial.p, derive_seed(trial.seed, Stream::source_adjacency));
  trial.split = sample_target_split(cfg.n, cfg.n_q, derive_seed(trial.seed, Stream::split));
  trial.a_q = sample_adjacency(restrict(trial.q, trial.split),
                               derive_seed(trial.seed, Stream::target_adjacency));
  return trial;
}

ProbMatrix run_estimator(const EstimatorSpec& spec, const TrialInstance& trial) {
  switch (spec.kind) {
    case EstimatorKind::rowwise: {
      const double h = spec.h > 0.0 ? spec.h : default_bandwidth(trial.split.n_q());
      return estimate_rowwise(trial.a_p, trial.a_q, trial.split, h, spec.rowwise);
    }
    case EstimatorKind::sbm:
      return estimate_sbm(trial.a_p, trial.a_q, trial.split, spec.sbm,
                          derive_seed(trial.seed, Stream::clustering));
    case EstimatorKind::oracle:
      return oracle_estimate(trial.q, trial.split, spec.oracle, derive_seed(trial.seed, Stream::oracle));
    case EstimatorKind::truth:
      return trial.q;
  }
  throw std::logic_error("run_estimator: unknown estimator kind");
}

std::vector<EstimatorResult> run_experiment(const ExperimentConfig& cfg, unsigned threads) {
  if (cfg.trials < 1) throw std::invalid_argument("experiment: trials must be positive");
  if (cfg.estimators.empty()) throw std::invalid_argument("experiment: no estimators");
  // Fail on a bad spec pair before starting workers.
  check_compatible(instantiate(cfg.source, cfg.n, cfg.n_q, ModelRole::source),
                   instantiate(cfg.target, cfg.n, cfg.n_q, ModelRole::target));

  const std::size_t n_est = cfg.estimators.size();
  std::vector<std::vector<double>> errors(n_est, std::vector<double>(cfg.trials));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t t = next++; t < cfg.trials; t = next++) {
      try {
        const TrialInstance trial = generate_trial(cfg, t);
        for (std::size_t e = 0; e < n_est; ++e)
          errors[e][t] = mse(trial.q, run_estimator(cfg.estimators[e], trial));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = cfg.trials;
      }
    }
  };

  unsigned count = threads > 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  count = static_cast<unsigned>(std::min<std::size_t>(count, cfg.trials));
  if (count <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(count);
    for (unsigned w = 0; w < count; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<EstimatorResult> out;
  out.reserve(n_est);
  for (std::size_t e = 0; e < n_est; ++e)
    out.push_back({cfg.estimators[e].label, summarize(errors[e], cfg.seed), std::move(errors[e])});
  return out;
}

void write_stats_csv_header(std::ostream& out) {
  out << "setting,estimator,mean,two_sigma,p01,p99,trials\n";
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

}  // namespace

void write_stats_csv(std::ostream& out, const std::string& setting,
                     const std::vector<EstimatorResult>& results) {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(6);
  for (const auto& r : results) {
    out << csv_field(setting) << ',' << csv_field(r.label) << ',' << r.stats.mean << ','
        << r.stats.two_sigma << ',' << r.stats.p01 << ',' << r.stats.p99 << ',' << r.stats.trials
        << '\n';
  }
  out.flags(flags);
  out.precision(prec);
}

std::string stats_json(const std::string& setting, const std::vector<EstimatorResult>& results) {
  nlohmann::json j;
  j["setting"] = setting;
  j["results"] = nlohmann::json::array();
  for (const auto& r : results) {
    j["results"].push_back({{"estimator", r.label},
                            {"mean", r.stats.mean},
                            {"two_sigma", r.stats.two_sigma},
                            {"p01", r.stats.p01},
                            {"p99", r.stats.p99},
                            {"trials", r.stats.trials},
                            {"seed", r.stats.seed},
                            {"per_trial", r.per_trial}});
  }
  return j.dump(2);
}

}  // namespace tlnet
