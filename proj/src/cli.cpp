#include "tlnet/cli.hpp"

#include "tlnet/config.hpp"
#include "tlnet/estimators.hpp"
#include "tlnet/evalkit.hpp"
#include "tlnet/graphdist.hpp"
#include "tlnet/ingest.hpp"
#include "tlnet/io.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>

namespace tlnet {

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kData = 2;

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

struct GenerateArgs {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  ExperimentConfig cfg = load_experiment_config(a.config);
  if (a.seed) cfg.seed = *a.seed;
  const TrialInstance trial = generate_trial(cfg, 0);
  const fs::path dir = a.out;
  ensure_dir(dir);
  write_matrix_csv(dir / "P.csv", trial.p.values());
  write_matrix_csv(dir / "Q.csv", trial.q.values());
  write_matrix_csv(dir / "A_P.csv", trial.a_p.values());
  write_matrix_csv(dir / "A_Q.csv", trial.a_q.values());
  const auto members = trial.split.members();
  write_index_list(dir / "S.txt", {members.begin(), members.end()});
  if (trial.latents) write_matrix_csv(dir / "latents.csv", trial.latents->points);
  out << "wrote " << cfg.n << "-node instance (n_q = " << cfg.n_q << ") to " << dir.string() << '\n';
  return kOk;
}

struct EstimateArgs {
  std::string a_p, a_q, split, q;
  std::string method = "rowwise";
  std::string h = "auto";
  std::string diag = "fill";
  std::string map = "lsq";
  int k_p = 0, k_q = 0;
  double p_flip = 0.1, eta = 2.02;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_estimate(const EstimateArgs& a, std::ostream& out) {
  const AdjMatrix a_q = read_adjacency(a.a_q);
  std::optional<AdjMatrix> a_p;
  std::optional<ProbMatrix> q;
  Index n = 0;
  if (a.method == "oracle") {
    if (a.q.empty()) throw std::invalid_argument("--method oracle requires --q");
    q = read_prob_matrix(a.q);
    n = q->size();
  } else {
    if (a.a_p.empty()) throw std::invalid_argument("--method " + a.method + " requires --ap");
    a_p = read_adjacency(a.a_p);
    n = a_p->size();
  }
  const ObservationSplit split = [&] {
    try {
      return ObservationSplit(n, read_index_list(a.split));
    } catch (const std::exception& e) {
      throw DataError(a.split + ": " + e.what());
    }
  }();
  if (a_q.size() != split.n_q()) throw DataError("A_Q size does not match the split size");

  ProbMatrix est;
  if (a.method == "rowwise") {
    const double h = a.h == "auto" ? default_bandwidth(split.n_q()) : std::stod(a.h);
    est = estimate_rowwise(*a_p, a_q, split, h, RowwiseOptions{a.diag == "fill"});
  } else if (a.method == "sbm") {
    SbmOptions opts;
    opts.k_p = a.k_p;
    opts.k_q = a.k_q;
    opts.mode = a.map == "exact" ? MapMode::exact : MapMode::lsq;
    est = estimate_sbm(*a_p, a_q, split, opts, a.seed);
  } else {
    est = oracle_estimate(*q, split, OracleConfig{a.p_flip, a.eta}, a.seed);
  }
  if (a.out.empty()) {
    write_matrix_csv(out, est.values());
  } else {
    write_matrix_csv(fs::path(a.out), est.values());
  }
  return kOk;
}

struct ExperimentArgs {
  std::string config;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string csv, json;
};

int cmd_experiment(const ExperimentArgs& a, std::ostream& out) {
  ExperimentConfig cfg = load_experiment_config(a.config);
  if (a.trials) cfg.trials = *a.trials;
  if (a.seed) cfg.seed = *a.seed;
  if (cfg.trials < 1) throw std::invalid_argument("--trials must be positive");
  const auto results = run_experiment(cfg, a.threads);
  if (a.csv.empty()) {
    write_stats_csv_header(out);
    write_stats_csv(out, cfg.name, results);
  } else {
    auto f = open_out(a.csv);
    write_stats_csv_header(f);
    write_stats_csv(f, cfg.name, results);
  }
  if (!a.json.empty()) open_out(a.json) << stats_json(cfg.name, results) << '\n';
  return kOk;
}

struct IngestArgs {
  std::vector<std::string> edges;
  std::string temporal;
  int bins = 10;
  std::string out = ".";
};

void write_graph(const fs::path& path, const LabeledGraph& g) { write_matrix_csv(path, g.adj.values()); }

int cmd_ingest(const IngestArgs& a, std::ostream& out) {
  if (a.edges.empty() == a.temporal.empty())
    throw std::invalid_argument("ingest: give either --edges or --temporal");
  const fs::path dir = a.out;
  ensure_dir(dir);
  std::vector<LabeledGraph> graphs;
  std::vector<std::string> names;
  if (!a.temporal.empty()) {
    const TemporalLog log = load_temporal_log(a.temporal);
    if (log.triples.empty()) throw DataError(a.temporal + ": no interactions");
    graphs = bin_temporal(log, a.bins);
    const int width = static_cast<int>(std::to_string(a.bins - 1).size());
    for (std::size_t b = 0; b < graphs.size(); ++b) {
      std::ostringstream name;
      name << "bin_" << std::setw(width) << std::setfill('0') << b << ".csv";
      names.push_back(name.str());
    }
  } else {
    for (const auto& path : a.edges) {
      graphs.push_back(load_edge_list(path));
      names.push_back(fs::path(path).stem().string() + ".csv");
    }
    if (graphs.size() > 1) graphs = intersect_nodes(graphs);
  }
  for (std::size_t g = 0; g < graphs.size(); ++g) write_graph(dir / names[g], graphs[g]);
  write_lines(dir / "labels.txt", graphs.front().labels);
  out << "wrote " << graphs.size() << " adjacency matrices over " << graphs.front().size()
      << " nodes to " << dir.string() << '\n';
  return kOk;
}

struct RankingsArgs {
  std::string p, q;
  double h = 0.0;
  std::string grid;
  std::string out;
};

int cmd_check_rankings(const RankingsArgs& a, std::ostream& out) {
  const Matrix p = read_matrix_csv(fs::path(a.p));
  const Matrix q = read_matrix_csv(fs::path(a.q));
  DistanceMatrix d_p, d_q;
  try {
    d_p = graph_distance_matrix(p, DistanceKind::population);
    d_q = graph_distance_matrix(q, DistanceKind::population);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  std::vector<double> grid = default_c_grid();
  if (!a.grid.empty()) {
    grid.clear();
    std::stringstream ss(a.grid);
    for (std::string item; std::getline(ss, item, ',');) grid.push_back(std::stod(item));
  }
  const RankingsReport r = rankings_constant(d_p, d_q, a.h, grid);
  nlohmann::json j;
  j["h"] = r.h;
  j["holds"] = r.c_hat.has_value();
  j["c_hat"] = r.c_hat ? nlohmann::json(*r.c_hat) : nlohmann::json(nullptr);
  j["witness"] = r.witness ? nlohmann::json({r.witness->first, r.witness->second}) : nlohmann::json(nullptr);
  j["c_grid"] = grid;
  if (a.out.empty())
    out << j.dump(2) << '\n';
  else
    open_out(a.out) << j.dump(2) << '\n';
  return kOk;
}

struct HeatmapArgs {
  std::string q, qhat, sort_by;
  std::string out = ".";
};

int cmd_heatmap(const HeatmapArgs& a, std::ostream& out) {
  const Matrix q = read_matrix_csv(fs::path(a.q));
  const Matrix qhat = read_matrix_csv(fs::path(a.qhat));
  if (q.rows() != q.cols() || qhat.rows() != q.rows() || qhat.cols() != q.cols())
    throw DataError("heatmap: Q and Q-hat must be square and of equal size");
  const Index n = q.rows();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  if (!a.sort_by.empty()) {
    const Matrix keys = read_matrix_csv(fs::path(a.sort_by));
    if (keys.rows() != n || keys.cols() < 1) throw DataError("heatmap: --sort-by needs one row per node");
    std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) { return keys(x, 0) < keys(y, 0); });
  }
  const Matrix qs = principal_submatrix(q, order);
  const Matrix hs = principal_submatrix(qhat, order);
  Matrix combined = hs;
  combined.triangularView<Eigen::Lower>() = qs.triangularView<Eigen::Lower>();
  const fs::path dir = a.out;
  ensure_dir(dir);
  write_matrix_csv(dir / "q.csv", qs);
  write_matrix_csv(dir / "qhat.csv", hs);
  write_matrix_csv(dir / "combined.csv", combined);
  out << "wrote heatmap matrices to " << dir.string() << '\n';
  return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Transfer learning for latent-variable network estimation"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Sample one source/target instance from a config");
  generate->add_option("--config", gen.config, "Experiment config file")->required();
  generate->add_option("--out", gen.out, "Output directory");
  generate->add_option("--seed", gen.seed, "Override the config seed");

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Estimate Q from A_P, A_Q and S");
  estimate->set_help_flag("--help", "Print this help message and exit");
  estimate->add_option("--ap", est.a_p, "Source adjacency CSV (n x n)");
  estimate->add_option("--aq", est.a_q, "Target adjacency CSV on S (n_q x n_q)")->required();
  estimate->add_option("--split", est.split, "Observed node indices, one per line")->required();
  estimate->add_option("--q", est.q, "True Q (oracle only)");
  estimate->add_option("--method", est.method)->check(CLI::IsMember({"rowwise", "sbm", "oracle"}));
  estimate->add_option("--h", est.h, "Bandwidth in (0,1] or 'auto'");
  estimate->add_option("--diag", est.diag)->check(CLI::IsMember({"fill", "zero"}));
  estimate->add_option("--map", est.map)->check(CLI::IsMember({"exact", "lsq"}));
  estimate->add_option("--kp", est.k_p, "Source clusters (0 = ceil(sqrt(n)))");
  estimate->add_option("--kq", est.k_q, "Target clusters (0 = ceil(sqrt(n_q)))");
  estimate->add_option("--p-flip", est.p_flip)->check(CLI::Range(0.0, 1.0));
  estimate->add_option("--eta", est.eta)->check(CLI::PositiveNumber);
  estimate->add_option("--seed", est.seed);
  estimate->add_option("--out", est.out, "Output CSV (default: stdout)");

  ExperimentArgs exp;
  auto* experiment = app.add_subcommand("experiment", "Run Monte Carlo trials from a config");
  experiment->add_option("--config", exp.config)->required();
  experiment->add_option("--trials", exp.trials);
  experiment->add_option("--seed", exp.seed);
  experiment->add_option("--threads", exp.threads, "Worker threads (0 = all cores)");
  experiment->add_option("--csv", exp.csv, "Stats CSV (default: stdout)");
  experiment->add_option("--json", exp.json, "Stats JSON");

  IngestArgs ing;
  auto* ingest = app.add_subcommand("ingest", "Convert edge lists or temporal logs to adjacency CSVs");
  ingest->add_option("--edges", ing.edges, "Edge-list files (intersected when several)");
  ingest->add_option("--temporal", ing.temporal, "Temporal log 'u v t'");
  ingest->add_option("--bins", ing.bins)->check(CLI::PositiveNumber);
  ingest->add_option("--out", ing.out, "Output directory");

  RankingsArgs rk;
  auto* rankings = app.add_subcommand("check-rankings", "Smallest C for the rankings containment");
  rankings->set_help_flag("--help", "Print this help message and exit");
  rankings->add_option("--p", rk.p, "Source matrix CSV")->required();
  rankings->add_option("--q", rk.q, "Target matrix CSV")->required();
  rankings->add_option("--h", rk.h, "Quantile h_n in (0,1]")->required();
  rankings->add_option("--grid", rk.grid, "Comma-separated C values");
  rankings->add_option("--out", rk.out, "Output JSON (default: stdout)");

  HeatmapArgs hm;
  auto* heatmap = app.add_subcommand("heatmap", "Write plot-ready Q / Q-hat matrices");
  heatmap->add_option("--q", hm.q)->required();
  heatmap->add_option("--qhat", hm.qhat)->required();
  heatmap->add_option("--sort-by", hm.sort_by, "CSV whose first column orders the nodes");
  heatmap->add_option("--out", hm.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*generate) return cmd_generate(gen, out);
    if (*estimate) return cmd_estimate(est, out);
    if (*experiment) return cmd_experiment(exp, out);
    if (*ingest) return cmd_ingest(ing, out);
    if (*rankings) return cmd_check_rankings(rk, out);
    if (*heatmap) return cmd_heatmap(hm, out);
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}

}  // namespace tlnet
