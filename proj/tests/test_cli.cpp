#include "doctest.h"

#include "tlnet/cli.hpp"
#include "tlnet/config.hpp"
#include "tlnet/estimators.hpp"
#include "tlnet/io.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace tlnet;
namespace fs = std::filesystem;

namespace {

const fs::path fixtures{TLNET_FIXTURE_DIR};

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "tlnet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("tlnet_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kSmallConfig = R"(name = tiny
n = 40
n_q = 12
trials = 3
seed = 5
estimators = rowwise sbm(kp=3,kq=2) oracle(p=0.1)

[source]
family = smooth_graphon
gamma = 0.1

[target]
family = smooth_graphon
gamma = 0.5
)";

fs::path write_config(const fs::path& dir, const std::string& text = kSmallConfig) {
  const fs::path p = dir / "tiny.cfg";
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("config parsing") {
  std::istringstream in(kSmallConfig);
  const auto cfg = parse_experiment_config(in);
  CHECK(cfg.name == "tiny");
  CHECK(cfg.n == 40);
  CHECK(cfg.n_q == 12);
  CHECK(cfg.trials == 3);
  CHECK(cfg.estimators.size() == 3);
  CHECK(std::get<SmoothGraphon>(cfg.target).gamma == 0.5);

  std::ostringstream written;
  write_experiment_config(written, cfg);
  std::istringstream again(written.str());
  const auto cfg2 = parse_experiment_config(again);
  CHECK(cfg2.n == cfg.n);
  CHECK(std::get<SmoothGraphon>(cfg2.source).gamma == 0.1);

  const auto mmsb = parse_model_spec({{"family", "noisy_mmsb"}, {"a", "0.9"}, {"b", "0.1"}, {"eps", "0.01"},
                                      {"noise_seed", "7"}, {"projection", "renormalize"}});
  const auto& m = std::get<NoisyMmsb>(mmsb);
  CHECK(m.k == 0);
  CHECK(m.noise_seed == 7);
  CHECK(m.projection == SimplexProjection::renormalize);
  const auto back = parse_model_spec(model_spec_to_keys(mmsb));
  CHECK(std::get<NoisyMmsb>(back).projection == SimplexProjection::renormalize);
  CHECK(std::get<NoisyMmsb>(back).a == 0.9);

  const auto sbm = std::get<Sbm>(parse_model_spec({{"family", "sbm"}, {"k", "3"}, {"p_in", "0.8"}, {"p_out", "0.2"}}));
  CHECK(sbm.connectivity.rows() == 3);
  CHECK(sbm.connectivity(0, 0) == 0.8);
  CHECK(sbm.connectivity(0, 2) == 0.2);
  const auto sbm2 = std::get<Sbm>(parse_model_spec({{"family", "sbm"}, {"B", "0.9,0.1;0.1,0.9"}}));
  CHECK(sbm2.connectivity == Matrix{{0.9, 0.1}, {0.1, 0.9}});

  CHECK_THROWS_AS(parse_model_spec({{"family", "smooth_graphon"}, {"gamma", "0.5"}, {"typo", "1"}}), ConfigError);
  CHECK_THROWS_AS(parse_model_spec({{"family", "unknown"}}), ConfigError);
  CHECK_THROWS_AS(parse_model_spec({{"family", "sbm"}, {"B", "0.9,0.1;0.2,0.9"}}), std::invalid_argument);
  std::istringstream bad("n = 10\nbogus = 1\n[source]\nfamily = smooth_graphon\n[target]\nfamily = smooth_graphon\n");
  CHECK_THROWS_AS(parse_experiment_config(bad), ConfigError);
}

TEST_CASE("shipped configs load") {
  for (const char* name : {"table1_row1.cfg", "table1_row2.cfg", "table1_row3.cfg", "heatmap_sbm.cfg"}) {
    CAPTURE(name);
    CHECK_NOTHROW(load_experiment_config(fs::path(TLNET_CONFIG_DIR) / name));
  }
}

TEST_CASE("usage errors") {
  CHECK(cli({}).code == 1);
  CHECK(cli({"frobnicate"}).code == 1);
  const auto r = cli({"experiment", "--config", "x.cfg", "--bogus"});
  CHECK(r.code == 1);
  CHECK_FALSE(r.err.empty());
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({"experiment", "--config", (fixtures / "absent.cfg").string()}).code != 0);
}

TEST_CASE("generate, estimate and heatmap") {
  const auto dir = scratch("gen");
  const auto cfg = write_config(dir);
  const auto g = cli({"generate", "--config", cfg.string(), "--out", (dir / "inst").string()});
  REQUIRE(g.code == 0);
  for (const char* f : {"P.csv", "Q.csv", "A_P.csv", "A_Q.csv", "S.txt", "latents.csv"})
    CHECK(fs::exists(dir / "inst" / f));
  CHECK(read_matrix_csv(dir / "inst" / "A_P.csv").rows() == 40);
  CHECK(read_index_list(dir / "inst" / "S.txt").size() == 12);

  const auto inst = dir / "inst";
  const std::vector<std::string> base{"estimate", "--ap", (inst / "A_P.csv").string(), "--aq",
                                      (inst / "A_Q.csv").string(), "--split", (inst / "S.txt").string()};

  SUBCASE("auto bandwidth equals the explicit default") {
    auto a = base;
    a.insert(a.end(), {"--method", "rowwise", "--h", "auto"});
    auto b = base;
    std::ostringstream h;
    h.precision(17);
    h << default_bandwidth(12);
    b.insert(b.end(), {"--method", "rowwise", "--h", h.str()});
    const auto ra = cli(a), rb = cli(b);
    REQUIRE(ra.code == 0);
    CHECK(ra.out == rb.out);
    std::istringstream csv(ra.out);
    CHECK(read_matrix_csv(csv).rows() == 40);
    CHECK(cli(a).out == ra.out);  // deterministic
  }
  SUBCASE("sbm and oracle") {
    auto s = base;
    s.insert(s.end(), {"--method", "sbm", "--kp", "3", "--kq", "2", "--map", "exact", "--out",
                       (dir / "sbm.csv").string()});
    CHECK(cli(s).code == 0);
    CHECK(read_prob_matrix(dir / "sbm.csv").size() == 40);

    auto o = base;
    o.insert(o.end(), {"--method", "oracle", "--q", (inst / "Q.csv").string(), "--p-flip", "0.2"});
    const auto ro = cli(o);
    CHECK(ro.code == 0);
    auto missing = base;
    missing.insert(missing.end(), {"--method", "oracle"});
    CHECK(cli(missing).code == 1);
  }
  SUBCASE("bad inputs") {
    auto bad_h = base;
    bad_h.insert(bad_h.end(), {"--h", "1.5"});
    CHECK(cli(bad_h).code == 1);
    std::ofstream(dir / "broken.csv") << "0,1\n1\n";
    CHECK(cli({"estimate", "--ap", (dir / "broken.csv").string(), "--aq", (inst / "A_Q.csv").string(),
               "--split", (inst / "S.txt").string()})
              .code == 2);
  }
  SUBCASE("heatmap") {
    const auto r = cli({"heatmap", "--q", (inst / "Q.csv").string(), "--qhat", (inst / "P.csv").string(),
                        "--sort-by", (inst / "latents.csv").string(), "--out", (dir / "hm").string()});
    REQUIRE(r.code == 0);
    const Matrix q = read_matrix_csv(dir / "hm" / "q.csv");
    const Matrix qh = read_matrix_csv(dir / "hm" / "qhat.csv");
    const Matrix c = read_matrix_csv(dir / "hm" / "combined.csv");
    CHECK(c(5, 2) == q(5, 2));
    CHECK(c(2, 5) == qh(2, 5));
    // Sorted by latent position, the smooth-graphon Q increases along each row.
    for (Index j = 1; j < 40; ++j) CHECK(q(0, j) >= q(0, j - 1) - 1e-6);
  }
}

TEST_CASE("experiment") {
  const auto dir = scratch("exp");
  const auto cfg = write_config(dir);
  const auto r = cli({"experiment", "--config", cfg.string(), "--trials", "2", "--seed", "1", "--json",
                      (dir / "s.json").string(), "--threads", "2"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("setting,estimator,mean,two_sigma,p01,p99,trials\n", 0) == 0);
  CHECK(r.out.find("tiny,rowwise,") != std::string::npos);
  CHECK(r.out.find(",2\n") != std::string::npos);
  const auto js = nlohmann::json::parse(slurp(dir / "s.json"));
  CHECK(js["results"].size() == 3);
  CHECK(cli({"experiment", "--config", cfg.string(), "--trials", "2", "--seed", "1", "--threads", "1"}).out == r.out);
  CHECK(cli({"experiment", "--config", cfg.string(), "--trials", "0"}).code == 1);
}

TEST_CASE("ingest") {
  const auto dir = scratch("ingest");
  SUBCASE("temporal bins") {
    const auto r = cli({"ingest", "--temporal", (fixtures / "temporal.txt").string(), "--bins", "10", "--out",
                        (dir / "t").string()});
    REQUIRE(r.code == 0);
    int csvs = 0;
    for (const auto& e : fs::directory_iterator(dir / "t")) csvs += e.path().extension() == ".csv" ? 1 : 0;
    CHECK(csvs == 10);
    CHECK(fs::exists(dir / "t" / "bin_0.csv"));
    CHECK(fs::exists(dir / "t" / "bin_9.csv"));
    CHECK(read_adjacency(dir / "t" / "bin_3.csv").size() == 300);
  }
  SUBCASE("edge lists are intersected") {
    const auto r = cli({"ingest", "--edges", (fixtures / "metabolic_a.txt").string(), "--edges",
                        (fixtures / "metabolic_b.txt").string(), "--out", (dir / "e").string()});
    REQUIRE(r.code == 0);
    CHECK(read_adjacency(dir / "e" / "metabolic_a.csv").size() == 251);
    CHECK(read_adjacency(dir / "e" / "metabolic_b.csv").size() == 251);
    CHECK(read_adjacency(dir / "e" / "metabolic_a.csv").edge_count() == 1800);
  }
  SUBCASE("errors") {
    CHECK(cli({"ingest", "--out", dir.string()}).code == 1);
    std::ofstream(dir / "bad.txt") << "1 2 later\n";
    CHECK(cli({"ingest", "--temporal", (dir / "bad.txt").string(), "--out", dir.string()}).code == 2);
    CHECK(cli({"ingest", "--edges", (dir / "nope.txt").string(), "--out", dir.string()}).code == 2);
  }
}

TEST_CASE("check-rankings") {
  const auto dir = scratch("rank");
  Matrix p = Matrix::Constant(8, 8, 0.1);
  p.topLeftCorner(2, 2).setConstant(0.9);
  p.block(2, 2, 2, 2).setConstant(0.9);
  p.block(4, 4, 2, 2).setConstant(0.9);
  p.block(6, 6, 2, 2).setConstant(0.9);
  Matrix q = Matrix::Constant(8, 8, 0.1);
  q.topLeftCorner(4, 4).setConstant(0.9);
  q.bottomRightCorner(4, 4).setConstant(0.9);
  write_matrix_csv(dir / "p.csv", p);
  write_matrix_csv(dir / "q.csv", q);
  const auto r = cli({"check-rankings", "--p", (dir / "p.csv").string(), "--q", (dir / "q.csv").string(), "--h",
                      "0.25"});
  REQUIRE(r.code == 0);
  const auto js = nlohmann::json::parse(r.out);
  CHECK(js["holds"] == true);
  CHECK(js["c_hat"] == 1.0);
  CHECK(js["witness"].is_null());

  write_matrix_csv(dir / "asym.csv", Matrix{{0, 1}, {0, 0}});
  CHECK(cli({"check-rankings", "--p", (dir / "asym.csv").string(), "--q", (dir / "asym.csv").string(), "--h",
             "0.5"})
            .code == 2);
}
