#include "tlnet/config.hpp"

#include "tlnet/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace tlnet {

namespace {

namespace pt = boost::property_tree;

std::string get(const KeyValues& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw ConfigError("missing key '" + key + "'");
  return it->second;
}

std::string get_or(const KeyValues& kv, const std::string& key, const std::string& fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

double to_real(const std::string& key, const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError("key '" + key + "': expected a number, got '" + s + "'");
  return v;
}

template <typename Int>
Int to_integer(const std::string& key, const std::string& s) {
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError("key '" + key + "': expected an integer, got '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? std::string() : item.substr(b, e - b + 1));
  }
  return out;
}

Matrix parse_inline_matrix(const std::string& key, const std::string& s) {
  const auto rows = split(s, ';');
  Matrix m;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto cols = split(rows[i], ',');
    if (i == 0) m.resize(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
    if (static_cast<Index>(cols.size()) != m.cols()) throw ConfigError("key '" + key + "': ragged matrix");
    for (std::size_t j = 0; j < cols.size(); ++j)
      m(static_cast<Index>(i), static_cast<Index>(j)) = to_real(key, cols[j]);
  }
  return m;
}

std::string format_real(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string format_inline_matrix(const Matrix& m) {
  std::string out;
  for (Index i = 0; i < m.rows(); ++i) {
    if (i > 0) out += ';';
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_real(m(i, j));
    }
  }
  return out;
}

void check_keys(const KeyValues& kv, const std::set<std::string>& allowed, const std::string& family) {
  for (const auto& [k, v] : kv)
    if (k != "family" && !allowed.contains(k))
      throw ConfigError("unknown key '" + k + "' for family " + family);
}

KeyValues section(const pt::ptree& tree, const std::string& name) {
  const auto child = tree.get_child_optional(name);
  if (!child) throw ConfigError("missing section [" + name + "]");
  KeyValues kv;
  for (const auto& [k, v] : *child) kv[k] = v.data();
  return kv;
}

}  // namespace

ModelSpec parse_model_spec(const KeyValues& kv, const std::filesystem::path& base_dir) {
  const std::string family = get(kv, "family");
  ModelSpec spec;
  if (family == "sbm") {
    check_keys(kv, {"B", "k", "p_in", "p_out", "z"}, family);
    Sbm s;
    if (kv.contains("B")) {
      s.connectivity = parse_inline_matrix("B", get(kv, "B"));
    } else {
      const int k = to_integer<int>("k", get(kv, "k"));
      if (k < 1) throw ConfigError("sbm: k must be positive");
      const double p_in = to_real("p_in", get(kv, "p_in"));
      const double p_out = to_real("p_out", get(kv, "p_out"));
      s.connectivity = Matrix::Constant(k, k, p_out);
      s.connectivity.diagonal().setConstant(p_in);
    }
    if (kv.contains("z"))
      for (const auto& item : split(get(kv, "z"), ',')) s.labels.push_back(to_integer<int>("z", item));
    spec = s;
  } else if (family == "smooth_graphon") {
    check_keys(kv, {"gamma"}, family);
    spec = SmoothGraphon{to_real("gamma", get(kv, "gamma"))};
  } else if (family == "sine_graphon") {
    check_keys(kv, {"transform"}, family);
    const std::string t = get_or(kv, "transform", "none");
    SineGraphon s;
    if (t == "none") s.transform = SineTransform::none;
    else if (t == "flip") s.transform = SineTransform::flip;
    else if (t == "fold") s.transform = SineTransform::fold;
    else throw ConfigError("sine_graphon: transform must be none, flip or fold");
    spec = s;
  } else if (family == "noisy_mmsb") {
    check_keys(kv, {"a", "b", "eps", "k", "noise_seed", "concentration", "projection"}, family);
    NoisyMmsb m;
    m.a = to_real("a", get(kv, "a"));
    m.b = to_real("b", get(kv, "b"));
    m.eps = to_real("eps", get_or(kv, "eps", "0"));
    const std::string k = get_or(kv, "k", "auto");
    m.k = k == "auto" ? 0 : to_integer<int>("k", k);
    if (k != "auto" && m.k < 1) throw ConfigError("noisy_mmsb: k must be positive");
    m.noise_seed = to_integer<std::uint64_t>("noise_seed", get_or(kv, "noise_seed", "0"));
    const std::string c = get_or(kv, "concentration", "auto");
    m.concentration = c == "auto" ? 0.0 : to_real("concentration", c);
    if (c != "auto" && !(m.concentration > 0.0)) throw ConfigError("noisy_mmsb: concentration must be positive");
    const std::string proj = get_or(kv, "projection", "euclidean");
    if (proj == "euclidean")
      m.projection = SimplexProjection::euclidean;
    else if (proj == "renormalize")
      m.projection = SimplexProjection::renormalize;
    else
      throw ConfigError("noisy_mmsb: projection must be euclidean or renormalize");
    spec = m;
  } else if (family == "latent_distance") {
    check_keys(kv, {"scale", "dim"}, family);
    spec = LatentDistance{to_real("scale", get(kv, "scale")), to_integer<int>("dim", get(kv, "dim"))};
  } else if (family == "custom") {
    check_keys(kv, {"probs", "matrix_file"}, family);
    Custom c;
    if (kv.contains("probs")) {
      c.probs = parse_inline_matrix("probs", get(kv, "probs"));
    } else {
      std::filesystem::path file = get(kv, "matrix_file");
      if (file.is_relative()) file = base_dir / file;
      c.probs = read_matrix_csv(file);
    }
    spec = c;
  } else {
    throw ConfigError("unknown family '" + family + "'");
  }
  try {
    validate(spec);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

KeyValues model_spec_to_keys(const ModelSpec& spec) {
  KeyValues kv;
  kv["family"] = family_name(spec);
  if (const auto* s = std::get_if<Sbm>(&spec)) {
    kv["B"] = format_inline_matrix(s->connectivity);
    if (!s->labels.empty()) {
      std::string z;
      for (std::size_t i = 0; i < s->labels.size(); ++i) z += (i ? "," : "") + std::to_string(s->labels[i]);
      kv["z"] = z;
    }
  } else if (const auto* g = std::get_if<SmoothGraphon>(&spec)) {
    kv["gamma"] = format_real(g->gamma);
  } else if (const auto* sg = std::get_if<SineGraphon>(&spec)) {
    kv["transform"] = sg->transform == SineTransform::none ? "none"
                      : sg->transform == SineTransform::flip ? "flip" : "fold";
  } else if (const auto* m = std::get_if<NoisyMmsb>(&spec)) {
    kv["a"] = format_real(m->a);
    kv["b"] = format_real(m->b);
    kv["eps"] = format_real(m->eps);
    kv["k"] = m->k == 0 ? "auto" : std::to_string(m->k);
    kv["noise_seed"] = std::to_string(m->noise_seed);
    kv["concentration"] = m->concentration > 0.0 ? format_real(m->concentration) : "auto";
    kv["projection"] = m->projection == SimplexProjection::euclidean ? "euclidean" : "renormalize";
  } else if (const auto* d = std::get_if<LatentDistance>(&spec)) {
    kv["scale"] = format_real(d->scale);
    kv["dim"] = std::to_string(d->dim);
  } else if (const auto* c = std::get_if<Custom>(&spec)) {
    kv["probs"] = format_inline_matrix(c->probs);
  }
  return kv;
}

ExperimentConfig parse_experiment_config(std::istream& in, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  ExperimentConfig cfg;
  std::set<std::string> top{"name", "n", "n_q", "trials", "seed", "estimators", "source", "target"};
  for (const auto& [k, v] : tree)
    if (!top.contains(k)) throw ConfigError("config: unknown key or section '" + k + "'");

  cfg.name = tree.get<std::string>("name", cfg.name);
  auto integer = [&](const std::string& key, auto fallback) {
    const auto v = tree.get_optional<std::string>(key);
    return v ? to_integer<decltype(fallback)>(key, *v) : fallback;
  };
  cfg.n = integer("n", cfg.n);
  cfg.n_q = integer("n_q", cfg.n_q);
  cfg.trials = integer("trials", cfg.trials);
  cfg.seed = integer("seed", cfg.seed);
  if (cfg.n < 1 || cfg.n_q < 1 || cfg.n_q > cfg.n) throw ConfigError("config: need 1 <= n_q <= n");
  if (cfg.trials < 1) throw ConfigError("config: trials must be positive");

  cfg.source = parse_model_spec(section(tree, "source"), base_dir);
  cfg.target = parse_model_spec(section(tree, "target"), base_dir);
  try {
    cfg.estimators = parse_estimator_list(tree.get<std::string>("estimators", "rowwise"));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_experiment_config(in, path.parent_path());
}

void write_experiment_config(std::ostream& out, const ExperimentConfig& cfg) {
  out << "name = " << cfg.name << '\n'
      << "n = " << cfg.n << '\n'
      << "n_q = " << cfg.n_q << '\n'
      << "trials = " << cfg.trials << '\n'
      << "seed = " << cfg.seed << '\n'
      << "estimators =";
  for (const auto& e : cfg.estimators) out << ' ' << e.label;
  out << '\n';
  for (const auto& [name, spec] : {std::pair{"source", &cfg.source}, std::pair{"target", &cfg.target}}) {
    out << "\n[" << name << "]\n";
    for (const auto& [k, v] : model_spec_to_keys(*spec)) out << k << " = " << v << '\n';
  }
}

}  // namespace tlnet
