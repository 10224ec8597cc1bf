#include "nes/experiment.hpp"

#include "hash.hpp"
#include "nes/format.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace nes {

using json = nlohmann::json;

namespace {

std::string with_path(const std::string& path, const std::string& message) {
  return path.empty() ? message : path + ": " + message;
}

}  // namespace

ConfigError::ConfigError(std::string path, const std::string& message)
    : std::runtime_error(with_path(path, message)), path_(std::move(path)) {}

Vector InitSpec::resolve(Index length, const std::string& path) const {
  switch (kind) {
    case Kind::Zeros: return Vector::Zero(length);
    case Kind::Broadcast: return Vector::Constant(length, scalar);
    case Kind::Values:
      if (values.size() != length) {
        std::ostringstream os;
        os << "expected length " << length << ", got " << values.size();
        throw ConfigError(path, os.str());
      }
      return values;
  }
  return Vector::Zero(length);
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      throw ConfigError(join(path, item.key()), "unknown key");
  }
}

const json* find(const json& obj, std::string_view key) {
  auto it = obj.find(std::string(key));
  return it == obj.end() ? nullptr : &*it;
}

const json& require(const json& obj, const std::string& path,
                    std::string_view key) {
  const json* v = find(obj, key);
  if (!v) throw ConfigError(join(path, key), "required key is missing");
  return *v;
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  return j.get<double>();
}

Index get_count(const json& j, const std::string& path) {
  if (!j.is_number_integer() && !j.is_number_unsigned())
    throw ConfigError(path, "expected an integer");
  return j.get<Index>();
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

Vector get_vector(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k)
    v(static_cast<Index>(k)) = get_number(j[k], path + "[" + std::to_string(k) + "]");
  return v;
}

Matrix get_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty())
    throw ConfigError(path, "expected a non-empty array of rows");
  const Index rows = static_cast<Index>(j.size());
  Index cols = -1;
  Matrix m;
  for (Index r = 0; r < rows; ++r) {
    const std::string row_path = path + "[" + std::to_string(r) + "]";
    const Vector row = get_vector(j[static_cast<std::size_t>(r)], row_path);
    if (cols < 0) {
      cols = row.size();
      m.resize(rows, cols);
    } else if (row.size() != cols) {
      std::ostringstream os;
      os << "row has " << row.size() << " entries, expected " << cols;
      throw ConfigError(row_path, os.str());
    }
    m.row(r) = row.transpose();
  }
  return m;
}

InitSpec get_init(const json& j, const std::string& path) {
  if (j.is_array()) return InitSpec::explicit_values(get_vector(j, path));
  if (!j.is_string())
    throw ConfigError(path, "expected an array, \"zeros\" or \"broadcast:<v>\"");
  const std::string s = j.get<std::string>();
  if (s == "zeros") return InitSpec::zeros();
  constexpr std::string_view prefix = "broadcast:";
  if (s.rfind(prefix, 0) == 0) {
    const std::string number = s.substr(prefix.size());
    char* end = nullptr;
    const double v = std::strtod(number.c_str(), &end);
    if (!number.empty() && end == number.c_str() + number.size() &&
        std::isfinite(v))
      return InitSpec::broadcast(v);
  }
  throw ConfigError(path, "expected an array, \"zeros\" or \"broadcast:<v>\", got \"" +
                              s + "\"");
}

GameSection parse_game(const json& j) {
  const std::string path = "game";
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  GameSection g;
  if (const json* t = find(j, "type")) g.type = get_string(*t, "game.type");
  if (g.type == "custom") {
    check_keys(j, path, {"type", "name"});
    g.name = get_string(require(j, path, "name"), "game.name");
    return g;
  }
  if (g.type != "quadratic")
    throw ConfigError("game.type", "expected \"quadratic\" or \"custom\", got \"" +
                                       g.type + "\"");
  check_keys(j, path, {"type", "r", "p_vec", "q", "m_weights"});
  const json& r = require(j, path, "r");
  if (!r.is_array() || r.empty())
    throw ConfigError("game.r", "expected a non-empty array of p x p matrices");
  for (std::size_t i = 0; i < r.size(); ++i)
    g.quadratic.r.push_back(get_matrix(r[i], "game.r[" + std::to_string(i) + "]"));
  const Index n = static_cast<Index>(g.quadratic.r.size());

  const json& pv = require(j, path, "p_vec");
  if (!pv.is_array() || static_cast<Index>(pv.size()) != n)
    throw ConfigError("game.p_vec", "expected one vector per player (" +
                                        std::to_string(n) + ")");
  for (std::size_t i = 0; i < pv.size(); ++i)
    g.quadratic.linear.push_back(
        get_vector(pv[i], "game.p_vec[" + std::to_string(i) + "]"));

  if (const json* q = find(j, "q")) {
    const Vector qv = get_vector(*q, "game.q");
    g.quadratic.offset.assign(qv.data(), qv.data() + qv.size());
  } else {
    g.quadratic.offset.assign(static_cast<std::size_t>(n), 0.0);
  }
  g.quadratic.coupling = Matrix::Zero(n, n);
  if (const json* m = find(j, "m_weights"))
    g.quadratic.coupling = get_matrix(*m, "game.m_weights");
  return g;
}

std::optional<SaturationSpec> parse_saturation(const json& j) {
  const std::string path = "strategy.saturation";
  try {
    if (j.is_number()) return SaturationSpec::symmetric(j.get<double>());
    check_keys(j, path, {"lower", "upper"});
    return SaturationSpec(get_vector(require(j, path, "lower"), path + ".lower"),
                          get_vector(require(j, path, "upper"), path + ".upper"));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
}

void parse_strategy_section(const json& j, ExperimentConfig& cfg) {
  const std::string path = "strategy";
  check_keys(j, path,
             {"tag", "theta", "theta1", "theta_bar", "k", "alpha", "beta",
              "saturation", "lyapunov_q"});
  const std::string tag = get_string(require(j, path, "tag"), "strategy.tag");
  const auto s = parse_strategy(tag);
  if (!s)
    throw ConfigError("strategy.tag",
                      "unknown strategy \"" + tag +
                          "\"; expected sat_gradient_play, first_order_dist, "
                          "second_order_central, second_order_dist or "
                          "second_order_dist_sat");
  cfg.strategy = *s;
  if (const json* v = find(j, "theta")) cfg.gains.theta = get_number(*v, "strategy.theta");
  if (const json* v = find(j, "theta1")) cfg.gains.theta1 = get_number(*v, "strategy.theta1");
  if (const json* v = find(j, "theta_bar")) cfg.gains.theta_bar = get_matrix(*v, "strategy.theta_bar");
  if (const json* v = find(j, "k")) cfg.gains.k = get_vector(*v, "strategy.k");
  if (const json* v = find(j, "alpha")) cfg.gains.alpha = get_number(*v, "strategy.alpha");
  if (const json* v = find(j, "beta")) cfg.gains.beta = get_number(*v, "strategy.beta");
  if (const json* v = find(j, "saturation")) cfg.saturation = parse_saturation(*v);
  if (const json* v = find(j, "lyapunov_q")) {
    if (v->is_number())
      cfg.lyapunov_q_scale = v->get<double>();
    else
      cfg.lyapunov_q = get_matrix(*v, "strategy.lyapunov_q");
  }
}

void parse_sim(const json& j, SimConfig& sim) {
  const std::string path = "sim";
  check_keys(j, path,
             {"dt", "t_end", "record_stride", "integrator", "convergence_tol",
              "monitor_lyapunov"});
  sim.dt = get_number(require(j, path, "dt"), "sim.dt");
  sim.t_end = get_number(require(j, path, "t_end"), "sim.t_end");
  if (const json* v = find(j, "record_stride"))
    sim.record_stride = get_count(*v, "sim.record_stride");
  if (const json* v = find(j, "integrator")) {
    const std::string name = get_string(*v, "sim.integrator");
    const auto integ = parse_integrator(name);
    if (!integ)
      throw ConfigError("sim.integrator",
                        "expected \"rk4\" or \"euler\", got \"" + name + "\"");
    sim.integrator = *integ;
  }
  if (const json* v = find(j, "convergence_tol"))
    sim.convergence_tol = get_number(*v, "sim.convergence_tol");
  if (const json* v = find(j, "monitor_lyapunov"))
    sim.monitor_lyapunov = get_bool(*v, "sim.monitor_lyapunov");
}

ExperimentConfig parse_document(const json& doc) {
  check_keys(doc, "",
             {"game", "graph", "strategy", "sim", "init", "output", "constants"});
  ExperimentConfig cfg;
  cfg.game = parse_game(require(doc, "", "game"));
  if (const json* g = find(doc, "graph")) {
    check_keys(*g, "graph", {"adjacency"});
    cfg.adjacency = get_matrix(require(*g, "graph", "adjacency"), "graph.adjacency");
  }
  parse_strategy_section(require(doc, "", "strategy"), cfg);
  parse_sim(require(doc, "", "sim"), cfg.sim);
  if (const json* init = find(doc, "init")) {
    check_keys(*init, "init", {"x0", "nu0", "z0", "y0"});
    for (const auto& item : init->items())
      cfg.init[item.key()] = get_init(item.value(), "init." + item.key());
  }
  if (const json* out = find(doc, "output")) {
    check_keys(*out, "output", {"trajectory", "summary"});
    if (const json* v = find(*out, "trajectory"))
      cfg.output.trajectory = get_string(*v, "output.trajectory");
    if (const json* v = find(*out, "summary"))
      cfg.output.summary = get_string(*v, "output.summary");
  }
  if (const json* c = find(doc, "constants")) {
    check_keys(*c, "constants", {"m", "lbar", "jacobian_norm"});
    ConstantsSection cs;
    cs.m = get_number(require(*c, "constants", "m"), "constants.m");
    cs.lbar = get_vector(require(*c, "constants", "lbar"), "constants.lbar");
    cs.jacobian_norm = get_number(require(*c, "constants", "jacobian_norm"),
                                  "constants.jacobian_norm");
    cfg.constants = cs;
  }
  return cfg;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed document: ") + e.what());
  }
  ExperimentConfig cfg = parse_document(doc);
  build_experiment(cfg);  // dimension and assumption checks
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json to_json(const Vector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

json to_json(const Matrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) rows.push_back(to_json(Vector(m.row(r).transpose())));
  return rows;
}

json to_json(const InitSpec& s) {
  switch (s.kind) {
    case InitSpec::Kind::Zeros: return "zeros";
    case InitSpec::Kind::Broadcast: return "broadcast:" + format_real(s.scalar);
    case InitSpec::Kind::Values: return to_json(s.values);
  }
  return "zeros";
}

json document(const ExperimentConfig& cfg, bool with_output) {
  json doc = json::object();
  json game = json::object();
  game["type"] = cfg.game.type;
  if (cfg.game.type == "custom") {
    game["name"] = cfg.game.name;
  } else {
    json r = json::array();
    for (const Matrix& m : cfg.game.quadratic.r) r.push_back(to_json(m));
    json pv = json::array();
    for (const Vector& v : cfg.game.quadratic.linear) pv.push_back(to_json(v));
    game["r"] = r;
    game["p_vec"] = pv;
    game["q"] = cfg.game.quadratic.offset;
    game["m_weights"] = to_json(cfg.game.quadratic.coupling);
  }
  doc["game"] = game;
  if (cfg.adjacency) doc["graph"] = {{"adjacency", to_json(*cfg.adjacency)}};

  json st = json::object();
  st["tag"] = std::string(to_string(cfg.strategy));
  const GainSet& g = cfg.gains;
  if (g.theta) st["theta"] = *g.theta;
  if (g.theta1) st["theta1"] = *g.theta1;
  if (g.theta_bar.size()) st["theta_bar"] = to_json(g.theta_bar);
  if (g.k.size()) st["k"] = to_json(g.k);
  if (g.alpha) st["alpha"] = *g.alpha;
  if (g.beta) st["beta"] = *g.beta;
  if (cfg.saturation) {
    const SaturationSpec& s = *cfg.saturation;
    if (s.broadcasts() && s.is_symmetric())
      st["saturation"] = s.upper(0);
    else
      st["saturation"] = {{"lower", to_json(s.lower())}, {"upper", to_json(s.upper())}};
  }
  if (cfg.lyapunov_q_scale)
    st["lyapunov_q"] = *cfg.lyapunov_q_scale;
  else if (cfg.lyapunov_q.size())
    st["lyapunov_q"] = to_json(cfg.lyapunov_q);
  doc["strategy"] = st;

  doc["sim"] = {{"dt", cfg.sim.dt},
                {"t_end", cfg.sim.t_end},
                {"record_stride", cfg.sim.record_stride},
                {"integrator", std::string(to_string(cfg.sim.integrator))},
                {"convergence_tol", cfg.sim.convergence_tol},
                {"monitor_lyapunov", cfg.sim.monitor_lyapunov}};
  if (!cfg.init.empty()) {
    json init = json::object();
    for (const auto& [key, spec] : cfg.init) init[key] = to_json(spec);
    doc["init"] = init;
  }
  if (with_output &&
      (!cfg.output.trajectory.empty() || !cfg.output.summary.empty())) {
    json out = json::object();
    if (!cfg.output.trajectory.empty()) out["trajectory"] = cfg.output.trajectory;
    if (!cfg.output.summary.empty()) out["summary"] = cfg.output.summary;
    doc["output"] = out;
  }
  if (cfg.constants)
    doc["constants"] = {{"m", cfg.constants->m},
                        {"lbar", to_json(cfg.constants->lbar)},
                        {"jacobian_norm", cfg.constants->jacobian_norm}};
  return doc;
}

}  // namespace

std::string serialize_config(const ExperimentConfig& config) {
  return document(config, true).dump(2) + "\n";
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  detail::Fnv1a h;
  h.text(document(config, false).dump());
  return h.value();
}

std::string format_hash(std::uint64_t hash) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << hash;
  return os.str();
}

// ---------------------------------------------------------------------------
// Assembly

namespace {

Game make_game(const GameSection& section, std::optional<Vector>& x_star) {
  if (section.type == "custom") {
    auto reg = find_registered_game(section.name);
    if (!reg) {
      std::string known;
      for (const auto& n : registered_game_names())
        known += (known.empty() ? "" : ", ") + n;
      throw ConfigError("game.name",
                        "unknown game \"" + section.name + "\"; known: " + known);
    }
    x_star = reg->reference_equilibrium;
    return reg->game;
  }
  try {
    Game game{QuadraticGame(section.quadratic)};
    game.set_label("quadratic");
    if (monotonicity_constant(game).certified)
      x_star = exact_ne_quadratic(*game.quadratic());
    return game;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError("game", e.what());
  }
}

const char* init_block_path(std::string_view key) {
  if (key == "x0") return "init.x0";
  if (key == "nu0") return "init.nu0";
  if (key == "z0") return "init.z0";
  return "init.y0";
}

StrategyState make_initial(const ExperimentConfig& cfg, const StateLayout& l) {
  StrategyState state(l);
  const Index np = l.profile_size();
  for (const auto& [key, spec] : cfg.init) {
    const std::string path = init_block_path(key);
    const bool present = key == "x0" || (key == "nu0" && l.has_velocity()) ||
                         (key == "z0" && l.has_auxiliary()) ||
                         (key == "y0" && l.has_estimates());
    if (!present)
      throw ConfigError(path, "not used by strategy " +
                                  std::string(to_string(cfg.strategy)));
    if (key == "x0") state.x() = spec.resolve(np, path);
    if (key == "nu0") state.nu() = spec.resolve(np, path);
    if (key == "z0") state.z() = spec.resolve(np, path);
    if (key == "y0") state.y() = spec.resolve(l.estimate_size(), path);
  }
  return state;
}

}  // namespace

Experiment build_experiment(const ExperimentConfig& cfg) {
  std::optional<Vector> x_star;
  Game game = make_game(cfg.game, x_star);
  const Index n = game.num_players();
  const Index p = game.action_dim();

  std::optional<CommGraph> graph;
  std::optional<EstimationMatrix> estimation;
  if (cfg.adjacency) {
    if (cfg.adjacency->rows() != n) {
      std::ostringstream os;
      os << "expected " << n << " x " << n << " for " << n << " players, got "
         << cfg.adjacency->rows() << " x " << cfg.adjacency->cols();
      throw ConfigError("graph.adjacency", os.str());
    }
    try {
      graph.emplace(*cfg.adjacency);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("graph.adjacency", e.what());
    }
  }
  if (is_distributed(cfg.strategy)) {
    if (!graph)
      throw ConfigError("graph.adjacency",
                        "required by strategy " + std::string(to_string(cfg.strategy)));
    try {
      estimation = estimation_matrix(*graph, p);
    } catch (const AssumptionError& e) {
      throw ConfigError("graph.adjacency", e.what());
    }
  }

  if (is_saturated(cfg.strategy) && !cfg.saturation)
    throw ConfigError("strategy.saturation",
                      "required by strategy " + std::string(to_string(cfg.strategy)));
  if (cfg.saturation && !cfg.saturation->broadcasts() &&
      cfg.saturation->channels() != game.profile_size()) {
    std::ostringstream os;
    os << "expected 1 or " << game.profile_size() << " channels, got "
       << cfg.saturation->channels();
    throw ConfigError("strategy.saturation", os.str());
  }
  if (cfg.lyapunov_q_scale && !(*cfg.lyapunov_q_scale > 0.0))
    throw ConfigError("strategy.lyapunov_q", "must be strictly positive");
  if (cfg.lyapunov_q.size()) {
    const Index size = n * n * p;
    if (cfg.lyapunov_q.rows() != size || cfg.lyapunov_q.cols() != size) {
      std::ostringstream os;
      os << "expected a " << size << " x " << size << " matrix";
      throw ConfigError("strategy.lyapunov_q", os.str());
    }
  }
  if (cfg.constants) {
    if (cfg.constants->lbar.size() != n)
      throw ConfigError("constants.lbar", "expected one value per player (" +
                                              std::to_string(n) + ")");
  }
  try {
    cfg.sim.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("sim", e.what());
  }

  std::optional<StrategyField> field;
  try {
    field.emplace(cfg.strategy, game, estimation, cfg.gains,
                  is_saturated(cfg.strategy) ? cfg.saturation : std::nullopt);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("strategy", e.what());
  }
  StrategyState initial = make_initial(cfg, field->layout());
  return Experiment{cfg,        std::move(game),       std::move(graph),
                    std::move(estimation), std::move(*field), std::move(initial),
                    std::move(x_star)};
}

LyapunovPair experiment_lyapunov_pair(const Experiment& ex) {
  if (!ex.estimation)
    throw std::invalid_argument("the Lyapunov pair needs a communication graph");
  const Index n = ex.game.num_players();
  const Index p = ex.game.action_dim();
  const Index size = ex.estimation->size();
  Matrix q = Matrix::Identity(size, size);
  if (ex.config.lyapunov_q_scale) q *= *ex.config.lyapunov_q_scale;
  if (ex.config.lyapunov_q.size()) q = ex.config.lyapunov_q;
  const Vector theta_bar = expand_pair_weights(pair_weights(ex.config.gains, n), p);
  return solve_lyapunov(*ex.estimation, theta_bar, q);
}

// ---------------------------------------------------------------------------
// Tuning and oracle

namespace {

GameConstants constants_for(const Experiment& ex) {
  if (ex.config.constants) {
    GameConstants c;
    c.m = ex.config.constants->m;
    c.lbar = ex.config.constants->lbar;
    c.jacobian_norm = ex.config.constants->jacobian_norm;
    c.certified = true;
    c.source = "user";
    return c;
  }
  return game_constants(ex.game);
}

TunerReport tune_experiment(const Experiment& ex,
                            const std::optional<LyapunovPair>& known_pair) {
  const GameConstants c = constants_for(ex);
  const ExperimentConfig& cfg = ex.config;
  const Index n = ex.game.num_players();
  auto pair = [&] { return known_pair ? *known_pair : experiment_lyapunov_pair(ex); };

  switch (cfg.strategy) {
    case Strategy::SatGradPlay: {
      TunerReport r = alpha_beta_star(c);  // checks m > 0
      r.strategy = Strategy::SatGradPlay;
      r.formula = "none";
      r.alpha_star.reset();
      r.caveats.push_back("saturated gradient play has no gain to tune");
      return r;
    }
    case Strategy::FirstOrderDist: {
      TunerReport r = theta_star_first_order(c, pair(), n);
      r.theta = cfg.gains.theta;
      if (r.theta && !(*r.theta > *r.theta_star))
        r.caveats.push_back("configured theta does not exceed theta_star");
      return r;
    }
    case Strategy::SecondOrderCentral:
      return alpha_beta_star(c, cfg.gains.alpha, cfg.gains.beta);
    case Strategy::SecondOrderDist:
    case Strategy::SecondOrderDistSat: {
      SecondOrderInputs in;
      in.k = cfg.gains.k;
      in.theta_bar =
          expand_pair_weights(pair_weights(cfg.gains, n), ex.game.action_dim());
      in.estimation = ex.estimation->matrix;
      in.saturated = cfg.strategy == Strategy::SecondOrderDistSat;
      const LyapunovPair lp = pair();
      TunerReport r = theta_bounds_second_order(c, lp, n, in);
      if (cfg.gains.theta && *cfg.gains.theta > *r.theta_star) {
        in.theta = cfg.gains.theta;
        r = theta_bounds_second_order(c, lp, n, in);
        if (cfg.gains.theta1 && !(*cfg.gains.theta1 < *r.theta1_star))
          r.caveats.push_back("configured theta1 is not below theta1_star");
      } else {
        r.theta = cfg.gains.theta;
        r.caveats.push_back(
            "configured theta does not exceed theta_star; theta1_star undefined");
      }
      return r;
    }
  }
  throw std::logic_error("unhandled strategy");
}

}  // namespace

TunerReport tune(const ExperimentConfig& config) {
  return tune_experiment(build_experiment(config), std::nullopt);
}

OracleReport oracle(const ExperimentConfig& config) {
  const Experiment ex = build_experiment(config);
  const QuadraticGame* q = ex.game.quadratic();
  if (!q) throw AssumptionError("the oracle needs a quadratic game");
  OracleReport r;
  r.x_star = exact_ne_quadratic(*q);
  r.residual = pseudo_gradient(ex.game, r.x_star).lpNorm<Eigen::Infinity>();
  return r;
}

// ---------------------------------------------------------------------------
// Running

int SummaryReport::exit_code() const {
  if (!converged) return 2;
  if (bounds_ok && !*bounds_ok) return 2;
  return 0;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const Experiment ex = build_experiment(config);
  const SimConfig& sim = config.sim;

  ExperimentResult res;
  Trajectory& traj = res.trajectory;
  traj = integrate(ex.field, ex.initial, sim);
  annotate(traj, ex.x_star);

  SummaryReport& s = res.summary;
  s.strategy = std::string(to_string(config.strategy));
  s.game = config.game.type == "custom" ? config.game.name : "quadratic";
  s.config_hash = config_hash(config);
  s.convergence_tol = sim.convergence_tol;
  s.steps = sim.steps();
  s.records = traj.size();
  s.warnings = traj.metadata.warnings;
  if (ex.x_star) {
    const ConvergenceResult c = detect_convergence(traj, *ex.x_star, sim.convergence_tol);
    s.converged = c.converged;
    s.t_hit = c.t_hit;
    s.final_dist_ne = c.final_distance;
  } else {
    s.warnings.push_back("no reference equilibrium; convergence not assessed");
  }
  s.max_abs_u = max_abs_control(traj);
  if (is_saturated(config.strategy)) {
    const BoundCheck b = check_control_bounds(traj, *config.saturation);
    s.bounds_ok = b.ok;
    s.worst_violation = b.worst_violation;
  }
  if (!traj.diagnostics.est_err.empty())
    s.final_est_err = traj.diagnostics.est_err.back();

  std::optional<LyapunovPair> pair;
  if (sim.monitor_lyapunov) {
    try {
      LyapunovContext ctx;
      ctx.strategy = config.strategy;
      ctx.game = &ex.game;
      ctx.gains = config.gains;
      ctx.spec = config.saturation;
      ctx.x_star = ex.x_star;
      if (config.strategy == Strategy::FirstOrderDist ||
          config.strategy == Strategy::SecondOrderDist ||
          config.strategy == Strategy::SecondOrderDistSat) {
        pair = experiment_lyapunov_pair(ex);
        ctx.p = pair->p;
      }
      LyapunovSeries series = monitor_lyapunov(traj, ctx);
      s.max_lyapunov_increment = series.max_increment;
      traj.diagnostics.lyapunov = std::move(series.values);
    } catch (const std::exception& e) {
      s.warnings.push_back(std::string("Lyapunov monitor unavailable: ") + e.what());
    }
  }

  try {
    const TunerReport r = tune_experiment(ex, pair);
    auto echo = [&](const char* key, const std::optional<double>& v) {
      if (v) s.tuner[key] = *v;
    };
    echo("theta_star", r.theta_star);
    echo("theta1_star", r.theta1_star);
    echo("alpha_star", r.alpha_star);
    echo("beta_star", r.beta_star);
    for (const auto& c : r.caveats) s.tuner_note += (s.tuner_note.empty() ? "" : "; ") + c;
  } catch (const std::exception& e) {
    s.tuner_note = std::string("unavailable: ") + e.what();
  }

  s.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

void write_summary(const SummaryReport& s, std::ostream& out) {
  auto opt = [&](const char* key, const std::optional<double>& v) {
    out << key << '=' << (v ? format_real(*v) : std::string("none")) << '\n';
  };
  out << "strategy=" << s.strategy << '\n';
  out << "game=" << s.game << '\n';
  out << "config_hash=" << format_hash(s.config_hash) << '\n';
  out << "converged=" << (s.converged ? "true" : "false") << '\n';
  opt("t_hit", s.t_hit);
  opt("final_dist_ne", s.final_dist_ne);
  out << "convergence_tol=" << format_real(s.convergence_tol) << '\n';
  out << "max_abs_u=" << format_list(s.max_abs_u) << '\n';
  out << "max_abs_u_overall="
      << format_real(s.max_abs_u.size() ? s.max_abs_u.maxCoeff() : 0.0) << '\n';
  if (s.bounds_ok) {
    out << "bounds_ok=" << (*s.bounds_ok ? "true" : "false") << '\n';
    opt("worst_violation", s.worst_violation);
  }
  if (s.max_lyapunov_increment) opt("max_lyapunov_increment", s.max_lyapunov_increment);
  if (s.final_est_err) opt("final_est_err", s.final_est_err);
  for (const auto& [key, value] : s.tuner)
    out << "tuner." << key << '=' << format_real(value) << '\n';
  if (!s.tuner_note.empty()) out << "tuner.note=" << s.tuner_note << '\n';
  out << "steps=" << s.steps << '\n';
  out << "records=" << s.records << '\n';
  out << "wall_seconds=" << format_real(s.wall_seconds) << '\n';
  for (std::size_t k = 0; k < s.warnings.size(); ++k)
    out << "warning." << k << '=' << s.warnings[k] << '\n';
  out << "exit_code=" << s.exit_code() << '\n';
}

void write_summary(const SummaryReport& summary, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_summary(summary, out);
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// Presets

GameSection sensor_network_section() {
  GameSection g;
  g.type = "quadratic";
  g.quadratic = QuadraticGame::sensor_network().params();
  return g;
}

ExperimentConfig preset(std::string_view name) {
  ExperimentConfig cfg;
  cfg.game = sensor_network_section();
  const Vector x0{{10.0, 0.0, 0.0, 5.0, 0.0, 0.0}};
  cfg.sim.integrator = Integrator::RK4;
  cfg.sim.monitor_lyapunov = true;
  cfg.saturation = SaturationSpec::symmetric(5.0);
  if (name == "fig2") {
    cfg.adjacency = CommGraph::complete(3).adjacency();
    cfg.strategy = Strategy::SatGradPlay;
    cfg.sim.dt = 1e-3;
    cfg.sim.t_end = 20.0;
    cfg.sim.record_stride = 10;
    cfg.sim.convergence_tol = 1e-3;
    cfg.init["x0"] = InitSpec::explicit_values(x0);
  } else if (name == "fig3") {
    cfg.adjacency = CommGraph::path(3).adjacency();
    cfg.strategy = Strategy::FirstOrderDist;
    cfg.gains.theta = 1000.0;
    cfg.sim.dt = 1e-4;
    cfg.sim.t_end = 20.0;
    cfg.sim.record_stride = 100;
    cfg.sim.convergence_tol = 1e-2;
    cfg.init["x0"] = InitSpec::explicit_values(x0);
    cfg.init["y0"] = InitSpec::broadcast(10.0);
  } else if (name == "fig4") {
    cfg.adjacency = CommGraph::path(3).adjacency();
    cfg.strategy = Strategy::SecondOrderDistSat;
    cfg.gains.theta = 200.0;
    cfg.gains.theta1 = 1.0;
    cfg.gains.k = Vector::Constant(3, 0.1);
    cfg.sim.dt = 1e-3;
    cfg.sim.t_end = 200.0;
    cfg.sim.record_stride = 100;
    cfg.sim.convergence_tol = 1e-2;
    for (const char* key : {"x0", "nu0", "z0", "y0"}) cfg.init[key] = InitSpec::zeros();
  } else {
    throw ConfigError("figure", "unknown figure id \"" + std::string(name) +
                                    "\"; expected fig2, fig3 or fig4");
  }
  return cfg;
}

std::vector<std::string> preset_names() { return {"fig2", "fig3", "fig4"}; }

}  // namespace nes
