#pragma once

// Experiment documents: strict JSON configuration, the run/tune/oracle flows
// behind the command-line tool, and the built-in figure presets.
//
// Document sections: game, graph, strategy, sim, init, output and the
// optional constants. Unknown keys anywhere are rejected.

#include "nes/dynamics.hpp"
#include "nes/game.hpp"
#include "nes/graph.hpp"
#include "nes/sim.hpp"
#include "nes/tuner.hpp"
#include "nes/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nes {

/// Malformed or inconsistent configuration. path() is the dotted key path
/// ("strategy.theta", "init.y0", ...) or empty for document-level errors.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message);
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// An initial block: the keyword "zeros", "broadcast:<v>", or explicit values.
struct InitSpec {
  enum class Kind { Zeros, Broadcast, Values };
  Kind kind = Kind::Zeros;
  double scalar = 0.0;
  Vector values;

  static InitSpec zeros() { return {}; }
  static InitSpec broadcast(double v) { return {Kind::Broadcast, v, {}}; }
  static InitSpec explicit_values(Vector v) {
    return {Kind::Values, 0.0, std::move(v)};
  }

  Vector resolve(Index length, const std::string& path) const;
};

struct GameSection {
  std::string type = "quadratic";  // "quadratic" or "custom"
  QuadraticParams quadratic;       // type == "quadratic"
  std::string name;                // registry name, type == "custom"
};

/// User-supplied constants for games without closed-form bounds.
struct ConstantsSection {
  double m = 0.0;
  Vector lbar;
  double jacobian_norm = 0.0;
};

struct OutputSection {
  std::string trajectory;  // CSV path, empty for none
  std::string summary;     // key=value path, empty for none
};

struct ExperimentConfig {
  GameSection game;
  std::optional<Matrix> adjacency;
  Strategy strategy = Strategy::SatGradPlay;
  GainSet gains;
  std::optional<SaturationSpec> saturation;
  /// Q for the Lyapunov pair: identity when both are absent, q_scale * I, or
  /// an explicit N^2 p square matrix.
  std::optional<double> lyapunov_q_scale;
  Matrix lyapunov_q;
  SimConfig sim;
  std::map<std::string, InitSpec> init;  // keys x0, nu0, z0, y0
  OutputSection output;
  std::optional<ConstantsSection> constants;
};

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Canonical JSON (sorted keys, two-space indent). parse_config of the result
/// yields an identical structure.
std::string serialize_config(const ExperimentConfig& config);

/// FNV-1a over the canonical document without the output section.
std::uint64_t config_hash(const ExperimentConfig& config);
std::string format_hash(std::uint64_t hash);

/// Library objects assembled from a validated configuration.
struct Experiment {
  ExperimentConfig config;
  Game game;
  std::optional<CommGraph> graph;
  std::optional<EstimationMatrix> estimation;
  StrategyField field;
  StrategyState initial;
  std::optional<Vector> x_star;
};

/// Throws ConfigError naming the offending key on any inconsistency.
Experiment build_experiment(const ExperimentConfig& config);

/// Lyapunov pair for the experiment's graph, theta_bar and Q.
LyapunovPair experiment_lyapunov_pair(const Experiment& experiment);

struct SummaryReport {
  std::string strategy;
  std::string game;
  std::uint64_t config_hash = 0;
  bool converged = false;
  std::optional<double> t_hit;
  std::optional<double> final_dist_ne;
  double convergence_tol = 0.0;
  Vector max_abs_u;  // per channel
  std::optional<bool> bounds_ok;
  std::optional<double> worst_violation;
  std::optional<double> max_lyapunov_increment;
  std::optional<double> final_est_err;
  std::map<std::string, double> tuner;  // theta_star and friends when computed
  std::string tuner_note;
  double wall_seconds = 0.0;
  Index steps = 0;
  std::size_t records = 0;
  std::vector<std::string> warnings;

  /// 0 when converged (and within bounds for saturated strategies), else 2.
  int exit_code() const;
};

void write_summary(const SummaryReport& summary, std::ostream& out);
void write_summary(const SummaryReport& summary, const std::string& path);

struct ExperimentResult {
  Trajectory trajectory;
  SummaryReport summary;
};

/// Integrates the experiment and fills diagnostics and summary. Does not
/// write files.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Gain bounds for the configured strategy. Throws when the game's constants
/// cannot be certified.
TunerReport tune(const ExperimentConfig& config);

struct OracleReport {
  Vector x_star;
  double residual = 0.0;  // |P(x*)|_inf
};

/// Exact equilibrium of a quadratic game; throws otherwise.
OracleReport oracle(const ExperimentConfig& config);

/// Built-in presets "fig2", "fig3", "fig4". Throws ConfigError otherwise.
ExperimentConfig preset(std::string_view name);
std::vector<std::string> preset_names();

/// The sensor-network coefficients as a game section.
GameSection sensor_network_section();

}  // namespace nes
