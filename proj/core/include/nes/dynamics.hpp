#pragma once

// Saturation and the five equilibrium-seeking vector fields.
//
//   SatGradPlay         x' = -sat(P(x))
//   FirstOrderDist      x_i' = -sat(grad_i f_i(y_i)),
//                       y' = -theta Tbar M (y - 1 (x) x)
//   SecondOrderCentral  x' = nu, nu' = -alpha P(x) - beta nu - H(x) nu
//   SecondOrderDist     x' = nu, nu' = -(x - z) - (nu - z'),
//                       z' = -Kbar [grad_i f_i(y_i)],
//                       y' = -theta theta1 Tbar M (y - 1 (x) z)
//   SecondOrderDistSat  as SecondOrderDist with nu' = -sat((x - z) + (nu - z'))
//
// with Kbar = theta1 K. Every field returns the control input alongside the
// state derivative.

#include "nes/game.hpp"
#include "nes/graph.hpp"
#include "nes/types.hpp"

#include <optional>
#include <string_view>

namespace nes {

/// Per-channel bounds lower < 0 < upper on the control input. A spec with a
/// single channel broadcasts over any vector.
class SaturationSpec {
 public:
  SaturationSpec(Vector lower, Vector upper);

  static SaturationSpec symmetric(double bound, Index channels = 1);

  Index channels() const { return lower_.size(); }
  bool broadcasts() const { return lower_.size() == 1; }
  double lower(Index k) const { return lower_(broadcasts() ? 0 : k); }
  double upper(Index k) const { return upper_(broadcasts() ? 0 : k); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  bool is_symmetric() const;

 private:
  Vector lower_;
  Vector upper_;
};

/// Componentwise clamp; equals sgn(v) min(|v|, U) for symmetric bounds.
double sat(double v, double bound);
Vector sat(const Vector& v, const SaturationSpec& spec);

/// Integral of the clamp from 0 to g: g^2/2 inside the bounds, linear growth
/// outside. Even for symmetric bounds, nonnegative, radially unbounded.
double sat_integral(double g, double bound);
double sat_integral(double g, double lower, double upper);
/// Sum of per-channel integrals.
double sat_integral_sum(const Vector& g, const SaturationSpec& spec);

enum class Strategy {
  SatGradPlay,
  FirstOrderDist,
  SecondOrderCentral,
  SecondOrderDist,
  SecondOrderDistSat,
};

std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view name);

constexpr bool is_distributed(Strategy s) {
  return s == Strategy::FirstOrderDist || s == Strategy::SecondOrderDist ||
         s == Strategy::SecondOrderDistSat;
}
constexpr bool is_second_order(Strategy s) {
  return s == Strategy::SecondOrderCentral || s == Strategy::SecondOrderDist ||
         s == Strategy::SecondOrderDistSat;
}
constexpr bool is_saturated(Strategy s) {
  return s == Strategy::SatGradPlay || s == Strategy::FirstOrderDist ||
         s == Strategy::SecondOrderDistSat;
}

/// Offsets of the x, nu, z, y blocks inside the flat state vector.
class StateLayout {
 public:
  StateLayout(Strategy strategy, Index num_players, Index action_dim);

  Strategy strategy() const { return strategy_; }
  Index num_players() const { return num_players_; }
  Index action_dim() const { return action_dim_; }
  Index profile_size() const { return num_players_ * action_dim_; }
  Index estimate_size() const { return num_players_ * profile_size(); }

  bool has_velocity() const { return is_second_order(strategy_); }
  bool has_auxiliary() const {
    return strategy_ == Strategy::SecondOrderDist ||
           strategy_ == Strategy::SecondOrderDistSat;
  }
  bool has_estimates() const { return is_distributed(strategy_); }

  Index x_offset() const { return 0; }
  Index nu_offset() const { return profile_size(); }
  Index z_offset() const { return 2 * profile_size(); }
  Index y_offset() const { return y_offset_; }
  Index size() const { return size_; }

  /// Name of the block containing flat index k ("x", "nu", "z" or "y").
  std::string_view block_name(Index k) const;

  friend bool operator==(const StateLayout&, const StateLayout&) = default;

 private:
  Strategy strategy_;
  Index num_players_;
  Index action_dim_;
  Index y_offset_;
  Index size_;
};

class StrategyState {
 public:
  explicit StrategyState(StateLayout layout);
  StrategyState(StateLayout layout, Vector values);

  const StateLayout& layout() const { return layout_; }
  const Vector& values() const { return values_; }
  Vector& values() { return values_; }

  using ConstBlock = Eigen::VectorBlock<const Vector>;
  using Block = Eigen::VectorBlock<Vector>;

  // Accessing a block the layout does not have throws std::logic_error.
  ConstBlock x() const;
  ConstBlock nu() const;
  ConstBlock z() const;
  ConstBlock y() const;
  Block x();
  Block nu();
  Block z();
  Block y();

 private:
  StateLayout layout_;
  Vector values_;
};

/// Gains of all strategies; fields a strategy does not use are ignored.
///   theta      consensus scale (theta_ij = theta * theta_bar_ij, first order;
///              theta_ij = theta * theta1 * theta_bar_ij, second order)
///   theta1     second-order time-scale gain, Kbar_i = theta1 * K_i
///   theta_bar  N x N fixed positive weights; empty means all ones
///   k          N fixed positive constants K_i
///   alpha/beta centralised second-order gains
struct GainSet {
  std::optional<double> theta;
  std::optional<double> theta1;
  Matrix theta_bar;
  Vector k;
  std::optional<double> alpha;
  std::optional<double> beta;
};

/// Throws std::invalid_argument when a gain the strategy needs is missing or
/// not strictly positive, or has the wrong size.
void validate_gains(Strategy strategy, const GainSet& gains, Index num_players);

/// theta_bar with the all-ones default applied.
Matrix pair_weights(const GainSet& gains, Index num_players);

/// Diagonal of the estimate gain matrix, length N^2 p:
/// theta * theta_bar_ij (first order) or theta * theta1 * theta_bar_ij.
Vector consensus_gains(Strategy strategy, const GainSet& gains,
                       Index num_players, Index action_dim);

/// Kbar = theta1 * K expanded to length N p.
Vector tracking_gains(const GainSet& gains, Index num_players, Index action_dim);

struct FieldValue {
  Vector derivative;
  Vector control;
};

FieldValue rhs_sat_gradient_play(const Game& game, const StrategyState& state,
                                 const SaturationSpec& spec);

FieldValue rhs_first_order_dist(const Game& game, const EstimationMatrix& m,
                                const StrategyState& state,
                                const GainSet& gains,
                                const SaturationSpec& spec);

/// The control is unbounded for this strategy.
FieldValue rhs_second_order_central(const Game& game,
                                    const StrategyState& state,
                                    const GainSet& gains);

FieldValue rhs_second_order_dist(const Game& game, const EstimationMatrix& m,
                                 const StrategyState& state,
                                 const GainSet& gains);

FieldValue rhs_second_order_dist_sat(const Game& game,
                                     const EstimationMatrix& m,
                                     const StrategyState& state,
                                     const GainSet& gains,
                                     const SaturationSpec& spec);

/// Any of the five fields with gains and graph artifacts bound once; the
/// per-evaluation cost is the field itself.
class StrategyField {
 public:
  StrategyField(Strategy strategy, Game game,
                std::optional<EstimationMatrix> estimation, GainSet gains,
                std::optional<SaturationSpec> spec);

  FieldValue operator()(const StrategyState& state) const;

  Strategy strategy() const { return strategy_; }
  StateLayout layout() const;
  const Game& game() const { return game_; }
  const GainSet& gains() const { return gains_; }
  const std::optional<SaturationSpec>& saturation() const { return spec_; }
  const std::optional<EstimationMatrix>& estimation() const { return estimation_; }

  /// theta_ij max * lambda_max(M) for distributed strategies, 0 otherwise.
  double fastest_consensus_rate() const;

 private:
  Strategy strategy_;
  Game game_;
  std::optional<EstimationMatrix> estimation_;
  GainSet gains_;
  std::optional<SaturationSpec> spec_;
  Vector consensus_;  // diagonal of theta_ij
  Vector tracking_;   // Kbar expanded
};

/// Everything a Lyapunov candidate may reference.
struct LyapunovContext {
  Strategy strategy = Strategy::SatGradPlay;
  const Game* game = nullptr;
  GainSet gains;
  std::optional<SaturationSpec> spec;
  std::optional<Matrix> p;       // Lyapunov matrix for the estimate error
  std::optional<Vector> x_star;  // needed by the second-order distributed V
};

/// Exact Lyapunov candidate of the convergence argument matching the
/// strategy. Throws std::invalid_argument when a required ingredient (P,
/// x*, saturation bounds) is missing from the context.
double lyapunov_value(const LyapunovContext& context,
                      const StrategyState& state);

/// [grad_i f_i(y_i)]_vec: each player's own partial gradient at its own
/// estimate block y_i.
Vector estimate_gradients(const Game& game, const Vector& y);

}  // namespace nes
