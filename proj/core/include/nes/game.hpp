#pragma once

// N-player games with p-dimensional actions.
//
// Action profiles are stacked player-major, dimension-minor:
//   x = [x_{1,1}, ..., x_{1,p}, x_{2,1}, ..., x_{N,p}]
// and every Kronecker structure elsewhere in the library follows this order.
// Player indices are zero-based.

#include "nes/types.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nes {

/// Coefficients of the quadratic sensor-network family
///   f_i(x) = x_i' r_i x_i + x_i' p_i + q_i + sum_j m_ij |x_i - x_j|^2.
struct QuadraticParams {
  std::vector<Matrix> r;       // N blocks, p x p
  std::vector<Vector> linear;  // N vectors of length p
  std::vector<double> offset;  // N scalars
  Matrix coupling;             // N x N, symmetric, nonnegative, zero diagonal
};

class QuadraticGame {
 public:
  explicit QuadraticGame(QuadraticParams params);

  /// Three mobile sensors in the plane with a chain of physical couplings
  /// (m_12 = m_23 = 1, m_13 = 0); unique equilibrium
  /// [-0.125, 0.75, 0.75, 0.5, 1.375, -0.25].
  static QuadraticGame sensor_network();

  Index num_players() const { return num_players_; }
  Index action_dim() const { return action_dim_; }
  Index profile_size() const { return num_players_ * action_dim_; }
  const QuadraticParams& params() const { return params_; }

  /// Constant game Jacobian H.
  const Matrix& jacobian() const { return jacobian_; }
  /// Stacked linear terms c, so that the pseudo-gradient is H x + c.
  const Vector& gradient_offset() const { return gradient_offset_; }

  double cost(Index player, const Vector& profile) const;
  Vector pseudo_gradient(const Vector& profile) const;
  Vector partial_gradient(Index player, const Vector& profile) const;

 private:
  QuadraticParams params_;
  Index num_players_;
  Index action_dim_;
  Matrix jacobian_;
  Vector gradient_offset_;
};

/// A game given by per-player cost evaluators, optionally with analytic
/// partial gradients and Jacobian. Quadratic games carry their closed forms.
class Game {
 public:
  using CostFn = std::function<double(const Vector&)>;
  /// Player i's own partial gradient, a vector of length p.
  using PartialGradientFn = std::function<Vector(const Vector&)>;
  using JacobianFn = std::function<Matrix(const Vector&)>;

  explicit Game(QuadraticGame quadratic);

  static Game custom(Index num_players, Index action_dim,
                     std::vector<CostFn> costs,
                     std::vector<PartialGradientFn> gradients = {},
                     JacobianFn jacobian = {});

  Index num_players() const { return num_players_; }
  Index action_dim() const { return action_dim_; }
  Index profile_size() const { return num_players_ * action_dim_; }

  /// Non-null iff the game was built from quadratic coefficients.
  const QuadraticGame* quadratic() const { return quadratic_.get(); }
  bool has_analytic_gradients() const {
    return quadratic_ != nullptr || !gradients_.empty();
  }
  bool has_analytic_jacobian() const {
    return quadratic_ != nullptr || static_cast<bool>(jacobian_);
  }

  /// Stable 64-bit fingerprint of the game's defining data; custom games
  /// hash their dimensions and label only.
  std::uint64_t fingerprint() const { return fingerprint_; }
  const std::string& label() const { return label_; }
  Game& set_label(std::string label);

  const std::vector<CostFn>& costs() const { return costs_; }
  const std::vector<PartialGradientFn>& gradients() const { return gradients_; }
  const JacobianFn& jacobian() const { return jacobian_; }

 private:
  Game() = default;

  Index num_players_ = 0;
  Index action_dim_ = 0;
  std::shared_ptr<const QuadraticGame> quadratic_;
  std::vector<CostFn> costs_;
  std::vector<PartialGradientFn> gradients_;
  JacobianFn jacobian_;
  std::string label_;
  std::uint64_t fingerprint_ = 0;
};

double cost(const Game& game, Index player, const Vector& profile);

/// Stacked partial gradients [grad_1 f_1(x); ...; grad_N f_N(x)].
/// Uses analytic evaluators when present, otherwise central differences with
/// step 1e-6 * max(1, |x|_inf).
Vector pseudo_gradient(const Game& game, const Vector& profile);

/// Player i's own partial gradient evaluated at its local estimate of the
/// whole profile.
Vector partial_gradient_at_estimate(const Game& game, Index player,
                                    const Vector& estimate);

Matrix game_jacobian(const Game& game, const Vector& profile);

struct MonotonicityProbe {
  int samples = 200;
  double radius = 10.0;
  std::uint64_t seed = 1;
};

struct MonotonicityEstimate {
  double m = 0.0;
  /// True only when m was computed exactly (quadratic game) and is positive.
  bool certified = false;
};

/// Quadratic games: m = lambda_min((H + H')/2), exact. Other games: the
/// smallest ratio (x-z)'(P(x)-P(z)) / |x-z|^2 over sampled pairs, never
/// certified.
MonotonicityEstimate monotonicity_constant(const Game& game,
                                           const MonotonicityProbe& probe = {});

/// Solves H x = -c. Throws AssumptionError when the game is not strongly
/// monotone.
Vector exact_ne_quadratic(const QuadraticGame& game);

/// Largest relative disagreement between analytic partial gradients and
/// central differences of the costs over random points.
double max_gradient_disagreement(const Game& game, int samples,
                                 std::uint64_t seed, double radius = 5.0);

/// Built-in non-quadratic games addressable by name from configuration.
struct RegisteredGame {
  Game game;
  std::optional<Vector> reference_equilibrium;
};

std::optional<RegisteredGame> find_registered_game(std::string_view name);
std::vector<std::string> registered_game_names();

}  // namespace nes
