#pragma once

// Sufficient-condition gain bounds for the seeking strategies.
//
// First order:   theta* = (2 l2 + l1 eps1 + l3 eps2) / (2 lambda_min(Q))
//                with eps1 = 2 l1 / m, eps2 = 2 l3 / m.
// Second order:  theta* = l1^2 / (4 m lambda_min(Q)) + l2 / lambda_min(Q)
//                (the saturated variant's (l1^2 + 4 m l2) / (4 m lambda_min(Q))
//                is the same number),
//                theta1* = (4 lambda_min(A1) / (theta^2 l3^2))^(1/3),
//                A1 = [[m, -l1/2], [-l1/2, lambda_min(Q) theta - l2]].
// Centralised:   alpha* = m, beta*(alpha) = 2 alpha + 2 sqrt(alpha m).
//
// All matrix norms are spectral norms.

#include "nes/dynamics.hpp"
#include "nes/game.hpp"
#include "nes/graph.hpp"
#include "nes/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nes {

/// Game data the bounds depend on.
struct GameConstants {
  double m = 0.0;             // strong monotonicity constant
  Vector lbar;                // Lipschitz constants of grad_i f_i, one per player
  double jacobian_norm = 0.0; // sup_x |H(x)|
  /// Exact for quadratic games; user-supplied constants are taken on trust
  /// and marked as such.
  bool certified = false;
  std::string source;         // "quadratic" or "user"
};

/// lbar_i = spectral norm of the i-th block row of H. Quadratic games only;
/// anything else throws AssumptionError.
Vector lipschitz_constants(const Game& game);

/// Exact constants of a quadratic game. Throws AssumptionError for other games.
GameConstants game_constants(const Game& game);

struct TunerReport {
  Strategy strategy = Strategy::SatGradPlay;
  std::string formula;  // which bound theta* follows
  std::string constants_source;
  double m = 0.0;
  Vector lbar;
  std::optional<double> jacobian_norm;
  std::optional<double> p_norm;
  std::optional<double> lambda_min_q;
  std::optional<double> l1, l2, l3;
  std::optional<double> eps1, eps2;
  std::optional<double> theta_star;
  std::optional<double> theta;  // chosen theta the second-order bound used
  std::optional<double> lambda_min_a1;
  std::optional<double> theta1_star;
  std::optional<double> alpha_star;
  std::optional<double> alpha;
  std::optional<double> beta_star;
  std::optional<double> beta;
  std::optional<double> eps1_low, eps1_high;  // open window for eps1
  std::vector<std::string> caveats;
};

/// Plain formulas, exposed so a report can be checked against its constants.
double theta_star_formula(double l1, double l2, double l3, double eps1,
                          double eps2, double lambda_min_q);
double theta_star_b1(double m, double l1, double l2, double lambda_min_q);
double theta_star_b3(double m, double l1, double l2, double lambda_min_q);
/// Smallest eigenvalue of A1.
double a1_min_eigenvalue(double m, double l1, double l2, double lambda_min_q,
                         double theta);
double theta1_star_formula(double lambda_min_a1, double theta, double l3);
double beta_star_formula(double alpha, double m);

/// Throws AssumptionError when m <= 0 or the constants are not certified.
TunerReport theta_star_first_order(const GameConstants& constants,
                                   const LyapunovPair& lyapunov,
                                   Index num_players);
TunerReport theta_star_first_order(const Game& game, const CommGraph& graph,
                                   const LyapunovPair& lyapunov);

/// alpha* = m and, when alpha is given, beta*(alpha); with beta also given,
/// the open window for eps1. Throws std::invalid_argument unless
/// 0 < alpha < alpha*.
TunerReport alpha_beta_star(const GameConstants& constants,
                            std::optional<double> alpha = std::nullopt,
                            std::optional<double> beta = std::nullopt);

struct SecondOrderInputs {
  Vector k;              // K_i, one per player
  Vector theta_bar;      // diagonal of Tbar, length N^2 p
  Matrix estimation;     // M
  bool saturated = false;
  std::optional<double> theta;  // when set, theta1* is computed too
};

/// Throws AssumptionError("A1 not positive definite ...") when theta is given
/// and does not exceed theta*.
TunerReport theta_bounds_second_order(const GameConstants& constants,
                                      const LyapunovPair& lyapunov,
                                      Index num_players,
                                      const SecondOrderInputs& inputs);

/// Flat key=value listing, one entry per line.
std::string format_report(const TunerReport& report);

}  // namespace nes
