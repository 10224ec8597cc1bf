#pragma once

#include "nes/types.hpp"

namespace nes {

/// Undirected weighted communication graph.
class CommGraph {
 public:
  /// Throws std::invalid_argument unless the adjacency is square, symmetric,
  /// nonnegative and has a zero diagonal. Connectivity is checked separately.
  explicit CommGraph(Matrix adjacency);

  static CommGraph complete(Index nodes);
  static CommGraph path(Index nodes);

  Index num_nodes() const { return adjacency_.rows(); }
  const Matrix& adjacency() const { return adjacency_; }

 private:
  Matrix adjacency_;
};

/// L = D - A.
Matrix laplacian(const CommGraph& graph);

/// Breadth-first reachability over positive-weight edges.
bool check_connected(const CommGraph& graph);

/// Second-smallest Laplacian eigenvalue (0 for a single node).
double algebraic_connectivity(const CommGraph& graph);

/// M = L (x) I_{Np} + diag{a_11, ..., a_1N, a_21, ..., a_NN} (x) I_p, acting on
/// the stacked estimates y = [y_1; ...; y_N] with y_i in R^{Np}.
struct EstimationMatrix {
  Matrix matrix;
  Index num_players = 0;
  Index action_dim = 0;

  Index size() const { return matrix.rows(); }
};

/// Throws AssumptionError if the graph is disconnected.
EstimationMatrix estimation_matrix(const CommGraph& graph, Index action_dim);

/// Expands per-pair weights w_ij (N x N) into the length-N^2 p diagonal that
/// follows the estimate stacking order.
Vector expand_pair_weights(const Matrix& weights, Index action_dim);

/// Solution of P Tbar M + M Tbar P = Q.
struct LyapunovPair {
  Matrix p;
  Matrix q;
  double residual = 0.0;  // Frobenius norm of P Tbar M + M Tbar P - Q
};

/// Dense solve through the vectorised (Kronecker) system; intended for
/// desk-scale sizes (N^2 p up to a few dozen). theta_bar is the diagonal of
/// Tbar. Throws NumericalError when the system's condition estimate exceeds
/// 1e12.
LyapunovPair solve_lyapunov(const Matrix& m, const Vector& theta_bar,
                            const Matrix& q);

inline LyapunovPair solve_lyapunov(const EstimationMatrix& m,
                                   const Vector& theta_bar, const Matrix& q) {
  return solve_lyapunov(m.matrix, theta_bar, q);
}

}  // namespace nes
