#include "nes/graph.hpp"

#include <limits>
#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

namespace nes {

CommGraph::CommGraph(Matrix adjacency) : adjacency_(std::move(adjacency)) {
  const Index n = adjacency_.rows();
  if (n == 0) throw std::invalid_argument("graph needs at least one node");
  if (adjacency_.cols() != n)
    throw DimensionError("adjacency columns", n, adjacency_.cols());
  for (Index i = 0; i < n; ++i) {
    if (adjacency_(i, i) != 0.0)
      throw std::invalid_argument("adjacency must have a zero diagonal");
    for (Index j = 0; j < n; ++j) {
      if (!(adjacency_(i, j) >= 0.0) || !std::isfinite(adjacency_(i, j)))
        throw std::invalid_argument("adjacency weights must be finite and nonnegative");
      if (adjacency_(i, j) != adjacency_(j, i))
        throw std::invalid_argument("adjacency must be symmetric (undirected graph)");
    }
  }
}

CommGraph CommGraph::complete(Index nodes) {
  Matrix a = Matrix::Ones(nodes, nodes);
  a.diagonal().setZero();
  return CommGraph(std::move(a));
}

CommGraph CommGraph::path(Index nodes) {
  Matrix a = Matrix::Zero(nodes, nodes);
  for (Index i = 0; i + 1 < nodes; ++i) a(i, i + 1) = a(i + 1, i) = 1.0;
  return CommGraph(std::move(a));
}

Matrix laplacian(const CommGraph& graph) {
  const Matrix& a = graph.adjacency();
  Matrix l = -a;
  l.diagonal() = a.rowwise().sum();
  return l;
}

bool check_connected(const CommGraph& graph) {
  const Index n = graph.num_nodes();
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::queue<Index> frontier;
  frontier.push(0);
  seen[0] = true;
  Index reached = 1;
  while (!frontier.empty()) {
    const Index u = frontier.front();
    frontier.pop();
    for (Index v = 0; v < n; ++v) {
      if (graph.adjacency()(u, v) > 0.0 && !seen[v]) {
        seen[v] = true;
        ++reached;
        frontier.push(v);
      }
    }
  }
  return reached == n;
}

double algebraic_connectivity(const CommGraph& graph) {
  if (graph.num_nodes() < 2) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(laplacian(graph),
                                            Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(1);
}

EstimationMatrix estimation_matrix(const CommGraph& graph, Index action_dim) {
  if (action_dim <= 0)
    throw std::invalid_argument("action dimension must be positive");
  if (!check_connected(graph))
    throw AssumptionError(
        "communication graph is not connected; the estimate dynamics need an "
        "undirected connected graph");

  const Index n = graph.num_nodes();
  const Index profile = n * action_dim;
  const Index size = n * profile;
  const Matrix l = laplacian(graph);

  Matrix m = Matrix::Zero(size, size);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < n; ++k)
      if (l(i, k) != 0.0)
        m.block(i * profile, k * profile, profile, profile).diagonal().setConstant(l(i, k));
  m.diagonal() += expand_pair_weights(graph.adjacency(), action_dim);

  return {std::move(m), n, action_dim};
}

Vector expand_pair_weights(const Matrix& weights, Index action_dim) {
  const Index n = weights.rows();
  if (weights.cols() != n) throw DimensionError("pair weights columns", n, weights.cols());
  Vector out(n * n * action_dim);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      out.segment((i * n + j) * action_dim, action_dim).setConstant(weights(i, j));
  return out;
}

LyapunovPair solve_lyapunov(const Matrix& m, const Vector& theta_bar,
                            const Matrix& q) {
  const Index n = m.rows();
  require_length("estimation matrix columns", m.cols(), n);
  require_length("theta_bar diagonal", theta_bar.size(), n);
  require_length("Q rows", q.rows(), n);
  require_length("Q columns", q.cols(), n);
  if ((theta_bar.array() <= 0.0).any())
    throw std::invalid_argument("theta_bar entries must be strictly positive");
  if (!q.isApprox(q.transpose(), 1e-12))
    throw std::invalid_argument("Q must be symmetric");

  // P A + A' P = Q with A = Tbar M; column-major vec gives
  // (A' (x) I + I (x) A') vec(P) = vec(Q).
  const Matrix a = theta_bar.asDiagonal() * m;
  const Matrix at = a.transpose();
  const Index nn = n * n;
  Matrix system = Matrix::Zero(nn, nn);
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < n; ++c) {
      const double arc = at(r, c);
      if (arc != 0.0) system.block(r * n, c * n, n, n).diagonal().array() += arc;
    }
    system.block(r * n, r * n, n, n) += at;
  }

  Eigen::PartialPivLU<Matrix> lu(system);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-12)) {
    std::ostringstream os;
    os << "Lyapunov system is ill-conditioned (condition estimate "
       << (rcond > 0 ? 1.0 / rcond : std::numeric_limits<double>::infinity())
       << " > 1e12); use fewer players or rescale theta_bar";
    throw NumericalError(os.str());
  }
  const Eigen::Map<const Vector> rhs(q.data(), nn);
  const Vector sol = lu.solve(rhs);
  Matrix p = Eigen::Map<const Matrix>(sol.data(), n, n);
  p = (0.5 * (p + p.transpose())).eval();

  LyapunovPair pair;
  pair.residual = (p * a + a.transpose() * p - q).norm();
  pair.p = std::move(p);
  pair.q = q;
  return pair;
}

}  // namespace nes
