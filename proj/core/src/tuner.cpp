#include "nes/tuner.hpp"

#include "nes/format.hpp"

#include <cmath>
#include <sstream>

namespace nes {
namespace {

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

double lambda_min_sym(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

double lambda_max_sym(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(a.rows() - 1);
}

void require_monotone(const GameConstants& c) {
  if (!c.certified)
    throw AssumptionError(
        "monotonicity constant is not certified; supply constants for "
        "non-quadratic games");
  if (!(c.m > 0.0)) {
    std::ostringstream os;
    os << "game is not strongly monotone (m = " << c.m
       << "); the gain bounds need m > 0";
    throw AssumptionError(os.str());
  }
  if (c.lbar.size() == 0 || !(c.lbar.array() > 0.0).all())
    throw AssumptionError("Lipschitz constants lbar must be strictly positive");
}

TunerReport base_report(Strategy s, const GameConstants& c) {
  TunerReport r;
  r.strategy = s;
  r.m = c.m;
  r.lbar = c.lbar;
  r.constants_source = c.source;
  return r;
}

}  // namespace

Vector lipschitz_constants(const Game& game) {
  const QuadraticGame* q = game.quadratic();
  if (!q)
    throw AssumptionError(
        "Lipschitz constants are exact only for quadratic games; supply "
        "certified Lipschitz constants manually");
  const Index p = q->action_dim();
  Vector out(q->num_players());
  for (Index i = 0; i < q->num_players(); ++i)
    out(i) = spectral_norm(q->jacobian().middleRows(i * p, p));
  return out;
}

GameConstants game_constants(const Game& game) {
  GameConstants c;
  c.lbar = lipschitz_constants(game);
  const auto mono = monotonicity_constant(game);
  c.m = mono.m;
  c.certified = mono.certified;
  c.jacobian_norm = spectral_norm(game.quadratic()->jacobian());
  c.source = "quadratic";
  return c;
}

double theta_star_formula(double l1, double l2, double l3, double eps1,
                          double eps2, double lambda_min_q) {
  return (2.0 * l2 + l1 * eps1 + l3 * eps2) / (2.0 * lambda_min_q);
}

double theta_star_b1(double m, double l1, double l2, double lambda_min_q) {
  return l1 * l1 / (4.0 * m * lambda_min_q) + l2 / lambda_min_q;
}

double theta_star_b3(double m, double l1, double l2, double lambda_min_q) {
  return (l1 * l1 + 4.0 * m * l2) / (4.0 * m * lambda_min_q);
}

double a1_min_eigenvalue(double m, double l1, double l2, double lambda_min_q,
                         double theta) {
  const double a = m;
  const double d = lambda_min_q * theta - l2;
  const double b = -0.5 * l1;
  return 0.5 * (a + d) - std::sqrt(0.25 * (a - d) * (a - d) + b * b);
}

double theta1_star_formula(double lambda_min_a1, double theta, double l3) {
  return std::cbrt(4.0 * lambda_min_a1 / (theta * theta * l3 * l3));
}

double beta_star_formula(double alpha, double m) {
  return 2.0 * alpha + 2.0 * std::sqrt(alpha * m);
}

TunerReport theta_star_first_order(const GameConstants& constants,
                                   const LyapunovPair& lyapunov,
                                   Index num_players) {
  require_monotone(constants);
  require_length("lbar", constants.lbar.size(), num_players);
  TunerReport r = base_report(Strategy::FirstOrderDist, constants);
  r.formula = "first_order";
  const double n = static_cast<double>(num_players);
  const double max_l = constants.lbar.maxCoeff();
  const double p_norm = lambda_max_sym(lyapunov.p);
  const double lam_q = lambda_min_sym(lyapunov.q);
  if (!(lam_q > 0.0)) throw AssumptionError("Q must be positive definite");
  r.jacobian_norm = constants.jacobian_norm;
  r.p_norm = p_norm;
  r.lambda_min_q = lam_q;
  r.l1 = constants.jacobian_norm * max_l;
  r.l2 = 2.0 * p_norm * std::sqrt(n) * max_l;
  r.l3 = 2.0 * p_norm * std::sqrt(n);
  r.eps1 = 2.0 * *r.l1 / constants.m;
  r.eps2 = 2.0 * *r.l3 / constants.m;
  r.theta_star = theta_star_formula(*r.l1, *r.l2, *r.l3, *r.eps1, *r.eps2, lam_q);
  return r;
}

TunerReport theta_star_first_order(const Game& game, const CommGraph& graph,
                                   const LyapunovPair& lyapunov) {
  require_length("graph nodes", graph.num_nodes(), game.num_players());
  return theta_star_first_order(game_constants(game), lyapunov,
                                game.num_players());
}

TunerReport alpha_beta_star(const GameConstants& constants,
                            std::optional<double> alpha,
                            std::optional<double> beta) {
  require_monotone(constants);
  TunerReport r = base_report(Strategy::SecondOrderCentral, constants);
  r.formula = "centralised";
  r.alpha_star = constants.m;
  if (!alpha) return r;
  if (!(*alpha > 0.0) || !(*alpha < constants.m)) {
    std::ostringstream os;
    os << "alpha must lie in (0, alpha*) = (0, " << constants.m << "), got "
       << *alpha;
    throw std::invalid_argument(os.str());
  }
  r.alpha = alpha;
  r.beta_star = beta_star_formula(*alpha, constants.m);
  if (beta) {
    r.beta = beta;
    const double a = *alpha;
    const double b = *beta;
    r.eps1_low = (2.0 * a + b) / (2.0 * (2.0 * b + constants.m));
    r.eps1_high = 2.0 * a / (2.0 * a + b);
    if (!(*r.eps1_low < *r.eps1_high))
      r.caveats.push_back("eps1 window is empty for this beta");
    if (!(b < *r.beta_star)) r.caveats.push_back("beta is not below beta*");
  }
  return r;
}

TunerReport theta_bounds_second_order(const GameConstants& constants,
                                      const LyapunovPair& lyapunov,
                                      Index num_players,
                                      const SecondOrderInputs& in) {
  require_monotone(constants);
  require_length("lbar", constants.lbar.size(), num_players);
  require_length("gain k", in.k.size(), num_players);
  const Index size = in.estimation.rows();
  require_length("theta_bar diagonal", in.theta_bar.size(), size);
  require_length("Lyapunov matrix P", lyapunov.p.rows(), size);

  TunerReport r = base_report(
      in.saturated ? Strategy::SecondOrderDistSat : Strategy::SecondOrderDist,
      constants);
  r.formula = in.saturated ? "second_order_saturated" : "second_order";
  const double n = static_cast<double>(num_players);
  const double max_l = constants.lbar.maxCoeff();
  const double max_kl = in.k.cwiseProduct(constants.lbar).maxCoeff();
  const double p_norm = lambda_max_sym(lyapunov.p);
  const double lam_q = lambda_min_sym(lyapunov.q);
  if (!(lam_q > 0.0)) throw AssumptionError("Q must be positive definite");
  // The block-diagonal Jacobian of the estimates has the block rows of H as
  // its blocks, so its norm is max lbar_i for quadratic games.
  const double tm_norm =
      spectral_norm(in.theta_bar.asDiagonal() * in.estimation);

  r.p_norm = p_norm;
  r.lambda_min_q = lam_q;
  r.l1 = max_l + 2.0 * p_norm * n * max_kl;
  r.l2 = 2.0 * p_norm * std::sqrt(n) * max_kl;
  r.l3 = in.k.maxCoeff() * max_l * tm_norm;
  r.theta_star = in.saturated ? theta_star_b3(constants.m, *r.l1, *r.l2, lam_q)
                              : theta_star_b1(constants.m, *r.l1, *r.l2, lam_q);
  if (in.saturated)
    r.caveats.push_back(
        "theta1_star is a heuristic for the saturated strategy; the "
        "semi-global bound depends on the initial errors");

  if (in.theta) {
    r.theta = in.theta;
    const double lam_a1 =
        a1_min_eigenvalue(constants.m, *r.l1, *r.l2, lam_q, *in.theta);
    if (!(*in.theta > *r.theta_star) || !(lam_a1 > 0.0)) {
      std::ostringstream os;
      os << "A1 not positive definite: theta = " << *in.theta
         << " must exceed theta* = " << *r.theta_star;
      throw AssumptionError(os.str());
    }
    r.lambda_min_a1 = lam_a1;
    r.theta1_star = theta1_star_formula(lam_a1, *in.theta, *r.l3);
  }
  return r;
}

std::string format_report(const TunerReport& r) {
  std::ostringstream os;
  auto put = [&](const char* key, const std::optional<double>& v) {
    if (v) os << key << '=' << format_real(*v) << '\n';
  };
  os << "strategy=" << to_string(r.strategy) << '\n';
  os << "formula=" << r.formula << '\n';
  if (!r.constants_source.empty())
    os << "constants_source=" << r.constants_source << '\n';
  os << "m=" << format_real(r.m) << '\n';
  os << "lbar=" << format_list(r.lbar) << '\n';
  put("jacobian_norm", r.jacobian_norm);
  put("p_norm", r.p_norm);
  put("lambda_min_q", r.lambda_min_q);
  put("l1", r.l1);
  put("l2", r.l2);
  put("l3", r.l3);
  put("eps1", r.eps1);
  put("eps2", r.eps2);
  put("theta_star", r.theta_star);
  put("theta", r.theta);
  put("lambda_min_a1", r.lambda_min_a1);
  put("theta1_star", r.theta1_star);
  put("alpha_star", r.alpha_star);
  put("alpha", r.alpha);
  put("beta_star", r.beta_star);
  put("beta", r.beta);
  put("eps1_low", r.eps1_low);
  put("eps1_high", r.eps1_high);
  if (!r.caveats.empty()) {
    os << "caveats=";
    for (std::size_t k = 0; k < r.caveats.size(); ++k)
      os << (k ? "; " : "") << r.caveats[k];
    os << '\n';
  }
  return os.str();
}

}  // namespace nes
