#include "nes/game.hpp"

#include "hash.hpp"

#include <limits>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace nes {
namespace {

constexpr double kGradientStep = 1e-6;
constexpr double kHessianStep = 1e-4;

double fd_scale(const Vector& x) {
  return std::max(1.0, x.size() > 0 ? x.lpNorm<Eigen::Infinity>() : 0.0);
}

void check_player(const Game& game, Index player) {
  if (player < 0 || player >= game.num_players()) {
    std::ostringstream os;
    os << "player index " << player << " out of range [0, "
       << game.num_players() << ")";
    throw std::out_of_range(os.str());
  }
}

Vector numeric_partial_gradient(const Game::CostFn& cost_fn, Index player,
                                Index action_dim, const Vector& x) {
  const double h = kGradientStep * fd_scale(x);
  Vector grad(action_dim);
  Vector probe = x;
  for (Index d = 0; d < action_dim; ++d) {
    const Index k = player * action_dim + d;
    probe(k) = x(k) + h;
    const double up = cost_fn(probe);
    probe(k) = x(k) - h;
    const double down = cost_fn(probe);
    probe(k) = x(k);
    grad(d) = (up - down) / (2.0 * h);
  }
  return grad;
}

std::uint64_t quadratic_fingerprint(const QuadraticParams& params,
                                    Index action_dim) {
  detail::Fnv1a h;
  h.text("quadratic");
  h.integer(static_cast<std::int64_t>(params.r.size()));
  h.integer(action_dim);
  for (const auto& r : params.r)
    for (Index k = 0; k < r.size(); ++k) h.real(r.data()[k]);
  for (const auto& p : params.linear)
    for (Index k = 0; k < p.size(); ++k) h.real(p(k));
  for (double q : params.offset) h.real(q);
  for (Index k = 0; k < params.coupling.size(); ++k)
    h.real(params.coupling.data()[k]);
  return h.value();
}

}  // namespace

// ---------------------------------------------------------------------------
// QuadraticGame

QuadraticGame::QuadraticGame(QuadraticParams params)
    : params_(std::move(params)) {
  num_players_ = static_cast<Index>(params_.r.size());
  if (num_players_ == 0)
    throw std::invalid_argument("quadratic game needs at least one player");
  action_dim_ = params_.r.front().rows();
  if (action_dim_ == 0)
    throw std::invalid_argument("action dimension must be positive");

  require_length("quadratic game: linear terms",
                 static_cast<Index>(params_.linear.size()), num_players_);
  require_length("quadratic game: offsets",
                 static_cast<Index>(params_.offset.size()), num_players_);
  for (Index i = 0; i < num_players_; ++i) {
    const Matrix& r = params_.r[i];
    if (r.rows() != action_dim_ || r.cols() != action_dim_)
      throw DimensionError("quadratic game: r block rows/cols", action_dim_,
                           r.rows() != action_dim_ ? r.rows() : r.cols());
    require_length("quadratic game: linear term", params_.linear[i].size(),
                   action_dim_);
  }
  const Matrix& m = params_.coupling;
  if (m.rows() != num_players_ || m.cols() != num_players_)
    throw DimensionError("quadratic game: coupling rows/cols", num_players_,
                         m.rows() != num_players_ ? m.rows() : m.cols());
  for (Index i = 0; i < num_players_; ++i) {
    if (m(i, i) != 0.0)
      throw std::invalid_argument("coupling weights must have zero diagonal");
    for (Index j = 0; j < num_players_; ++j) {
      if (!(m(i, j) >= 0.0))
        throw std::invalid_argument("coupling weights must be nonnegative");
      if (m(i, j) != m(j, i))
        throw std::invalid_argument(
            "coupling weights must be symmetric (m_ij == m_ji)");
    }
  }

  const Index p = action_dim_;
  const Index n = profile_size();
  jacobian_ = Matrix::Zero(n, n);
  gradient_offset_.resize(n);
  for (Index i = 0; i < num_players_; ++i) {
    const Matrix& r = params_.r[i];
    const double degree = m.row(i).sum();
    jacobian_.block(i * p, i * p, p, p) =
        r + r.transpose() + 2.0 * degree * Matrix::Identity(p, p);
    for (Index j = 0; j < num_players_; ++j) {
      if (j != i && m(i, j) != 0.0)
        jacobian_.block(i * p, j * p, p, p) =
            -2.0 * m(i, j) * Matrix::Identity(p, p);
    }
    gradient_offset_.segment(i * p, p) = params_.linear[i];
  }
}

QuadraticGame QuadraticGame::sensor_network() {
  QuadraticParams params;
  params.r.assign(3, Matrix::Identity(2, 2));
  params.linear = {Vector{{2.0, -2.0}}, Vector{{-2.0, -2.0}},
                   Vector{{-4.0, 2.0}}};
  params.offset = {3.0, 3.0, 6.0};
  params.coupling = Matrix{{0.0, 1.0, 0.0}, {1.0, 0.0, 1.0}, {0.0, 1.0, 0.0}};
  return QuadraticGame(std::move(params));
}

double QuadraticGame::cost(Index player, const Vector& profile) const {
  require_length("profile", profile.size(), profile_size());
  const Index p = action_dim_;
  const auto xi = profile.segment(player * p, p);
  double value = xi.dot(params_.r[player] * xi) +
                 xi.dot(params_.linear[player]) + params_.offset[player];
  for (Index j = 0; j < num_players_; ++j) {
    const double w = params_.coupling(player, j);
    if (w != 0.0) value += w * (xi - profile.segment(j * p, p)).squaredNorm();
  }
  return value;
}

Vector QuadraticGame::pseudo_gradient(const Vector& profile) const {
  require_length("profile", profile.size(), profile_size());
  return jacobian_ * profile + gradient_offset_;
}

Vector QuadraticGame::partial_gradient(Index player,
                                       const Vector& profile) const {
  require_length("estimate", profile.size(), profile_size());
  const Index p = action_dim_;
  return jacobian_.middleRows(player * p, p) * profile +
         gradient_offset_.segment(player * p, p);
}

// ---------------------------------------------------------------------------
// Game

Game::Game(QuadraticGame quadratic)
    : num_players_(quadratic.num_players()),
      action_dim_(quadratic.action_dim()),
      quadratic_(std::make_shared<const QuadraticGame>(std::move(quadratic))),
      label_("quadratic") {
  fingerprint_ = quadratic_fingerprint(quadratic_->params(), action_dim_);
}

Game Game::custom(Index num_players, Index action_dim,
                  std::vector<CostFn> costs,
                  std::vector<PartialGradientFn> gradients,
                  JacobianFn jacobian) {
  if (num_players <= 0 || action_dim <= 0)
    throw std::invalid_argument("player count and action dimension must be positive");
  require_length("custom game: cost evaluators",
                 static_cast<Index>(costs.size()), num_players);
  if (!gradients.empty())
    require_length("custom game: gradient evaluators",
                   static_cast<Index>(gradients.size()), num_players);
  Game game;
  game.num_players_ = num_players;
  game.action_dim_ = action_dim;
  game.costs_ = std::move(costs);
  game.gradients_ = std::move(gradients);
  game.jacobian_ = std::move(jacobian);
  game.set_label("custom");
  return game;
}

Game& Game::set_label(std::string label) {
  label_ = std::move(label);
  if (!quadratic_) {
    detail::Fnv1a h;
    h.text("custom:");
    h.text(label_);
    h.integer(num_players_);
    h.integer(action_dim_);
    fingerprint_ = h.value();
  }
  return *this;
}

double cost(const Game& game, Index player, const Vector& profile) {
  check_player(game, player);
  require_length("profile", profile.size(), game.profile_size());
  if (const auto* q = game.quadratic()) return q->cost(player, profile);
  return game.costs()[player](profile);
}

Vector partial_gradient_at_estimate(const Game& game, Index player,
                                    const Vector& estimate) {
  check_player(game, player);
  require_length("estimate", estimate.size(), game.profile_size());
  if (const auto* q = game.quadratic())
    return q->partial_gradient(player, estimate);
  if (!game.gradients().empty()) {
    Vector g = game.gradients()[player](estimate);
    require_length("analytic partial gradient", g.size(), game.action_dim());
    return g;
  }
  return numeric_partial_gradient(game.costs()[player], player,
                                  game.action_dim(), estimate);
}

Vector pseudo_gradient(const Game& game, const Vector& profile) {
  require_length("profile", profile.size(), game.profile_size());
  if (const auto* q = game.quadratic()) return q->pseudo_gradient(profile);
  const Index p = game.action_dim();
  Vector g(game.profile_size());
  for (Index i = 0; i < game.num_players(); ++i)
    g.segment(i * p, p) = partial_gradient_at_estimate(game, i, profile);
  return g;
}

Matrix game_jacobian(const Game& game, const Vector& profile) {
  require_length("profile", profile.size(), game.profile_size());
  if (const auto* q = game.quadratic()) return q->jacobian();
  if (game.jacobian()) {
    Matrix h = game.jacobian()(profile);
    require_length("analytic jacobian rows", h.rows(), game.profile_size());
    require_length("analytic jacobian cols", h.cols(), game.profile_size());
    return h;
  }

  const Index n = game.profile_size();
  const Index p = game.action_dim();
  Matrix h(n, n);
  if (game.has_analytic_gradients()) {
    const double step = kGradientStep * fd_scale(profile);
    Vector probe = profile;
    for (Index k = 0; k < n; ++k) {
      probe(k) = profile(k) + step;
      const Vector up = pseudo_gradient(game, probe);
      probe(k) = profile(k) - step;
      const Vector down = pseudo_gradient(game, probe);
      probe(k) = profile(k);
      h.col(k) = (up - down) / (2.0 * step);
    }
    return h;
  }

  // Mixed second differences of the costs directly.
  const double step = kHessianStep * fd_scale(profile);
  Vector probe = profile;
  for (Index i = 0; i < game.num_players(); ++i) {
    const auto& f = game.costs()[i];
    for (Index d = 0; d < p; ++d) {
      const Index a = i * p + d;
      for (Index k = 0; k < n; ++k) {
        auto eval = [&](double sa, double sk) {
          probe = profile;
          probe(a) += sa * step;
          probe(k) += sk * step;
          return f(probe);
        };
        h(a, k) = (eval(1, 1) - eval(1, -1) - eval(-1, 1) + eval(-1, -1)) /
                  (4.0 * step * step);
      }
    }
  }
  return h;
}

MonotonicityEstimate monotonicity_constant(const Game& game,
                                           const MonotonicityProbe& probe) {
  if (const auto* q = game.quadratic()) {
    const Matrix sym = 0.5 * (q->jacobian() + q->jacobian().transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
    const double m = eig.eigenvalues().minCoeff();
    return {m, m > 0.0};
  }

  std::mt19937_64 rng(probe.seed);
  std::uniform_real_distribution<double> unit(-probe.radius, probe.radius);
  const Index n = game.profile_size();
  double worst = std::numeric_limits<double>::infinity();
  Vector x(n), z(n);
  for (int s = 0; s < probe.samples; ++s) {
    for (Index k = 0; k < n; ++k) x(k) = unit(rng);
    for (Index k = 0; k < n; ++k) z(k) = unit(rng);
    const Vector diff = x - z;
    const double denom = diff.squaredNorm();
    if (denom == 0.0) continue;
    const double ratio =
        diff.dot(pseudo_gradient(game, x) - pseudo_gradient(game, z)) / denom;
    worst = std::min(worst, ratio);
  }
  if (!std::isfinite(worst)) worst = 0.0;
  return {worst, false};
}

Vector exact_ne_quadratic(const QuadraticGame& game) {
  const Game wrapped(game);
  const auto mono = monotonicity_constant(wrapped);
  if (!mono.certified)
    throw AssumptionError(
        "game is not strongly monotone; no unique NE certificate");
  Eigen::PartialPivLU<Matrix> lu(game.jacobian());
  return lu.solve(-game.gradient_offset());
}

double max_gradient_disagreement(const Game& game, int samples,
                                 std::uint64_t seed, double radius) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-radius, radius);
  const Index n = game.profile_size();
  const Index p = game.action_dim();
  double worst = 0.0;
  Vector x(n);
  for (int s = 0; s < samples; ++s) {
    for (Index k = 0; k < n; ++k) x(k) = unit(rng);
    for (Index i = 0; i < game.num_players(); ++i) {
      const Vector analytic = partial_gradient_at_estimate(game, i, x);
      const Game::CostFn f = [&game, i](const Vector& v) {
        return cost(game, i, v);
      };
      const Vector numeric = numeric_partial_gradient(f, i, p, x);
      for (Index d = 0; d < p; ++d) {
        const double scale =
            std::max({1.0, std::abs(analytic(d)), std::abs(numeric(d))});
        worst = std::max(worst, std::abs(analytic(d) - numeric(d)) / scale);
      }
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Registry

namespace {

RegisteredGame bilinear_zero_sum() {
  std::vector<Game::CostFn> costs = {
      [](const Vector& x) { return x(0) * x(1); },
      [](const Vector& x) { return -x(0) * x(1); }};
  std::vector<Game::PartialGradientFn> grads = {
      [](const Vector& x) { return Vector::Constant(1, x(1)); },
      [](const Vector& x) { return Vector::Constant(1, -x(0)); }};
  Game g = Game::custom(2, 1, std::move(costs), std::move(grads));
  g.set_label("bilinear_zero_sum");
  return {std::move(g), Vector::Zero(2)};
}

// f_i = x_i^2 - 0.5 x_i sin(x_j): strongly monotone with m >= 1.5, NE at 0.
std::vector<Game::CostFn> sine_costs() {
  return {[](const Vector& x) { return x(0) * x(0) - 0.5 * x(0) * std::sin(x(1)); },
          [](const Vector& x) { return x(1) * x(1) - 0.5 * x(1) * std::sin(x(0)); }};
}

RegisteredGame sine_coupled() {
  std::vector<Game::PartialGradientFn> grads = {
      [](const Vector& x) {
        return Vector::Constant(1, 2.0 * x(0) - 0.5 * std::sin(x(1)));
      },
      [](const Vector& x) {
        return Vector::Constant(1, 2.0 * x(1) - 0.5 * std::sin(x(0)));
      }};
  Game g = Game::custom(2, 1, sine_costs(), std::move(grads));
  g.set_label("sine_coupled");
  return {std::move(g), Vector::Zero(2)};
}

RegisteredGame sine_coupled_numeric() {
  Game g = Game::custom(2, 1, sine_costs());
  g.set_label("sine_coupled_numeric");
  return {std::move(g), Vector::Zero(2)};
}

}  // namespace

std::optional<RegisteredGame> find_registered_game(std::string_view name) {
  if (name == "bilinear_zero_sum") return bilinear_zero_sum();
  if (name == "sine_coupled") return sine_coupled();
  if (name == "sine_coupled_numeric") return sine_coupled_numeric();
  return std::nullopt;
}

std::vector<std::string> registered_game_names() {
  return {"bilinear_zero_sum", "sine_coupled", "sine_coupled_numeric"};
}

}  // namespace nes
