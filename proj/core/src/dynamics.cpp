#include "nes/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace nes {

// ---------------------------------------------------------------------------
// Saturation

SaturationSpec::SaturationSpec(Vector lower, Vector upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() == 0)
    throw std::invalid_argument("saturation spec needs at least one channel");
  require_length("saturation upper bounds", upper_.size(), lower_.size());
  for (Index k = 0; k < lower_.size(); ++k) {
    if (!(lower_(k) < 0.0 && upper_(k) > 0.0))
      throw std::invalid_argument(
          "saturation bounds must satisfy lower < 0 < upper on every channel");
  }
}

SaturationSpec SaturationSpec::symmetric(double bound, Index channels) {
  if (!(bound > 0.0))
    throw std::invalid_argument("saturation bound must be positive");
  return {Vector::Constant(channels, -bound), Vector::Constant(channels, bound)};
}

bool SaturationSpec::is_symmetric() const {
  return (lower_ + upper_).cwiseAbs().maxCoeff() == 0.0;
}

double sat(double v, double bound) { return std::clamp(v, -bound, bound); }

Vector sat(const Vector& v, const SaturationSpec& spec) {
  if (!spec.broadcasts())
    require_length("saturation input", v.size(), spec.channels());
  Vector out(v.size());
  for (Index k = 0; k < v.size(); ++k)
    out(k) = std::clamp(v(k), spec.lower(k), spec.upper(k));
  return out;
}

double sat_integral(double g, double lower, double upper) {
  if (g >= 0.0) {
    return g <= upper ? 0.5 * g * g : upper * g - 0.5 * upper * upper;
  }
  return g >= lower ? 0.5 * g * g : lower * g - 0.5 * lower * lower;
}

double sat_integral(double g, double bound) {
  return sat_integral(g, -bound, bound);
}

double sat_integral_sum(const Vector& g, const SaturationSpec& spec) {
  if (!spec.broadcasts())
    require_length("saturation input", g.size(), spec.channels());
  double total = 0.0;
  for (Index k = 0; k < g.size(); ++k)
    total += sat_integral(g(k), spec.lower(k), spec.upper(k));
  return total;
}

// ---------------------------------------------------------------------------
// Strategy tags and layouts

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::SatGradPlay: return "sat_gradient_play";
    case Strategy::FirstOrderDist: return "first_order_dist";
    case Strategy::SecondOrderCentral: return "second_order_central";
    case Strategy::SecondOrderDist: return "second_order_dist";
    case Strategy::SecondOrderDistSat: return "second_order_dist_sat";
  }
  return "unknown";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
  for (Strategy s : {Strategy::SatGradPlay, Strategy::FirstOrderDist,
                     Strategy::SecondOrderCentral, Strategy::SecondOrderDist,
                     Strategy::SecondOrderDistSat})
    if (to_string(s) == name) return s;
  return std::nullopt;
}

StateLayout::StateLayout(Strategy strategy, Index num_players, Index action_dim)
    : strategy_(strategy), num_players_(num_players), action_dim_(action_dim) {
  if (num_players <= 0 || action_dim <= 0)
    throw std::invalid_argument("layout needs positive player count and action dimension");
  const Index np = profile_size();
  switch (strategy) {
    case Strategy::SatGradPlay:
      y_offset_ = np;
      size_ = np;
      break;
    case Strategy::FirstOrderDist:
      y_offset_ = np;
      size_ = np + estimate_size();
      break;
    case Strategy::SecondOrderCentral:
      y_offset_ = 2 * np;
      size_ = 2 * np;
      break;
    case Strategy::SecondOrderDist:
    case Strategy::SecondOrderDistSat:
      y_offset_ = 3 * np;
      size_ = 3 * np + estimate_size();
      break;
  }
}

std::string_view StateLayout::block_name(Index k) const {
  const Index np = profile_size();
  if (k < np) return "x";
  if (has_estimates() && k >= y_offset_) return "y";
  if (has_velocity() && k < 2 * np) return "nu";
  return "z";
}

StrategyState::StrategyState(StateLayout layout)
    : layout_(layout), values_(Vector::Zero(layout.size())) {}

StrategyState::StrategyState(StateLayout layout, Vector values)
    : layout_(layout), values_(std::move(values)) {
  require_length("strategy state", values_.size(), layout_.size());
}

namespace {

void require_block(bool present, std::string_view block, const StateLayout& l) {
  if (!present) {
    std::ostringstream os;
    os << "layout " << to_string(l.strategy()) << " has no " << block << " block";
    throw std::logic_error(os.str());
  }
}

}  // namespace

StrategyState::ConstBlock StrategyState::x() const {
  return values_.segment(layout_.x_offset(), layout_.profile_size());
}
StrategyState::Block StrategyState::x() {
  return values_.segment(layout_.x_offset(), layout_.profile_size());
}
StrategyState::ConstBlock StrategyState::nu() const {
  require_block(layout_.has_velocity(), "nu", layout_);
  return values_.segment(layout_.nu_offset(), layout_.profile_size());
}
StrategyState::Block StrategyState::nu() {
  require_block(layout_.has_velocity(), "nu", layout_);
  return values_.segment(layout_.nu_offset(), layout_.profile_size());
}
StrategyState::ConstBlock StrategyState::z() const {
  require_block(layout_.has_auxiliary(), "z", layout_);
  return values_.segment(layout_.z_offset(), layout_.profile_size());
}
StrategyState::Block StrategyState::z() {
  require_block(layout_.has_auxiliary(), "z", layout_);
  return values_.segment(layout_.z_offset(), layout_.profile_size());
}
StrategyState::ConstBlock StrategyState::y() const {
  require_block(layout_.has_estimates(), "y", layout_);
  return values_.segment(layout_.y_offset(), layout_.estimate_size());
}
StrategyState::Block StrategyState::y() {
  require_block(layout_.has_estimates(), "y", layout_);
  return values_.segment(layout_.y_offset(), layout_.estimate_size());
}

// ---------------------------------------------------------------------------
// Gains

namespace {

void require_positive(const std::optional<double>& v, std::string_view name,
                      Strategy s) {
  std::ostringstream os;
  if (!v) {
    os << "strategy " << to_string(s) << " requires gain '" << name << "'";
    throw std::invalid_argument(os.str());
  }
  if (!(*v > 0.0) || !std::isfinite(*v)) {
    os << "gain '" << name << "' must be strictly positive (got " << *v << ")";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

void validate_gains(Strategy strategy, const GainSet& gains, Index num_players) {
  if (is_distributed(strategy)) {
    require_positive(gains.theta, "theta", strategy);
    if (gains.theta_bar.size() != 0) {
      if (gains.theta_bar.rows() != num_players ||
          gains.theta_bar.cols() != num_players)
        throw DimensionError("theta_bar rows/cols", num_players,
                             gains.theta_bar.rows());
      if (!(gains.theta_bar.array() > 0.0).all())
        throw std::invalid_argument(
            "theta_bar entries must be strictly positive (theta_ij > 0)");
    }
  }
  if (strategy == Strategy::SecondOrderDist ||
      strategy == Strategy::SecondOrderDistSat) {
    require_positive(gains.theta1, "theta1", strategy);
    if (gains.k.size() == 0)
      throw std::invalid_argument("strategy " + std::string(to_string(strategy)) +
                                  " requires gain 'k'");
    require_length("gain k", gains.k.size(), num_players);
    if (!(gains.k.array() > 0.0).all())
      throw std::invalid_argument("gain k entries must be strictly positive");
  }
  if (strategy == Strategy::SecondOrderCentral) {
    require_positive(gains.alpha, "alpha", strategy);
    require_positive(gains.beta, "beta", strategy);
  }
}

Matrix pair_weights(const GainSet& gains, Index num_players) {
  if (gains.theta_bar.size() == 0) return Matrix::Ones(num_players, num_players);
  return gains.theta_bar;
}

Vector consensus_gains(Strategy strategy, const GainSet& gains,
                       Index num_players, Index action_dim) {
  double scale = gains.theta.value_or(0.0);
  if (is_second_order(strategy)) scale *= gains.theta1.value_or(0.0);
  return scale * expand_pair_weights(pair_weights(gains, num_players), action_dim);
}

Vector tracking_gains(const GainSet& gains, Index num_players, Index action_dim) {
  require_length("gain k", gains.k.size(), num_players);
  Vector out(num_players * action_dim);
  const double theta1 = gains.theta1.value_or(0.0);
  for (Index i = 0; i < num_players; ++i)
    out.segment(i * action_dim, action_dim).setConstant(theta1 * gains.k(i));
  return out;
}

// ---------------------------------------------------------------------------
// Vector fields

Vector estimate_gradients(const Game& game, const Vector& y) {
  const Index np = game.profile_size();
  const Index p = game.action_dim();
  require_length("estimates", y.size(), game.num_players() * np);
  Vector out(np);
  for (Index i = 0; i < game.num_players(); ++i)
    out.segment(i * p, p) =
        partial_gradient_at_estimate(game, i, y.segment(i * np, np));
  return out;
}

namespace {

void require_layout(const StrategyState& state, Strategy expected,
                    const Game& game) {
  if (state.layout().strategy() != expected) {
    std::ostringstream os;
    os << "layout mismatch: state is " << to_string(state.layout().strategy())
       << ", field expects " << to_string(expected);
    throw std::invalid_argument(os.str());
  }
  if (state.layout().num_players() != game.num_players() ||
      state.layout().action_dim() != game.action_dim())
    throw DimensionError("state profile size", game.profile_size(),
                         state.layout().profile_size());
}

void require_estimation(const EstimationMatrix& m, const Game& game) {
  if (m.num_players != game.num_players() || m.action_dim != game.action_dim())
    throw DimensionError("estimation matrix size",
                         game.num_players() * game.profile_size(), m.size());
}

Vector replicate(const Eigen::Ref<const Vector>& v, Index copies) {
  return v.replicate(copies, 1);
}

FieldValue sat_gradient_play(const Game& game, const StrategyState& state,
                             const SaturationSpec& spec) {
  FieldValue out;
  out.control = sat(-pseudo_gradient(game, state.x()), spec);
  out.derivative = out.control;
  return out;
}

FieldValue first_order_dist(const Game& game, const Matrix& m,
                            const Vector& consensus, const StrategyState& state,
                            const SaturationSpec& spec) {
  const Index np = game.profile_size();
  const Vector y = state.y();
  FieldValue out;
  out.control = sat(-estimate_gradients(game, y), spec);
  out.derivative.resize(state.layout().size());
  out.derivative.head(np) = out.control;
  out.derivative.tail(y.size()) =
      -consensus.cwiseProduct(m * (y - replicate(state.x(), game.num_players())));
  return out;
}

FieldValue second_order_central(const Game& game, const StrategyState& state,
                                double alpha, double beta) {
  const Index np = game.profile_size();
  const Vector x = state.x();
  const Vector nu = state.nu();
  FieldValue out;
  out.control = -alpha * pseudo_gradient(game, x) - beta * nu -
                game_jacobian(game, x) * nu;
  out.derivative.resize(2 * np);
  out.derivative.head(np) = nu;
  out.derivative.tail(np) = out.control;
  return out;
}

FieldValue second_order_dist(const Game& game, const Matrix& m,
                             const Vector& consensus, const Vector& tracking,
                             const StrategyState& state,
                             const SaturationSpec* spec) {
  const Index np = game.profile_size();
  const StateLayout& layout = state.layout();
  const Vector y = state.y();
  const Vector z = state.z();
  const Vector zdot = -tracking.cwiseProduct(estimate_gradients(game, y));
  const Vector pre = (state.x() - z) + (state.nu() - zdot);

  FieldValue out;
  out.control = spec ? sat(-pre, *spec) : Vector(-pre);
  out.derivative.resize(layout.size());
  out.derivative.segment(layout.x_offset(), np) = state.nu();
  out.derivative.segment(layout.nu_offset(), np) = out.control;
  out.derivative.segment(layout.z_offset(), np) = zdot;
  out.derivative.segment(layout.y_offset(), y.size()) =
      -consensus.cwiseProduct(m * (y - replicate(z, game.num_players())));
  return out;
}

}  // namespace

FieldValue rhs_sat_gradient_play(const Game& game, const StrategyState& state,
                                 const SaturationSpec& spec) {
  require_layout(state, Strategy::SatGradPlay, game);
  return sat_gradient_play(game, state, spec);
}

FieldValue rhs_first_order_dist(const Game& game, const EstimationMatrix& m,
                                const StrategyState& state,
                                const GainSet& gains,
                                const SaturationSpec& spec) {
  require_layout(state, Strategy::FirstOrderDist, game);
  require_estimation(m, game);
  validate_gains(Strategy::FirstOrderDist, gains, game.num_players());
  return first_order_dist(
      game, m.matrix,
      consensus_gains(Strategy::FirstOrderDist, gains, game.num_players(),
                      game.action_dim()),
      state, spec);
}

FieldValue rhs_second_order_central(const Game& game,
                                    const StrategyState& state,
                                    const GainSet& gains) {
  require_layout(state, Strategy::SecondOrderCentral, game);
  validate_gains(Strategy::SecondOrderCentral, gains, game.num_players());
  return second_order_central(game, state, *gains.alpha, *gains.beta);
}

FieldValue rhs_second_order_dist(const Game& game, const EstimationMatrix& m,
                                 const StrategyState& state,
                                 const GainSet& gains) {
  require_layout(state, Strategy::SecondOrderDist, game);
  require_estimation(m, game);
  validate_gains(Strategy::SecondOrderDist, gains, game.num_players());
  const Index n = game.num_players();
  const Index p = game.action_dim();
  return second_order_dist(game, m.matrix,
                           consensus_gains(Strategy::SecondOrderDist, gains, n, p),
                           tracking_gains(gains, n, p), state, nullptr);
}

FieldValue rhs_second_order_dist_sat(const Game& game,
                                     const EstimationMatrix& m,
                                     const StrategyState& state,
                                     const GainSet& gains,
                                     const SaturationSpec& spec) {
  require_layout(state, Strategy::SecondOrderDistSat, game);
  require_estimation(m, game);
  validate_gains(Strategy::SecondOrderDistSat, gains, game.num_players());
  const Index n = game.num_players();
  const Index p = game.action_dim();
  return second_order_dist(
      game, m.matrix, consensus_gains(Strategy::SecondOrderDistSat, gains, n, p),
      tracking_gains(gains, n, p), state, &spec);
}

// ---------------------------------------------------------------------------
// StrategyField

StrategyField::StrategyField(Strategy strategy, Game game,
                             std::optional<EstimationMatrix> estimation,
                             GainSet gains, std::optional<SaturationSpec> spec)
    : strategy_(strategy),
      game_(std::move(game)),
      estimation_(std::move(estimation)),
      gains_(std::move(gains)),
      spec_(std::move(spec)) {
  const Index n = game_.num_players();
  const Index p = game_.action_dim();
  validate_gains(strategy_, gains_, n);
  if (is_saturated(strategy_) && !spec_)
    throw std::invalid_argument("strategy " + std::string(to_string(strategy_)) +
                                " requires saturation bounds");
  if (spec_ && !spec_->broadcasts())
    require_length("saturation channels", spec_->channels(), game_.profile_size());
  if (is_distributed(strategy_)) {
    if (!estimation_)
      throw std::invalid_argument("strategy " + std::string(to_string(strategy_)) +
                                  " requires a communication graph");
    require_estimation(*estimation_, game_);
    consensus_ = consensus_gains(strategy_, gains_, n, p);
  }
  if (strategy_ == Strategy::SecondOrderDist ||
      strategy_ == Strategy::SecondOrderDistSat)
    tracking_ = tracking_gains(gains_, n, p);
}

StateLayout StrategyField::layout() const {
  return {strategy_, game_.num_players(), game_.action_dim()};
}

FieldValue StrategyField::operator()(const StrategyState& state) const {
  require_layout(state, strategy_, game_);
  switch (strategy_) {
    case Strategy::SatGradPlay:
      return sat_gradient_play(game_, state, *spec_);
    case Strategy::FirstOrderDist:
      return first_order_dist(game_, estimation_->matrix, consensus_, state, *spec_);
    case Strategy::SecondOrderCentral:
      return second_order_central(game_, state, *gains_.alpha, *gains_.beta);
    case Strategy::SecondOrderDist:
      return second_order_dist(game_, estimation_->matrix, consensus_, tracking_,
                               state, nullptr);
    case Strategy::SecondOrderDistSat:
      return second_order_dist(game_, estimation_->matrix, consensus_, tracking_,
                               state, &*spec_);
  }
  throw std::logic_error("unhandled strategy");
}

double StrategyField::fastest_consensus_rate() const {
  if (!is_distributed(strategy_)) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(estimation_->matrix,
                                            Eigen::EigenvaluesOnly);
  return consensus_.maxCoeff() * eig.eigenvalues().maxCoeff();
}

// ---------------------------------------------------------------------------
// Lyapunov candidates

namespace {

// The controls are u = sat(-w), so the integrand of the candidate is
// -sat(-t), a clamp onto the mirrored interval [-upper, -lower].
SaturationSpec mirrored(const SaturationSpec& spec) {
  return {-spec.upper(), -spec.lower()};
}

const SaturationSpec& require_spec(const LyapunovContext& c) {
  if (!c.spec)
    throw std::invalid_argument("Lyapunov candidate for " +
                                std::string(to_string(c.strategy)) +
                                " needs saturation bounds");
  return *c.spec;
}

const Matrix& require_p(const LyapunovContext& c, Index size) {
  if (!c.p)
    throw std::invalid_argument("Lyapunov candidate for " +
                                std::string(to_string(c.strategy)) +
                                " needs the Lyapunov matrix P");
  require_length("Lyapunov matrix P", c.p->rows(), size);
  return *c.p;
}

const Vector& require_x_star(const LyapunovContext& c, Index size) {
  if (!c.x_star)
    throw std::invalid_argument(
        "Lyapunov candidate for " + std::string(to_string(c.strategy)) +
        " references the equilibrium x*; it is available only when x* is known "
        "(quadratic games)");
  require_length("x*", c.x_star->size(), size);
  return *c.x_star;
}

}  // namespace

double lyapunov_value(const LyapunovContext& context,
                      const StrategyState& state) {
  if (!context.game) throw std::invalid_argument("Lyapunov context has no game");
  const Game& game = *context.game;
  require_layout(state, context.strategy, game);
  const Index n = game.num_players();
  const Index np = game.profile_size();
  const Vector x = state.x();

  switch (context.strategy) {
    case Strategy::SatGradPlay:
      return sat_integral_sum(pseudo_gradient(game, x),
                              mirrored(require_spec(context)));

    case Strategy::FirstOrderDist: {
      const Matrix& p = require_p(context, n * np);
      const Vector e = state.y() - replicate(x, n);
      return sat_integral_sum(pseudo_gradient(game, x),
                              mirrored(require_spec(context))) +
             e.dot(p * e);
    }

    case Strategy::SecondOrderCentral: {
      const Vector nu = state.nu();
      const Vector g = pseudo_gradient(game, x);
      return nu.dot(nu) + 0.5 * g.dot(g) + nu.dot(g);
    }

    case Strategy::SecondOrderDist:
    case Strategy::SecondOrderDistSat: {
      validate_gains(context.strategy, context.gains, n);
      const Matrix& p = require_p(context, n * np);
      const Vector& x_star = require_x_star(context, np);
      const Index dim = game.action_dim();
      const Vector y = state.y();
      const Vector z = state.z();
      const Vector zdot = -tracking_gains(context.gains, n, dim)
                               .cwiseProduct(estimate_gradients(game, y));
      Vector k_inv(np);
      for (Index i = 0; i < n; ++i)
        k_inv.segment(i * dim, dim).setConstant(1.0 / context.gains.k(i));
      const Vector dz = z - x_star;
      const Vector e = y - replicate(z, n);
      const Vector gap = x - z;
      const Vector slip = state.nu() - zdot;
      const double common = 0.5 * dz.dot(k_inv.cwiseProduct(dz)) + e.dot(p * e);
      if (context.strategy == Strategy::SecondOrderDist)
        return common + 0.5 * gap.squaredNorm() + 0.5 * slip.squaredNorm();
      const SaturationSpec spec = mirrored(require_spec(context));
      return common + slip.squaredNorm() + sat_integral_sum(gap, spec) +
             sat_integral_sum(gap + slip, spec);
    }
  }
  throw std::logic_error("unhandled strategy");
}

}  // namespace nes
