#include "nes/game.hpp"

#include "support/random_problems.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace nes {
namespace {

const Vector kXStar{{-0.125, 0.75, 0.75, 0.5, 1.375, -0.25}};
const Vector kX0{{10.0, 0.0, 0.0, 5.0, 0.0, 0.0}};

Game sensor() { return Game(QuadraticGame::sensor_network()); }

QuadraticGame single_player(Vector linear) {
  QuadraticParams params;
  params.r = {Matrix::Identity(linear.size(), linear.size())};
  params.linear = {std::move(linear)};
  params.offset = {0.0};
  params.coupling = Matrix::Zero(1, 1);
  return QuadraticGame(params);
}

TEST(Cost, SensorGameAtEquilibrium) {
  EXPECT_NEAR(cost(sensor(), 0, kXStar), 2.65625, 1e-14);
}

TEST(Cost, ThirdSensorAtOriginIsOffset) {
  EXPECT_DOUBLE_EQ(cost(sensor(), 2, Vector::Zero(6)), 6.0);
}

TEST(Cost, ZeroParametersGiveZero) {
  QuadraticParams params;
  params.r.assign(2, Matrix::Zero(2, 2));
  params.linear.assign(2, Vector::Zero(2));
  params.offset = {0.0, 0.0};
  params.coupling = Matrix::Zero(2, 2);
  const Game g{QuadraticGame(params)};
  EXPECT_EQ(cost(g, 1, Vector::Constant(4, 3.7)), 0.0);
}

TEST(Cost, WrongLengthNamesBothSizes) {
  try {
    cost(sensor(), 0, Vector::Zero(5));
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    EXPECT_EQ(e.expected(), 6);
    EXPECT_EQ(e.actual(), 5);
    EXPECT_NE(std::string(e.what()).find("expected length 6, got 5"),
              std::string::npos);
  }
}

TEST(PseudoGradient, VanishesAtEquilibrium) {
  EXPECT_LE(pseudo_gradient(sensor(), kXStar).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(PseudoGradient, SensorGameAtInitialProfile) {
  const Vector expected{{42.0, -12.0, -22.0, 28.0, -4.0, -8.0}};
  EXPECT_LE((pseudo_gradient(sensor(), kX0) - expected).lpNorm<Eigen::Infinity>(),
            1e-12);
}

TEST(PseudoGradient, ConstantCostsGiveZero) {
  const Game g = Game::custom(2, 1, {[](const Vector&) { return 4.0; },
                                     [](const Vector&) { return -1.0; }});
  EXPECT_LE(pseudo_gradient(g, Vector{{1.5, -2.0}}).lpNorm<Eigen::Infinity>(), 1e-9);
}

TEST(PseudoGradient, FiniteDifferenceFallbackMatchesQuadratic) {
  const QuadraticGame q = QuadraticGame::sensor_network();
  std::vector<Game::CostFn> costs;
  for (Index i = 0; i < 3; ++i)
    costs.push_back([q, i](const Vector& x) { return q.cost(i, x); });
  const Game numeric = Game::custom(3, 2, costs);
  EXPECT_LE((pseudo_gradient(numeric, kX0) - pseudo_gradient(Game(q), kX0))
                .lpNorm<Eigen::Infinity>(),
            1e-5);
}

TEST(PartialGradientAtEstimate, Examples) {
  const Game g = sensor();
  EXPECT_LE(partial_gradient_at_estimate(g, 0, kXStar).norm(), 1e-12);
  EXPECT_LE((partial_gradient_at_estimate(g, 0, kX0) - Vector{{42.0, -12.0}}).norm(),
            1e-12);
  EXPECT_LE((partial_gradient_at_estimate(g, 2, Vector::Zero(6)) - Vector{{-4.0, 2.0}})
                .norm(),
            1e-12);
  EXPECT_THROW(partial_gradient_at_estimate(g, 0, Vector::Zero(4)), DimensionError);
}

TEST(GameJacobian, SensorGameBlocks) {
  Matrix blocks{{4, -2, 0}, {-2, 6, -2}, {0, -2, 4}};
  Matrix expected = Matrix::Zero(6, 6);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j)
      expected.block(2 * i, 2 * j, 2, 2) = blocks(i, j) * Matrix::Identity(2, 2);
  EXPECT_EQ(game_jacobian(sensor(), kX0), expected);
  EXPECT_EQ(game_jacobian(sensor(), kX0), game_jacobian(sensor(), kXStar));
}

TEST(GameJacobian, SinglePlayerSquare) {
  const Game g = Game::custom(1, 1, {[](const Vector& x) { return x(0) * x(0); }});
  EXPECT_NEAR(game_jacobian(g, Vector{{0.7}})(0, 0), 2.0, 1e-5);
}

TEST(GameJacobian, NumericMatchesAnalyticForSineGame) {
  const auto analytic = find_registered_game("sine_coupled");
  const auto numeric = find_registered_game("sine_coupled_numeric");
  ASSERT_TRUE(analytic && numeric);
  const Vector x{{0.3, -1.1}};
  EXPECT_LE((game_jacobian(analytic->game, x) - game_jacobian(numeric->game, x))
                .lpNorm<Eigen::Infinity>(),
            1e-4);
}

TEST(Monotonicity, SensorGameIsCertifiedAtTwo) {
  const auto m = monotonicity_constant(sensor());
  EXPECT_NEAR(m.m, 2.0, 1e-12);
  EXPECT_TRUE(m.certified);
}

TEST(Monotonicity, SinglePlayerSquare) {
  EXPECT_NEAR(monotonicity_constant(Game(single_player(Vector::Zero(1)))).m, 2.0,
              1e-12);
}

TEST(Monotonicity, ZeroSumBilinearIsNotCertified) {
  const auto g = find_registered_game("bilinear_zero_sum");
  ASSERT_TRUE(g);
  const auto m = monotonicity_constant(g->game);
  EXPECT_LE(m.m, 1e-6);
  EXPECT_FALSE(m.certified);
}

TEST(ExactNe, SensorGame) {
  const Vector x = exact_ne_quadratic(QuadraticGame::sensor_network());
  EXPECT_LE((x - kXStar).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(ExactNe, ZeroLinearTermsGiveOrigin) {
  QuadraticGame base = QuadraticGame::sensor_network();
  QuadraticParams params = base.params();
  for (auto& v : params.linear) v.setZero();
  EXPECT_LE(exact_ne_quadratic(QuadraticGame(params)).norm(), 1e-15);
}

TEST(ExactNe, SinglePlayer) {
  const Vector x = exact_ne_quadratic(single_player(Vector{{2.0, -2.0}}));
  EXPECT_LE((x - Vector{{-1.0, 1.0}}).norm(), 1e-15);
}

TEST(ExactNe, RejectsGameWithoutMonotonicity) {
  QuadraticParams params;
  params.r = {Matrix::Zero(1, 1), Matrix::Zero(1, 1)};
  params.linear = {Vector::Ones(1), Vector::Ones(1)};
  params.offset = {0.0, 0.0};
  params.coupling = Matrix::Zero(2, 2);
  try {
    exact_ne_quadratic(QuadraticGame(params));
    FAIL() << "expected AssumptionError";
  } catch (const AssumptionError& e) {
    EXPECT_STREQ(e.what(), "game is not strongly monotone; no unique NE certificate");
  }
}

TEST(QuadraticGame, RejectsAsymmetricCoupling) {
  QuadraticParams params = QuadraticGame::sensor_network().params();
  params.coupling(0, 2) = 0.5;
  EXPECT_THROW(QuadraticGame{params}, std::invalid_argument);
}

TEST(Registry, KnownNames) {
  for (const auto& name : registered_game_names()) {
    const auto g = find_registered_game(name);
    ASSERT_TRUE(g) << name;
    ASSERT_TRUE(g->reference_equilibrium) << name;
    EXPECT_LE(pseudo_gradient(g->game, *g->reference_equilibrium)
                  .lpNorm<Eigen::Infinity>(),
              1e-6)
        << name;
  }
  EXPECT_FALSE(find_registered_game("no_such_game"));
}

TEST(Registry, AnalyticGradientsAgreeWithCosts) {
  const auto g = find_registered_game("sine_coupled");
  ASSERT_TRUE(g);
  EXPECT_LE(max_gradient_disagreement(g->game, 50, 3), 1e-5);
}

// Properties over random strongly monotone quadratic games.

class RandomGames : public ::testing::TestWithParam<int> {};

TEST_P(RandomGames, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()));
  const Game g{testing::random_monotone_game(rng)};
  EXPECT_LE(max_gradient_disagreement(g, 100, 7), 1e-5);
}

TEST_P(RandomGames, ExactNeZeroesGradient) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()));
  const QuadraticGame q = testing::random_monotone_game(rng);
  EXPECT_LE(q.pseudo_gradient(exact_ne_quadratic(q)).lpNorm<Eigen::Infinity>(),
            1e-10);
}

TEST_P(RandomGames, MonotonicityInequalityOnRandomPairs) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()));
  const Game g{testing::random_monotone_game(rng)};
  const double m = monotonicity_constant(g).m;
  for (int k = 0; k < 100; ++k) {
    const Vector x = testing::random_vector(rng, g.profile_size(), 10.0);
    const Vector z = testing::random_vector(rng, g.profile_size(), 10.0);
    const double lhs = (x - z).dot(pseudo_gradient(g, x) - pseudo_gradient(g, z));
    EXPECT_GE(lhs, m * (x - z).squaredNorm() - 1e-9);
  }
}

TEST_P(RandomGames, JacobianIsConstantAndBoundsMonotonicity) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()));
  const Game g{testing::random_monotone_game(rng)};
  const Matrix h0 = game_jacobian(g, Vector::Zero(g.profile_size()));
  for (int k = 0; k < 10; ++k)
    EXPECT_EQ(game_jacobian(g, testing::random_vector(rng, g.profile_size(), 5.0)), h0);
  const Matrix sym = 0.5 * (h0 + h0.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  EXPECT_GE(eig.eigenvalues().minCoeff(), monotonicity_constant(g).m - 1e-9);
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomGames, ::testing::Range(1, 11));

}  // namespace
}  // namespace nes
