#include "nes/tuner.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace nes {
namespace {

Game sensor() { return Game(QuadraticGame::sensor_network()); }

LyapunovPair path_pair(double q_scale = 1.0) {
  const EstimationMatrix m = estimation_matrix(CommGraph::path(3), 2);
  return solve_lyapunov(m, Vector::Ones(18), q_scale * Matrix::Identity(18, 18));
}

GameConstants simple(double m) {
  GameConstants c;
  c.m = m;
  c.lbar = Vector::Constant(3, 2.0);
  c.jacobian_norm = 1.0;
  c.certified = true;
  c.source = "user";
  return c;
}

TEST(Lipschitz, SensorGameRows) {
  const Vector l = lipschitz_constants(sensor());
  EXPECT_NEAR(l(0), std::sqrt(20.0), 1e-12);
  EXPECT_NEAR(l(1), std::sqrt(44.0), 1e-12);
  EXPECT_NEAR(l(2), std::sqrt(20.0), 1e-12);
}

TEST(Lipschitz, DecoupledGameIsTwo) {
  QuadraticParams params;
  params.r.assign(2, Matrix::Identity(2, 2));
  params.linear.assign(2, Vector::Zero(2));
  params.offset = {0.0, 0.0};
  params.coupling = Matrix::Zero(2, 2);
  const Vector l = lipschitz_constants(Game(QuadraticGame(params)));
  EXPECT_NEAR(l(0), 2.0, 1e-14);
  EXPECT_NEAR(l(1), 2.0, 1e-14);
}

TEST(Lipschitz, NonQuadraticNeedsManualConstants) {
  const auto g = find_registered_game("sine_coupled");
  try {
    lipschitz_constants(g->game);
    FAIL();
  } catch (const AssumptionError& e) {
    EXPECT_NE(std::string(e.what()).find("supply certified Lipschitz constants manually"),
              std::string::npos);
  }
}

TEST(FirstOrder, FormulaSubstitution) {
  EXPECT_DOUBLE_EQ(theta_star_formula(2, 2, 2, 2, 2, 1), 6.0);
}

TEST(FirstOrder, SensorGameOnPath) {
  const TunerReport r = theta_star_first_order(sensor(), CommGraph::path(3), path_pair());
  EXPECT_NEAR(r.m, 2.0, 1e-12);
  EXPECT_NEAR(*r.jacobian_norm, 8.0, 1e-12);
  EXPECT_NEAR(*r.l1, 53.06599664568642, 1e-9);
  EXPECT_NEAR(*r.l2, 42.87799932828454, 1e-9);
  EXPECT_NEAR(*r.l3, 6.464101615137757, 1e-9);
  EXPECT_NEAR(*r.eps1, 2.0 * *r.l1 / 2.0, 1e-12);
  EXPECT_NEAR(*r.theta_star, 1471.7703041736988, 1e-7);
  // Recomputing from the stored constants gives the same bits.
  EXPECT_EQ(*r.theta_star,
            theta_star_formula(*r.l1, *r.l2, *r.l3, *r.eps1, *r.eps2, *r.lambda_min_q));
  // The eps choice leaves slack m/2.
  EXPECT_NEAR(r.m - *r.l1 / (2 * *r.eps1) - *r.l3 / (2 * *r.eps2), r.m / 2, 1e-12);
}

TEST(FirstOrder, DoublingQIsConsistent) {
  const TunerReport a = theta_star_first_order(sensor(), CommGraph::path(3), path_pair());
  const TunerReport b =
      theta_star_first_order(sensor(), CommGraph::path(3), path_pair(2.0));
  EXPECT_NEAR(*b.lambda_min_q, 2.0, 1e-12);
  EXPECT_NEAR(*b.p_norm, 2.0 * *a.p_norm, 1e-9);
  EXPECT_EQ(*b.theta_star,
            theta_star_formula(*b.l1, *b.l2, *b.l3, *b.eps1, *b.eps2, *b.lambda_min_q));
}

TEST(FirstOrder, MonotoneInConstants) {
  const double base = theta_star_formula(3, 4, 5, 6, 7, 2);
  EXPECT_GT(theta_star_formula(3.01, 4, 5, 6, 7, 2), base);
  EXPECT_GT(theta_star_formula(3, 4.01, 5, 6, 7, 2), base);
  EXPECT_GT(theta_star_formula(3, 4, 5.01, 6, 7, 2), base);
  EXPECT_LT(theta_star_formula(3, 4, 5, 6, 7, 2.01), base);
  // With eps tied to l1 and l3 the dependence is still increasing.
  auto tied = [](double l1, double l3) {
    return theta_star_formula(l1, 1.0, l3, 2 * l1 / 2.0, 2 * l3 / 2.0, 1.0);
  };
  EXPECT_GT(tied(1.01, 1.0), tied(1.0, 1.0));
  EXPECT_GT(tied(1.0, 1.01), tied(1.0, 1.0));
}

TEST(FirstOrder, RejectsNonMonotoneGame) {
  GameConstants c = simple(0.0);
  EXPECT_THROW(theta_star_first_order(c, path_pair(), 3), AssumptionError);
  c = simple(1.0);
  c.certified = false;
  EXPECT_THROW(theta_star_first_order(c, path_pair(), 3), AssumptionError);
}

TEST(Centralised, SensorGame) {
  const TunerReport r = alpha_beta_star(game_constants(sensor()), 1.0, 1.0);
  EXPECT_NEAR(*r.alpha_star, 2.0, 1e-12);
  EXPECT_NEAR(*r.beta_star, 4.82842712474619, 1e-12);
  EXPECT_LT(*r.eps1_low, *r.eps1_high);
}

TEST(Centralised, Examples) {
  EXPECT_THROW(alpha_beta_star(simple(1.0), 1.0), std::invalid_argument);
  EXPECT_DOUBLE_EQ(*alpha_beta_star(simple(4.0), 1.0).beta_star, 6.0);
}

TEST(Centralised, BetaStarAndWindowOnGrid) {
  for (double m : {0.5, 1.0, 2.0, 7.0}) {
    for (int a = 1; a < 20; ++a) {
      const double alpha = m * a / 20.0;
      const double bs = beta_star_formula(alpha, m);
      EXPECT_GT(bs, 2 * alpha);
      const double lo = 2 * alpha - 2 * std::sqrt(alpha * m);
      for (int b = 1; b < 20; ++b) {
        const double beta = std::max(1e-9, lo) + (bs - std::max(1e-9, lo)) * b / 20.0;
        const TunerReport r = alpha_beta_star(simple(m), alpha, beta);
        EXPECT_LT(*r.eps1_low, *r.eps1_high) << m << " " << alpha << " " << beta;
      }
    }
  }
}

TEST(SecondOrder, FormulaExamples) {
  EXPECT_DOUBLE_EQ(theta_star_b1(2, 2, 1, 1), 1.5);
  EXPECT_DOUBLE_EQ(theta_star_b3(2, 2, 1, 1), 1.5);
  EXPECT_DOUBLE_EQ(theta_star_b1(2, 0, 1, 4), 0.25);
  const double lam = a1_min_eigenvalue(2, 2, 1, 1, 2);
  EXPECT_NEAR(lam, (3 - std::sqrt(5.0)) / 2, 1e-15);
  EXPECT_NEAR(theta1_star_formula(lam, 2, 1), 0.7255626302463263, 1e-12);
}

TEST(SecondOrder, A1PositiveDefiniteAboveThetaStar) {
  for (double m : {0.5, 2.0}) {
    for (double l1 : {0.0, 1.0, 5.0}) {
      for (double l2 : {0.1, 3.0}) {
        const double ts = theta_star_b1(m, l1, l2, 1.5);
        for (double f : {1.001, 1.5, 10.0}) {
          const double theta = f * ts;
          const double d = 1.5 * theta - l2;
          EXPECT_GT(m * d - l1 * l1 / 4, 0.0);  // det
          EXPECT_GT(m + d, 0.0);                // trace
          EXPECT_GT(a1_min_eigenvalue(m, l1, l2, 1.5, theta), 0.0);
        }
      }
    }
  }
}

SecondOrderInputs fig4_inputs(std::optional<double> theta) {
  SecondOrderInputs in;
  in.k = Vector::Constant(3, 0.1);
  in.theta_bar = Vector::Ones(18);
  in.estimation = estimation_matrix(CommGraph::path(3), 2).matrix;
  in.saturated = true;
  in.theta = theta;
  return in;
}

TEST(SecondOrder, SensorGameFig4Gains) {
  const TunerReport r =
      theta_bounds_second_order(game_constants(sensor()), path_pair(), 3, fig4_inputs(200.0));
  EXPECT_NEAR(*r.l1, 14.059936917060103, 1e-9);
  EXPECT_NEAR(*r.l2, 4.287799932828453, 1e-9);
  EXPECT_NEAR(*r.l3, 2.4755624454497656, 1e-9);
  EXPECT_NEAR(*r.theta_star, 28.998028196792145, 1e-8);
  EXPECT_NEAR(*r.lambda_min_a1, 1.745212022797295, 1e-9);
  EXPECT_NEAR(*r.theta1_star, 0.030537499641164454, 1e-11);
  EXPECT_EQ(*r.theta_star, theta_star_b3(r.m, *r.l1, *r.l2, *r.lambda_min_q));
  ASSERT_FALSE(r.caveats.empty());
  EXPECT_NE(r.caveats.front().find("heuristic"), std::string::npos);
}

TEST(SecondOrder, ThetaBelowBoundIsRejected) {
  try {
    theta_bounds_second_order(game_constants(sensor()), path_pair(), 3, fig4_inputs(20.0));
    FAIL();
  } catch (const AssumptionError& e) {
    EXPECT_NE(std::string(e.what()).find("A1 not positive definite"), std::string::npos);
  }
}

TEST(SecondOrder, UnsaturatedUsesFirstBound) {
  SecondOrderInputs in = fig4_inputs(std::nullopt);
  in.saturated = false;
  const TunerReport r =
      theta_bounds_second_order(game_constants(sensor()), path_pair(), 3, in);
  EXPECT_EQ(*r.theta_star, theta_star_b1(r.m, *r.l1, *r.l2, *r.lambda_min_q));
  EXPECT_FALSE(r.theta1_star);
  EXPECT_TRUE(r.caveats.empty());
}

TEST(Report, KeyValueListing) {
  const std::string text = format_report(alpha_beta_star(game_constants(sensor()), 1.0));
  auto value = [&](const std::string& key) {
    const auto at = text.find("\n" + key + "=");
    EXPECT_NE(at, std::string::npos) << key;
    return std::stod(text.substr(at + key.size() + 2));
  };
  EXPECT_NEAR(value("m"), 2.0, 1e-12);
  EXPECT_NEAR(value("alpha_star"), 2.0, 1e-12);
  EXPECT_NEAR(value("beta_star"), 4.82842712474619, 1e-12);
  EXPECT_NE(text.find("\nlbar=4.4721359549995"), std::string::npos);
  EXPECT_EQ(text.rfind("strategy=second_order_central\n", 0), 0u);
}

}  // namespace
}  // namespace nes
