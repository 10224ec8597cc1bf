// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "nes/experiment.hpp"
#include "nes/format.hpp"

#include "support/random_problems.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

namespace {

using namespace nes;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string num(double v) { return format_real(v); }

const Vector kX0{{10.0, 0.0, 0.0, 5.0, 0.0, 0.0}};

Outcome oracle_fidelity() {
  Outcome o;
  const OracleReport r = oracle(preset("fig2"));
  const Vector expected{{-0.125, 0.75, 0.75, 0.5, 1.375, -0.25}};
  const double err = (r.x_star - expected).lpNorm<Eigen::Infinity>();
  o.require(err <= 1e-10, "|x - x*|_inf = " + num(err));
  o.detail = o.detail.empty() ? "error " + num(err) : o.detail;
  return o;
}

void check_preset(Outcome& o, const ExperimentResult& res) {
  const SummaryReport& s = res.summary;
  o.require(s.converged, "not converged (final distance " +
                             num(s.final_dist_ne.value_or(NAN)) + ")");
  const double umax = s.max_abs_u.maxCoeff();
  o.require(umax <= 5.0, "max |u| = " + num(umax));
  o.require(s.bounds_ok.value_or(false), "control bounds violated");
}

Outcome preset_fig2() {
  Outcome o;
  const ExperimentResult res = run_experiment(preset("fig2"));
  check_preset(o, res);
  const double inc = res.summary.max_lyapunov_increment.value_or(INFINITY);
  o.require(inc <= 1e-8, "Lyapunov increment " + num(inc));
  if (o.pass)
    o.detail = "t_hit " + num(*res.summary.t_hit) + ", max dV " + num(inc);
  return o;
}

Outcome preset_fig3() {
  Outcome o;
  const ExperimentResult res = run_experiment(preset("fig3"));
  check_preset(o, res);
  const double est = res.summary.final_est_err.value_or(INFINITY);
  o.require(est <= 1e-3, "estimation error " + num(est));
  if (o.pass) o.detail = "t_hit " + num(*res.summary.t_hit) + ", est_err " + num(est);
  return o;
}

Outcome preset_fig4() {
  Outcome o;
  const ExperimentResult res = run_experiment(preset("fig4"));
  check_preset(o, res);
  if (o.pass) o.detail = "t_hit " + num(*res.summary.t_hit);
  return o;
}

Outcome centralised_second_order() {
  Outcome o;
  ExperimentConfig cfg = preset("fig2");
  cfg.strategy = Strategy::SecondOrderCentral;
  cfg.saturation.reset();
  cfg.adjacency.reset();
  cfg.gains = GainSet{};
  cfg.gains.alpha = 1.0;
  cfg.gains.beta = 1.0;
  cfg.sim.t_end = 50.0;
  cfg.sim.convergence_tol = 1e-3;
  cfg.sim.monitor_lyapunov = true;
  cfg.init.clear();
  cfg.init["x0"] = InitSpec::explicit_values(kX0);
  cfg.init["nu0"] = InitSpec::zeros();
  const TunerReport bounds = tune(cfg);
  o.require(*bounds.alpha_star > 1.0 && *bounds.beta_star > 1.0,
            "gains outside the certified window");
  const ExperimentResult res = run_experiment(cfg);
  o.require(res.summary.converged, "not converged (final distance " +
                                       num(res.summary.final_dist_ne.value_or(NAN)) + ")");
  const double inc = res.summary.max_lyapunov_increment.value_or(INFINITY);
  o.require(inc <= 1e-8, "Lyapunov increment " + num(inc));
  if (o.pass)
    o.detail = "t_hit " + num(*res.summary.t_hit) + ", max dV " + num(inc);
  return o;
}

struct RandomRun {
  bool converged = false;
  double theta = 0.0;
  double final_distance = 0.0;
  Index steps = 0;
};

RandomRun random_first_order(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const QuadraticGame q = testing::random_monotone_game(rng);
  const Game game(q);
  const Index n = game.num_players();
  const Index p = game.action_dim();
  const CommGraph graph = testing::random_connected_graph(rng, n);
  const EstimationMatrix m = estimation_matrix(graph, p);
  const LyapunovPair lp =
      solve_lyapunov(m, Vector::Ones(m.size()), Matrix::Identity(m.size(), m.size()));
  const TunerReport bound = theta_star_first_order(game, graph, lp);

  RandomRun out;
  out.theta = 1.1 * *bound.theta_star;
  GainSet gains;
  gains.theta = out.theta;
  const StrategyField field(Strategy::FirstOrderDist, game, m, gains,
                            SaturationSpec::symmetric(5.0));
  StrategyState s0(field.layout());
  s0.x() = testing::random_vector(rng, game.profile_size(), 2.0);
  s0.y() = testing::random_vector(rng, m.size(), 2.0);

  SimConfig cfg;
  cfg.dt = std::min(1e-3, 1.5 / field.fastest_consensus_rate());
  cfg.t_end = 20.0;
  cfg.record_stride = std::max<Index>(1, cfg.steps() / 2000);
  out.steps = cfg.steps();
  const Trajectory traj = integrate(field, s0, cfg);
  const ConvergenceResult c = detect_convergence(traj, exact_ne_quadratic(q), 1e-3);
  out.converged = c.converged;
  out.final_distance = c.final_distance;
  return out;
}

Outcome bound_consistency() {
  Outcome o;
  std::vector<std::function<RandomRun()>> jobs;
  for (std::uint64_t seed = 1; seed <= 20; ++seed)
    jobs.push_back([seed] { return random_first_order(seed); });
  const std::vector<RandomRun> runs = run_sweep(jobs);
  int ok = 0;
  double theta_max = 0.0;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    theta_max = std::max(theta_max, runs[k].theta);
    if (runs[k].converged) {
      ++ok;
    } else {
      o.require(false, "seed " + std::to_string(k + 1) + " final distance " +
                           num(runs[k].final_distance));
    }
  }
  o.detail = std::to_string(ok) + "/20 converged, largest theta " + num(theta_max) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome property_suites() {
  Outcome o;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> wide(-20.0, 20.0);
  std::uniform_real_distribution<double> bound(0.1, 10.0);

  bool sat_ok = true;
  for (int k = 0; k < 1000; ++k) {
    const double a = wide(rng), b = wide(rng), u = bound(rng);
    sat_ok &= sat(-a, u) == -sat(a, u);
    sat_ok &= std::abs(sat(a, u) - sat(b, u)) <= std::abs(a - b);
    sat_ok &= sat(sat(a, u), u) == sat(a, u);
    sat_ok &= std::abs(sat(a, u)) <= u;
    sat_ok &= std::abs(a) <= u ? sat(a, u) == a : std::abs(sat(a, u)) == u;
  }
  o.require(sat_ok, "saturation algebra");

  double quad_err = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double g = wide(rng), u = bound(rng);
    // composite Simpson on each smooth piece of the clamp
    auto simpson = [&](double a, double b) {
      const int n = 2000;
      const double h = (b - a) / n;
      double s = sat(a, u) + sat(b, u);
      for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * sat(a + i * h, u);
      return s * h / 3.0;
    };
    const double knee = std::clamp(g, -u, u);
    const double numeric = simpson(0.0, knee) + simpson(knee, g);
    quad_err = std::max(quad_err, std::abs(sat_integral(g, u) - numeric));
  }
  o.require(quad_err <= 1e-9, "sat_integral quadrature error " + num(quad_err));

  bool lyap_ok = true;
  for (int k = 0; k < 10; ++k) {
    const CommGraph g = testing::random_connected_graph(rng, 2 + k % 3);
    const EstimationMatrix m = estimation_matrix(g, 1 + k % 2);
    const Matrix b = testing::random_vector(rng, m.size() * m.size(), 1.0)
                         .reshaped(m.size(), m.size());
    const Matrix qm = b * b.transpose() + Matrix::Identity(m.size(), m.size());
    const LyapunovPair lp = solve_lyapunov(m, Vector::Ones(m.size()), qm);
    lyap_ok &= lp.residual <= 1e-8 * qm.norm();
    lyap_ok &= Eigen::SelfAdjointEigenSolver<Matrix>(lp.p).eigenvalues().minCoeff() > 0.0;
  }
  o.require(lyap_ok, "Lyapunov residual or definiteness");

  bool grad_ok = true, mono_ok = true;
  for (int k = 0; k < 10; ++k) {
    const Game g{testing::random_monotone_game(rng)};
    grad_ok &= max_gradient_disagreement(g, 50, static_cast<std::uint64_t>(k)) <= 1e-5;
    const double m = monotonicity_constant(g).m;
    for (int j = 0; j < 100; ++j) {
      const Vector x = testing::random_vector(rng, g.profile_size(), 10.0);
      const Vector z = testing::random_vector(rng, g.profile_size(), 10.0);
      mono_ok &= (x - z).dot(pseudo_gradient(g, x) - pseudo_gradient(g, z)) >=
                 m * (x - z).squaredNorm() - 1e-9;
    }
  }
  o.require(grad_ok, "gradient vs finite differences");
  o.require(mono_ok, "monotonicity inequality");

  const StateLayout scalar(Strategy::SatGradPlay, 1, 1);
  auto decay_error = [&](double dt) {
    SimConfig cfg;
    cfg.dt = dt;
    cfg.t_end = 1.0;
    const Trajectory t = integrate(
        [](const StrategyState& s) { return FieldValue{-s.values(), -s.values()}; },
        {scalar, Vector::Ones(1)}, cfg);
    return std::abs(t.final_state().values()(0) - std::exp(-1.0));
  };
  const double factor = decay_error(0.1) / decay_error(0.05);
  o.require(factor >= 14.0 && factor <= 18.0, "RK4 order factor " + num(factor));

  ExperimentConfig cfg = preset("fig3");
  cfg.sim.t_end = 0.5;
  const Trajectory a = run_experiment(cfg).trajectory;
  const Trajectory b = run_experiment(cfg).trajectory;
  bool same = a.size() == b.size();
  for (std::size_t k = 0; same && k < a.size(); ++k)
    same = a.states[k] == b.states[k] && a.controls[k] == b.controls[k];
  o.require(same, "repeat runs differ");
  if (o.pass) o.detail = "RK4 factor " + num(factor);
  return o;
}

Outcome unsaturated_limit() {
  Outcome o;
  const Game game(QuadraticGame::sensor_network());
  const StrategyField field(Strategy::SatGradPlay, game, std::nullopt, GainSet{},
                            SaturationSpec::symmetric(1e12));
  StrategyState s0(field.layout());
  s0.x() = kX0;
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 5.0;
  const Trajectory sat_run = integrate(field, s0, cfg);
  const Trajectory plain = integrate(
      [&](const StrategyState& s) {
        const Vector g = pseudo_gradient(game, s.x());
        return FieldValue{-g, -g};
      },
      s0, cfg);
  double worst = 0.0;
  for (std::size_t k = 0; k < plain.size(); ++k)
    worst = std::max(worst,
                     (sat_run.states[k] - plain.states[k]).lpNorm<Eigen::Infinity>());
  o.require(worst <= 1e-9, "max deviation " + num(worst));
  if (o.pass) o.detail = "max deviation " + num(worst);
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;  // 0 for no limit
  Outcome (*run)();
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "oracle fidelity", 1.0, oracle_fidelity},
      {2, "preset fig2", 5.0, preset_fig2},
      {3, "preset fig3", 60.0, preset_fig3},
      {4, "preset fig4", 60.0, preset_fig4},
      {5, "centralised second order", 0.0, centralised_second_order},
      {6, "sufficiency-bound consistency", 120.0, bound_consistency},
      {7, "property suites", 0.0, property_suites},
      {8, "unsaturated limit", 0.0, unsaturated_limit},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0.0 && secs >= c.budget_seconds) {
      o.pass = false;
      o.detail += (o.detail.empty() ? "" : "; ") + std::string("over time budget");
    }
    if (!o.pass) ++failures;
    std::printf("criterion %d %s: %s (%.2fs) %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL",
                secs, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
