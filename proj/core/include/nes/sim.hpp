#pragma once

// Fixed-step explicit integration, trajectory recording and diagnostics.

#include "nes/dynamics.hpp"
#include "nes/types.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace nes {

enum class Integrator { RK4, Euler };

std::string_view to_string(Integrator integrator);
std::optional<Integrator> parse_integrator(std::string_view name);

struct SimConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  Index record_stride = 1;
  Integrator integrator = Integrator::RK4;
  double convergence_tol = 1e-3;  // on |x - x*|_inf
  bool monitor_lyapunov = false;

  /// Throws std::invalid_argument for non-positive or inconsistent values.
  void validate() const;
  /// Number of steps; the last one is shortened when t_end is not a multiple
  /// of dt.
  Index steps() const;
};

/// dt * rate must stay below 2.5 (RK4) or 1.8 (Euler), where rate is the
/// fastest consensus mode. Returns the warning text when it does not.
std::optional<std::string> stability_warning(const SimConfig& cfg,
                                             double fastest_rate);

struct TrajectoryMetadata {
  Strategy strategy = Strategy::SatGradPlay;
  GainSet gains;
  std::uint64_t game_hash = 0;
  std::string game_label;
  std::vector<std::string> warnings;
};

/// Per-record diagnostics; each series is empty when not computed.
struct Diagnostics {
  std::vector<double> lyapunov;
  std::vector<double> dist_ne;  // |x - x*|_inf
  std::vector<double> est_err;  // |y - 1 (x) x| or |y - 1 (x) z|, Euclidean
};

struct Trajectory {
  StateLayout layout{Strategy::SatGradPlay, 1, 1};
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> controls;
  Diagnostics diagnostics;
  TrajectoryMetadata metadata;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
  StrategyState state(std::size_t k) const { return {layout, states[k]}; }
  StrategyState final_state() const { return state(size() - 1); }
};

using FieldFn = std::function<FieldValue(const StrategyState&)>;

/// Advances state0 with the configured scheme. Records t = 0, every
/// record_stride-th step, and t_end; the control logged with a record is the
/// field's control at that state. Throws NumericalError naming the step and
/// block when a state component becomes non-finite.
Trajectory integrate(const FieldFn& field, const StrategyState& state0,
                     const SimConfig& cfg);

/// As above, with metadata and the stability check filled from the field.
Trajectory integrate(const StrategyField& field, const StrategyState& state0,
                     const SimConfig& cfg);

struct ConvergenceResult {
  bool converged = false;
  std::optional<double> t_hit;  // start of the final in-tolerance suffix
  double final_distance = 0.0;
};

/// Suffix criterion: t_hit is the earliest record after which every record
/// stays within tol of x_star in the infinity norm.
ConvergenceResult detect_convergence(const Trajectory& traj,
                                     const Vector& x_star, double tol);

struct BoundCheck {
  bool ok = true;
  double worst_violation = 0.0;
};

/// Throws std::invalid_argument("controls not recorded") on an empty
/// control series.
BoundCheck check_control_bounds(const Trajectory& traj,
                                const SaturationSpec& spec);

/// Largest |u_k| per channel over all records.
Vector max_abs_control(const Trajectory& traj);

struct LyapunovSeries {
  std::vector<double> times;
  std::vector<double> values;
  double max_increment = 0.0;  // max(V_{k+1} - V_k), clipped below at 0
};

LyapunovSeries monitor_lyapunov(const Trajectory& traj,
                                const LyapunovContext& context);

/// Fills diagnostics.dist_ne and diagnostics.est_err (when the layout has
/// estimates); x_star may be absent.
void annotate(Trajectory& traj, const std::optional<Vector>& x_star);

/// CSV with columns t, x_i_d, nu_i_d (second-order layouts), u_i_d, then the
/// diagnostics present. Players and channels are numbered from 1. Numbers
/// carry 17 significant digits.
void write_csv(const Trajectory& traj, std::ostream& out);
void write_csv(const Trajectory& traj, const std::string& path);

/// Runs independent jobs on up to `threads` workers and returns the results
/// in submission order. The first failing job's exception (in submission
/// order) is rethrown after all jobs finish.
template <typename R>
std::vector<R> run_sweep(const std::vector<std::function<R()>>& jobs,
                         unsigned threads = std::thread::hardware_concurrency()) {
  std::vector<std::optional<R>> slots(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      try {
        slots[k].emplace(jobs[k]());
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const std::size_t count =
      std::max<std::size_t>(1, std::min<std::size_t>(threads, jobs.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < count; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<R> out;
  out.reserve(jobs.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace nes
