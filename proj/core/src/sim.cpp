#include "nes/sim.hpp"

#include "nes/format.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace nes {

std::string_view to_string(Integrator integrator) {
  return integrator == Integrator::RK4 ? "rk4" : "euler";
}

std::optional<Integrator> parse_integrator(std::string_view name) {
  if (name == "rk4") return Integrator::RK4;
  if (name == "euler") return Integrator::Euler;
  return std::nullopt;
}

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw std::invalid_argument("sim.dt must be positive and finite");
  if (!(t_end > 0.0) || !std::isfinite(t_end))
    throw std::invalid_argument("sim.t_end must be positive and finite");
  if (dt > t_end) throw std::invalid_argument("sim.dt must not exceed sim.t_end");
  if (record_stride < 1)
    throw std::invalid_argument("sim.record_stride must be at least 1");
  if (!(convergence_tol > 0.0))
    throw std::invalid_argument("sim.convergence_tol must be positive");
}

Index SimConfig::steps() const {
  const double ratio = t_end / dt;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio))
    return static_cast<Index>(nearest);
  return static_cast<Index>(std::ceil(ratio));
}

std::optional<std::string> stability_warning(const SimConfig& cfg,
                                             double fastest_rate) {
  const double limit = cfg.integrator == Integrator::RK4 ? 2.5 : 1.8;
  const double product = cfg.dt * fastest_rate;
  if (product <= limit) return std::nullopt;
  std::ostringstream os;
  os << "dt * fastest consensus rate = " << product << " exceeds " << limit
     << " for " << to_string(cfg.integrator) << "; the estimates may diverge,"
     << " use dt <= " << limit / fastest_rate;
  return os.str();
}

namespace {

void require_finite(const StrategyState& s, Index step, double t) {
  const Vector& v = s.values();
  for (Index j = 0; j < v.size(); ++j) {
    if (!std::isfinite(v(j))) {
      std::ostringstream os;
      os << "non-finite state at step " << step << " (t = " << t
         << ") in block '" << s.layout().block_name(j) << "', component " << j;
      throw NumericalError(os.str());
    }
  }
}

}  // namespace

Trajectory integrate(const FieldFn& field, const StrategyState& state0,
                     const SimConfig& cfg) {
  cfg.validate();
  const StateLayout layout = state0.layout();
  const Index n = cfg.steps();
  const Index size = layout.size();

  Trajectory traj;
  traj.layout = layout;
  traj.metadata.strategy = layout.strategy();
  const std::size_t expected =
      static_cast<std::size_t>(n / cfg.record_stride) + 2;
  traj.times.reserve(expected);
  traj.states.reserve(expected);
  traj.controls.reserve(expected);

  auto eval = [&](const StrategyState& s) {
    FieldValue f = field(s);
    require_length("field derivative", f.derivative.size(), size);
    return f;
  };
  auto record = [&](double t, const StrategyState& s, const Vector& u) {
    traj.times.push_back(t);
    traj.states.push_back(s.values());
    traj.controls.push_back(u);
  };

  StrategyState cur = state0;
  StrategyState tmp(layout);
  require_finite(cur, 0, 0.0);
  FieldValue f = eval(cur);
  record(0.0, cur, f.control);

  Vector k2(size), k3(size), k4(size);
  for (Index k = 1; k <= n; ++k) {
    const bool last = k == n;
    const double h = last ? cfg.t_end - static_cast<double>(n - 1) * cfg.dt
                          : cfg.dt;
    if (cfg.integrator == Integrator::RK4) {
      const Vector& k1 = f.derivative;
      tmp.values() = cur.values() + (0.5 * h) * k1;
      k2 = eval(tmp).derivative;
      tmp.values() = cur.values() + (0.5 * h) * k2;
      k3 = eval(tmp).derivative;
      tmp.values() = cur.values() + h * k3;
      k4 = eval(tmp).derivative;
      cur.values() += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } else {
      cur.values() += h * f.derivative;
    }
    const double t = last ? cfg.t_end : static_cast<double>(k) * cfg.dt;
    require_finite(cur, k, t);
    f = eval(cur);
    if (last || k % cfg.record_stride == 0) record(t, cur, f.control);
  }
  return traj;
}

Trajectory integrate(const StrategyField& field, const StrategyState& state0,
                     const SimConfig& cfg) {
  std::vector<std::string> warnings;
  if (auto w = stability_warning(cfg, field.fastest_consensus_rate()))
    warnings.push_back(*w);
  Trajectory traj = integrate(
      [&field](const StrategyState& s) { return field(s); }, state0, cfg);
  traj.metadata.strategy = field.strategy();
  traj.metadata.gains = field.gains();
  traj.metadata.game_hash = field.game().fingerprint();
  traj.metadata.game_label = field.game().label();
  traj.metadata.warnings = std::move(warnings);
  return traj;
}

ConvergenceResult detect_convergence(const Trajectory& traj,
                                     const Vector& x_star, double tol) {
  if (traj.empty()) throw std::invalid_argument("trajectory is empty");
  const Index np = traj.layout.profile_size();
  require_length("x*", x_star.size(), np);
  ConvergenceResult out;
  std::optional<std::size_t> start;
  for (std::size_t k = traj.size(); k-- > 0;) {
    const double d = (traj.states[k].head(np) - x_star).lpNorm<Eigen::Infinity>();
    if (k + 1 == traj.size()) out.final_distance = d;
    if (d > tol) break;
    start = k;
  }
  if (start) {
    out.converged = true;
    out.t_hit = traj.times[*start];
  }
  return out;
}

BoundCheck check_control_bounds(const Trajectory& traj,
                                const SaturationSpec& spec) {
  if (traj.controls.empty()) throw std::invalid_argument("controls not recorded");
  BoundCheck out;
  for (const Vector& u : traj.controls) {
    if (!spec.broadcasts())
      require_length("control", u.size(), spec.channels());
    for (Index k = 0; k < u.size(); ++k) {
      const double v = std::max(u(k) - spec.upper(k), spec.lower(k) - u(k));
      if (v > out.worst_violation) out.worst_violation = v;
      if (!(u(k) >= spec.lower(k) && u(k) <= spec.upper(k))) out.ok = false;
    }
  }
  return out;
}

Vector max_abs_control(const Trajectory& traj) {
  if (traj.controls.empty()) throw std::invalid_argument("controls not recorded");
  Vector out = Vector::Zero(traj.controls.front().size());
  for (const Vector& u : traj.controls) out = out.cwiseMax(u.cwiseAbs());
  return out;
}

LyapunovSeries monitor_lyapunov(const Trajectory& traj,
                                const LyapunovContext& context) {
  LyapunovSeries out;
  out.times = traj.times;
  out.values.reserve(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out.values.push_back(lyapunov_value(context, traj.state(k)));
    if (k > 0)
      out.max_increment =
          std::max(out.max_increment, out.values[k] - out.values[k - 1]);
  }
  return out;
}

void annotate(Trajectory& traj, const std::optional<Vector>& x_star) {
  const StateLayout& l = traj.layout;
  const Index np = l.profile_size();
  traj.diagnostics.dist_ne.clear();
  traj.diagnostics.est_err.clear();
  if (x_star) require_length("x*", x_star->size(), np);
  for (const Vector& s : traj.states) {
    if (x_star)
      traj.diagnostics.dist_ne.push_back(
          (s.head(np) - *x_star).lpNorm<Eigen::Infinity>());
    if (l.has_estimates()) {
      const Index ref = l.has_auxiliary() ? l.z_offset() : l.x_offset();
      const Vector truth = s.segment(ref, np).replicate(l.num_players(), 1);
      traj.diagnostics.est_err.push_back(
          (s.segment(l.y_offset(), l.estimate_size()) - truth).norm());
    }
  }
}

void write_csv(const Trajectory& traj, std::ostream& out) {
  const StateLayout& l = traj.layout;
  const Index n = l.num_players();
  const Index p = l.action_dim();
  const Index np = l.profile_size();
  const Diagnostics& d = traj.diagnostics;
  auto check = [&](const std::vector<double>& series, const char* name) {
    if (!series.empty() && series.size() != traj.size())
      throw DimensionError(std::string("diagnostic series ") + name,
                           static_cast<Index>(traj.size()),
                           static_cast<Index>(series.size()));
  };
  check(d.lyapunov, "V");
  check(d.dist_ne, "dist_ne");
  check(d.est_err, "est_err");

  auto block_header = [&](const char* prefix) {
    for (Index i = 1; i <= n; ++i)
      for (Index k = 1; k <= p; ++k) out << ',' << prefix << '_' << i << '_' << k;
  };
  out << 't';
  block_header("x");
  if (l.has_velocity()) block_header("nu");
  block_header("u");
  if (!d.lyapunov.empty()) out << ",V";
  if (!d.dist_ne.empty()) out << ",dist_ne";
  if (!d.est_err.empty()) out << ",est_err";
  out << '\n';

  for (std::size_t r = 0; r < traj.size(); ++r) {
    const Vector& s = traj.states[r];
    out << format_real17(traj.times[r]);
    for (Index j = 0; j < np; ++j) out << ',' << format_real17(s(j));
    if (l.has_velocity())
      for (Index j = 0; j < np; ++j)
        out << ',' << format_real17(s(l.nu_offset() + j));
    const Vector& u = traj.controls[r];
    for (Index j = 0; j < u.size(); ++j) out << ',' << format_real17(u(j));
    if (!d.lyapunov.empty()) out << ',' << format_real17(d.lyapunov[r]);
    if (!d.dist_ne.empty()) out << ',' << format_real17(d.dist_ne[r]);
    if (!d.est_err.empty()) out << ',' << format_real17(d.est_err[r]);
    out << '\n';
  }
}

void write_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_csv(traj, out);
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace nes
