#include "elsg/sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "elsg/errors.hpp"
#include "elsg/util.hpp"

namespace elsg {

const char* controller_mode_name(ControllerMode m) {
  switch (m) {
    case ControllerMode::kNominalOnly: return "nominal-only";
    case ControllerMode::kZcbfContinuous: return "zcbf-continuous";
    case ControllerMode::kZcbfSampled: return "zcbf-sampled";
  }
  return "?";
}

ControllerMode parse_controller_mode(const std::string& token) {
  if (token == "nominal-only") return ControllerMode::kNominalOnly;
  if (token == "zcbf-continuous") return ControllerMode::kZcbfContinuous;
  if (token == "zcbf-sampled") return ControllerMode::kZcbfSampled;
  throw ConfigError("unknown controller mode '" + token + "'");
}

const char* margin_rule_name(MarginRule r) {
  switch (r) {
    case MarginRule::kEtaOfT: return "eta-of-T";
    case MarginRule::kEtaBar: return "eta-bar";
    case MarginRule::kNumber: return "number";
  }
  return "?";
}

void SafetyReport::merge(const SafetyReport& other) {
  flags |= other.flags;
  worst_q = std::max(worst_q, other.worst_q);
  worst_v = std::max(worst_v, other.worst_v);
  worst_u = std::max(worst_u, other.worst_u);
}

SafetyReport monitor_safety(const ConstraintSpec& spec, const Eigen::VectorXd& q_c,
                            const Eigen::VectorXd& v_c, const Eigen::VectorXd& u, double tol) {
  SafetyReport r;
  for (int i = 0; i < spec.dof(); ++i) {
    r.worst_q = std::max({r.worst_q, spec.q_min(i) - q_c(i), q_c(i) - spec.q_max(i)});
    r.worst_v = std::max(r.worst_v, std::abs(v_c(i)) - spec.v_max(i));
  }
  for (int j = 0; j < spec.input_dim(); ++j) {
    r.worst_u = std::max(r.worst_u, std::abs(u(j)) - spec.u_max(j));
  }
  r.worst_q = std::max(r.worst_q, 0.0);
  r.worst_v = std::max(r.worst_v, 0.0);
  r.worst_u = std::max(r.worst_u, 0.0);
  if (r.worst_q > tol) r.flags |= kFlagPosition;
  if (r.worst_v > tol) r.flags |= kFlagVelocity;
  if (r.worst_u > tol) r.flags |= kFlagInput;
  return r;
}

namespace {

// one classical 4th-order step of (q' = v, v' = accel(q, v, u)) in place
void rk4_step(const SystemModel& model, Eigen::VectorXd& q, Eigen::VectorXd& v,
              const Eigen::VectorXd& u, double h) {
  const Eigen::VectorXd k1q = v;
  const Eigen::VectorXd k1v = model.native_accel(q, v, u);
  const Eigen::VectorXd k2q = v + 0.5 * h * k1v;
  const Eigen::VectorXd k2v = model.native_accel(q + 0.5 * h * k1q, v + 0.5 * h * k1v, u);
  const Eigen::VectorXd k3q = v + 0.5 * h * k2v;
  const Eigen::VectorXd k3v = model.native_accel(q + 0.5 * h * k2q, v + 0.5 * h * k2v, u);
  const Eigen::VectorXd k4q = v + h * k3v;
  const Eigen::VectorXd k4v = model.native_accel(q + h * k3q, v + h * k3v, u);
  q += (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
  v += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
}

int status_rank(QpStatus s) {
  switch (s) {
    case QpStatus::kOptimal: return 0;
    case QpStatus::kMaxIter: return 1;
    case QpStatus::kInfeasible: return 2;
  }
  return 2;
}

}  // namespace

SimTrace run_closed_loop(const SimSetup& setup) {
  if (!setup.model) throw ConfigError("simulation needs a model");
  if (!setup.nominal) throw ConfigError("simulation needs a nominal control law");
  if (setup.substeps < 1) throw ConfigError("substeps must be >= 1");
  if (!(setup.T > 0.0)) throw ConfigError("hold interval must be positive");
  if (setup.duration < 0.0) throw ConfigError("duration must be nonnegative");
  const SystemModel& model = *setup.model;
  if (setup.x0_q.size() != model.dof() || setup.x0_v.size() != model.dof()) {
    throw ConfigError("initial state dimension mismatch");
  }

  const Barrier barrier(setup.spec, setup.params);
  const bool filtered = setup.mode != ControllerMode::kNominalOnly;

  // the theory admits starts anywhere in the tight safe set
  if (filtered) {
    BarrierConfig tight = setup.params;
    tight.delta = 0.0;
    const Barrier tight_barrier(setup.spec, tight);
    const Eigen::VectorXd qc0 = model.constraint_pos(setup.x0_q);
    const Eigen::VectorXd vc0 = model.constraint_vel(setup.x0_q, setup.x0_v);
    tight_barrier.require_in_domain(qc0, vc0, 1e-9);
  }

  double margin = 0.0;
  if (setup.mode == ControllerMode::kZcbfSampled) {
    switch (setup.margin_rule) {
      case MarginRule::kEtaOfT: {
        if (!setup.hold) throw ConfigError("margin rule eta-of-T needs the hold-margin model");
        margin = setup.hold->eta(setup.T);
        if (margin > setup.params.eta_bar) {
          std::ostringstream os;
          os << "sampling period too large: accumulated hold drift "
             << format_g17(margin) << " exceeds the jump margin "
             << format_g17(setup.params.eta_bar);
          if (setup.params.eta_bar > 0.0) {
            os << "; largest admissible hold time T_max = "
               << format_g17(setup.hold->inverse(setup.params.eta_bar));
          }
          throw ConfigError(os.str());
        }
        break;
      }
      case MarginRule::kEtaBar:
        margin = setup.params.eta_bar;
        break;
      case MarginRule::kNumber:
        if (setup.margin_value < 0.0) throw ConfigError("margin override must be nonnegative");
        margin = setup.margin_value;
        break;
    }
  }

  ZcbfFilter filter(setup.model, barrier);

  SimTrace trace;
  trace.scenario = setup.scenario;
  trace.mode = setup.mode;
  trace.T = setup.T;
  trace.substeps = setup.substeps;

  const int n = setup.spec.dof();
  const int m = setup.spec.input_dim();
  const auto ticks = static_cast<std::int64_t>(std::llround(setup.duration / setup.T));
  const double h = setup.T / setup.substeps;

  Eigen::VectorXd q = setup.x0_q, v = setup.x0_v;

  auto fill_state = [&](TickRecord& rec, double t) {
    rec.t = t;
    rec.q = model.constraint_pos(q);
    rec.v = model.constraint_vel(q, v);
    rec.b_up.resize(n);
    rec.b_low.resize(n);
    rec.regions.resize(n);
    for (int i = 0; i < n; ++i) {
      rec.b_up(i) = barrier.b_up(i, rec.q(i), rec.v(i));
      rec.b_low(i) = barrier.b_low(i, rec.q(i), rec.v(i));
      rec.regions[i] = barrier.select_region(i, rec.q(i), rec.v(i));
    }
  };

  auto note_state = [&](double t, const Eigen::VectorXd& u_now, TickRecord& rec) {
    const Eigen::VectorXd qc = model.constraint_pos(q);
    const Eigen::VectorXd vc = model.constraint_vel(q, v);
    const SafetyReport sr = monitor_safety(setup.spec, qc, vc, u_now);
    rec.flags |= sr.flags;
    trace.worst.merge(sr);
    if (filtered && !trace.left_domain && !barrier.in_domain(qc, vc, 1e-9)) {
      trace.left_domain = true;
      trace.failed = true;
      trace.first_exit_time = t;
    }
  };

  for (std::int64_t k = 0; k < ticks && !trace.aborted; ++k) {
    const double t_k = static_cast<double>(k) * setup.T;
    TickRecord rec;
    fill_state(rec, t_k);

    Eigen::VectorXd u_hold;
    if (setup.mode == ControllerMode::kZcbfSampled) {
      const FilterOutcome out = filter.apply(q, v, setup.nominal(t_k, q, v), margin, false);
      u_hold = out.u;
      rec.qp_status = out.status;
      rec.fallback = out.fallback;
      rec.qp_ran = true;
    } else if (setup.mode == ControllerMode::kNominalOnly) {
      u_hold = setup.nominal(t_k, q, v);  // deliberately unsaturated
    }

    for (int s = 0; s < setup.substeps && !trace.aborted; ++s) {
      const double t_s = t_k + s * h;
      Eigen::VectorXd u_now;
      if (setup.mode == ControllerMode::kZcbfContinuous) {
        const FilterOutcome out = filter.apply(q, v, setup.nominal(t_s, q, v), 0.0, false);
        u_now = out.u;
        if (!rec.qp_ran || status_rank(out.status) > status_rank(rec.qp_status)) {
          rec.qp_status = out.status;
        }
        rec.qp_ran = true;
        rec.fallback = rec.fallback || out.fallback;
        if (s == 0) rec.u = u_now;
      } else {
        u_now = u_hold;
      }
      if (s == 0) {
        if (rec.u.size() == 0) rec.u = u_now;
        note_state(t_s, u_now, rec);
      }
      rk4_step(model, q, v, u_now, h);
      const double t_next = t_k + (s + 1) * h;
      if (!q.allFinite() || !v.allFinite()) {
        trace.aborted = true;
        std::ostringstream os;
        os << "integration produced a non-finite state at t = " << format_g17(t_next);
        trace.abort_reason = os.str();
        break;
      }
      note_state(t_next, u_now, rec);
      if (setup.observer) setup.observer(t_next, q, v, u_now);
    }

    trace.flags |= rec.flags;
    trace.records.push_back(std::move(rec));
  }

  if (!trace.aborted) {
    TickRecord last;
    fill_state(last, static_cast<double>(ticks) * setup.T);
    last.u = Eigen::VectorXd::Zero(m);
    last.qp_ran = false;
    const SafetyReport sr = monitor_safety(setup.spec, last.q, last.v, last.u);
    last.flags = sr.flags;
    trace.flags |= last.flags;
    trace.records.push_back(std::move(last));
  }
  return trace;
}

std::string trace_csv(const SimTrace& trace) {
  if (trace.records.empty()) throw NumericError("empty trace");
  const int n = static_cast<int>(trace.records.front().q.size());
  const int m = static_cast<int>(trace.records.front().u.size());
  std::ostringstream os;
  os << "t";
  for (int i = 1; i <= n; ++i) os << ",q" << i;
  for (int i = 1; i <= n; ++i) os << ",v" << i;
  for (int j = 1; j <= m; ++j) os << ",u" << j;
  for (int i = 1; i <= n; ++i) os << ",bup" << i;
  for (int i = 1; i <= n; ++i) os << ",blow" << i;
  for (int i = 1; i <= n; ++i) os << ",region" << i;
  os << ",qp_status,flags\n";
  for (const TickRecord& r : trace.records) {
    os << format_g17(r.t);
    for (int i = 0; i < n; ++i) os << "," << format_g17(r.q(i));
    for (int i = 0; i < n; ++i) os << "," << format_g17(r.v(i));
    for (int j = 0; j < m; ++j) os << "," << format_g17(r.u(j));
    for (int i = 0; i < n; ++i) os << "," << format_g17(r.b_up(i));
    for (int i = 0; i < n; ++i) os << "," << format_g17(r.b_low(i));
    for (int i = 0; i < n; ++i) os << "," << region_name(r.regions[i]);
    os << "," << (r.qp_ran ? qp_status_name(r.qp_status) : "none");
    os << "," << r.flags << "\n";
  }
  return os.str();
}

void write_trace_csv(const SimTrace& trace, const std::string& path) {
  atomic_write_file(path, trace_csv(trace));
}

}  // namespace elsg
