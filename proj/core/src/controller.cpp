#include "elsg/controller.hpp"

#include <cmath>

#include "elsg/errors.hpp"

namespace elsg {

StackedConstraints build_constraints(const SystemModel& model, const Barrier& barrier,
                                     const Eigen::VectorXd& q_native,
                                     const Eigen::VectorXd& v_native, double margin) {
  const Eigen::VectorXd qc = model.constraint_pos(q_native);
  const Eigen::VectorXd vc = model.constraint_vel(q_native, v_native);
  const int n = barrier.dof();
  const int m = model.input_dim();
  if (qc.size() != n) throw DomainError("model/limit dimension mismatch");

  const Eigen::MatrixXd G = model.G(q_native);
  const Eigen::VectorXd drift =
      model.f1(q_native, v_native) + model.f2(q_native, v_native) + model.f3(q_native);
  const Eigen::VectorXd g_drift = G * drift;
  const auto& cfg = barrier.config();

  StackedConstraints out;
  out.A.resize(2 * n, m);
  out.b.resize(2 * n);
  for (int i = 0; i < n; ++i) {
    const double hu = barrier.h_up(i, qc(i));
    const double hl = barrier.h_low(i, qc(i));
    out.A.row(i) = -G.row(i);
    out.b(i) = -cfg.nu * cfg.beta.value(barrier.b_up(i, qc(i), vc(i))) + margin + g_drift(i) +
               cfg.gamma * cfg.alpha.derivative(hu) * vc(i);
    out.A.row(n + i) = G.row(i);
    out.b(n + i) = -cfg.nu * cfg.beta.value(barrier.b_low(i, qc(i), vc(i))) + margin -
                   g_drift(i) - cfg.gamma * cfg.alpha.derivative(hl) * vc(i);
  }
  return out;
}

Eigen::VectorXd explicit_safe_control(const SystemModel& model, const Barrier& barrier,
                                      const Eigen::VectorXd& q_native,
                                      const Eigen::VectorXd& v_native, double margin,
                                      std::vector<Region>* regions_out) {
  const Eigen::VectorXd qc = model.constraint_pos(q_native);
  const Eigen::VectorXd vc = model.constraint_vel(q_native, v_native);
  const int n = barrier.dof();
  const auto& cfg = barrier.config();

  Eigen::VectorXd mu = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd chi = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(n);
  if (regions_out) regions_out->assign(n, Region::kI);

  for (int i = 0; i < n; ++i) {
    const Region r = barrier.select_region(i, qc(i), vc(i));
    if (regions_out) (*regions_out)[i] = r;
    switch (r) {
      case Region::kI:
      case Region::kV:
      case Region::kVII:
        mu(i) = -cfg.gamma * cfg.alpha.derivative(barrier.h_up(i, qc(i))) * vc(i);
        break;
      case Region::kIV:
      case Region::kVI:
      case Region::kVIII:
        mu(i) = -cfg.gamma * cfg.alpha.derivative(barrier.h_low(i, qc(i))) * vc(i);
        break;
      case Region::kII:
      case Region::kIII:
        break;
    }
    if (r == Region::kV) chi(i) = cfg.nu * cfg.beta.value(barrier.b_up(i, qc(i), vc(i)));
    if (r == Region::kVI) chi(i) = -cfg.nu * cfg.beta.value(barrier.b_low(i, qc(i), vc(i)));
    switch (r) {
      case Region::kI:
      case Region::kII:
      case Region::kV:
        psi(i) = -margin;
        break;
      case Region::kIII:
      case Region::kIV:
      case Region::kVI:
        psi(i) = margin;
        break;
      default:
        break;
    }
  }

  const Eigen::VectorXd drift =
      model.f1(q_native, v_native) + model.f2(q_native, v_native) + model.f3(q_native);
  return model.G_pinv(q_native) * (mu + chi + psi) - drift;
}

ZcbfFilter::ZcbfFilter(std::shared_ptr<const SystemModel> model, Barrier barrier, QpOptions qp)
    : model_(std::move(model)), barrier_(std::move(barrier)), solver_(qp) {
  if (!model_) throw ConfigError("filter needs a model");
  if (model_->input_dim() != barrier_.spec().input_dim()) {
    throw ConfigError("torque limit count does not match the model input dimension");
  }
}

FilterOutcome ZcbfFilter::apply(const Eigen::VectorXd& q_native, const Eigen::VectorXd& v_native,
                                const Eigen::VectorXd& u_nominal, double margin,
                                bool enforce_domain) {
  if (enforce_domain) {
    barrier_.require_in_domain(model_->constraint_pos(q_native),
                               model_->constraint_vel(q_native, v_native));
  }
  const StackedConstraints rows = build_constraints(*model_, barrier_, q_native, v_native, margin);
  QpProblem qp;
  qp.g = u_nominal;
  qp.A = rows.A;
  qp.b = rows.b;
  qp.lo = -barrier_.spec().u_max;
  qp.hi = barrier_.spec().u_max;

  const QpResult sol = solver_.solve(qp, last_active_);
  FilterOutcome out;
  out.status = sol.status;
  out.active = sol.active;
  if (sol.status == QpStatus::kOptimal) {
    out.u = sol.u;
    last_active_ = sol.active;
  } else {
    out.fallback = true;
    out.u = explicit_safe_control(*model_, barrier_, q_native, v_native, margin);
    last_active_.clear();
  }
  return out;
}

Eigen::VectorXd SinusoidReference::q(double t) const {
  return offset.array() + amplitude.array() * (omega.array() * t).sin();
}

Eigen::VectorXd SinusoidReference::dq(double t) const {
  return amplitude.array() * omega.array() * (omega.array() * t).cos();
}

Eigen::VectorXd SinusoidReference::ddq(double t) const {
  return -amplitude.array() * omega.array().square() * (omega.array() * t).sin();
}

void SinusoidReference::validate() const {
  const auto n = amplitude.size();
  if (n == 0 || omega.size() != n || offset.size() != n) {
    throw ConfigError("reference amplitude/omega/offset sizes disagree");
  }
}

NominalController make_computed_torque(std::shared_ptr<const Planar2Dof> arm,
                                       SinusoidReference ref) {
  if (!arm) throw ConfigError("tracking law needs a model");
  ref.validate();
  if (ref.amplitude.size() != arm->dof()) {
    throw ConfigError("reference dimension does not match the model");
  }
  return [arm, ref](double t, const Eigen::VectorXd& q, const Eigen::VectorXd& v) {
    const Eigen::VectorXd e = q - ref.q(t);
    const Eigen::VectorXd edot = v - ref.dq(t);
    return (arm->inertia(q) * (ref.ddq(t) - edot - e) + arm->coriolis(q, v) * v).eval();
  };
}

}  // namespace elsg
