#include "elsg/transformed.hpp"

#include <cmath>
#include <utility>

#include "elsg/errors.hpp"

namespace elsg {

CoordinateMap ellipse_plane_map(const Eigen::Vector2d& center, const Eigen::Vector2d& plane,
                                double sign) {
  CoordinateMap m;
  m.dim = 2;
  m.value = [center, plane, sign](const Eigen::VectorXd& q) {
    Eigen::Vector2d c;
    c(0) = -1.0 + sign * (Eigen::Vector2d(q) - center).squaredNorm();
    c(1) = plane.dot(q);
    return Eigen::VectorXd(c);
  };
  m.jacobian = [center, plane, sign](const Eigen::VectorXd& q) {
    Eigen::Matrix2d J;
    J.row(0) = 2.0 * sign * (Eigen::Vector2d(q) - center).transpose();
    J.row(1) = plane.transpose();
    return Eigen::MatrixXd(J);
  };
  m.jacobian_rate_times_vel = [sign](const Eigen::VectorXd&, const Eigen::VectorXd& v) {
    Eigen::Vector2d r;
    r(0) = 2.0 * sign * v.squaredNorm();
    r(1) = 0.0;
    return Eigen::VectorXd(r);
  };
  return m;
}

TransformedSystem::TransformedSystem(std::shared_ptr<const SystemModel> base, CoordinateMap map,
                                     Box native_box, double cond_limit)
    : base_(std::move(base)), map_(std::move(map)), native_box_(std::move(native_box)),
      cond_limit_(cond_limit) {
  if (map_.dim != base_->dof()) throw DomainError("coordinate map dimension mismatch");
}

Eigen::MatrixXd TransformedSystem::checked_jacobian(const Eigen::VectorXd& q) const {
  Eigen::MatrixXd J = map_.jacobian(q);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  const double cond = (smin > 0.0) ? smax / smin : std::numeric_limits<double>::infinity();
  double prev = max_cond_.load(std::memory_order_relaxed);
  while (cond > prev && !max_cond_.compare_exchange_weak(prev, cond)) {
  }
  if (!(cond < cond_limit_)) {
    throw NumericError("coordinate map jacobian is near-singular (cond " + std::to_string(cond) +
                       ")");
  }
  return J;
}

Eigen::MatrixXd TransformedSystem::G(const Eigen::VectorXd& q) const {
  return checked_jacobian(q) * base_->G(q);
}

Eigen::MatrixXd TransformedSystem::G_pinv(const Eigen::VectorXd& q) const {
  return base_->G_pinv(q) * checked_jacobian(q).inverse();
}

Eigen::VectorXd TransformedSystem::f1(const Eigen::VectorXd& q, const Eigen::VectorXd& v) const {
  const Eigen::MatrixXd J = checked_jacobian(q);
  return base_->f1(q, v) + base_->G_pinv(q) * J.inverse() * map_.jacobian_rate_times_vel(q, v);
}

Eigen::VectorXd TransformedSystem::f2(const Eigen::VectorXd& q, const Eigen::VectorXd& v) const {
  return base_->f2(q, v);
}

Eigen::VectorXd TransformedSystem::f3(const Eigen::VectorXd& q) const { return base_->f3(q); }

Eigen::VectorXd TransformedSystem::constraint_pos(const Eigen::VectorXd& q) const {
  return map_.value(q);
}

Eigen::VectorXd TransformedSystem::constraint_vel(const Eigen::VectorXd& q,
                                                  const Eigen::VectorXd& v) const {
  return checked_jacobian(q) * v;
}

Eigen::VectorXd TransformedSystem::native_vel(const Eigen::VectorXd& q,
                                              const Eigen::VectorXd& v_constraint) const {
  return checked_jacobian(q).inverse() * v_constraint;
}

Eigen::VectorXd TransformedSystem::native_accel(const Eigen::VectorXd& q, const Eigen::VectorXd& v,
                                                const Eigen::VectorXd& u) const {
  return eval_dynamics(*base_, q, v, u);
}

void TransformedSystem::sample_positions(
    const Box& box, int per_axis,
    const std::function<void(const Eigen::VectorXd&, const Eigen::VectorXd&)>& fn) const {
  // sweep the native window; keep points whose image lands in the requested box
  base_->sample_positions(native_box_, per_axis,
                          [&](const Eigen::VectorXd& qn, const Eigen::VectorXd&) {
                            const Eigen::VectorXd qc = map_.value(qn);
                            if (box.contains(qc, 1e-12)) fn(qn, qc);
                          });
}

Box TransformedSystem::native_position_box(const Box&) const { return native_box_; }

}  // namespace elsg
