#include "elsg/planar_arm.hpp"

#include <cmath>

#include "elsg/errors.hpp"

namespace elsg {

Eigen::MatrixXd Planar2Dof::inertia(const Eigen::VectorXd& q) const {
  const double c2 = std::cos(q(1));
  Eigen::Matrix2d M;
  if (p_.mass_mode == MassMode::kPointMassTip) {
    // links massless, all mass concentrated at the joints/tip
    const double a = p_.m1 * p_.l1 * p_.l1 + p_.m2 * (p_.l1 * p_.l1 + p_.l2 * p_.l2);
    const double b = p_.m2 * p_.l1 * p_.l2;
    const double d = p_.m2 * p_.l2 * p_.l2;
    M << a + 2.0 * b * c2, d + b * c2, d + b * c2, d;
  } else {
    // uniform slender rods, mass at link centers + rotational inertia
    const double lc1 = 0.5 * p_.l1, lc2 = 0.5 * p_.l2;
    const double I1 = p_.m1 * p_.l1 * p_.l1 / 12.0;
    const double I2 = p_.m2 * p_.l2 * p_.l2 / 12.0;
    const double a = I1 + I2 + p_.m1 * lc1 * lc1 + p_.m2 * (p_.l1 * p_.l1 + lc2 * lc2);
    const double b = p_.m2 * p_.l1 * lc2;
    const double d = I2 + p_.m2 * lc2 * lc2;
    M << a + 2.0 * b * c2, d + b * c2, d + b * c2, d;
  }
  return M;
}

Eigen::MatrixXd Planar2Dof::coriolis(const Eigen::VectorXd& q, const Eigen::VectorXd& v) const {
  const double s2 = std::sin(q(1));
  const double lc2 = (p_.mass_mode == MassMode::kPointMassTip) ? p_.l2 : 0.5 * p_.l2;
  const double h = -p_.m2 * p_.l1 * lc2 * s2;
  Eigen::Matrix2d C;
  C << h * v(1), h * (v(0) + v(1)), -h * v(0), 0.0;
  return C;
}

Eigen::VectorXd Planar2Dof::gravity_torque(const Eigen::VectorXd& q) const {
  if (p_.gravity == 0.0) return Eigen::Vector2d::Zero();
  const double g = p_.gravity;
  const double lc1 = (p_.mass_mode == MassMode::kPointMassTip) ? p_.l1 : 0.5 * p_.l1;
  const double lc2 = (p_.mass_mode == MassMode::kPointMassTip) ? p_.l2 : 0.5 * p_.l2;
  const double c1 = std::cos(q(0));
  const double c12 = std::cos(q(0) + q(1));
  Eigen::Vector2d tau;
  tau(0) = (p_.m1 * lc1 + p_.m2 * p_.l1) * g * c1 + p_.m2 * lc2 * g * c12;
  tau(1) = p_.m2 * lc2 * g * c12;
  return tau;
}

Eigen::MatrixXd Planar2Dof::G(const Eigen::VectorXd& q) const {
  Eigen::Matrix2d M = inertia(q);
  Eigen::Matrix2d Minv = M.inverse();
  if (!Minv.allFinite()) throw NumericError("singular inertia matrix");
  return Minv;
}

Eigen::MatrixXd Planar2Dof::G_pinv(const Eigen::VectorXd& q) const { return inertia(q); }

Eigen::VectorXd Planar2Dof::f1(const Eigen::VectorXd& q, const Eigen::VectorXd& v) const {
  return -coriolis(q, v) * v;
}

Eigen::VectorXd Planar2Dof::f2(const Eigen::VectorXd&, const Eigen::VectorXd& v) const {
  return -p_.damping.cwiseProduct(v);
}

Eigen::VectorXd Planar2Dof::f3(const Eigen::VectorXd& q) const { return -gravity_torque(q); }

}  // namespace elsg
