#pragma once

#include <Eigen/Dense>

#include "elsg/dynamics.hpp"

namespace elsg {

// Two-revolute-joint planar manipulator in velocity-affine form.
class Planar2Dof final : public SystemModel {
 public:
  enum class MassMode { kPointMassTip, kUniformRod };

  struct Params {
    double l1 = 1.0;
    double l2 = 1.0;
    double m1 = 1.0;
    double m2 = 1.0;
    Eigen::Vector2d damping = Eigen::Vector2d::Constant(0.001);
    double gravity = 0.0;
    MassMode mass_mode = MassMode::kPointMassTip;
  };

  explicit Planar2Dof(Params p) : p_(p) {}

  int dof() const override { return 2; }
  int input_dim() const override { return 2; }

  Eigen::MatrixXd inertia(const Eigen::VectorXd& q) const;
  Eigen::MatrixXd coriolis(const Eigen::VectorXd& q, const Eigen::VectorXd& v) const;
  Eigen::VectorXd gravity_torque(const Eigen::VectorXd& q) const;

  Eigen::MatrixXd G(const Eigen::VectorXd& q) const override;
  Eigen::MatrixXd G_pinv(const Eigen::VectorXd& q) const override;
  Eigen::VectorXd f1(const Eigen::VectorXd& q, const Eigen::VectorXd& v) const override;
  Eigen::VectorXd f2(const Eigen::VectorXd& q, const Eigen::VectorXd& v) const override;
  Eigen::VectorXd f3(const Eigen::VectorXd& q) const override;

  const Params& params() const { return p_; }

 private:
  Params p_;
};

}  // namespace elsg
