#pragma once

#include <atomic>
#include <functional>
#include <memory>

#include <Eigen/Dense>

#include "elsg/dynamics.hpp"

namespace elsg {

// Differentiable change of position coordinates c: native -> constraint space.
struct CoordinateMap {
  int dim = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> value;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;  // rows are gradients of c_i
  // time derivative of the jacobian contracted with the native velocity: (dJ/dt) v
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>
      jacobian_rate_times_vel;
};

// c1 = -1 + sign * |q - center|^2 (signed quadratic distance), c2 = plane . q
CoordinateMap ellipse_plane_map(const Eigen::Vector2d& center, const Eigen::Vector2d& plane,
                                double sign);

// Wraps a base model so that box constraints can be written on c(q) instead of q.
// All methods take native states; G/f1/f2/f3 describe the constraint-velocity dynamics
// dot(v_c) = G (f1 + f2 + f3 + u), while integration stays in native coordinates.
class TransformedSystem final : public SystemModel {
 public:
  TransformedSystem(std::shared_ptr<const SystemModel> base, CoordinateMap map, Box native_box,
                    double cond_limit = 1e8);

  int dof() const override { return base_->dof(); }
  int input_dim() const override { return base_->input_dim(); }

  Eigen::MatrixXd G(const Eigen::VectorXd& q) const override;
  Eigen::MatrixXd G_pinv(const Eigen::VectorXd& q) const override;
  Eigen::VectorXd f1(const Eigen::VectorXd& q, const Eigen::VectorXd& v) const override;
  Eigen::VectorXd f2(const Eigen::VectorXd& q, const Eigen::VectorXd& v) const override;
  Eigen::VectorXd f3(const Eigen::VectorXd& q) const override;

  Eigen::VectorXd constraint_pos(const Eigen::VectorXd& q) const override;
  Eigen::VectorXd constraint_vel(const Eigen::VectorXd& q, const Eigen::VectorXd& v) const override;
  Eigen::VectorXd native_vel(const Eigen::VectorXd& q,
                             const Eigen::VectorXd& v_constraint) const override;
  Eigen::VectorXd native_accel(const Eigen::VectorXd& q, const Eigen::VectorXd& v,
                               const Eigen::VectorXd& u) const override;

  void sample_positions(
      const Box& box, int per_axis,
      const std::function<void(const Eigen::VectorXd&, const Eigen::VectorXd&)>& fn) const override;
  Box native_position_box(const Box& constraint_box) const override;

  const SystemModel& base() const { return *base_; }
  double max_jacobian_cond() const { return max_cond_.load(); }

 private:
  Eigen::MatrixXd checked_jacobian(const Eigen::VectorXd& q) const;

  std::shared_ptr<const SystemModel> base_;
  CoordinateMap map_;
  Box native_box_;
  double cond_limit_;
  mutable std::atomic<double> max_cond_{0.0};
};

}  // namespace elsg
