#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>

#include "elsg/util.hpp"

namespace elsg {

// Certified overapproximations of the model bounds used by parameter
// synthesis. Estimated by grid/random sweeps; each field must dominate its
// defining quotient on fresh samples.
struct DynamicsConstants {
  double k_c = 0.0;        // ||f1(q,v)|| <= k_c ||v||^2
  Eigen::VectorXd f_bound; // |e_j^T f2(q,v)| <= f_bound(j) ||v||
  double k_m_inf = 0.0;    // max ||G(q)||_inf over the position box
  double k_g = 0.0;        // max ||f3(q)||_inf over the position box
  double lip_drift = 0.0;  // Lipschitz bound of (q,v) -> G(q)(f1+f2+f3)
  double lip_G = 0.0;      // Lipschitz bound of q -> G(q)
};

// Second-order system  qc' = vc,  vc' = G(qc)(f1 + f2 + f3 + u)  written in the
// coordinates the box constraints live in ("constraint coordinates"). Methods
// take the *native* state used for integration; for plain models the two
// coincide, for wrapped models the constraint image is exposed separately.
class SystemModel {
 public:
  virtual ~SystemModel() = default;

  virtual int dof() const = 0;        // n, constraint coordinates
  virtual int input_dim() const = 0;  // m

  virtual Eigen::MatrixXd G(const Eigen::VectorXd& q) const = 0;       // n x m
  virtual Eigen::MatrixXd G_pinv(const Eigen::VectorXd& q) const = 0;  // m x n, G * G_pinv = I
  virtual Eigen::VectorXd f1(const Eigen::VectorXd& q, const Eigen::VectorXd& v) const = 0;
  virtual Eigen::VectorXd f2(const Eigen::VectorXd& q, const Eigen::VectorXd& v) const = 0;
  virtual Eigen::VectorXd f3(const Eigen::VectorXd& q) const = 0;

  // Constraint image of a native state; identity unless overridden.
  virtual Eigen::VectorXd constraint_pos(const Eigen::VectorXd& q) const { return q; }
  virtual Eigen::VectorXd constraint_vel(const Eigen::VectorXd& q,
                                         const Eigen::VectorXd& v) const {
    (void)q;
    return v;
  }
  // Native velocity realizing a requested constraint velocity at native q.
  virtual Eigen::VectorXd native_vel(const Eigen::VectorXd& q,
                                     const Eigen::VectorXd& v_constraint) const {
    (void)q;
    return v_constraint;
  }

  // Acceleration of the native coordinates under input u (integration path).
  virtual Eigen::VectorXd native_accel(const Eigen::VectorXd& q, const Eigen::VectorXd& v,
                                       const Eigen::VectorXd& u) const;

  // Enumerate native positions whose constraint image lies in `box`, on a grid
  // with `per_axis` points per native axis.
  virtual void sample_positions(
      const Box& box, int per_axis,
      const std::function<void(const Eigen::VectorXd& q_native,
                               const Eigen::VectorXd& q_constraint)>& fn) const;

  // Native-coordinate domain that covers the preimage of `box`.
  virtual Box native_position_box(const Box& box) const { return box; }
};

// Constraint-space acceleration G(q)(f1+f2+f3+u) at a native state.
Eigen::VectorXd eval_dynamics(const SystemModel& model, const Eigen::VectorXd& q,
                              const Eigen::VectorXd& v, const Eigen::VectorXd& u);

struct EstimateOptions {
  int grid_per_axis = 200;    // position grid
  int vel_directions = 64;    // unit velocity directions (n = 2)
  double vel_cap = 1.5;       // |v|_inf range for Lipschitz sampling
  int lipschitz_samples = 20000;
  unsigned seed = 1;
  double sup_inflation = 1.005;   // safety factor on smooth sup-type constants
  double lip_inflation = 1.2;     // safety factor on finite-difference quotients
};

// Grid/random estimation of DynamicsConstants over the (already inflated)
// constraint-space position box. Velocity-direction grids include the
// coordinate axes, so bounds that are attained on an axis come out exact.
DynamicsConstants estimate_constants(const SystemModel& model, const Box& position_box,
                                     const EstimateOptions& opts = {});

}  // namespace elsg
