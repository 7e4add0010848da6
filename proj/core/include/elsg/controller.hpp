#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

#include "elsg/barrier.hpp"
#include "elsg/dynamics.hpp"
#include "elsg/planar_arm.hpp"
#include "elsg/qp.hpp"

namespace elsg {

// The 2n affine safety rows A u >= b at the current state: upper rows -G,
// lower rows +G, with the drift, the restoring term, and the shaping slope
// folded into b. `margin` is the uniform tightening added to every row.
struct StackedConstraints {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};

StackedConstraints build_constraints(const SystemModel& model, const Barrier& barrier,
                                     const Eigen::VectorXd& q_native,
                                     const Eigen::VectorXd& v_native, double margin);

// Closed-form feedback assembled per joint from the operating region. It
// satisfies every safety row by construction (with equality on the binding
// side in the recovery regions), so it doubles as the fallback input whenever
// the filter's projection is reported infeasible.
Eigen::VectorXd explicit_safe_control(const SystemModel& model, const Barrier& barrier,
                                      const Eigen::VectorXd& q_native,
                                      const Eigen::VectorXd& v_native, double margin,
                                      std::vector<Region>* regions_out = nullptr);

struct FilterOutcome {
  Eigen::VectorXd u;
  QpStatus status = QpStatus::kOptimal;
  bool fallback = false;    // explicit feedback replaced the projection
  std::vector<int> active;  // active rows of the last solve (warm-start seed)
};

// Minimally invasive safety filter: projects the nominal input onto the
// stacked safety rows inside the torque box.
class ZcbfFilter {
 public:
  ZcbfFilter(std::shared_ptr<const SystemModel> model, Barrier barrier, QpOptions qp = {});

  FilterOutcome apply(const Eigen::VectorXd& q_native, const Eigen::VectorXd& v_native,
                      const Eigen::VectorXd& u_nominal, double margin,
                      bool enforce_domain = true);

  const Barrier& barrier() const { return barrier_; }
  const SystemModel& model() const { return *model_; }

 private:
  std::shared_ptr<const SystemModel> model_;
  Barrier barrier_;
  QpSolver solver_;
  std::vector<int> last_active_;
};

// componentwise  offset + amplitude .* sin(omega * t)
struct SinusoidReference {
  Eigen::VectorXd amplitude, omega, offset;
  Eigen::VectorXd q(double t) const;
  Eigen::VectorXd dq(double t) const;
  Eigen::VectorXd ddq(double t) const;
  void validate() const;
};

using NominalController =
    std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& q, const Eigen::VectorXd& v)>;

// Inverse-dynamics tracking law around the reference, deliberately left
// unsaturated so the filter has something to push back against.
NominalController make_computed_torque(std::shared_ptr<const Planar2Dof> arm,
                                       SinusoidReference ref);

}  // namespace elsg
