#pragma once

#include <string>

#include <Eigen/Dense>

#include "elsg/classk.hpp"
#include "elsg/util.hpp"

namespace elsg {

// Box limits on position, velocity, and torque (lower bounds are the negatives
// of v_max / u_max; the position box is two-sided).
struct ConstraintSpec {
  Eigen::VectorXd q_min, q_max, v_max, u_max;

  int dof() const { return static_cast<int>(q_min.size()); }
  int input_dim() const { return static_cast<int>(u_max.size()); }
  double width(int i) const { return q_max(i) - q_min(i); }
  double max_width() const { return (q_max - q_min).cwiseAbs().maxCoeff(); }
  Box position_box(double delta = 0.0) const;
  void validate() const;  // throws ConfigError on a malformed box
};

struct BarrierConfig {
  ClassKFn alpha = ClassKFn::arctan();
  ClassKFn beta = ClassKFn::cubic();
  double gamma = 1.0;
  double nu = 1.0;
  double delta = 0.0;
  double eta_bar = 0.0;

  void validate() const;
};

// per-joint operating regions of the explicit feedback (ordered as in the selector)
enum class Region { kI = 1, kII, kIII, kIV, kV, kVI, kVII, kVIII };

const char* region_name(Region r);

// Paired barrier functions b_up = -v + gamma*alpha(h_up), b_low = v + gamma*alpha(h_low)
// per joint, with a delta-inflated operating domain.
class Barrier {
 public:
  Barrier(ConstraintSpec spec, BarrierConfig cfg);

  int dof() const { return spec_.dof(); }
  const ConstraintSpec& spec() const { return spec_; }
  const BarrierConfig& config() const { return cfg_; }

  double h_up(int i, double qi) const { return spec_.q_max(i) - qi; }
  double h_low(int i, double qi) const { return qi - spec_.q_min(i); }

  double b_up(int i, double qi, double vi) const;
  double b_low(int i, double qi, double vi) const;
  double b_up_shifted(int i, double qi, double vi) const;   // uses h_up + delta
  double b_low_shifted(int i, double qi, double vi) const;  // uses h_low + delta

  // level that splits the two barriers: b_up + b_low = 2*rho
  double rho(int i, double qi) const;

  bool joint_in_domain(int i, double qi, double vi, double slack = 0.0) const;
  bool in_domain(const Eigen::VectorXd& q, const Eigen::VectorXd& v, double slack = 0.0) const;
  // throws DomainError naming the first violated inequality
  void require_in_domain(const Eigen::VectorXd& q, const Eigen::VectorXd& v,
                         double slack = 1e-9) const;
  // human-readable description of the worst violated inequality ("" if inside)
  std::string domain_violation(const Eigen::VectorXd& q, const Eigen::VectorXd& v,
                               double slack = 0.0) const;

  // region membership plus the domain check (throws DomainError outside)
  Region classify(int i, double qi, double vi, double tol = 1e-9) const;
  // the bare selector, usable on any state (fallback feedback after an exit)
  Region select_region(int i, double qi, double vi, double tol = 1e-9) const;

  double a_constant() const;      // alpha(2*delta + max box width)
  double velocity_bound() const;  // gamma * a_constant()

  // certified floor of rho over the inflated position interval, per joint 1-D sweep
  double rho_lower_bound(int grid = 2001) const;
  // most negative barrier value reachable in the inflated domain (<= 0, zero when delta = 0)
  double zeta(int grid = 2001) const;
  // exact values for the linear / arctangent / cubic families
  double zeta_closed_form() const;
  // largest barrier value attained in the inflated domain (for Lipschitz ranges)
  double b_max(int grid = 2001) const;

 private:
  ConstraintSpec spec_;
  BarrierConfig cfg_;
};

}  // namespace elsg
