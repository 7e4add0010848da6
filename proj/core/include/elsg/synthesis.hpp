#pragma once

#include <Eigen/Dense>
#include <string>

#include "elsg/barrier.hpp"
#include "elsg/classk.hpp"
#include "elsg/dynamics.hpp"

namespace elsg {

struct ZcbfParams {
  double gamma = 1.0;
  double nu = 1.0;
  double delta = 0.0;
  double eta_bar = 0.0;
};

BarrierConfig make_barrier_config(const ClassKFn& alpha, const ClassKFn& beta,
                                  const ZcbfParams& p);

enum class GammaRule { kMaxGamma, kFraction };
enum class NuRule { kNu1, kNu2, kMidpointLog };

struct SelectionPolicy {
  GammaRule gamma_rule = GammaRule::kMaxGamma;
  double gamma_fraction = 1.0;  // only with kFraction, in (0, 1]
  NuRule nu_rule = NuRule::kMidpointLog;
};

struct SynthesisOptions {
  double epsilon_fraction = 0.7;  // share of the authority margin spent on epsilon
  int grid_per_axis = 200;        // position grids (authority, gamma2, constants)
  int delta_grid = 100;           // sweep of [0, delta0]
  int scalar_grid = 2001;         // 1-D shaping-function sweeps
  SelectionPolicy policy;
  EstimateOptions estimate;
};

// Accumulated drift bound over one zero-order-hold interval,
// eta(T) = gain * (exp(rate * T) - 1).
struct HoldMargin {
  double gain = 0.0;
  double rate = 0.0;
  double eta(double T) const;
  double inverse(double eta_target) const;  // exact, eta_target >= 0
};

struct AuthorityCheck {
  double epsilon_max = 0.0;   // largest margin that still leaves torque authority
  Eigen::VectorXd worst_q;    // native position of the binding grid point
  int worst_channel = -1;
};

// Torque-authority sweep over the inflated position box. Throws
// AssumptionError naming the binding point when no positive margin exists.
AuthorityCheck verify_authority(const SystemModel& model, const ConstraintSpec& spec,
                                double delta0, double eta0, int grid_per_axis);

// Velocity-containment bound on the barrier gain.
double gamma1_star(const ConstraintSpec& spec, const ClassKFn& alpha, double delta0);

// Actuation bound on the gain: worst positive root of the per-channel quadratic
// over the inflated position box.
double gamma2_star(const SystemModel& model, const ConstraintSpec& spec, const ClassKFn& alpha,
                   double delta0, double eta0, double epsilon, const DynamicsConstants& consts,
                   int grid_per_axis);

// Non-conflict bound on the gain.
double gamma3_star(const ConstraintSpec& spec, const ClassKFn& alpha, double delta0,
                   double epsilon);

struct DeltaStarResult {
  double delta_star = 0.0;  // largest certified inflation (> 0)
  double chosen = 0.0;      // inflation actually used (min(delta0, delta_star), or 0)
};

// Certifies |beta(zeta^d)| < beta(rho_bar^d) down the inflation grid.
DeltaStarResult delta_star(const ConstraintSpec& spec, const ClassKFn& alpha,
                           const ClassKFn& beta, double gamma, double delta0, int delta_grid,
                           int scalar_grid);

struct SynthesisReport {
  // inputs
  ClassKFn alpha = ClassKFn::arctan();
  ClassKFn beta = ClassKFn::cubic();
  double delta0 = 0.0;
  double eta0 = 0.0;

  // authority margin
  double epsilon_max = 0.0;
  double epsilon = 0.0;

  // certified bounds
  double gamma1 = 0.0, gamma2 = 0.0, gamma3 = 0.0;
  double delta_star = 0.0;
  double nu1 = 0.0, nu2 = 0.0;  // nu2 = +inf when the chosen inflation is zero
  double eta_star = 0.0;

  ZcbfParams chosen;

  // derived constants (a and the alpha Lipschitz constant use delta0;
  // rho_bar / zeta / b_max use the chosen inflation)
  double a = 0.0;
  double v_bar = 0.0;
  double alpha_lipschitz = 0.0;
  double rho_bar = 0.0;
  double zeta = 0.0;
  double b_max = 0.0;

  DynamicsConstants constants;
  double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0, c5 = 0.0;
  HoldMargin hold;
  double t_max = 0.0;  // largest hold time whose drift fits inside eta_bar

  int grid_per_axis = 0;
  int delta_grid = 0;
  int scalar_grid = 0;

  MarginCheck alpha_margin;
  SuperadditivityCheck beta_check;

  std::string format() const;  // full structured-text rendering
};

// End-to-end parameter design: margin checks, dynamics constants, authority
// sweep, the three gain bounds, inflation certification, the restoring-gain
// interval, and the sampling margin, in that order. Throws AssumptionError /
// SynthesisError with diagnostics when a stage cannot certify.
SynthesisReport run_algorithm1(const SystemModel& model, const ConstraintSpec& spec,
                               const ClassKFn& alpha, const ClassKFn& beta, double delta0,
                               double eta0, const SynthesisOptions& opts = {});

}  // namespace elsg
