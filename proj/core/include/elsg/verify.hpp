#pragma once

#include <memory>
#include <string>
#include <vector>

#include "elsg/barrier.hpp"
#include "elsg/dynamics.hpp"

namespace elsg {

struct PropertyResult {
  std::string name;
  bool pass = false;
  double worst_margin = 0.0;  // smallest slack observed; >= -tol means pass
  double tol = 0.0;
  long states = 0;  // states / instances examined
  std::string detail;
  std::vector<std::string> counterexamples;  // first few failing states
};

struct VerifyOptions {
  int grid_per_axis = 50;  // positions per joint in the state sweep
  int vel_grid = 50;       // velocities per joint at each position
  int random_states = 10000;
  int scalar_grid = 2001;
  unsigned seed = 0x5eedu;
  double sweep_tol = 1e-9;    // slack allowed in the sweep properties
  double random_tol = 1e-8;   // tolerance of the sampled identities
  double exact_tol = 1e-12;   // tolerance of the algebraic identity
};

// State-space sweep plus sampled identities for one configured system.
// Properties reported (in order):
//   input-authority          control authority margin over the inflated box
//   jump-margin              nu*beta(rho_bar) - gamma^2*L*a - 2*eta_bar >= 0
//   explicit-control-saturation   |u~_j| <= u_max_j over the swept domain
//   explicit-control-rows    stacked inequalities hold at u~ over the sweep
//   qp-feasible-everywhere   the filter QP is solvable at every swept state
//   velocity-bound           |v|_inf <= gamma*alpha(2*delta + width) on samples
//   gap-identity             b_up + b_low = 2*rho on samples
//   zeta-closed-form         scanned inflation floor matches the family formula
std::vector<PropertyResult> run_property_suite(std::shared_ptr<const SystemModel> model,
                                               const Barrier& barrier,
                                               const VerifyOptions& opts = {});

// Random saturated-projection problems solved twice: active-set solver against
// the exhaustive reference, plus invariance under duplicated rows.
std::vector<PropertyResult> run_qp_random_suite(int instances = 1000, unsigned seed = 0x5eedu,
                                                double tol = 1e-8, double dup_tol = 1e-10);

bool all_pass(const std::vector<PropertyResult>& results);

// one line per property: "PASS name worst margin ..." / "FAIL ..."
std::string format_results(const std::vector<PropertyResult>& results);

}  // namespace elsg
