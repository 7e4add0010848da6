#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "elsg/barrier.hpp"
#include "elsg/controller.hpp"
#include "elsg/dynamics.hpp"
#include "elsg/synthesis.hpp"

namespace elsg {

enum class ControllerMode { kNominalOnly, kZcbfContinuous, kZcbfSampled };

const char* controller_mode_name(ControllerMode m);
ControllerMode parse_controller_mode(const std::string& token);

// how the row-tightening margin of the sampled law is chosen
enum class MarginRule { kEtaOfT, kEtaBar, kNumber };

const char* margin_rule_name(MarginRule r);

// bitmask over the three monitored sets
enum SafetyFlag : unsigned { kFlagPosition = 1u, kFlagVelocity = 2u, kFlagInput = 4u };

struct SafetyReport {
  unsigned flags = 0;
  double worst_q = 0.0;  // largest excess outside the position box
  double worst_v = 0.0;
  double worst_u = 0.0;

  void merge(const SafetyReport& other);
};

// Violation check against the tight (un-inflated) boxes; boundary points are
// admissible. q/v in constraint coordinates.
SafetyReport monitor_safety(const ConstraintSpec& spec, const Eigen::VectorXd& q_c,
                            const Eigen::VectorXd& v_c, const Eigen::VectorXd& u,
                            double tol = 1e-12);

struct TickRecord {
  double t = 0.0;
  Eigen::VectorXd q, v;  // constraint coordinates
  Eigen::VectorXd u;     // input held (or first applied) over [t, t+T)
  Eigen::VectorXd b_up, b_low;
  std::vector<Region> regions;
  QpStatus qp_status = QpStatus::kOptimal;
  bool qp_ran = false;  // false => status column renders as "none"
  bool fallback = false;
  unsigned flags = 0;  // OR of the monitor over the hold interval
};

struct SimTrace {
  std::string scenario;
  ControllerMode mode = ControllerMode::kZcbfSampled;
  double T = 0.0;
  int substeps = 0;
  std::vector<TickRecord> records;  // one per tick boundary, 0..N

  unsigned flags = 0;   // OR over all records
  SafetyReport worst;   // largest violation magnitudes seen at any substep
  bool failed = false;  // left the inflated operating set in a filtered mode
  bool left_domain = false;
  double first_exit_time = -1.0;
  bool aborted = false;  // integration produced a non-finite state
  std::string abort_reason;
};

struct SimSetup {
  std::shared_ptr<const SystemModel> model;
  ConstraintSpec spec;
  BarrierConfig params;
  ControllerMode mode = ControllerMode::kZcbfSampled;
  NominalController nominal;

  double T = 0.001;
  double duration = 20.0;
  int substeps = 10;
  Eigen::VectorXd x0_q, x0_v;  // native coordinates

  MarginRule margin_rule = MarginRule::kEtaOfT;
  double margin_value = 0.0;              // with kNumber
  std::optional<HoldMargin> hold;         // required by kEtaOfT
  std::string scenario;

  // test hook, called after every substep with (t, q_native, v_native, u_applied)
  std::function<void(double, const Eigen::VectorXd&, const Eigen::VectorXd&,
                     const Eigen::VectorXd&)>
      observer;
};

// Fixed-step closed loop: classical 4th-order integration of the native state,
// `substeps` steps per hold interval. The filtered input is recomputed once per
// tick (sampled mode) or every substep (continuous mode); violations are
// recorded and the run continues, so failed configurations produce full traces.
SimTrace run_closed_loop(const SimSetup& setup);

std::string trace_csv(const SimTrace& trace);
void write_trace_csv(const SimTrace& trace, const std::string& path);

}  // namespace elsg
