#pragma once

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "elsg/scenario.hpp"
#include "elsg/sim.hpp"
#include "elsg/synthesis.hpp"

namespace elsg {

// Flat `key: value` run description.  Every field is optional; resolve()
// layers the provided values over the named scenario's defaults (or over
// nothing, in which case the model/constraint keys become mandatory).
struct RunConfig {
  std::optional<std::string> scenario;
  std::optional<std::string> controller;  // nominal-only | zcbf-continuous | zcbf-sampled
  std::optional<std::string> alpha;       // linear:<s> | atan | cubic
  std::optional<std::string> beta;

  // arm
  std::optional<std::string> mass_mode;  // point-mass-at-tip | uniform-rod
  std::optional<double> l1, l2, m1, m2;
  std::optional<Eigen::VectorXd> damping;
  std::optional<double> gravity;

  // constraint coordinates / boxes
  std::optional<std::string> map;  // none | ellipse-plane
  std::optional<Eigen::VectorXd> map_center, map_plane;
  std::optional<double> map_sign;
  std::optional<Eigen::VectorXd> native_q_min, native_q_max;
  std::optional<Eigen::VectorXd> q_min, q_max, v_max, u_max;

  // tracking task
  std::optional<Eigen::VectorXd> ref_amplitude, ref_omega, ref_offset;
  std::optional<Eigen::VectorXd> x0_q, x0_v;

  // synthesis knobs
  std::optional<double> delta0, eta0, epsilon_fraction;
  std::optional<int> grid_per_axis, delta_grid;
  std::optional<std::string> gamma_rule;  // max-gamma | fraction:<f>
  std::optional<std::string> nu_rule;     // nu1 | nu2 | midpoint-log

  // simulation
  std::optional<double> T, duration;
  std::optional<int> substeps;
  std::optional<std::string> sampling_margin;  // eta-of-T | eta-bar | <number>

  // explicit filter parameters (normally produced by `synth --params-out`)
  std::optional<double> gamma, nu, delta, eta_bar;

  // outputs
  std::optional<std::string> trace_out, plots_out, report_out;
};

// Parses config text.  Lines starting with '#' (after leading spaces) and
// blank lines are skipped; everything else must be `key: value`.  Unknown or
// duplicate keys raise ConfigError naming the offending line.
RunConfig parse_config(const std::string& text);

// Reads and parses a config file; parse errors are prefixed with the path.
RunConfig load_config(const std::string& path);

// Serializes only the fields that are set, in a fixed order.  Feeding the
// result back through parse_config reproduces the config exactly.
std::string emit_config(const RunConfig& cfg);

// A config lowered into runnable objects.
struct ResolvedRun {
  ScenarioDefinition def;  // model, constraints, task, timing
  ControllerMode mode = ControllerMode::kZcbfSampled;
  SynthesisOptions synth;
  std::optional<ZcbfParams> params;  // present iff gamma, nu and delta are all set
  std::optional<std::string> trace_out, plots_out, report_out;
};

ResolvedRun resolve(const RunConfig& cfg);

}  // namespace elsg
