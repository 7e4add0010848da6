#pragma once

#include <memory>
#include <string>

#include "elsg/controller.hpp"
#include "elsg/planar_arm.hpp"
#include "elsg/sim.hpp"
#include "elsg/transformed.hpp"

namespace elsg {

// Optional change of constraint coordinates for a scenario.
struct MapSpec {
  bool enabled = false;
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  Eigen::Vector2d plane = Eigen::Vector2d::Zero();
  double sign = 1.0;
  Box native_box;
};

// Everything needed to synthesize parameters and run a catalog scenario.
struct ScenarioDefinition {
  std::string id;
  std::shared_ptr<const Planar2Dof> arm;      // tracking law always lives on the arm
  std::shared_ptr<const SystemModel> model;   // == arm, or the wrapped system
  MapSpec map;
  ConstraintSpec spec;
  ClassKFn alpha = ClassKFn::arctan();
  ClassKFn beta = ClassKFn::cubic();
  double delta0 = 0.0;
  double eta0 = 0.0;
  SinusoidReference reference;
  Eigen::VectorXd x0_q, x0_v;  // native coordinates
  double T = 0.001;
  double duration = 20.0;
  int substeps = 10;
  ControllerMode default_mode = ControllerMode::kZcbfSampled;
  MarginRule margin_rule = MarginRule::kEtaBar;
  double margin_value = 0.0;
};

// ids: s1-continuous, s1-sampled, s2-nonlinear
ScenarioDefinition make_scenario(const std::string& id);

}  // namespace elsg
