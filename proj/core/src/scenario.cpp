#include "elsg/scenario.hpp"

#include <cmath>

#include "elsg/errors.hpp"

namespace elsg {
namespace {

constexpr double kPi = 3.14159265358979323846;

ScenarioDefinition common_arm() {
  ScenarioDefinition s;
  Planar2Dof::Params p;
  p.l1 = p.l2 = 1.0;
  p.m1 = p.m2 = 1.0;
  p.damping = Eigen::Vector2d::Constant(0.001);
  p.gravity = 0.0;
  p.mass_mode = Planar2Dof::MassMode::kUniformRod;
  s.arm = std::make_shared<Planar2Dof>(p);
  s.model = s.arm;
  s.spec.v_max = Eigen::Vector2d::Constant(1.5);
  s.spec.u_max = Eigen::Vector2d(18.0, 10.0);
  s.alpha = ClassKFn::arctan();
  s.beta = ClassKFn::cubic();
  s.T = 0.001;
  s.duration = 20.0;
  s.substeps = 10;
  s.x0_v = Eigen::Vector2d::Zero();
  s.margin_rule = MarginRule::kEtaBar;
  return s;
}

ScenarioDefinition scenario_s1() {
  ScenarioDefinition s = common_arm();
  s.spec.q_min = Eigen::Vector2d(-kPi / 2.0, kPi / 2.0);
  s.spec.q_max = Eigen::Vector2d(kPi / 2.0, 5.0 * kPi / 6.0);
  s.reference.amplitude = Eigen::Vector2d(3.4708, 2.6236);
  s.reference.omega = Eigen::Vector2d::Constant(1.3);
  s.reference.offset = Eigen::Vector2d(0.0, 2.0944);
  s.x0_q = Eigen::Vector2d(0.0, 2.0 * kPi / 3.0);
  return s;
}

}  // namespace

ScenarioDefinition make_scenario(const std::string& id) {
  if (id == "s1-continuous") {
    ScenarioDefinition s = scenario_s1();
    s.id = id;
    s.delta0 = 0.1;
    s.eta0 = 0.0;
    s.default_mode = ControllerMode::kZcbfContinuous;
    return s;
  }
  if (id == "s1-sampled") {
    ScenarioDefinition s = scenario_s1();
    s.id = id;
    s.delta0 = 0.01;
    s.eta0 = 7.0;
    s.default_mode = ControllerMode::kZcbfSampled;
    return s;
  }
  if (id == "s2-nonlinear") {
    ScenarioDefinition s = common_arm();
    s.id = id;
    s.spec.q_min = Eigen::Vector2d(8.0, 1.7);
    s.spec.q_max = Eigen::Vector2d(12.0, 2.5);
    s.map.enabled = true;
    s.map.center = Eigen::Vector2d(5.0, 0.0);
    s.map.plane = Eigen::Vector2d(0.1, 1.0);
    s.map.sign = 1.0;
    s.map.native_box.lo = Eigen::Vector2d(1.4, 1.1);
    s.map.native_box.hi = Eigen::Vector2d(3.4, 2.6);
    s.model = std::make_shared<TransformedSystem>(
        s.arm, ellipse_plane_map(s.map.center, s.map.plane, s.map.sign), s.map.native_box);
    s.delta0 = 0.01;
    s.eta0 = 8.0;
    s.reference.amplitude = Eigen::Vector2d(0.5, 0.5);
    s.reference.omega = Eigen::Vector2d(0.5, 1.0);
    s.reference.offset = Eigen::Vector2d(0.8, 2.0);
    s.x0_q = Eigen::Vector2d(2.5, 2.0);
    s.default_mode = ControllerMode::kZcbfSampled;
    return s;
  }
  throw ConfigError("unknown scenario '" + id + "'");
}

}  // namespace elsg
