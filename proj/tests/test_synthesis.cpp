#include <cmath>
#include <memory>

#include "doctest.h"
#include "elsg/errors.hpp"
#include "elsg/scenario.hpp"
#include "elsg/synthesis.hpp"

using namespace elsg;

namespace {

// double integrator on one axis: G = 1, no drift
struct Integrator1Dof final : SystemModel {
  int dof() const override { return 1; }
  int input_dim() const override { return 1; }
  Eigen::MatrixXd G(const Eigen::VectorXd&) const override {
    return Eigen::MatrixXd::Identity(1, 1);
  }
  Eigen::MatrixXd G_pinv(const Eigen::VectorXd&) const override {
    return Eigen::MatrixXd::Identity(1, 1);
  }
  Eigen::VectorXd f1(const Eigen::VectorXd&, const Eigen::VectorXd&) const override {
    return Eigen::VectorXd::Zero(1);
  }
  Eigen::VectorXd f2(const Eigen::VectorXd&, const Eigen::VectorXd&) const override {
    return Eigen::VectorXd::Zero(1);
  }
  Eigen::VectorXd f3(const Eigen::VectorXd&) const override {
    return Eigen::VectorXd::Zero(1);
  }
};

ConstraintSpec integrator_spec() {
  ConstraintSpec s;
  s.q_min = Eigen::VectorXd::Zero(1);
  s.q_max = Eigen::VectorXd::Ones(1);
  s.v_max = Eigen::VectorXd::Ones(1);
  s.u_max = Eigen::VectorXd::Ones(1);
  return s;
}

DynamicsConstants zero_constants() {
  DynamicsConstants c;
  c.f_bound = Eigen::VectorXd::Zero(1);
  return c;
}

}  // namespace

TEST_SUITE("synthesis") {

TEST_CASE("velocity-containment gain bound") {
  ScenarioDefinition def = make_scenario("s1-continuous");
  const double a = std::atan(0.2 + M_PI);
  CHECK(gamma1_star(def.spec, def.alpha, 0.1) == doctest::Approx(1.5 / a).epsilon(1e-14));
  // doubling every velocity limit doubles the bound
  ConstraintSpec wide = def.spec;
  wide.v_max *= 2.0;
  CHECK(gamma1_star(wide, def.alpha, 0.1) == doctest::Approx(3.0 / a).epsilon(1e-14));
}

TEST_CASE("actuation gain bound has an exact closed form on the double integrator") {
  const Integrator1Dof sys;
  const ConstraintSpec spec = integrator_spec();
  // per-channel quadratic reduces to gamma^2 = epsilon / (y * a) = 0.5
  const double got = gamma2_star(sys, spec, ClassKFn::linear(1.0), 0.0, 0.0, 0.5,
                                 zero_constants(), 11);
  CHECK(got == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));

  // a margin beyond the torque limit leaves no positive root anywhere
  CHECK_THROWS_AS(gamma2_star(sys, spec, ClassKFn::linear(1.0), 0.0, 0.0, 2.0,
                              zero_constants(), 11),
                  AssumptionError);
}

TEST_CASE("non-conflict gain bound") {
  const ConstraintSpec spec = integrator_spec();
  // linear slope 1, no inflation: L = 1, a = width = 1
  CHECK(gamma3_star(spec, ClassKFn::linear(1.0), 0.0, 0.49) ==
        doctest::Approx(std::sqrt(0.49)).epsilon(1e-14));
  // arctangent keeps L = 1 once the interval touches zero
  CHECK(gamma3_star(spec, ClassKFn::arctan(), 0.2, 0.3) ==
        doctest::Approx(std::sqrt(0.3 / std::atan(1.4))).epsilon(1e-14));
}

TEST_CASE("inflation certification") {
  ScenarioDefinition def = make_scenario("s1-sampled");
  const DeltaStarResult echo =
      delta_star(def.spec, def.alpha, def.beta, 0.7, 0.01, 50, 1001);
  CHECK(echo.delta_star == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(echo.chosen == doctest::Approx(0.01).epsilon(1e-14));

  // no inflation requested: probe certifies a positive value but chooses zero
  const DeltaStarResult zero =
      delta_star(def.spec, def.alpha, def.beta, 0.7, 0.0, 50, 1001);
  CHECK(zero.chosen == 0.0);
  CHECK(zero.delta_star > 0.0);
}

TEST_CASE("hold-interval drift model") {
  HoldMargin hm;
  hm.gain = 1.5;
  hm.rate = 2.0;
  CHECK(hm.eta(0.0) == 0.0);
  CHECK(hm.eta(0.1) == doctest::Approx(1.5 * std::expm1(0.2)).epsilon(1e-15));
  CHECK(hm.inverse(hm.eta(0.1)) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(hm.inverse(0.0) == 0.0);
  CHECK_THROWS_AS(hm.inverse(-1.0), ConfigError);

  HoldMargin flat;  // unusable model must refuse inversion
  CHECK_THROWS_AS(flat.inverse(1.0), NumericError);
}

TEST_CASE("torque-authority sweep over the inflated box") {
  ScenarioDefinition def = make_scenario("s1-continuous");
  const AuthorityCheck auth = verify_authority(*def.model, def.spec, 0.1, 0.0, 200);
  CHECK(auth.epsilon_max == doctest::Approx(10.189640051551359).epsilon(1e-12));
  CHECK(auth.worst_channel == 0);  // the heavily loaded shoulder binds
  CHECK(auth.worst_q.size() == 2);

  // tiny torque limits leave a sliver of margin, so ask for a jump budget too
  ConstraintSpec weak = def.spec;
  weak.u_max = Eigen::Vector2d(0.01, 0.01);
  CHECK_THROWS_AS(verify_authority(*def.model, weak, 0.1, 1.0, 40), AssumptionError);
}

TEST_CASE("end-to-end design run is internally consistent") {
  ScenarioDefinition def = make_scenario("s1-sampled");
  SynthesisOptions opts;
  opts.grid_per_axis = 25;
  const SynthesisReport rep =
      run_algorithm1(*def.model, def.spec, def.alpha, def.beta, def.delta0, def.eta0, opts);

  CHECK(rep.a == doctest::Approx(def.alpha.value(2.0 * def.delta0 + def.spec.max_width()))
                     .epsilon(1e-14));
  CHECK(rep.epsilon == doctest::Approx(0.7 * rep.epsilon_max).epsilon(1e-14));
  CHECK(rep.gamma1 == doctest::Approx(def.spec.v_max.minCoeff() / rep.a).epsilon(1e-14));
  CHECK(rep.chosen.gamma ==
        doctest::Approx(std::min({rep.gamma1, rep.gamma2, rep.gamma3})).epsilon(1e-14));
  CHECK(rep.v_bar == doctest::Approx(rep.chosen.gamma * rep.a).epsilon(1e-14));
  CHECK(rep.delta_star == doctest::Approx(def.delta0).epsilon(1e-12));
  CHECK(rep.chosen.delta == doctest::Approx(def.delta0).epsilon(1e-12));

  const double g2la =
      rep.chosen.gamma * rep.chosen.gamma * rep.alpha_lipschitz * rep.a;
  CHECK(rep.nu1 ==
        doctest::Approx(g2la / def.beta.value(rep.rho_bar)).epsilon(1e-12));
  CHECK(rep.nu2 ==
        doctest::Approx(rep.epsilon / std::abs(def.beta.value(rep.zeta))).epsilon(1e-12));
  CHECK(rep.nu1 < rep.nu2);
  CHECK(rep.chosen.nu == doctest::Approx(std::sqrt(rep.nu1 * rep.nu2)).epsilon(1e-12));
  CHECK(rep.eta_star ==
        doctest::Approx(0.5 * (rep.chosen.nu * def.beta.value(rep.rho_bar) - g2la))
            .epsilon(1e-12));
  CHECK(rep.chosen.eta_bar == doctest::Approx(std::min(def.eta0, rep.eta_star)).epsilon(1e-14));
  CHECK(rep.chosen.eta_bar == doctest::Approx(7.0).epsilon(1e-14));  // budget binds here

  // sampling-drift model agrees with its own inverse
  CHECK(rep.hold.gain > 0.0);
  CHECK(rep.hold.rate > 0.0);
  CHECK(rep.t_max == doctest::Approx(rep.hold.inverse(rep.chosen.eta_bar)).epsilon(1e-12));
  CHECK(rep.hold.eta(rep.t_max) == doctest::Approx(rep.chosen.eta_bar).epsilon(1e-9));

  const std::string text = rep.format();
  CHECK(text.find("gamma1*") != std::string::npos);
  CHECK(text.find("chosen parameters") != std::string::npos);
  CHECK(text.find("T_max") != std::string::npos);
}

TEST_CASE("selection policies") {
  ScenarioDefinition def = make_scenario("s1-sampled");
  SynthesisOptions opts;
  opts.grid_per_axis = 15;

  // picking the bottom of the interval leaves no jump budget: fine when none is
  // requested, an error when the scenario asks for one
  opts.policy.nu_rule = NuRule::kNu1;
  CHECK_THROWS_AS(
      run_algorithm1(*def.model, def.spec, def.alpha, def.beta, def.delta0, def.eta0, opts),
      SynthesisError);

  ScenarioDefinition flat = make_scenario("s1-continuous");
  const SynthesisReport low = run_algorithm1(*flat.model, flat.spec, flat.alpha, flat.beta,
                                             flat.delta0, flat.eta0, opts);
  CHECK(low.chosen.nu == doctest::Approx(low.nu1).epsilon(1e-14));
  CHECK(low.chosen.eta_bar == 0.0);

  opts.policy.nu_rule = NuRule::kNu2;
  const SynthesisReport high =
      run_algorithm1(*def.model, def.spec, def.alpha, def.beta, def.delta0, def.eta0, opts);
  CHECK(high.chosen.nu == doctest::Approx(high.nu2).epsilon(1e-14));

  opts.policy.nu_rule = NuRule::kMidpointLog;
  opts.policy.gamma_rule = GammaRule::kFraction;
  opts.policy.gamma_fraction = 0.5;
  const SynthesisReport frac =
      run_algorithm1(*def.model, def.spec, def.alpha, def.beta, def.delta0, def.eta0, opts);
  CHECK(frac.chosen.gamma ==
        doctest::Approx(0.5 * std::min({frac.gamma1, frac.gamma2, frac.gamma3}))
            .epsilon(1e-14));
}

TEST_CASE("zero jump budget forces a zero jump margin") {
  ScenarioDefinition def = make_scenario("s1-continuous");
  SynthesisOptions opts;
  opts.grid_per_axis = 15;
  const SynthesisReport rep =
      run_algorithm1(*def.model, def.spec, def.alpha, def.beta, def.delta0, 0.0, opts);
  CHECK(rep.chosen.eta_bar == 0.0);
  CHECK(rep.format().find("none (eta_bar = 0") != std::string::npos);
}

TEST_CASE("a non-superadditive restoring function is rejected up front") {
  ScenarioDefinition def = make_scenario("s1-sampled");
  SynthesisOptions opts;
  opts.grid_per_axis = 10;
  CHECK_THROWS_AS(run_algorithm1(*def.model, def.spec, def.alpha, ClassKFn::arctan(),
                                 def.delta0, def.eta0, opts),
                  AssumptionError);
}

TEST_CASE("invalid knobs are rejected") {
  ScenarioDefinition def = make_scenario("s1-sampled");
  SynthesisOptions opts;
  opts.epsilon_fraction = 0.0;
  CHECK_THROWS_AS(run_algorithm1(*def.model, def.spec, def.alpha, def.beta, def.delta0,
                                 def.eta0, opts),
                  ConfigError);
  opts.epsilon_fraction = 0.7;
  opts.policy.gamma_rule = GammaRule::kFraction;
  opts.policy.gamma_fraction = 1.5;
  CHECK_THROWS_AS(run_algorithm1(*def.model, def.spec, def.alpha, def.beta, def.delta0,
                                 def.eta0, opts),
                  ConfigError);
  CHECK_THROWS_AS(run_algorithm1(*def.model, def.spec, def.alpha, def.beta, -0.1, 0.0,
                                 SynthesisOptions{}),
                  ConfigError);
}

}  // TEST_SUITE
