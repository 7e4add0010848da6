#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>

#include "doctest.h"
#include "elsg/errors.hpp"
#include "elsg/scenario.hpp"
#include "elsg/sim.hpp"
#include "elsg/synthesis.hpp"

using namespace elsg;

namespace {

// single-axis plant that ignores the input entirely: a model mismatch the
// filter cannot overcome, so the trace must record the domain exit
struct RunawayModel final : SystemModel {
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
  Eigen::VectorXd native_accel(const Eigen::VectorXd&, const Eigen::VectorXd&,
                               const Eigen::VectorXd&) const override {
    return Eigen::VectorXd::Ones(1);
  }
};

// produces a NaN acceleration once the velocity passes a threshold
struct BlowupModel final : SystemModel {
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
  Eigen::VectorXd native_accel(const Eigen::VectorXd&, const Eigen::VectorXd& v,
                               const Eigen::VectorXd& u) const override {
    if (std::abs(v(0)) > 0.3) return Eigen::VectorXd::Constant(1, std::nan(""));
    return u;
  }
};

ConstraintSpec axis_spec() {
  ConstraintSpec s;
  s.q_min = Eigen::VectorXd::Constant(1, -1.0);
  s.q_max = Eigen::VectorXd::Constant(1, 1.0);
  s.v_max = Eigen::VectorXd::Constant(1, 1.0);
  s.u_max = Eigen::VectorXd::Constant(1, 10.0);
  return s;
}

SimSetup scenario_setup(const ScenarioDefinition& def, const ZcbfParams& params) {
  SimSetup s;
  s.model = def.model;
  s.spec = def.spec;
  s.params = make_barrier_config(def.alpha, def.beta, params);
  s.mode = ControllerMode::kZcbfSampled;
  s.nominal = make_computed_torque(def.arm, def.reference);
  s.T = def.T;
  s.duration = def.duration;
  s.substeps = def.substeps;
  s.x0_q = def.x0_q;
  s.x0_v = def.x0_v;
  s.margin_rule = MarginRule::kEtaBar;
  s.scenario = def.id;
  return s;
}

ZcbfParams coarse_params(const ScenarioDefinition& def, int grid = 15) {
  SynthesisOptions opts;
  opts.grid_per_axis = grid;
  return run_algorithm1(*def.model, def.spec, def.alpha, def.beta, def.delta0, def.eta0, opts)
      .chosen;
}

}  // namespace

TEST_SUITE("sim") {

TEST_CASE("record layout: one per tick boundary plus the terminal snapshot") {
  ScenarioDefinition def = make_scenario("s1-sampled");
  SimSetup s = scenario_setup(def, coarse_params(def));
  s.duration = 0.01;
  const SimTrace tr = run_closed_loop(s);
  REQUIRE(tr.records.size() == 11);
  CHECK(tr.records.front().t == 0.0);
  CHECK(tr.records.back().t == doctest::Approx(0.01).epsilon(1e-12));
  // terminal record: no input held past the end
  CHECK(tr.records.back().u.cwiseAbs().maxCoeff() == 0.0);
  CHECK_FALSE(tr.records.back().qp_ran);
  for (size_t k = 0; k + 1 < tr.records.size(); ++k) {
    CHECK(tr.records[k].qp_ran);
    CHECK(tr.records[k].qp_status == QpStatus::kOptimal);
  }
  CHECK(tr.flags == 0u);
  CHECK_FALSE(tr.failed);

  SimSetup empty = s;
  empty.duration = 0.0;
  const SimTrace none = run_closed_loop(empty);
  CHECK(none.records.size() == 1);
  CHECK_FALSE(none.records.front().qp_ran);
}

TEST_CASE("repeated runs render identical traces") {
  ScenarioDefinition def = make_scenario("s1-sampled");
  const ZcbfParams p = coarse_params(def);
  SimSetup s = scenario_setup(def, p);
  s.duration = 0.02;
  const std::string a = trace_csv(run_closed_loop(s));
  const std::string b = trace_csv(run_closed_loop(s));
  CHECK(a == b);
}

TEST_CASE("trace rendering: header, regions, terminal row") {
  ScenarioDefinition def = make_scenario("s1-sampled");
  SimSetup s = scenario_setup(def, coarse_params(def));
  s.duration = 0.003;
  const std::string csv = trace_csv(run_closed_loop(s));
  const std::string header = csv.substr(0, csv.find('\n'));
  CHECK(header ==
        "t,q1,q2,v1,v2,u1,u2,bup1,bup2,blow1,blow2,region1,region2,qp_status,flags");
  CHECK(csv.find(",VII,") != std::string::npos);  // both joints start dead-centre
  CHECK(csv.find(",none,") != std::string::npos); // terminal row has no projection
  CHECK(csv.find(",ok,") != std::string::npos);   // interior rows solved to optimality

  CHECK_THROWS_AS(trace_csv(SimTrace{}), NumericError);
}

TEST_CASE("trace file writing") {
  ScenarioDefinition def = make_scenario("s1-sampled");
  SimSetup s = scenario_setup(def, coarse_params(def));
  s.duration = 0.002;
  const SimTrace tr = run_closed_loop(s);
  const auto path =
      (std::filesystem::temp_directory_path() / "elsg-test-trace.csv").string();
  write_trace_csv(tr, path);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string first;
  std::getline(in, first);
  CHECK(first.rfind("t,q1", 0) == 0);
  std::filesystem::remove(path);
}

TEST_CASE("safety monitor: per-set flags, magnitudes, admissible boundary") {
  const ConstraintSpec spec = axis_spec();
  Eigen::VectorXd q(1), v(1), u(1);

  q << 0.5; v << 0.2; u << 3.0;
  SafetyReport ok = monitor_safety(spec, q, v, u);
  CHECK(ok.flags == 0u);
  CHECK(ok.worst_q == 0.0);

  q << 1.25;
  SafetyReport qbad = monitor_safety(spec, q, v, u);
  CHECK(qbad.flags == kFlagPosition);
  CHECK(qbad.worst_q == doctest::Approx(0.25).epsilon(1e-12));

  q << 0.0; v << -1.6;
  SafetyReport vbad = monitor_safety(spec, q, v, u);
  CHECK(vbad.flags == kFlagVelocity);
  CHECK(vbad.worst_v == doctest::Approx(0.6).epsilon(1e-12));

  v << 0.0; u << -12.5;
  SafetyReport ubad = monitor_safety(spec, q, v, u);
  CHECK(ubad.flags == kFlagInput);
  CHECK(ubad.worst_u == doctest::Approx(2.5).epsilon(1e-12));

  // boundary states are admissible
  q << 1.0; v << 1.0; u << 10.0;
  CHECK(monitor_safety(spec, q, v, u).flags == 0u);

  // merge keeps the worst of each magnitude
  SafetyReport m = qbad;
  m.merge(vbad);
  m.merge(ubad);
  CHECK(m.flags == (kFlagPosition | kFlagVelocity | kFlagInput));
  CHECK(m.worst_q == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(m.worst_u == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("integrator converges at fourth order in the substep count") {
  ScenarioDefinition def = make_scenario("s1-sampled");
  SimSetup s = scenario_setup(def, ZcbfParams{1.0, 1.0, 0.0, 0.0});
  s.mode = ControllerMode::kNominalOnly;
  s.T = 0.1;
  s.duration = 0.1;  // one hold interval, fixed input

  auto final_state = [&](int substeps) {
    SimSetup c = s;
    c.substeps = substeps;
    const SimTrace tr = run_closed_loop(c);
    Eigen::VectorXd x(4);
    x << tr.records.back().q, tr.records.back().v;
    return x;
  };
  const Eigen::VectorXd ref = final_state(160);
  const double e1 = (final_state(5) - ref).norm();
  const double e2 = (final_state(10) - ref).norm();
  REQUIRE(e1 > 1e-13);  // above roundoff, so the ratio is meaningful
  const double order = std::log2(e1 / e2);
  CHECK(order > 3.5);
  CHECK(order < 4.5);
}

TEST_CASE("filtered run keeps the shifted barriers nonnegative at every substep") {
  ScenarioDefinition def = make_scenario("s1-sampled");
  const ZcbfParams p = coarse_params(def);
  SimSetup s = scenario_setup(def, p);
  s.duration = 0.05;
  const Barrier bar(def.spec, make_barrier_config(def.alpha, def.beta, p));
  int calls = 0;
  double last_t = 0.0;
  double worst = std::numeric_limits<double>::infinity();
  s.observer = [&](double t, const Eigen::VectorXd& q, const Eigen::VectorXd& v,
                   const Eigen::VectorXd& u) {
    ++calls;
    CHECK(t > last_t - 1e-15);
    last_t = t;
    CHECK(u.size() == 2);
    for (int i = 0; i < 2; ++i) {
      worst = std::min(worst, bar.b_up_shifted(i, q(i), v(i)));
      worst = std::min(worst, bar.b_low_shifted(i, q(i), v(i)));
    }
  };
  const SimTrace tr = run_closed_loop(s);
  CHECK(calls == 500);  // substeps x ticks
  CHECK(last_t == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(worst > -1e-9);
  CHECK(tr.flags == 0u);
}

TEST_CASE("continuous mode recomputes the projection inside the tick") {
  ScenarioDefinition def = make_scenario("s1-continuous");
  SimSetup s = scenario_setup(def, coarse_params(def));
  s.mode = ControllerMode::kZcbfContinuous;
  s.duration = 0.02;
  s.substeps = 4;
  const SimTrace tr = run_closed_loop(s);
  REQUIRE(tr.records.size() == 21);
  for (size_t k = 0; k + 1 < tr.records.size(); ++k) {
    CHECK(tr.records[k].qp_ran);
    CHECK(tr.records[k].qp_status == QpStatus::kOptimal);
  }
  CHECK(tr.flags == 0u);
}

TEST_CASE("an overpowering plant is recorded as a domain exit, and the run continues") {
  SimSetup s;
  s.model = std::make_shared<RunawayModel>();
  s.spec = axis_spec();
  BarrierConfig cfg;
  cfg.gamma = 1.0;
  cfg.nu = 5.0;
  cfg.delta = 0.1;
  s.params = cfg;
  s.mode = ControllerMode::kZcbfSampled;
  s.nominal = [](double, const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return Eigen::VectorXd::Zero(1);
  };
  s.T = 0.01;
  s.duration = 1.5;
  s.substeps = 5;
  s.x0_q = Eigen::VectorXd::Zero(1);
  s.x0_v = Eigen::VectorXd::Zero(1);
  s.margin_rule = MarginRule::kNumber;
  s.margin_value = 0.0;
  s.scenario = "runaway";

  const SimTrace tr = run_closed_loop(s);
  CHECK(tr.left_domain);
  CHECK(tr.failed);
  CHECK(tr.first_exit_time > 0.5);
  CHECK(tr.first_exit_time < 0.9);
  CHECK_FALSE(tr.aborted);
  CHECK(tr.records.size() == 151);  // exit is latched, the rollout completes
  CHECK((tr.flags & kFlagVelocity) != 0u);
}

TEST_CASE("a non-finite state aborts with a reason and keeps the partial trace") {
  SimSetup s;
  s.model = std::make_shared<BlowupModel>();
  s.spec = axis_spec();
  s.params = BarrierConfig{};
  s.mode = ControllerMode::kNominalOnly;
  s.nominal = [](double, const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return Eigen::VectorXd::Ones(1);
  };
  s.T = 0.1;
  s.duration = 1.0;
  s.substeps = 5;
  s.x0_q = Eigen::VectorXd::Zero(1);
  s.x0_v = Eigen::VectorXd::Zero(1);
  s.scenario = "blowup";

  const SimTrace tr = run_closed_loop(s);
  CHECK(tr.aborted);
  CHECK(tr.abort_reason.find("non-finite state at t = ") != std::string::npos);
  CHECK(tr.records.size() >= 3);
  CHECK(tr.records.size() <= 6);  // no terminal snapshot after an abort
  CHECK(tr.records.back().u(0) == 1.0);

  // same setup, stopped before the blowup: clean run with a terminal snapshot
  SimSetup short_run = s;
  short_run.duration = 0.2;
  const SimTrace ok = run_closed_loop(short_run);
  CHECK_FALSE(ok.aborted);
  CHECK(ok.records.back().u(0) == 0.0);
}

TEST_CASE("hold-drift margin rule guards the sampling period") {
  ScenarioDefinition def = make_scenario("s1-sampled");
  SynthesisOptions opts;
  opts.grid_per_axis = 15;
  const SynthesisReport rep =
      run_algorithm1(*def.model, def.spec, def.alpha, def.beta, def.delta0, def.eta0, opts);

  SimSetup s = scenario_setup(def, rep.chosen);
  s.margin_rule = MarginRule::kEtaOfT;
  CHECK_THROWS_AS(run_closed_loop(s), ConfigError);  // no hold model attached

  s.hold = rep.hold;
  s.T = 0.01;  // drift over 10 ms far exceeds the jump margin
  try {
    run_closed_loop(s);
    FAIL("expected the sampling-period guard to fire");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("sampling period too large") != std::string::npos);
    CHECK(msg.find("T_max") != std::string::npos);
  }

  // under the admissible hold time the rule runs and stays safe
  s.T = 0.9 * rep.t_max;
  s.duration = 20.0 * s.T;
  const SimTrace tr = run_closed_loop(s);
  CHECK(tr.flags == 0u);
  CHECK_FALSE(tr.left_domain);
}

TEST_CASE("initial states outside the tight operating set are refused") {
  ScenarioDefinition def = make_scenario("s1-sampled");
  SimSetup s = scenario_setup(def, coarse_params(def));
  s.x0_v = Eigen::Vector2d(1.4, 0.0);  // above the tight velocity section
  CHECK_THROWS_AS(run_closed_loop(s), DomainError);

  s.x0_v = Eigen::Vector2d::Zero();
  s.margin_rule = MarginRule::kNumber;
  s.margin_value = -1.0;
  CHECK_THROWS_AS(run_closed_loop(s), ConfigError);

  s.margin_value = 0.0;
  s.T = 0.0;
  CHECK_THROWS_AS(run_closed_loop(s), ConfigError);
}

}  // TEST_SUITE
