// Hot-path timings: the safety projection, the full filter step, the explicit
// fallback feedback, and one closed-loop hold interval.

#include <benchmark/benchmark.h>

#include "elsg/controller.hpp"
#include "elsg/qp.hpp"
#include "elsg/scenario.hpp"
#include "elsg/sim.hpp"
#include "elsg/synthesis.hpp"

namespace {

using namespace elsg;

struct Fixture {
  ScenarioDefinition def = make_scenario("s1-sampled");
  Barrier barrier;
  Eigen::VectorXd q, v, u_nom;

  Fixture()
      : barrier(def.spec,
                make_barrier_config(def.alpha, def.beta, ZcbfParams{0.73, 1.3e4, 0.01, 7.0})) {
    q = def.x0_q;
    v = Eigen::Vector2d(0.4, -0.3);  // moving toward the upper bound of joint 1
    u_nom = make_computed_torque(def.arm, def.reference)(0.0, q, v);
  }
};

const Fixture& fixture() {
  static Fixture f;
  return f;
}

void bm_qp_solve(benchmark::State& state) {
  const Fixture& f = fixture();
  const StackedConstraints sc = build_constraints(*f.def.model, f.barrier, f.q, f.v, 7.0);
  QpProblem p;
  p.g = f.u_nom;
  p.A = sc.A;
  p.b = sc.b;
  p.lo = -f.def.spec.u_max;
  p.hi = f.def.spec.u_max;
  QpSolver solver{QpOptions{}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(solver.solve(p));
  }
}
BENCHMARK(bm_qp_solve);

void bm_filter_apply(benchmark::State& state) {
  const Fixture& f = fixture();
  ZcbfFilter filter(f.def.model, f.barrier);
  for (auto _ : state) {
    benchmark::DoNotOptimize(filter.apply(f.q, f.v, f.u_nom, 7.0));
  }
}
BENCHMARK(bm_filter_apply);

void bm_explicit_control(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(explicit_safe_control(*f.def.model, f.barrier, f.q, f.v, 7.0));
  }
}
BENCHMARK(bm_explicit_control);

void bm_sim_tick(benchmark::State& state) {
  const Fixture& f = fixture();
  SimSetup s;
  s.model = f.def.model;
  s.spec = f.def.spec;
  s.params = f.barrier.config();
  s.mode = ControllerMode::kZcbfSampled;
  s.nominal = make_computed_torque(f.def.arm, f.def.reference);
  s.T = f.def.T;
  s.duration = f.def.T;  // exactly one hold interval
  s.substeps = f.def.substeps;
  s.x0_q = f.def.x0_q;
  s.x0_v = f.def.x0_v;
  s.margin_rule = MarginRule::kEtaBar;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_closed_loop(s));
  }
}
BENCHMARK(bm_sim_tick);

}  // namespace

BENCHMARK_MAIN();
