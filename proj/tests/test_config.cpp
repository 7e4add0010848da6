#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "elsg/config.hpp"
#include "elsg/errors.hpp"
#include "elsg/transformed.hpp"

using namespace elsg;

namespace {

template <class E, class Fn>
std::string thrown(Fn&& fn) {
  try {
    fn();
  } catch (const E& e) {
    return e.what();
  }
  return "<no exception>";
}

RunConfig minimal_custom() {
  return parse_config(
      "q_min: -1 -1\n"
      "q_max: 1 1\n"
      "v_max: 2 2\n"
      "u_max: 30 30\n"
      "x0_q: 0 0\n");
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("parse: comments, blank lines, CRLF, whitespace") {
  const RunConfig cfg = parse_config(
      "# run description\r\n"
      "\n"
      "  scenario : s1-sampled  \r\n"
      "gamma: 0.5\n"
      "damping:  0.001   0.002\n"
      "substeps: 7\n");
  REQUIRE(cfg.scenario.has_value());
  CHECK(*cfg.scenario == "s1-sampled");
  CHECK(*cfg.gamma == 0.5);
  REQUIRE(cfg.damping->size() == 2);
  CHECK((*cfg.damping)(1) == 0.002);
  CHECK(*cfg.substeps == 7);
  CHECK_FALSE(cfg.nu.has_value());
}

TEST_CASE("emit: fixed order, exact text, round-trip identity") {
  RunConfig cfg;
  cfg.scenario = "s1-sampled";
  cfg.gamma = 0.5;
  cfg.nu = 2.0;
  cfg.delta = 0.25;
  CHECK(emit_config(cfg) == "scenario: s1-sampled\ngamma: 0.5\nnu: 2\ndelta: 0.25\n");

  // a config touching every field class survives emit -> parse -> emit
  RunConfig full = parse_config(
      "scenario: s2-nonlinear\n"
      "controller: zcbf-sampled\n"
      "alpha: atan\n"
      "beta: cubic\n"
      "mass_mode: uniform-rod\n"
      "l1: 1\nl2: 1\nm1: 1\nm2: 1\n"
      "damping: 0.001 0.001\n"
      "gravity: 0\n"
      "map: ellipse-plane\n"
      "map_center: 5 0\n"
      "map_plane: 0.1 1\n"
      "map_sign: 1\n"
      "native_q_min: 1.4 1.1\n"
      "native_q_max: 3.4 2.6\n"
      "q_min: 8 1.7\nq_max: 12 2.5\n"
      "v_max: 1.5 1.5\nu_max: 18 10\n"
      "ref_amplitude: 0.5 0.5\nref_omega: 0.5 1\nref_offset: 0.8 2\n"
      "x0_q: 2.5 2\nx0_v: 0 0\n"
      "delta0: 0.01\neta0: 8\nepsilon_fraction: 0.7\n"
      "grid_per_axis: 60\ndelta_grid: 50\n"
      "gamma_rule: max-gamma\nnu_rule: midpoint-log\n"
      "T: 0.001\nduration: 2\nsubsteps: 10\n"
      "sampling_margin: eta-bar\n"
      "gamma: 1.13\nnu: 12700000\ndelta: 0.01\neta_bar: 7.32\n"
      "trace_out: /tmp/x.csv\nplots_out: /tmp/x.svg\nreport_out: /tmp/x.txt\n");
  const std::string once = emit_config(full);
  CHECK(emit_config(parse_config(once)) == once);
}

TEST_CASE("parse errors carry the line number") {
  CHECK(thrown<ConfigError>([] { parse_config("gamma: 1\nbogus: 2\n"); }) ==
        "line 2: unknown key 'bogus'");
  CHECK(thrown<ConfigError>([] { parse_config("gamma: 1\n\ngamma: 2\n"); }) ==
        "line 3: duplicate key 'gamma'");
  CHECK(thrown<ConfigError>([] { parse_config("gamma:\n"); }) ==
        "line 1: missing value for 'gamma'");
  CHECK(thrown<ConfigError>([] { parse_config(" : 5\n"); }) ==
        "line 1: missing key before ':'");
  CHECK(thrown<ConfigError>([] { parse_config("just some text\n"); }) ==
        "line 1: expected 'key: value', got 'just some text'");
  CHECK(thrown<ConfigError>([] { parse_config("# ok\ngamma: abc\n"); }) ==
        "line 2: bad value 'abc' for 'gamma': expected a number");
  CHECK(thrown<ConfigError>([] { parse_config("gamma: 1.5x\n"); }) ==
        "line 1: bad value '1.5x' for 'gamma': trailing characters after number");
  CHECK(thrown<ConfigError>([] { parse_config("gamma: nan\n"); }) ==
        "line 1: bad value 'nan' for 'gamma': must be finite");
  CHECK(thrown<ConfigError>([] { parse_config("substeps: 5.5\n"); }) ==
        "line 1: bad value '5.5' for 'substeps': trailing characters after integer");
  CHECK(thrown<ConfigError>([] { parse_config("substeps: many\n"); }) ==
        "line 1: bad value 'many' for 'substeps': expected an integer");
  CHECK(thrown<ConfigError>([] { parse_config("grid_per_axis: 10000000000\n"); }) ==
        "line 1: bad value '10000000000' for 'grid_per_axis': out of range");
  CHECK(thrown<ConfigError>([] { parse_config("damping: 1 two\n"); }) ==
        "line 1: bad value 'two' for 'damping': expected a number");
}

TEST_CASE("resolve: scenario defaults with targeted overrides") {
  RunConfig cfg = parse_config(
      "scenario: s1-sampled\n"
      "controller: zcbf-continuous\n"
      "alpha: linear:0.8\n"
      "T: 0.002\n"
      "v_max: 1 1\n"
      "mass_mode: point-mass-at-tip\n"
      "gravity: 9.81\n"
      "nu_rule: nu2\n"
      "gamma_rule: fraction:0.5\n"
      "sampling_margin: 0.25\n");
  const ResolvedRun run = resolve(cfg);
  CHECK(run.def.id == "s1-sampled");
  CHECK(run.mode == ControllerMode::kZcbfContinuous);
  CHECK(run.def.alpha.value(1.0) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(run.def.T == 0.002);
  CHECK(run.def.spec.v_max(0) == 1.0);
  CHECK(run.def.spec.u_max(0) == 18.0);  // untouched default
  CHECK(run.def.arm->params().mass_mode == Planar2Dof::MassMode::kPointMassTip);
  CHECK(run.def.arm->params().gravity == 9.81);
  CHECK(run.synth.policy.nu_rule == NuRule::kNu2);
  CHECK(run.synth.policy.gamma_rule == GammaRule::kFraction);
  CHECK(run.synth.policy.gamma_fraction == 0.5);
  CHECK(run.def.margin_rule == MarginRule::kNumber);
  CHECK(run.def.margin_value == 0.25);
  CHECK_FALSE(run.params.has_value());

  // the s2 catalog entry carries the coordinate change; `map: none` strips it
  const ResolvedRun s2 = resolve(parse_config("scenario: s2-nonlinear\n"));
  CHECK(dynamic_cast<const TransformedSystem*>(s2.def.model.get()) != nullptr);
  RunConfig flat = parse_config("scenario: s2-nonlinear\nmap: none\nq_min: 1.4 1.1\n"
                                "q_max: 3.4 2.6\nx0_q: 2.5 2\n");
  const ResolvedRun stripped = resolve(flat);
  CHECK(dynamic_cast<const TransformedSystem*>(stripped.def.model.get()) == nullptr);
}

TEST_CASE("resolve: a minimal custom run and the filter-parameter block") {
  const ResolvedRun run = resolve(minimal_custom());
  CHECK(run.def.id == "custom");
  CHECK(run.def.model->dof() == 2);
  CHECK(run.def.x0_v.size() == 2);
  CHECK(run.def.x0_v.cwiseAbs().maxCoeff() == 0.0);
  CHECK_FALSE(run.params.has_value());

  RunConfig with_params = minimal_custom();
  with_params.gamma = 0.9;
  with_params.nu = 3.0;
  with_params.delta = 0.05;
  const ResolvedRun r2 = resolve(with_params);
  REQUIRE(r2.params.has_value());
  CHECK(r2.params->gamma == 0.9);
  CHECK(r2.params->eta_bar == 0.0);  // optional, defaults to zero
}

TEST_CASE("resolve rejects inconsistent inputs with precise messages") {
  CHECK(thrown<ConfigError>([] {
          RunConfig c = minimal_custom();
          c.gamma = 0.9;  // nu and delta missing
          resolve(c);
        }) == "gamma, nu and delta must be given together (eta_bar is optional)");
  CHECK(thrown<ConfigError>([] {
          RunConfig c = minimal_custom();
          c.gamma = -0.9;
          c.nu = 1.0;
          c.delta = 0.0;
          resolve(c);
        }) == "gamma and nu must be positive; delta and eta_bar nonnegative");
  CHECK(thrown<ConfigError>([] {
          resolve(parse_config("q_max: 1 1\nv_max: 2 2\nu_max: 30 30\nx0_q: 0 0\n"));
        }) == "custom runs need 'q_min'");
  CHECK(thrown<ConfigError>([] {
          RunConfig c = minimal_custom();
          c.x0_q = Eigen::VectorXd::Zero(3);
          resolve(c);
        }) == "'x0_q' must have 2 entries");
  CHECK(thrown<ConfigError>([] {
          RunConfig c = minimal_custom();
          c.x0_q.reset();
          resolve(c);
        }) == "missing initial position 'x0_q'");
  CHECK(thrown<ConfigError>([] {
          RunConfig c = minimal_custom();
          c.damping = Eigen::VectorXd::Ones(3);
          resolve(c);
        }) == "'damping' must have exactly 2 entries");
  CHECK(thrown<ConfigError>([] {
          RunConfig c = minimal_custom();
          c.damping = -Eigen::VectorXd::Ones(2);
          resolve(c);
        }) == "damping must be nonnegative");
  CHECK(thrown<ConfigError>([] {
          RunConfig c = minimal_custom();
          c.l1 = -1.0;
          resolve(c);
        }) == "link lengths and masses must be positive");
  CHECK(thrown<ConfigError>([] {
          RunConfig c = minimal_custom();
          c.map = "ellipse-plane";
          c.map_plane = Eigen::Vector2d(0.1, 1.0);
          resolve(c);
        }) == "an ellipse-plane map needs native_q_min and native_q_max");
  CHECK(thrown<ConfigError>([] {
          RunConfig c = minimal_custom();
          c.map = "ellipse-plane";
          c.native_q_min = Eigen::Vector2d(0.0, 0.0);
          c.native_q_max = Eigen::Vector2d(1.0, 1.0);
          resolve(c);  // default plane is the zero vector
        }) == "map_plane must be nonzero");
  CHECK(thrown<ConfigError>([] {
          RunConfig c = minimal_custom();
          c.map = "sideways";
          resolve(c);
        }) == "unknown map 'sideways' (expected none or ellipse-plane)");
  CHECK(thrown<ConfigError>([] {
          RunConfig c = minimal_custom();
          c.map_sign = 2.0;
          resolve(c);
        }) == "map_sign must be 1 or -1");
  CHECK(thrown<ConfigError>([] {
          RunConfig c = minimal_custom();
          c.mass_mode = "heavy";
          resolve(c);
        }) == "unknown mass_mode 'heavy' (expected point-mass-at-tip or uniform-rod)");
  CHECK(thrown<ConfigError>([] {
          RunConfig c = minimal_custom();
          c.epsilon_fraction = 1.0;
          resolve(c);
        }) == "epsilon_fraction must lie in (0, 1)");
  CHECK(thrown<ConfigError>([] {
          RunConfig c = minimal_custom();
          c.grid_per_axis = 1;
          resolve(c);
        }) == "grid_per_axis must be at least 2");
  CHECK(thrown<ConfigError>([] {
          RunConfig c = minimal_custom();
          c.T = 0.0;
          resolve(c);
        }) == "T must be positive");
  CHECK(thrown<ConfigError>([] {
          RunConfig c = minimal_custom();
          c.gamma_rule = "fraction:1.5";
          resolve(c);
        }) == "gamma_rule fraction must lie in (0, 1]");
  // value re-parsed at resolve time: no meaningless line number in the message
  const std::string m = thrown<ConfigError>([] {
    RunConfig c = minimal_custom();
    c.sampling_margin = "sometimes";
    resolve(c);
  });
  CHECK(m == "bad value 'sometimes' for 'sampling_margin': expected a number");
  CHECK(thrown<ConfigError>([] {
          RunConfig c = minimal_custom();
          c.sampling_margin = "-0.5";
          resolve(c);
        }) == "a numeric sampling_margin must be nonnegative");
  CHECK(thrown<ConfigError>([] {
          RunConfig c = minimal_custom();
          c.nu_rule = "nu3";
          resolve(c);
        }) == "unknown nu_rule 'nu3' (expected nu1, nu2 or midpoint-log)");
  CHECK(thrown<ConfigError>([] {
          RunConfig c = minimal_custom();
          c.u_max = Eigen::VectorXd::Ones(3);
          resolve(c);
        }) == "u_max dimension does not match the model input");
}

TEST_CASE("load_config: file round-trip and a helpful miss") {
  const auto dir = std::filesystem::temp_directory_path();
  const std::string path = (dir / "elsg-test-load.cfg").string();
  {
    std::ofstream out(path);
    out << "scenario: s1-continuous\nduration: 1.5\n";
  }
  const RunConfig cfg = load_config(path);
  CHECK(*cfg.scenario == "s1-continuous");
  CHECK(*cfg.duration == 1.5);
  std::filesystem::remove(path);

  const std::string miss = (dir / "elsg-no-such-file.cfg").string();
  const std::string msg = thrown<ConfigError>([&] { load_config(miss); });
  CHECK(msg.find("cannot open config file") != std::string::npos);
  CHECK(msg.find(miss) != std::string::npos);

  // parse errors gain the path prefix
  {
    std::ofstream out(path);
    out << "gamma: oops\n";
  }
  const std::string msg2 = thrown<ConfigError>([&] { load_config(path); });
  CHECK(msg2.rfind(path + ": ", 0) == 0);
  CHECK(msg2.find("line 1:") != std::string::npos);
  std::filesystem::remove(path);
}

}  // TEST_SUITE
