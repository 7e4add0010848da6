// elsg: synthesize, simulate and verify saturation-aware safety filters
// for torque-limited two-link manipulators.
//
// exit codes: 0 success, 1 config/IO error, 2 failed model assumption,
//             3 safety violation in a filtered run, 4 failed verification

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "elsg/config.hpp"
#include "elsg/errors.hpp"
#include "elsg/scenario.hpp"
#include "elsg/sim.hpp"
#include "elsg/svg.hpp"
#include "elsg/synthesis.hpp"
#include "elsg/util.hpp"
#include "elsg/verify.hpp"

namespace {

using namespace elsg;

std::string default_stem(const ResolvedRun& rr) {
  return rr.def.id + "-" + controller_mode_name(rr.mode);
}

int cmd_synth(const std::string& cfg_path, const std::string& params_out) {
  RunConfig rc = load_config(cfg_path);
  ResolvedRun rr = resolve(rc);
  SynthesisReport rep = run_algorithm1(*rr.def.model, rr.def.spec, rr.def.alpha, rr.def.beta,
                                       rr.def.delta0, rr.def.eta0, rr.synth);
  std::string text = rep.format();
  std::fputs(text.c_str(), stdout);
  if (rr.report_out) {
    atomic_write_file(*rr.report_out, text);
    std::printf("report written to %s\n", rr.report_out->c_str());
  }
  if (!params_out.empty()) {
    RunConfig out = rc;
    out.gamma = rep.chosen.gamma;
    out.nu = rep.chosen.nu;
    out.delta = rep.chosen.delta;
    out.eta_bar = rep.chosen.eta_bar;
    atomic_write_file(params_out, emit_config(out));
    std::printf("config with synthesized parameters written to %s\n", params_out.c_str());
  }
  return 0;
}

int cmd_simulate(const std::string& cfg_path, bool plots) {
  RunConfig rc = load_config(cfg_path);
  ResolvedRun rr = resolve(rc);

  const bool filtered = rr.mode != ControllerMode::kNominalOnly;
  if (filtered && !rr.params)
    throw ConfigError(
        "config has no filter parameters (gamma, nu, delta); run `elsg synth -c <config> "
        "--params-out <file>` and simulate with that file");

  SimSetup setup;
  setup.model = rr.def.model;
  setup.spec = rr.def.spec;
  ZcbfParams params = rr.params.value_or(ZcbfParams{});
  setup.params = make_barrier_config(rr.def.alpha, rr.def.beta, params);
  setup.mode = rr.mode;
  setup.nominal = make_computed_torque(rr.def.arm, rr.def.reference);
  setup.T = rr.def.T;
  setup.duration = rr.def.duration;
  setup.substeps = rr.def.substeps;
  setup.x0_q = rr.def.x0_q;
  setup.x0_v = rr.def.x0_v;
  setup.margin_rule = rr.def.margin_rule;
  setup.margin_value = rr.def.margin_value;
  setup.scenario = rr.def.id;
  if (rr.mode == ControllerMode::kZcbfSampled && rr.def.margin_rule == MarginRule::kEtaOfT) {
    // the drift bound comes out of the synthesis pass
    SynthesisReport rep = run_algorithm1(*rr.def.model, rr.def.spec, rr.def.alpha, rr.def.beta,
                                         rr.def.delta0, rr.def.eta0, rr.synth);
    setup.hold = rep.hold;
  }

  SimTrace trace = run_closed_loop(setup);

  std::string trace_path = rr.trace_out.value_or(default_stem(rr) + ".csv");
  write_trace_csv(trace, trace_path);
  std::printf("mode %s, %zu ticks of T = %s s\n", controller_mode_name(trace.mode),
              trace.records.empty() ? 0 : trace.records.size() - 1, format_g17(trace.T).c_str());
  std::printf("trace written to %s\n", trace_path.c_str());
  if (plots) {
    std::string svg_path = rr.plots_out.value_or(default_stem(rr) + ".svg");
    write_trace_svg(trace, rr.def.spec, svg_path);
    std::printf("plots written to %s\n", svg_path.c_str());
  }

  if (trace.aborted) {
    std::fprintf(stderr, "error: %s\n", trace.abort_reason.c_str());
    return 1;
  }
  if (trace.left_domain)
    std::printf("left the inflated operating set at t = %s s\n",
                format_g17(trace.first_exit_time).c_str());
  if (trace.flags != 0) {
    std::printf("constraint violations:%s%s%s  worst excess q %s, v %s, u %s\n",
                (trace.flags & kFlagPosition) ? " position" : "",
                (trace.flags & kFlagVelocity) ? " velocity" : "",
                (trace.flags & kFlagInput) ? " input" : "",
                format_g17(trace.worst.worst_q).c_str(), format_g17(trace.worst.worst_v).c_str(),
                format_g17(trace.worst.worst_u).c_str());
    if (filtered) return 3;
  } else {
    std::printf("all position, velocity and torque constraints held\n");
  }
  return 0;
}

int cmd_verify(const std::string& cfg_path, int grid) {
  RunConfig rc = load_config(cfg_path);
  ResolvedRun rr = resolve(rc);

  ZcbfParams params;
  if (rr.params) {
    params = *rr.params;
  } else {
    SynthesisReport rep = run_algorithm1(*rr.def.model, rr.def.spec, rr.def.alpha, rr.def.beta,
                                        rr.def.delta0, rr.def.eta0, rr.synth);
    params = rep.chosen;
    std::printf("no explicit parameters in config; verifying the synthesized ones "
                "(gamma %s, nu %s, delta %s, eta_bar %s)\n",
                format_g17(params.gamma).c_str(), format_g17(params.nu).c_str(),
                format_g17(params.delta).c_str(), format_g17(params.eta_bar).c_str());
  }

  Barrier barrier(rr.def.spec, make_barrier_config(rr.def.alpha, rr.def.beta, params));
  VerifyOptions vopts;
  if (grid > 0) {
    vopts.grid_per_axis = grid;
    vopts.vel_grid = grid;
  }
  std::vector<PropertyResult> results = run_property_suite(rr.def.model, barrier, vopts);
  for (PropertyResult& r : run_qp_random_suite()) results.push_back(std::move(r));

  std::fputs(format_results(results).c_str(), stdout);
  int failed = 0;
  for (const PropertyResult& r : results) failed += !r.pass;
  if (failed) {
    std::printf("%d of %zu properties failed\n", failed, results.size());
    return 4;
  }
  std::printf("all %zu properties hold\n", results.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"safety filters with torque limits for two-link manipulators"};
  app.require_subcommand(1);

  std::string cfg_path, params_out;
  bool plots = false;
  int grid = 0;

  CLI::App* synth = app.add_subcommand("synth", "synthesize filter parameters from a config");
  synth->add_option("-c,--config", cfg_path, "config file")->required();
  synth->add_option("--params-out", params_out,
                    "write the config back with the synthesized parameters filled in");

  CLI::App* simulate = app.add_subcommand("simulate", "run the closed loop and save a trace");
  simulate->add_option("-c,--config", cfg_path, "config file")->required();
  simulate->add_flag("--plots", plots, "also render an SVG dashboard");

  CLI::App* verify = app.add_subcommand("verify", "sweep the operating set and check properties");
  verify->add_option("-c,--config", cfg_path, "config file")->required();
  verify->add_option("--grid", grid, "states per joint axis in the sweep");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*synth) return cmd_synth(cfg_path, params_out);
    if (*simulate) return cmd_simulate(cfg_path, plots);
    if (*verify) return cmd_verify(cfg_path, grid);
  } catch (const elsg::AssumptionError& e) {
    std::fprintf(stderr, "assumption failed: %s\n", e.what());
    return 2;
  } catch (const elsg::SynthesisError& e) {
    std::fprintf(stderr, "synthesis failed: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
