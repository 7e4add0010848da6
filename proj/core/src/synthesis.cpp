#include "elsg/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <vector>

#include "elsg/errors.hpp"
#include "elsg/util.hpp"

namespace elsg {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double row_max_abs(const Eigen::MatrixXd& M, int j) { return M.row(j).cwiseAbs().maxCoeff(); }

// gather the position grid once; sweeps below iterate the snapshot in parallel
struct PositionGrid {
  std::vector<Eigen::VectorXd> native, constraint;
};

PositionGrid collect_grid(const SystemModel& model, const Box& box, int per_axis) {
  PositionGrid g;
  model.sample_positions(box, per_axis,
                         [&](const Eigen::VectorXd& qn, const Eigen::VectorXd& qc) {
                           g.native.push_back(qn);
                           g.constraint.push_back(qc);
                         });
  if (g.native.empty()) {
    throw SynthesisError("position grid is empty; native box does not reach the target box");
  }
  return g;
}

std::string vec_to_string(const Eigen::VectorXd& v) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < v.size(); ++i) os << (i ? ", " : "") << format_g17(v(i));
  os << ")";
  return os.str();
}

}  // namespace

BarrierConfig make_barrier_config(const ClassKFn& alpha, const ClassKFn& beta,
                                  const ZcbfParams& p) {
  BarrierConfig cfg;
  cfg.alpha = alpha;
  cfg.beta = beta;
  cfg.gamma = p.gamma;
  cfg.nu = p.nu;
  cfg.delta = p.delta;
  cfg.eta_bar = p.eta_bar;
  return cfg;
}

double HoldMargin::eta(double T) const { return gain * std::expm1(rate * T); }

double HoldMargin::inverse(double eta_target) const {
  if (eta_target < 0.0) throw ConfigError("hold margin target must be nonnegative");
  if (!(gain > 0.0) || !(rate > 0.0)) throw NumericError("hold margin model is degenerate");
  return std::log1p(eta_target / gain) / rate;
}

AuthorityCheck verify_authority(const SystemModel& model, const ConstraintSpec& spec,
                                double delta0, double eta0, int grid_per_axis) {
  spec.validate();
  if (delta0 < 0.0 || eta0 < 0.0) throw ConfigError("inflation and margin must be nonnegative");
  const PositionGrid grid = collect_grid(model, spec.position_box(delta0), grid_per_axis);
  const int m = model.input_dim();

  AuthorityCheck out;
  out.epsilon_max = kInf;
  std::mutex mu;
  parallel_for(static_cast<std::int64_t>(grid.native.size()),
               [&](std::int64_t begin, std::int64_t end) {
                 double local_best = kInf;
                 Eigen::VectorXd local_q;
                 int local_j = -1;
                 for (std::int64_t s = begin; s < end; ++s) {
                   const Eigen::VectorXd& qn = grid.native[s];
                   const Eigen::MatrixXd gp = model.G_pinv(qn);
                   const Eigen::VectorXd f3 = model.f3(qn);
                   for (int j = 0; j < m; ++j) {
                     const double gj = row_max_abs(gp, j);
                     if (!(gj > 0.0)) {
                       // channel never excited by the margin terms; only the bias matters
                       if (spec.u_max(j) <= std::abs(f3(j))) {
                         local_best = -kInf;
                         local_q = qn;
                         local_j = j;
                       }
                       continue;
                     }
                     const double eps = (spec.u_max(j) - std::abs(f3(j))) / gj - eta0;
                     if (eps < local_best) {
                       local_best = eps;
                       local_q = qn;
                       local_j = j;
                     }
                   }
                 }
                 std::lock_guard<std::mutex> lock(mu);
                 if (local_best < out.epsilon_max) {
                   out.epsilon_max = local_best;
                   out.worst_q = local_q;
                   out.worst_channel = local_j;
                 }
               });
  if (!(out.epsilon_max > 0.0) || !std::isfinite(out.epsilon_max)) {
    std::ostringstream os;
    os << "insufficient control authority: margin " << format_g17(out.epsilon_max)
       << " at q = " << vec_to_string(out.worst_q) << ", channel " << (out.worst_channel + 1);
    throw AssumptionError(os.str());
  }
  return out;
}

double gamma1_star(const ConstraintSpec& spec, const ClassKFn& alpha, double delta0) {
  const double a = alpha.value(2.0 * delta0 + spec.max_width());
  return spec.v_max.minCoeff() / a;
}

double gamma2_star(const SystemModel& model, const ConstraintSpec& spec, const ClassKFn& alpha,
                   double delta0, double eta0, double epsilon, const DynamicsConstants& consts,
                   int grid_per_axis) {
  const double a = alpha.value(2.0 * delta0 + spec.max_width());
  const PositionGrid grid = collect_grid(model, spec.position_box(delta0), grid_per_axis);
  const int n = spec.dof();
  const int m = model.input_dim();

  double best = kInf;
  bool authority_hole = false;
  std::mutex mu;
  parallel_for(static_cast<std::int64_t>(grid.native.size()),
               [&](std::int64_t begin, std::int64_t end) {
                 double local_best = kInf;
                 bool local_hole = false;
                 for (std::int64_t s = begin; s < end; ++s) {
                   const Eigen::VectorXd& qn = grid.native[s];
                   const Eigen::VectorXd& qc = grid.constraint[s];
                   double y = 0.0;
                   for (int i = 0; i < n; ++i) {
                     y = std::max(y, alpha.derivative(spec.q_max(i) - qc(i)));
                     y = std::max(y, alpha.derivative(qc(i) - spec.q_min(i)));
                   }
                   const Eigen::MatrixXd gp = model.G_pinv(qn);
                   const Eigen::VectorXd f3 = model.f3(qn);
                   for (int j = 0; j < m; ++j) {
                     const double gj = row_max_abs(gp, j);
                     const double denom = gj * y + consts.k_c * a;
                     if (!(denom > 0.0)) continue;  // channel imposes no gain restriction here
                     const double dj = consts.f_bound(j) / denom;
                     const double cj =
                         (std::abs(f3(j)) + (epsilon + eta0) * gj - spec.u_max(j)) / (denom * a);
                     if (cj >= 0.0) {
                       local_hole = true;
                       continue;
                     }
                     const double root = 0.5 * (-dj + std::sqrt(dj * dj - 4.0 * cj));
                     local_best = std::min(local_best, root);
                   }
                 }
                 std::lock_guard<std::mutex> lock(mu);
                 best = std::min(best, local_best);
                 authority_hole = authority_hole || local_hole;
               });
  if (authority_hole) {
    throw AssumptionError(
        "insufficient control authority for the requested margin: the gain quadratic has no "
        "positive root somewhere on the position grid");
  }
  return best;
}

double gamma3_star(const ConstraintSpec& spec, const ClassKFn& alpha, double delta0,
                   double epsilon) {
  const double a = alpha.value(2.0 * delta0 + spec.max_width());
  const double L = alpha.lipschitz_on(-delta0, spec.max_width() + delta0);
  return std::sqrt(epsilon / (L * a));
}

namespace {

// |beta(zeta^d)| < beta(rho_bar^d) at one inflation value
bool inflation_ok(const ConstraintSpec& spec, const ClassKFn& alpha, const ClassKFn& beta,
                  double gamma, double d, int scalar_grid) {
  BarrierConfig cfg;
  cfg.alpha = alpha;
  cfg.beta = beta;
  cfg.gamma = gamma;
  cfg.nu = 1.0;
  cfg.delta = d;
  const Barrier bar(spec, cfg);
  const double rb = bar.rho_lower_bound(scalar_grid);
  if (!(rb > 0.0)) return false;
  return std::abs(beta.value(bar.zeta(scalar_grid))) < beta.value(rb);
}

}  // namespace

DeltaStarResult delta_star(const ConstraintSpec& spec, const ClassKFn& alpha,
                           const ClassKFn& beta, double gamma, double delta0, int delta_grid,
                           int scalar_grid) {
  DeltaStarResult out;
  if (delta0 == 0.0) {
    // no inflation requested; still certify that some positive inflation exists
    const auto probe = linspace(0.1 / delta_grid, 0.1, delta_grid);
    double star = 0.0;
    for (double d : probe) {
      if (!inflation_ok(spec, alpha, beta, gamma, d, scalar_grid)) break;
      star = d;
    }
    if (!(star > 0.0)) {
      throw SynthesisError(
          "no positive inflation satisfies |beta(zeta)| < beta(rho floor); the shaping pair "
          "fails the margin-preservation requirement near zero");
    }
    out.delta_star = star;
    out.chosen = 0.0;
    return out;
  }
  const auto grid = linspace(0.0, delta0, delta_grid);
  double star = -1.0;
  for (double d : grid) {
    if (!inflation_ok(spec, alpha, beta, gamma, d, scalar_grid)) break;
    star = d;
  }
  if (!(star > 0.0)) {
    throw SynthesisError(
        "inflation certification failed immediately above zero; the shaping pair fails the "
        "margin-preservation requirement");
  }
  out.delta_star = star;
  out.chosen = star;  // == delta0 when every grid point certified
  return out;
}

SynthesisReport run_algorithm1(const SystemModel& model, const ConstraintSpec& spec,
                               const ClassKFn& alpha, const ClassKFn& beta, double delta0,
                               double eta0, const SynthesisOptions& opts) {
  spec.validate();
  if (delta0 < 0.0 || eta0 < 0.0) throw ConfigError("inflation and margin must be nonnegative");
  if (!(opts.epsilon_fraction > 0.0) || opts.epsilon_fraction > 1.0) {
    throw ConfigError("epsilon fraction must lie in (0, 1]");
  }
  if (opts.policy.gamma_rule == GammaRule::kFraction &&
      (!(opts.policy.gamma_fraction > 0.0) || opts.policy.gamma_fraction > 1.0)) {
    throw ConfigError("gamma fraction must lie in (0, 1]");
  }

  SynthesisReport rep;
  rep.alpha = alpha;
  rep.beta = beta;
  rep.delta0 = delta0;
  rep.eta0 = eta0;
  rep.grid_per_axis = opts.grid_per_axis;
  rep.delta_grid = opts.delta_grid;
  rep.scalar_grid = opts.scalar_grid;

  // admissibility of the shaping pair
  rep.alpha_margin = check_margin_preserving(alpha, spec.q_min, spec.q_max, delta0);
  if (!rep.alpha_margin.ok) {
    std::ostringstream os;
    os << "position-margin check failed: minimum " << format_g17(rep.alpha_margin.d)
       << " at joint " << (rep.alpha_margin.worst_joint + 1) << ", offset "
       << format_g17(rep.alpha_margin.worst_e);
    throw AssumptionError(os.str());
  }
  rep.beta_check = check_superadditive(beta, 20000);
  if (!rep.beta_check.ok) {
    std::ostringstream os;
    os << "restoring-function superadditivity falsified: margin "
       << format_g17(rep.beta_check.worst_margin) << " at c = " << format_g17(rep.beta_check.bad_c)
       << ", b = " << format_g17(rep.beta_check.bad_b);
    throw AssumptionError(os.str());
  }

  // model bounds over the inflated box
  EstimateOptions est = opts.estimate;
  est.grid_per_axis = opts.grid_per_axis;
  est.vel_cap = spec.v_max.minCoeff();
  rep.constants = estimate_constants(model, spec.position_box(delta0), est);

  // torque-authority margin
  const AuthorityCheck auth = verify_authority(model, spec, delta0, eta0, opts.grid_per_axis);
  rep.epsilon_max = auth.epsilon_max;
  rep.epsilon = opts.epsilon_fraction * auth.epsilon_max;

  rep.a = alpha.value(2.0 * delta0 + spec.max_width());
  rep.alpha_lipschitz = alpha.lipschitz_on(-delta0, spec.max_width() + delta0);

  // gain bounds, then the gain
  rep.gamma1 = gamma1_star(spec, alpha, delta0);
  rep.gamma2 = gamma2_star(model, spec, alpha, delta0, eta0, rep.epsilon, rep.constants,
                           opts.grid_per_axis);
  rep.gamma3 = gamma3_star(spec, alpha, delta0, rep.epsilon);
  const double gamma_cap = std::min({rep.gamma1, rep.gamma2, rep.gamma3});
  rep.chosen.gamma = opts.policy.gamma_rule == GammaRule::kFraction
                         ? opts.policy.gamma_fraction * gamma_cap
                         : gamma_cap;
  rep.v_bar = rep.chosen.gamma * rep.a;

  // inflation certification
  const DeltaStarResult ds = delta_star(spec, alpha, beta, rep.chosen.gamma, delta0,
                                        opts.delta_grid, opts.scalar_grid);
  rep.delta_star = ds.delta_star;
  rep.chosen.delta = ds.chosen;

  // shaping extremes at the chosen inflation
  {
    BarrierConfig cfg = make_barrier_config(alpha, beta, rep.chosen);
    cfg.nu = 1.0;  // nu not chosen yet; the sweeps below do not use it
    const Barrier bar(spec, cfg);
    rep.rho_bar = bar.rho_lower_bound(opts.scalar_grid);
    rep.zeta = bar.zeta(opts.scalar_grid);
    rep.b_max = bar.b_max(opts.scalar_grid);
  }
  if (!(rep.rho_bar > 0.0)) {
    throw SynthesisError("certified floor of the barrier midpoint is not positive");
  }

  // restoring-gain interval
  const double g2la = rep.chosen.gamma * rep.chosen.gamma * rep.alpha_lipschitz * rep.a;
  rep.nu1 = g2la / beta.value(rep.rho_bar);
  rep.nu2 = rep.zeta == 0.0 ? kInf : rep.epsilon / std::abs(beta.value(rep.zeta));
  if (!(rep.nu1 < rep.nu2)) {
    throw SynthesisError("restoring-gain interval is empty; inflation exceeded its certificate");
  }
  switch (opts.policy.nu_rule) {
    case NuRule::kNu1:
      rep.chosen.nu = rep.nu1;
      break;
    case NuRule::kNu2:
      if (!std::isfinite(rep.nu2)) {
        throw SynthesisError("upper restoring-gain endpoint is unbounded; pick another rule");
      }
      rep.chosen.nu = rep.nu2;
      break;
    case NuRule::kMidpointLog:
      rep.chosen.nu = std::isfinite(rep.nu2) ? std::sqrt(rep.nu1 * rep.nu2) : 2.0 * rep.nu1;
      break;
  }

  // jump margin
  rep.eta_star = 0.5 * (rep.chosen.nu * beta.value(rep.rho_bar) - g2la);
  if (eta0 == 0.0) {
    rep.chosen.eta_bar = 0.0;
  } else {
    if (!(rep.eta_star > 0.0)) {
      throw SynthesisError(
          "jump-margin budget is not positive: the restoring gain sits at the bottom of its "
          "interval");
    }
    rep.chosen.eta_bar = std::min(eta0, rep.eta_star);
  }

  // sampling margin model
  rep.c1 = rep.constants.lip_drift;
  rep.c2 = beta.lipschitz_on(rep.zeta, rep.b_max);
  rep.c3 = rep.constants.lip_G;
  rep.c4 = spec.u_max.maxCoeff();
  rep.c5 = rep.constants.k_m_inf *
           (rep.constants.k_c * rep.v_bar * rep.v_bar + rep.constants.f_bound.maxCoeff() * rep.v_bar +
            rep.constants.k_g + rep.c4);
  rep.hold.rate = rep.c1 + rep.c2 * rep.c4;
  rep.hold.gain = (rep.c1 + rep.c2 + rep.c3 * rep.c4) * rep.c5 / rep.hold.rate;
  rep.t_max = rep.chosen.eta_bar > 0.0 ? rep.hold.inverse(rep.chosen.eta_bar) : 0.0;

  return rep;
}

std::string SynthesisReport::format() const {
  std::ostringstream os;
  auto line = [&](const std::string& k, const std::string& v) { os << "  " << k << ": " << v << "\n"; };
  auto num = [&](const std::string& k, double v) { line(k, format_g17(v)); };

  os << "barrier parameter design report\n";
  os << "inputs\n";
  line("alpha", alpha.name());
  line("beta", beta.name());
  num("delta0", delta0);
  num("eta0", eta0);
  os << "admissibility\n";
  num("position-margin floor", alpha_margin.d);
  line("superadditivity", beta_check.ok ? "held over the falsification sweep" : "FALSIFIED");
  os << "authority\n";
  num("epsilon_max", epsilon_max);
  num("epsilon", epsilon);
  os << "gain bounds\n";
  num("gamma1*", gamma1);
  num("gamma2*", gamma2);
  num("gamma3*", gamma3);
  num("delta*", delta_star);
  num("nu1*", nu1);
  num("nu2*", nu2);
  num("eta*", eta_star);
  os << "chosen parameters\n";
  num("gamma", chosen.gamma);
  num("delta", chosen.delta);
  num("nu", chosen.nu);
  num("eta_bar", chosen.eta_bar);
  os << "derived constants\n";
  num("a", a);
  num("v_bar", v_bar);
  num("alpha Lipschitz", alpha_lipschitz);
  num("rho floor", rho_bar);
  num("zeta", zeta);
  num("largest barrier value", b_max);
  num("k_c", constants.k_c);
  num("k_f", constants.f_bound.size() ? constants.f_bound.maxCoeff() : 0.0);
  num("k_m_inf", constants.k_m_inf);
  num("k_g", constants.k_g);
  num("drift Lipschitz", constants.lip_drift);
  num("G Lipschitz", constants.lip_G);
  num("c1", c1);
  num("c2", c2);
  num("c3", c3);
  num("c4", c4);
  num("c5", c5);
  os << "hold-interval margin: eta(T) = gain*(exp(rate*T) - 1)\n";
  num("gain", hold.gain);
  num("rate", hold.rate);
  if (chosen.eta_bar > 0.0) {
    num("largest hold time T_max with eta(T) <= eta_bar", t_max);
  } else {
    line("largest hold time T_max with eta(T) <= eta_bar",
         "none (eta_bar = 0; sampled control needs a positive jump margin)");
  }
  os << "grids\n";
  num("positions per axis", grid_per_axis);
  num("inflation grid", delta_grid);
  num("scalar grid", scalar_grid);
  return os.str();
}

}  // namespace elsg
