#include "elsg/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>

#include "elsg/controller.hpp"
#include "elsg/errors.hpp"
#include "elsg/qp.hpp"
#include "elsg/qp_oracle.hpp"
#include "elsg/synthesis.hpp"
#include "elsg/util.hpp"

namespace elsg {
namespace {

std::string state_text(const Eigen::VectorXd& q, const Eigen::VectorXd& v) {
  std::string s = "q = (";
  for (Eigen::Index i = 0; i < q.size(); ++i) s += (i ? " " : "") + format_g17(q(i));
  s += "), v = (";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_g17(v(i));
  s += ")";
  return s;
}

// tracks the smallest slack and where it occurred
struct WorstTracker {
  double margin = std::numeric_limits<double>::infinity();
  std::string where;
  long fails = 0;
  std::vector<std::string> examples;

  void note(double slack, double tol, const std::string& text) {
    if (slack < margin) {
      margin = slack;
      where = text;
    }
    if (slack < -tol) {
      ++fails;
      if (examples.size() < 5) examples.push_back(text + "  (slack " + format_g17(slack) + ")");
    }
  }
  void merge(const WorstTracker& o) {
    if (o.margin < margin) {
      margin = o.margin;
      where = o.where;
    }
    fails += o.fails;
    for (const std::string& e : o.examples)
      if (examples.size() < 5) examples.push_back(e);
  }
};

PropertyResult seal(const std::string& name, const WorstTracker& w, double tol, long states) {
  PropertyResult r;
  r.name = name;
  r.tol = tol;
  r.states = states;
  r.pass = states > 0 && w.fails == 0;
  r.worst_margin = std::isfinite(w.margin) ? w.margin : 0.0;
  r.detail = states == 0 ? "no states examined" : "worst at " + w.where;
  r.counterexamples = w.examples;
  return r;
}

}  // namespace

std::vector<PropertyResult> run_property_suite(std::shared_ptr<const SystemModel> model,
                                               const Barrier& barrier,
                                               const VerifyOptions& opts) {
  std::vector<PropertyResult> out;
  const ConstraintSpec& spec = barrier.spec();
  const BarrierConfig& cfg = barrier.config();
  const int n = spec.dof();
  const int m = spec.input_dim();
  const double delta = cfg.delta;
  const double gamma = cfg.gamma;

  {  // input-authority
    PropertyResult r;
    r.name = "input-authority";
    r.tol = 0.0;
    try {
      AuthorityCheck ac =
          verify_authority(*model, spec, delta, cfg.eta_bar, opts.grid_per_axis);
      r.pass = ac.epsilon_max > 0.0;
      r.worst_margin = ac.epsilon_max;
      std::string qtxt;
      for (Eigen::Index i = 0; i < ac.worst_q.size(); ++i)
        qtxt += (i ? " " : "") + format_g17(ac.worst_q(i));
      r.detail = "binding at q = (" + qtxt + "), channel " + std::to_string(ac.worst_channel + 1);
      r.states = 1;
    } catch (const AssumptionError& e) {
      r.pass = false;
      r.worst_margin = -std::numeric_limits<double>::infinity();
      r.detail = e.what();
      r.counterexamples.push_back(e.what());
    }
    out.push_back(std::move(r));
  }

  {  // jump-margin: nu*beta(rho_bar) must dominate gamma^2*L*a plus both margins
    PropertyResult r;
    r.name = "jump-margin";
    r.tol = 0.0;
    r.states = 1;
    const double rho_bar = barrier.rho_lower_bound(opts.scalar_grid);
    const double a = barrier.a_constant();
    const double L = cfg.alpha.lipschitz_on(-delta, spec.max_width() + delta);
    const double lhs = cfg.nu * cfg.beta.value(rho_bar);
    const double rhs = gamma * gamma * L * a + 2.0 * cfg.eta_bar;
    r.worst_margin = lhs - rhs;
    r.pass = rho_bar > 0.0 && r.worst_margin >= 0.0;
    r.detail = "nu*beta(rho_bar) = " + format_g17(lhs) + " vs gamma^2*L*a + 2*eta_bar = " +
               format_g17(rhs) + " (rho_bar = " + format_g17(rho_bar) + ")";
    if (!r.pass) r.counterexamples.push_back(r.detail);
    out.push_back(std::move(r));
  }

  // ---- swept domain: explicit control, stacked rows, filter feasibility ----
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> positions;  // native, constraint
  model->sample_positions(spec.position_box(delta), opts.grid_per_axis,
                          [&](const Eigen::VectorXd& qn, const Eigen::VectorXd& qc) {
                            positions.emplace_back(qn, qc);
                          });

  WorstTracker sat, rows, feas;
  std::mutex mu;
  std::atomic<long> swept{0};

  parallel_for(positions.size(), [&](std::size_t begin, std::size_t end) {
    WorstTracker lsat, lrows, lfeas;
    long local = 0;
    QpSolver solver(QpOptions{});
    std::vector<int> hint;
    Eigen::VectorXd v_c(n), lo(n), hi(n);
    for (std::size_t pi = begin; pi < end; ++pi) {
      const Eigen::VectorXd& qn = positions[pi].first;
      const Eigen::VectorXd& qc = positions[pi].second;
      for (int i = 0; i < n; ++i) {
        lo(i) = -gamma * cfg.alpha.value(barrier.h_low(i, qc(i)) + delta);
        hi(i) = gamma * cfg.alpha.value(barrier.h_up(i, qc(i)) + delta);
      }
      std::vector<int> idx(static_cast<std::size_t>(n), 0);
      while (true) {
        for (int i = 0; i < n; ++i) {
          double t = opts.vel_grid > 1
                         ? static_cast<double>(idx[static_cast<std::size_t>(i)]) /
                               static_cast<double>(opts.vel_grid - 1)
                         : 0.5;
          v_c(i) = lo(i) + t * (hi(i) - lo(i));
        }
        Eigen::VectorXd vn = model->native_vel(qn, v_c);
        const std::string where = state_text(qc, v_c);
        ++local;

        Eigen::VectorXd ut = explicit_safe_control(*model, barrier, qn, vn, 0.0);
        double s_sat = std::numeric_limits<double>::infinity();
        for (int j = 0; j < m; ++j) s_sat = std::min(s_sat, spec.u_max(j) - std::abs(ut(j)));
        lsat.note(s_sat, opts.sweep_tol, where);

        StackedConstraints sc = build_constraints(*model, barrier, qn, vn, 0.0);
        double s_rows = (sc.A * ut - sc.b).minCoeff();
        lrows.note(s_rows, opts.sweep_tol, where);

        QpProblem p;
        p.g = Eigen::VectorXd::Zero(m);
        p.A = sc.A;
        p.b = sc.b;
        p.lo = -spec.u_max;
        p.hi = spec.u_max;
        QpResult res = solver.solve(p, hint);
        if (res.status == QpStatus::kOptimal) {
          hint = res.active;
          lfeas.note(0.0, opts.sweep_tol, where);
        } else {
          hint.clear();
          lfeas.note(-1.0, opts.sweep_tol,
                     where + "  [" + qp_status_name(res.status) + "]");
        }

        int d = n - 1;
        while (d >= 0 && ++idx[static_cast<std::size_t>(d)] >= opts.vel_grid) {
          idx[static_cast<std::size_t>(d)] = 0;
          --d;
        }
        if (d < 0) break;
      }
    }
    swept += local;
    std::lock_guard<std::mutex> lock(mu);
    sat.merge(lsat);
    rows.merge(lrows);
    feas.merge(lfeas);
  });

  out.push_back(seal("explicit-control-saturation", sat, opts.sweep_tol, swept.load()));
  out.push_back(seal("explicit-control-rows", rows, opts.sweep_tol, swept.load()));
  {
    PropertyResult r = seal("qp-feasible-everywhere", feas, opts.sweep_tol, swept.load());
    r.worst_margin = feas.fails > 0 ? -1.0 : 0.0;
    r.detail = feas.fails > 0 ? "solver failed at " + feas.where
                              : "solved at every swept state";
    out.push_back(std::move(r));
  }

  // ---- sampled identities over the inflated domain ----
  {
    std::mt19937 rng(opts.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    WorstTracker vel, gap;
    const double v_bar = barrier.velocity_bound();
    Eigen::VectorXd qc(n), vc(n);
    for (int s = 0; s < opts.random_states; ++s) {
      for (int i = 0; i < n; ++i) {
        double qlo = spec.q_min(i) - delta, qhi = spec.q_max(i) + delta;
        qc(i) = qlo + unit(rng) * (qhi - qlo);
        double vlo = -gamma * cfg.alpha.value(barrier.h_low(i, qc(i)) + delta);
        double vhi = gamma * cfg.alpha.value(barrier.h_up(i, qc(i)) + delta);
        vc(i) = vlo + unit(rng) * (vhi - vlo);
      }
      const std::string where = state_text(qc, vc);
      vel.note(v_bar - vc.cwiseAbs().maxCoeff(), opts.random_tol, where);
      double worst_gap = 0.0;
      for (int i = 0; i < n; ++i) {
        double g = std::abs(barrier.b_up(i, qc(i), vc(i)) + barrier.b_low(i, qc(i), vc(i)) -
                            2.0 * barrier.rho(i, qc(i)));
        worst_gap = std::max(worst_gap, g);
      }
      gap.note(opts.exact_tol - worst_gap, 0.0, where + "  (gap " + format_g17(worst_gap) + ")");
    }
    out.push_back(seal("velocity-bound", vel, opts.random_tol, opts.random_states));
    PropertyResult g = seal("gap-identity", gap, 0.0, opts.random_states);
    g.tol = opts.exact_tol;
    out.push_back(std::move(g));
  }

  {  // zeta-closed-form
    PropertyResult r;
    r.name = "zeta-closed-form";
    r.tol = opts.random_tol;
    r.states = 1;
    double scanned = barrier.zeta(opts.scalar_grid);
    double closed = barrier.zeta_closed_form();
    double err = std::abs(scanned - closed);
    r.worst_margin = opts.random_tol * std::max(1.0, std::abs(closed)) - err;
    r.pass = r.worst_margin >= 0.0;
    r.detail = "scanned " + format_g17(scanned) + " vs closed form " + format_g17(closed);
    if (!r.pass) r.counterexamples.push_back(r.detail);
    out.push_back(std::move(r));
  }

  return out;
}

std::vector<PropertyResult> run_qp_random_suite(int instances, unsigned seed, double tol,
                                                double dup_tol) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> dim_pick(1, 4);
  std::uniform_int_distribution<int> row_pick(0, 10);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  WorstTracker match, dup;
  QpSolver solver(QpOptions{});

  for (int inst = 0; inst < instances; ++inst) {
    const int m = dim_pick(rng);
    int k = row_pick(rng);
    QpProblem p;
    p.g = Eigen::VectorXd::NullaryExpr(m, [&](Eigen::Index) { return 2.0 * normal(rng); });
    p.lo = Eigen::VectorXd(m);
    p.hi = Eigen::VectorXd(m);
    for (int j = 0; j < m; ++j) {
      double a = 2.0 * normal(rng), b = 2.0 * normal(rng);
      p.lo(j) = std::min(a, b);
      p.hi(j) = std::max(a, b);
    }
    p.A = Eigen::MatrixXd::NullaryExpr(k, m, [&](Eigen::Index, Eigen::Index) { return normal(rng); });
    p.b = Eigen::VectorXd(k);
    // mix: most rows cut through a box point, some are pushed to infeasibility
    Eigen::VectorXd anchor =
        0.5 * (p.lo + p.hi) +
        Eigen::VectorXd::NullaryExpr(m, [&](Eigen::Index) { return normal(rng); })
            .cwiseProduct(0.5 * (p.hi - p.lo));
    for (int r = 0; r < k; ++r) {
      double shift = unit(rng) < 0.15 ? 3.0 + 2.0 * unit(rng) : 2.0 * unit(rng) - 0.5;
      p.b(r) = p.A.row(r).dot(anchor) - 1.0 + shift;
    }
    // duplicated rows are part of the required input family
    if (k >= 1 && unit(rng) < 0.35) {
      std::uniform_int_distribution<int> which(0, k - 1);
      int src = which(rng);
      p.A.conservativeResize(k + 1, m);
      p.b.conservativeResize(k + 1);
      p.A.row(k) = p.A.row(src);
      p.b(k) = p.b(src);
      ++k;
    }

    QpResult fast = solver.solve(p);
    QpResult slow = solve_reference(p);
    std::string where = "instance " + std::to_string(inst) + " (m=" + std::to_string(m) +
                        ", k=" + std::to_string(k) + ")";

    if (fast.status == QpStatus::kMaxIter) {
      match.note(-1.0, tol, where + "  [iteration cap]");
    } else if (fast.status != slow.status) {
      match.note(-1.0, tol,
                 where + "  [" + qp_status_name(fast.status) + " vs " +
                     qp_status_name(slow.status) + "]");
    } else if (fast.status == QpStatus::kOptimal) {
      double scale = std::max(1.0, slow.u.cwiseAbs().maxCoeff());
      double err = (fast.u - slow.u).cwiseAbs().maxCoeff() / scale;
      match.note(tol - err, 0.0, where + "  (err " + format_g17(err) + ")");
    } else {
      match.note(tol, 0.0, where);  // both infeasible
    }

    // appending a copy of an existing row must not move the solution
    if (p.A.rows() >= 1 && fast.status == QpStatus::kOptimal) {
      QpProblem pd = p;
      const int kk = static_cast<int>(p.A.rows());
      std::uniform_int_distribution<int> which(0, kk - 1);
      int src = which(rng);
      pd.A.conservativeResize(kk + 1, m);
      pd.b.conservativeResize(kk + 1);
      pd.A.row(kk) = p.A.row(src);
      pd.b(kk) = p.b(src);
      QpResult again = solver.solve(pd);
      if (again.status != QpStatus::kOptimal) {
        dup.note(-1.0, dup_tol, where + "  [duplicate row changed status]");
      } else {
        double err = (again.u - fast.u).cwiseAbs().maxCoeff();
        dup.note(dup_tol - err, 0.0, where + "  (moved " + format_g17(err) + ")");
      }
    }
  }

  std::vector<PropertyResult> out;
  out.push_back(seal("qp-matches-reference", match, 0.0, instances));
  out.back().tol = tol;
  out.push_back(seal("qp-duplicate-invariance", dup, 0.0, instances));
  out.back().tol = dup_tol;
  return out;
}

bool all_pass(const std::vector<PropertyResult>& results) {
  for (const PropertyResult& r : results)
    if (!r.pass) return false;
  return true;
}

std::string format_results(const std::vector<PropertyResult>& results) {
  std::ostringstream out;
  for (const PropertyResult& r : results) {
    out << (r.pass ? "PASS" : "FAIL") << "  " << r.name << "  worst margin "
        << format_g17(r.worst_margin) << " (tol " << format_g17(r.tol) << ", " << r.states
        << " states)";
    if (!r.detail.empty()) out << "\n      " << r.detail;
    out << '\n';
    for (const std::string& c : r.counterexamples) out << "      counterexample: " << c << '\n';
  }
  return out.str();
}

}  // namespace elsg
