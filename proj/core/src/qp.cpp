#include "elsg/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "elsg/errors.hpp"

namespace elsg {

Eigen::VectorXd QpProblem::row(int r) const {
  const int k = static_cast<int>(A.rows());
  const int m = dim();
  if (r < k) return A.row(r).transpose();
  Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
  if (r < k + m) {
    e(r - k) = 1.0;
  } else {
    e(r - k - m) = -1.0;
  }
  return e;
}

double QpProblem::rhs(int r) const {
  const int k = static_cast<int>(A.rows());
  const int m = dim();
  if (r < k) return b(r);
  if (r < k + m) return lo(r - k);
  return -hi(r - k - m);
}

void QpProblem::validate() const {
  const int m = dim();
  if (m == 0) throw ConfigError("empty decision vector");
  if (lo.size() != m || hi.size() != m) throw ConfigError("box bound size mismatch");
  if (A.rows() != b.size()) throw ConfigError("constraint row/rhs count mismatch");
  if (A.rows() > 0 && A.cols() != m) throw ConfigError("constraint column count mismatch");
  if (!g.allFinite() || !lo.allFinite() || !hi.allFinite() || !b.allFinite() ||
      (A.size() > 0 && !A.allFinite())) {
    throw ConfigError("non-finite problem data");
  }
}

const char* qp_status_name(QpStatus s) {
  switch (s) {
    case QpStatus::kOptimal: return "ok";
    case QpStatus::kInfeasible: return "infeasible";
    case QpStatus::kMaxIter: return "maxiter";
  }
  return "?";
}

namespace {

struct ActiveSet {
  std::vector<int> rows;
  std::vector<double> lambda;
  Eigen::MatrixXd C;  // |rows| x m, kept in sync

  void add(const QpProblem& p, int r, double lam) {
    rows.push_back(r);
    lambda.push_back(lam);
    C.conservativeResize(static_cast<int>(rows.size()), p.dim());
    C.row(static_cast<int>(rows.size()) - 1) = p.row(r).transpose();
  }

  void drop(int idx) {
    const int n = static_cast<int>(rows.size());
    for (int j = idx; j + 1 < n; ++j) {
      rows[j] = rows[j + 1];
      lambda[j] = lambda[j + 1];
      C.row(j) = C.row(j + 1);
    }
    rows.pop_back();
    lambda.pop_back();
    C.conservativeResize(n - 1, C.cols());
  }

  int size() const { return static_cast<int>(rows.size()); }
};

double slack_of(const QpProblem& p, const Eigen::VectorXd& u, int r) {
  return p.row(r).dot(u) - p.rhs(r);
}

// most violated row: global scan, but rows in `hint` win when any of them is violated
int pick_violated(const QpProblem& p, const Eigen::VectorXd& u, const std::vector<int>& hint,
                  double tol) {
  int best = -1;
  double worst = -tol;
  for (int r : hint) {
    const double s = slack_of(p, u, r);
    if (s < worst) {
      worst = s;
      best = r;
    }
  }
  if (best >= 0) return best;
  for (int r = 0; r < p.rows(); ++r) {
    const double s = slack_of(p, u, r);
    if (s < worst) {
      worst = s;
      best = r;
    }
  }
  return best;
}

}  // namespace

QpResult QpSolver::solve(const QpProblem& p, const std::vector<int>& hint) const {
  p.validate();
  for (int r : hint) {
    if (r < 0 || r >= p.rows()) throw ConfigError("hint row index out of range");
  }
  const int m = p.dim();
  const double tol = opts_.tol;

  QpResult res;
  res.u = p.g;
  ActiveSet W;

  auto finish = [&](QpStatus status) {
    res.status = status;
    res.lambda = Eigen::VectorXd::Zero(p.rows());
    res.active = W.rows;
    for (int j = 0; j < W.size(); ++j) res.lambda(W.rows[j]) = W.lambda[j];
    // stationarity, complementarity, and primal feasibility in one number
    Eigen::VectorXd grad = res.u - p.g;
    for (int j = 0; j < W.size(); ++j) grad -= W.lambda[j] * W.C.row(j).transpose();
    double resid = grad.lpNorm<Eigen::Infinity>();
    for (int r = 0; r < p.rows(); ++r) {
      const double s = slack_of(p, res.u, r);
      resid = std::max(resid, std::abs(res.lambda(r) * s));
      if (status == QpStatus::kOptimal) resid = std::max(resid, -std::min(s, 0.0));
    }
    res.kkt_residual = resid;
    return res;
  };

  for (res.iterations = 0; res.iterations < opts_.max_iter; ++res.iterations) {
    const int sel = pick_violated(p, res.u, hint, tol);
    if (sel < 0) return finish(QpStatus::kOptimal);

    const Eigen::VectorXd cp = p.row(sel);
    double lam_sel = 0.0;

    // chase this row until it joins the active set or proves infeasibility
    while (true) {
      Eigen::VectorXd r_dual(W.size());
      Eigen::VectorXd z = cp;
      if (W.size() > 0) {
        const Eigen::MatrixXd gram = W.C * W.C.transpose();
        r_dual = gram.ldlt().solve(W.C * cp);
        z -= W.C.transpose() * r_dual;
      }
      const double zz = z.squaredNorm();

      // dual step bound from the multipliers that would be driven to zero
      double t1 = std::numeric_limits<double>::infinity();
      int blocker = -1;
      for (int j = 0; j < W.size(); ++j) {
        if (r_dual(j) > tol) {
          const double t = W.lambda[j] / r_dual(j);
          if (t < t1) {
            t1 = t;
            blocker = j;
          }
        }
      }

      if (zz <= tol * tol) {
        if (blocker < 0) {
          // c_sel is a nonnegative-infeasible combination of active rows
          res.farkas_rows.clear();
          res.farkas_rows.push_back(sel);
          std::vector<double> wts{1.0};
          double gap = p.rhs(sel);
          for (int j = 0; j < W.size(); ++j) {
            res.farkas_rows.push_back(W.rows[j]);
            wts.push_back(std::max(0.0, -r_dual(j)));
            gap -= r_dual(j) * p.rhs(W.rows[j]);
          }
          res.farkas_weights =
              Eigen::Map<const Eigen::VectorXd>(wts.data(), static_cast<int>(wts.size()));
          res.farkas_gap = gap;
          return finish(QpStatus::kInfeasible);
        }
        // step in the dual only: u unchanged, one multiplier hits zero
        for (int j = 0; j < W.size(); ++j) W.lambda[j] -= t1 * r_dual(j);
        lam_sel += t1;
        W.drop(blocker);
        continue;
      }

      const double s_sel = cp.dot(res.u) - p.rhs(sel);
      const double t2 = -s_sel / zz;
      const double t = std::min(t1, t2);
      res.u += t * z;
      for (int j = 0; j < W.size(); ++j) W.lambda[j] -= t * r_dual(j);
      lam_sel += t;
      if (t2 <= t1) {
        W.add(p, sel, lam_sel);
        break;
      }
      W.drop(blocker);
    }
  }
  return finish(QpStatus::kMaxIter);
}

}  // namespace elsg
