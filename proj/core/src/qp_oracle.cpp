#include "elsg/qp_oracle.hpp"

#include <functional>
#include <limits>
#include <vector>

namespace elsg {
namespace {

bool feasible(const QpProblem& p, const Eigen::VectorXd& u, double slack) {
  for (int r = 0; r < p.rows(); ++r) {
    if (p.row(r).dot(u) - p.rhs(r) < -slack) return false;
  }
  return true;
}

}  // namespace

QpResult solve_reference(const QpProblem& p, double tol) {
  p.validate();
  const int m = p.dim();
  const int total = p.rows();

  QpResult best;
  best.status = QpStatus::kInfeasible;
  best.u = p.g;
  best.lambda = Eigen::VectorXd::Zero(total);
  double best_obj = std::numeric_limits<double>::infinity();

  std::vector<int> subset;
  int tried = 0;

  // depth-first enumeration of row subsets of size <= m
  auto consider = [&](const std::vector<int>& rows) {
    ++tried;
    const int s = static_cast<int>(rows.size());
    Eigen::VectorXd u;
    Eigen::VectorXd lam = Eigen::VectorXd::Zero(s);
    if (s == 0) {
      u = p.g;
    } else {
      Eigen::MatrixXd C(s, m);
      Eigen::VectorXd d(s);
      for (int j = 0; j < s; ++j) {
        C.row(j) = p.row(rows[j]).transpose();
        d(j) = p.rhs(rows[j]);
      }
      const Eigen::MatrixXd gram = C * C.transpose();
      Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
      if (lu.rank() < s) return;  // dependent rows; a smaller subset covers this point
      lam = lu.solve(d - C * p.g);
      u = p.g + C.transpose() * lam;
    }
    if ((lam.size() > 0 && lam.minCoeff() < -tol) || !feasible(p, u, 1e-8)) return;
    const double obj = 0.5 * (u - p.g).squaredNorm();
    if (obj < best_obj - 1e-15) {
      best_obj = obj;
      best.status = QpStatus::kOptimal;
      best.u = u;
      best.active = rows;
      best.lambda.setZero();
      for (int j = 0; j < s; ++j) best.lambda(rows[j]) = lam(j);
    }
  };

  std::function<void(int)> walk = [&](int start) {
    consider(subset);
    if (static_cast<int>(subset.size()) == m) return;
    for (int r = start; r < total; ++r) {
      subset.push_back(r);
      walk(r + 1);
      subset.pop_back();
    }
  };
  walk(0);
  best.iterations = tried;
  return best;
}

}  // namespace elsg
