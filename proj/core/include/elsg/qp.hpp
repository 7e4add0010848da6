#pragma once

#include <Eigen/Dense>
#include <vector>

namespace elsg {

// min 0.5*||u - g||^2  subject to  A u >= b  and  lo <= u <= hi.
// The rows are handled in one unified list  C u >= d: the k rows of A first,
// then the m lower bounds (+e_i >= lo_i), then the m upper bounds (-e_i >= -hi_i).
struct QpProblem {
  Eigen::VectorXd g;
  Eigen::MatrixXd A;  // k x m, k may be zero
  Eigen::VectorXd b;
  Eigen::VectorXd lo, hi;

  int dim() const { return static_cast<int>(g.size()); }
  int rows() const { return static_cast<int>(A.rows()) + 2 * dim(); }
  Eigen::VectorXd row(int r) const;
  double rhs(int r) const;
  void validate() const;  // throws ConfigError on shape mismatch or non-finite data
};

enum class QpStatus { kOptimal, kInfeasible, kMaxIter };

const char* qp_status_name(QpStatus s);

struct QpResult {
  QpStatus status = QpStatus::kMaxIter;
  Eigen::VectorXd u;
  Eigen::VectorXd lambda;   // one multiplier per unified row
  std::vector<int> active;  // active unified rows, in insertion order
  int iterations = 0;
  double kkt_residual = 0.0;
  // infeasibility certificate: weights y >= 0 on `farkas_rows` with
  // C^T y = 0 and d^T y = farkas_gap > 0
  std::vector<int> farkas_rows;
  Eigen::VectorXd farkas_weights;
  double farkas_gap = 0.0;
};

struct QpOptions {
  double tol = 1e-9;
  int max_iter = 200;
};

// Dual active-set method (Goldfarb/Idnani style, identity Hessian). Starts at
// the unconstrained optimum u = g and adds violated rows one at a time; every
// intermediate iterate is dual feasible, so termination yields either the
// optimum or a certificate of an empty feasible set.
class QpSolver {
 public:
  explicit QpSolver(QpOptions opts = {}) : opts_(opts) {}

  // `hint` lists unified rows to try first when picking a violated constraint
  // (e.g. the active set of the previous solve). Order of the final result is
  // unaffected; a bad hint only costs iterations.
  QpResult solve(const QpProblem& p, const std::vector<int>& hint = {}) const;

  const QpOptions& options() const { return opts_; }

 private:
  QpOptions opts_;
};

}  // namespace elsg
