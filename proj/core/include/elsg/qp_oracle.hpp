#pragma once

#include "elsg/qp.hpp"

namespace elsg {

// Exhaustive reference solver: enumerates every candidate active set of size
// <= dim, solves the equality-constrained projection for each, and keeps the
// best KKT point. Exponential in the row count -- for cross-checking the fast
// solver on small instances only.
QpResult solve_reference(const QpProblem& p, double tol = 1e-9);

}  // namespace elsg
