#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace elsg {

// Axis-aligned box, lo(i) <= x(i) <= hi(i).
struct Box {
  Eigen::VectorXd lo, hi;
  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Eigen::VectorXd& x, double tol = 0.0) const;
  Box inflated(double margin) const;
};

// Worker count for data-parallel sweeps; honours the ELSG_THREADS env var.
int worker_count();

// Chunked parallel loop over [0, count). Deterministic as long as `body` only
// writes to per-index state; reductions should be per-chunk then combined.
void parallel_for(std::int64_t count,
                  const std::function<void(std::int64_t begin, std::int64_t end)>& body);

// Inclusive linspace with n >= 2 points (n == 1 returns {lo}).
std::vector<double> linspace(double lo, double hi, int n);

// Shortest round-trip decimal form (17 significant digits).
std::string format_g17(double x);

// Write `content` to `path` via temp file + rename so readers never observe a
// partial file.
void atomic_write_file(const std::string& path, const std::string& content);

std::string trim(const std::string& s);
std::vector<std::string> split_ws(const std::string& s);

}  // namespace elsg
