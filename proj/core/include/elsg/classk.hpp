#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>

namespace elsg {

// Strictly increasing shaping function with f(0) = 0, from a small closed
// family so that derivatives and interval Lipschitz constants stay exact.
class ClassKFn {
 public:
  enum class Family { kLinear, kArctan, kCubic };

  static ClassKFn linear(double slope);
  static ClassKFn arctan();
  static ClassKFn cubic();

  // Token forms: "linear:<slope>", "atan", "cubic".
  static ClassKFn parse(std::string_view token);
  std::string name() const;

  double value(double x) const;       // throws DomainError on non-finite x
  double derivative(double x) const;  // exact d/dx
  // Exact Lipschitz constant of value() on [lo, hi] (lo <= hi required).
  double lipschitz_on(double lo, double hi) const;

  Family family() const { return family_; }
  double slope() const { return slope_; }  // linear family only

  bool operator==(const ClassKFn&) const = default;

 private:
  ClassKFn(Family f, double slope) : family_(f), slope_(slope) {}
  Family family_ = Family::kArctan;
  double slope_ = 1.0;
};

// Shaping-function admissibility check for the position margins: verifies
// min over joints i and e in [0, delta] of  f(-e) + f(width_i + e)  stays
// positive, returning the certified minimum and its witness.
struct MarginCheck {
  bool ok = false;
  double d = 0.0;       // certified minimum of the expression over the grid
  double worst_e = 0.0;
  int worst_joint = -1;
};
MarginCheck check_margin_preserving(const ClassKFn& f, const Eigen::VectorXd& q_min,
                                    const Eigen::VectorXd& q_max, double delta,
                                    int grid = 1000);

// Falsification sweep for the superadditivity property required of the
// restoring-term shaping function: for a - b = 2c with a, c > 0, b >= 0, checks
// f(a) + f(-b) >= f(c). Returns false as soon as a counterexample is found.
struct SuperadditivityCheck {
  bool ok = true;
  double worst_margin = 0.0;  // min of f(a)+f(-b)-f(c) over the sweep
  double bad_c = 0.0, bad_b = 0.0;
};
SuperadditivityCheck check_superadditive(const ClassKFn& f, int sample_budget,
                                         unsigned seed = 0x5eedu);

}  // namespace elsg
