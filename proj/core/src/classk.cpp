#include "elsg/classk.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "elsg/errors.hpp"
#include "elsg/util.hpp"

namespace elsg {

ClassKFn ClassKFn::linear(double slope) {
  if (!(slope > 0.0) || !std::isfinite(slope)) {
    throw ConfigError("linear shaping function needs a positive finite slope");
  }
  return ClassKFn(Family::kLinear, slope);
}

ClassKFn ClassKFn::arctan() { return ClassKFn(Family::kArctan, 1.0); }
ClassKFn ClassKFn::cubic() { return ClassKFn(Family::kCubic, 1.0); }

ClassKFn ClassKFn::parse(std::string_view token) {
  if (token == "atan") return arctan();
  if (token == "cubic") return cubic();
  constexpr std::string_view prefix = "linear:";
  if (token.substr(0, prefix.size()) == prefix) {
    const std::string rest(token.substr(prefix.size()));
    try {
      size_t used = 0;
      const double slope = std::stod(rest, &used);
      if (used == rest.size()) return linear(slope);
    } catch (const std::exception&) {
    }
  }
  throw ConfigError("unknown shaping function '" + std::string(token) +
                    "' (expected atan | linear:<slope> | cubic)");
}

std::string ClassKFn::name() const {
  switch (family_) {
    case Family::kLinear:
      return "linear:" + format_g17(slope_);
    case Family::kArctan:
      return "atan";
    case Family::kCubic:
      return "cubic";
  }
  return "?";
}

double ClassKFn::value(double x) const {
  if (!std::isfinite(x)) throw DomainError("shaping function evaluated at non-finite input");
  switch (family_) {
    case Family::kLinear:
      return slope_ * x;
    case Family::kArctan:
      return std::atan(x);
    case Family::kCubic:
      return x * x * x;
  }
  return 0.0;
}

double ClassKFn::derivative(double x) const {
  if (!std::isfinite(x)) throw DomainError("shaping function derivative at non-finite input");
  switch (family_) {
    case Family::kLinear:
      return slope_;
    case Family::kArctan:
      return 1.0 / (1.0 + x * x);
    case Family::kCubic:
      return 3.0 * x * x;
  }
  return 0.0;
}

double ClassKFn::lipschitz_on(double lo, double hi) const {
  if (!(lo <= hi)) throw DomainError("lipschitz_on needs lo <= hi");
  switch (family_) {
    case Family::kLinear:
      return slope_;
    case Family::kArctan:
      // derivative 1/(1+x^2) peaks at the point of [lo,hi] closest to 0
      if (lo <= 0.0 && hi >= 0.0) return 1.0;
      {
        const double m = std::min(std::abs(lo), std::abs(hi));
        return 1.0 / (1.0 + m * m);
      }
    case Family::kCubic:
      return 3.0 * std::max(lo * lo, hi * hi);
  }
  return 0.0;
}

MarginCheck check_margin_preserving(const ClassKFn& f, const Eigen::VectorXd& q_min,
                                    const Eigen::VectorXd& q_max, double delta, int grid) {
  if (q_min.size() != q_max.size() || q_min.size() == 0) {
    throw ConfigError("position box dimensions disagree");
  }
  for (int i = 0; i < q_min.size(); ++i) {
    if (!(q_max(i) > q_min(i))) throw ConfigError("degenerate position box");
  }
  if (delta < 0.0) throw ConfigError("delta must be nonnegative");

  MarginCheck out;
  out.d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < q_min.size(); ++i) {
    const double width = q_max(i) - q_min(i);
    for (double e : linspace(0.0, delta, std::max(grid, 2))) {
      const double val = f.value(-e) + f.value(width + e);
      if (val < out.d) {
        out.d = val;
        out.worst_e = e;
        out.worst_joint = i;
      }
    }
  }
  out.ok = out.d > 0.0;
  return out;
}

SuperadditivityCheck check_superadditive(const ClassKFn& f, int sample_budget, unsigned seed) {
  SuperadditivityCheck out;
  out.worst_margin = std::numeric_limits<double>::infinity();
  auto probe = [&](double c, double b) {
    const double a = 2.0 * c + b;
    const double margin = f.value(a) + f.value(-b) - f.value(c);
    if (margin < out.worst_margin) {
      out.worst_margin = margin;
      out.bad_c = c;
      out.bad_b = b;
    }
    if (margin < 0.0) out.ok = false;
  };

  // structured sweep over several decades, then seeded random refinement
  const int grid = std::max(8, static_cast<int>(std::sqrt(double(sample_budget) / 2.0)));
  for (double c : linspace(-4.0, 2.0, grid)) {       // log10 c in [-4, 2]
    for (double b : linspace(-4.0, 3.0, grid)) {     // log10 b in [-4, 3]
      probe(std::pow(10.0, c), std::pow(10.0, b));
      if (!out.ok) return out;
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> logc(-4.0, 2.0), logb(-4.0, 3.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < sample_budget; ++k) {
    const double c = std::pow(10.0, logc(rng));
    const double b = unit(rng) < 0.1 ? 0.0 : std::pow(10.0, logb(rng));
    probe(c, b);
    if (!out.ok) return out;
  }
  return out;
}

}  // namespace elsg
