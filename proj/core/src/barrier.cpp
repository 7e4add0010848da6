#include "elsg/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "elsg/errors.hpp"

namespace elsg {
namespace {

// golden-section refinement of a 1-D minimum bracketed by a coarse grid
double refine_min(const std::function<double(double)>& f, double lo, double hi, int grid) {
  double best_x = lo, best = f(lo);
  const auto xs = linspace(lo, hi, grid);
  for (double x : xs) {
    const double y = f(x);
    if (y < best) {
      best = y;
      best_x = x;
    }
  }
  const double step = (hi - lo) / (grid - 1);
  double a = std::max(lo, best_x - step), b = std::min(hi, best_x + step);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && (b - a) > 1e-12; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  return std::min({best, fc, fd});
}

}  // namespace

Box ConstraintSpec::position_box(double delta) const {
  Box b;
  b.lo = q_min.array() - delta;
  b.hi = q_max.array() + delta;
  return b;
}

void ConstraintSpec::validate() const {
  const auto n = q_min.size();
  if (n == 0 || q_max.size() != n || v_max.size() != n) {
    throw ConfigError("position/velocity limit dimensions disagree");
  }
  if (u_max.size() == 0) throw ConfigError("empty torque limits");
  for (int i = 0; i < n; ++i) {
    if (!(q_max(i) > q_min(i))) throw ConfigError("position box is empty on axis " + std::to_string(i + 1));
    if (!(v_max(i) > 0.0)) throw ConfigError("velocity limit must be positive on axis " + std::to_string(i + 1));
  }
  for (int j = 0; j < u_max.size(); ++j) {
    if (!(u_max(j) > 0.0)) throw ConfigError("torque limit must be positive on channel " + std::to_string(j + 1));
  }
}

void BarrierConfig::validate() const {
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (!(nu > 0.0)) throw ConfigError("nu must be positive");
  if (delta < 0.0) throw ConfigError("delta must be nonnegative");
  if (eta_bar < 0.0) throw ConfigError("eta_bar must be nonnegative");
}

const char* region_name(Region r) {
  switch (r) {
    case Region::kI: return "I";
    case Region::kII: return "II";
    case Region::kIII: return "III";
    case Region::kIV: return "IV";
    case Region::kV: return "V";
    case Region::kVI: return "VI";
    case Region::kVII: return "VII";
    case Region::kVIII: return "VIII";
  }
  return "?";
}

Barrier::Barrier(ConstraintSpec spec, BarrierConfig cfg)
    : spec_(std::move(spec)), cfg_(std::move(cfg)) {
  spec_.validate();
  cfg_.validate();
}

double Barrier::b_up(int i, double qi, double vi) const {
  return -vi + cfg_.gamma * cfg_.alpha.value(h_up(i, qi));
}

double Barrier::b_low(int i, double qi, double vi) const {
  return vi + cfg_.gamma * cfg_.alpha.value(h_low(i, qi));
}

double Barrier::b_up_shifted(int i, double qi, double vi) const {
  return -vi + cfg_.gamma * cfg_.alpha.value(h_up(i, qi) + cfg_.delta);
}

double Barrier::b_low_shifted(int i, double qi, double vi) const {
  return vi + cfg_.gamma * cfg_.alpha.value(h_low(i, qi) + cfg_.delta);
}

double Barrier::rho(int i, double qi) const {
  return 0.5 * cfg_.gamma * (cfg_.alpha.value(h_up(i, qi)) + cfg_.alpha.value(h_low(i, qi)));
}

bool Barrier::joint_in_domain(int i, double qi, double vi, double slack) const {
  return h_up(i, qi) + cfg_.delta >= -slack && h_low(i, qi) + cfg_.delta >= -slack &&
         b_up_shifted(i, qi, vi) >= -slack && b_low_shifted(i, qi, vi) >= -slack;
}

bool Barrier::in_domain(const Eigen::VectorXd& q, const Eigen::VectorXd& v, double slack) const {
  for (int i = 0; i < dof(); ++i) {
    if (!joint_in_domain(i, q(i), v(i), slack)) return false;
  }
  return true;
}

std::string Barrier::domain_violation(const Eigen::VectorXd& q, const Eigen::VectorXd& v,
                                      double slack) const {
  std::ostringstream os;
  for (int i = 0; i < dof(); ++i) {
    const double hu = h_up(i, q(i)) + cfg_.delta;
    const double hl = h_low(i, q(i)) + cfg_.delta;
    const double bu = b_up_shifted(i, q(i), v(i));
    const double bl = b_low_shifted(i, q(i), v(i));
    const char* what = nullptr;
    double val = 0.0;
    if (hu < -slack) { what = "h_up"; val = hu; }
    else if (hl < -slack) { what = "h_low"; val = hl; }
    else if (bu < -slack) { what = "b_up"; val = bu; }
    else if (bl < -slack) { what = "b_low"; val = bl; }
    if (what) {
      os << what << "[" << (i + 1) << "] + margin = " << val << " < 0";
      return os.str();
    }
  }
  return {};
}

void Barrier::require_in_domain(const Eigen::VectorXd& q, const Eigen::VectorXd& v,
                                double slack) const {
  const std::string why = domain_violation(q, v, slack);
  if (!why.empty()) throw DomainError("state outside the inflated operating set: " + why);
}

Region Barrier::classify(int i, double qi, double vi, double tol) const {
  if (!joint_in_domain(i, qi, vi, tol)) {
    Eigen::VectorXd q = 0.5 * (spec_.q_min + spec_.q_max);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dof());
    q(i) = qi;
    v(i) = vi;
    throw DomainError("state outside the inflated operating set: " + domain_violation(q, v, tol));
  }
  return select_region(i, qi, vi, tol);
}

Region Barrier::select_region(int i, double qi, double vi, double tol) const {
  const double bu = b_up(i, qi, vi);
  const double bl = b_low(i, qi, vi);
  const double r = rho(i, qi);
  if (bu < -tol) return Region::kV;
  if (bl < -tol) return Region::kVI;
  const double d = bl - r;
  if (std::abs(d) <= tol) return vi >= 0.0 ? Region::kVII : Region::kVIII;
  if (d > 0.0) {
    // b_up is on the small side of the split
    return vi > 0.0 ? Region::kI : Region::kII;
  }
  return vi >= 0.0 ? Region::kIII : Region::kIV;
}

double Barrier::a_constant() const {
  return cfg_.alpha.value(2.0 * cfg_.delta + spec_.max_width());
}

double Barrier::velocity_bound() const { return cfg_.gamma * a_constant(); }

double Barrier::rho_lower_bound(int grid) const {
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dof(); ++i) {
    const double w = spec_.width(i);
    // sweep h_up over the inflated interval; h_low = w - h_up
    auto f = [&](double h) {
      return 0.5 * cfg_.gamma * (cfg_.alpha.value(h) + cfg_.alpha.value(w - h));
    };
    worst = std::min(worst, refine_min(f, -cfg_.delta, w + cfg_.delta, grid));
  }
  return worst;
}

double Barrier::zeta(int grid) const {
  if (cfg_.delta == 0.0) return 0.0;
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dof(); ++i) {
    const double w = spec_.width(i);
    // barrier floor reduces to a 1-D sweep of gamma*(alpha(h) - alpha(h + delta))
    auto f = [&](double h) {
      return cfg_.gamma * (cfg_.alpha.value(h) - cfg_.alpha.value(h + cfg_.delta));
    };
    worst = std::min(worst, refine_min(f, -cfg_.delta, w + cfg_.delta, grid));
  }
  return std::min(worst, 0.0);
}

double Barrier::zeta_closed_form() const {
  const double g = cfg_.gamma, d = cfg_.delta;
  switch (cfg_.alpha.family()) {
    case ClassKFn::Family::kLinear:
      return -g * cfg_.alpha.slope() * d;
    case ClassKFn::Family::kArctan:
      return -2.0 * g * std::atan(0.5 * d);
    case ClassKFn::Family::kCubic: {
      double worst = std::numeric_limits<double>::infinity();
      for (int i = 0; i < dof(); ++i) {
        const double w = spec_.width(i);
        worst = std::min(worst, g * (cfg_.alpha.value(w + d) - cfg_.alpha.value(w + 2.0 * d)));
      }
      return worst;
    }
  }
  throw DomainError("no closed form for this function family");
}

double Barrier::b_max(int grid) const {
  double best = 0.0;
  for (int i = 0; i < dof(); ++i) {
    const double w = spec_.width(i);
    for (double h : linspace(-cfg_.delta, w + cfg_.delta, grid)) {
      // largest value either barrier can take at position h given domain membership
      const double up = cfg_.gamma * (cfg_.alpha.value(w - h + cfg_.delta) + cfg_.alpha.value(h));
      const double low = cfg_.gamma * (cfg_.alpha.value(h + cfg_.delta) + cfg_.alpha.value(w - h));
      best = std::max({best, up, low});
    }
  }
  return best;
}

}  // namespace elsg
