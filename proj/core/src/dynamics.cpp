#include "elsg/dynamics.hpp"

#include <cmath>
#include <random>

#include "elsg/errors.hpp"

namespace elsg {
namespace {

double row_inf_norm(const Eigen::MatrixXd& A) {
  return A.cwiseAbs().rowwise().sum().maxCoeff();
}

// unit directions in the constraint-velocity space; axes included exactly
std::vector<Eigen::VectorXd> unit_directions(int n, int count, unsigned seed) {
  std::vector<Eigen::VectorXd> dirs;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e(i) = 1.0;
    dirs.push_back(e);
    dirs.push_back(-e);
  }
  if (n == 2) {
    const int k = std::max(count, 8);
    for (int j = 0; j < k; ++j) {
      const double th = 2.0 * M_PI * j / k;
      dirs.push_back(Eigen::Vector2d(std::cos(th), std::sin(th)));
    }
  } else {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int j = 0; j < count; ++j) {
      Eigen::VectorXd d(n);
      for (int i = 0; i < n; ++i) d(i) = g(rng);
      const double nrm = d.norm();
      if (nrm > 1e-12) dirs.push_back(d / nrm);
    }
  }
  return dirs;
}

}  // namespace

Eigen::VectorXd SystemModel::native_accel(const Eigen::VectorXd& q, const Eigen::VectorXd& v,
                                          const Eigen::VectorXd& u) const {
  return eval_dynamics(*this, q, v, u);
}

void SystemModel::sample_positions(
    const Box& box, int per_axis,
    const std::function<void(const Eigen::VectorXd&, const Eigen::VectorXd&)>& fn) const {
  const int n = box.dim();
  if (n != dof()) throw DomainError("position box dimension mismatch");
  std::vector<std::vector<double>> axes;
  for (int i = 0; i < n; ++i) axes.push_back(linspace(box.lo(i), box.hi(i), per_axis));
  Eigen::VectorXd q(n);
  std::vector<int> idx(n, 0);
  while (true) {
    for (int i = 0; i < n; ++i) q(i) = axes[i][idx[i]];
    fn(q, q);
    int i = 0;
    for (; i < n; ++i) {
      if (++idx[i] < static_cast<int>(axes[i].size())) break;
      idx[i] = 0;
    }
    if (i == n) break;
  }
}

Eigen::VectorXd eval_dynamics(const SystemModel& model, const Eigen::VectorXd& q,
                              const Eigen::VectorXd& v, const Eigen::VectorXd& u) {
  if (u.size() != model.input_dim()) throw DomainError("input dimension mismatch");
  const Eigen::VectorXd f = model.f1(q, v) + model.f2(q, v) + model.f3(q);
  Eigen::VectorXd acc = model.G(q) * (f + u);
  if (!acc.allFinite()) throw NumericError("non-finite acceleration");
  return acc;
}

DynamicsConstants estimate_constants(const SystemModel& model, const Box& position_box,
                                     const EstimateOptions& opts) {
  const int n = model.dof();
  const int m = model.input_dim();
  DynamicsConstants c;
  c.f_bound = Eigen::VectorXd::Zero(m);

  const auto dirs = unit_directions(n, opts.vel_directions, opts.seed);

  // sup-type constants over the position grid x velocity directions
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> samples;  // (native, constraint)
  model.sample_positions(position_box, opts.grid_per_axis,
                         [&](const Eigen::VectorXd& qn, const Eigen::VectorXd& qc) {
                           samples.emplace_back(qn, qc);
                         });
  if (samples.empty()) throw DomainError("empty position sample set for constants estimation");

  std::vector<double> kc(samples.size(), 0.0), km(samples.size(), 0.0), kg(samples.size(), 0.0);
  std::vector<Eigen::VectorXd> fb(samples.size(), Eigen::VectorXd::Zero(m));
  parallel_for(static_cast<std::int64_t>(samples.size()), [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t s = b; s < e; ++s) {
      const auto& qn = samples[s].first;
      km[s] = row_inf_norm(model.G(qn));
      kg[s] = model.f3(qn).cwiseAbs().maxCoeff();
      for (const auto& d : dirs) {
        const Eigen::VectorXd vn = model.native_vel(qn, d);
        kc[s] = std::max(kc[s], model.f1(qn, vn).norm());
        fb[s] = fb[s].cwiseMax(model.f2(qn, vn).cwiseAbs());
      }
    }
  });
  for (size_t s = 0; s < samples.size(); ++s) {
    c.k_c = std::max(c.k_c, kc[s]);
    c.k_m_inf = std::max(c.k_m_inf, km[s]);
    c.k_g = std::max(c.k_g, kg[s]);
    c.f_bound = c.f_bound.cwiseMax(fb[s]);
  }
  c.k_c *= opts.sup_inflation;
  c.k_m_inf *= opts.sup_inflation;
  c.k_g *= opts.sup_inflation;
  // f_bound is left uninflated: the direction grid contains the coordinate
  // axes, which attain the exact bound for (block-)diagonal damping.

  // Lipschitz-type constants from finite-difference quotients on random pairs
  const Box native_box = model.native_position_box(position_box);
  std::mt19937_64 rng(opts.seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto random_native_q = [&]() -> Eigen::VectorXd {
    for (int tries = 0; tries < 10000; ++tries) {
      Eigen::VectorXd q(native_box.dim());
      for (int i = 0; i < native_box.dim(); ++i) {
        q(i) = native_box.lo(i) + unit(rng) * (native_box.hi(i) - native_box.lo(i));
      }
      if (position_box.contains(model.constraint_pos(q), 1e-12)) return q;
    }
    throw NumericError("rejection sampling failed to hit the constraint position box");
  };
  auto drift = [&](const Eigen::VectorXd& qn, const Eigen::VectorXd& vc) -> Eigen::VectorXd {
    const Eigen::VectorXd vn = model.native_vel(qn, vc);
    return model.G(qn) * (model.f1(qn, vn) + model.f2(qn, vn) + model.f3(qn));
  };
  double lip_drift = 0.0, lip_G = 0.0;
  for (int k = 0; k < opts.lipschitz_samples; ++k) {
    const Eigen::VectorXd qa = random_native_q();
    Eigen::VectorXd qb;
    if (k % 2 == 0) {
      // local pair: small perturbation that stays inside the box
      for (int tries = 0;; ++tries) {
        Eigen::VectorXd dq(native_box.dim());
        for (int i = 0; i < native_box.dim(); ++i) dq(i) = (unit(rng) - 0.5) * 2e-4;
        qb = qa + dq;
        if (position_box.contains(model.constraint_pos(qb), 1e-12)) break;
        if (tries > 50) {
          qb = qa;
          break;
        }
      }
    } else {
      qb = random_native_q();
    }
    const Eigen::VectorXd ca = model.constraint_pos(qa);
    const Eigen::VectorXd cb = model.constraint_pos(qb);
    const double dq_inf = (ca - cb).cwiseAbs().maxCoeff();
    if (dq_inf > 1e-14) {
      lip_G = std::max(lip_G, row_inf_norm(model.G(qa) - model.G(qb)) / dq_inf);
    }
    Eigen::VectorXd va(n), vb(n);
    for (int i = 0; i < n; ++i) {
      va(i) = (unit(rng) * 2.0 - 1.0) * opts.vel_cap;
      vb(i) = (unit(rng) * 2.0 - 1.0) * opts.vel_cap;
    }
    if (k % 2 == 0) vb = va + Eigen::VectorXd::Constant(n, 1e-4).cwiseProduct(va.cwiseSign());
    const double dx_inf = std::max(dq_inf, (va - vb).cwiseAbs().maxCoeff());
    if (dx_inf > 1e-14) {
      const double quot = (drift(qa, va) - drift(qb, vb)).cwiseAbs().maxCoeff() / dx_inf;
      lip_drift = std::max(lip_drift, quot);
    }
  }
  c.lip_drift = lip_drift * opts.lip_inflation;
  c.lip_G = lip_G * opts.lip_inflation;
  return c;
}

}  // namespace elsg
