#include <hocp/inner_solver.hpp>

#include "newton_polish.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hocp {

void TrConfig::validate() const {
  if (!(0.0 < eta_accept && eta_accept < eta_expand && eta_expand < 1.0))
    throw std::invalid_argument("TrConfig: need 0 < eta_accept < eta_expand < 1");
  if (!(delta_min < delta0 && delta0 <= delta_max))
    throw std::invalid_argument("TrConfig: need delta_min < delta0 <= delta_max");
  if (!(0.0 < shrink && shrink < 1.0 && expand > 1.0))
    throw std::invalid_argument("TrConfig: bad shrink/expand factors");
}

namespace {
constexpr double kPsiFloor = 1e-14;
}

InnerResult minimize(const SmoothFunction& phi, const MilSet& X, const Vec& x_start,
                     double eps, const TrConfig& cfg, PolyNorm flavor,
                     const MilpOptions& milp) {
  cfg.validate();
  if (eps <= 0.0) throw std::invalid_argument("minimize: eps must be positive");

  MilpOptions mo = milp;
  mo.gap_tol = std::min(mo.gap_tol, 1e-3 * eps);

  InnerResult res;
  res.x = x_start;
  res.value = phi.value(res.x);
  double delta = cfg.delta0;
  Vec g = phi.gradient(res.x);

  auto measure = [&](double radius) {
    Criticality c = criticality_measure(X, g, res.x, radius, flavor, mo);
    ++res.psi_evaluations;
    res.milp_nodes += c.nodes;
    if (!c.exact) ++res.inexact_psi;
    return c;
  };

  // X with the integers frozen at their current values; rebuilt on change
  MilSet frozen;
  Vec frozen_at;
  auto frozen_set = [&]() -> const MilSet& {
    bool stale = frozen_at.size() == 0;
    for (Index j : X.integers) stale = stale || std::round(frozen_at[j]) != std::round(res.x[j]);
    if (stale) {
      frozen = fix_integers(X, res.x);
      frozen_at = res.x;
    }
    return frozen;
  };
  auto changes_integers = [&](const Vec& d) {
    for (Index j : X.integers)
      if (std::abs(d[j]) > 0.5) return true;
    return false;
  };
  auto integer_distance = [&](const Vec& d) {
    double s = 0.0;
    for (Index j : X.integers) s += std::round(std::abs(d[j]));
    return s;
  };

  for (res.iterations = 0; res.iterations < cfg.max_iters; ++res.iterations) {
    const double dcheck = std::min(delta, cfg.delta_check_cap);
    const Criticality crit = measure(dcheck);
    if (crit.psi <= eps || crit.psi <= kPsiFloor) {
      res.psi = crit.psi;
      res.delta_check = dcheck;
      res.certified = crit.exact;
      if (res.certified) return res;
    }
    const Criticality step = delta > dcheck ? measure(delta) : crit;
    if (step.psi <= kPsiFloor) {
      // Inexact Ψ with no improving incumbent: nothing left to try.
      res.psi = step.psi;
      res.delta_check = dcheck;
      return res;
    }
    Vec trial;
    double ftrial = 0.0, rho = 0.0;
    bool accept = false;
    auto attempt = [&](const Criticality& s) {
      trial = res.x + s.step;
      ftrial = phi.value(trial);
      rho = (res.value - ftrial) / s.psi;
      accept = rho >= cfg.eta_accept;
      res.trace.push_back({delta, s.psi, rho, accept});
      if (accept || !cfg.polish || !changes_integers(s.step)) return;
      // Re-optimize the real components at the new integer assignment.
      Vec xt = trial;
      double ft = ftrial;
      for (int k = 0; k < cfg.correction_steps; ++k) {
        const Vec gt = phi.gradient(xt);
        if (!detail::newton_polish(phi, X, xt, ft, gt)) break;
      }
      const double rho_c = (res.value - ft) / s.psi;
      if (rho_c >= cfg.eta_accept) {
        trial = xt;
        ftrial = ft;
        rho = rho_c;
        accept = true;
        res.trace.push_back({delta, s.psi, rho, accept});
      }
    };
    attempt(step);

    // Fewer simultaneous integer moves.
    double budget = std::floor(integer_distance(step.step) / 2.0);
    while (!accept && budget >= 1.0) {
      const Criticality s =
          criticality_measure(limit_integer_moves(X, res.x, budget), g, res.x, delta, flavor, mo);
      ++res.psi_evaluations;
      res.milp_nodes += s.nodes;
      if (s.psi <= kPsiFloor || !changes_integers(s.step)) break;
      attempt(s);
      budget = std::floor(std::min(budget, integer_distance(s.step)) / 2.0);
    }

    if (!accept && changes_integers(step.step)) {
      // Real components only.
      const MilSet& F = frozen_set();
      const Criticality real_check = criticality_measure(F, g, res.x, dcheck, flavor, mo);
      ++res.psi_evaluations;
      res.milp_nodes += real_check.nodes;
      if (real_check.psi <= eps || real_check.psi <= kPsiFloor) {
        res.integer_stall = true;
        break;
      }
      const Criticality real_step =
          delta > dcheck ? criticality_measure(F, g, res.x, delta, flavor, mo) : real_check;
      if (delta > dcheck) {
        ++res.psi_evaluations;
        res.milp_nodes += real_step.nodes;
      }
      attempt(real_step);
    }

    if (accept) {
      res.x = trial;
      res.value = ftrial;
      g = phi.gradient(res.x);
      if (rho >= cfg.eta_expand) delta = std::min(cfg.expand * delta, cfg.delta_max);
    } else {
      delta *= cfg.shrink;
      if (delta < cfg.delta_min) break;
    }
    for (int k = 0; cfg.polish && k < cfg.polish_steps; ++k) {
      if (!detail::newton_polish(phi, X, res.x, res.value, g)) break;
      ++res.polish_steps;
      g = phi.gradient(res.x);
    }
  }

  const double dcheck = std::min(delta, cfg.delta_check_cap);
  const Criticality crit = measure(dcheck);
  res.psi = crit.psi;
  res.delta_check = dcheck;
  res.certified = crit.exact && crit.psi <= eps;
  return res;
}

}  // namespace hocp
