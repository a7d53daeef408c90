#pragma once

#include <hocp/mil_set.hpp>
#include <hocp/milp.hpp>

#include <functional>
#include <vector>

namespace hocp {

struct TrConfig {
  double delta0 = 1.0;
  double delta_min = 1e-10;
  double delta_max = 1e3;
  double eta_accept = 0.1;
  double eta_expand = 0.75;
  double shrink = 0.5;
  double expand = 2.0;
  int max_iters = 500;
  double delta_check_cap = 1.0;
  // Newton steps on the real components (integers frozen) after each
  // trust-region step, at most polish_steps of them.
  bool polish = true;
  int polish_steps = 10;
  // Polish steps applied to a rejected integer move before giving up on it.
  int correction_steps = 5;

  void validate() const;
};

/// Smooth function over X with gradient; callbacks must be re-entrant.
struct SmoothFunction {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  // Optional Hessian sparsity; cuts the cost of finite-difference Hessians.
  SparseMat hessian_pattern;
};

struct InnerStep {
  double delta;
  double psi;
  double rho;
  bool accepted;
};

struct InnerResult {
  Vec x;
  double value = 0.0;
  double psi = 0.0;          // certificate Ψ(x, delta_check)
  double delta_check = 0.0;  // min(final radius, cap)
  bool certified = false;
  int iterations = 0;
  int psi_evaluations = 0;
  Index milp_nodes = 0;
  int inexact_psi = 0;       // node-limit hits
  // Real components critical, but an integer move with linear gain above
  // eps fails the ratio test.
  bool integer_stall = false;
  int polish_steps = 0;
  std::vector<InnerStep> trace;
};

/// Trust-region sequential mixed-integer linearization: each iteration
/// solves the MILP behind Ψ for a step, then runs a ratio test on the actual
/// decrease. Stops once Ψ(x, min(Δ, cap)) <= eps.
InnerResult minimize(const SmoothFunction& phi, const MilSet& X, const Vec& x_start,
                     double eps, const TrConfig& cfg = {},
                     PolyNorm flavor = PolyNorm::LInfReal,
                     const MilpOptions& milp = {});

}  // namespace hocp
