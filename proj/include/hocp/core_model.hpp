#pragma once

#include <hocp/convex_sets.hpp>
#include <hocp/mil_set.hpp>
#include <hocp/types.hpp>

#include <functional>
#include <string>
#include <vector>

namespace hocp {

/// Smooth objective x ↦ f(x) with gradient. Both callbacks must be pure.
struct Objective {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  // Structural nonzeros of the Hessian; empty when unknown (treated dense).
  SparseMat hessian_pattern;
};

/// Smooth constraint map x ↦ c(x) ∈ R^m with its m×n Jacobian.
struct Constraints {
  Index m = 0;
  std::function<Vec(const Vec&)> value;
  std::function<SparseMat(const Vec&)> jacobian;
};

/// Problem template
///   minimize f(x)  subject to  x ∈ X,  c(x) ∈ C
/// with C a box and X a mixed-integer linear set.
struct Minlp {
  Index n = 0;
  Objective objective;
  Constraints constraints;
  BoxSet set_c;
  MilSet set_x;
  std::vector<std::string> names;

  Index m() const { return constraints.m; }
};

struct EvalCounters {
  std::size_t n_f = 0, n_grad = 0, n_c = 0, n_jac = 0;
};

/// Counting front end over a Minlp for the duration of one solve.
class Evaluator {
 public:
  explicit Evaluator(const Minlp& p) : p_(p) {}

  double f(const Vec& x) { ++counters_.n_f; return p_.objective.value(x); }
  Vec grad(const Vec& x) { ++counters_.n_grad; return p_.objective.gradient(x); }
  Vec c(const Vec& x);
  SparseMat jac(const Vec& x);

  const Minlp& problem() const { return p_; }
  const EvalCounters& counters() const { return counters_; }

 private:
  const Minlp& p_;
  EvalCounters counters_;
};

/// Every dimensional or boundedness violation; empty iff the invariants hold.
/// Evaluates the callbacks once at a probe point inside the variable bounds.
std::vector<std::string> validate(const Minlp& p);

/// Max relative error (denominator max(1, |analytic|)) between the analytic
/// gradient/Jacobian and central differences with step h.
double check_derivatives(const Minlp& p, const Vec& x, double h = 1e-5);

/// A point inside the variable bounds (projection of the origin).
Vec probe_point(const MilSet& X);

}  // namespace hocp
