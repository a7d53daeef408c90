#pragma once

#include <hocp/core_model.hpp>
#include <hocp/inner_solver.hpp>
#include <hocp/milp.hpp>

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace hocp {

struct AlmConfig {
  double mu1 = 1e-2;
  double eps1 = 1e-2;
  double eps_p = 1e-6;
  double eps_d = 1e-6;
  double kappa_mu = 0.5;
  double theta_mu = 0.5;
  double kappa_eps = 0.5;
  double y_bound = 1e4;
  int max_outer = 100;
  PolyNorm flavor = PolyNorm::LInfReal;
  // Scale mu1 from the initial infeasibility instead of using it verbatim.
  bool adaptive_mu1 = false;
  // Consecutive inner solves hitting the MILP node limit before InnerFailure.
  int max_inner_failures = 3;
  TrConfig inner;
  MilpOptions milp;

  void validate() const;
};

enum class AlmStatus { EpsKktCritical, MaxOuterIter, InnerFailure };
std::string_view to_string(AlmStatus s);

struct AlmIteration {
  int j;
  double mu;
  double eps;
  double viol_norm;
  double psi;
  int inner_iters;
  Index milp_nodes;
  double time_ms;
  bool inner_certified;
};

struct AlmReport {
  AlmStatus status = AlmStatus::MaxOuterIter;
  Vec x, y, s, v;
  double viol_norm = kInf;
  double psi_final = kInf;
  double psi_delta = 0.0;  // radius at which psi_final was certified
  double mu_final = 0.0;
  double objective = kInf;
  int outer_iters = 0;
  int node_limit_hits = 0;
  std::vector<AlmIteration> trace;
  EvalCounters counters;
  double total_ms = 0.0;
};

/// L_μ(x, ŷ) = f(x) + dist²_C(c(x) + μŷ)/(2μ) − μ‖ŷ‖²/2
double al_value(const Minlp& p, const Vec& x, const Vec& yhat, double mu);

struct MultiplierMaps {
  Vec s;  // proj_C(c(x) + μŷ)
  Vec y;  // ŷ + (c(x) − s)/μ
};
MultiplierMaps multiplier_maps(const Minlp& p, const Vec& x, const Vec& yhat, double mu);

/// ∇_x L_μ(x, ŷ) = ∇f(x) + c′(x)ᵀ y_μ(x, ŷ)
Vec al_gradient(const Minlp& p, const Vec& x, const Vec& yhat, double mu);

/// Structural Hessian nonzeros of L_μ: pattern(∇²f) ∪ pattern(c′ᵀc′), taken
/// at x. Empty when the objective carries no pattern.
SparseMat al_hessian_pattern(const Minlp& p, const Vec& x);

/// ∇_x L(x, y) = ∇f(x) + c′(x)ᵀ y
Vec lagrangian_gradient(const Minlp& p, const Vec& x, const Vec& y);

/// Safeguarded augmented Lagrangian method. x0 must lie in X.
AlmReport solve(const Minlp& p, const Vec& x0, const Vec& y0, const AlmConfig& cfg = {});

struct KktCertificate {
  bool pass = false;
  bool in_x = false;
  double psi = kInf;
  double normal_cone = kInf;
  double viol_norm = kInf;
  bool psi_exact = true;
  std::string message;
};

/// Checks ε-KKT criticality of (x, y) with z = s: x ∈ X, Ψ of the
/// Lagrangian gradient at radius `delta` <= eps_d, y ∈ N_C(s), ‖c(x) − s‖ <= eps_p.
KktCertificate certify_eps_kkt(const Minlp& p, const Vec& x, const Vec& y, const Vec& s,
                               double eps_p, double eps_d,
                               PolyNorm flavor = PolyNorm::LInfReal, double delta = 1.0,
                               const MilpOptions& milp = {});

/// CSV trace: j,mu,eps_j,viol_norm,psi,inner_iters,milp_nodes,time_ms
void write_trace_csv(std::ostream& os, const AlmReport& r);

}  // namespace hocp
