#pragma once

#include <hocp/mil_set.hpp>

#include <iosfwd>
#include <optional>
#include <string_view>

namespace hocp {

/// min cost^T x  s.t.  x ∈ X
struct MilpProblem {
  Vec cost;
  MilSet set;
};

enum class MilpStatus { Optimal, Infeasible, Unbounded, NodeLimit, IterationLimit };

std::string_view to_string(MilpStatus s);

struct MilpSolution {
  MilpStatus status = MilpStatus::Infeasible;
  bool has_solution = false;
  Vec x;
  double objective = kInf;
  double best_bound = -kInf;
  Index nodes_explored = 0;
  Index lp_iterations = 0;
};

struct MilpOptions {
  Index node_limit = 200000;
  double int_tol = kIntTol;
  double feas_tol = 1e-7;
  double opt_tol = 1e-9;
  double gap_tol = 1e-6;
  int refactor_every = 100;
  int bland_after = 1000;
  // Root bound propagation and big-M coefficient tightening.
  bool presolve = true;
  // Known feasible point used as the starting incumbent.
  std::optional<Vec> incumbent;
};

/// LP relaxation (integrality ignored) by a bounded dual simplex.
MilpSolution solve_lp(const MilpProblem& p, const MilpOptions& opts = {});

/// Best-bound branch-and-bound over LP relaxations.
MilpSolution solve_milp(const MilpProblem& p, const MilpOptions& opts = {});

/// Plain-text LP-like dump, one constraint per line.
void write_lp_text(std::ostream& os, const MilpProblem& p);

/// Root-node bound tightening from row activities. Returns false if some
/// row is proven infeasible.
bool propagate_bounds(MilSet& X, int max_passes = 10);

/// Shrinks the coefficients of 0/1 variables in one-sided rows whose other
/// terms can never reach the right-hand side. The integer-feasible set is
/// unchanged; the LP relaxation gets tighter. Returns the number of changes.
Index tighten_coefficients(MilSet& X);

}  // namespace hocp
