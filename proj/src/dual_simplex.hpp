#pragma once

#include <hocp/types.hpp>

#include <Eigen/SparseLU>

#include <cstdint>
#include <vector>

namespace hocp::detail {

// Bounded dual simplex on the computational form
//   min c^T x   s.t.   A x - r = 0,   lb <= x <= ub,   row_lo <= r <= row_hi.
// Columns 0..n-1 are structural, n..n+m-1 are row activities. Every start is
// dual feasible: nonbasic variables sit at the bound matching the sign of
// their reduced cost, using an artificial bound of ±kArtificial when the
// real one is infinite.
class DualSimplex {
 public:
  enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };
  enum class VarState : std::uint8_t { Basic, AtLower, AtUpper, Free };

  struct Basis {
    std::vector<Index> head;
    std::vector<VarState> state;
  };

  struct Options {
    double primal_tol = 1e-9;
    double dual_tol = 1e-9;
    double pivot_tol = 1e-9;
    int refactor_every = 100;
    int bland_after = 1000;
    Index max_iterations = 0;  // 0: automatic
  };

  static constexpr double kArtificial = 1e7;

  DualSimplex(const Vec& cost, const SparseMat& A, const Vec& row_lo,
              const Vec& row_hi, const Vec& lb, const Vec& ub, Options opts);

  void set_bounds(Index j, double lo, double hi);
  double lower(Index j) const { return lo_[j]; }
  double upper(Index j) const { return hi_[j]; }

  Status solve();

  Basis basis() const;
  void set_basis(const Basis& b);

  Vec primal() const { return x_.head(n_); }
  double objective() const;
  Index iterations() const { return iterations_; }

 private:
  Index n_, m_;
  Eigen::SparseMatrix<double> A_;  // column major
  Vec c_, lo_, hi_;
  Options opts_;

  std::vector<Index> head_;
  std::vector<Index> pos_;  // basis position or -1
  std::vector<VarState> state_;
  Vec x_, d_;

  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Index> eta_pos_;
  std::vector<Vec> eta_col_;
  bool factor_valid_ = false;

  Index iterations_ = 0;
  Index degenerate_ = 0;
  bool bland_ = false;

  void slack_basis();
  double nonbasic_value(Index j) const;
  void place_nonbasic(Index j);
  bool factorize();
  Vec ftran(Vec v) const;
  Vec btran(Vec v) const;
  void column(Index j, Vec& out) const;
  double column_dot(Index j, const Vec& y) const;
  void recompute_primal();
  void recompute_duals();
  bool repair_dual_infeasibility();
};

}  // namespace hocp::detail
