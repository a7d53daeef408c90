#pragma once

#include <hocp/types.hpp>

#include <string>
#include <utility>
#include <vector>

namespace hocp {

struct MilpOptions;

/// Mixed-integer linear set
///   { x ∈ R^n : row_lo <= A x <= row_hi, lb <= x <= ub, x_i ∈ Z for i ∈ I }.
/// One-sided rows (A x <= b) use row_lo = -inf; equality rows use
/// row_lo == row_hi.
struct MilSet {
  Index n = 0;
  SparseMat A;
  Vec row_lo, row_hi;
  Vec lb, ub;
  std::vector<Index> integers;  // sorted, unique

  Index rows() const { return A.rows(); }
  bool is_integer(Index j) const;
  std::vector<bool> integer_mask() const;
};

/// Incremental construction from triplets.
class MilSetBuilder {
 public:
  MilSetBuilder() = default;
  explicit MilSetBuilder(const MilSet& base);

  Index add_variable(double lo, double hi, bool integer = false);
  Index num_variables() const { return static_cast<Index>(lb_.size()); }
  void set_bounds(Index j, double lo, double hi);
  void set_integer(Index j, bool integer = true);

  using Terms = std::vector<std::pair<Index, double>>;
  Index add_row(const Terms& terms, double lo, double hi);
  Index add_le(const Terms& terms, double rhs) { return add_row(terms, -kInf, rhs); }
  Index add_ge(const Terms& terms, double rhs) { return add_row(terms, rhs, kInf); }
  Index add_eq(const Terms& terms, double rhs) { return add_row(terms, rhs, rhs); }
  Index num_rows() const { return static_cast<Index>(row_lo_.size()); }

  MilSet build() const;

 private:
  std::vector<double> lb_, ub_;
  std::vector<bool> integer_;
  std::vector<Triplet> triplets_;
  std::vector<double> row_lo_, row_hi_;
};

enum class PolyNorm { LInfReal, L1Real };

/// Polyhedral ball on the real-valued components; integer components are
/// not restricted.
struct PolyNormBall {
  Vec center;
  double radius = 0.0;
  PolyNorm flavor = PolyNorm::LInfReal;
};

inline constexpr double kIntTol = 1e-6;

bool is_member(const MilSet& X, const Vec& x, double tol = 1e-9);

/// Minimizer of ||x - x0||_1 over X via a MILP. Throws std::runtime_error
/// if X is empty.
Vec project_l1(const MilSet& X, const Vec& x0);
Vec project_l1(const MilSet& X, const Vec& x0, const MilpOptions& opts);

struct Criticality {
  double psi = 0.0;   // >= 0
  Vec step;           // d* = argmax point - x̄
  bool exact = true;  // false when branch-and-bound hit its node limit
  Index nodes = 0;
  Index lp_iterations = 0;
};

/// Ψ(x̄, Δ) = max { <g, x̄ - x> : x ∈ X ∩ B(x̄, Δ) }.
Criticality criticality_measure(const MilSet& X, const Vec& g, const Vec& xbar,
                                double delta, PolyNorm flavor = PolyNorm::LInfReal);
Criticality criticality_measure(const MilSet& X, const Vec& g, const Vec& xbar,
                                double delta, PolyNorm flavor,
                                const MilpOptions& opts);

/// Real-valued relaxation: the same set with I emptied.
MilSet relax_integrality(const MilSet& X);

/// Freezes every integer coordinate at round(x[i]) and empties I.
MilSet fix_integers(const MilSet& X, const Vec& x);

/// X with sum_i |x_i - round(x̄_i)| <= budget over the integer components.
/// Exact for integers sitting at a bound; interior integers get a box.
MilSet limit_integer_moves(const MilSet& X, const Vec& x, double budget);

}  // namespace hocp
