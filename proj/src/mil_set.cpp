#include <hocp/mil_set.hpp>
#include <hocp/milp.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hocp {

bool MilSet::is_integer(Index j) const {
  return std::binary_search(integers.begin(), integers.end(), j);
}

std::vector<bool> MilSet::integer_mask() const {
  std::vector<bool> mask(static_cast<std::size_t>(n), false);
  for (Index j : integers) mask[static_cast<std::size_t>(j)] = true;
  return mask;
}

MilSetBuilder::MilSetBuilder(const MilSet& base) {
  for (Index j = 0; j < base.n; ++j) add_variable(base.lb[j], base.ub[j], base.is_integer(j));
  for (Index i = 0; i < base.A.rows(); ++i) {
    Terms t;
    for (SparseMat::InnerIterator it(base.A, i); it; ++it) t.emplace_back(it.col(), it.value());
    add_row(t, base.row_lo[i], base.row_hi[i]);
  }
}

Index MilSetBuilder::add_variable(double lo, double hi, bool integer) {
  if (lo > hi) throw std::invalid_argument("MilSetBuilder: lb > ub");
  lb_.push_back(lo);
  ub_.push_back(hi);
  integer_.push_back(integer);
  return num_variables() - 1;
}

void MilSetBuilder::set_bounds(Index j, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("MilSetBuilder: lb > ub");
  lb_.at(static_cast<std::size_t>(j)) = lo;
  ub_.at(static_cast<std::size_t>(j)) = hi;
}

void MilSetBuilder::set_integer(Index j, bool integer) {
  integer_.at(static_cast<std::size_t>(j)) = integer;
}

Index MilSetBuilder::add_row(const Terms& terms, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("MilSetBuilder: row lower > upper");
  const Index row = num_rows();
  for (const auto& [j, a] : terms) {
    if (j < 0 || j >= num_variables())
      throw std::out_of_range("MilSetBuilder: variable index out of range");
    if (a != 0.0) triplets_.emplace_back(row, j, a);
  }
  row_lo_.push_back(lo);
  row_hi_.push_back(hi);
  return row;
}

MilSet MilSetBuilder::build() const {
  MilSet X;
  X.n = num_variables();
  X.A.resize(num_rows(), X.n);
  X.A.setFromTriplets(triplets_.begin(), triplets_.end());
  X.A.makeCompressed();
  X.row_lo = Eigen::Map<const Vec>(row_lo_.data(), num_rows());
  X.row_hi = Eigen::Map<const Vec>(row_hi_.data(), num_rows());
  X.lb = Eigen::Map<const Vec>(lb_.data(), X.n);
  X.ub = Eigen::Map<const Vec>(ub_.data(), X.n);
  for (Index j = 0; j < X.n; ++j)
    if (integer_[static_cast<std::size_t>(j)]) X.integers.push_back(j);
  return X;
}

bool is_member(const MilSet& X, const Vec& x, double tol) {
  if (x.size() != X.n) return false;
  if ((x.array() < X.lb.array() - tol).any() || (x.array() > X.ub.array() + tol).any())
    return false;
  for (Index j : X.integers)
    if (std::abs(x[j] - std::round(x[j])) > kIntTol) return false;
  if (X.A.rows() == 0) return true;
  const Vec ax = X.A * x;
  return ((ax.array() >= X.row_lo.array() - tol) && (ax.array() <= X.row_hi.array() + tol)).all();
}

MilSet relax_integrality(const MilSet& X) {
  MilSet R = X;
  R.integers.clear();
  return R;
}

MilSet fix_integers(const MilSet& X, const Vec& x) {
  MilSet F = X;
  for (Index j : X.integers) F.lb[j] = F.ub[j] = std::round(x[j]);
  F.integers.clear();
  return F;
}

MilSet limit_integer_moves(const MilSet& X, const Vec& x, double budget) {
  MilSetBuilder b(X);
  MilSetBuilder::Terms terms;
  double rhs = budget;
  for (Index j : X.integers) {
    const double v = std::round(x[j]);
    if (v <= X.lb[j]) {
      terms.push_back({j, 1.0});
      rhs += v;
    } else if (v >= X.ub[j]) {
      terms.push_back({j, -1.0});
      rhs -= v;
    } else {
      b.set_bounds(j, std::max(X.lb[j], v - budget), std::min(X.ub[j], v + budget));
    }
  }
  if (!terms.empty()) b.add_le(terms, rhs);
  return b.build();
}

Vec project_l1(const MilSet& X, const Vec& x0) { return project_l1(X, x0, MilpOptions{}); }

Vec project_l1(const MilSet& X, const Vec& x0, const MilpOptions& opts) {
  if (x0.size() != X.n) throw std::invalid_argument("project_l1: dimension mismatch");
  if (is_member(X, x0)) return x0;
  MilSetBuilder b(X);
  Vec cost = Vec::Zero(2 * X.n);
  for (Index j = 0; j < X.n; ++j) {
    const Index t = b.add_variable(0.0, kInf);
    if (X.lb[j] == X.ub[j]) {
      b.set_bounds(t, 0.0, 0.0);  // fixed coordinate, distance is a constant
      continue;
    }
    cost[t] = 1.0;
    b.add_ge({{t, 1.0}, {j, -1.0}}, -x0[j]);  // t >= x - x0
    b.add_ge({{t, 1.0}, {j, 1.0}}, x0[j]);    // t >= x0 - x
  }
  MilpProblem p{cost, b.build()};
  MilpOptions o = opts;
  o.incumbent.reset();
  const MilpSolution sol = solve_milp(p, o);
  if (!sol.has_solution) {
    if (sol.status == MilpStatus::Infeasible)
      throw std::runtime_error("project_l1: the MIL set is empty");
    throw std::runtime_error("project_l1: MILP failed (" + std::string(to_string(sol.status)) + ")");
  }
  return sol.x.head(X.n);
}

Criticality criticality_measure(const MilSet& X, const Vec& g, const Vec& xbar,
                                double delta, PolyNorm flavor) {
  return criticality_measure(X, g, xbar, delta, flavor, MilpOptions{});
}

Criticality criticality_measure(const MilSet& X, const Vec& g, const Vec& xbar,
                                double delta, PolyNorm flavor, const MilpOptions& opts) {
  if (g.size() != X.n || xbar.size() != X.n)
    throw std::invalid_argument("criticality_measure: dimension mismatch");
  if (delta < 0.0) throw std::invalid_argument("criticality_measure: negative radius");
  Criticality out;
  out.step = Vec::Zero(X.n);
  if (g.isZero(0.0)) return out;

  const auto mask = X.integer_mask();
  MilpProblem p;
  MilpOptions o = opts;
  if (flavor == PolyNorm::LInfReal) {
    p.set = X;
    for (Index j = 0; j < X.n; ++j) {
      if (mask[static_cast<std::size_t>(j)]) continue;
      p.set.lb[j] = std::max(X.lb[j], xbar[j] - delta);
      p.set.ub[j] = std::min(X.ub[j], xbar[j] + delta);
      if (p.set.lb[j] > p.set.ub[j]) p.set.lb[j] = p.set.ub[j] = std::clamp(xbar[j], X.lb[j], X.ub[j]);
    }
    p.cost = g;
    o.incumbent = xbar;
  } else {
    MilSetBuilder b(X);
    MilSetBuilder::Terms budget;
    for (Index j = 0; j < X.n; ++j) {
      if (mask[static_cast<std::size_t>(j)] || X.lb[j] == X.ub[j]) continue;
      const Index t = b.add_variable(0.0, kInf);
      b.add_ge({{t, 1.0}, {j, -1.0}}, -xbar[j]);
      b.add_ge({{t, 1.0}, {j, 1.0}}, xbar[j]);
      budget.emplace_back(t, 1.0);
    }
    if (!budget.empty()) b.add_le(budget, delta);
    p.set = b.build();
    p.cost = Vec::Zero(p.set.n);
    p.cost.head(X.n) = g;
    Vec start = Vec::Zero(p.set.n);
    start.head(X.n) = xbar;
    o.incumbent = start;
  }

  const MilpSolution sol = solve_milp(p, o);
  out.nodes = sol.nodes_explored;
  out.lp_iterations = sol.lp_iterations;
  out.exact = sol.status == MilpStatus::Optimal;
  if (!sol.has_solution) {
    out.exact = false;
    return out;
  }
  const Vec x = sol.x.head(X.n);
  const double psi = g.dot(xbar - x);
  if (psi > 0.0) {
    out.psi = psi;
    out.step = x - xbar;
  }
  return out;
}

}  // namespace hocp
