#include <hocp/milp.hpp>

#include "dual_simplex.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <memory>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace hocp {

std::string_view to_string(MilpStatus s) {
  switch (s) {
    case MilpStatus::Optimal: return "Optimal";
    case MilpStatus::Infeasible: return "Infeasible";
    case MilpStatus::Unbounded: return "Unbounded";
    case MilpStatus::NodeLimit: return "NodeLimit";
    case MilpStatus::IterationLimit: return "IterationLimit";
  }
  return "?";
}

namespace {

using detail::DualSimplex;

void check_problem(const MilpProblem& p) {
  const MilSet& X = p.set;
  if (p.cost.size() != X.n || X.A.cols() != X.n || X.lb.size() != X.n ||
      X.ub.size() != X.n || X.row_lo.size() != X.A.rows() ||
      X.row_hi.size() != X.A.rows())
    throw std::invalid_argument("MilpProblem: inconsistent dimensions");
  if ((X.lb.array() > X.ub.array()).any())
    throw std::invalid_argument("MilpProblem: lb > ub");
  for (Index j : X.integers)
    if (!std::isfinite(X.lb[j]) || !std::isfinite(X.ub[j]))
      throw std::invalid_argument("MilpProblem: unbounded integer variable");
}

DualSimplex::Options lp_options(const MilpOptions& o) {
  DualSimplex::Options lo;
  lo.refactor_every = o.refactor_every;
  lo.bland_after = o.bland_after;
  lo.dual_tol = o.opt_tol;
  lo.primal_tol = std::min(o.feas_tol, 1e-9);
  return lo;
}

MilpStatus convert(DualSimplex::Status s) {
  switch (s) {
    case DualSimplex::Status::Optimal: return MilpStatus::Optimal;
    case DualSimplex::Status::Infeasible: return MilpStatus::Infeasible;
    case DualSimplex::Status::Unbounded: return MilpStatus::Unbounded;
    default: return MilpStatus::IterationLimit;
  }
}

struct Node {
  std::vector<double> lo, hi;  // bounds of the integer variables
  double bound;
  int depth;
  Index id;
  std::shared_ptr<const DualSimplex::Basis> basis;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    // priority_queue pops the "largest": best bound, then deepest, then oldest.
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id > b.id;
  }
};

bool lex_less(const Vec& a, const Vec& b, const std::vector<Index>& idx) {
  for (Index j : idx) {
    const double ra = std::round(a[j]), rb = std::round(b[j]);
    if (ra != rb) return ra < rb;
  }
  return false;
}

}  // namespace

MilpSolution solve_lp(const MilpProblem& p, const MilpOptions& opts) {
  check_problem(p);
  const MilSet& X = p.set;
  DualSimplex lp(p.cost, X.A, X.row_lo, X.row_hi, X.lb, X.ub, lp_options(opts));
  MilpSolution sol;
  sol.status = convert(lp.solve());
  sol.lp_iterations = lp.iterations();
  sol.nodes_explored = 1;
  if (sol.status == MilpStatus::Optimal) {
    sol.has_solution = true;
    sol.x = lp.primal();
    sol.objective = lp.objective();
    sol.best_bound = sol.objective;
  }
  return sol;
}

MilpSolution solve_milp(const MilpProblem& problem, const MilpOptions& opts) {
  check_problem(problem);
  MilpProblem p = problem;
  if (opts.presolve) {
    for (int pass = 0; pass < 3; ++pass) {
      if (!propagate_bounds(p.set)) {
        MilpSolution sol;
        sol.status = MilpStatus::Infeasible;
        return sol;
      }
      if (tighten_coefficients(p.set) == 0) break;
    }
  }
  const MilSet& X = p.set;
  const auto& ints = X.integers;
  const std::size_t ni = ints.size();

  DualSimplex lp(p.cost, X.A, X.row_lo, X.row_hi, X.lb, X.ub, lp_options(opts));
  MilpSolution sol;

  Vec best_x;
  double best_obj = kInf;
  std::shared_ptr<const DualSimplex::Basis> best_basis;
  if (opts.incumbent && opts.incumbent->size() == X.n &&
      is_member(problem.set, *opts.incumbent, opts.feas_tol)) {
    best_x = *opts.incumbent;
    best_obj = p.cost.dot(best_x);
  }

  // Root relaxation.
  const auto root = lp.solve();
  sol.nodes_explored = 1;
  if (root != DualSimplex::Status::Optimal) {
    sol.status = convert(root);
    sol.lp_iterations = lp.iterations();
    return sol;
  }

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  Index next_id = 0;
  std::shared_ptr<const DualSimplex::Basis> current;  // basis held by `lp`
  bool limit_hit = false;
  double open_bound = kInf;
  std::optional<Node> dive;

  auto process = [&](double obj, const Node* node) {
    const double gap = opts.gap_tol;
    if (obj >= best_obj - gap) return;
    const Vec x = lp.primal();
    Index branch = -1;
    double most = opts.int_tol;
    for (std::size_t k = 0; k < ni; ++k) {
      const double v = x[ints[k]];
      const double frac = std::min(v - std::floor(v), std::ceil(v) - v);
      if (frac > most) {
        most = frac;
        branch = static_cast<Index>(k);
      }
    }
    auto snapshot = std::make_shared<const DualSimplex::Basis>(lp.basis());
    current = snapshot;
    if (branch < 0) {
      if (obj < best_obj - 1e-9 || (obj <= best_obj + 1e-9 && lex_less(x, best_x, ints))) {
        best_obj = obj;
        best_x = x;
        best_basis = snapshot;
      }
      return;
    }
    const Index j = ints[static_cast<std::size_t>(branch)];
    Node down, up;
    if (node) {
      down.lo = node->lo;
      down.hi = node->hi;
    } else {
      down.lo.resize(ni);
      down.hi.resize(ni);
      for (std::size_t k = 0; k < ni; ++k) {
        down.lo[k] = X.lb[ints[k]];
        down.hi[k] = X.ub[ints[k]];
      }
    }
    up.lo = down.lo;
    up.hi = down.hi;
    down.hi[static_cast<std::size_t>(branch)] = std::floor(x[j]);
    up.lo[static_cast<std::size_t>(branch)] = std::ceil(x[j]);
    const int depth = node ? node->depth + 1 : 1;
    down.bound = up.bound = obj;
    down.depth = up.depth = depth;
    down.basis = up.basis = snapshot;
    down.id = next_id++;
    up.id = next_id++;
    // Plunge toward the nearer integer; the sibling waits in the queue.
    const bool go_up = x[j] - std::floor(x[j]) >= 0.5;
    open.push(go_up ? std::move(down) : std::move(up));
    dive = go_up ? std::move(up) : std::move(down);
  };

  process(lp.objective(), nullptr);

  while (dive || !open.empty()) {
    Node node;
    if (dive) {
      node = std::move(*dive);
      dive.reset();
    } else {
      node = open.top();
      open.pop();
    }
    if (node.bound >= best_obj - opts.gap_tol) continue;
    if (sol.nodes_explored >= opts.node_limit) {
      limit_hit = true;
      open_bound = node.bound;
      break;
    }
    for (std::size_t k = 0; k < ni; ++k)
      lp.set_bounds(ints[k], node.lo[k], node.hi[k]);
    if (node.basis != current) lp.set_basis(*node.basis);
    current = node.basis;
    const auto st = lp.solve();
    ++sol.nodes_explored;
    current = nullptr;
    if (st != DualSimplex::Status::Optimal) continue;
    const double obj = lp.objective();
    assert(obj >= node.bound - 1e-6 * (1.0 + std::abs(node.bound)));
    process(obj, &node);
  }

  sol.lp_iterations = lp.iterations();
  if (!std::isfinite(best_obj)) {
    sol.status = limit_hit ? MilpStatus::NodeLimit : MilpStatus::Infeasible;
    return sol;
  }

  // Polish: freeze the integers at their rounded values and re-solve so
  // the real part is feasible for exactly integral x_I.
  if (ni > 0 && best_basis) {
    for (Index j = 0; j < X.n; ++j) lp.set_bounds(j, X.lb[j], X.ub[j]);
    for (Index j : ints) {
      const double v = std::round(best_x[j]);
      lp.set_bounds(j, v, v);
    }
    lp.set_basis(*best_basis);
    if (lp.solve() == DualSimplex::Status::Optimal) {
      best_x = lp.primal();
      best_obj = lp.objective();
    }
    for (Index j : ints) best_x[j] = std::round(best_x[j]);
    sol.lp_iterations = lp.iterations();
  }

  sol.has_solution = true;
  sol.x = best_x;
  sol.objective = best_obj;
  if (limit_hit) {
    sol.status = MilpStatus::NodeLimit;
    double lb = open_bound;
    if (dive) lb = std::min(lb, dive->bound);
    while (!open.empty()) {
      lb = std::min(lb, open.top().bound);
      open.pop();
    }
    sol.best_bound = std::min(lb, best_obj);
  } else {
    sol.status = MilpStatus::Optimal;
    sol.best_bound = best_obj;
  }
  return sol;
}

void write_lp_text(std::ostream& os, const MilpProblem& p) {
  const MilSet& X = p.set;
  auto name = [](Index j) { return "x" + std::to_string(j); };
  auto num = [](double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
  };
  os << "minimize\n obj:";
  for (Index j = 0; j < X.n; ++j)
    if (p.cost[j] != 0.0) os << ' ' << (p.cost[j] < 0 ? "- " : "+ ") << num(std::abs(p.cost[j])) << ' ' << name(j);
  os << "\nsubject to\n";
  for (Index i = 0; i < X.A.rows(); ++i) {
    std::ostringstream terms;
    for (SparseMat::InnerIterator it(X.A, i); it; ++it)
      terms << ' ' << (it.value() < 0 ? "- " : "+ ") << num(std::abs(it.value())) << ' ' << name(it.col());
    const double lo = X.row_lo[i], hi = X.row_hi[i];
    if (lo == hi) {
      os << " r" << i << ':' << terms.str() << " = " << num(hi) << '\n';
    } else {
      if (std::isfinite(hi)) os << " r" << i << ':' << terms.str() << " <= " << num(hi) << '\n';
      if (std::isfinite(lo)) os << " r" << i << (std::isfinite(hi) ? "_lo" : "") << ':' << terms.str() << " >= " << num(lo) << '\n';
    }
  }
  os << "bounds\n";
  for (Index j = 0; j < X.n; ++j) {
    const double lo = X.lb[j], hi = X.ub[j];
    if (lo == hi)
      os << ' ' << name(j) << " = " << num(lo) << '\n';
    else if (!std::isfinite(lo) && !std::isfinite(hi))
      os << ' ' << name(j) << " free\n";
    else
      os << ' ' << (std::isfinite(lo) ? num(lo) : "-inf") << " <= " << name(j) << " <= "
         << (std::isfinite(hi) ? num(hi) : "+inf") << '\n';
  }
  if (!X.integers.empty()) {
    os << "general\n";
    for (Index j : X.integers) os << ' ' << name(j) << '\n';
  }
  os << "end\n";
}

Index tighten_coefficients(MilSet& X) {
  const auto mask = X.integer_mask();
  auto binary = [&](Index j) {
    return mask[static_cast<std::size_t>(j)] && X.lb[j] == 0.0 && X.ub[j] == 1.0;
  };
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(X.A.nonZeros()));
  Index count = 0;
  for (Index i = 0; i < X.A.rows(); ++i) {
    std::vector<std::pair<Index, double>> row;
    for (SparseMat::InnerIterator it(X.A, i); it; ++it) row.push_back({it.col(), it.value()});
    const bool le = std::isfinite(X.row_hi[i]) && !std::isfinite(X.row_lo[i]);
    const bool ge = std::isfinite(X.row_lo[i]) && !std::isfinite(X.row_hi[i]);
    if (le || ge) {
      // Work on the <= form  sgn*a x <= sgn*rhs.
      const double sgn = le ? 1.0 : -1.0;
      double b = sgn * (le ? X.row_hi[i] : X.row_lo[i]);
      auto max_activity = [&]() {
        double m = 0.0;
        for (const auto& [j, v] : row) {
          const double a = sgn * v;
          m += a > 0 ? a * X.ub[j] : a * X.lb[j];
        }
        return m;
      };
      for (auto& [j, v] : row) {
        if (!binary(j)) continue;
        const double amax = max_activity();
        if (!std::isfinite(amax) || amax <= b + 1e-9) break;  // redundant or unbounded
        const double a = sgn * v;
        if (a > 0) {
          const double d = b - (amax - a);
          if (d > 1e-9) {
            v = sgn * (a - d);
            b -= d;
            ++count;
          }
        } else if (a < 0) {
          const double d = b - (amax + a);
          if (d > 1e-9) {
            v = sgn * (a + d);
            ++count;
          }
        }
      }
      if (le) X.row_hi[i] = b;
      else X.row_lo[i] = -b;
    }
    for (const auto& [j, v] : row)
      if (v != 0.0) trips.emplace_back(i, j, v);
  }
  if (count > 0) {
    SparseMat A(X.A.rows(), X.A.cols());
    A.setFromTriplets(trips.begin(), trips.end());
    X.A = std::move(A);
  }
  return count;
}

bool propagate_bounds(MilSet& X, int max_passes) {
  const auto mask = X.integer_mask();
  for (int pass = 0; pass < max_passes; ++pass) {
    bool changed = false;
    for (Index i = 0; i < X.A.rows(); ++i) {
      double amin = 0.0, amax = 0.0;
      int ninf_min = 0, ninf_max = 0;
      for (SparseMat::InnerIterator it(X.A, i); it; ++it) {
        const double a = it.value(), l = X.lb[it.col()], u = X.ub[it.col()];
        const double lo_term = a > 0 ? a * l : a * u;
        const double hi_term = a > 0 ? a * u : a * l;
        if (std::isfinite(lo_term)) amin += lo_term; else ++ninf_min;
        if (std::isfinite(hi_term)) amax += hi_term; else ++ninf_max;
      }
      if (ninf_min == 0 && amin > X.row_hi[i] + 1e-9) return false;
      if (ninf_max == 0 && amax < X.row_lo[i] - 1e-9) return false;
      for (SparseMat::InnerIterator it(X.A, i); it; ++it) {
        const Index j = it.col();
        const double a = it.value(), l = X.lb[j], u = X.ub[j];
        const double lo_term = a > 0 ? a * l : a * u;
        const double hi_term = a > 0 ? a * u : a * l;
        double new_lo = l, new_hi = u;
        // a x_j <= row_hi - (min activity of the others)
        if (std::isfinite(X.row_hi[i])) {
          const bool others_finite = std::isfinite(lo_term) ? ninf_min == 0 : ninf_min == 1;
          if (others_finite) {
            const double rest = std::isfinite(lo_term) ? amin - lo_term : amin;
            const double cap = (X.row_hi[i] - rest) / a;
            if (a > 0) new_hi = std::min(new_hi, cap); else new_lo = std::max(new_lo, cap);
          }
        }
        if (std::isfinite(X.row_lo[i])) {
          const bool others_finite = std::isfinite(hi_term) ? ninf_max == 0 : ninf_max == 1;
          if (others_finite) {
            const double rest = std::isfinite(hi_term) ? amax - hi_term : amax;
            const double cap = (X.row_lo[i] - rest) / a;
            if (a > 0) new_lo = std::max(new_lo, cap); else new_hi = std::min(new_hi, cap);
          }
        }
        if (mask[static_cast<std::size_t>(j)]) {
          new_lo = std::ceil(new_lo - 1e-9);
          new_hi = std::floor(new_hi + 1e-9);
        }
        if (new_lo > new_hi + 1e-9) return false;
        // Only integer bounds are tightened; real bounds stay untouched so
        // LP solutions are not perturbed.
        if (mask[static_cast<std::size_t>(j)] && (new_lo > l + 0.5 || new_hi < u - 0.5)) {
          X.lb[j] = std::max(l, new_lo);
          X.ub[j] = std::min(u, new_hi);
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  return true;
}

}  // namespace hocp
