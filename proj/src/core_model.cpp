#include <hocp/core_model.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hocp {

Vec Evaluator::c(const Vec& x) {
  ++counters_.n_c;
  if (p_.m() == 0) return Vec::Zero(0);
  return p_.constraints.value(x);
}

SparseMat Evaluator::jac(const Vec& x) {
  ++counters_.n_jac;
  if (p_.m() == 0) return SparseMat(0, p_.n);
  return p_.constraints.jacobian(x);
}

Vec probe_point(const MilSet& X) {
  return Vec::Zero(X.n).cwiseMax(X.lb).cwiseMin(X.ub);
}

std::vector<std::string> validate(const Minlp& p) {
  std::vector<std::string> out;
  auto add = [&](const std::string& s) { out.push_back(s); };
  const MilSet& X = p.set_x;

  if (X.n != p.n) add("set_x dimension " + std::to_string(X.n) + " != n = " + std::to_string(p.n));
  if (X.lb.size() != X.n || X.ub.size() != X.n) add("set_x bound vectors have wrong length");
  if (X.A.cols() != X.n) add("set_x row matrix has " + std::to_string(X.A.cols()) + " columns, expected " + std::to_string(X.n));
  if (X.row_lo.size() != X.A.rows() || X.row_hi.size() != X.A.rows()) add("set_x row bounds have wrong length");
  if (p.set_c.dim() != p.m()) add("set_c dimension " + std::to_string(p.set_c.dim()) + " != m = " + std::to_string(p.m()));
  if (!p.names.empty() && static_cast<Index>(p.names.size()) != p.n) add("names has wrong length");
  if (!out.empty()) return out;

  for (Index j = 0; j < X.n; ++j)
    if (X.lb[j] > X.ub[j]) add("variable " + std::to_string(j) + ": lb > ub");
  for (Index i = 0; i < X.A.rows(); ++i)
    if (X.row_lo[i] > X.row_hi[i]) add("row " + std::to_string(i) + ": lower > upper");
  for (Index j : X.integers) {
    if (j < 0 || j >= X.n) {
      add("integer index " + std::to_string(j) + " out of range");
      continue;
    }
    if (!std::isfinite(X.lb[j]) || !std::isfinite(X.ub[j]))
      add("integer variable " + std::to_string(j) +
          " is unbounded; integer values must lie in a bounded set");
  }
  for (Index i = 0; i < p.set_c.dim(); ++i)
    if (p.set_c.lower[i] > p.set_c.upper[i]) add("set_c component " + std::to_string(i) + ": lower > upper");

  if (!p.objective.value || !p.objective.gradient) {
    add("objective callbacks missing");
    return out;
  }
  const Vec x = probe_point(X);
  try {
    const Vec g = p.objective.gradient(x);
    if (g.size() != p.n) add("gradient length " + std::to_string(g.size()) + " != n = " + std::to_string(p.n));
    if (p.m() > 0) {
      if (!p.constraints.value || !p.constraints.jacobian) {
        add("constraint callbacks missing");
        return out;
      }
      const Vec c = p.constraints.value(x);
      if (c.size() != p.m()) add("constraint length " + std::to_string(c.size()) + " != m = " + std::to_string(p.m()));
      const SparseMat J = p.constraints.jacobian(x);
      if (J.rows() != p.m() || J.cols() != p.n) {
        std::ostringstream s;
        s << "Jacobian is " << J.rows() << "x" << J.cols() << ", expected " << p.m() << "x" << p.n;
        add(s.str());
      }
    }
  } catch (const std::exception& e) {
    add(std::string("evaluation failed at probe point: ") + e.what());
  }
  return out;
}

double check_derivatives(const Minlp& p, const Vec& x, double h) {
  if (h <= 0.0) throw std::invalid_argument("check_derivatives: h must be positive");
  if (x.size() != p.n) throw std::invalid_argument("check_derivatives: dimension mismatch");
  const Vec g = p.objective.gradient(x);
  Mat J;
  if (p.m() > 0) J = Mat(p.constraints.jacobian(x));
  double err = 0.0;
  Vec xp = x, xm = x;
  for (Index j = 0; j < p.n; ++j) {
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    const double fd = (p.objective.value(xp) - p.objective.value(xm)) / (2 * h);
    err = std::max(err, std::abs(fd - g[j]) / std::max(1.0, std::abs(g[j])));
    if (p.m() > 0) {
      const Vec cd = (p.constraints.value(xp) - p.constraints.value(xm)) / (2 * h);
      for (Index i = 0; i < p.m(); ++i)
        err = std::max(err, std::abs(cd[i] - J(i, j)) / std::max(1.0, std::abs(J(i, j))));
    }
    xp[j] = xm[j] = x[j];
  }
  return err;
}

}  // namespace hocp
