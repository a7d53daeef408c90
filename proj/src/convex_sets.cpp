#include <hocp/convex_sets.hpp>

#include <algorithm>
#include <cmath>

namespace hocp {

BoxSet::BoxSet(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size())
    throw std::invalid_argument("BoxSet: bound vectors differ in length");
  if ((lower.array() > upper.array()).any())
    throw std::invalid_argument("BoxSet: lower > upper");
}

BoxSet BoxSet::zeros(Index m) { return {Vec::Zero(m), Vec::Zero(m)}; }

BoxSet BoxSet::nonpositive(Index m) {
  return {Vec::Constant(m, -kInf), Vec::Zero(m)};
}

bool BoxSet::contains(const Vec& v, double tol) const {
  detail::check_dim(*this, v.size());
  return ((v.array() >= lower.array() - tol) &&
          (v.array() <= upper.array() + tol))
      .all();
}

double normal_cone_residual(const BoxSet& set, const Vec& z, const Vec& y,
                            double tol) {
  detail::check_dim(set, z.size());
  detail::check_dim(set, y.size());
  double res = 0.0;
  for (Index i = 0; i < z.size(); ++i) {
    const double lo = set.lower[i], hi = set.upper[i];
    if (z[i] < lo - tol || z[i] > hi + tol) return kInf;
    const bool at_lo = std::isfinite(lo) && z[i] <= lo + tol;
    const bool at_hi = std::isfinite(hi) && z[i] >= hi - tol;
    double viol;
    if (at_lo && at_hi)
      viol = 0.0;
    else if (at_lo)
      viol = std::max(y[i], 0.0);
    else if (at_hi)
      viol = std::max(-y[i], 0.0);
    else
      viol = std::abs(y[i]);
    res = std::max(res, viol);
  }
  return res;
}

}  // namespace hocp
