#pragma once

#include <hocp/types.hpp>

#include <stdexcept>

namespace hocp {

/// Product of closed intervals [lower_i, upper_i]. Equality constraints are
/// degenerate components with lower_i == upper_i.
struct BoxSet {
  Vec lower;
  Vec upper;

  BoxSet() = default;
  BoxSet(Vec lo, Vec hi);

  static BoxSet zeros(Index m);
  static BoxSet nonpositive(Index m);

  Index dim() const { return lower.size(); }
  bool contains(const Vec& v, double tol = 0.0) const;
};

namespace detail {
inline void check_dim(const BoxSet& set, Index n) {
  if (n != set.dim())
    throw std::invalid_argument("BoxSet: dimension mismatch");
}
}  // namespace detail

/// Componentwise clamp onto the box.
template <typename Derived>
VecT<typename Derived::Scalar> project(const BoxSet& set,
                                       const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  detail::check_dim(set, v.size());
  return v.cwiseMax(set.lower.template cast<Scalar>())
      .cwiseMin(set.upper.template cast<Scalar>());
}

/// Squared Euclidean distance to the box.
template <typename Derived>
typename Derived::Scalar dist2(const BoxSet& set,
                               const Eigen::MatrixBase<Derived>& v) {
  return (v - project(set, v)).squaredNorm();
}

/// Largest violation of y ∈ N_C(z). Components of z within `tol` of a bound
/// count as active. Returns +inf when z lies outside the box beyond `tol`,
/// where the normal cone is empty.
double normal_cone_residual(const BoxSet& set, const Vec& z, const Vec& y,
                            double tol = 1e-6);

}  // namespace hocp
