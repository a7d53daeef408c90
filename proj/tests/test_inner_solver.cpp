#include <doctest.h>
#include <hocp/inner_solver.hpp>
#include <hocp/milp.hpp>

#include <Eigen/Eigenvalues>
#include <random>

using namespace hocp;

namespace {

SmoothFunction quadratic(const Vec& target) {
  return {[target](const Vec& x) { return (x - target).squaredNorm(); },
          [target](const Vec& x) { return Vec(2.0 * (x - target)); }};
}

MilSet box(Index n, double lo, double hi, bool integer) {
  MilSetBuilder b;
  for (Index j = 0; j < n; ++j) b.add_variable(lo, hi, integer);
  return b.build();
}

// Projected gradient with a fixed step on a box, as an independent reference.
Vec projected_gradient(const SmoothFunction& f, const Vec& lo, const Vec& hi, Vec x, double step) {
  for (int k = 0; k < 20000; ++k) x = (x - step * f.gradient(x)).cwiseMax(lo).cwiseMin(hi);
  return x;
}

}  // namespace

TEST_CASE("integer quadratic reaches the nearest integer minimizer") {
  const MilSet X = box(1, 0, 10, true);
  const InnerResult r = minimize(quadratic(Vec::Constant(1, 3.0)), X, Vec::Zero(1), 1e-6);
  CHECK(r.certified);
  CHECK(r.x[0] == 3.0);
  CHECK(r.psi == doctest::Approx(0.0).epsilon(1e-12));
  int best = 0;
  for (int v = 0; v <= 10; ++v)
    if ((v - 3) * (v - 3) < (best - 3) * (best - 3)) best = v;
  CHECK(r.x[0] == best);
}

TEST_CASE("linear objective over a box takes one step to the optimal vertex") {
  const Vec g = Eigen::Vector2d(1.0, -2.0);
  const SmoothFunction lin{[g](const Vec& x) { return g.dot(x); }, [g](const Vec&) { return g; }};
  TrConfig cfg;
  cfg.delta0 = 10.0;
  const InnerResult r = minimize(lin, box(2, -1, 1, false), Vec::Zero(2), 1e-9, cfg);
  CHECK(r.certified);
  CHECK(r.x.isApprox(Eigen::Vector2d(-1.0, 1.0)));
  CHECK(r.iterations == 1);
  CHECK(r.psi == 0.0);
}

TEST_CASE("a critical start is returned unchanged after one evaluation") {
  const Vec x0 = Eigen::Vector2d(0.5, 0.25);
  const InnerResult r = minimize(quadratic(x0), box(2, -1, 1, false), x0, 1e-8);
  CHECK(r.certified);
  CHECK(r.x == x0);
  CHECK(r.psi_evaluations == 1);
  CHECK(r.iterations == 0);
}

TEST_CASE("continuous convex problems match projected gradient") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 10; ++trial) {
    Mat M = Mat::NullaryExpr(3, 3, [&] { return u(rng); });
    const Mat H = M.transpose() * M + Mat::Identity(3, 3);
    const Vec q = Vec::NullaryExpr(3, [&] { return u(rng); });
    const SmoothFunction f{[H, q](const Vec& x) { return 0.5 * x.dot(H * x) + q.dot(x); },
                           [H, q](const Vec& x) { return Vec(H * x + q); }};
    const Vec lo = Vec::Constant(3, -1.0), hi = Vec::Constant(3, 1.0);
    const MilSet X = box(3, -1, 1, false);
    const InnerResult r = minimize(f, X, Vec::Zero(3), 1e-8);
    const double step = 1.0 / H.operatorNorm();
    const Vec ref = projected_gradient(f, lo, hi, Vec::Zero(3), step);
    CHECK(r.certified);
    CHECK(r.value == doctest::Approx(f.value(ref)).epsilon(1e-4));
  }
}

TEST_CASE("descent, membership and certificate reproducibility on a mixed problem") {
  std::mt19937 rng(19);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    MilSetBuilder b;
    for (int j = 0; j < 3; ++j) b.add_variable(-3, 3, true);
    for (int j = 0; j < 3; ++j) b.add_variable(-3, 3);
    b.add_le({{0, 1.0}, {3, 1.0}, {4, -1.0}}, 2.0);
    b.add_ge({{1, 1.0}, {2, 1.0}, {5, 1.0}}, -2.0);
    const MilSet X = b.build();
    const Vec target = Vec::NullaryExpr(6, [&] { return u(rng); });
    const SmoothFunction f{[target](const Vec& x) { return (x - target).squaredNorm() + 0.1 * x.array().pow(4).sum(); },
                           [target](const Vec& x) { return Vec(2.0 * (x - target) + 0.4 * x.array().pow(3).matrix()); }};
    const Vec x0 = project_l1(X, Vec::Zero(6));
    const InnerResult r = minimize(f, X, x0, 1e-6);
    CHECK(is_member(X, r.x));
    CHECK(r.value <= f.value(x0));
    for (std::size_t k = 1; k < r.trace.size(); ++k) CHECK(r.trace[k].psi >= 0.0);
    const Criticality fresh = criticality_measure(X, f.gradient(r.x), r.x, r.delta_check);
    CHECK(std::abs(fresh.psi - r.psi) <= 1e-9);
  }
}

TEST_CASE("TrConfig validation") {
  TrConfig c;
  c.eta_accept = 0.9;
  c.eta_expand = 0.5;
  CHECK_THROWS(c.validate());
  TrConfig d;
  d.delta_min = 2.0;
  CHECK_THROWS(d.validate());
}
