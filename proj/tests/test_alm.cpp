#include <doctest.h>
#include <hocp/alm.hpp>
#include <hocp/problems.hpp>

#include "oracles.hpp"

#include <random>

using namespace hocp;

namespace {

MilSet real_box(Index n, double lo, double hi) {
  MilSetBuilder b;
  for (Index j = 0; j < n; ++j) b.add_variable(lo, hi);
  return b.build();
}

// f = ‖x‖², c(x) = x0 - 1 ∈ {0}
Minlp pinned() {
  Minlp p;
  p.n = 1;
  p.objective = {[](const Vec& x) { return x.squaredNorm(); }, [](const Vec& x) { return Vec(2.0 * x); }, {}};
  p.constraints.m = 1;
  p.constraints.value = [](const Vec& x) { return Vec::Constant(1, x[0] - 1.0); };
  p.constraints.jacobian = [](const Vec&) {
    SparseMat J(1, 1);
    J.insert(0, 0) = 1.0;
    return J;
  };
  p.set_c = BoxSet::zeros(1);
  p.set_x = real_box(1, -10, 10);
  return p;
}

// Two reals and one integer, nonlinear objective, one equality and one inequality.
Minlp small_mixed() {
  Minlp p;
  p.n = 3;
  p.objective.value = [](const Vec& x) { return std::pow(x[0] - 1.0, 2) + std::exp(0.3 * x[1]) + 0.5 * std::pow(x[2] + 2.6, 2); };
  p.objective.gradient = [](const Vec& x) {
    return Vec(Eigen::Vector3d(2 * (x[0] - 1.0), 0.3 * std::exp(0.3 * x[1]), x[2] + 2.6));
  };
  p.constraints.m = 2;
  p.constraints.value = [](const Vec& x) {
    return Vec(Eigen::Vector2d(x[0] * x[1] + 0.1 * x[2] - 0.3, x[0] * x[0] + x[1] * x[1] - 4.0));
  };
  p.constraints.jacobian = [](const Vec& x) {
    SparseMat J(2, 3);
    J.insert(0, 0) = x[1];
    J.insert(0, 1) = x[0];
    J.insert(0, 2) = 0.1;
    J.insert(1, 0) = 2 * x[0];
    J.insert(1, 1) = 2 * x[1];
    return J;
  };
  p.set_c = BoxSet(Eigen::Vector2d(0.0, -kInf), Eigen::Vector2d(0.0, 0.0));
  MilSetBuilder b;
  b.add_variable(-3, 3);
  b.add_variable(-3, 3);
  b.add_variable(-2, 2, true);
  p.set_x = b.build();
  return p;
}

}  // namespace

TEST_CASE("al_value examples") {
  Minlp p = pinned();
  CHECK(al_value(p, Vec::Constant(1, 1.0), Vec::Zero(1), 0.1) == doctest::Approx(1.0));
  p.objective = {[](const Vec&) { return 0.0; }, [](const Vec&) { return Vec::Zero(1); }, {}};
  CHECK(al_value(p, Vec::Constant(1, 3.0), Vec::Zero(1), 1.0) == doctest::Approx(2.0));
}

TEST_CASE("multiplier maps examples") {
  Minlp p = pinned();
  MultiplierMaps m = multiplier_maps(p, Vec::Constant(1, 1.0), Vec::Zero(1), 0.5);
  CHECK(m.s[0] == 0.0);
  CHECK(m.y[0] == 0.0);
  m = multiplier_maps(p, Vec::Constant(1, 3.0), Vec::Zero(1), 1.0);
  CHECK(m.s[0] == 0.0);
  CHECK(m.y[0] == doctest::Approx(2.0));
  p.set_c = BoxSet::nonpositive(1);
  m = multiplier_maps(p, Vec::Constant(1, 0.0), Vec::Constant(1, 3.0), 1.0);
  CHECK(m.s[0] == 0.0);
  CHECK(m.y[0] == doctest::Approx(2.0));
}

TEST_CASE("al_gradient examples") {
  Minlp p = pinned();
  CHECK(al_gradient(p, Vec::Constant(1, 1.0), Vec::Zero(1), 0.3)[0] == doctest::Approx(2.0));
  p.objective = {[](const Vec&) { return 0.0; }, [](const Vec&) { return Vec::Zero(1); }, {}};
  p.constraints.value = [](const Vec& x) { return x; };
  CHECK(al_gradient(p, Vec::Constant(1, 4.0), Vec::Zero(1), 2.0)[0] == doctest::Approx(2.0));
}

TEST_CASE("AL derivatives match finite differences and the Lagrangian identity") {
  const Minlp p = small_mixed();
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec x = Vec::NullaryExpr(3, [&] { return u(rng); });
    const Vec yhat = Vec::NullaryExpr(2, [&] { return u(rng); });
    const double mu = 0.1 + 0.4 * (u(rng) + 2.0);
    const Vec g = al_gradient(p, x, yhat, mu);
    const Vec fd = oracle::central_gradient([&](const Vec& z) { return al_value(p, z, yhat, mu); }, x);
    for (Index j = 0; j < 3; ++j) CHECK(std::abs(g[j] - fd[j]) <= 1e-5 * std::max(1.0, std::abs(g[j])));
    const MultiplierMaps m = multiplier_maps(p, x, yhat, mu);
    CHECK((g - lagrangian_gradient(p, x, m.y)).norm() <= 1e-12 * std::max(1.0, g.norm()));
    CHECK(normal_cone_residual(p.set_c, m.s, m.y, 1e-9) <= 1e-12);
    const Vec cx = p.constraints.value(x);
    const Vec shift = cx + mu * yhat;
    const double ref = p.objective.value(x) + dist2(p.set_c, shift) / (2 * mu) - 0.5 * mu * yhat.squaredNorm();
    CHECK(al_value(p, x, yhat, mu) == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("unconstrained problems take a single outer iteration") {
  Minlp p = pinned();
  p.constraints = {};
  p.set_c = BoxSet();
  const AlmReport r = solve(p, Vec::Constant(1, 4.0), Vec::Zero(0));
  CHECK(r.status == AlmStatus::EpsKktCritical);
  CHECK(r.outer_iters == 1);
  CHECK(std::abs(r.x[0]) <= 1e-6);
}

TEST_CASE("pinned quadratic: x = 1, y = -2") {
  const Minlp p = pinned();
  const AlmReport r = solve(p, Vec::Zero(1), Vec::Zero(1));
  REQUIRE(r.status == AlmStatus::EpsKktCritical);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.y[0] == doctest::Approx(-2.0).epsilon(1e-5));
  const KktCertificate c = certify_eps_kkt(p, r.x, r.y, r.s, 1e-6, 1e-6);
  CHECK(c.pass);
}

TEST_CASE("ALM trace invariants and certification on a mixed problem") {
  const Minlp p = small_mixed();
  const Vec x0 = project_l1(p.set_x, Vec::Zero(3));
  const AlmReport r = solve(p, x0, Vec::Zero(2));
  REQUIRE(r.status == AlmStatus::EpsKktCritical);
  CHECK(is_member(p.set_x, r.x, 1e-9));
  for (std::size_t k = 1; k < r.trace.size(); ++k) {
    CHECK(r.trace[k].mu <= r.trace[k - 1].mu);
    CHECK(r.trace[k].eps <= r.trace[k - 1].eps);
    CHECK(r.trace[k].eps >= 1e-6);
  }
  const KktCertificate c = certify_eps_kkt(p, r.x, r.y, r.s, 1e-6, 1e-6, PolyNorm::LInfReal, r.psi_delta);
  CHECK(c.pass);

  const AlmReport again = solve(p, r.x, r.y, [&] {
    AlmConfig cfg;
    cfg.mu1 = r.mu_final;
    cfg.eps1 = cfg.eps_d;
    return cfg;
  }());
  CHECK(again.status == AlmStatus::EpsKktCritical);
  CHECK(again.outer_iters == 1);
  CHECK((again.x - r.x).norm() <= 1e-8);
}

TEST_CASE("certificate failures") {
  const Minlp p = pinned();
  const AlmReport r = solve(p, Vec::Zero(1), Vec::Zero(1));
  REQUIRE(r.status == AlmStatus::EpsKktCritical);
  const Vec y_bad = r.y + Vec::Ones(1);
  const KktCertificate bad = certify_eps_kkt(p, r.x, y_bad, r.s, 1e-6, 1e-6);
  CHECK_FALSE(bad.pass);
  CHECK(bad.psi > 1e-6);

  MilSetBuilder b;
  b.add_variable(-10, 10, true);
  Minlp q = pinned();
  q.set_x = b.build();
  const KktCertificate out = certify_eps_kkt(q, Vec::Constant(1, 0.5), Vec::Zero(1), Vec::Zero(1), 1e-6, 1e-6);
  CHECK_FALSE(out.pass);
  CHECK(out.message == "not in X");
}

TEST_CASE("turbo car N=10 from rest is certified") {
  TurboCarConfig c;
  c.N = 10;
  const DiscretizedOcp d = build_turbo_car(c);
  const Minlp& p = d.minlp;
  const AlmReport r = solve(p, project_l1(p.set_x, Vec::Zero(p.n)), Vec::Zero(p.m()));
  REQUIRE(r.status == AlmStatus::EpsKktCritical);
  CHECK(r.viol_norm <= 1e-6);
  CHECK(certify_eps_kkt(p, r.x, r.y, r.s, 1e-6, 1e-6, PolyNorm::LInfReal, r.psi_delta).pass);
}

TEST_CASE("AlmConfig validation") {
  AlmConfig c;
  c.kappa_mu = 1.5;
  CHECK_THROWS(c.validate());
}
