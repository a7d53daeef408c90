#include <doctest.h>
#include <hocp/core_model.hpp>

using namespace hocp;

namespace {

Minlp bilinear() {
  Minlp p;
  p.n = 2;
  p.objective.value = [](const Vec& x) { return x[0] * x[0]; };
  p.objective.gradient = [](const Vec& x) { return Vec(Eigen::Vector2d(2 * x[0], 0.0)); };
  p.constraints.m = 1;
  p.constraints.value = [](const Vec& x) { return Vec::Constant(1, x[0] * x[1]); };
  p.constraints.jacobian = [](const Vec& x) {
    SparseMat J(1, 2);
    J.insert(0, 0) = x[1];
    J.insert(0, 1) = x[0];
    return J;
  };
  p.set_c = BoxSet::zeros(1);
  MilSetBuilder b;
  b.add_variable(-10, 10);
  b.add_variable(-10, 10);
  p.set_x = b.build();
  return p;
}

}  // namespace

TEST_CASE("validate accepts a well-formed problem") { CHECK(validate(bilinear()).empty()); }

TEST_CASE("validate flags an unbounded integer variable") {
  Minlp p = bilinear();
  MilSetBuilder b;
  b.add_variable(0, kInf, true);
  b.add_variable(-10, 10);
  p.set_x = b.build();
  const auto v = validate(p);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("bounded") != std::string::npos);
}

TEST_CASE("validate flags a Jacobian of the wrong shape") {
  Minlp p = bilinear();
  p.constraints.jacobian = [](const Vec&) { return SparseMat(2, 3); };
  const auto v = validate(p);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("Jacobian") != std::string::npos);
}

TEST_CASE("check_derivatives") {
  Minlp p = bilinear();
  CHECK(check_derivatives(p, Eigen::Vector2d(3.0, 0.0), 1e-5) <= 1e-8);
  CHECK(check_derivatives(p, Eigen::Vector2d(2.0, 5.0), 1e-5) <= 1e-6);
  p.constraints.jacobian = [](const Vec& x) {
    SparseMat J(1, 2);
    J.insert(0, 0) = x[1] + 1.0;
    J.insert(0, 1) = x[0];
    return J;
  };
  CHECK(check_derivatives(p, Eigen::Vector2d(2.0, 5.0), 1e-5) >= 0.1);
}

TEST_CASE("evaluator counts calls") {
  Minlp p = bilinear();
  Evaluator ev(p);
  const Vec x = Eigen::Vector2d(1.0, 2.0);
  ev.f(x);
  ev.f(x);
  ev.grad(x);
  ev.c(x);
  ev.jac(x);
  CHECK(ev.counters().n_f == 2);
  CHECK(ev.counters().n_grad == 1);
  CHECK(ev.counters().n_c == 1);
  CHECK(ev.counters().n_jac == 1);
}
