#include <doctest.h>
#include <hocp/milp.hpp>
#include <hocp/problems.hpp>
#include <hocp/transcription.hpp>

#include <random>
#include <set>
#include <sstream>

using namespace hocp;

namespace {

// ẋ = u on [0, 1], kept nonlinear so the row lands in c.
OcpSpec integrator() {
  OcpSpec s;
  s.nx = 1;
  s.nu = 1;
  s.T = 1.0;
  s.dynamics = [](double, const Vec&, const Vec& u, const Vec&) { return u; };
  s.dynamics_jacobian = [](double, const Vec&, const Vec&, const Vec&) {
    return DynamicsJacobian{Mat::Zero(1, 1), Mat::Ones(1, 1), Mat::Zero(1, 0)};
  };
  s.stage_cost = [](double, const Vec&, const Vec& u, const Vec&) { return u.squaredNorm(); };
  s.stage_cost_gradient = [](double, const Vec&, const Vec& u, const Vec&) {
    return StageCostGradient{Vec::Zero(1), Vec(2.0 * u), Vec::Zero(0)};
  };
  s.affine = {std::nullopt};
  s.x_init = Vec::Zero(1);
  s.terminal = {1.0};
  s.x_lo = Vec::Constant(1, -5.0);
  s.x_hi = Vec::Constant(1, 5.0);
  s.u_lo = Vec::Constant(1, -5.0);
  s.u_hi = Vec::Constant(1, 5.0);
  return s;
}

Mat random_sos1(std::mt19937& rng, Index N, Index nw) {
  std::uniform_int_distribution<Index> pick(0, nw - 1);
  Mat w = Mat::Zero(N, nw);
  for (Index k = 0; k < N; ++k) w(k, pick(rng)) = 1.0;
  return w;
}

double tv_formula(const Mat& w) {
  double s = 0.0;
  for (Index k = 0; k + 1 < w.rows(); ++k) s += (w.row(k + 1) - w.row(k)).cwiseAbs().sum();
  return 0.5 * s;
}

}  // namespace

TEST_CASE("single Euler step of an integrator") {
  const DiscretizedOcp d = discretize_euler(integrator(), 1);
  const Minlp& p = d.minlp;
  REQUIRE(p.n == 3);
  REQUIRE(p.m() == 1);
  const Vec x = Eigen::Vector3d(0.0, 1.0, 1.0);
  CHECK(is_member(p.set_x, x));
  CHECK(std::abs(p.constraints.value(x)[0]) <= 1e-15);
  CHECK(std::abs(p.constraints.value(Eigen::Vector3d(0.0, 0.5, 1.0))[0]) == doctest::Approx(0.5));
  CHECK(validate(p).empty());
}

TEST_CASE("binary counts of the benchmarks") {
  TurboCarConfig car;
  car.N = 100;
  CHECK(build_turbo_car(car).minlp.set_x.integers.size() == 100);
  FishingConfig fish;
  fish.N = 50;
  CHECK(build_fishing(fish).minlp.set_x.integers.size() == 250);
}

TEST_CASE("TV gadget adds N-1 variables and 4(N-1) rows per binary control") {
  FishingConfig c;
  c.N = 50;
  const DiscretizedOcp base = build_fishing(c);
  const DiscretizedOcp pen = add_total_variation(base, TvMode::penalty(0.1));
  CHECK(pen.minlp.n - base.minlp.n == 5 * 49);
  CHECK(pen.minlp.set_x.rows() - base.minlp.set_x.rows() == 4 * 5 * 49);
  const DiscretizedOcp bnd = add_total_variation(base, TvMode::bound(8));
  CHECK(bnd.minlp.set_x.rows() - base.minlp.set_x.rows() == 4 * 5 * 49 + 1);
  CHECK(validate(bnd.minlp).empty());
}

TEST_CASE("TV gadget value equals the direct formula") {
  FishingConfig c;
  c.N = 10;
  c.tv_mode = TvMode::penalty(1.0);
  const DiscretizedOcp d = build_fishing(c);
  std::mt19937 rng(29);

  auto gadget_tv = [&](const Mat& w) {
    Trajectory traj = simulate(*d.spec, d.N, Mat::Zero(d.N, 0), w);
    const Vec x = encode_trajectory(d, traj);
    // smallest admissible t with the binaries fixed
    MilpProblem lp{Vec::Zero(d.minlp.n), fix_integers(d.minlp.set_x, x)};
    lp.cost.tail(d.minlp.n - d.tv.first).setConstant(0.5);
    const MilpSolution s = solve_lp(lp);
    REQUIRE(s.status == MilpStatus::Optimal);
    return s.objective;
  };

  Mat constant = Mat::Zero(10, 5);
  constant.col(0).setOnes();
  CHECK(gadget_tv(constant) == doctest::Approx(0.0));
  CHECK(total_variation(constant) == 0.0);

  Mat one = constant;
  one.block(5, 0, 5, 1).setZero();
  one.block(5, 2, 5, 1).setOnes();
  CHECK(gadget_tv(one) == doctest::Approx(1.0));

  Mat alternating = Mat::Zero(10, 5);
  for (Index k = 0; k < 10; ++k) alternating(k, k % 2) = 1.0;
  CHECK(total_variation(alternating) == doctest::Approx(9.0));
  CHECK(gadget_tv(alternating) == doctest::Approx(9.0));

  for (int trial = 0; trial < 20; ++trial) {
    const Mat w = random_sos1(rng, 10, 5);
    const double ref = tv_formula(w);
    CHECK(total_variation(w) == doctest::Approx(ref));
    CHECK(gadget_tv(w) == doctest::Approx(ref));
    CHECK(ref == std::round(ref));
  }
}

TEST_CASE("encode and extract are inverse") {
  TurboCarConfig c;
  c.N = 8;
  const DiscretizedOcp d = build_turbo_car(c);
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 10; ++trial) {
    Vec x = Vec::NullaryExpr(d.minlp.n, [&] { return u(rng); });
    for (Index j : d.minlp.set_x.integers) x[j] = u(rng) > 0 ? 1.0 : 0.0;
    const Vec back = encode_trajectory(d, extract_trajectory(d, x));
    CHECK((back - x).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("simulated trajectories satisfy the transcribed dynamics") {
  std::mt19937 rng(13);
  FishingConfig f;
  f.N = 20;
  const DiscretizedOcp fish = build_fishing(f);
  for (int trial = 0; trial < 5; ++trial) {
    const Trajectory traj = simulate(*fish.spec, fish.N, Mat::Zero(fish.N, 0), random_sos1(rng, fish.N, 5));
    const Vec x = encode_trajectory(fish, traj);
    CHECK(fish.minlp.constraints.value(x).cwiseAbs().maxCoeff() <= 1e-12);
    const Trajectory ex = extract_trajectory(fish, x);
    for (Index k = 0; k < fish.N; ++k) CHECK(ex.binaries.row(k).sum() == 1.0);
  }

  TurboCarConfig c;
  c.N = 10;
  const DiscretizedOcp car = build_turbo_car(c);
  std::uniform_real_distribution<double> a(0.0, 5.0);
  Mat controls = Mat::NullaryExpr(car.N, 2, [&] { return a(rng); });
  const Trajectory traj = simulate(*car.spec, car.N, controls, Mat::Zero(car.N, 1));
  const Vec x = encode_trajectory(car, traj);
  CHECK(car.minlp.constraints.value(x).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("dynamics rows touch only neighbouring stages") {
  TurboCarConfig c;
  c.N = 12;
  const DiscretizedOcp d = build_turbo_car(c);
  const Vec x = Vec::Ones(d.minlp.n);
  const SparseMat J = d.minlp.constraints.jacobian(x);
  const Index stride = d.layout.stride();
  for (Index i = 0; i < J.rows(); ++i) {
    std::set<Index> stages;
    for (SparseMat::InnerIterator it(J, i); it; ++it) stages.insert(it.col() / stride);
    REQUIRE(!stages.empty());
    CHECK(*stages.rbegin() - *stages.begin() <= 1);
  }
}

TEST_CASE("nonlinear row counts") {
  TurboCarConfig c;
  c.N = 100;
  CHECK(build_turbo_car(c).minlp.m() == 100);
  FishingConfig f;
  f.N = 50;
  CHECK(build_fishing(f).minlp.m() == 100);
}

TEST_CASE("trajectory csv header") {
  FishingConfig f;
  f.N = 3;
  const DiscretizedOcp d = build_fishing(f);
  std::ostringstream os;
  write_trajectory_csv(os, extract_trajectory(d, project_l1(d.minlp.set_x, Vec::Zero(d.minlp.n))));
  const std::string s = os.str();
  CHECK(s.substr(0, s.find('\n')).find("t,") == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 5);
}
