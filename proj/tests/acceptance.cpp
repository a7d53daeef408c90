#include <hocp/alm.hpp>
#include <hocp/baselines.hpp>
#include <hocp/milp.hpp>
#include <hocp/problems.hpp>

#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace hocp;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0, blocking = 0;
std::set<int> known_fail;

void report(int id, bool pass, const std::string& what, const std::string& detail, double secs) {
  const bool known = known_fail.count(id) > 0;
  if (!pass) ++failures;
  if (!pass && !known) ++blocking;
  std::printf("criterion %d %s%s  %s  [%s]  (%.1f s)\n", id, pass ? "PASS" : "FAIL", !pass && known ? " (known)" : "",
              what.c_str(), detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

struct Run {
  AlmReport rep;
  KktCertificate cert;
  double secs = 0.0;
};

Run solve_and_certify(const Minlp& p, const Vec& x0, const Vec& y0, const AlmConfig& cfg) {
  const auto t0 = Clock::now();
  Run r;
  r.rep = solve(p, x0, y0, cfg);
  r.cert = certify_eps_kkt(p, r.rep.x, r.rep.y, r.rep.s, 1e-6, 1e-6, cfg.flavor, r.rep.psi_delta, cfg.milp);
  r.secs = seconds_since(t0);
  return r;
}

bool certified(const Run& r) { return r.rep.status == AlmStatus::EpsKktCritical && r.cert.pass; }

// Fishing runs start from CIA and scale the first penalty from that start.
AlmConfig fishing_config() {
  AlmConfig c;
  c.adaptive_mu1 = true;
  return c;
}

Trajectory fishing_cia(Index N) {
  FishingConfig f;
  f.N = N;
  const DiscretizedOcp d = build_fishing(f);
  const RelaxResult r = relax_then_project(d.minlp, Vec::Ones(d.minlp.n));
  return cia_sur(*d.spec, extract_trajectory(d, r.x_relaxed, false));
}

DiscretizedOcp fishing(Index N, TvMode tv) {
  FishingConfig f;
  f.N = N;
  f.tv_mode = tv;
  return build_fishing(f);
}

DiscretizedOcp car(Index N, double c_d) {
  TurboCarConfig c;
  c.N = N;
  c.c_d = c_d;
  return build_turbo_car(c);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

void structural() {
  const auto t0 = Clock::now();
  const DiscretizedOcp c = car(100, 1e-3);
  FishingConfig f;
  f.N = 50;
  const DiscretizedOcp base = build_fishing(f);
  const DiscretizedOcp tv = add_total_variation(base, TvMode::bound(13));
  const double secs = seconds_since(t0);
  const Index car_bin = static_cast<Index>(c.minlp.set_x.integers.size());
  const Index fish_bin = static_cast<Index>(base.minlp.set_x.integers.size());
  const Index added_vars = tv.minlp.n - base.minlp.n;
  const Index added_rows = tv.minlp.set_x.rows() - base.minlp.set_x.rows() - 1;  // minus the bound row
  const bool pass = car_bin == 100 && fish_bin == 250 && added_vars == 5 * 49 && added_rows == 4 * 5 * 49 && secs < 1.0;
  report(1, pass, "structural fidelity",
         "car binaries " + std::to_string(car_bin) + ", fishing binaries " + std::to_string(fish_bin) +
             ", TV vars " + std::to_string(added_vars) + ", TV rows " + std::to_string(added_rows),
         secs);
}

void milp_oracle() {
  const auto t0 = Clock::now();
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> nb(1, 12), nr(0, 6), rows(1, 8);
  const auto lp = [](const MilpProblem& q) {
    const MilpSolution s = solve_lp(q);
    return s.status == MilpStatus::Optimal ? s.objective : kInf;
  };
  int agree = 0;
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const MilpProblem p = oracle::random_milp(rng, nb(rng), nr(rng), rows(rng));
    const double ref = oracle::milp_by_enumeration(p, lp);
    const MilpSolution s = solve_milp(p);
    const double err = std::abs(s.objective - ref);
    worst = std::max(worst, err);
    agree += s.status == MilpStatus::Optimal && err <= 1e-6;
  }
  const double secs = seconds_since(t0);
  report(2, agree == 50 && secs < 60.0, "MILP vs enumeration",
         std::to_string(agree) + "/50 within 1e-6, worst " + fmt(worst), secs);
}

void derivatives() {
  const auto t0 = Clock::now();
  std::mt19937 rng(7);
  double worst = 0.0;
  for (const DiscretizedOcp& d : {car(100, 1e-2), fishing(50, TvMode::bound(13))}) {
    const MilSet& X = d.minlp.set_x;
    for (int k = 0; k < 20; ++k) {
      Vec x(X.n);
      for (Index j = 0; j < X.n; ++j)
        x[j] = std::uniform_real_distribution<double>(std::max(X.lb[j], -5.0), std::min(X.ub[j], 5.0))(rng);
      worst = std::max(worst, check_derivatives(d.minlp, x, 1e-5));
    }
  }
  const double secs = seconds_since(t0);
  report(3, worst <= 1e-6 && secs < 10.0, "derivatives vs central differences", "max rel err " + fmt(worst), secs);
}

// Hysteresis with weak thresholds: off below v-, on above v+, hold in between.
bool hysteresis(double v, double wp, double w, double vm, double vp) {
  if (w == 1.0 && v < vm) return false;
  if (w == 0.0 && v > vp) return false;
  if (wp == 0.0 && w == 1.0) return v >= vp;
  if (wp == 1.0 && w == 0.0) return v <= vm;
  return true;
}

void hysteresis_table() {
  const auto t0 = Clock::now();
  TurboCarConfig c;
  const OcpSpec s = build_turbo_car_spec(c);
  int cases = 0, wrong = 0;
  std::vector<double> grid;
  for (double v = -c.v_max; v <= c.v_max + 1e-12; v += 0.5) grid.push_back(v);
  for (double v : {0.0, 4.0, 5.0, 7.0, 10.0, 12.0, 25.0}) grid.push_back(v);
  for (double v : grid)
    for (double wp : {0.0, 1.0})
      for (double w : {0.0, 1.0}) {
        const Vec x = Eigen::Vector2d(0.0, v), u = Vec::Zero(s.nu);
        bool ok = true;
        for (const StageRow& r : s.stage_rows) {
          const double a = r.cx.dot(x) + r.cu.dot(u) + r.cw[0] * w + r.cw_prev[0] * wp;
          ok = ok && a >= r.lo - 1e-12 && a <= r.hi + 1e-12;
        }
        ++cases;
        wrong += ok != hysteresis(v, wp, w, c.v_minus, c.v_plus);
      }
  const double secs = seconds_since(t0);
  report(5, wrong == 0 && secs < 1.0, "hysteresis truth table",
         std::to_string(cases - wrong) + "/" + std::to_string(cases) + " cases agree", secs);
}

struct Certified {
  Run car25;
  Run fish_none;
  Vec fish_none_x0;
  double fish_none_obj = kInf;
};

Certified certification(const Trajectory& cia) {
  const auto t0 = Clock::now();
  Certified keep;
  std::ostringstream detail;
  bool pass = true;
  double slowest = 0.0;
  for (Index N : {25, 50})
    for (double cd : {1e-3, 1e-2}) {
      const DiscretizedOcp d = car(N, cd);
      const Minlp& p = d.minlp;
      Run r = solve_and_certify(p, project_l1(p.set_x, Vec::Zero(p.n)), Vec::Zero(p.m()), AlmConfig{});
      pass = pass && certified(r);
      slowest = std::max(slowest, r.secs);
      detail << "car N=" << N << " cd=" << cd << " " << to_string(r.rep.status) << (r.cert.pass ? "/cert" : "/nocert")
             << "; ";
      if (N == 25 && cd == 1e-3) keep.car25 = r;
    }
  for (TvMode tv : {TvMode::none(), TvMode::bound(8)}) {
    const DiscretizedOcp d = fishing(20, tv);
    const Minlp& p = d.minlp;
    const Vec x0 = encode_trajectory(d, cia);
    Run r = solve_and_certify(p, x0, Vec::Zero(p.m()), fishing_config());
    pass = pass && certified(r);
    slowest = std::max(slowest, r.secs);
    detail << "fishing " << (tv.kind == TotalVariation::Kind::None ? "none" : "TV<=8") << " "
           << to_string(r.rep.status) << (r.cert.pass ? "/cert" : "/nocert") << " J=" << fmt(r.rep.objective) << "; ";
    if (tv.kind == TotalVariation::Kind::None) {
      keep.fish_none = r;
      keep.fish_none_x0 = x0;
    }
  }
  detail << "slowest " << fmt(slowest) << " s";
  report(4, pass && slowest < 300.0, "ALM certification", detail.str(), seconds_since(t0));
  return keep;
}

void tv_sweep(const Trajectory& cia) {
  const auto t0 = Clock::now();
  std::ostringstream detail;
  bool pass = true;
  for (double U : {12.0, 8.0, 4.0}) {
    const DiscretizedOcp d = fishing(20, TvMode::bound(U));
    const Minlp& p = d.minlp;
    const Run r = solve_and_certify(p, encode_trajectory(d, cia), Vec::Zero(p.m()), fishing_config());
    const double tv = total_variation(extract_trajectory(d, r.rep.x).binaries);
    const bool ok = is_member(p.set_x, r.rep.x, 1e-9) && tv <= U;
    pass = pass && ok;
    detail << "U=" << U << " TV=" << tv << (tv == U ? " (at bound)" : " (below bound)") << " "
           << to_string(r.rep.status) << " J=" << fmt(r.rep.objective) << "; ";
  }
  report(6, pass, "TV bound enforcement", detail.str(), seconds_since(t0));
}

Run dp_warm_start(DpResult& dp) {
  const DiscretizedOcp d = fishing(20, TvMode::none());
  DpGrid g;
  g.state_points = {201, 201};
  g.state_lo = Vec::Constant(2, -1.0);
  g.state_hi = Vec::Constant(2, 4.0);
  dp = dp_solve(*d.spec, d.N, g);
  const Minlp& p = d.minlp;
  return solve_and_certify(p, encode_trajectory(d, dp.traj), Vec::Zero(p.m()), fishing_config());
}

void warm_start(const Certified& c, const Run& from_dp, const DpResult& dp) {
  const auto t0 = Clock::now();
  std::ostringstream detail;
  bool pass = true;
  auto idempotent = [&](const char* name, const Minlp& p, const Run& first) {
    AlmConfig cfg;
    cfg.mu1 = first.rep.mu_final;
    cfg.eps1 = cfg.eps_d;
    const AlmReport again = solve(p, first.rep.x, first.rep.y, cfg);
    // The restart sees the updated multiplier, so the reals may be re-polished; integers must not move.
    const Vec dx = again.x - first.rep.x;
    const double moved = dx.cwiseAbs().maxCoeff();
    const bool same_int = dx(p.set_x.integers).cwiseAbs().maxCoeff() == 0.0;
    const bool ok = certified(first) && again.status == AlmStatus::EpsKktCritical && again.outer_iters == 1 && same_int &&
                    moved <= 1e-4;
    pass = pass && ok;
    detail << name << " restart outer " << again.outer_iters << " moved " << fmt(moved) << (same_int ? " integers kept" : " integers changed") << "; ";
  };
  idempotent("car N=25", car(25, 1e-3).minlp, c.car25);
  idempotent("fishing N=20", fishing(20, TvMode::none()).minlp, c.fish_none);

  const bool no_worse = from_dp.rep.objective <= dp.objective + 1e-9;
  pass = pass && no_worse;
  detail << "DP J=" << fmt(dp.objective) << " -> ALM J=" << fmt(from_dp.rep.objective) << " "
         << to_string(from_dp.rep.status);
  report(7, pass, "warm-start stability", detail.str(), seconds_since(t0));
}

void runtime_scaling() {
  const auto t0 = Clock::now();
  std::vector<double> alm, ref;
  std::ostringstream detail;
  for (Index N : {25, 50, 100}) {
    const DiscretizedOcp d = car(N, 1e-3);
    const Minlp& p = d.minlp;
    std::vector<double> a, r;
    for (int rep = 0; rep < 3; ++rep) {
      const AlmReport s = solve(p, project_l1(p.set_x, Vec::Zero(p.n)), Vec::Zero(p.m()));
      a.push_back(s.total_ms);
      r.push_back(refine_fixed_integers(p, s.x, s.y).total_ms);
    }
    alm.push_back(median(a));
    ref.push_back(median(r));
    detail << "N=" << N << " alm " << fmt(alm.back()) << " ms refine " << fmt(ref.back()) << " ms; ";
  }
  bool pass = true;
  for (std::size_t k = 1; k < alm.size(); ++k) {
    const double ra = alm[k] / alm[k - 1], rr = ref[k] / ref[k - 1];
    pass = pass && ra <= 3.0;
    detail << "ratio " << fmt(ra) << (rr > ra ? " (refine " + fmt(rr) + " higher)" : " (refine " + fmt(rr) + ")") << "; ";
  }
  report(8, pass, "runtime scaling", detail.str(), seconds_since(t0));
}

void cross_method(const Certified& c, const DpResult& dp) {
  const double alm = c.fish_none.rep.objective;
  const double rel = std::abs(alm - dp.objective) / std::abs(dp.objective);
  const bool pass = certified(c.fish_none) && rel <= 0.10;
  report(9, pass, "ALM-from-CIA vs DP",
         "fishing N=20 ALM J=" + fmt(alm) + " DP J=" + fmt(dp.objective) + " rel diff " + fmt(rel), 0.0);
}

}  // namespace

// --known-fail 7,8,9 keeps the listed criteria out of the exit status; their lines still read FAIL.
int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--known-fail") {
      std::istringstream is(argv[i + 1]);
      for (std::string tok; std::getline(is, tok, ',');) known_fail.insert(std::stoi(tok));
    }
  structural();
  milp_oracle();
  derivatives();
  const Trajectory cia = fishing_cia(20);
  const Certified c = certification(cia);
  hysteresis_table();
  tv_sweep(cia);
  DpResult dp;
  const Run from_dp = dp_warm_start(dp);
  warm_start(c, from_dp, dp);
  runtime_scaling();
  cross_method(c, dp);
  std::printf("%d of 9 criteria failed, %d outside the known-failure list\n", failures, blocking);
  return blocking == 0 ? 0 : 1;
}
