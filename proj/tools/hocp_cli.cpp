// hocp: solve, baseline, bench and check front end.
#include <hocp/artifacts.hpp>
#include <hocp/baselines.hpp>
#include <hocp/problems.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace hocp;
using Json = nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SharedFlags {
  std::string problem;
  std::string config_path;
  Index n = 0;
  double drag = -1.0;
  double tv_bound = -1.0;
  double tv_penalty = -1.0;
  std::string warm_start;
  std::string out;
  unsigned long long seed = 0;
  int max_outer = 100;
  std::string flavor = "linf";
  bool restart = false;
  bool adaptive_mu = false;
};

struct Instance {
  std::string problem;
  Json config;
  DiscretizedOcp d;
};

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

Json load_config(const std::string& path) {
  if (path.empty()) return Json::object();
  std::ifstream is(path);
  if (!is) throw UsageError("cannot open config file " + path);
  try {
    Json j;
    is >> j;
    return j;
  } catch (const Json::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
}

Instance build_instance(const std::string& problem, const Json& config) {
  try {
    if (problem == "turbo_car") {
      TurboCarConfig c = config.get<TurboCarConfig>();
      return {problem, Json(c), build_turbo_car(c)};
    }
    if (problem == "fishing") {
      FishingConfig c = config.get<FishingConfig>();
      return {problem, Json(c), build_fishing(c)};
    }
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  throw UsageError("unknown problem '" + problem + "' (expected turbo_car or fishing)");
}

Instance instance_from_flags(const SharedFlags& f) {
  Json cfg = load_config(f.config_path);
  if (f.n > 0) cfg["N"] = f.n;
  if (f.drag >= 0) {
    if (f.problem != "turbo_car") throw UsageError("--drag applies to turbo_car only");
    cfg["c_d"] = f.drag;
  }
  if (f.tv_bound >= 0 && f.tv_penalty >= 0) throw UsageError("--tv-bound and --tv-penalty are exclusive");
  if (f.tv_bound >= 0 || f.tv_penalty >= 0) {
    if (f.problem != "fishing") throw UsageError("TV options apply to fishing only");
    cfg["tv_mode"] = f.tv_bound >= 0 ? Json{{"kind", "bound"}, {"value", f.tv_bound}}
                                     : Json{{"kind", "penalty"}, {"value", f.tv_penalty}};
  }
  return build_instance(f.problem, cfg);
}

AlmConfig alm_config(const SharedFlags& f) {
  AlmConfig c;
  c.max_outer = f.max_outer;
  c.adaptive_mu1 = f.adaptive_mu;
  if (f.flavor == "l1") c.flavor = PolyNorm::L1Real;
  else if (f.flavor != "linf") throw UsageError("--flavor must be linf or l1");
  return c;
}

SolutionRecord read_warm_start(const std::string& path) {
  if (!fs::exists(path)) throw UsageError("missing input artifact " + path);
  try {
    return read_solution(path);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

Vec fit_start(const Instance& inst, Vec x) {
  const MilSet& X = inst.d.minlp.set_x;
  if (x.size() == inst.d.layout.n_core && X.n > x.size()) {
    // start from an instance without the TV gadget: rebuild the extras
    Vec padded = Vec::Zero(X.n);
    padded.head(x.size()) = x;
    x = encode_trajectory(inst.d, extract_trajectory(inst.d, padded));
  }
  if (x.size() != X.n)
    throw UsageError("warm start has " + std::to_string(x.size()) + " entries, instance needs " + std::to_string(X.n));
  return is_member(X, x, 1e-9) ? x : project_l1(X, x);
}

Vec constraint_slack(const Minlp& p, const Vec& x) {
  return p.m() ? project(p.set_c, p.constraints.value(x)) : Vec::Zero(0);
}

SolutionRecord record_for(const Instance& inst, const std::string& status, const Vec& x, const Vec& y) {
  const Minlp& p = inst.d.minlp;
  SolutionRecord r;
  r.status = status;
  r.problem = inst.problem;
  r.config = inst.config;
  r.x = x;
  r.y = y.size() == p.m() ? y : Vec::Zero(p.m());
  r.s = constraint_slack(p, x);
  r.viol_norm = p.m() ? (p.constraints.value(x) - r.s).norm() : 0.0;
  r.objective = p.objective.value(x);
  r.layout_ref = "layout.json";
  return r;
}

SolutionRecord record_for(const Instance& inst, const AlmReport& rep) {
  SolutionRecord r;
  r.status = std::string(to_string(rep.status));
  r.problem = inst.problem;
  r.config = inst.config;
  r.x = rep.x;
  r.y = rep.y;
  r.s = rep.s;
  r.psi = rep.psi_final;
  r.psi_delta = rep.psi_delta;
  r.viol_norm = rep.viol_norm;
  r.objective = rep.objective;
  r.mu_final = rep.mu_final;
  r.counters = counters_json(rep);
  r.layout_ref = "layout.json";
  return r;
}

std::string trajectory_svg(const Instance& inst, const Trajectory& tr) {
  const OcpSpec& s = *inst.d.spec;
  std::vector<PlotSeries> series;
  const std::vector<double> t(tr.t.data(), tr.t.data() + tr.t.size());
  const Index N = tr.controls.rows();
  for (Index i = 0; i < s.nx; ++i) {
    PlotSeries p{s.state_names[i], t, {}, false};
    for (Index k = 0; k <= N; ++k) p.y.push_back(tr.states(k, i));
    series.push_back(p);
  }
  auto piecewise = [&](const Mat& m, const std::vector<std::string>& names) {
    for (Index i = 0; i < m.cols(); ++i) {
      PlotSeries p{names[i], t, {}, true};
      for (Index k = 0; k <= N; ++k) p.y.push_back(m(std::min(k, N - 1), i));
      series.push_back(p);
    }
  };
  piecewise(tr.controls, s.control_names);
  piecewise(tr.binaries, s.binary_names);
  return svg_plot(inst.problem + " trajectory", "t", series);
}

// Writes solution.json, trajectory.csv/.svg and layout.json; returns the list.
std::vector<std::string> write_artifacts(const fs::path& dir, const Instance& inst, const SolutionRecord& rec,
                                         bool round_binaries = true) {
  fs::create_directories(dir);
  write_solution(dir / "solution.json", rec);
  const Trajectory tr = extract_trajectory(inst.d, rec.x, round_binaries);
  std::ostringstream csv;
  write_trajectory_csv(csv, tr);
  write_file_atomic(dir / "trajectory.csv", csv.str());
  write_file_atomic(dir / "trajectory.svg", trajectory_svg(inst, tr));
  std::ostringstream layout;
  write_layout_json(layout, inst.d);
  write_file_atomic(dir / "layout.json", layout.str());
  return {"solution.json", "trajectory.csv", "trajectory.svg", "layout.json"};
}

void write_trace(const fs::path& dir, const AlmReport& rep, std::vector<std::string>& outputs,
                 const std::string& name = "trace.csv") {
  std::ostringstream os;
  write_trace_csv(os, rep);
  write_file_atomic(dir / name, os.str());
  outputs.push_back(name);
}

RunManifest manifest_for(const std::string& command, const SharedFlags& f, const AlmConfig& cfg) {
  RunManifest m;
  m.command = command;
  m.config_path = f.config_path;
  m.seed = f.seed;
  m.solver = alm_config_json(cfg);
  m.git_describe = git_describe();
  return m;
}

void print_report(const AlmReport& rep, const KktCertificate* cert) {
  std::cout << "status " << to_string(rep.status) << "  outer " << rep.outer_iters << "  objective " << rep.objective
            << "  viol " << rep.viol_norm << "  psi " << rep.psi_final << "  time_ms " << rep.total_ms << '\n';
  if (cert)
    std::cout << "certificate " << (cert->pass ? "pass" : "FAIL") << "  in_x " << cert->in_x << "  psi " << cert->psi
              << "  normal_cone " << cert->normal_cone << "  viol " << cert->viol_norm
              << (cert->message.empty() ? "" : "  (" + cert->message + ")") << '\n';
}

int cmd_solve(const SharedFlags& f) {
  const auto t0 = std::chrono::steady_clock::now();
  Instance inst = instance_from_flags(f);
  AlmConfig cfg = alm_config(f);
  const Minlp& p = inst.d.minlp;
  Vec x0 = Vec::Zero(p.n), y0 = Vec::Zero(p.m());
  if (!f.warm_start.empty()) {
    const SolutionRecord ws = read_warm_start(f.warm_start);
    x0 = ws.x;
    if (f.restart && ws.y.size() == p.m()) y0 = ws.y;
    if (f.restart && ws.mu_final > 0) {
      cfg.mu1 = ws.mu_final;
      cfg.adaptive_mu1 = false;
      cfg.eps1 = cfg.eps_d;
    }
  }
  x0 = fit_start(inst, x0);
  const double build_ms = ms_since(t0);

  const AlmReport rep = solve(p, x0, y0, cfg);
  const auto tc = std::chrono::steady_clock::now();
  const KktCertificate cert =
      certify_eps_kkt(p, rep.x, rep.y, rep.s, cfg.eps_p, cfg.eps_d, cfg.flavor, rep.psi_delta, cfg.milp);
  const double cert_ms = ms_since(tc);
  print_report(rep, &cert);

  const fs::path dir = f.out.empty() ? "alm" : f.out;
  std::vector<std::string> outputs = write_artifacts(dir, inst, record_for(inst, rep));
  write_trace(dir, rep, outputs);
  RunManifest m = manifest_for("solve " + f.problem, f, cfg);
  m.timings_ms = {{"build", build_ms}, {"alm", rep.total_ms}, {"certify", cert_ms}, {"total", ms_since(t0)}};
  m.outputs = outputs;
  write_manifest(dir, m);
  return rep.status == AlmStatus::EpsKktCritical && cert.pass ? 0 : 2;
}

struct BaselineFlags {
  std::string kind;
  std::string input;
  Index state_points = 51;
  Index control_points = 21;
  std::string dump;
  std::vector<double> state_lo, state_hi;
};

int cmd_baseline(const SharedFlags& f, const BaselineFlags& b) {
  const auto t0 = std::chrono::steady_clock::now();
  Instance inst = instance_from_flags(f);
  const AlmConfig cfg = alm_config(f);
  const Minlp& p = inst.d.minlp;
  const OcpSpec& spec = *inst.d.spec;
  const fs::path dir = f.out.empty() ? fs::path(b.kind) : fs::path(f.out);
  RunManifest m = manifest_for("baseline " + b.kind + " " + f.problem, f, cfg);
  std::vector<std::string> outputs;
  int code = 0;

  if (b.kind == "dp") {
    if (inst.d.tv.kind != TotalVariation::Kind::None)
      std::cerr << "note: the DP baseline ignores the TV gadget\n";
    DpGrid g;
    g.state_points.assign(spec.nx, b.state_points);
    g.control_points.assign(spec.nu, b.control_points);
    g.dump_path = b.dump;
    if (!b.state_lo.empty()) g.state_lo = Eigen::Map<const Vec>(b.state_lo.data(), static_cast<Index>(b.state_lo.size()));
    if (!b.state_hi.empty()) g.state_hi = Eigen::Map<const Vec>(b.state_hi.data(), static_cast<Index>(b.state_hi.size()));
    const DpResult r = dp_solve(spec, inst.d.N, g);
    std::cout << "dp objective " << r.objective << "  terminal_penalty " << r.terminal_penalty << "  nodes "
              << r.grid_nodes << "  modes " << r.modes << '\n';
    const Vec x = encode_trajectory(inst.d, r.traj);
    outputs = write_artifacts(dir, inst, record_for(inst, "DP", x, Vec()));
    m.solver = {{"state_points", b.state_points}, {"control_points", b.control_points},
                {"terminal_weight", g.terminal_weight}};
    m.timings_ms = {{"dp", ms_since(t0)}};
  } else if (b.kind == "relax") {
    // all-ones initial guess for fishing, all zeros for the car
    const Vec x0 = f.problem == "fishing" ? Vec::Ones(p.n) : Vec::Zero(p.n);
    const RelaxResult r = relax_then_project(p, x0, cfg);
    print_report(r.report, nullptr);
    SolutionRecord rec = record_for(inst, r.report);
    outputs = write_artifacts(dir, inst, rec, false);
    write_trace(dir, r.report, outputs);
    write_solution(dir / "projected.json", record_for(inst, "Projected", r.x_projected, r.report.y));
    outputs.push_back("projected.json");
    m.timings_ms = {{"relax", r.report.total_ms}, {"total", ms_since(t0)}};
    code = r.report.status == AlmStatus::EpsKktCritical ? 0 : 2;
  } else if (b.kind == "cia") {
    const std::string input = b.input.empty() ? "relax/solution.json" : b.input;
    const SolutionRecord relaxed = read_warm_start(input);
    if (relaxed.x.size() != p.n) throw UsageError(input + " does not match the instance layout");
    const Trajectory tr = cia_sur(spec, extract_trajectory(inst.d, relaxed.x, false));
    const Vec x = encode_trajectory(inst.d, tr);
    std::cout << "cia objective " << p.objective.value(x) << "  TV " << total_variation(tr.binaries) << '\n';
    outputs = write_artifacts(dir, inst, record_for(inst, "CIA", x, relaxed.y));
    m.timings_ms = {{"cia", ms_since(t0)}};
  } else if (b.kind == "refine") {
    const std::string input = f.warm_start.empty() ? "alm/solution.json" : f.warm_start;
    const SolutionRecord in = read_warm_start(input);
    const Vec x_in = fit_start(inst, in.x);
    const Vec y_in = in.y.size() == p.m() ? in.y : Vec::Zero(p.m());
    const AlmReport r = refine_fixed_integers(p, x_in, y_in, cfg);
    const Minlp q = with_fixed_integers(p, x_in);
    const KktCertificate cert =
        certify_eps_kkt(q, r.x, r.y, r.s, cfg.eps_p, cfg.eps_d, cfg.flavor, r.psi_delta, cfg.milp);
    print_report(r, &cert);
    std::cout << "input objective " << p.objective.value(x_in) << '\n';
    outputs = write_artifacts(dir, inst, record_for(inst, r));
    write_trace(dir, r, outputs);
    m.timings_ms = {{"refine", r.total_ms}, {"total", ms_since(t0)}};
    code = r.status == AlmStatus::EpsKktCritical && cert.pass ? 0 : 2;
  } else {
    throw UsageError("unknown baseline '" + b.kind + "' (expected dp, cia, relax or refine)");
  }
  m.outputs = outputs;
  write_manifest(dir, m);
  return code;
}

int cmd_bench(const SharedFlags& f, const std::vector<Index>& ns, int reps) {
  if (ns.empty()) throw UsageError("--n-list is empty");
  if (reps < 1) throw UsageError("--reps must be >= 1");
  const AlmConfig cfg = alm_config(f);
  const fs::path dir = f.out.empty() ? "bench" : f.out;
  fs::create_directories(dir);
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  std::ostringstream csv;
  csv << "N,status,alm_ms,refine_ms,outer_iters,objective,refined_objective\n";
  PlotSeries alm_series{"ALM", {}, {}, false}, ref_series{"refinement", {}, {}, false};
  for (Index n : ns) {
    SharedFlags g = f;
    g.n = n;
    const Instance inst = instance_from_flags(g);
    const Minlp& p = inst.d.minlp;
    std::vector<double> alm_ms, ref_ms;
    AlmReport last, last_ref;
    std::string status = "EpsKktCritical";
    for (int r = 0; r < reps; ++r) {
      try {
        const Vec x0 = fit_start(inst, Vec::Zero(p.n));
        last = solve(p, x0, Vec::Zero(p.m()), cfg);
        alm_ms.push_back(last.total_ms);
        if (last.status != AlmStatus::EpsKktCritical) status = std::string(to_string(last.status));
        last_ref = refine_fixed_integers(p, last.x, last.y, cfg);
        ref_ms.push_back(last_ref.total_ms);
      } catch (const std::exception& e) {
        status = std::string("error: ") + e.what();
        break;
      }
    }
    const double am = alm_ms.empty() ? kInf : median(alm_ms);
    const double rm = ref_ms.empty() ? kInf : median(ref_ms);
    std::cout << "N " << n << "  status " << status << "  alm_ms " << am << "  refine_ms " << rm << '\n';
    csv << n << ',' << status << ',' << am << ',' << rm << ',' << last.outer_iters << ',' << last.objective << ','
        << last_ref.objective << '\n';
    alm_series.x.push_back(static_cast<double>(n));
    alm_series.y.push_back(am);
    ref_series.x.push_back(static_cast<double>(n));
    ref_series.y.push_back(rm);
  }
  write_file_atomic(dir / "runtime.csv", csv.str());
  write_file_atomic(dir / "runtime.svg", svg_plot(f.problem + " median wall time [ms]", "N", {alm_series, ref_series}));
  RunManifest m = manifest_for("bench " + f.problem, f, cfg);
  m.outputs = {"runtime.csv", "runtime.svg"};
  write_manifest(dir, m);
  return 0;
}

int cmd_check(const std::string& path, double eps_p, double eps_d, const std::string& flavor) {
  const SolutionRecord rec = read_warm_start(path);
  const Instance inst = build_instance(rec.problem, rec.config);
  const Minlp& p = inst.d.minlp;
  if (rec.x.size() != p.n || rec.y.size() != p.m() || rec.s.size() != p.m())
    throw UsageError(path + ": vector lengths do not match the instance");
  const PolyNorm fl = flavor == "l1" ? PolyNorm::L1Real : PolyNorm::LInfReal;
  const KktCertificate c = certify_eps_kkt(p, rec.x, rec.y, rec.s, eps_p, eps_d, fl, rec.psi_delta);
  std::cout << "in_x " << (c.in_x ? "yes" : "no") << '\n'
            << "psi " << c.psi << (c.psi_exact ? "" : " (node limit)") << '\n'
            << "normal_cone " << c.normal_cone << '\n'
            << "viol_norm " << c.viol_norm << '\n'
            << (c.pass ? "PASS" : "FAIL") << (c.message.empty() ? "" : ": " + c.message) << '\n';
  return c.pass ? 0 : 2;
}

void add_shared(CLI::App* app, SharedFlags& f, bool positional_problem) {
  if (positional_problem)
    app->add_option("problem", f.problem, "turbo_car or fishing")->required();
  else
    app->add_option("--problem", f.problem, "turbo_car or fishing")->required();
  app->add_option("--config", f.config_path, "JSON config file");
  app->add_option("--n", f.n, "number of intervals");
  app->add_option("--drag", f.drag, "drag coefficient (turbo_car)");
  app->add_option("--tv-bound", f.tv_bound, "TV upper bound (fishing)");
  app->add_option("--tv-penalty", f.tv_penalty, "TV penalty weight (fishing)");
  app->add_option("--warm-start", f.warm_start, "solution.json of a previous run");
  app->add_option("--out", f.out, "output directory");
  app->add_option("--seed", f.seed, "recorded in the manifest");
  app->add_option("--max-outer", f.max_outer, "outer iteration limit");
  app->add_option("--flavor", f.flavor, "trust-region norm: linf or l1");
  app->add_flag("--adaptive-mu", f.adaptive_mu, "scale the initial penalty from the start point");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid optimal control by augmented Lagrangian and mixed-integer linearization"};
  app.require_subcommand(1);

  SharedFlags solve_f, base_f, bench_f;
  BaselineFlags base_b;
  std::vector<Index> n_list{25, 50, 100, 200};
  int reps = 3;
  std::string check_path, check_flavor = "linf";
  double eps_p = 1e-6, eps_d = 1e-6;

  CLI::App* solve_cmd = app.add_subcommand("solve", "run ALM and certify the result");
  add_shared(solve_cmd, solve_f, true);
  solve_cmd->add_flag("--restart", solve_f.restart, "resume with the warm start's penalty and tight tolerance");

  CLI::App* base_cmd = app.add_subcommand("baseline", "dp | cia | relax | refine");
  base_cmd->add_option("kind", base_b.kind, "dp, cia, relax or refine")->required();
  add_shared(base_cmd, base_f, false);
  base_cmd->add_option("--input", base_b.input, "relaxed solution for cia (default relax/solution.json)");
  base_cmd->add_option("--grid-states", base_b.state_points, "DP grid points per state");
  base_cmd->add_option("--grid-controls", base_b.control_points, "DP grid points per real control");
  base_cmd->add_option("--dump-values", base_b.dump, "write the DP value table to this file");
  base_cmd->add_option("--state-lo", base_b.state_lo, "DP grid lower corner, one value per state")->delimiter(',');
  base_cmd->add_option("--state-hi", base_b.state_hi, "DP grid upper corner, one value per state")->delimiter(',');

  CLI::App* bench_cmd = app.add_subcommand("bench", "runtime versus N");
  add_shared(bench_cmd, bench_f, false);
  bench_cmd->add_option("--n-list", n_list, "comma separated N values")->delimiter(',');
  bench_cmd->add_option("--reps", reps, "repetitions per N");

  CLI::App* check_cmd = app.add_subcommand("check", "re-certify a solution.json");
  check_cmd->add_option("solution", check_path, "solution.json")->required();
  check_cmd->add_option("--eps-p", eps_p, "primal tolerance");
  check_cmd->add_option("--eps-d", eps_d, "stationarity tolerance");
  check_cmd->add_option("--flavor", check_flavor, "trust-region norm: linf or l1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*solve_cmd) return cmd_solve(solve_f);
    if (*base_cmd) return cmd_baseline(base_f, base_b);
    if (*bench_cmd) return cmd_bench(bench_f, n_list, reps);
    if (*check_cmd) return cmd_check(check_path, eps_p, eps_d, check_flavor);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
