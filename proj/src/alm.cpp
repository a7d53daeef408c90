#include <hocp/alm.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace hocp {

void AlmConfig::validate() const {
  auto in01 = [](double v) { return v > 0.0 && v < 1.0; };
  if (!(mu1 > 0 && eps1 > 0 && eps_p > 0 && eps_d > 0 && y_bound > 0 && max_outer > 0))
    throw std::invalid_argument("AlmConfig: parameters must be strictly positive");
  if (!in01(kappa_mu) || !in01(theta_mu) || !in01(kappa_eps))
    throw std::invalid_argument("AlmConfig: kappa_mu, theta_mu, kappa_eps must lie in (0,1)");
  inner.validate();
}

std::string_view to_string(AlmStatus s) {
  switch (s) {
    case AlmStatus::EpsKktCritical: return "EpsKktCritical";
    case AlmStatus::MaxOuterIter: return "MaxOuterIter";
    case AlmStatus::InnerFailure: return "InnerFailure";
  }
  return "?";
}

namespace {

Vec constraint_value(const Minlp& p, const Vec& x) {
  return p.m() > 0 ? p.constraints.value(x) : Vec::Zero(0);
}

Vec jt_times(const SparseMat& J, const Vec& y) { return J.transpose() * y; }

double al_value_impl(Evaluator& ev, const BoxSet& C, const Vec& x, const Vec& yhat, double mu) {
  const double f = ev.f(x);
  if (C.dim() == 0) return f;
  const Vec shifted = ev.c(x) + mu * yhat;
  return f + dist2(C, shifted) / (2.0 * mu) - 0.5 * mu * yhat.squaredNorm();
}

Vec al_gradient_impl(Evaluator& ev, const BoxSet& C, const Vec& x, const Vec& yhat, double mu) {
  Vec g = ev.grad(x);
  if (C.dim() == 0) return g;
  const Vec c = ev.c(x);
  const Vec s = project(C, c + mu * yhat);
  const Vec y = yhat + (c - s) / mu;
  g += jt_times(ev.jac(x), y);
  return g;
}

double adaptive_mu1(Evaluator& ev, const BoxSet& C, const Vec& x0, double fallback) {
  if (C.dim() == 0) return fallback;
  const double f = std::abs(ev.f(x0));
  const double infeas = 0.5 * dist2(C, ev.c(x0));
  const double rho = std::clamp(10.0 * std::max(1.0, f) / std::max(1.0, infeas), 1e-8, 1e8);
  return 1.0 / rho;
}

}  // namespace

double al_value(const Minlp& p, const Vec& x, const Vec& yhat, double mu) {
  if (mu <= 0.0) throw std::invalid_argument("al_value: mu must be positive");
  Evaluator ev(p);
  return al_value_impl(ev, p.set_c, x, yhat, mu);
}

MultiplierMaps multiplier_maps(const Minlp& p, const Vec& x, const Vec& yhat, double mu) {
  if (mu <= 0.0) throw std::invalid_argument("multiplier_maps: mu must be positive");
  const Vec c = constraint_value(p, x);
  MultiplierMaps out;
  out.s = project(p.set_c, c + mu * yhat);
  out.y = yhat + (c - out.s) / mu;
  return out;
}

Vec al_gradient(const Minlp& p, const Vec& x, const Vec& yhat, double mu) {
  if (mu <= 0.0) throw std::invalid_argument("al_gradient: mu must be positive");
  Evaluator ev(p);
  return al_gradient_impl(ev, p.set_c, x, yhat, mu);
}

SparseMat al_hessian_pattern(const Minlp& p, const Vec& x) {
  if (p.objective.hessian_pattern.size() == 0) return SparseMat();
  SparseMat P = p.objective.hessian_pattern.cwiseAbs();
  if (p.m() > 0) {
    const SparseMat J = p.constraints.jacobian(x).cwiseAbs();
    P = P + SparseMat(J.transpose() * J);
  }
  for (Index i = 0; i < P.outerSize(); ++i)
    for (SparseMat::InnerIterator it(P, i); it; ++it) it.valueRef() = 1.0;
  return P;
}

Vec lagrangian_gradient(const Minlp& p, const Vec& x, const Vec& y) {
  Vec g = p.objective.gradient(x);
  if (p.m() > 0) g += jt_times(p.constraints.jacobian(x), y);
  return g;
}

AlmReport solve(const Minlp& p, const Vec& x0, const Vec& y0, const AlmConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  cfg.validate();
  if (x0.size() != p.n) throw std::invalid_argument("alm::solve: x0 has wrong dimension");
  if (!is_member(p.set_x, x0, 1e-7))
    throw std::invalid_argument("alm::solve: x0 is not in X (project it first)");
  const Index m = p.m();
  const auto t_start = Clock::now();

  Evaluator ev(p);
  const BoxSet& C = p.set_c;
  AlmReport rep;
  Vec x = x0;
  Vec y = (y0.size() == m) ? y0 : Vec::Zero(m);
  double mu = cfg.adaptive_mu1 ? adaptive_mu1(ev, C, x0, cfg.mu1) : cfg.mu1;
  // Without nonlinear constraints a single inner solve at eps_d decides.
  double eps = m == 0 ? cfg.eps_d : cfg.eps1;
  double prev_viol = kInf;
  int failures = 0;
  rep.status = AlmStatus::MaxOuterIter;
  const SparseMat pattern = al_hessian_pattern(p, x0);

  for (int j = 1; j <= cfg.max_outer; ++j) {
    const auto t0 = Clock::now();
    const Vec yhat = y.cwiseMax(-cfg.y_bound).cwiseMin(cfg.y_bound);

    SmoothFunction phi{
        [&](const Vec& z) { return al_value_impl(ev, C, z, yhat, mu); },
        [&](const Vec& z) { return al_gradient_impl(ev, C, z, yhat, mu); }, pattern};
    const InnerResult inner = minimize(phi, p.set_x, x, eps, cfg.inner, cfg.flavor, cfg.milp);
    x = inner.x;

    const Vec c = ev.c(x);
    const Vec s = project(C, c + mu * yhat);
    const Vec v = c - s;
    y = yhat + v / mu;
    const double viol = v.norm();

    rep.outer_iters = j;
    rep.node_limit_hits += inner.inexact_psi;
    rep.x = x;
    rep.y = y;
    rep.s = s;
    rep.v = v;
    rep.viol_norm = viol;
    rep.psi_final = inner.psi;
    rep.psi_delta = inner.delta_check;
    rep.mu_final = mu;
    rep.trace.push_back({j, mu, eps, viol, inner.psi, inner.iterations, inner.milp_nodes,
                         std::chrono::duration<double, std::milli>(Clock::now() - t0).count(),
                         inner.certified});

    failures = inner.inexact_psi > 0 ? failures + 1 : 0;
    if (inner.certified && eps <= cfg.eps_d && viol <= cfg.eps_p) {
      rep.status = AlmStatus::EpsKktCritical;
      break;
    }
    if (failures >= cfg.max_inner_failures) {
      rep.status = AlmStatus::InnerFailure;
      break;
    }
    if (!(j == 1 || viol <= std::max(cfg.eps_p, cfg.theta_mu * prev_viol))) mu *= cfg.kappa_mu;
    eps = std::max(cfg.eps_d, cfg.kappa_eps * eps);
    prev_viol = viol;
  }

  rep.objective = ev.f(rep.x);
  rep.counters = ev.counters();
  rep.total_ms = std::chrono::duration<double, std::milli>(Clock::now() - t_start).count();
  return rep;
}

KktCertificate certify_eps_kkt(const Minlp& p, const Vec& x, const Vec& y, const Vec& s,
                               double eps_p, double eps_d, PolyNorm flavor, double delta,
                               const MilpOptions& milp) {
  KktCertificate cert;
  if (x.size() != p.n || y.size() != p.m() || s.size() != p.m()) {
    cert.message = "dimension mismatch";
    return cert;
  }
  cert.in_x = is_member(p.set_x, x, 1e-7);
  if (!cert.in_x) {
    cert.message = "not in X";
    return cert;
  }
  Vec xr = x;
  for (Index j : p.set_x.integers) xr[j] = std::round(xr[j]);

  const Vec g = lagrangian_gradient(p, xr, y);
  MilpOptions mo = milp;
  mo.gap_tol = std::min(mo.gap_tol, 1e-3 * eps_d);
  const Criticality crit = criticality_measure(p.set_x, g, xr, delta, flavor, mo);
  cert.psi = crit.psi;
  cert.psi_exact = crit.exact;
  cert.normal_cone = normal_cone_residual(p.set_c, s, y);
  cert.viol_norm = (constraint_value(p, xr) - s).norm();

  std::string msg;
  if (!(cert.psi <= eps_d)) msg += "criticality Psi exceeds eps_d; ";
  if (!crit.exact) msg += "Psi inexact (node limit); ";
  if (!(cert.normal_cone <= 1e-9)) msg += "y not in N_C(s); ";
  if (!(cert.viol_norm <= eps_p)) msg += "constraint violation exceeds eps_p; ";
  cert.pass = msg.empty();
  cert.message = cert.pass ? "eps-KKT-critical" : msg;
  return cert;
}

void write_trace_csv(std::ostream& os, const AlmReport& r) {
  os << "j,mu,eps_j,viol_norm,psi,inner_iters,milp_nodes,time_ms\n";
  os.precision(17);
  for (const auto& it : r.trace)
    os << it.j << ',' << it.mu << ',' << it.eps << ',' << it.viol_norm << ',' << it.psi << ','
       << it.inner_iters << ',' << it.milp_nodes << ',' << it.time_ms << '\n';
}

}  // namespace hocp
