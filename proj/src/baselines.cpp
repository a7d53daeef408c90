#include <hocp/baselines.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <thread>

namespace hocp {

namespace {

struct ProductGrid {
  Index dims = 0;
  std::vector<Index> count, stride;
  Vec lo, hi, h;
  Index total = 1;

  ProductGrid(std::vector<Index> n, Vec l, Vec u) : count(std::move(n)), lo(std::move(l)), hi(std::move(u)) {
    dims = static_cast<Index>(count.size());
    stride.assign(dims, 1);
    h.resize(dims);
    for (Index i = dims - 1; i >= 0; --i) {
      stride[i] = total;
      total *= count[i];
      h[i] = (hi[i] - lo[i]) / static_cast<double>(count[i] - 1);
    }
  }

  Vec point(Index flat) const {
    Vec x(dims);
    for (Index i = 0; i < dims; ++i) {
      const Index c = (flat / stride[i]) % count[i];
      x[i] = c == count[i] - 1 ? hi[i] : lo[i] + c * h[i];
    }
    return x;
  }

  // -1 when x leaves the box
  Index nearest(const Vec& x) const {
    Index flat = 0;
    for (Index i = 0; i < dims; ++i) {
      if (!(x[i] >= lo[i] - 1e-9 && x[i] <= hi[i] + 1e-9)) return -1;
      Index c = h[i] > 0 ? static_cast<Index>(std::llround((x[i] - lo[i]) / h[i])) : 0;
      c = std::clamp<Index>(c, 0, count[i] - 1);
      flat += c * stride[i];
    }
    return flat;
  }
};

int thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("HOCP_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<Vec> binary_modes(const OcpSpec& s) {
  std::vector<Vec> out;
  if (s.nw == 0) {
    out.emplace_back(Vec::Zero(0));
  } else if (s.sos1) {
    for (Index i = 0; i < s.nw; ++i) out.push_back(Vec::Unit(s.nw, i));
  } else {
    if (s.nw > 16) throw std::invalid_argument("dp_solve: too many binary controls to enumerate");
    for (Index mask = 0; mask < (Index{1} << s.nw); ++mask) {
      Vec w(s.nw);
      for (Index i = 0; i < s.nw; ++i) w[i] = (mask >> i) & 1;
      out.push_back(w);
    }
  }
  return out;
}

bool rows_ok(const OcpSpec& s, const Vec& x, const Vec& u, const Vec& w, const Vec& wprev) {
  for (const StageRow& r : s.stage_rows) {
    double a = r.cx.dot(x) + r.cu.dot(u) + r.cw.dot(w) + r.cw_prev.dot(wprev);
    if (a < r.lo - 1e-9 || a > r.hi + 1e-9) return false;
  }
  return true;
}

template <class F>
void parallel_for(Index n, int threads, F&& body) {
  threads = static_cast<int>(std::min<Index>(threads, std::max<Index>(n, 1)));
  if (threads <= 1) {
    body(Index{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  const Index chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const Index a = t * chunk, b = std::min(n, a + chunk);
    if (a < b) pool.emplace_back([&body, a, b] { body(a, b); });
  }
  for (auto& th : pool) th.join();
}

void write_i64(std::ofstream& os, std::int64_t v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); }
void write_f64(std::ofstream& os, double v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); }

}  // namespace

DpResult dp_solve(const OcpSpec& s, Index N, const DpGrid& g) {
  s.validate();
  if (N < 1) throw std::invalid_argument("dp_solve: N must be >= 1");
  const double dt = s.T / static_cast<double>(N);

  std::vector<Index> sp = g.state_points.empty() ? std::vector<Index>(s.nx, 51) : g.state_points;
  std::vector<Index> cp = g.control_points.empty() ? std::vector<Index>(s.nu, 21) : g.control_points;
  if (static_cast<Index>(sp.size()) != s.nx || static_cast<Index>(cp.size()) != s.nu)
    throw std::invalid_argument("dp_solve: grid counts do not match the state/control dimensions");
  for (Index c : sp)
    if (c < 2) throw std::invalid_argument("dp_solve: grid counts must be >= 2");
  for (Index c : cp)
    if (c < 2) throw std::invalid_argument("dp_solve: grid counts must be >= 2");
  const Vec lo = g.state_lo.size() ? g.state_lo : s.x_lo;
  const Vec hi = g.state_hi.size() ? g.state_hi : s.x_hi;
  if (!lo.allFinite() || !hi.allFinite()) throw std::invalid_argument("dp_solve: state bounds must be finite");
  if (!s.u_lo.allFinite() || !s.u_hi.allFinite()) throw std::invalid_argument("dp_solve: control bounds must be finite");

  const ProductGrid X(sp, lo, hi);
  const ProductGrid U(cp, s.u_lo, s.u_hi);
  std::vector<Vec> controls;
  for (Index c = 0; c < U.total; ++c) controls.push_back(s.nu ? U.point(c) : Vec::Zero(0));
  const std::vector<Vec> modes = binary_modes(s);

  bool coupled = false;
  for (const StageRow& r : s.stage_rows) coupled = coupled || r.cw_prev.squaredNorm() > 0;
  const Index nm = coupled ? static_cast<Index>(modes.size()) : 1;
  const Vec w_init = s.w_prev_init.size() ? s.w_prev_init : Vec::Zero(s.nw);
  auto mode_index = [&](const Vec& w) -> Index {
    if (!coupled) return 0;
    for (Index m = 0; m < nm; ++m)
      if ((modes[m] - w).cwiseAbs().maxCoeff() < 0.5) return m;
    throw std::invalid_argument("dp_solve: initial binary state is not an enumerated mode");
  };
  auto prev_of = [&](Index m) -> const Vec& { return coupled ? modes[m] : w_init; };

  auto terminal = [&](const Vec& x) {
    double pen = 0.0;
    if (!s.terminal.empty())
      for (Index i = 0; i < s.nx; ++i)
        if (s.terminal[i]) pen += (x[i] - *s.terminal[i]) * (x[i] - *s.terminal[i]);
    return g.terminal_weight * pen;
  };

  const Index nodes = X.total;
  std::vector<std::vector<double>> V(N + 1, std::vector<double>(nodes * nm, kInf));
  for (Index q = 0; q < nodes; ++q) {
    const double t = terminal(X.point(q));
    for (Index m = 0; m < nm; ++m) V[N][q * nm + m] = t;
  }

  const int threads = thread_count(g.threads);
  for (Index k = N - 1; k >= 0; --k) {
    const double tk = k * dt;
    const std::vector<double>& next = V[k + 1];
    std::vector<double>& cur = V[k];
    parallel_for(nodes, threads, [&](Index a, Index b) {
      for (Index q = a; q < b; ++q) {
        const Vec x = X.point(q);
        for (std::size_t wi = 0; wi < modes.size(); ++wi) {
          const Vec& w = modes[wi];
          const Index m_next = coupled ? static_cast<Index>(wi) : 0;
          for (const Vec& u : controls) {
            const Index qn = X.nearest(x + dt * s.dynamics(tk, x, u, w));
            if (qn < 0) continue;
            const double tail = next[qn * nm + m_next];
            if (!std::isfinite(tail)) continue;
            const double val = dt * s.stage_cost(tk, x, u, w) + tail;
            for (Index m = 0; m < nm; ++m) {
              double& best = cur[q * nm + m];
              if (val < best && rows_ok(s, x, u, w, prev_of(m))) best = val;
            }
          }
        }
      }
    });
  }

  if (!g.dump_path.empty()) {
    std::ofstream os(g.dump_path, std::ios::binary);
    if (!os) throw std::runtime_error("dp_solve: cannot write " + g.dump_path);
    os.write("HOCPDPV1", 8);
    write_i64(os, N);
    write_i64(os, s.nx);
    write_i64(os, nm);
    for (Index c : sp) write_i64(os, c);
    for (Index i = 0; i < s.nx; ++i) write_f64(os, lo[i]);
    for (Index i = 0; i < s.nx; ++i) write_f64(os, hi[i]);
    for (const auto& layer : V) os.write(reinterpret_cast<const char*>(layer.data()), layer.size() * sizeof(double));
  }

  DpResult res;
  res.grid_nodes = nodes;
  res.modes = nm;
  Mat uc(N, s.nu), wb(N, s.nw);
  Vec x = s.x_init;
  Index m = mode_index(w_init);
  {
    const Index q0 = X.nearest(x);
    res.value = q0 < 0 ? kInf : V[0][q0 * nm + m];
  }
  for (Index k = 0; k < N; ++k) {
    const double tk = k * dt;
    double best = kInf;
    Index best_u = -1, best_w = -1;
    for (std::size_t wi = 0; wi < modes.size(); ++wi) {
      const Vec& w = modes[wi];
      const Index m_next = coupled ? static_cast<Index>(wi) : 0;
      for (std::size_t ui = 0; ui < controls.size(); ++ui) {
        const Vec& u = controls[ui];
        if (!rows_ok(s, x, u, w, prev_of(m))) continue;
        const Index qn = X.nearest(x + dt * s.dynamics(tk, x, u, w));
        if (qn < 0) continue;
        const double val = dt * s.stage_cost(tk, x, u, w) + V[k + 1][qn * nm + m_next];
        if (val < best) {
          best = val;
          best_u = static_cast<Index>(ui);
          best_w = static_cast<Index>(wi);
        }
      }
    }
    if (best_u < 0 || !std::isfinite(best))
      throw std::runtime_error("dp_solve: no admissible action at stage " + std::to_string(k));
    uc.row(k) = controls[best_u].transpose();
    wb.row(k) = modes[best_w].transpose();
    x = x + dt * s.dynamics(tk, x, controls[best_u], modes[best_w]);
    m = coupled ? best_w : 0;
  }
  res.traj = simulate(s, N, uc, wb);
  res.objective = trajectory_cost(s, res.traj);
  res.terminal_penalty = terminal(res.traj.states.row(N).transpose());
  return res;
}

Mat cia_sur(const Mat& alpha_in, double dt) {
  const Index N = alpha_in.rows(), nw = alpha_in.cols();
  Mat alpha = alpha_in;
  bool warned = false;
  for (Index k = 0; k < N; ++k) {
    const double sum = alpha.row(k).sum();
    const bool off = (alpha.row(k).array() < -1e-6).any() || (alpha.row(k).array() > 1 + 1e-6).any() ||
                     std::abs(sum - 1.0) > 1e-6;
    if (!off) continue;
    if (!warned) std::cerr << "cia_sur: input off the simplex at stage " << k << ", renormalizing\n";
    warned = true;
    alpha.row(k) = alpha.row(k).cwiseMax(0.0);
    const double s = alpha.row(k).sum();
    if (s > 0) alpha.row(k) /= s;
    else alpha.row(k).setConstant(1.0 / static_cast<double>(nw));
  }
  Mat w = Mat::Zero(N, nw);
  Vec theta = Vec::Zero(nw);
  for (Index k = 0; k < N; ++k) {
    theta += dt * alpha.row(k).transpose();
    Index pick = 0;
    for (Index i = 1; i < nw; ++i)
      if (theta[i] > theta[pick] + 1e-12) pick = i;
    w(k, pick) = 1.0;
    theta[pick] -= dt;
  }
  return w;
}

Trajectory cia_sur(const OcpSpec& spec, const Trajectory& relaxed) {
  const Index N = relaxed.controls.rows();
  const double dt = spec.T / static_cast<double>(N);
  if (spec.sos1) return simulate(spec, N, relaxed.controls, cia_sur(relaxed.binaries, dt));
  // independent binaries: each one is a two-mode choice {1 - w, w}
  Mat w(N, spec.nw);
  for (Index i = 0; i < spec.nw; ++i) {
    Mat alpha(N, 2);
    alpha.col(1) = relaxed.binaries.col(i).cwiseMax(0.0).cwiseMin(1.0);
    alpha.col(0) = 1.0 - alpha.col(1).array();
    w.col(i) = cia_sur(alpha, dt).col(1);
  }
  return simulate(spec, N, relaxed.controls, w);
}

RelaxResult relax_then_project(const Minlp& p, const Vec& x0, const AlmConfig& cfg) {
  Minlp r = p;
  r.set_x = relax_integrality(p.set_x);
  const Vec start = is_member(r.set_x, x0) ? x0 : project_l1(r.set_x, x0, cfg.milp);
  RelaxResult out;
  out.report = solve(r, start, Vec::Zero(p.m()), cfg);
  out.x_relaxed = out.report.x;
  out.x_projected = project_l1(p.set_x, out.x_relaxed, cfg.milp);
  return out;
}

Minlp with_fixed_integers(const Minlp& p, const Vec& x) {
  Minlp q = p;
  q.set_x = fix_integers(p.set_x, x);
  return q;
}

AlmReport refine_fixed_integers(const Minlp& p, const Vec& x_in, const Vec& y0, const AlmConfig& cfg) {
  const Minlp q = with_fixed_integers(p, x_in);
  Vec start = x_in;
  for (Index j : p.set_x.integers) start[j] = std::round(start[j]);
  if (!is_member(q.set_x, start, 1e-7)) start = project_l1(q.set_x, start, cfg.milp);

  AlmReport r = solve(q, start, y0, cfg);

  const double f_in = p.objective.value(start);
  const Vec c_in = p.m() ? p.constraints.value(start) : Vec::Zero(0);
  const Vec s_in = project(p.set_c, c_in);
  const double viol_in = (c_in - s_in).norm();
  if (r.objective > f_in && viol_in <= cfg.eps_p) {
    const KktCertificate cert = certify_eps_kkt(q, start, r.y, s_in, cfg.eps_p, cfg.eps_d, cfg.flavor, 1.0, cfg.milp);
    r.x = start;
    r.s = s_in;
    r.v = c_in - s_in;
    r.viol_norm = viol_in;
    r.objective = f_in;
    r.psi_final = cert.psi;
    r.psi_delta = 1.0;
    if (!cert.pass && r.status == AlmStatus::EpsKktCritical) r.status = AlmStatus::MaxOuterIter;
    else if (cert.pass) r.status = AlmStatus::EpsKktCritical;
  }
  return r;
}

}  // namespace hocp
