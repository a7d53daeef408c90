#include <hocp/transcription.hpp>

#include <json.hpp>

#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace hocp {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("OcpSpec: " + what);
}

bool sized(const Vec& v, Index n) { return v.size() == n; }

// Stage slices of the flat vector.
struct StageView {
  const Layout& L;
  const Vec& x;
  Vec state(Index k) const { return x.segment(L.state(k, 0), L.nx); }
  Vec control(Index k) const { return x.segment(L.control(k, 0), L.nu); }
  Vec binary(Index k) const { return x.segment(L.binary(k, 0), L.nw); }
};

std::vector<Index> nonlinear_components(const OcpSpec& s) {
  std::vector<Index> out;
  for (Index i = 0; i < s.nx; ++i)
    if (s.affine.empty() || !s.affine[i]) out.push_back(i);
  return out;
}

}  // namespace

void OcpSpec::validate() const {
  require(nx > 0, "nx must be positive");
  require(nu >= 0 && nw >= 0, "negative control dimension");
  require(T > 0, "horizon must be positive");
  require(static_cast<bool>(dynamics) && static_cast<bool>(dynamics_jacobian), "dynamics callbacks missing");
  require(static_cast<bool>(stage_cost) && static_cast<bool>(stage_cost_gradient), "stage cost callbacks missing");
  require(affine.empty() || static_cast<Index>(affine.size()) == nx, "affine has wrong length");
  for (const auto& a : affine)
    if (a) require(sized(a->ax, nx) && sized(a->au, nu) && sized(a->aw, nw), "affine coefficient length");
  require(sized(x_init, nx), "x_init has wrong length");
  require(terminal.empty() || static_cast<Index>(terminal.size()) == nx, "terminal has wrong length");
  require(sized(x_lo, nx) && sized(x_hi, nx), "state bounds have wrong length");
  require(sized(u_lo, nu) && sized(u_hi, nu), "control bounds have wrong length");
  require((x_lo.array() <= x_hi.array()).all(), "state lower bound exceeds upper bound");
  require((u_lo.array() <= u_hi.array()).all(), "control lower bound exceeds upper bound");
  for (const auto& r : stage_rows)
    require(sized(r.cx, nx) && sized(r.cu, nu) && sized(r.cw, nw) && sized(r.cw_prev, nw) && r.lo <= r.hi,
            "malformed stage row");
  require(w_prev_init.size() == 0 || sized(w_prev_init, nw), "w_prev_init has wrong length");
  require(!sos1 || nw > 0, "sos1 requires binary controls");
}

std::vector<std::string> DiscretizedOcp::names() const {
  const OcpSpec& s = *spec;
  auto nm = [](const std::vector<std::string>& v, Index i, const char* fallback) {
    return i < static_cast<Index>(v.size()) ? v[i] : fallback + std::to_string(i);
  };
  std::vector<std::string> out(layout.size());
  for (Index k = 0; k <= N; ++k) {
    const std::string tag = "[" + std::to_string(k) + "]";
    for (Index i = 0; i < s.nx; ++i) out[layout.state(k, i)] = nm(s.state_names, i, "x") + tag;
    if (k == N) break;
    for (Index i = 0; i < s.nu; ++i) out[layout.control(k, i)] = nm(s.control_names, i, "u") + tag;
    for (Index i = 0; i < s.nw; ++i) out[layout.binary(k, i)] = nm(s.binary_names, i, "w") + tag;
  }
  for (std::size_t e = 0; e < layout.extra_names.size(); ++e) out[layout.n_core + e] = layout.extra_names[e];
  return out;
}

DiscretizedOcp discretize_euler(const OcpSpec& spec_in, Index N) {
  spec_in.validate();
  if (N < 1) throw std::invalid_argument("discretize_euler: N must be >= 1");

  auto spec = std::make_shared<const OcpSpec>(spec_in);
  const OcpSpec& s = *spec;
  DiscretizedOcp d;
  d.spec = spec;
  d.N = N;
  d.dt = s.T / static_cast<double>(N);
  d.layout = Layout{N, s.nx, s.nu, s.nw, N * (s.nx + s.nu + s.nw) + s.nx, {}};
  const Layout L = d.layout;
  const double dt = d.dt;
  const Index n = L.size();

  MilSetBuilder b;
  for (Index j = 0; j < n; ++j) b.add_variable(-kInf, kInf);
  for (Index k = 0; k <= N; ++k) {
    for (Index i = 0; i < s.nx; ++i) b.set_bounds(L.state(k, i), s.x_lo[i], s.x_hi[i]);
    if (k == N) break;
    for (Index i = 0; i < s.nu; ++i) b.set_bounds(L.control(k, i), s.u_lo[i], s.u_hi[i]);
    for (Index i = 0; i < s.nw; ++i) {
      b.set_bounds(L.binary(k, i), 0.0, 1.0);
      b.set_integer(L.binary(k, i));
    }
  }
  for (Index i = 0; i < s.nx; ++i) b.set_bounds(L.state(0, i), s.x_init[i], s.x_init[i]);
  if (!s.terminal.empty())
    for (Index i = 0; i < s.nx; ++i)
      if (s.terminal[i]) b.set_bounds(L.state(N, i), *s.terminal[i], *s.terminal[i]);

  // Affine dynamics: x_{k+1,i} - x_{k,i} - dt (a·z_k) = dt * constant.
  for (Index i = 0; i < s.nx; ++i) {
    if (s.affine.empty() || !s.affine[i]) continue;
    const AffineDynamics& a = *s.affine[i];
    for (Index k = 0; k < N; ++k) {
      MilSetBuilder::Terms t;
      t.emplace_back(L.state(k + 1, i), 1.0);
      for (Index j = 0; j < s.nx; ++j) {
        double coef = -dt * a.ax[j] - (j == i ? 1.0 : 0.0);
        if (coef != 0.0) t.emplace_back(L.state(k, j), coef);
      }
      for (Index j = 0; j < s.nu; ++j)
        if (a.au[j] != 0.0) t.emplace_back(L.control(k, j), -dt * a.au[j]);
      for (Index j = 0; j < s.nw; ++j)
        if (a.aw[j] != 0.0) t.emplace_back(L.binary(k, j), -dt * a.aw[j]);
      b.add_eq(t, dt * a.constant);
      ++d.dynamics_rows_in_x;
    }
  }

  for (Index k = 0; k < N; ++k) {
    for (const StageRow& r : s.stage_rows) {
      MilSetBuilder::Terms t;
      double shift = 0.0;
      for (Index j = 0; j < s.nx; ++j)
        if (r.cx[j] != 0.0) t.emplace_back(L.state(k, j), r.cx[j]);
      for (Index j = 0; j < s.nu; ++j)
        if (r.cu[j] != 0.0) t.emplace_back(L.control(k, j), r.cu[j]);
      for (Index j = 0; j < s.nw; ++j) {
        if (r.cw[j] != 0.0) t.emplace_back(L.binary(k, j), r.cw[j]);
        if (r.cw_prev[j] == 0.0) continue;
        if (k > 0) {
          t.emplace_back(L.binary(k - 1, j), r.cw_prev[j]);
        } else {
          const double w = s.w_prev_init.size() ? s.w_prev_init[j] : 0.0;
          shift += r.cw_prev[j] * w;
        }
      }
      b.add_row(t, r.lo - shift, r.hi - shift);
    }
    if (s.sos1) {
      MilSetBuilder::Terms t;
      for (Index j = 0; j < s.nw; ++j) t.emplace_back(L.binary(k, j), 1.0);
      b.add_eq(t, 1.0);
    }
  }

  const std::vector<Index> comps = nonlinear_components(s);
  const Index nc = static_cast<Index>(comps.size());
  d.nonlinear_rows = nc * N;
  d.linear_cost = Vec::Zero(n);

  Minlp& p = d.minlp;
  p.n = n;
  p.set_x = b.build();
  p.set_c = BoxSet::zeros(nc * N);

  p.objective.value = [spec, L, dt](const Vec& x) {
    StageView v{L, x};
    double f = 0.0;
    for (Index k = 0; k < L.N; ++k)
      f += spec->stage_cost(k * dt, v.state(k), v.control(k), v.binary(k));
    return dt * f;
  };
  p.objective.gradient = [spec, L, dt](const Vec& x) {
    StageView v{L, x};
    Vec g = Vec::Zero(L.size());
    for (Index k = 0; k < L.N; ++k) {
      const StageCostGradient sg = spec->stage_cost_gradient(k * dt, v.state(k), v.control(k), v.binary(k));
      g.segment(L.state(k, 0), L.nx) += dt * sg.gx;
      if (L.nu) g.segment(L.control(k, 0), L.nu) += dt * sg.gu;
      if (L.nw) g.segment(L.binary(k, 0), L.nw) += dt * sg.gw;
    }
    return g;
  };
  {
    std::vector<Triplet> t;
    const Index w = L.nx + L.nu + L.nw;
    for (Index k = 0; k < N; ++k)
      for (Index a = 0; a < w; ++a)
        for (Index c = 0; c < w; ++c) t.emplace_back(k * L.stride() + a, k * L.stride() + c, 1.0);
    p.objective.hessian_pattern.resize(n, n);
    p.objective.hessian_pattern.setFromTriplets(t.begin(), t.end());
  }

  p.constraints.m = nc * N;
  p.constraints.value = [spec, L, dt, comps](const Vec& x) {
    StageView v{L, x};
    const Index nc = static_cast<Index>(comps.size());
    Vec c(nc * L.N);
    for (Index k = 0; k < L.N; ++k) {
      const Vec xk = v.state(k);
      const Vec f = spec->dynamics(k * dt, xk, v.control(k), v.binary(k));
      for (Index r = 0; r < nc; ++r) {
        const Index i = comps[r];
        c[k * nc + r] = x[L.state(k + 1, i)] - xk[i] - dt * f[i];
      }
    }
    return c;
  };
  p.constraints.jacobian = [spec, L, dt, comps](const Vec& x) {
    StageView v{L, x};
    const Index nc = static_cast<Index>(comps.size());
    std::vector<Triplet> t;
    t.reserve(nc * L.N * (2 + L.stride()));
    for (Index k = 0; k < L.N; ++k) {
      const DynamicsJacobian J = spec->dynamics_jacobian(k * dt, v.state(k), v.control(k), v.binary(k));
      for (Index r = 0; r < nc; ++r) {
        const Index i = comps[r], row = k * nc + r;
        t.emplace_back(row, L.state(k + 1, i), 1.0);
        for (Index j = 0; j < L.nx; ++j)
          t.emplace_back(row, L.state(k, j), -dt * J.fx(i, j) - (i == j ? 1.0 : 0.0));
        for (Index j = 0; j < L.nu; ++j) t.emplace_back(row, L.control(k, j), -dt * J.fu(i, j));
        for (Index j = 0; j < L.nw; ++j) t.emplace_back(row, L.binary(k, j), -dt * J.fw(i, j));
      }
    }
    SparseMat M(nc * L.N, L.size());
    M.setFromTriplets(t.begin(), t.end());
    return M;
  };
  p.names = d.names();
  return d;
}

DiscretizedOcp add_total_variation(const DiscretizedOcp& base, TvMode mode) {
  using Kind = TotalVariation::Kind;
  if (mode.kind == Kind::None) return base;
  if (base.tv.kind != Kind::None) throw std::invalid_argument("add_total_variation: gadget already present");
  if (!(mode.value >= 0.0) || !std::isfinite(mode.value))
    throw std::invalid_argument(mode.kind == Kind::Bound ? "add_total_variation: U_TV must be nonnegative"
                                                         : "add_total_variation: alpha_TV must be nonnegative");

  DiscretizedOcp d = base;
  const Layout& L0 = base.layout;
  const Index N = base.N, nw = L0.nw, n0 = L0.size();
  const Index per = std::max<Index>(N - 1, 0);

  MilSetBuilder b(base.minlp.set_x);
  d.tv.kind = mode.kind;
  d.tv.value = mode.value;
  d.tv.first = n0;
  const std::vector<std::string> bn = base.spec->binary_names;
  for (Index i = 0; i < nw; ++i) {
    for (Index k = 0; k < per; ++k) {
      const Index t = b.add_variable(0.0, 1.0);
      const std::string wn = i < static_cast<Index>(bn.size()) ? bn[i] : "w" + std::to_string(i);
      d.layout.extra_names.push_back("tv_" + wn + "[" + std::to_string(k) + "]");
      const Index a = L0.binary(k, i), c = L0.binary(k + 1, i);
      // t >= |w_{k+1} - w_k| and t <= min(w_k + w_{k+1}, 2 - w_k - w_{k+1})
      b.add_ge({{t, 1.0}, {c, -1.0}, {a, 1.0}}, 0.0);
      b.add_ge({{t, 1.0}, {c, 1.0}, {a, -1.0}}, 0.0);
      b.add_le({{t, 1.0}, {c, -1.0}, {a, -1.0}}, 0.0);
      b.add_le({{t, 1.0}, {c, 1.0}, {a, 1.0}}, 2.0);
    }
  }
  const Index n = d.layout.size();
  if (mode.kind == Kind::Bound) {
    MilSetBuilder::Terms all;
    for (Index j = n0; j < n; ++j) all.emplace_back(j, 0.5);
    d.tv.bound_row = b.add_le(all, mode.value);
  }

  d.linear_cost = Vec::Zero(n);
  d.linear_cost.head(n0) = base.linear_cost;
  if (mode.kind == Kind::Penalty) d.linear_cost.tail(n - n0).setConstant(0.5 * mode.value);

  Minlp& p = d.minlp;
  const Minlp inner = base.minlp;
  const Vec lc = d.linear_cost;
  p.n = n;
  p.set_x = b.build();
  p.objective.value = [inner, lc, n0](const Vec& x) { return inner.objective.value(x.head(n0)) + lc.dot(x); };
  p.objective.gradient = [inner, lc, n0](const Vec& x) {
    Vec g = lc;
    g.head(n0) += inner.objective.gradient(x.head(n0));
    return g;
  };
  if (inner.objective.hessian_pattern.size() > 0) {
    p.objective.hessian_pattern = inner.objective.hessian_pattern;
    p.objective.hessian_pattern.conservativeResize(n, n);
  }
  p.constraints.value = [inner, n0](const Vec& x) { return inner.constraints.value(x.head(n0)); };
  p.constraints.jacobian = [inner, n0, n](const Vec& x) {
    SparseMat J = inner.constraints.jacobian(x.head(n0));
    J.conservativeResize(J.rows(), n);
    return J;
  };
  p.names = d.names();
  return d;
}

Trajectory extract_trajectory(const DiscretizedOcp& d, const Vec& x, bool round_binaries) {
  const Layout& L = d.layout;
  if (x.size() != L.size()) throw std::invalid_argument("extract_trajectory: wrong vector length");
  Trajectory tr;
  tr.t = Vec::LinSpaced(d.N + 1, 0.0, d.spec->T);
  tr.states.resize(d.N + 1, L.nx);
  tr.controls.resize(d.N, L.nu);
  tr.binaries.resize(d.N, L.nw);
  for (Index k = 0; k <= d.N; ++k) {
    for (Index i = 0; i < L.nx; ++i) tr.states(k, i) = x[L.state(k, i)];
    if (k == d.N) break;
    for (Index i = 0; i < L.nu; ++i) tr.controls(k, i) = x[L.control(k, i)];
    for (Index i = 0; i < L.nw; ++i) tr.binaries(k, i) = round_binaries ? std::round(x[L.binary(k, i)]) : x[L.binary(k, i)];
  }
  return tr;
}

Vec encode_trajectory(const DiscretizedOcp& d, const Trajectory& tr) {
  const Layout& L = d.layout;
  if (tr.states.rows() != d.N + 1 || tr.states.cols() != L.nx || tr.controls.rows() != d.N ||
      tr.controls.cols() != L.nu || tr.binaries.rows() != d.N || tr.binaries.cols() != L.nw)
    throw std::invalid_argument("encode_trajectory: trajectory shape does not match the layout");
  Vec x = Vec::Zero(L.size());
  for (Index k = 0; k <= d.N; ++k) {
    for (Index i = 0; i < L.nx; ++i) x[L.state(k, i)] = tr.states(k, i);
    if (k == d.N) break;
    for (Index i = 0; i < L.nu; ++i) x[L.control(k, i)] = tr.controls(k, i);
    for (Index i = 0; i < L.nw; ++i) x[L.binary(k, i)] = tr.binaries(k, i);
  }
  if (d.tv.kind != TotalVariation::Kind::None) {
    const Index per = d.N - 1;
    for (Index i = 0; i < L.nw; ++i)
      for (Index k = 0; k < per; ++k)
        x[d.tv.first + i * per + k] = std::abs(tr.binaries(k + 1, i) - tr.binaries(k, i));
  }
  return x;
}

Trajectory simulate(const OcpSpec& s, Index N, const Mat& controls, const Mat& binaries) {
  if (N < 1 || controls.rows() != N || controls.cols() != s.nu || binaries.rows() != N || binaries.cols() != s.nw)
    throw std::invalid_argument("simulate: control matrices have the wrong shape");
  const double dt = s.T / static_cast<double>(N);
  Trajectory tr;
  tr.t = Vec::LinSpaced(N + 1, 0.0, s.T);
  tr.controls = controls;
  tr.binaries = binaries;
  tr.states.resize(N + 1, s.nx);
  tr.states.row(0) = s.x_init.transpose();
  for (Index k = 0; k < N; ++k) {
    const Vec xk = tr.states.row(k).transpose();
    const Vec f = s.dynamics(k * dt, xk, controls.row(k).transpose(), binaries.row(k).transpose());
    tr.states.row(k + 1) = (xk + dt * f).transpose();
  }
  return tr;
}

double total_variation(const Mat& w) {
  if (w.rows() < 2) return 0.0;
  return 0.5 * (w.bottomRows(w.rows() - 1) - w.topRows(w.rows() - 1)).cwiseAbs().sum();
}

double trajectory_cost(const OcpSpec& s, const Trajectory& tr) {
  const Index N = tr.controls.rows();
  const double dt = s.T / static_cast<double>(N);
  double f = 0.0;
  for (Index k = 0; k < N; ++k)
    f += s.stage_cost(k * dt, tr.states.row(k).transpose(), tr.controls.row(k).transpose(),
                      tr.binaries.row(k).transpose());
  return dt * f;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  const Index N = tr.controls.rows();
  os << "t";
  for (Index i = 0; i < tr.states.cols(); ++i) os << ",x" << i;
  for (Index i = 0; i < tr.controls.cols(); ++i) os << ",u" << i;
  for (Index i = 0; i < tr.binaries.cols(); ++i) os << ",w" << i;
  os << '\n' << std::setprecision(17);
  for (Index k = 0; k <= N; ++k) {
    os << tr.t[k];
    for (Index i = 0; i < tr.states.cols(); ++i) os << ',' << tr.states(k, i);
    // controls are piecewise constant; the last node repeats the final interval
    const Index kk = std::min(k, N - 1);
    for (Index i = 0; i < tr.controls.cols(); ++i) os << ',' << tr.controls(kk, i);
    for (Index i = 0; i < tr.binaries.cols(); ++i) os << ',' << tr.binaries(kk, i);
    os << '\n';
  }
}

void write_layout_json(std::ostream& os, const DiscretizedOcp& d) {
  const Layout& L = d.layout;
  nlohmann::json j;
  j["N"] = d.N;
  j["dt"] = d.dt;
  j["nx"] = L.nx;
  j["nu"] = L.nu;
  j["nw"] = L.nw;
  j["stride"] = L.stride();
  j["n_core"] = L.n_core;
  j["n"] = L.size();
  j["names"] = d.names();
  j["integers"] = d.minlp.set_x.integers;
  j["nonlinear_rows"] = d.nonlinear_rows;
  j["dynamics_rows_in_x"] = d.dynamics_rows_in_x;
  if (d.tv.kind != TotalVariation::Kind::None) {
    j["tv"] = {{"kind", d.tv.kind == TotalVariation::Kind::Bound ? "bound" : "penalty"},
               {"value", d.tv.value},
               {"first", d.tv.first}};
  }
  os << j.dump(2) << '\n';
}

}  // namespace hocp
