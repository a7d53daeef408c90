#pragma once

#include <hocp/core_model.hpp>

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hocp {

struct DynamicsJacobian {
  Mat fx, fu, fw;
};

struct StageCostGradient {
  Vec gx, gu, gw;
};

/// ẋ_i = ax·x + au·u + aw·w + constant
struct AffineDynamics {
  Vec ax, au, aw;
  double constant = 0.0;
};

/// lo <= cx·x_k + cu·u_k + cw·w_k + cw_prev·w_{k-1} <= hi, for every stage k.
/// At k = 0, w_{-1} is the fixed parameter OcpSpec::w_prev_init.
struct StageRow {
  Vec cx, cu, cw, cw_prev;
  double lo = -kInf;
  double hi = kInf;
};

/// Continuous-time hybrid OCP on [0, T] with states x (nx), real controls
/// u (nu) and binary controls w (nw).
struct OcpSpec {
  Index nx = 0, nu = 0, nw = 0;
  double T = 1.0;

  std::function<Vec(double, const Vec&, const Vec&, const Vec&)> dynamics;
  std::function<DynamicsJacobian(double, const Vec&, const Vec&, const Vec&)> dynamics_jacobian;
  std::function<double(double, const Vec&, const Vec&, const Vec&)> stage_cost;
  std::function<StageCostGradient(double, const Vec&, const Vec&, const Vec&)> stage_cost_gradient;

  // Components with an entry here are routed to X as linear rows; the
  // `dynamics` callback must agree with them.
  std::vector<std::optional<AffineDynamics>> affine;

  Vec x_init;
  std::vector<std::optional<double>> terminal;
  Vec x_lo, x_hi, u_lo, u_hi;
  std::vector<StageRow> stage_rows;
  Vec w_prev_init;
  bool sos1 = false;

  std::vector<std::string> state_names, control_names, binary_names;

  void validate() const;
};

/// Flat variable order: [x_0 u_0 w_0 | x_1 u_1 w_1 | ... | x_N], followed by
/// any auxiliary variables appended by gadgets.
struct Layout {
  Index N = 0, nx = 0, nu = 0, nw = 0;
  Index n_core = 0;
  std::vector<std::string> extra_names;

  Index stride() const { return nx + nu + nw; }
  Index state(Index k, Index i) const { return k * stride() + i; }
  Index control(Index k, Index i) const { return k * stride() + nx + i; }
  Index binary(Index k, Index i) const { return k * stride() + nx + nu + i; }
  Index size() const { return n_core + static_cast<Index>(extra_names.size()); }
};

struct TotalVariation {
  enum class Kind { None, Bound, Penalty };
  Kind kind = Kind::None;
  double value = 0.0;  // U_TV or α_TV
  Index first = 0;     // t_{i,k} at first + i*(N-1) + k
  Index bound_row = -1;
};

struct DiscretizedOcp {
  std::shared_ptr<const OcpSpec> spec;
  Index N = 0;
  double dt = 0.0;
  Layout layout;
  Minlp minlp;
  Vec linear_cost;  // linear part of the objective (gadget penalties)
  TotalVariation tv;
  Index nonlinear_rows = 0;
  Index dynamics_rows_in_x = 0;

  std::vector<std::string> names() const;
};

/// Explicit Euler transcription on a uniform grid with N intervals.
DiscretizedOcp discretize_euler(const OcpSpec& spec, Index N);

struct TvMode {
  TotalVariation::Kind kind = TotalVariation::Kind::None;
  double value = 0.0;

  static TvMode none() { return {}; }
  static TvMode bound(double u) { return {TotalVariation::Kind::Bound, u}; }
  static TvMode penalty(double a) { return {TotalVariation::Kind::Penalty, a}; }
};

/// Linearized total variation ½ Σ_i Σ_k |w_{i,k+1} − w_{i,k}| via one
/// auxiliary variable and four rows per binary control and stage pair.
DiscretizedOcp add_total_variation(const DiscretizedOcp& d, TvMode mode);

struct Trajectory {
  Vec t;          // N+1
  Mat states;     // (N+1) x nx
  Mat controls;   // N x nu
  Mat binaries;   // N x nw
};

/// Binary entries are rounded unless `round_binaries` is false (relaxations).
Trajectory extract_trajectory(const DiscretizedOcp& d, const Vec& x, bool round_binaries = true);

/// Inverse of extract_trajectory; auxiliary TV variables are set to |Δw|.
Vec encode_trajectory(const DiscretizedOcp& d, const Trajectory& traj);

/// Forward Euler rollout from x_init with the given controls.
Trajectory simulate(const OcpSpec& spec, Index N, const Mat& controls, const Mat& binaries);

/// ½ Σ_i Σ_k |w_{i,k+1} − w_{i,k}| over an N x nw binary matrix.
double total_variation(const Mat& binaries);

/// Δt Σ_k stage_cost (no gadget terms).
double trajectory_cost(const OcpSpec& spec, const Trajectory& traj);

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_layout_json(std::ostream& os, const DiscretizedOcp& d);

}  // namespace hocp
