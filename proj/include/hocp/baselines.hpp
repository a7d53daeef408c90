#pragma once

#include <hocp/alm.hpp>
#include <hocp/transcription.hpp>

#include <string>
#include <vector>

namespace hocp {

struct DpGrid {
  std::vector<Index> state_points;    // per state; empty => 51 each
  std::vector<Index> control_points;  // per real control; empty => 21 each
  Vec state_lo, state_hi;             // empty => OcpSpec state bounds
  double terminal_weight = 1e4;
  int threads = 0;                    // 0 => HOCP_THREADS, else hardware concurrency
  std::string dump_path;              // optional binary value-table dump
};

struct DpResult {
  Trajectory traj;
  double objective = kInf;         // Δt Σ stage cost along the rollout
  double terminal_penalty = 0.0;   // weight * squared terminal deviation
  double value = kInf;             // table value at the snapped initial node
  Index grid_nodes = 0;
  Index modes = 0;
};

/// Backward value iteration on a product grid with nearest-node lookup,
/// followed by a greedy forward rollout from the exact initial state.
/// Binary controls enter the state when stage rows couple w_k and w_{k-1}.
DpResult dp_solve(const OcpSpec& spec, Index N, const DpGrid& grid = {});

/// Sum-up rounding of fractional SOS1 modes (N x nw rows on the simplex).
Mat cia_sur(const Mat& alpha, double dt);

/// Rounds relaxed.binaries and re-simulates the states with the new modes.
Trajectory cia_sur(const OcpSpec& spec, const Trajectory& relaxed);

struct RelaxResult {
  Vec x_relaxed;
  Vec x_projected;
  AlmReport report;
};

/// ALM on the integrality relaxation, then ℓ1 projection onto X.
RelaxResult relax_then_project(const Minlp& p, const Vec& x0, const AlmConfig& cfg = {});

/// ALM with every integer coordinate frozen at its value in x_in. Falls back
/// to x_in when the refined point is worse and x_in is already feasible.
AlmReport refine_fixed_integers(const Minlp& p, const Vec& x_in, const Vec& y0, const AlmConfig& cfg = {});

/// p with X replaced by fix_integers(X, x).
Minlp with_fixed_integers(const Minlp& p, const Vec& x);

}  // namespace hocp
