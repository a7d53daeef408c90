#include "dual_simplex.hpp"

#include <algorithm>
#include <cmath>

namespace hocp::detail {

DualSimplex::DualSimplex(const Vec& cost, const SparseMat& A, const Vec& row_lo,
                         const Vec& row_hi, const Vec& lb, const Vec& ub,
                         Options opts)
    : n_(A.cols()), m_(A.rows()), A_(A), opts_(opts) {
  A_.makeCompressed();
  c_ = Vec::Zero(n_ + m_);
  c_.head(n_) = cost;
  lo_.resize(n_ + m_);
  hi_.resize(n_ + m_);
  lo_ << lb, row_lo;
  hi_ << ub, row_hi;
  x_ = Vec::Zero(n_ + m_);
  d_ = Vec::Zero(n_ + m_);
  slack_basis();
}

void DualSimplex::slack_basis() {
  head_.resize(m_);
  pos_.assign(n_ + m_, -1);
  state_.assign(n_ + m_, VarState::AtLower);
  for (Index i = 0; i < m_; ++i) {
    head_[i] = n_ + i;
    pos_[n_ + i] = i;
    state_[n_ + i] = VarState::Basic;
  }
  d_.setZero();
  d_.head(n_) = c_.head(n_);
  for (Index j = 0; j < n_; ++j) place_nonbasic(j);
  factor_valid_ = false;
}

void DualSimplex::place_nonbasic(Index j) {
  const double tol = opts_.dual_tol;
  if (lo_[j] == hi_[j] || d_[j] > tol)
    state_[j] = VarState::AtLower;
  else if (d_[j] < -tol)
    state_[j] = VarState::AtUpper;
  else if (std::isfinite(lo_[j]))
    state_[j] = VarState::AtLower;
  else if (std::isfinite(hi_[j]))
    state_[j] = VarState::AtUpper;
  else
    state_[j] = VarState::Free;
}

double DualSimplex::nonbasic_value(Index j) const {
  switch (state_[j]) {
    case VarState::AtLower:
      return std::isfinite(lo_[j]) ? lo_[j] : -kArtificial;
    case VarState::AtUpper:
      return std::isfinite(hi_[j]) ? hi_[j] : kArtificial;
    default:
      return 0.0;
  }
}

void DualSimplex::set_bounds(Index j, double lo, double hi) {
  lo_[j] = lo;
  hi_[j] = hi;
  if (state_[j] == VarState::Free && (std::isfinite(lo) || std::isfinite(hi)))
    place_nonbasic(j);
}

DualSimplex::Basis DualSimplex::basis() const { return {head_, state_}; }

void DualSimplex::set_basis(const Basis& b) {
  head_ = b.head;
  state_ = b.state;
  pos_.assign(n_ + m_, -1);
  for (Index r = 0; r < m_; ++r) pos_[head_[r]] = r;
  factor_valid_ = false;
}

double DualSimplex::objective() const { return c_.head(n_).dot(x_.head(n_)); }

bool DualSimplex::factorize() {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(A_.nonZeros() + m_));
  for (Index r = 0; r < m_; ++r) {
    const Index j = head_[r];
    if (j < n_) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(A_, j); it; ++it)
        trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(r),
                           it.value());
    } else {
      trips.emplace_back(static_cast<int>(j - n_), static_cast<int>(r), -1.0);
    }
  }
  Eigen::SparseMatrix<double> B(m_, m_);
  B.setFromTriplets(trips.begin(), trips.end());
  B.makeCompressed();
  eta_pos_.clear();
  eta_col_.clear();
  factor_valid_ = false;
  if (m_ == 0) {
    factor_valid_ = true;
    return true;
  }
  lu_.analyzePattern(B);
  lu_.factorize(B);
  if (lu_.info() != Eigen::Success) return false;
  // SparseLU accepts numerically singular bases; reject tiny pivots here.
  const double logdet = lu_.logAbsDeterminant();
  if (!std::isfinite(logdet)) return false;
  factor_valid_ = true;
  return true;
}

Vec DualSimplex::ftran(Vec v) const {
  if (m_ == 0) return v;
  Vec z = lu_.solve(v);
  for (std::size_t k = 0; k < eta_pos_.size(); ++k) {
    const Index p = eta_pos_[k];
    const Vec& eta = eta_col_[k];
    const double zp = z[p] / eta[p];
    z -= zp * eta;
    z[p] = zp;
  }
  return z;
}

Vec DualSimplex::btran(Vec v) const {
  if (m_ == 0) return v;
  for (std::size_t k = eta_pos_.size(); k-- > 0;) {
    const Index p = eta_pos_[k];
    const Vec& eta = eta_col_[k];
    const double dot = eta.dot(v) - eta[p] * v[p];
    v[p] = (v[p] - dot) / eta[p];
  }
  return lu_.transpose().solve(v);
}

void DualSimplex::column(Index j, Vec& out) const {
  out.setZero(m_);
  if (j < n_) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(A_, j); it; ++it)
      out[it.row()] = it.value();
  } else {
    out[j - n_] = -1.0;
  }
}

double DualSimplex::column_dot(Index j, const Vec& y) const {
  if (j >= n_) return -y[j - n_];
  double s = 0.0;
  for (Eigen::SparseMatrix<double>::InnerIterator it(A_, j); it; ++it)
    s += it.value() * y[it.row()];
  return s;
}

void DualSimplex::recompute_primal() {
  Vec rhs = Vec::Zero(m_);
  for (Index j = 0; j < n_ + m_; ++j) {
    if (state_[j] == VarState::Basic) continue;
    x_[j] = nonbasic_value(j);
    if (x_[j] == 0.0) continue;
    if (j < n_) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(A_, j); it; ++it)
        rhs[it.row()] -= it.value() * x_[j];
    } else {
      rhs[j - n_] += x_[j];
    }
  }
  const Vec xb = ftran(rhs);
  for (Index r = 0; r < m_; ++r) x_[head_[r]] = xb[r];
}

void DualSimplex::recompute_duals() {
  Vec cb(m_);
  for (Index r = 0; r < m_; ++r) cb[r] = c_[head_[r]];
  const Vec y = btran(cb);
  for (Index j = 0; j < n_ + m_; ++j)
    d_[j] = state_[j] == VarState::Basic ? 0.0 : c_[j] - column_dot(j, y);
}

bool DualSimplex::repair_dual_infeasibility() {
  bool changed = false;
  const double tol = opts_.dual_tol;
  for (Index j = 0; j < n_ + m_; ++j) {
    const VarState s = state_[j];
    if (s == VarState::Basic || lo_[j] == hi_[j]) continue;
    const bool bad = (s == VarState::AtLower && d_[j] < -tol) ||
                     (s == VarState::AtUpper && d_[j] > tol) ||
                     (s == VarState::Free && std::abs(d_[j]) > tol);
    if (bad) {
      place_nonbasic(j);
      changed = true;
    }
  }
  return changed;
}

DualSimplex::Status DualSimplex::solve() {
  const Index max_it =
      opts_.max_iterations > 0 ? opts_.max_iterations : 50 * (n_ + m_) + 10000;
  const Index start = iterations_;
  const double ptol = opts_.primal_tol;
  const double dtol = opts_.dual_tol;

  auto refresh = [&] {
    if (!factorize()) {
      slack_basis();
      factorize();
    }
    recompute_duals();
    repair_dual_infeasibility();
    recompute_primal();
  };

  if (!factor_valid_) {
    refresh();
  } else {
    recompute_duals();
    repair_dual_infeasibility();
    recompute_primal();
  }

  Vec alpha_row = Vec::Zero(n_ + m_);
  Vec col(m_);
  Vec unit(m_);
  std::vector<Index> eligible;
  bool fresh = eta_pos_.empty();

  for (;;) {
    if (iterations_ - start >= max_it) return Status::IterationLimit;
    if (static_cast<int>(eta_pos_.size()) >= opts_.refactor_every) {
      refresh();
      fresh = true;
    }

    // Leaving variable: largest primal infeasibility.
    Index p = -1;
    double best = 0.0;
    for (Index r = 0; r < m_; ++r) {
      const Index j = head_[r];
      double viol = 0.0;
      if (x_[j] < lo_[j] - ptol)
        viol = lo_[j] - x_[j];
      else if (x_[j] > hi_[j] + ptol)
        viol = x_[j] - hi_[j];
      if (viol <= 0.0) continue;
      if (p < 0 || (bland_ ? j < head_[p] : viol > best)) {
        p = r;
        best = viol;
      }
    }

    if (p < 0) {
      if (!fresh) {
        refresh();
        fresh = true;
        continue;
      }
      for (Index j = 0; j < n_ + m_; ++j)
        if (std::abs(x_[j]) >= 0.5 * kArtificial) return Status::Unbounded;
      return Status::Optimal;
    }

    const Index leave = head_[p];
    const bool to_lower = x_[leave] < lo_[leave];
    const double target = to_lower ? lo_[leave] : hi_[leave];
    const double sgn = to_lower ? 1.0 : -1.0;

    unit.setZero();
    unit[p] = 1.0;
    const Vec rho = btran(unit);

    // Harris two-pass ratio test.
    eligible.clear();
    double bound = kInf;
    for (Index j = 0; j < n_ + m_; ++j) {
      const VarState s = state_[j];
      if (s == VarState::Basic || lo_[j] == hi_[j]) continue;
      const double a = column_dot(j, rho);
      alpha_row[j] = a;
      const double sa = sgn * a;
      double dj;
      if ((s == VarState::AtLower || s == VarState::Free) && sa < -opts_.pivot_tol)
        dj = std::max(d_[j], 0.0);
      else if ((s == VarState::AtUpper || s == VarState::Free) &&
               sa > opts_.pivot_tol)
        dj = std::max(-d_[j], 0.0);
      else
        continue;
      if (s == VarState::Free) dj = std::abs(d_[j]);
      eligible.push_back(j);
      bound = std::min(bound, (dj + dtol) / std::abs(a));
    }
    if (eligible.empty()) {
      if (!fresh) {
        refresh();
        fresh = true;
        continue;
      }
      return Status::Infeasible;
    }

    Index q = -1;
    double qa = 0.0;
    for (Index j : eligible) {
      const double a = std::abs(alpha_row[j]);
      double dj = std::abs(d_[j]);
      if (state_[j] == VarState::AtLower) dj = std::max(d_[j], 0.0);
      if (state_[j] == VarState::AtUpper) dj = std::max(-d_[j], 0.0);
      if (dj / a > bound) continue;
      if (q < 0 || (bland_ ? j < q : a > qa)) {
        q = j;
        qa = a;
      }
    }

    column(q, col);
    const Vec alpha_q = ftran(col);
    const double piv = alpha_q[p];
    if (std::abs(piv) < opts_.pivot_tol ||
        std::abs(piv - alpha_row[q]) > 1e-6 * (1.0 + std::abs(piv))) {
      if (!fresh) {
        refresh();
        fresh = true;
        continue;
      }
      if (std::abs(piv) < opts_.pivot_tol) return Status::IterationLimit;
    }

    // Dual update.
    double dq = d_[q];
    if ((state_[q] == VarState::AtLower && dq < 0.0) ||
        (state_[q] == VarState::AtUpper && dq > 0.0))
      dq = 0.0;
    const double theta_d = dq / piv;
    if (theta_d != 0.0) {
      for (Index j = 0; j < n_ + m_; ++j)
        if (state_[j] != VarState::Basic) d_[j] -= theta_d * alpha_row[j];
    }
    d_[q] = 0.0;
    d_[leave] = -theta_d;

    // Primal update.
    const double theta_p = (x_[leave] - target) / piv;
    for (Index r = 0; r < m_; ++r) x_[head_[r]] -= theta_p * alpha_q[r];
    x_[q] += theta_p;
    x_[leave] = target;

    state_[leave] = to_lower ? VarState::AtLower : VarState::AtUpper;
    if (lo_[leave] == hi_[leave]) state_[leave] = VarState::AtLower;
    pos_[leave] = -1;
    state_[q] = VarState::Basic;
    pos_[q] = p;
    head_[p] = q;
    eta_pos_.push_back(p);
    eta_col_.push_back(alpha_q);
    fresh = false;

    ++iterations_;
    if (std::abs(theta_d) < 1e-12 && ++degenerate_ > opts_.bland_after)
      bland_ = true;
  }
}

}  // namespace hocp::detail
