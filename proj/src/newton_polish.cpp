#include "newton_polish.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <Eigen/SparseQR>

#include <algorithm>
#include <cmath>

namespace hocp::detail {

namespace {

using ColSparse = Eigen::SparseMatrix<double>;

// Equality-constrained step on the free variables:
//   H d - Aw' λ = -g,  Aw d = 0
// with H shifted until positive definite. Dependent rows of Aw get λ = 0.
bool eqp_step(const ColSparse& H, const ColSparse& Aw, const Vec& g, Vec& d, Vec& lam) {
  const Index nf = H.rows(), nw = Aw.rows();
  d = Vec::Zero(nf);
  lam = Vec::Zero(nw);
  if (nf == 0) return true;

  double hmax = 0.0;
  for (Index k = 0; k < H.outerSize(); ++k)
    for (ColSparse::InnerIterator it(H, k); it; ++it) hmax = std::max(hmax, std::abs(it.value()));
  ColSparse Id(nf, nf);
  Id.setIdentity();
  ColSparse Hr = H;
  Eigen::SimplicialLLT<ColSparse> llt;
  double tau = 0.0;
  for (int t = 0; t < 30; ++t) {
    Hr = H + tau * Id;
    llt.compute(Hr);
    if (llt.info() == Eigen::Success) break;
    tau = tau == 0.0 ? std::max(1e-6 * hmax, 1e-10) : 10.0 * tau;
  }
  if (llt.info() != Eigen::Success) return false;

  if (nw == 0) {
    d = llt.solve(Vec(-g));
    return llt.info() == Eigen::Success;
  }

  // independent rows of Aw
  ColSparse AwT = Aw.transpose();
  AwT.makeCompressed();
  Eigen::SparseQR<ColSparse, Eigen::COLAMDOrdering<int>> qr;
  qr.setPivotThreshold(1e-10);
  qr.compute(AwT);
  if (qr.info() != Eigen::Success) return false;
  const Index rank = qr.rank();
  std::vector<Index> keep;
  for (Index k = 0; k < rank; ++k) keep.push_back(qr.colsPermutation().indices()[k]);
  std::sort(keep.begin(), keep.end());
  if (keep.empty()) {
    d = llt.solve(Vec(-g));
    return llt.info() == Eigen::Success;
  }

  const Index nk = static_cast<Index>(keep.size());
  std::vector<Eigen::Triplet<double>> trips;
  for (Index k = 0; k < Hr.outerSize(); ++k)
    for (ColSparse::InnerIterator it(Hr, k); it; ++it) trips.emplace_back(it.row(), it.col(), it.value());
  for (Index r = 0; r < nk; ++r)
    for (ColSparse::InnerIterator it(AwT, keep[r]); it; ++it) {
      trips.emplace_back(nf + r, it.row(), it.value());
      trips.emplace_back(it.row(), nf + r, -it.value());
    }
  ColSparse K(nf + nk, nf + nk);
  K.setFromTriplets(trips.begin(), trips.end());
  K.makeCompressed();
  Eigen::SparseLU<ColSparse, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(K);
  if (lu.info() != Eigen::Success) return false;
  Vec rhs = Vec::Zero(nf + nk);
  rhs.head(nf) = -g;
  const Vec sol = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !sol.allFinite()) return false;
  d = sol.head(nf);
  for (Index r = 0; r < nk; ++r) lam[keep[r]] = sol[nf + r];
  return true;
}

}  // namespace

bool newton_polish(const SmoothFunction& phi, const MilSet& X, Vec& x, double& fx, const Vec& g) {
  const Index n = X.n;
  const double tol = 1e-9;
  auto near = [tol](double a, double b) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); };

  std::vector<char> fixed(n, 0);
  std::vector<int> bside(n, 0);  // -1 at lower, +1 at upper
  for (Index j : X.integers) fixed[j] = 1;
  for (Index j = 0; j < n; ++j) {
    if (fixed[j] || X.lb[j] == X.ub[j]) {
      fixed[j] = 1;
      continue;
    }
    if (near(x[j], X.lb[j])) bside[j] = -1;
    else if (near(x[j], X.ub[j])) bside[j] = 1;
  }
  const Index m = X.rows();
  const Vec ax = m ? Vec(X.A * x) : Vec::Zero(0);
  std::vector<int> rside(m, 0);  // 2 equality, -1 at lower, +1 at upper
  for (Index i = 0; i < m; ++i) {
    if (X.row_lo[i] == X.row_hi[i]) rside[i] = 2;
    else if (std::isfinite(X.row_lo[i]) && near(ax[i], X.row_lo[i])) rside[i] = -1;
    else if (std::isfinite(X.row_hi[i]) && near(ax[i], X.row_hi[i])) rside[i] = 1;
  }

  std::vector<Index> cand;
  for (Index j = 0; j < n; ++j)
    if (!fixed[j]) cand.push_back(j);
  if (cand.empty()) return false;
  const Index nc = static_cast<Index>(cand.size());
  std::vector<Index> pos(n, -1);
  for (Index k = 0; k < nc; ++k) pos[cand[k]] = k;

  // Hessian by forward differences of the gradient. With a sparsity pattern
  // the columns are grouped so that no two in a group share a row.
  std::vector<Eigen::Triplet<double>> htrips;
  auto add_entry = [&](Index r, Index k, double v) {
    if (v == 0.0) return;
    htrips.emplace_back(r, k, 0.5 * v);
    htrips.emplace_back(k, r, 0.5 * v);
  };
  const SparseMat& P = phi.hessian_pattern;
  if (P.rows() == n && P.cols() == n) {
    std::vector<std::vector<Index>> nz(nc);  // candidate rows of each candidate column
    for (Index k = 0; k < nc; ++k)
      for (SparseMat::InnerIterator it(P, cand[k]); it; ++it)
        if (pos[it.col()] >= 0) nz[k].push_back(pos[it.col()]);
    std::vector<Index> color(nc, -1);
    std::vector<Index> mark;
    Index ncolors = 0;
    for (Index k = 0; k < nc; ++k) {
      mark.assign(ncolors + 1, -1);
      for (Index r : nz[k])
        for (Index c : nz[r])
          if (color[c] >= 0) mark[color[c]] = k;
      Index col = 0;
      while (col < ncolors && mark[col] == k) ++col;
      color[k] = col;
      ncolors = std::max(ncolors, col + 1);
    }
    for (Index c = 0; c < ncolors; ++c) {
      Vec xp = x;
      Vec hs = Vec::Zero(nc);
      for (Index k = 0; k < nc; ++k)
        if (color[k] == c) {
          hs[k] = 1e-7 * std::max(1.0, std::abs(x[cand[k]]));
          xp[cand[k]] += hs[k];
        }
      const Vec gp = phi.gradient(xp);
      for (Index k = 0; k < nc; ++k)
        if (color[k] == c)
          for (Index r : nz[k]) add_entry(r, k, (gp[cand[r]] - g[cand[r]]) / hs[k]);
    }
  } else {
    for (Index k = 0; k < nc; ++k) {
      const Index j = cand[k];
      const double h = 1e-7 * std::max(1.0, std::abs(x[j]));
      Vec xp = x;
      xp[j] += h;
      const Vec gp = phi.gradient(xp);
      for (Index r = 0; r < nc; ++r) add_entry(r, k, (gp[cand[r]] - g[cand[r]]) / h);
    }
  }
  ColSparse H(nc, nc);
  H.setFromTriplets(htrips.begin(), htrips.end());
  Vec gc(nc);
  for (Index k = 0; k < nc; ++k) gc[k] = g[cand[k]];

  // rows restricted to the candidates
  std::vector<Eigen::Triplet<double>> atrips;
  for (Index i = 0; i < m; ++i)
    for (SparseMat::InnerIterator it(X.A, i); it; ++it)
      if (pos[it.col()] >= 0) atrips.emplace_back(i, pos[it.col()], it.value());
  ColSparse Ac(m, nc);
  Ac.setFromTriplets(atrips.begin(), atrips.end());

  // tight constraints; members of the working set when side != 0
  const std::vector<int> rtight = rside, btight = bside;
  std::vector<char> rsticky(m, 0), bsticky(n, 0);

  Vec d = Vec::Zero(nc);
  std::vector<Index> work;
  bool settled = false;
  for (int round = 0; round < 4 * (m + nc) + 10 && !settled; ++round) {
    std::vector<Index> fv;
    std::vector<Index> fpos(nc, -1);
    for (Index k = 0; k < nc; ++k)
      if (bside[cand[k]] == 0) {
        fpos[k] = static_cast<Index>(fv.size());
        fv.push_back(k);
      }
    work.clear();
    for (Index i = 0; i < m; ++i)
      if (rside[i] != 0) work.push_back(i);
    const Index nf = static_cast<Index>(fv.size());
    const Index nw = static_cast<Index>(work.size());

    std::vector<Eigen::Triplet<double>> t;
    for (Index k = 0; k < H.outerSize(); ++k) {
      if (fpos[k] < 0) continue;
      for (ColSparse::InnerIterator it(H, k); it; ++it)
        if (fpos[it.row()] >= 0) t.emplace_back(fpos[it.row()], fpos[k], it.value());
    }
    ColSparse Hf(nf, nf);
    Hf.setFromTriplets(t.begin(), t.end());
    t.clear();
    std::vector<Index> wpos(m, -1);
    for (Index r = 0; r < nw; ++r) wpos[work[r]] = r;
    for (Index k = 0; k < Ac.outerSize(); ++k) {
      if (fpos[k] < 0) continue;
      for (ColSparse::InnerIterator it(Ac, k); it; ++it)
        if (wpos[it.row()] >= 0) t.emplace_back(wpos[it.row()], fpos[k], it.value());
    }
    ColSparse Aw(nw, nf);
    Aw.setFromTriplets(t.begin(), t.end());
    Vec gf(nf);
    for (Index a = 0; a < nf; ++a) gf[a] = gc[fv[a]];

    Vec df, lam_rows;
    if (!eqp_step(Hf, Aw, gf, df, lam_rows)) return false;
    d.setZero();
    for (Index a = 0; a < nf; ++a) d[fv[a]] = df[a];

    // a released tight constraint that the step would violate goes back in
    bool added = false;
    const double dn = std::max(1.0, d.cwiseAbs().maxCoeff());
    const Vec ad = Ac * d;
    for (Index i = 0; i < m; ++i) {
      if (rtight[i] == 0 || rside[i] != 0) continue;
      if ((rtight[i] == -1 && ad[i] < -1e-12 * dn) || (rtight[i] == 1 && ad[i] > 1e-12 * dn)) {
        rside[i] = rtight[i];
        rsticky[i] = 1;
        added = true;
      }
    }
    for (Index k = 0; k < nc; ++k) {
      const Index j = cand[k];
      if (btight[j] == 0 || bside[j] != 0) continue;
      if ((btight[j] == -1 && d[k] < -1e-12 * dn) || (btight[j] == 1 && d[k] > 1e-12 * dn)) {
        bside[j] = btight[j];
        bsticky[j] = 1;
        added = true;
      }
    }
    if (added) continue;

    // bound duals from g + H d - Aw' λ on the fixed candidates
    Vec lam_full = Vec::Zero(m);
    for (Index r = 0; r < nw; ++r) lam_full[work[r]] = lam_rows[r];
    const Vec r_all = gc + H * d - Ac.transpose() * lam_full;
    const double scale = 1e-8 * std::max(1.0, gc.cwiseAbs().maxCoeff());
    bool dropped = false;
    for (Index r = 0; r < nw; ++r) {
      const Index i = work[r];
      if (rside[i] == 2 || rsticky[i]) continue;
      if ((rside[i] == -1 ? -lam_rows[r] : lam_rows[r]) > scale) {
        rside[i] = 0;
        dropped = true;
      }
    }
    for (Index k = 0; k < nc; ++k) {
      const Index j = cand[k];
      if (bside[j] == 0 || bsticky[j]) continue;
      if ((bside[j] == -1 ? -r_all[k] : r_all[k]) > scale) {
        bside[j] = 0;
        dropped = true;
      }
    }
    settled = !dropped;
  }
  if (!settled) return false;

  const double gd = gc.dot(d);
  if (!(gd < 0.0)) return false;
  Vec dx = Vec::Zero(n);
  for (Index k = 0; k < nc; ++k) dx[cand[k]] = d[k];

  double amax = 1.0;
  const double tiny = 1e-12 * std::max(1.0, dx.cwiseAbs().maxCoeff());
  for (Index j = 0; j < n; ++j) {
    if (bside[j] != 0 || std::abs(dx[j]) <= tiny) continue;
    if (dx[j] > 0) amax = std::min(amax, (X.ub[j] - x[j]) / dx[j]);
    else if (dx[j] < 0) amax = std::min(amax, (X.lb[j] - x[j]) / dx[j]);
  }
  if (m) {
    const Vec ad = X.A * dx;
    for (Index i = 0; i < m; ++i) {
      if (std::abs(ad[i]) <= tiny || rside[i] != 0) continue;
      if (ad[i] > 0) amax = std::min(amax, (X.row_hi[i] - ax[i]) / ad[i]);
      else amax = std::min(amax, (X.row_lo[i] - ax[i]) / ad[i]);
    }
  }
  if (!(amax > 1e-14)) return false;

  double alpha = amax;
  for (int t = 0; t < 40; ++t, alpha *= 0.5) {
    Vec xt = (x + alpha * dx).cwiseMax(X.lb).cwiseMin(X.ub);
    const double ft = phi.value(xt);
    if (ft < fx && ft <= fx + 1e-4 * alpha * gd && is_member(X, xt, 1e-9)) {
      x = std::move(xt);
      fx = ft;
      return true;
    }
  }
  return false;
}

}  // namespace hocp::detail
