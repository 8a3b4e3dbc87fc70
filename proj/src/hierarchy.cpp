#include "dpgmg/hierarchy.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <utility>

#include "dpgmg/shape.hpp"

namespace dpgmg {
namespace {

int root_edge(const Mesh& m, int e) {
  while (m.edges[e].parent >= 0) e = m.edges[e].parent;
  return e;
}

// Walks the element lineage up to the element that was active on the coarse
// mesh. Entities classified as interior were created by splits that happened
// after the coarse snapshot, so the first ancestor that already existed then
// was still unsplit, i.e. active.
int coarse_active_elem(const Mesh& coarse, const Mesh& fine, int t) {
  const int ncel = static_cast<int>(coarse.elems.size());
  while (t >= ncel) t = fine.elems[t].parent;
  if (t < 0 || !coarse.elems[t].active)
    throw std::logic_error("fine entity does not resolve to an active coarse element");
  return t;
}

struct Provenance {
  std::vector<int> midpoint_of;  ///< vertex -> edge whose split created it
  std::vector<int> center_of;    ///< vertex -> element whose split created it
};

Provenance build_provenance(const Mesh& m) {
  Provenance pr;
  pr.midpoint_of.assign(m.vertices.size(), -1);
  pr.center_of.assign(m.vertices.size(), -1);
  for (int e = 0; e < static_cast<int>(m.edges.size()); ++e)
    if (m.edges[e].midpoint >= 0) pr.midpoint_of[m.edges[e].midpoint] = e;
  // The split center is the NE corner of the SW child.
  for (int t = 0; t < static_cast<int>(m.elems.size()); ++t)
    if (m.elems[t].child[0] >= 0) pr.center_of[m.elems[m.elems[t].child[0]].corner[2]] = t;
  return pr;
}

// True if the dof sits on the coarse skeleton; otherwise *owner is the
// coarse active element it is interior to. An entity is on the coarse
// skeleton iff it (for edges: the root of its split lineage) existed on the
// coarse mesh, because active regions only shrink under refinement.
bool on_coarse_skeleton(const Mesh& coarse, const Mesh& fine, const Provenance& pr,
                        const DofMap::Support& s, int* owner) {
  const int nv_c = static_cast<int>(coarse.vertices.size());
  const int ne_c = static_cast<int>(coarse.edges.size());
  if (s.kind == DofMap::Support::Vertex) {
    const int v = s.entity;
    if (v < nv_c) return true;
    if (pr.midpoint_of[v] >= 0) {
      const int root = root_edge(fine, pr.midpoint_of[v]);
      if (root < ne_c) return true;
      *owner = coarse_active_elem(coarse, fine, fine.edges[root].origin_elem);
      return false;
    }
    const int t = pr.center_of[v];
    if (t < 0) throw std::logic_error("vertex without split provenance");
    *owner = coarse_active_elem(coarse, fine, t);
    return false;
  }
  const int root = root_edge(fine, s.entity);
  if (root < ne_c) return true;
  *owner = coarse_active_elem(coarse, fine, fine.edges[root].origin_elem);
  return false;
}

// Two-stage transfer, stage 2: each coarse trace mode expanded over the fine
// descendants of its edge. Vertex-dof entries may be emitted by several
// incident edges with identical values; last write wins.
struct IncBuilder {
  const Mesh& fine;
  const DofMap& fdm;
  const std::vector<int>& macro_of;
  std::map<std::pair<int, int>, double> entries;

  void set(int fdof, int col, double v) {
    if (fdof < 0) return;  // hanging fine endpoint carries no dof
    const int r = macro_of[fdof];
    if (r < 0) throw std::logic_error("coarse-skeleton expansion reached an interior dof");
    entries[{r, col}] = v;
  }

  void expand_h1(int e, const Eigen::VectorXd& c, int col) {
    const char st = fdm.skel.edge_status[e];
    if (st == Skeleton::Regular) {
      const int q = fdm.skel.edge_order[e];
      if (static_cast<int>(c.size()) - 1 > q)
        throw std::logic_error("fine edge order below coarse order");
      if (c(0) != 0.0) set(fdm.vert_dof[fine.edges[e].v0], col, c(0));
      if (c(1) != 0.0) set(fdm.vert_dof[fine.edges[e].v1], col, c(1));
      for (int k = 2; k < static_cast<int>(c.size()); ++k)
        if (c(k) != 0.0) set(fdm.edge_bubble[e] + k - 2, col, c(k));
      return;
    }
    if (st == Skeleton::Constrained)
      throw std::logic_error("coarse-regular edge became constrained on the fine mesh");
    const auto& ch = fine.edges[e].child;
    if (ch[0] < 0) throw std::logic_error("unreferenced edge without children");
    const auto& cc = shape::constraint_coeffs(static_cast<int>(c.size()) - 1);
    expand_h1(ch[0], cc.h1[0].transpose() * c, col);
    expand_h1(ch[1], cc.h1[1].transpose() * c, col);
  }

  void expand_leg(int e, const Eigen::VectorXd& c, int col) {
    const char st = fdm.skel.edge_status[e];
    if (st == Skeleton::Regular) {
      const int q = fdm.skel.edge_order[e];
      if (static_cast<int>(c.size()) - 1 > q)
        throw std::logic_error("fine edge order below coarse order");
      for (int k = 0; k < static_cast<int>(c.size()); ++k)
        if (c(k) != 0.0) set(fdm.edge_uhat[e] + k, col, c(k));
      return;
    }
    if (st == Skeleton::Constrained)
      throw std::logic_error("coarse-regular edge became constrained on the fine mesh");
    const auto& ch = fine.edges[e].child;
    if (ch[0] < 0) throw std::logic_error("unreferenced edge without children");
    const auto& cc = shape::constraint_coeffs(static_cast<int>(c.size()) - 1);
    expand_leg(ch[0], cc.leg[0].transpose() * c, col);
    expand_leg(ch[1], cc.leg[1].transpose() * c, col);
  }
};

SpMat build_inclusion(const Mesh& coarse, const DofMap& cdm, const Mesh& fine, const DofMap& fdm,
                      const std::vector<int>& macro_of, int n_macro) {
  IncBuilder ib{fine, fdm, macro_of, {}};
  for (int e = 0; e < static_cast<int>(coarse.edges.size()); ++e) {
    if (cdm.skel.edge_status[e] != Skeleton::Regular) continue;
    const int q = cdm.skel.edge_order[e];
    for (int m = 0; m <= q; ++m) {
      const int col = m == 0   ? cdm.vert_dof[coarse.edges[e].v0]
                      : m == 1 ? cdm.vert_dof[coarse.edges[e].v1]
                               : cdm.edge_bubble[e] + m - 2;
      if (col < 0) continue;  // hanging coarse endpoint: handled via its carrier
      Eigen::VectorXd c = Eigen::VectorXd::Zero(q + 1);
      c(m) = 1.0;
      ib.expand_h1(e, c, col);
    }
    if (cdm.edge_uhat[e] >= 0) {
      for (int m = 0; m <= q; ++m) {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(q + 1);
        c(m) = 1.0;
        ib.expand_leg(e, c, cdm.edge_uhat[e] + m);
      }
    }
  }
  std::vector<Eigen::Triplet<Cplx>> trips;
  trips.reserve(ib.entries.size());
  for (const auto& [key, v] : ib.entries) trips.emplace_back(key.first, key.second, Cplx(v, 0.0));
  SpMat p(n_macro, cdm.ndof);
  p.setFromTriplets(trips.begin(), trips.end());
  p.makeCompressed();
  return p;
}

void dof_span(const Mesh& m, const DofMap::Support& s, double* x0, double* y0, double* x1,
              double* y1) {
  if (s.kind == DofMap::Support::Vertex) {
    *x0 = *x1 = m.vertices[s.entity].x;
    *y0 = *y1 = m.vertices[s.entity].y;
    return;
  }
  const EdgeRec& e = m.edges[s.entity];
  *x0 = m.vertices[e.v0].x;
  *y0 = m.vertices[e.v0].y;
  *x1 = m.vertices[e.v1].x;
  *y1 = m.vertices[e.v1].y;
}

}  // namespace

Vec PatchSmoother::apply(const Vec& r) const {
  Vec x = Vec::Zero(r.size());
  for (size_t p = 0; p < dofs.size(); ++p) {
    const auto& idx = dofs[p];
    Vec rp(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) rp(i) = r(idx[i]);
    const Vec yp = cholesky_solve(fac[p], rp);
    for (size_t i = 0; i < idx.size(); ++i) x(idx[i]) += yp(i);
  }
  return damping * x;
}

PatchSmoother build_patch_smoother(const Mesh& anchor, const Skeleton& ask, const Mesh& span_mesh,
                                   const DofMap& span_dm, const std::vector<int>& sys_of_dof,
                                   const SparseHermitian& s, double damping_override) {
  const std::vector<PatchGeom> geo = vertex_patch_geometry(anchor, ask);
  const int np = static_cast<int>(geo.size());
  std::map<int, std::vector<int>> elem_patches;
  for (int p = 0; p < np; ++p)
    for (int t : geo[p].elems) elem_patches[t].push_back(p);

  std::vector<Rect> arect(ask.active.size());
  for (size_t k = 0; k < ask.active.size(); ++k) arect[k] = anchor.rect(ask.active[k]);

  std::vector<std::vector<int>> pdofs(np);
  std::vector<int> sup, cnt(np, 0);
  for (int d = 0; d < span_dm.ndof; ++d) {
    const int row = sys_of_dof[d];
    if (row < 0) continue;
    double x0, y0, x1, y1;
    dof_span(span_mesh, span_dm.support[d], &x0, &y0, &x1, &y1);
    sup.clear();
    for (size_t k = 0; k < ask.active.size(); ++k) {
      const Rect& r = arect[k];
      if (x0 >= r.x0 && x1 <= r.x0 + r.hx && y0 >= r.y0 && y1 <= r.y0 + r.hy)
        sup.push_back(ask.active[k]);
    }
    if (sup.empty()) throw std::logic_error("dof support outside every anchor element");
    bool covered = false;
    for (int t : sup)
      for (int p : elem_patches[t]) ++cnt[p];
    for (int t : sup)
      for (int p : elem_patches[t])
        if (cnt[p] > 0) {
          if (cnt[p] == static_cast<int>(sup.size())) {
            pdofs[p].push_back(row);
            covered = true;
          }
          cnt[p] = 0;
        }
    if (!covered) throw std::logic_error("dof not covered by any vertex patch");
  }

  PatchSmoother sm;
  std::vector<int> kept_of(np, -1);
  for (int p = 0; p < np; ++p) {
    if (pdofs[p].empty()) continue;
    kept_of[p] = static_cast<int>(sm.dofs.size());
    sm.dofs.push_back(std::move(pdofs[p]));
  }

  const SpMat& A = s.mat();
  std::vector<int> loc(s.n(), -1);
  for (const auto& idx : sm.dofs) {
    const int n = static_cast<int>(idx.size());
    for (int i = 0; i < n; ++i) loc[idx[i]] = i;
    Mat ap = Mat::Zero(n, n);
    for (int jc = 0; jc < n; ++jc)
      for (SpMat::InnerIterator it(A, idx[jc]); it; ++it)
        if (loc[it.row()] >= 0) ap(loc[it.row()], jc) = it.value();
    sm.fac.push_back(hermitian_cholesky(ap));
    for (int i = 0; i < n; ++i) loc[idx[i]] = -1;
  }

  // Damping 1/N_colors: same-color patches share no anchor element, hence no
  // matrix coupling, so each color contributes an A-orthogonal projection.
  const int nk = static_cast<int>(sm.dofs.size());
  std::vector<std::set<int>> adj(nk);
  for (const auto& [t, plist] : elem_patches)
    for (size_t a = 0; a < plist.size(); ++a) {
      if (kept_of[plist[a]] < 0) continue;
      for (size_t b = a + 1; b < plist.size(); ++b) {
        if (kept_of[plist[b]] < 0) continue;
        adj[kept_of[plist[a]]].insert(kept_of[plist[b]]);
        adj[kept_of[plist[b]]].insert(kept_of[plist[a]]);
      }
    }
  std::vector<int> color(nk, -1);
  int ncolor = 1;
  for (int p = 0; p < nk; ++p) {
    std::set<int> used;
    for (int q : adj[p])
      if (color[q] >= 0) used.insert(color[q]);
    int c = 0;
    while (used.count(c)) ++c;
    color[p] = c;
    ncolor = std::max(ncolor, c + 1);
  }
  sm.damping = damping_override > 0.0 ? damping_override : 1.0 / ncolor;
  return sm;
}

MacroPair build_macro_pair(const Mesh& coarse, const DofMap& cdm, const Mesh& fine,
                           const DofMap& fdm, const SparseHermitian& afine,
                           double damping_override) {
  if (afine.n() != fdm.ndof) throw DimensionMismatch("macro pair: system size != fine ndof");
  MacroPair mp;
  const int nfd = fdm.ndof;
  const Provenance pr = build_provenance(fine);

  mp.macro_of_fine.assign(nfd, -1);
  std::vector<int> owner_of(nfd, -1);
  std::map<int, std::vector<int>> interior;
  for (int d = 0; d < nfd; ++d) {
    int owner = -1;
    if (on_coarse_skeleton(coarse, fine, pr, fdm.support[d], &owner)) {
      mp.macro_of_fine[d] = static_cast<int>(mp.fine_of_macro.size());
      mp.fine_of_macro.push_back(d);
    } else {
      owner_of[d] = owner;
      interior[owner].push_back(d);
    }
  }
  mp.n_macro = static_cast<int>(mp.fine_of_macro.size());

  const SpMat& af = afine.mat();
  std::vector<Eigen::Triplet<Cplx>> trips;
  for (int j = 0; j < af.outerSize(); ++j) {
    const int mj = mp.macro_of_fine[j];
    if (mj < 0) continue;
    for (SpMat::InnerIterator it(af, j); it; ++it) {
      const int mi = mp.macro_of_fine[it.row()];
      // Explicit zeros (e.g. Galerkin fill that cancels) are dropped so the
      // sparsity pattern keeps the per-element footprint structure.
      if (mi >= 0 && it.value() != Cplx(0.0, 0.0)) trips.emplace_back(mi, mj, it.value());
    }
  }

  std::vector<int> loc(nfd, -1);
  for (auto& [kelem, idofs] : interior) {
    MacroPair::Block b;
    b.coarse_elem = kelem;
    b.idof = idofs;
    const int ni = static_cast<int>(idofs.size());
    for (int i = 0; i < ni; ++i) loc[idofs[i]] = i;

    std::vector<int> mrows;
    for (int gi : idofs)
      for (SpMat::InnerIterator it(af, gi); it; ++it) {
        if (it.value() == Cplx(0.0, 0.0)) continue;
        const int r = it.row();
        if (mp.macro_of_fine[r] >= 0)
          mrows.push_back(mp.macro_of_fine[r]);
        else if (owner_of[r] != kelem)
          throw std::logic_error("interior blocks of distinct coarse elements couple");
      }
    std::sort(mrows.begin(), mrows.end());
    mrows.erase(std::unique(mrows.begin(), mrows.end()), mrows.end());
    b.mrow = mrows;
    const int nm = static_cast<int>(mrows.size());

    Mat aii = Mat::Zero(ni, ni), aim = Mat::Zero(ni, nm);
    for (int jc = 0; jc < ni; ++jc)
      for (SpMat::InnerIterator it(af, idofs[jc]); it; ++it)
        if (loc[it.row()] >= 0) aii(loc[it.row()], jc) = it.value();
    for (int jc = 0; jc < nm; ++jc)
      for (SpMat::InnerIterator it(af, mp.fine_of_macro[mrows[jc]]); it; ++it)
        if (loc[it.row()] >= 0) aim(loc[it.row()], jc) = it.value();

    try {
      b.aii = hermitian_cholesky(aii);
    } catch (const NotPositiveDefinite&) {
      throw SingularInteriorBlock(kelem);
    }
    b.w = cholesky_solve(b.aii, aim);
    Mat corr = aim.adjoint() * b.w;
    corr = 0.5 * (corr + Mat(corr.adjoint()));
    for (int a2 = 0; a2 < nm; ++a2)
      for (int b2 = 0; b2 < nm; ++b2)
        if (corr(a2, b2) != 0.0) trips.emplace_back(mrows[a2], mrows[b2], -corr(a2, b2));

    for (int gi : idofs) loc[gi] = -1;
    mp.blocks.push_back(std::move(b));
  }

  SpMat am(mp.n_macro, mp.n_macro);
  am.setFromTriplets(trips.begin(), trips.end());
  mp.amacro = SparseHermitian(std::move(am));

  mp.pinc = build_inclusion(coarse, cdm, fine, fdm, mp.macro_of_fine, mp.n_macro);
  mp.smoother = build_patch_smoother(coarse, cdm.skel, fine, fdm, mp.macro_of_fine, mp.amacro,
                                     damping_override);
  return mp;
}

SpMat stage1_prolongation(const MacroPair& pair, int n_fine) {
  std::vector<Eigen::Triplet<Cplx>> trips;
  for (int m = 0; m < pair.n_macro; ++m)
    trips.emplace_back(pair.fine_of_macro[m], m, Cplx(1.0, 0.0));
  for (const auto& b : pair.blocks)
    for (int i = 0; i < static_cast<int>(b.idof.size()); ++i)
      for (int j = 0; j < static_cast<int>(b.mrow.size()); ++j)
        if (b.w(i, j) != 0.0) trips.emplace_back(b.idof[i], b.mrow[j], -b.w(i, j));
  SpMat p(n_fine, pair.n_macro);
  p.setFromTriplets(trips.begin(), trips.end());
  p.makeCompressed();
  return p;
}

SpMat total_prolongation(const MacroPair& pair, int n_fine) {
  SpMat t = stage1_prolongation(pair, n_fine) * pair.pinc;
  t.makeCompressed();
  return t;
}

SparseHermitian coarse_operator(CoarseOpMode mode, const MacroPair& pair,
                                const SparseHermitian* stored) {
  if (mode == CoarseOpMode::Store) {
    if (!stored || stored->n() == 0) throw MissingStoredSystem();
    return *stored;
  }
  return triple_product(pair.pinc, pair.amacro);
}

Hierarchy build_hierarchy(const std::vector<Mesh>& meshes, const std::vector<DofMap>& dms,
                          const SparseHermitian& afine, CoarseOpMode mode,
                          const std::vector<SparseHermitian>* stored, const CycleConfig& cc) {
  if (meshes.empty() || meshes.size() != dms.size())
    throw DimensionMismatch("hierarchy needs one dof map per mesh");
  const int top = static_cast<int>(meshes.size()) - 1;
  if (mode == CoarseOpMode::Store &&
      (!stored || static_cast<int>(stored->size()) != top + 1))
    throw MissingStoredSystem();
  if (afine.n() != dms[top].ndof) throw DimensionMismatch("finest system size mismatch");

  Hierarchy h;
  h.cycle = cc;
  h.a.resize(top + 1);
  h.pairs.resize(top);
  h.a[top] = afine;
  for (int k = top - 1; k >= 0; --k) {
    h.pairs[k] =
        build_macro_pair(meshes[k], dms[k], meshes[k + 1], dms[k + 1], h.a[k + 1], cc.damping);
    h.a[k] = coarse_operator(mode, h.pairs[k], stored ? &(*stored)[k] : nullptr);
    if (h.a[k].n() != dms[k].ndof) throw DimensionMismatch("coarse operator size mismatch");
  }

  if (cc.bottom == CycleConfig::ExactSolve) {
    Mat a0 = Mat(h.a[0].mat());
    a0 = 0.5 * (a0 + Mat(a0.adjoint()));
    h.bottom_exact = hermitian_cholesky(a0);
  } else {
    std::vector<int> ident(dms[0].ndof);
    std::iota(ident.begin(), ident.end(), 0);
    h.bottom_smoother =
        build_patch_smoother(meshes[0], dms[0].skel, meshes[0], dms[0], ident, h.a[0], cc.damping);
  }
  return h;
}

namespace {

Vec vcycle_level(const Hierarchy& h, int k, const Vec& r) {
  if (k == 0) {
    if (h.bottom_exact) return cholesky_solve(*h.bottom_exact, r);
    Vec x = Vec::Zero(r.size());
    const int steps = h.cycle.pre_smooth + h.cycle.post_smooth;
    for (int i = 0; i < steps; ++i) x += h.bottom_smoother.apply(r - h.a[0].apply(x));
    return x;
  }
  const MacroPair& mp = h.pairs[k - 1];

  // Exact interior solves; restrict the residual through the harmonic
  // extension: P1^H r = r_M - W^H r_I.
  Vec rm(mp.n_macro);
  for (int m = 0; m < mp.n_macro; ++m) rm(m) = r(mp.fine_of_macro[m]);
  std::vector<Vec> yblk(mp.blocks.size());
  for (size_t bi = 0; bi < mp.blocks.size(); ++bi) {
    const auto& b = mp.blocks[bi];
    Vec ri(b.idof.size());
    for (size_t i = 0; i < b.idof.size(); ++i) ri(i) = r(b.idof[i]);
    yblk[bi] = cholesky_solve(b.aii, ri);
    const Vec corr = b.w.adjoint() * ri;
    for (size_t j = 0; j < b.mrow.size(); ++j) rm(b.mrow[j]) -= corr(j);
  }

  // V-cycle on the macro Schur complement.
  Vec xm = Vec::Zero(mp.n_macro);
  for (int i = 0; i < h.cycle.pre_smooth; ++i)
    xm += mp.smoother.apply(rm - mp.amacro.apply(xm));
  const Vec rc = mp.pinc.adjoint() * (rm - mp.amacro.apply(xm));
  xm += mp.pinc * vcycle_level(h, k - 1, rc);
  for (int i = 0; i < h.cycle.post_smooth; ++i)
    xm += mp.smoother.apply(rm - mp.amacro.apply(xm));

  // x = P1 x_M + E_I A_II^{-1} r_I.
  Vec x = Vec::Zero(r.size());
  for (int m = 0; m < mp.n_macro; ++m) x(mp.fine_of_macro[m]) = xm(m);
  for (size_t bi = 0; bi < mp.blocks.size(); ++bi) {
    const auto& b = mp.blocks[bi];
    Vec zm(b.mrow.size());
    for (size_t j = 0; j < b.mrow.size(); ++j) zm(j) = xm(b.mrow[j]);
    const Vec xi = yblk[bi] - b.w * zm;
    for (size_t i = 0; i < b.idof.size(); ++i) x(b.idof[i]) = xi(i);
  }
  return x;
}

}  // namespace

Vec v_cycle(const Hierarchy& h, const Vec& r) {
  if (r.size() != h.a.back().n()) throw DimensionMismatch("v_cycle: residual size mismatch");
  return vcycle_level(h, h.levels() - 1, r);
}

MgResult mg_solve(const Hierarchy& h, const Vec& rhs, double tol, int max_iter, const Vec* x0) {
  const SparseHermitian& a = h.a.back();
  const LinOp aop = [&a](const Vec& x) { return a.apply(x); };
  const LinOp mop = [&h](const Vec& r) { return v_cycle(h, r); };
  MgResult out;
  if (x0) {
    // Warm start solves the correction system; convergence stays measured
    // against the original right-hand side.
    const double bn = rhs.norm();
    const Vec b1 = rhs - a.apply(*x0);
    const double b1n = b1.norm();
    if (bn > 0.0 && b1n <= tol * bn) {
      out.x = *x0;
      out.history = {b1n / bn};
      out.converged = true;
      return out;
    }
    PcgResult pr = pcg(aop, mop, b1, bn > 0.0 ? tol * bn / b1n : tol, max_iter);
    out.x = *x0 + pr.x;
    out.iterations = pr.iterations;
    out.converged = pr.converged;
    const double scale = bn > 0.0 ? b1n / bn : 1.0;
    out.history.resize(pr.history.size());
    for (size_t i = 0; i < pr.history.size(); ++i) out.history[i] = pr.history[i] * scale;
  } else {
    PcgResult pr = pcg(aop, mop, rhs, tol, max_iter);
    out.x = std::move(pr.x);
    out.iterations = pr.iterations;
    out.history = std::move(pr.history);
    out.converged = pr.converged;
  }
  return out;
}

}  // namespace dpgmg
