#include "dpgmg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dpgmg {

Mesh Mesh::initial(int p0, int p_max) {
  if (p0 < 2 || p0 > p_max) throw std::invalid_argument("initial: require 2 <= p0 <= p_max");
  Mesh m;
  m.p_max = p_max;
  m.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  m.edges.resize(4);
  m.edges[0] = {0, 1, true};
  m.edges[1] = {1, 2, true};
  m.edges[2] = {3, 2, true};
  m.edges[3] = {0, 3, true};
  ElemRec e;
  e.corner = {0, 1, 2, 3};
  e.edge = {0, 1, 2, 3};
  e.order = p0;
  e.level = 0;
  m.elems.push_back(e);
  return m;
}

std::vector<int> Mesh::active_elems() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(elems.size()); ++i)
    if (elems[i].active) out.push_back(i);
  return out;
}

int Mesh::n_active_elems() const {
  int n = 0;
  for (const auto& e : elems) n += e.active ? 1 : 0;
  return n;
}

Rect Mesh::rect(int elem) const {
  const auto& e = elems[elem];
  const auto& sw = vertices[e.corner[0]];
  const auto& ne = vertices[e.corner[2]];
  return {sw.x, sw.y, ne.x - sw.x, ne.y - sw.y};
}

double Mesh::max_edge_len(int elem) const {
  Rect r = rect(elem);
  return std::max(r.hx, r.hy);
}

Skeleton build_skeleton(const Mesh& m) {
  Skeleton s;
  s.active = m.active_elems();
  s.edge_status.assign(m.edges.size(), Skeleton::Unreferenced);
  s.edge_elems.assign(m.edges.size(), {-1, -1});
  s.edge_order.assign(m.edges.size(), std::numeric_limits<int>::max());
  s.vertex_active.assign(m.vertices.size(), 0);
  s.vertex_hanging.assign(m.vertices.size(), 0);
  for (int t : s.active) {
    for (int c : m.elems[t].corner) s.vertex_active[c] = 1;
    for (int e : m.elems[t].edge) {
      if (s.edge_elems[e][0] < 0)
        s.edge_elems[e][0] = t;
      else
        s.edge_elems[e][1] = t;
    }
  }
  auto referenced = [&](int e) { return s.edge_elems[e][0] >= 0; };
  for (int e = 0; e < static_cast<int>(m.edges.size()); ++e) {
    if (!referenced(e)) continue;
    const auto& rec = m.edges[e];
    if (rec.boundary || s.edge_elems[e][1] >= 0) {
      s.edge_status[e] = Skeleton::Regular;
    } else if (rec.child[0] >= 0 && (referenced(rec.child[0]) || referenced(rec.child[1]))) {
      s.edge_status[e] = Skeleton::Regular;  // carrier; far side one level finer
    } else if (rec.parent >= 0 && referenced(rec.parent)) {
      s.edge_status[e] = Skeleton::Constrained;
    } else {
      throw std::logic_error("build_skeleton: nonconforming edge (irregularity > 1?)");
    }
  }
  for (int t : s.active) {
    const int p = m.elems[t].order;
    for (int e : m.elems[t].edge) {
      const int carrier = s.edge_status[e] == Skeleton::Constrained ? m.edges[e].parent : e;
      s.edge_order[carrier] = std::min(s.edge_order[carrier], p);
    }
  }
  for (int e = 0; e < static_cast<int>(m.edges.size()); ++e) {
    if (s.edge_status[e] != Skeleton::Regular || m.edges[e].child[0] < 0) continue;
    if (s.edge_status[m.edges[e].child[0]] == Skeleton::Constrained ||
        s.edge_status[m.edges[e].child[1]] == Skeleton::Constrained)
      s.vertex_hanging[m.edges[e].midpoint] = 1;
  }
  return s;
}

namespace {

int split_edge(Mesh& m, int e) {
  auto& rec = m.edges[e];
  if (rec.child[0] >= 0) return rec.midpoint;
  const auto& a = m.vertices[rec.v0];
  const auto& b = m.vertices[rec.v1];
  const int mid = static_cast<int>(m.vertices.size());
  m.vertices.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
  const int c0 = static_cast<int>(m.edges.size());
  EdgeRec lo{m.edges[e].v0, mid, m.edges[e].boundary, e};
  EdgeRec hi{mid, m.edges[e].v1, m.edges[e].boundary, e};
  m.edges.push_back(lo);
  m.edges.push_back(hi);
  m.edges[e].child = {c0, c0 + 1};
  m.edges[e].midpoint = mid;
  return mid;
}

}  // namespace

Mesh refine(const Mesh& m, const std::vector<Mark>& marked) {
  Skeleton skel = build_skeleton(m);
  std::vector<char> h_set(m.elems.size(), 0), p_set(m.elems.size(), 0);
  for (const auto& mk : marked) {
    if (mk.elem < 0 || mk.elem >= static_cast<int>(m.elems.size()) || !m.elems[mk.elem].active)
      throw std::invalid_argument("refine: mark targets an inactive element");
    (mk.kind == MarkKind::H ? h_set : p_set)[mk.elem] = 1;
  }
  // One-irregularity closure: splitting an element whose edge hangs off a
  // coarser neighbor forces that neighbor to split too.
  std::vector<int> queue;
  for (int t = 0; t < static_cast<int>(m.elems.size()); ++t)
    if (h_set[t]) queue.push_back(t);
  while (!queue.empty()) {
    const int t = queue.back();
    queue.pop_back();
    for (int e : m.elems[t].edge) {
      if (skel.edge_status[e] != Skeleton::Constrained) continue;
      const int coarse = skel.edge_elems[m.edges[e].parent][0];
      if (!h_set[coarse]) {
        h_set[coarse] = 1;
        p_set[coarse] = 0;  // closure wins over a p-mark
        queue.push_back(coarse);
      }
    }
  }
  Mesh out = m;
  for (int t = 0; t < static_cast<int>(m.elems.size()); ++t) {
    if (!p_set[t] || h_set[t]) continue;
    if (out.elems[t].order >= out.p_max) throw OrderCapReached(t);
    out.elems[t].order += 1;
  }
  for (int t = 0; t < static_cast<int>(m.elems.size()); ++t) {
    if (!h_set[t]) continue;
    const ElemRec el = out.elems[t];  // by value: element/edge arrays grow below
    const Rect r = out.rect(t);
    const int mb = split_edge(out, el.edge[0]);
    const int mr = split_edge(out, el.edge[1]);
    const int mt = split_edge(out, el.edge[2]);
    const int ml = split_edge(out, el.edge[3]);
    const int ctr = static_cast<int>(out.vertices.size());
    out.vertices.push_back({r.x0 + 0.5 * r.hx, r.y0 + 0.5 * r.hy});
    const int cs = static_cast<int>(out.edges.size());
    out.edges.push_back({mb, ctr, false, -1, {-1, -1}, -1, t});  // south cross (vertical)
    const int cn = cs + 1;
    out.edges.push_back({ctr, mt, false, -1, {-1, -1}, -1, t});
    const int cw = cs + 2;
    out.edges.push_back({ml, ctr, false, -1, {-1, -1}, -1, t});  // west cross (horizontal)
    const int ce = cs + 3;
    out.edges.push_back({ctr, mr, false, -1, {-1, -1}, -1, t});
    const auto& eb = out.edges[el.edge[0]].child;
    const auto& er = out.edges[el.edge[1]].child;
    const auto& et = out.edges[el.edge[2]].child;
    const auto& el4 = out.edges[el.edge[3]].child;
    const int base = static_cast<int>(out.elems.size());
    ElemRec ch;
    ch.order = el.order;
    ch.level = el.level + 1;
    ch.parent = t;
    ch.corner = {el.corner[0], mb, ctr, ml};
    ch.edge = {eb[0], cs, cw, el4[0]};
    out.elems.push_back(ch);
    ch.corner = {mb, el.corner[1], mr, ctr};
    ch.edge = {eb[1], er[0], ce, cs};
    out.elems.push_back(ch);
    ch.corner = {ctr, mr, el.corner[2], mt};
    ch.edge = {ce, er[1], et[1], cn};
    out.elems.push_back(ch);
    ch.corner = {ml, ctr, mt, el.corner[3]};
    ch.edge = {cw, cn, et[0], el4[1]};
    out.elems.push_back(ch);
    out.elems[t].active = false;
    out.elems[t].child = {base, base + 1, base + 2, base + 3};
  }
  return out;
}

std::vector<int> dorfler_mark(const std::vector<double>& values, double theta) {
  if (theta <= 0.0 || theta >= 1.0) throw std::invalid_argument("dorfler_mark: theta in (0,1)");
  const double total = std::accumulate(values.begin(), values.end(), 0.0);
  if (total <= 0.0) throw AllZeroIndicators();
  std::vector<int> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return a < b;
  });
  std::vector<int> out;
  double acc = 0.0;
  for (int i : idx) {
    out.push_back(i);
    acc += values[i];
    if (acc >= theta * total) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool wavelength_h_refine(const Mesh& m, int elem, double omega, double wavespeed) {
  const double lambda = 2.0 * M_PI * wavespeed / omega;
  return m.max_edge_len(elem) >= 0.5 * lambda;
}

std::vector<PatchGeom> vertex_patch_geometry(const Mesh& m, const Skeleton& skel) {
  std::vector<PatchGeom> out;
  std::vector<Rect> rects(skel.active.size());
  for (size_t k = 0; k < skel.active.size(); ++k) rects[k] = m.rect(skel.active[k]);
  for (int v = 0; v < static_cast<int>(m.vertices.size()); ++v) {
    if (!skel.vertex_active[v]) continue;
    PatchGeom pg;
    pg.anchor = v;
    const double x = m.vertices[v].x, y = m.vertices[v].y;
    for (size_t k = 0; k < skel.active.size(); ++k) {
      const Rect& r = rects[k];
      if (x >= r.x0 && x <= r.x0 + r.hx && y >= r.y0 && y <= r.y0 + r.hy)
        pg.elems.push_back(skel.active[k]);
    }
    out.push_back(std::move(pg));
  }
  return out;
}

bool point_covered(const Mesh& m, const std::vector<int>& elems, double x, double y) {
  for (int t : elems) {
    const Rect r = m.rect(t);
    if (x >= r.x0 && x <= r.x0 + r.hx && y >= r.y0 && y <= r.y0 + r.hy) return true;
  }
  return false;
}

bool segment_covered(const Mesh& m, const std::vector<int>& elems, double x0, double y0, double x1,
                     double y1) {
  const bool horizontal = y0 == y1;
  const double fixed = horizontal ? y0 : x0;
  double lo = horizontal ? x0 : y0, hi = horizontal ? x1 : y1;
  if (lo > hi) std::swap(lo, hi);
  std::vector<std::pair<double, double>> iv;
  for (int t : elems) {
    const Rect r = m.rect(t);
    const double flo = horizontal ? r.y0 : r.x0;
    const double fhi = horizontal ? r.y0 + r.hy : r.x0 + r.hx;
    if (fixed < flo || fixed > fhi) continue;
    const double alo = horizontal ? r.x0 : r.y0;
    const double ahi = horizontal ? r.x0 + r.hx : r.y0 + r.hy;
    const double a = std::max(alo, lo), b = std::min(ahi, hi);
    if (a < b) iv.emplace_back(a, b);
  }
  std::sort(iv.begin(), iv.end());
  double cover = lo;
  for (const auto& [a, b] : iv) {
    if (a > cover) return false;
    cover = std::max(cover, b);
  }
  return cover >= hi;
}

}  // namespace dpgmg
