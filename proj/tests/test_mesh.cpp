#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "dpgmg/mesh.hpp"

using namespace dpgmg;

namespace {

std::vector<Mark> mark_all(const Mesh& m, MarkKind k) {
  std::vector<Mark> marks;
  for (int e : m.active_elems()) marks.push_back({e, k});
  return marks;
}

int count_active_edges(const Mesh& m) {
  std::set<int> edges;
  for (int e : m.active_elems())
    for (int eid : m.elems[e].edge) edges.insert(eid);
  return static_cast<int>(edges.size());
}

bool edge_used_below(const Mesh& m, int eid, const std::vector<char>& used, int depth) {
  if (depth >= 2 && used[eid]) return true;
  for (int c : m.edges[eid].child)
    if (c >= 0 && edge_used_below(m, c, used, depth + 1)) return true;
  return false;
}

// no active element may see an edge subdivided more than one level on the
// other side
bool one_irregular(const Mesh& m) {
  std::vector<char> used(m.edges.size(), 0);
  for (int e : m.active_elems())
    for (int eid : m.elems[e].edge) used[eid] = 1;
  for (int e : m.active_elems())
    for (int eid : m.elems[e].edge)
      if (edge_used_below(m, eid, used, 0)) return false;
  return true;
}

bool same_mesh(const Mesh& a, const Mesh& b) {
  if (a.vertices.size() != b.vertices.size() || a.elems.size() != b.elems.size() ||
      a.edges.size() != b.edges.size())
    return false;
  for (size_t i = 0; i < a.vertices.size(); ++i)
    if (a.vertices[i].x != b.vertices[i].x || a.vertices[i].y != b.vertices[i].y) return false;
  for (size_t i = 0; i < a.elems.size(); ++i) {
    if (a.elems[i].corner != b.elems[i].corner || a.elems[i].edge != b.elems[i].edge ||
        a.elems[i].order != b.elems[i].order || a.elems[i].active != b.elems[i].active)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("initial mesh is a single boundary quad") {
  const Mesh m = Mesh::initial(2);
  CHECK(m.n_active_elems() == 1);
  CHECK(m.vertices.size() == 4);
  CHECK(m.edges.size() == 4);
  for (const auto& e : m.edges) CHECK(e.boundary);
  CHECK(m.elems[0].order == 2);

  const Mesh m3 = Mesh::initial(3);
  CHECK(m3.elems[0].order == 3);
  CHECK(m3.vertices.size() == 4);

  const Skeleton sk = build_skeleton(m);
  int interior = 0;
  for (size_t e = 0; e < m.edges.size(); ++e)
    if (sk.edge_status[e] != Skeleton::Unreferenced && !m.edges[e].boundary) ++interior;
  CHECK(interior == 0);
}

TEST_CASE("uniform refinement of the initial element") {
  const Mesh m0 = Mesh::initial(2);
  const Mesh m1 = refine(m0, mark_all(m0, MarkKind::H));
  CHECK(m1.n_active_elems() == 4);
  CHECK(count_active_edges(m1) == 12);  // 8 boundary halves + 4 interior cross edges
  for (int e : m1.active_elems()) CHECK(m1.elems[e].order == 2);  // children inherit
  CHECK(one_irregular(m1));
}

TEST_CASE("refining one element of four constrains the neighbors") {
  const Mesh m0 = Mesh::initial(2);
  const Mesh m1 = refine(m0, mark_all(m0, MarkKind::H));
  const Mesh m2 = refine(m1, {{m1.active_elems()[0], MarkKind::H}});
  CHECK(m2.n_active_elems() == 7);
  CHECK(one_irregular(m2));
  const Skeleton sk = build_skeleton(m2);
  int constrained = 0, hanging = 0;
  for (char s : sk.edge_status) constrained += s == Skeleton::Constrained;
  for (char h : sk.vertex_hanging) hanging += h;
  CHECK(constrained > 0);
  CHECK(hanging == 2);  // midpoints of the two interior edges facing coarse neighbors
}

TEST_CASE("p-marking raises orders without touching topology") {
  const Mesh m0 = Mesh::initial(2);
  const Mesh m1 = refine(m0, mark_all(m0, MarkKind::H));
  const Mesh m2 = refine(m1, mark_all(m1, MarkKind::P));
  CHECK(m2.n_active_elems() == 4);
  CHECK(m2.vertices.size() == m1.vertices.size());
  CHECK(m2.edges.size() == m1.edges.size());
  for (int e : m2.active_elems()) CHECK(m2.elems[e].order == 3);
}

TEST_CASE("p-refinement past the cap is rejected") {
  Mesh m = Mesh::initial(2, 3);
  m = refine(m, mark_all(m, MarkKind::P));  // 3 = p_max
  CHECK_THROWS_AS(refine(m, mark_all(m, MarkKind::P)), OrderCapReached);
}

TEST_CASE("closure keeps arbitrary refinement sequences one-irregular") {
  std::mt19937 gen(301);
  Mesh m = Mesh::initial(2, 6);
  for (int round = 0; round < 6; ++round) {
    const auto active = m.active_elems();
    std::vector<Mark> marks;
    for (int e : active)
      if (gen() % 3 == 0) {
        const bool want_p = gen() % 4 == 0 && m.elems[e].order < m.p_max;
        marks.push_back({e, want_p ? MarkKind::P : MarkKind::H});
      }
    if (marks.empty()) marks.push_back({active[0], MarkKind::H});
    m = refine(m, marks);
    CHECK(one_irregular(m));
    // every active element keeps a valid order
    for (int e : m.active_elems()) {
      CHECK(m.elems[e].order >= 2);
      CHECK(m.elems[e].order <= m.p_max);
    }
  }
}

TEST_CASE("replaying a mark history reproduces the mesh exactly") {
  auto build = [] {
    Mesh m = Mesh::initial(2);
    m = refine(m, {{0, MarkKind::H}});
    m = refine(m, {{m.active_elems()[1], MarkKind::H}, {m.active_elems()[2], MarkKind::P}});
    m = refine(m, {{m.active_elems()[0], MarkKind::H}});
    return m;
  };
  CHECK(same_mesh(build(), build()));
}

TEST_CASE("bulk marking") {
  SUBCASE("half the total picks the two largest") {
    const auto s = dorfler_mark({4.0, 3.0, 2.0, 1.0}, 0.5);
    CHECK(s == std::vector<int>{0, 1});
  }
  SUBCASE("theta near one picks everything") {
    const auto s = dorfler_mark({4.0, 3.0, 2.0, 1.0}, 0.999);
    CHECK(s.size() == 4);
  }
  SUBCASE("ties break toward lower indices") {
    const auto s = dorfler_mark({1.0, 1.0, 1.0, 1.0}, 0.5);
    CHECK(s == std::vector<int>{0, 1});
  }
  SUBCASE("all-zero indicators are an error") {
    CHECK_THROWS_AS(dorfler_mark({0.0, 0.0}, 0.5), AllZeroIndicators);
  }
  SUBCASE("the set is minimal") {
    std::mt19937 gen(302);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    std::vector<double> vals(17);
    for (auto& v : vals) v = d(gen);
    const double theta = 0.6;
    const auto s = dorfler_mark(vals, theta);
    double total = 0.0, picked = 0.0, smallest = 1e300;
    for (double v : vals) total += v;
    for (int i : s) {
      picked += vals[i];
      smallest = std::min(smallest, vals[i]);
    }
    CHECK(picked >= theta * total);
    CHECK(picked - smallest < theta * total);
  }
}

TEST_CASE("wavelength rule splits elements above half a wavelength") {
  Mesh m = Mesh::initial(2);
  const double omega = 2.0 * M_PI;  // wavelength 1 at unit speed
  CHECK(wavelength_h_refine(m, 0, omega, 1.0));  // edge 1 >= 0.5
  m = refine(m, mark_all(m, MarkKind::H));
  for (int e : m.active_elems()) CHECK(wavelength_h_refine(m, e, omega, 1.0));  // exactly 0.5
  m = refine(m, mark_all(m, MarkKind::H));
  for (int e : m.active_elems()) CHECK_FALSE(wavelength_h_refine(m, e, omega, 1.0));  // 0.25
}

TEST_CASE("vertex patch geometry") {
  SUBCASE("single element: every corner patch holds the element") {
    const Mesh m = Mesh::initial(2);
    const auto patches = vertex_patch_geometry(m, build_skeleton(m));
    CHECK(patches.size() == 4);
    for (const auto& p : patches) CHECK(p.elems == std::vector<int>{0});
  }
  SUBCASE("2x2 mesh: nine patches, the center one sees all four elements") {
    const Mesh m0 = Mesh::initial(2);
    const Mesh m = refine(m0, mark_all(m0, MarkKind::H));
    const auto patches = vertex_patch_geometry(m, build_skeleton(m));
    CHECK(patches.size() == 9);
    int full = 0;
    std::set<int> covered;
    for (const auto& p : patches) {
      if (p.elems.size() == 4) {
        ++full;
        const auto& v = m.vertices[p.anchor];
        CHECK(v.x == doctest::Approx(0.5));
        CHECK(v.y == doctest::Approx(0.5));
      }
      covered.insert(p.elems.begin(), p.elems.end());
    }
    CHECK(full == 1);
    CHECK(covered.size() == 4);  // overlapping cover of all active elements
  }
  SUBCASE("hanging mesh: patches still cover every active element") {
    Mesh m = Mesh::initial(2);
    m = refine(m, mark_all(m, MarkKind::H));
    m = refine(m, {{m.active_elems()[0], MarkKind::H}});
    const auto patches = vertex_patch_geometry(m, build_skeleton(m));
    std::set<int> covered;
    for (const auto& p : patches) covered.insert(p.elems.begin(), p.elems.end());
    const auto active = m.active_elems();
    CHECK(covered == std::set<int>(active.begin(), active.end()));
  }
}

TEST_CASE("segment and point coverage queries use closed rectangles") {
  Mesh m = Mesh::initial(2);
  m = refine(m, mark_all(m, MarkKind::H));
  const auto active = m.active_elems();
  CHECK(point_covered(m, active, 0.5, 0.5));
  CHECK(segment_covered(m, active, 0.0, 0.5, 1.0, 0.5));
  const std::vector<int> sw = {active[0]};  // south-west child only
  CHECK(point_covered(m, sw, 0.25, 0.25));
  CHECK_FALSE(point_covered(m, sw, 0.75, 0.75));
  CHECK_FALSE(segment_covered(m, sw, 0.0, 0.5, 1.0, 0.5));
}

TEST_CASE("geometry queries") {
  Mesh m = Mesh::initial(2);
  const Rect r = m.rect(0);
  CHECK(r.x0 == 0.0);
  CHECK(r.hx == 1.0);
  CHECK(m.max_edge_len(0) == 1.0);
  m = refine(m, {{0, MarkKind::H}});
  for (int e : m.active_elems()) CHECK(m.max_edge_len(e) == 0.5);
}
