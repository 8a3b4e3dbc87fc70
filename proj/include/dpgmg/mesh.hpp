#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpgmg {

/// Quadtree mesh of axis-aligned rectangles on (0,1)^2. Entity arrays are
/// append-only: refining copies the mesh and appends, so ids remain stable
/// across a refinement lineage and "existed at step k" is an id comparison.
struct Vertex {
  double x, y;
};

struct EdgeRec {
  int v0, v1;        ///< endpoints in increasing-coordinate order
  bool boundary;
  int parent = -1;
  std::array<int, 2> child{-1, -1};  ///< [0] lower-coordinate half
  int midpoint = -1;                 ///< vertex id once split
  int origin_elem = -1;              ///< creating element for cross edges, else -1
};

struct ElemRec {
  std::array<int, 4> corner;  ///< SW, SE, NE, NW
  std::array<int, 4> edge;    ///< bottom, right, top, left (at this element's extent)
  int order;
  int level;
  int parent = -1;
  std::array<int, 4> child{-1, -1, -1, -1};  ///< SW, SE, NE, NW
  bool active = true;
};

struct Rect {
  double x0, y0, hx, hy;
};

class Mesh {
 public:
  std::vector<Vertex> vertices;
  std::vector<EdgeRec> edges;
  std::vector<ElemRec> elems;
  int p_max = 5;

  /// Single unit-square element of order p0 with 4 boundary edges.
  static Mesh initial(int p0, int p_max = 5);

  std::vector<int> active_elems() const;
  int n_active_elems() const;
  Rect rect(int elem) const;
  double max_edge_len(int elem) const;
};

enum class MarkKind { H, P };
struct Mark {
  int elem;
  MarkKind kind;
};

/// One refinement step: h-marked elements split in four (children inherit the
/// order), p-marked elements gain one order, plus the h-refinements forced by
/// one-irregularity closure (closure wins over a p-mark on the same element).
/// Throws OrderCapReached if a p-mark targets an element already at p_max.
Mesh refine(const Mesh& m, const std::vector<Mark>& marked);

struct OrderCapReached : std::runtime_error {
  explicit OrderCapReached(int elem)
      : std::runtime_error("p-refinement requested at p_max for element " + std::to_string(elem)) {}
};

struct AllZeroIndicators : std::runtime_error {
  AllZeroIndicators() : std::runtime_error("all error indicators are zero") {}
};

/// Minimal-cardinality index set with sum >= theta * total, greedily built
/// from values sorted descending; ties broken toward the lower index.
std::vector<int> dorfler_mark(const std::vector<double>& values, double theta);

/// True if the element should be h-refined under the wavelength rule:
/// max edge length >= lambda/2 with lambda = 2*pi*c/omega.
bool wavelength_h_refine(const Mesh& m, int elem, double omega, double wavespeed);

/// Skeleton status of the active mesh. Regular edges carry degrees of
/// freedom; constrained edges are the half-edges of a regular carrier whose
/// far side is one level coarser.
struct Skeleton {
  enum Status : char { Unreferenced = 0, Regular = 1, Constrained = 2 };
  std::vector<char> edge_status;
  std::vector<std::array<int, 2>> edge_elems;  ///< active elements referencing the edge
  std::vector<int> edge_order;                 ///< minimum rule, regular edges only
  std::vector<char> vertex_active;
  std::vector<char> vertex_hanging;
  std::vector<int> active;  ///< active element ids
};
Skeleton build_skeleton(const Mesh& m);

/// Active elements whose closed rectangle contains each active vertex.
struct PatchGeom {
  int anchor;
  std::vector<int> elems;
};
std::vector<PatchGeom> vertex_patch_geometry(const Mesh& m, const Skeleton& skel);

/// True if the segment (axis-aligned) is covered by the union of the closed
/// element rectangles. Coordinates are dyadic, so comparisons are exact.
bool segment_covered(const Mesh& m, const std::vector<int>& elems, double x0, double y0, double x1,
                     double y1);
bool point_covered(const Mesh& m, const std::vector<int>& elems, double x, double y);

}  // namespace dpgmg
