#pragma once

#include "rezone/plane.hpp"
#include "rezone/rational.hpp"

#include <optional>
#include <vector>

namespace rezone {

// Closed halfspace n . x <= c.
struct Halfspace {
  Vec3r n;
  Rat c;
  bool contains(const Vec3r& p) const { return n.dot(p) <= c; }
};

struct CellFacet {
  Plane plane;
  int plane_id = -1;     // arrangement plane id, -1 for bare bounding-box walls
  bool outward_pos = true;  // outward normal = +plane normal when true
  std::vector<int> loop;    // vertex ids, counter-clockwise seen from outside
};

// Bounded convex polytope with full vertex/facet description. Facet loops are
// kept outward-oriented so volumes come straight from the divergence theorem.
struct ConvexCell {
  std::vector<Vec3r> verts;
  std::vector<CellFacet> facets;

  static ConvexCell box(const Vec3r& lo, const Vec3r& hi);

  Rat volume() const;
  // Volume by fanning tetrahedra from an interior apex; algebraically equal
  // to volume() but follows a different computation path.
  Rat volume_from_point(const Vec3r& apex) const;
  Vec3r vertex_centroid() const;
  bool contains(const Vec3r& p, bool strict) const;
  Vec3r outward_normal_r(const CellFacet& f) const {
    Vec3r n = f.plane.normal_r();
    return f.outward_pos ? n : Vec3r(-n);
  }
  // Facet polygon ordered counter-clockwise as seen from the +plane-normal side.
  std::vector<Vec3r> facet_polygon_ccw_plus(const CellFacet& f) const;
};

struct SplitResult {
  std::optional<ConvexCell> neg;  // side where plane.eval < 0
  std::optional<ConvexCell> pos;
};

// Splits the cell by the plane. When the cell does not straddle the plane the
// whole cell is returned on its side. plane_id is attached to the new section
// facets.
SplitResult split_cell(const ConvexCell& cell, const Plane& plane, int plane_id);

// True when the cell meets the intersection of the halfspaces in a set of
// positive volume.
bool intersects_region(const ConvexCell& cell, const std::vector<Halfspace>& region);

// Twice the signed area of a polygon in 2D (exact shoelace).
Rat polygon_area2_2d(const std::vector<Vec2r>& poly);

// Clips subject by the closed halfplane left of (a -> b); exact.
std::vector<Vec2r> clip_halfplane_2d(const std::vector<Vec2r>& subject, const Vec2r& a,
                                     const Vec2r& b);

// Intersection of two convex polygons (clip must be counter-clockwise);
// result may be degenerate (segment or point).
std::vector<Vec2r> convex_intersect_2d(const std::vector<Vec2r>& subject,
                                       const std::vector<Vec2r>& clip);

// Deduplicated vertices of a possibly-degenerate clip result.
std::vector<Vec2r> distinct_points_2d(const std::vector<Vec2r>& pts);

// Counter-clockwise convex hull (monotone chain, exact predicates).
std::vector<Vec2r> convex_hull_2d(std::vector<Vec2r> pts);

// Squared Euclidean area of a planar 3D polygon (exact rational).
Rat polygon_area_sq(const std::vector<Vec3r>& poly);

}  // namespace rezone
