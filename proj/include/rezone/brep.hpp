#pragma once

#include "rezone/plane.hpp"
#include "rezone/rational.hpp"

#include <nlohmann/json_fwd.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace rezone {

enum class BRepErrorKind {
  BadDocument,
  NonPlanarFace,
  NotWatertight,
  DegenerateFace,
  BadOrientation,
};

struct BRepError : std::runtime_error {
  BRepErrorKind kind;
  BRepError(BRepErrorKind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

struct Face {
  std::vector<int> loop;  // vertex ids, counter-clockwise seen from outside
  int plane_id = -1;
  bool flipped = false;  // outward normal = (flipped ? -1 : +1) * plane normal

  std::vector<std::pair<int, int>> edges() const;
};

// Maximal collinear run of a face's outer wire. Clean quads have four.
struct GeometricEdge {
  int first_vertex = 0;
  int last_vertex = 0;
  Vec3i direction;                             // canonical
  std::vector<std::pair<int, int>> segments;   // unit vertex-pair edges, undirected order as traversed
};

struct FaceLoop {
  std::vector<int> face_ids;  // ordered cycle
  Vec3i direction;            // canonical extrusion direction
};

struct BRep {
  std::vector<Vec3r> vertices;
  std::vector<Face> faces;
  std::vector<Plane> planes;  // deduplicated, canonical
  Vec3r aabb_min, aabb_max;

  Vec3r outward_normal_r(int face_id) const;
  Rat signed_volume() const;  // positive for valid solids
};

bool operator==(const BRep& a, const BRep& b);

BRep parse_brep(const nlohmann::json& doc);
nlohmann::ordered_json serialize_brep(const BRep& b);

std::vector<GeometricEdge> geometric_edges(const BRep& b, int face_id);

// All maximal cycles of 4-geometric-edge faces connected across exactly
// matching parallel edges; deterministic order.
std::vector<FaceLoop> find_face_loops(const BRep& b);

// Re-checks the three loop conditions on a candidate loop (test support).
bool check_face_loop(const BRep& b, const FaceLoop& loop);

}  // namespace rezone
