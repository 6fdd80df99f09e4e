#pragma once

#include "rezone/brep.hpp"
#include "rezone/polytope.hpp"

#include <nlohmann/json_fwd.hpp>

#include <vector>

namespace rezone {

struct TooManyZones : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ZoneSign : int8_t { Negative = -1, Skipped = 0, Positive = 1 };

struct Zone {
  int id = -1;
  ConvexCell cell;
  std::vector<ZoneSign> signs;  // one per graph plane
  Rat volume;
  Vec3r rep_point;  // strictly interior (vertex centroid)
  bool interior = false;
};

struct ZoneEdge {
  int zone_a = -1;  // cell on the negative side of the plane
  int zone_b = -1;  // cell on the positive side
  int plane_id = -1;
  Rat area_sq;  // exact squared facet area
  std::vector<Vec3r> polygon;  // counter-clockwise seen from the +normal side
};

struct ZoneGraphConfig {
  bool simplify = false;
  int zone_cap = 20000;
};

struct ZoneGraph {
  std::vector<Plane> planes;  // canonical order
  std::vector<Zone> zones;
  std::vector<ZoneEdge> edges;
  std::vector<std::vector<int>> adjacency;  // zone id -> incident edge ids
  std::vector<int> interior_ids;            // sorted
  Vec3r aabb_min, aabb_max;
  bool simplified = false;

  Rat aabb_volume() const {
    return (aabb_max[0] - aabb_min[0]) * (aabb_max[1] - aabb_min[1]) *
           (aabb_max[2] - aabb_min[2]);
  }
  bool is_interior(int zone_id) const { return zones[zone_id].interior; }
  // Zone containing the point, or -1 when the point lies on a cell boundary.
  int locate(const Vec3r& p) const;
};

ZoneGraph build_zone_graph(const BRep& b, const std::vector<FaceLoop>& loops,
                           const ZoneGraphConfig& cfg = {});

// Labels interior zones by exact parity ray casting from each representative
// point, retrying over a fixed direction list until no degeneracy occurs.
void classify_zones(ZoneGraph& zg, const BRep& b);

Rat zone_volume(const Zone& z);

// Exact point-in-solid parity test used by classification (exposed for reuse).
bool point_inside_brep(const BRep& b, const Vec3r& p);

nlohmann::ordered_json zone_graph_to_json(const ZoneGraph& zg);
ZoneGraph zone_graph_from_json(const nlohmann::json& doc);

}  // namespace rezone
