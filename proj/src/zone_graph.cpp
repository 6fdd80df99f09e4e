#include "rezone/zone_graph.hpp"

#include "rezone/json_util.hpp"

#include <algorithm>
#include <map>

namespace rezone {

namespace {

// A face swept along its loop direction, restricted to its own plane: the
// in-plane strip between the two support lines of the face's bounding box
// perpendicular to the (in-plane) direction. A loop plane is applied to a
// cell only when the cell's cross-section polygon meets one of these strips
// with positive area.
struct SweptStrip {
  Vec2r perp;
  Rat lo, hi;
};

SweptStrip face_strip(const std::pair<Vec3i, Vec3i>& frame, const BRep& b, const Face& face,
                      const Vec3i& dir) {
  Vec2r d2 = project_to_frame(frame, to_rat(dir));
  SweptStrip strip;
  strip.perp = Vec2r(-d2[1], d2[0]);
  bool first = true;
  for (int id : face.loop) {
    Vec2r q = project_to_frame(frame, b.vertices[id]);
    Rat v = strip.perp[0] * q[0] + strip.perp[1] * q[1];
    if (first) {
      strip.lo = strip.hi = v;
      first = false;
    } else {
      strip.lo = std::min(strip.lo, v);
      strip.hi = std::max(strip.hi, v);
    }
  }
  return strip;
}

// Positive-area overlap between a convex section polygon and a strip.
bool section_meets_strip(const std::vector<Vec2r>& section, const SweptStrip& strip) {
  std::vector<Vec2r> poly = section;
  // Clip by perp . q >= lo, i.e. left of the directed line with normal perp.
  auto clip = [&](const std::vector<Vec2r>& in, const Vec2r& n, const Rat& c, bool ge) {
    std::vector<Vec2r> out;
    const int k = static_cast<int>(in.size());
    for (int i = 0; i < k; ++i) {
      const Vec2r& p = in[i];
      const Vec2r& q = in[(i + 1) % k];
      Rat fp = n[0] * p[0] + n[1] * p[1] - c;
      Rat fq = n[0] * q[0] + n[1] * q[1] - c;
      if (!ge) {
        fp = -fp;
        fq = -fq;
      }
      if (fp >= 0) out.push_back(p);
      if ((fp > 0 && fq < 0) || (fp < 0 && fq > 0)) {
        Rat t = fp / (fp - fq);
        out.push_back(Vec2r(p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])));
      }
    }
    return out;
  };
  poly = clip(poly, strip.perp, strip.lo, true);
  if (poly.size() < 3) return false;
  poly = clip(poly, strip.perp, strip.hi, false);
  if (poly.size() < 3) return false;
  Rat a2 = polygon_area2_2d(poly);
  return a2 != 0;
}

int dominant_axis(const Vec3i& n) {
  using boost::multiprecision::abs;
  BigInt ax = abs(n[0]), ay = abs(n[1]), az = abs(n[2]);
  if (ax >= ay && ax >= az) return 0;
  if (ay >= az) return 1;
  return 2;
}

Vec2r drop_axis(const Vec3r& p, int axis) {
  switch (axis) {
    case 0: return Vec2r(p[1], p[2]);
    case 1: return Vec2r(p[0], p[2]);
    default: return Vec2r(p[0], p[1]);
  }
}

int orient2d(const Vec2r& a, const Vec2r& b, const Vec2r& c) {
  return sign((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
}

// 0 = outside, 1 = inside, 2 = on the boundary.
int point_in_polygon_2d(const std::vector<Vec2r>& poly, const Vec2r& q) {
  const int k = static_cast<int>(poly.size());
  for (int i = 0; i < k; ++i) {
    const Vec2r& a = poly[i];
    const Vec2r& b = poly[(i + 1) % k];
    if (orient2d(a, b, q) == 0 && std::min(a[0], b[0]) <= q[0] && q[0] <= std::max(a[0], b[0]) &&
        std::min(a[1], b[1]) <= q[1] && q[1] <= std::max(a[1], b[1]))
      return 2;
  }
  int crossings = 0;
  for (int i = 0; i < k; ++i) {
    const Vec2r& a = poly[i];
    const Vec2r& b = poly[(i + 1) % k];
    if ((a[1] > q[1]) != (b[1] > q[1])) {
      Rat xint = a[0] + (q[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
      if (xint > q[0]) ++crossings;
    }
  }
  return crossings & 1;
}

// -1 degenerate (retry with another direction), else parity result.
int try_ray_cast(const BRep& b, const Vec3r& p, const Vec3i& dir) {
  const Vec3r d = to_rat(dir);
  int crossings = 0;
  for (std::size_t fi = 0; fi < b.faces.size(); ++fi) {
    const Face& f = b.faces[fi];
    Vec3r n = b.outward_normal_r(static_cast<int>(fi));
    Rat plane_d = n.dot(b.vertices[f.loop[0]]);
    Rat s = n.dot(d);
    Rat off = n.dot(p) - plane_d;
    if (s == 0) {
      if (off == 0) return -1;  // ray lies in the face plane
      continue;
    }
    Rat t = -off / s;
    if (t < 0) continue;
    Vec3r q = p + d * t;
    int axis = dominant_axis(canonical_direction(n));
    std::vector<Vec2r> poly;
    poly.reserve(f.loop.size());
    for (int id : f.loop) poly.push_back(drop_axis(b.vertices[id], axis));
    int r = point_in_polygon_2d(poly, drop_axis(q, axis));
    if (r == 2) return -1;
    if (r == 1) {
      if (t == 0) return -1;  // the query point sits on the surface
      ++crossings;
    }
  }
  return crossings & 1;
}

const Vec3i kRayDirections[] = {
    {BigInt(3), BigInt(1), BigInt(7)},   {BigInt(7), BigInt(3), BigInt(1)},
    {BigInt(1), BigInt(7), BigInt(3)},   {BigInt(5), BigInt(11), BigInt(2)},
    {BigInt(11), BigInt(2), BigInt(5)},  {BigInt(2), BigInt(5), BigInt(11)},
    {BigInt(13), BigInt(3), BigInt(17)}, {BigInt(17), BigInt(13), BigInt(3)},
    {BigInt(3), BigInt(17), BigInt(13)}, {BigInt(19), BigInt(23), BigInt(5)},
    {BigInt(23), BigInt(5), BigInt(19)}, {BigInt(5), BigInt(19), BigInt(23)},
    {BigInt(29), BigInt(7), BigInt(31)}, {BigInt(31), BigInt(29), BigInt(7)},
    {BigInt(7), BigInt(31), BigInt(29)}, {BigInt(37), BigInt(41), BigInt(43)},
};

}  // namespace

bool point_inside_brep(const BRep& b, const Vec3r& p) {
  for (const Vec3i& dir : kRayDirections) {
    int r = try_ray_cast(b, p, dir);
    if (r >= 0) return r == 1;
  }
  throw std::logic_error("ray cast degenerate in every candidate direction");
}

int ZoneGraph::locate(const Vec3r& p) const {
  for (const Zone& z : zones) {
    if (z.cell.contains(p, false)) {
      if (z.cell.contains(p, true)) return z.id;
      return -1;  // on a boundary
    }
  }
  return -1;
}

Rat zone_volume(const Zone& z) { return z.cell.volume_from_point(z.rep_point); }

ZoneGraph build_zone_graph(const BRep& b, const std::vector<FaceLoop>& loops,
                           const ZoneGraphConfig& cfg) {
  ZoneGraph zg;
  zg.aabb_min = b.aabb_min;
  zg.aabb_max = b.aabb_max;
  zg.simplified = cfg.simplify;
  zg.planes = b.planes;
  std::sort(zg.planes.begin(), zg.planes.end());

  // Conservative face extension: a plane whose supporting faces all belong to
  // loops is applied to a cell only when the cell's cross-section meets the
  // in-plane swept strip of one of those faces.
  std::vector<bool> loop_restricted(zg.planes.size(), false);
  std::vector<std::vector<SweptStrip>> strips(zg.planes.size());
  if (cfg.simplify) {
    std::map<Plane, int> plane_idx;
    for (std::size_t i = 0; i < zg.planes.size(); ++i)
      plane_idx[zg.planes[i]] = static_cast<int>(i);
    std::vector<std::vector<Vec3i>> face_dirs(b.faces.size());
    for (const FaceLoop& fl : loops)
      for (int f : fl.face_ids) face_dirs[f].push_back(fl.direction);

    std::vector<bool> all_in_loops(zg.planes.size(), true);
    std::vector<std::vector<int>> plane_faces(zg.planes.size());
    for (std::size_t fi = 0; fi < b.faces.size(); ++fi) {
      int pid = plane_idx.at(b.planes[b.faces[fi].plane_id]);
      plane_faces[pid].push_back(static_cast<int>(fi));
      if (face_dirs[fi].empty()) all_in_loops[pid] = false;
    }
    for (std::size_t pid = 0; pid < zg.planes.size(); ++pid) {
      if (plane_faces[pid].empty() || !all_in_loops[pid]) continue;
      loop_restricted[pid] = true;
      auto frame = plane_frame(zg.planes[pid].dir());
      for (int fi : plane_faces[pid])
        for (const Vec3i& dir : face_dirs[fi])
          strips[pid].push_back(face_strip(frame, b, b.faces[fi], dir));
    }
  }

  ConvexCell root = ConvexCell::box(zg.aabb_min, zg.aabb_max);
  {
    std::map<Plane, int> plane_idx;
    for (std::size_t i = 0; i < zg.planes.size(); ++i)
      plane_idx[zg.planes[i]] = static_cast<int>(i);
    for (CellFacet& f : root.facets) {
      auto it = plane_idx.find(f.plane);
      if (it != plane_idx.end()) f.plane_id = it->second;
    }
  }

  std::vector<ConvexCell> cells{std::move(root)};
  for (std::size_t pid = 0; pid < zg.planes.size(); ++pid) {
    const Plane& pl = zg.planes[pid];
    auto frame = plane_frame(pl.dir());
    std::vector<ConvexCell> next;
    next.reserve(cells.size() + 4);
    for (ConvexCell& cell : cells) {
      SplitResult sr = split_cell(cell, pl, static_cast<int>(pid));
      if (!sr.neg || !sr.pos) {
        next.push_back(std::move(sr.neg ? *sr.neg : *sr.pos));
        continue;
      }
      if (loop_restricted[pid]) {
        // The section polygon of the would-be cut, in the plane frame.
        std::vector<Vec2r> section;
        for (const CellFacet& f : sr.neg->facets)
          if (f.plane_id == static_cast<int>(pid)) {
            for (int id : f.loop)
              section.push_back(project_to_frame(frame, sr.neg->verts[id]));
            break;
          }
        bool apply = false;
        for (const SweptStrip& strip : strips[pid])
          if (section_meets_strip(section, strip)) {
            apply = true;
            break;
          }
        if (!apply) {
          next.push_back(std::move(cell));
          continue;
        }
      }
      next.push_back(std::move(*sr.neg));
      next.push_back(std::move(*sr.pos));
    }
    cells = std::move(next);
    if (static_cast<int>(cells.size()) > cfg.zone_cap)
      throw TooManyZones("zone count exceeds cap of " + std::to_string(cfg.zone_cap));
  }

  // Stable zone ids: order cells by representative point.
  std::vector<std::pair<Vec3r, std::size_t>> order;
  order.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) order.emplace_back(cells[i].vertex_centroid(), i);
  std::sort(order.begin(), order.end(),
            [](const auto& a, const auto& b) { return Vec3rLess{}(a.first, b.first); });

  zg.zones.reserve(cells.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    Zone z;
    z.id = static_cast<int>(rank);
    z.cell = std::move(cells[order[rank].second]);
    z.rep_point = order[rank].first;
    z.volume = z.cell.volume();
    z.signs.resize(zg.planes.size(), ZoneSign::Skipped);
    for (std::size_t pid = 0; pid < zg.planes.size(); ++pid) {
      bool any_neg = false, any_pos = false;
      for (const Vec3r& v : z.cell.verts) {
        int s = zg.planes[pid].side(v);
        any_neg |= s < 0;
        any_pos |= s > 0;
      }
      if (!any_pos)
        z.signs[pid] = ZoneSign::Negative;
      else if (!any_neg)
        z.signs[pid] = ZoneSign::Positive;
    }
    zg.zones.push_back(std::move(z));
  }

  // Adjacency: overlap of facets across each plane, kept when the shared
  // polygon has positive area.
  zg.adjacency.assign(zg.zones.size(), {});
  for (std::size_t pid = 0; pid < zg.planes.size(); ++pid) {
    const Vec3i n = zg.planes[pid].dir();
    auto frame = plane_frame(n);
    struct FacetRef {
      int zone;
      std::vector<Vec3r> poly3;
      std::vector<Vec2r> poly2;
    };
    std::vector<FacetRef> neg_side, pos_side;
    for (const Zone& z : zg.zones) {
      for (const CellFacet& f : z.cell.facets) {
        if (f.plane_id != static_cast<int>(pid)) continue;
        FacetRef ref;
        ref.zone = z.id;
        ref.poly3 = z.cell.facet_polygon_ccw_plus(f);
        for (const Vec3r& p : ref.poly3) ref.poly2.push_back(project_to_frame(frame, p));
        (f.outward_pos ? neg_side : pos_side).push_back(std::move(ref));
      }
    }
    for (const FacetRef& fa : neg_side) {
      for (const FacetRef& fb : pos_side) {
        std::vector<Vec2r> inter = convex_intersect_2d(fa.poly2, fb.poly2);
        if (inter.size() < 3) continue;
        Rat area2 = polygon_area2_2d(inter);
        if (area2 == 0) continue;
        // Lift the clip back to 3D by re-clipping the 3D polygon.
        std::vector<Vec3r> poly3 = fa.poly3;
        std::vector<Vec2r> poly2 = fa.poly2;
        const int kb = static_cast<int>(fb.poly2.size());
        for (int i = 0; i < kb && poly3.size() >= 3; ++i) {
          const Vec2r& ca = fb.poly2[i];
          const Vec2r& cb = fb.poly2[(i + 1) % kb];
          auto fline = [&](const Vec2r& p) {
            return (cb[0] - ca[0]) * (p[1] - ca[1]) - (cb[1] - ca[1]) * (p[0] - ca[0]);
          };
          std::vector<Vec3r> out3;
          std::vector<Vec2r> out2;
          const int k = static_cast<int>(poly3.size());
          for (int j = 0; j < k; ++j) {
            Rat fp = fline(poly2[j]), fq = fline(poly2[(j + 1) % k]);
            if (fp >= 0) {
              out3.push_back(poly3[j]);
              out2.push_back(poly2[j]);
            }
            if ((fp > 0 && fq < 0) || (fp < 0 && fq > 0)) {
              Rat t = fp / (fp - fq);
              out3.push_back(poly3[j] + (poly3[(j + 1) % k] - poly3[j]) * t);
              out2.push_back(poly2[j] + (poly2[(j + 1) % k] - poly2[j]) * t);
            }
          }
          poly3 = std::move(out3);
          poly2 = std::move(out2);
        }
        std::vector<Vec3r> dedup;
        for (const Vec3r& p : poly3)
          if (dedup.empty() || !vec_eq(dedup.back(), p)) dedup.push_back(p);
        while (dedup.size() > 1 && vec_eq(dedup.front(), dedup.back())) dedup.pop_back();
        if (dedup.size() < 3) continue;
        Rat area_sq = polygon_area_sq(dedup);
        if (area_sq == 0) continue;
        ZoneEdge e;
        e.zone_a = fa.zone;
        e.zone_b = fb.zone;
        e.plane_id = static_cast<int>(pid);
        e.area_sq = area_sq;
        e.polygon = std::move(dedup);
        int eid = static_cast<int>(zg.edges.size());
        zg.adjacency[e.zone_a].push_back(eid);
        zg.adjacency[e.zone_b].push_back(eid);
        zg.edges.push_back(std::move(e));
      }
    }
  }
  return zg;
}

void classify_zones(ZoneGraph& zg, const BRep& b) {
  zg.interior_ids.clear();
  for (Zone& z : zg.zones) {
    z.interior = point_inside_brep(b, z.rep_point);
    if (z.interior) zg.interior_ids.push_back(z.id);
  }
}

nlohmann::ordered_json zone_graph_to_json(const ZoneGraph& zg) {
  nlohmann::ordered_json doc;
  auto& planes = doc["planes"] = nlohmann::ordered_json::array();
  for (const Plane& p : zg.planes)
    planes.push_back({rat_to_json(Rat(p.a)), rat_to_json(Rat(p.b)), rat_to_json(Rat(p.c)),
                      rat_to_json(Rat(p.d))});
  doc["aabb"] = {{"min", vec3_to_json(zg.aabb_min)}, {"max", vec3_to_json(zg.aabb_max)}};
  doc["simplified"] = zg.simplified;
  auto& zones = doc["zones"] = nlohmann::ordered_json::array();
  for (const Zone& z : zg.zones) {
    nlohmann::ordered_json zj;
    zj["id"] = z.id;
    std::string signs;
    for (ZoneSign s : z.signs)
      signs += s == ZoneSign::Positive ? '+' : s == ZoneSign::Negative ? '-' : 's';
    zj["signs"] = signs;
    zj["volume"] = rat_to_string(z.volume);
    zj["rep_point"] = vec3_to_json(z.rep_point);
    auto& vs = zj["verts"] = nlohmann::ordered_json::array();
    for (const Vec3r& v : z.cell.verts) vs.push_back(vec3_to_json(v));
    auto& fs = zj["facets"] = nlohmann::ordered_json::array();
    for (const CellFacet& f : z.cell.facets) {
      nlohmann::ordered_json fj;
      fj["plane"] = {rat_to_json(Rat(f.plane.a)), rat_to_json(Rat(f.plane.b)),
                     rat_to_json(Rat(f.plane.c)), rat_to_json(Rat(f.plane.d))};
      fj["plane_id"] = f.plane_id;
      fj["outward_pos"] = f.outward_pos;
      fj["loop"] = f.loop;
      fs.push_back(std::move(fj));
    }
    zones.push_back(std::move(zj));
  }
  auto& edges = doc["edges"] = nlohmann::ordered_json::array();
  for (const ZoneEdge& e : zg.edges) {
    nlohmann::ordered_json ej;
    ej["a"] = e.zone_a;
    ej["b"] = e.zone_b;
    ej["plane"] = e.plane_id;
    ej["area_sq"] = rat_to_string(e.area_sq);
    auto& poly = ej["polygon"] = nlohmann::ordered_json::array();
    for (const Vec3r& p : e.polygon) poly.push_back(vec3_to_json(p));
    edges.push_back(std::move(ej));
  }
  doc["interior"] = zg.interior_ids;
  return doc;
}

ZoneGraph zone_graph_from_json(const nlohmann::json& doc) {
  ZoneGraph zg;
  for (const auto& pj : doc.at("planes")) {
    zg.planes.push_back(Plane::from_rational(json_to_rat(pj[0]), json_to_rat(pj[1]),
                                             json_to_rat(pj[2]), json_to_rat(pj[3])));
  }
  zg.aabb_min = vec3_from_json(doc.at("aabb").at("min"));
  zg.aabb_max = vec3_from_json(doc.at("aabb").at("max"));
  zg.simplified = doc.at("simplified").get<bool>();
  for (const auto& zj : doc.at("zones")) {
    Zone z;
    z.id = zj.at("id").get<int>();
    const std::string signs = zj.at("signs").get<std::string>();
    for (char c : signs)
      z.signs.push_back(c == '+' ? ZoneSign::Positive
                                 : c == '-' ? ZoneSign::Negative : ZoneSign::Skipped);
    z.volume = rat_from_string(zj.at("volume").get<std::string>());
    z.rep_point = vec3_from_json(zj.at("rep_point"));
    for (const auto& vj : zj.at("verts")) z.cell.verts.push_back(vec3_from_json(vj));
    for (const auto& fj : zj.at("facets")) {
      CellFacet f;
      const auto& pj = fj.at("plane");
      f.plane = Plane::from_rational(json_to_rat(pj[0]), json_to_rat(pj[1]), json_to_rat(pj[2]),
                                     json_to_rat(pj[3]));
      f.plane_id = fj.at("plane_id").get<int>();
      f.outward_pos = fj.at("outward_pos").get<bool>();
      f.loop = fj.at("loop").get<std::vector<int>>();
      z.cell.facets.push_back(std::move(f));
    }
    zg.zones.push_back(std::move(z));
  }
  zg.adjacency.assign(zg.zones.size(), {});
  for (const auto& ej : doc.at("edges")) {
    ZoneEdge e;
    e.zone_a = ej.at("a").get<int>();
    e.zone_b = ej.at("b").get<int>();
    e.plane_id = ej.at("plane").get<int>();
    e.area_sq = rat_from_string(ej.at("area_sq").get<std::string>());
    for (const auto& pj : ej.at("polygon")) e.polygon.push_back(vec3_from_json(pj));
    int eid = static_cast<int>(zg.edges.size());
    zg.adjacency[e.zone_a].push_back(eid);
    zg.adjacency[e.zone_b].push_back(eid);
    zg.edges.push_back(std::move(e));
  }
  for (int id : doc.at("interior").get<std::vector<int>>()) {
    zg.interior_ids.push_back(id);
    zg.zones[id].interior = true;
  }
  return zg;
}

}  // namespace rezone
