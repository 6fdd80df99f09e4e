#include "rezone/proposal.hpp"

#include <algorithm>
#include <set>

namespace rezone {

std::string make_canonical_key(BoolType type, const std::vector<int>& zones) {
  std::string key = type == BoolType::Union ? "U" : "D";
  key += '|';
  for (std::size_t i = 0; i < zones.size(); ++i) {
    if (i) key += ',';
    key += std::to_string(zones[i]);
  }
  return key;
}

Canvas apply_extrusion(const ZoneGraph& zg, const Canvas& canvas, const Extrusion& e) {
  if (e.zones.empty()) throw InvalidApplication("extrusion covers no zones");
  ZoneSet x = ZoneSet::from_ids(static_cast<int>(zg.zones.size()), e.zones);
  Canvas out = canvas;
  if (e.type == BoolType::Union) {
    if (x.intersects(canvas.filled))
      throw InvalidApplication("union overlaps the canvas: " + e.canonical_key);
    out.filled |= x;
  } else {
    if (!x.is_subset_of(canvas.filled))
      throw InvalidApplication("difference leaves the canvas: " + e.canonical_key);
    out.filled -= x;
  }
  return out;
}

bool is_complete(const Canvas& canvas, const ZoneGraph& zg) {
  return canvas.filled ==
         ZoneSet::from_ids(static_cast<int>(zg.zones.size()), zg.interior_ids);
}

std::vector<PlanePair> enumerate_plane_pairs(const ZoneGraph& zg) {
  std::vector<PlanePair> out;
  const int np = static_cast<int>(zg.planes.size());
  for (int i = 0; i < np; ++i) {
    for (int j = 0; j < np; ++j) {
      if (i == j) continue;
      Vec3i di = zg.planes[i].dir();
      if (compare_vec3i(di, zg.planes[j].dir()) != 0) continue;
      Rat delta = zg.planes[j].offset() - zg.planes[i].offset();
      if (delta == 0) continue;  // cannot happen for deduplicated planes
      Vec3r dir_r = to_rat(di);
      Vec3r d = dir_r * (delta / dir_r.dot(dir_r));
      out.push_back({i, j, d});
    }
  }
  return out;
}

ProposalEngine::ProposalEngine(const ZoneGraph& zg) : zg_(zg) {
  target_ = ZoneSet::from_ids(static_cast<int>(zg.zones.size()), zg.interior_ids);
  pairs_ = enumerate_plane_pairs(zg);
  locals_.resize(zg.planes.size());
  plane_class_.resize(zg.planes.size(), -1);
  std::map<std::array<std::string, 3>, int> class_of;
  for (std::size_t i = 0; i < zg.planes.size(); ++i) {
    Vec3i d = zg.planes[i].dir();
    std::array<std::string, 3> key{d[0].str(), d[1].str(), d[2].str()};
    auto [it, ins] = class_of.try_emplace(key, static_cast<int>(class_of.size()));
    plane_class_[i] = it->second;
  }
  classes_.resize(class_of.size());
}

ProposalEngine::PlaneLocal& ProposalEngine::plane_local(int plane_id) {
  PlaneLocal& local = locals_[plane_id];
  if (local.built) return local;

  const Plane& pl = zg_.planes[plane_id];
  auto frame = plane_frame(pl.dir());

  // Wall planes carry one-sided facets; interior planes are fully covered by
  // adjacency facets.
  bool is_wall = false;
  for (int axis = 0; axis < 3 && !is_wall; ++axis) {
    Vec3r e(Rat(0), Rat(0), Rat(0));
    e[axis] = 1;
    is_wall = pl == Plane::from_rational(e[0], e[1], e[2], zg_.aabb_min[axis]) ||
              pl == Plane::from_rational(e[0], e[1], e[2], zg_.aabb_max[axis]);
  }

  if (is_wall) {
    for (const Zone& z : zg_.zones) {
      for (const CellFacet& f : z.cell.facets) {
        if (f.plane_id != plane_id) continue;
        SketchPiece piece;
        piece.poly3 = z.cell.facet_polygon_ccw_plus(f);
        for (const Vec3r& p : piece.poly3) piece.poly2.push_back(project_to_frame(frame, p));
        (f.outward_pos ? piece.zone_neg : piece.zone_pos) = z.id;
        local.pieces.push_back(std::move(piece));
      }
    }
  } else {
    for (const ZoneEdge& e : zg_.edges) {
      if (e.plane_id != plane_id) continue;
      SketchPiece piece;
      piece.poly3 = e.polygon;
      for (const Vec3r& p : piece.poly3) piece.poly2.push_back(project_to_frame(frame, p));
      piece.zone_neg = e.zone_a;
      piece.zone_pos = e.zone_b;
      local.pieces.push_back(std::move(piece));
    }
  }

  const int n = static_cast<int>(local.pieces.size());
  local.adjacency.assign(n, {});
  local.piece_area2.resize(n);
  local.piece_box.resize(n);
  for (int i = 0; i < n; ++i) {
    Rat a2 = polygon_area2_2d(local.pieces[i].poly2);
    local.piece_area2[i] = a2 < 0 ? Rat(-a2) : a2;
    Box2 box{local.pieces[i].poly2[0][0], local.pieces[i].poly2[0][0],
             local.pieces[i].poly2[0][1], local.pieces[i].poly2[0][1]};
    for (const Vec2r& q : local.pieces[i].poly2) {
      box.lo_u = std::min(box.lo_u, q[0]);
      box.hi_u = std::max(box.hi_u, q[0]);
      box.lo_v = std::min(box.lo_v, q[1]);
      box.hi_v = std::max(box.hi_v, q[1]);
    }
    local.piece_box[i] = std::move(box);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!local.piece_box[i].overlaps(local.piece_box[j])) continue;
      auto touch = convex_intersect_2d(local.pieces[i].poly2, local.pieces[j].poly2);
      if (distinct_points_2d(touch).size() >= 2) {
        local.adjacency[i].push_back(j);
        local.adjacency[j].push_back(i);
      }
    }
  }
  local.built = true;
  return local;
}

ProposalEngine::ClassCache& ProposalEngine::class_cache(int class_id) {
  ClassCache& cc = classes_[class_id];
  if (cc.built) return cc;
  Vec3i dir;
  for (std::size_t i = 0; i < zg_.planes.size(); ++i)
    if (plane_class_[i] == class_id) {
      dir = zg_.planes[i].dir();
      break;
    }
  cc.frame = plane_frame(dir);
  const Vec3r d = to_rat(dir);
  const int nz = static_cast<int>(zg_.zones.size());
  cc.span_lo.resize(nz);
  cc.span_hi.resize(nz);
  cc.hull.resize(nz);
  cc.hull_area2.resize(nz);
  cc.hull_box.resize(nz);
  for (const Zone& z : zg_.zones) {
    Rat lo = d.dot(z.cell.verts[0]), hi = lo;
    std::vector<Vec2r> pts;
    pts.reserve(z.cell.verts.size());
    for (const Vec3r& v : z.cell.verts) {
      Rat t = d.dot(v);
      lo = std::min(lo, t);
      hi = std::max(hi, t);
      pts.push_back(project_to_frame(cc.frame, v));
    }
    cc.span_lo[z.id] = lo;
    cc.span_hi[z.id] = hi;
    cc.hull[z.id] = convex_hull_2d(pts);
    cc.hull_area2[z.id] = polygon_area2_2d(cc.hull[z.id]);
    if (cc.hull_area2[z.id] < 0) cc.hull_area2[z.id] = -cc.hull_area2[z.id];
    Box2 box{pts[0][0], pts[0][0], pts[0][1], pts[0][1]};
    for (const Vec2r& q : pts) {
      box.lo_u = std::min(box.lo_u, q[0]);
      box.hi_u = std::max(box.hi_u, q[0]);
      box.lo_v = std::min(box.lo_v, q[1]);
      box.hi_v = std::max(box.hi_v, q[1]);
    }
    cc.hull_box[z.id] = std::move(box);
  }
  cc.built = true;
  return cc;
}

const std::vector<int>& ProposalEngine::sweep_zones(const PlanePair& pair,
                                                    const std::vector<int>& sketch_pieces) {
  std::tuple<int, int, std::vector<int>> key{pair.start_plane, pair.end_plane, sketch_pieces};
  auto it = sweep_cache_.find(key);
  if (it != sweep_cache_.end()) return it->second;

  PlaneLocal& local = locals_[pair.start_plane];
  const ClassCache& cc = classes_[plane_class_[pair.start_plane]];
  Rat off_a = zg_.planes[pair.start_plane].offset();
  Rat off_b = zg_.planes[pair.end_plane].offset();
  Rat lo = std::min(off_a, off_b), hi = std::max(off_a, off_b);

  Box2 sketch_box = local.piece_box[sketch_pieces.front()];
  Rat sketch_area2(0);
  for (int pi : sketch_pieces) {
    const Box2& pb = local.piece_box[pi];
    sketch_box.lo_u = std::min(sketch_box.lo_u, pb.lo_u);
    sketch_box.hi_u = std::max(sketch_box.hi_u, pb.hi_u);
    sketch_box.lo_v = std::min(sketch_box.lo_v, pb.lo_v);
    sketch_box.hi_v = std::max(sketch_box.hi_v, pb.hi_v);
    sketch_area2 += local.piece_area2[pi];
  }

  // Exact overlap of a zone shadow with one piece, cached across sketches.
  auto cover = [&](int zone, int piece) -> const Rat& {
    auto key2 = std::make_pair(zone, piece);
    auto hit = local.cover.find(key2);
    if (hit != local.cover.end()) return hit->second;
    Rat a2(0);
    if (cc.hull_box[zone].overlaps(local.piece_box[piece])) {
      auto inter = convex_intersect_2d(cc.hull[zone], local.pieces[piece].poly2);
      if (inter.size() >= 3) {
        a2 = polygon_area2_2d(inter);
        if (a2 < 0) a2 = -a2;
      }
    }
    return local.cover.emplace(key2, std::move(a2)).first->second;
  };

  std::vector<int> covered;
  for (const Zone& z : zg_.zones) {
    if (cc.span_lo[z.id] < lo || cc.span_hi[z.id] > hi) continue;
    // Full inclusion: the zone's shadow must be exactly covered by the sketch
    // pieces (they have disjoint interiors, so areas add up).
    const Rat& need = cc.hull_area2[z.id];
    if (need > sketch_area2 || !cc.hull_box[z.id].inside(sketch_box)) continue;
    Rat got(0);
    for (int pi : sketch_pieces) {
      got += cover(z.id, pi);
      if (got == need) break;
    }
    if (got == need) covered.push_back(z.id);
  }
  return sweep_cache_.emplace(std::move(key), std::move(covered)).first->second;
}

const std::vector<ProposalEngine::RawSketch>& ProposalEngine::raw_sketches(
    const PlanePair& pair, const std::vector<std::pair<int, uint8_t>>& fp, int level) {
  std::pair<MemoKey, int> key{{pair.start_plane, pair.end_plane, fp}, level};
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;

  const PlaneLocal& local = locals_[pair.start_plane];
  std::vector<RawSketch> raws;
  std::set<std::vector<int>> seen_sketches;

  for (int group_bit = 0; group_bit < 3; ++group_bit) {
    std::vector<int> members;
    for (auto [piece, bits] : fp)
      if (bits & (1 << group_bit)) members.push_back(piece);
    if (members.empty()) continue;

    // Connected components under shared-edge adjacency, in piece-id order.
    std::vector<std::vector<int>> comps;
    std::set<int> left(members.begin(), members.end());
    for (int seed : members) {
      if (!left.count(seed)) continue;
      std::vector<int> comp, stack{seed};
      left.erase(seed);
      while (!stack.empty()) {
        int p = stack.back();
        stack.pop_back();
        comp.push_back(p);
        for (int q : local.adjacency[p])
          if (left.count(q)) {
            left.erase(q);
            stack.push_back(q);
          }
      }
      std::sort(comp.begin(), comp.end());
      comps.push_back(std::move(comp));
    }

    const int n = static_cast<int>(comps.size());
    std::vector<int> sizes;
    for (int s = 1; s <= n; ++s)
      if (s <= level || s >= n - level) sizes.push_back(s);

    for (int s : sizes) {
      // Lexicographic combinations of component indices.
      std::vector<int> idx(s);
      for (int i = 0; i < s; ++i) idx[i] = i;
      while (true) {
        std::vector<int> sketch;
        for (int ci : idx)
          sketch.insert(sketch.end(), comps[ci].begin(), comps[ci].end());
        std::sort(sketch.begin(), sketch.end());
        if (seen_sketches.insert(sketch).second) {
          const std::vector<int>& zones = sweep_zones(pair, sketch);
          if (!zones.empty()) raws.push_back({std::move(sketch), zones});
        }
        int i = s - 1;
        while (i >= 0 && idx[i] == n - s + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < s; ++j) idx[j] = idx[j - 1] + 1;
      }
    }
  }
  return memo_.emplace(std::move(key), std::move(raws)).first->second;
}

std::vector<Extrusion> ProposalEngine::generate(const Canvas& canvas, int level,
                                                const std::vector<Extrusion>& history) {
  const int nz = static_cast<int>(zg_.zones.size());
  std::vector<Extrusion> out;
  std::set<std::string> seen;

  auto inverted_in_history = [&](BoolType type, const ZoneSet& zones) {
    for (auto it = history.rbegin(); it != history.rend(); ++it) {
      ZoneSet h = ZoneSet::from_ids(nz, it->zones);
      if (!h.intersects(zones)) continue;
      return h == zones && it->type != type;
    }
    return false;
  };

  auto emit = [&](const PlanePair& pair, const std::vector<int>& pieces, BoolType type,
                  std::vector<int> zones) {
    if (zones.empty()) return;
    ZoneSet zs = ZoneSet::from_ids(nz, zones);
    if (inverted_in_history(type, zs)) return;
    std::string key = make_canonical_key(type, zones);
    if (!seen.insert(key).second) return;
    Extrusion e;
    e.start_plane = pair.start_plane;
    e.end_plane = pair.end_plane;
    e.direction = pair.direction;
    e.sketch_pieces = pieces;
    e.zones = std::move(zones);
    e.type = type;
    e.canonical_key = std::move(key);
    out.push_back(std::move(e));
  };

  std::lock_guard<std::mutex> lock(mutex_);
  for (const PlanePair& pair : pairs_) {
    const PlaneLocal& local = plane_local(pair.start_plane);
    class_cache(plane_class_[pair.start_plane]);
    if (local.pieces.empty()) continue;

    // The +d side of each piece decides its group (Union seeds come from
    // target or unfilled zones, Difference seeds from canvas overhang).
    Rat delta = zg_.planes[pair.end_plane].offset() - zg_.planes[pair.start_plane].offset();
    bool d_along_normal = delta > 0;
    std::vector<std::pair<int, uint8_t>> fp;
    for (int pi = 0; pi < static_cast<int>(local.pieces.size()); ++pi) {
      int plus = d_along_normal ? local.pieces[pi].zone_pos : local.pieces[pi].zone_neg;
      if (plus < 0) continue;
      bool in_c = canvas.filled.contains(plus);
      bool in_t = target_.contains(plus);
      uint8_t bits = 0;
      if (in_c && !in_t) bits |= 1;  // extrude + subtract candidates
      if (in_t && !in_c) bits |= 2;  // extrude + union candidates
      if (!in_c) bits |= 4;          // idle unions
      if (bits) fp.emplace_back(pi, bits);
    }
    if (fp.empty()) continue;

    for (const RawSketch& raw : raw_sketches(pair, fp, level)) {
      ZoneSet x = ZoneSet::from_ids(nz, raw.zones);
      ZoneSet inter = x.intersect(canvas.filled);
      if (inter == x) {
        emit(pair, raw.pieces, BoolType::Difference, raw.zones);
      } else if (inter.empty()) {
        emit(pair, raw.pieces, BoolType::Union, raw.zones);
      } else {
        ZoneSet added = x;
        added -= canvas.filled;
        emit(pair, raw.pieces, BoolType::Union, added.ids());
        emit(pair, raw.pieces, BoolType::Difference, inter.ids());
      }
    }
  }
  return out;
}

const std::vector<SketchPiece>& ProposalEngine::pieces_on_plane(int plane_id) {
  std::lock_guard<std::mutex> lock(mutex_);
  return plane_local(plane_id).pieces;
}

}  // namespace rezone
