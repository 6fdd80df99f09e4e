#include "rezone/polytope.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace rezone {

namespace {

Vec3r newell(const std::vector<Vec3r>& pts) {
  Vec3r n(Rat(0), Rat(0), Rat(0));
  for (std::size_t i = 0; i < pts.size(); ++i) n += pts[i].cross(pts[(i + 1) % pts.size()]);
  return n;
}

}  // namespace

ConvexCell ConvexCell::box(const Vec3r& lo, const Vec3r& hi) {
  for (int k = 0; k < 3; ++k)
    if (!(lo[k] < hi[k])) throw std::invalid_argument("box must have positive extent");
  ConvexCell c;
  c.verts = {
      {lo[0], lo[1], lo[2]}, {hi[0], lo[1], lo[2]}, {hi[0], hi[1], lo[2]}, {lo[0], hi[1], lo[2]},
      {lo[0], lo[1], hi[2]}, {hi[0], lo[1], hi[2]}, {hi[0], hi[1], hi[2]}, {lo[0], hi[1], hi[2]},
  };
  struct Side {
    int axis;
    bool high;
    std::array<int, 4> quad;
  };
  // Quads listed counter-clockwise seen from outside.
  const Side sides[6] = {
      {2, false, {0, 3, 2, 1}}, {2, true, {4, 5, 6, 7}}, {1, false, {0, 1, 5, 4}},
      {1, true, {2, 3, 7, 6}},  {0, false, {0, 4, 7, 3}}, {0, true, {1, 2, 6, 5}},
  };
  for (const Side& s : sides) {
    Vec3r n(Rat(0), Rat(0), Rat(0));
    n[s.axis] = 1;
    Rat level = s.high ? hi[s.axis] : lo[s.axis];
    CellFacet f;
    f.plane = Plane::from_rational(n[0], n[1], n[2], level);
    f.plane_id = -1;
    f.outward_pos = s.high;  // canonical normal is +axis
    f.loop.assign(s.quad.begin(), s.quad.end());
    c.facets.push_back(std::move(f));
  }
  return c;
}

Rat ConvexCell::volume() const {
  Rat six_v(0);
  for (const CellFacet& f : facets) {
    const Vec3r& v0 = verts[f.loop[0]];
    for (std::size_t i = 1; i + 1 < f.loop.size(); ++i)
      six_v += v0.dot(verts[f.loop[i]].cross(verts[f.loop[i + 1]]));
  }
  return six_v / 6;
}

Rat ConvexCell::volume_from_point(const Vec3r& apex) const {
  Rat six_v(0);
  for (const CellFacet& f : facets) {
    const Vec3r a = verts[f.loop[0]] - apex;
    for (std::size_t i = 1; i + 1 < f.loop.size(); ++i) {
      const Vec3r b = verts[f.loop[i]] - apex;
      const Vec3r c = verts[f.loop[i + 1]] - apex;
      six_v += a.dot(b.cross(c));
    }
  }
  return six_v / 6;
}

Vec3r ConvexCell::vertex_centroid() const {
  Vec3r s(Rat(0), Rat(0), Rat(0));
  for (const Vec3r& v : verts) s += v;
  return s / Rat(static_cast<int>(verts.size()));
}

bool ConvexCell::contains(const Vec3r& p, bool strict) const {
  for (const CellFacet& f : facets) {
    Rat e = f.plane.eval(p);
    if (!f.outward_pos) e = -e;
    if (strict ? !(e < 0) : !(e <= 0)) return false;
  }
  return true;
}

std::vector<Vec3r> ConvexCell::facet_polygon_ccw_plus(const CellFacet& f) const {
  std::vector<Vec3r> poly;
  poly.reserve(f.loop.size());
  if (f.outward_pos) {
    for (int id : f.loop) poly.push_back(verts[id]);
  } else {
    for (auto it = f.loop.rbegin(); it != f.loop.rend(); ++it) poly.push_back(verts[*it]);
  }
  return poly;
}

SplitResult split_cell(const ConvexCell& cell, const Plane& plane, int plane_id) {
  const int nv = static_cast<int>(cell.verts.size());
  std::vector<int> side(nv);
  bool has_neg = false, has_pos = false;
  for (int i = 0; i < nv; ++i) {
    side[i] = plane.side(cell.verts[i]);
    has_neg |= side[i] < 0;
    has_pos |= side[i] > 0;
  }
  SplitResult res;
  if (!has_neg && !has_pos) throw std::logic_error("flat cell");
  if (!has_pos) {
    res.neg = cell;
    return res;
  }
  if (!has_neg) {
    res.pos = cell;
    return res;
  }

  // Intersection point for each crossing edge, deduplicated per edge.
  std::map<std::pair<int, int>, Vec3r> cut_points;
  auto cut_point = [&](int a, int b) -> const Vec3r& {
    auto key = std::minmax(a, b);
    auto it = cut_points.find(key);
    if (it != cut_points.end()) return it->second;
    Rat ea = plane.eval(cell.verts[a]);
    Rat eb = plane.eval(cell.verts[b]);
    Rat t = ea / (ea - eb);
    Vec3r p = cell.verts[a] + (cell.verts[b] - cell.verts[a]) * t;
    return cut_points.emplace(key, std::move(p)).first->second;
  };

  struct Builder {
    ConvexCell cell;
    std::map<int, int> orig_map;
    std::map<std::pair<int, int>, int> cut_map;
    int add_orig(const ConvexCell& src, int id) {
      auto [it, ins] = orig_map.try_emplace(id, static_cast<int>(cell.verts.size()));
      if (ins) cell.verts.push_back(src.verts[id]);
      return it->second;
    }
    int add_cut(std::pair<int, int> key, const Vec3r& p) {
      auto [it, ins] = cut_map.try_emplace(key, static_cast<int>(cell.verts.size()));
      if (ins) cell.verts.push_back(p);
      return it->second;
    }
  };
  Builder neg, pos;

  // Section boundary segments, as vertex-id pairs in each child.
  std::set<std::pair<int, int>> neg_section, pos_section;

  for (const CellFacet& f : cell.facets) {
    const int k = static_cast<int>(f.loop.size());
    std::vector<int> neg_loop, pos_loop;
    std::vector<bool> neg_on, pos_on;  // vertex lies on the splitting plane
    for (int i = 0; i < k; ++i) {
      int a = f.loop[i], b = f.loop[(i + 1) % k];
      if (side[a] <= 0) {
        neg_loop.push_back(neg.add_orig(cell, a));
        neg_on.push_back(side[a] == 0);
      }
      if (side[a] >= 0) {
        pos_loop.push_back(pos.add_orig(cell, a));
        pos_on.push_back(side[a] == 0);
      }
      if (side[a] * side[b] < 0) {
        auto key = std::minmax(a, b);
        const Vec3r& p = cut_point(a, b);
        neg_loop.push_back(neg.add_cut(key, p));
        neg_on.push_back(true);
        pos_loop.push_back(pos.add_cut(key, p));
        pos_on.push_back(true);
      }
    }
    auto emit = [&](Builder& dst, std::vector<int>& loop, std::vector<bool>& on,
                    std::set<std::pair<int, int>>& section) {
      if (loop.size() < 3) return;
      std::vector<Vec3r> pts;
      pts.reserve(loop.size());
      for (int id : loop) pts.push_back(dst.cell.verts[id]);
      Vec3r nw = newell(pts);
      if (nw[0] == 0 && nw[1] == 0 && nw[2] == 0) return;
      const int m = static_cast<int>(loop.size());
      for (int i = 0; i < m; ++i) {
        if (on[i] && on[(i + 1) % m]) {
          int u = loop[i], v = loop[(i + 1) % m];
          if (u != v) section.insert(std::minmax(u, v));
        }
      }
      dst.cell.facets.push_back({f.plane, f.plane_id, f.outward_pos, std::move(loop)});
    };
    emit(neg, neg_loop, neg_on, neg_section);
    emit(pos, pos_loop, pos_on, pos_section);
  }

  // Chain the section segments into one convex cycle per child.
  auto build_section = [&](Builder& dst, const std::set<std::pair<int, int>>& section,
                           bool is_neg) {
    if (section.size() < 3) throw std::logic_error("degenerate section");
    std::map<int, std::vector<int>> nbr;
    for (auto& [u, v] : section) {
      nbr[u].push_back(v);
      nbr[v].push_back(u);
    }
    for (auto& [v, ns] : nbr)
      if (ns.size() != 2) throw std::logic_error("section is not a single cycle");
    std::vector<int> loop;
    int start = nbr.begin()->first;
    int prev = -1, cur = start;
    do {
      loop.push_back(cur);
      const auto& ns = nbr[cur];
      int nxt = (ns[0] != prev) ? ns[0] : ns[1];
      prev = cur;
      cur = nxt;
    } while (cur != start);
    std::vector<Vec3r> pts;
    for (int id : loop) pts.push_back(dst.cell.verts[id]);
    Vec3r nw = newell(pts);
    Rat d = nw.dot(plane.normal_r());
    // neg child: outward along +normal; pos child: outward along -normal.
    bool want_pos_normal = is_neg;
    if ((d > 0) != want_pos_normal) std::reverse(loop.begin(), loop.end());
    dst.cell.facets.push_back({plane, plane_id, want_pos_normal, std::move(loop)});
  };
  build_section(neg, neg_section, true);
  build_section(pos, pos_section, false);

  res.neg = std::move(neg.cell);
  res.pos = std::move(pos.cell);
  return res;
}

bool intersects_region(const ConvexCell& cell, const std::vector<Halfspace>& region) {
  ConvexCell cur = cell;
  for (const Halfspace& h : region) {
    Plane pl = Plane::from_rational(h.n[0], h.n[1], h.n[2], h.c);
    bool flipped = pl.normal_r().dot(h.n) < 0;
    SplitResult sr = split_cell(cur, pl, -1);
    auto& keep = flipped ? sr.pos : sr.neg;
    if (!keep) return false;
    cur = std::move(*keep);
  }
  return true;
}

Rat polygon_area2_2d(const std::vector<Vec2r>& poly) {
  Rat a(0);
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2r& p = poly[i];
    const Vec2r& q = poly[(i + 1) % poly.size()];
    a += p[0] * q[1] - q[0] * p[1];
  }
  return a;
}

std::vector<Vec2r> clip_halfplane_2d(const std::vector<Vec2r>& subject, const Vec2r& a,
                                     const Vec2r& b) {
  auto f = [&](const Vec2r& p) {
    return (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
  };
  std::vector<Vec2r> out;
  const int k = static_cast<int>(subject.size());
  for (int i = 0; i < k; ++i) {
    const Vec2r& p = subject[i];
    const Vec2r& q = subject[(i + 1) % k];
    Rat fp = f(p), fq = f(q);
    if (fp >= 0) out.push_back(p);
    if ((fp > 0 && fq < 0) || (fp < 0 && fq > 0)) {
      Rat t = fp / (fp - fq);
      out.push_back(Vec2r(p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])));
    }
  }
  // Drop consecutive duplicates.
  std::vector<Vec2r> dedup;
  for (const Vec2r& p : out) {
    if (dedup.empty() || !(dedup.back()[0] == p[0] && dedup.back()[1] == p[1]))
      dedup.push_back(p);
  }
  while (dedup.size() > 1 && dedup.front()[0] == dedup.back()[0] &&
         dedup.front()[1] == dedup.back()[1])
    dedup.pop_back();
  return dedup;
}

std::vector<Vec2r> convex_intersect_2d(const std::vector<Vec2r>& subject,
                                       const std::vector<Vec2r>& clip) {
  std::vector<Vec2r> c = clip;
  if (polygon_area2_2d(c) < 0) std::reverse(c.begin(), c.end());
  std::vector<Vec2r> cur = subject;
  const int k = static_cast<int>(c.size());
  for (int i = 0; i < k && !cur.empty(); ++i) cur = clip_halfplane_2d(cur, c[i], c[(i + 1) % k]);
  return cur;
}

std::vector<Vec2r> distinct_points_2d(const std::vector<Vec2r>& pts) {
  std::vector<Vec2r> out;
  for (const Vec2r& p : pts) {
    bool dup = false;
    for (const Vec2r& q : out) dup |= q[0] == p[0] && q[1] == p[1];
    if (!dup) out.push_back(p);
  }
  return out;
}

std::vector<Vec2r> convex_hull_2d(std::vector<Vec2r> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2r& a, const Vec2r& b) {
    return a[0] != b[0] ? a[0] < b[0] : a[1] < b[1];
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec2r& a, const Vec2r& b) {
                          return a[0] == b[0] && a[1] == b[1];
                        }),
            pts.end());
  const int n = static_cast<int>(pts.size());
  if (n < 3) return pts;
  auto cross = [](const Vec2r& o, const Vec2r& a, const Vec2r& b) {
    return sign((a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]));
  };
  std::vector<Vec2r> hull(2 * n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  int lower = k + 1;
  for (int i = n - 2; i >= 0; --i) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

Rat polygon_area_sq(const std::vector<Vec3r>& poly) {
  Vec3r n = newell(poly);
  return n.dot(n) / 4;
}

}  // namespace rezone
