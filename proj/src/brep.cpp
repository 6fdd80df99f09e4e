#include "rezone/brep.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <set>

namespace rezone {

namespace {

Rat json_to_rat(const nlohmann::json& v) {
  if (v.is_number_integer()) return Rat(BigInt(v.get<long long>()));
  if (v.is_number_unsigned()) return Rat(BigInt(v.get<unsigned long long>()));
  if (v.is_string()) return rat_from_string(v.get<std::string>());
  throw BRepError(BRepErrorKind::BadDocument,
                  "coordinates must be integers or \"p/q\" strings");
}

nlohmann::ordered_json rat_to_json(const Rat& q) {
  if (rat_den(q) == 1) {
    const BigInt& n = rat_num(q);
    if (n >= std::numeric_limits<long long>::min() && n <= std::numeric_limits<long long>::max())
      return nlohmann::ordered_json(n.convert_to<long long>());
  }
  return nlohmann::ordered_json(rat_to_string(q));
}

// Twice the face area vector; exact, valid for any simple planar polygon.
Vec3r newell_normal(const std::vector<Vec3r>& verts, const std::vector<int>& loop) {
  Vec3r n(Rat(0), Rat(0), Rat(0));
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vec3r& p = verts[loop[i]];
    const Vec3r& q = verts[loop[(i + 1) % loop.size()]];
    n += p.cross(q);
  }
  return n;
}

int orient2d(const Vec2r& a, const Vec2r& b, const Vec2r& c) {
  return sign((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
}

bool on_segment_collinear(const Vec2r& a, const Vec2r& b, const Vec2r& p) {
  return std::min(a[0], b[0]) <= p[0] && p[0] <= std::max(a[0], b[0]) &&
         std::min(a[1], b[1]) <= p[1] && p[1] <= std::max(a[1], b[1]);
}

bool segments_touch(const Vec2r& p1, const Vec2r& p2, const Vec2r& p3, const Vec2r& p4) {
  int o1 = orient2d(p1, p2, p3);
  int o2 = orient2d(p1, p2, p4);
  int o3 = orient2d(p3, p4, p1);
  int o4 = orient2d(p3, p4, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment_collinear(p1, p2, p3)) return true;
  if (o2 == 0 && on_segment_collinear(p1, p2, p4)) return true;
  if (o3 == 0 && on_segment_collinear(p3, p4, p1)) return true;
  if (o4 == 0 && on_segment_collinear(p3, p4, p2)) return true;
  return false;
}

int dominant_axis(const Vec3r& n) {
  Rat ax = boost::multiprecision::abs(n[0]);
  Rat ay = boost::multiprecision::abs(n[1]);
  Rat az = boost::multiprecision::abs(n[2]);
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

void check_simple(const std::vector<Vec3r>& verts, const std::vector<int>& loop,
                  const Vec3r& normal, int face_id) {
  const int k = static_cast<int>(loop.size());
  const int axis = dominant_axis(normal);
  std::vector<Vec2r> pts;
  pts.reserve(k);
  for (int id : loop) pts.push_back(drop_axis(verts[id], axis));

  for (int i = 0; i < k; ++i) {
    // Consecutive edges may continue straight (conforming vertices) but must
    // not fold back onto themselves.
    const Vec2r& a = pts[i];
    const Vec2r& b = pts[(i + 1) % k];
    const Vec2r& c = pts[(i + 2) % k];
    if (orient2d(a, b, c) == 0) {
      Rat dot = (b[0] - a[0]) * (c[0] - b[0]) + (b[1] - a[1]) * (c[1] - b[1]);
      if (dot <= 0)
        throw BRepError(BRepErrorKind::DegenerateFace,
                        "face " + std::to_string(face_id) + " folds back on itself");
    }
  }
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      bool adjacent = (j == i + 1) || (i == 0 && j == k - 1);
      if (adjacent) continue;
      if (segments_touch(pts[i], pts[(i + 1) % k], pts[j], pts[(j + 1) % k]))
        throw BRepError(BRepErrorKind::DegenerateFace,
                        "face " + std::to_string(face_id) + " is self-intersecting");
    }
  }
}

}  // namespace

std::vector<std::pair<int, int>> Face::edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(loop.size());
  for (std::size_t i = 0; i < loop.size(); ++i)
    out.emplace_back(loop[i], loop[(i + 1) % loop.size()]);
  return out;
}

Vec3r BRep::outward_normal_r(int face_id) const {
  const Face& f = faces[face_id];
  Vec3r n = planes[f.plane_id].normal_r();
  return f.flipped ? Vec3r(-n) : n;
}

Rat BRep::signed_volume() const {
  Rat six_v(0);
  for (const Face& f : faces) {
    const Vec3r& v0 = vertices[f.loop[0]];
    for (std::size_t i = 1; i + 1 < f.loop.size(); ++i) {
      const Vec3r& v1 = vertices[f.loop[i]];
      const Vec3r& v2 = vertices[f.loop[i + 1]];
      six_v += v0.dot(v1.cross(v2));
    }
  }
  return six_v / 6;
}

bool operator==(const BRep& a, const BRep& b) {
  if (a.vertices.size() != b.vertices.size() || a.faces.size() != b.faces.size()) return false;
  for (std::size_t i = 0; i < a.vertices.size(); ++i)
    if (!vec_eq(a.vertices[i], b.vertices[i])) return false;
  for (std::size_t i = 0; i < a.faces.size(); ++i)
    if (a.faces[i].loop != b.faces[i].loop) return false;
  return true;
}

BRep parse_brep(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("vertices") || !doc.contains("faces"))
    throw BRepError(BRepErrorKind::BadDocument, "expected {vertices, faces}");

  BRep b;
  for (const auto& v : doc.at("vertices")) {
    if (!v.is_array() || v.size() != 3)
      throw BRepError(BRepErrorKind::BadDocument, "vertex must be [x, y, z]");
    b.vertices.emplace_back(json_to_rat(v[0]), json_to_rat(v[1]), json_to_rat(v[2]));
  }
  if (b.vertices.empty()) throw BRepError(BRepErrorKind::BadDocument, "no vertices");

  for (const auto& fj : doc.at("faces")) {
    if (!fj.is_object() || !fj.contains("loop"))
      throw BRepError(BRepErrorKind::BadDocument, "face must be {loop: [...]}");
    Face f;
    for (const auto& idx : fj.at("loop")) {
      int id = idx.get<int>();
      if (id < 0 || id >= static_cast<int>(b.vertices.size()))
        throw BRepError(BRepErrorKind::BadDocument, "loop index out of range");
      f.loop.push_back(id);
    }
    b.faces.push_back(std::move(f));
  }
  if (b.faces.empty()) throw BRepError(BRepErrorKind::BadDocument, "no faces");

  // Per-face checks: degeneracy, planarity, simplicity.
  std::vector<Vec3r> normals(b.faces.size());
  for (std::size_t fi = 0; fi < b.faces.size(); ++fi) {
    const Face& f = b.faces[fi];
    if (f.loop.size() < 3)
      throw BRepError(BRepErrorKind::DegenerateFace,
                      "face " + std::to_string(fi) + " has fewer than 3 vertices");
    std::set<int> uniq(f.loop.begin(), f.loop.end());
    if (uniq.size() != f.loop.size())
      throw BRepError(BRepErrorKind::DegenerateFace,
                      "face " + std::to_string(fi) + " repeats a vertex");
    Vec3r n = newell_normal(b.vertices, f.loop);
    if (n[0] == 0 && n[1] == 0 && n[2] == 0)
      throw BRepError(BRepErrorKind::DegenerateFace,
                      "face " + std::to_string(fi) + " has zero area");
    Rat d = n.dot(b.vertices[f.loop[0]]);
    for (int id : f.loop)
      if (n.dot(b.vertices[id]) != d)
        throw BRepError(BRepErrorKind::NonPlanarFace,
                        "face " + std::to_string(fi) + " has a vertex off its plane");
    check_simple(b.vertices, f.loop, n, static_cast<int>(fi));
    normals[fi] = n;
  }

  // Watertightness over undirected vertex-pair edges.
  struct EdgeUse {
    int face;
    bool forward;
  };
  std::map<std::pair<int, int>, std::vector<EdgeUse>> edge_uses;
  for (std::size_t fi = 0; fi < b.faces.size(); ++fi) {
    for (auto [u, v] : b.faces[fi].edges()) {
      bool fwd = u < v;
      edge_uses[{std::min(u, v), std::max(u, v)}].push_back({static_cast<int>(fi), fwd});
    }
  }
  for (const auto& [e, uses] : edge_uses)
    if (uses.size() != 2)
      throw BRepError(BRepErrorKind::NotWatertight,
                      "edge (" + std::to_string(e.first) + "," + std::to_string(e.second) +
                          ") is shared by " + std::to_string(uses.size()) + " faces");

  // Orientation: propagate consistency over shared edges, then fix the global
  // sign from the signed volume.
  std::vector<int> flip(b.faces.size(), -1);  // -1 unvisited, else 0/1
  std::vector<std::vector<std::pair<int, bool>>> adj(b.faces.size());
  for (const auto& [e, uses] : edge_uses) {
    bool same_dir = uses[0].forward == uses[1].forward;
    adj[uses[0].face].push_back({uses[1].face, same_dir});
    adj[uses[1].face].push_back({uses[0].face, same_dir});
  }
  std::vector<std::vector<int>> components;
  for (std::size_t start = 0; start < b.faces.size(); ++start) {
    if (flip[start] != -1) continue;
    flip[start] = 0;
    std::vector<int> stack{static_cast<int>(start)}, comp{static_cast<int>(start)};
    while (!stack.empty()) {
      int f = stack.back();
      stack.pop_back();
      for (auto [g, same_dir] : adj[f]) {
        int want = same_dir ? 1 - flip[f] : flip[f];
        if (flip[g] == -1) {
          flip[g] = want;
          stack.push_back(g);
          comp.push_back(g);
        } else if (flip[g] != want) {
          throw BRepError(BRepErrorKind::BadOrientation, "shell is not orientable");
        }
      }
    }
    components.push_back(std::move(comp));
  }
  for (std::size_t fi = 0; fi < b.faces.size(); ++fi)
    if (flip[fi]) {
      std::reverse(b.faces[fi].loop.begin(), b.faces[fi].loop.end());
      normals[fi] = -normals[fi];
    }

  // Per-component sign: a component nested inside another bounds a void and
  // keeps negative signed volume; otherwise it must be positive.
  auto component_volume = [&](const std::vector<int>& comp) {
    Rat six_v(0);
    for (int fi : comp) {
      const auto& loop = b.faces[fi].loop;
      const Vec3r& v0 = b.vertices[loop[0]];
      for (std::size_t i = 1; i + 1 < loop.size(); ++i)
        six_v += v0.dot(b.vertices[loop[i]].cross(b.vertices[loop[i + 1]]));
    }
    return six_v / 6;
  };
  auto component_box = [&](const std::vector<int>& comp) {
    Vec3r lo = b.vertices[b.faces[comp[0]].loop[0]], hi = lo;
    for (int fi : comp)
      for (int id : b.faces[fi].loop)
        for (int k = 0; k < 3; ++k) {
          lo[k] = std::min(lo[k], b.vertices[id][k]);
          hi[k] = std::max(hi[k], b.vertices[id][k]);
        }
    return std::make_pair(lo, hi);
  };
  std::vector<std::pair<Vec3r, Vec3r>> boxes;
  for (const auto& comp : components) boxes.push_back(component_box(comp));
  for (std::size_t ci = 0; ci < components.size(); ++ci) {
    bool nested = false;
    for (std::size_t cj = 0; cj < components.size() && !nested; ++cj) {
      if (ci == cj) continue;
      nested = true;
      for (int k = 0; k < 3; ++k)
        nested = nested && boxes[cj].first[k] < boxes[ci].first[k] &&
                 boxes[ci].second[k] < boxes[cj].second[k];
    }
    Rat v = component_volume(components[ci]);
    bool want_negative = nested;
    if (v == 0) throw BRepError(BRepErrorKind::BadOrientation, "shell encloses no volume");
    if ((v < 0) != want_negative) {
      for (int fi : components[ci]) {
        std::reverse(b.faces[fi].loop.begin(), b.faces[fi].loop.end());
        normals[fi] = -normals[fi];
      }
    }
  }
  if (b.signed_volume() <= 0)
    throw BRepError(BRepErrorKind::BadOrientation, "shell signed volume is not positive");

  // Deduplicated canonical planes; the face keeps its outward orientation bit.
  std::map<Plane, int> plane_ids;
  for (std::size_t fi = 0; fi < b.faces.size(); ++fi) {
    const Vec3r& n = normals[fi];
    Plane pl = Plane::from_point_normal(n, b.vertices[b.faces[fi].loop[0]]);
    auto [it, inserted] = plane_ids.try_emplace(pl, static_cast<int>(plane_ids.size()));
    if (inserted) b.planes.push_back(pl);
    b.faces[fi].plane_id = it->second;
    b.faces[fi].flipped = pl.normal_r().dot(n) < 0;
  }

  b.aabb_min = b.vertices[0];
  b.aabb_max = b.vertices[0];
  for (const Vec3r& v : b.vertices)
    for (int k = 0; k < 3; ++k) {
      b.aabb_min[k] = std::min(b.aabb_min[k], v[k]);
      b.aabb_max[k] = std::max(b.aabb_max[k], v[k]);
    }
  return b;
}

nlohmann::ordered_json serialize_brep(const BRep& b) {
  nlohmann::ordered_json doc;
  auto& vs = doc["vertices"] = nlohmann::ordered_json::array();
  for (const Vec3r& v : b.vertices)
    vs.push_back({rat_to_json(v[0]), rat_to_json(v[1]), rat_to_json(v[2])});
  auto& fs = doc["faces"] = nlohmann::ordered_json::array();
  for (const Face& f : b.faces) {
    nlohmann::ordered_json fj;
    fj["loop"] = f.loop;
    fs.push_back(std::move(fj));
  }
  return doc;
}

std::vector<GeometricEdge> geometric_edges(const BRep& b, int face_id) {
  const auto& loop = b.faces[face_id].loop;
  const int k = static_cast<int>(loop.size());
  std::vector<Vec3i> dirs(k);
  for (int i = 0; i < k; ++i)
    dirs[i] = canonical_direction(b.vertices[loop[(i + 1) % k]] - b.vertices[loop[i]]);

  int start = 0;
  while (start < k && compare_vec3i(dirs[(start + k - 1) % k], dirs[start]) == 0) ++start;
  if (start == k) return {};  // fully collinear; rejected by validation anyway

  std::vector<GeometricEdge> out;
  int i = start;
  do {
    GeometricEdge ge;
    ge.direction = dirs[i];
    ge.first_vertex = loop[i];
    int j = i;
    while (compare_vec3i(dirs[j % k], ge.direction) == 0) {
      int u = loop[j % k], v = loop[(j + 1) % k];
      ge.segments.emplace_back(std::min(u, v), std::max(u, v));
      ++j;
    }
    ge.last_vertex = loop[j % k];
    out.push_back(std::move(ge));
    i = j;
  } while (i % k != start);
  return out;
}

namespace {

struct EdgeRef {
  int face;
  int gedge;
  bool operator==(const EdgeRef& o) const { return face == o.face && gedge == o.gedge; }
  bool operator<(const EdgeRef& o) const {
    return face != o.face ? face < o.face : gedge < o.gedge;
  }
};

}  // namespace

std::vector<FaceLoop> find_face_loops(const BRep& b) {
  const int nf = static_cast<int>(b.faces.size());
  std::vector<std::vector<GeometricEdge>> gedges(nf);
  std::vector<bool> eligible(nf, false);
  for (int f = 0; f < nf; ++f) {
    gedges[f] = geometric_edges(b, f);
    eligible[f] = gedges[f].size() == 4;
  }

  std::map<std::pair<int, int>, std::vector<EdgeRef>> seg_owner;
  for (int f = 0; f < nf; ++f)
    for (int e = 0; e < static_cast<int>(gedges[f].size()); ++e)
      for (auto& seg : gedges[f][e].segments) seg_owner[seg].push_back({f, e});

  // The neighbor across a geometric edge exists only when one face's edge
  // matches it segment for segment; subdivided borders have no single
  // neighbor and stop the walk.
  auto neighbor = [&](EdgeRef r) -> std::optional<EdgeRef> {
    const auto& segs = gedges[r.face][r.gedge].segments;
    std::optional<EdgeRef> other;
    for (auto& seg : segs) {
      auto it = seg_owner.find(seg);
      if (it == seg_owner.end() || it->second.size() != 2) return std::nullopt;
      EdgeRef o = it->second[0] == r ? it->second[1] : it->second[0];
      if (other && !(*other == o)) return std::nullopt;
      other = o;
    }
    if (!other) return std::nullopt;
    if (gedges[other->face][other->gedge].segments.size() != segs.size()) return std::nullopt;
    return other;
  };

  auto exit_edge = [&](int face, int entry, const Vec3i& dir) -> int {
    int found = -1;
    for (int e = 0; e < 4; ++e) {
      if (e == entry) continue;
      if (compare_vec3i(gedges[face][e].direction, dir) == 0) {
        if (found != -1) return -1;
        found = e;
      }
    }
    return found;
  };

  std::set<std::pair<std::vector<int>, std::array<std::string, 3>>> seen;
  std::vector<FaceLoop> loops;

  for (int f0 = 0; f0 < nf; ++f0) {
    if (!eligible[f0]) continue;
    for (int e0 = 0; e0 < 4; ++e0) {
      const Vec3i dir = gedges[f0][e0].direction;
      std::vector<int> seq{f0};
      std::set<int> visited{f0};
      EdgeRef cur{f0, e0};
      bool closed = false;
      while (true) {
        auto nb = neighbor(cur);
        if (!nb || !eligible[nb->face]) break;
        if (compare_vec3i(gedges[nb->face][nb->gedge].direction, dir) != 0) break;
        if (nb->face == f0) {
          closed = exit_edge(f0, nb->gedge, dir) == e0;
          break;
        }
        if (visited.count(nb->face)) break;
        int ex = exit_edge(nb->face, nb->gedge, dir);
        if (ex == -1) break;
        seq.push_back(nb->face);
        visited.insert(nb->face);
        cur = {nb->face, ex};
      }
      if (!closed || seq.size() < 3) continue;

      // Canonicalize the cycle: smallest face first, smaller second element.
      auto rot = std::min_element(seq.begin(), seq.end());
      std::rotate(seq.begin(), rot, seq.end());
      if (seq[1] > seq.back()) {
        std::reverse(seq.begin() + 1, seq.end());
      }
      std::array<std::string, 3> dkey{dir[0].str(), dir[1].str(), dir[2].str()};
      if (seen.insert({seq, dkey}).second) loops.push_back({seq, dir});
    }
  }

  std::sort(loops.begin(), loops.end(), [](const FaceLoop& a, const FaceLoop& b) {
    int fa = *std::min_element(a.face_ids.begin(), a.face_ids.end());
    int fb = *std::min_element(b.face_ids.begin(), b.face_ids.end());
    if (fa != fb) return fa < fb;
    int c = compare_vec3i(a.direction, b.direction);
    if (c != 0) return c < 0;
    return a.face_ids < b.face_ids;
  });
  return loops;
}

bool check_face_loop(const BRep& b, const FaceLoop& loop) {
  const int m = static_cast<int>(loop.face_ids.size());
  if (m < 3) return false;
  for (int f : loop.face_ids)
    if (geometric_edges(b, f).size() != 4) return false;
  for (int i = 0; i < m; ++i) {
    int f = loop.face_ids[i], g = loop.face_ids[(i + 1) % m];
    // Consecutive faces must share a geometric edge parallel to the loop
    // direction.
    bool found = false;
    for (const auto& ef : geometric_edges(b, f)) {
      if (compare_vec3i(ef.direction, loop.direction) != 0) continue;
      for (const auto& eg : geometric_edges(b, g)) {
        if (compare_vec3i(eg.direction, loop.direction) != 0) continue;
        for (auto& s : ef.segments)
          for (auto& t : eg.segments)
            if (s == t) found = true;
      }
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace rezone
