#include "rezone/synth.hpp"

#include "rezone/json_util.hpp"
#include "rezone/scorer.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <random>
#include <set>

namespace rezone {

namespace {

struct CellGrid {
  int g = 4;
  std::vector<char> solid;  // g^3 cells

  explicit CellGrid(int grid) : g(grid), solid(grid * grid * grid, 0) {}
  int idx(int x, int y, int z) const { return (x * g + y) * g + z; }
  bool in_range(int x, int y, int z) const {
    return x >= 0 && y >= 0 && z >= 0 && x < g && y < g && z < g;
  }
  bool at(int x, int y, int z) const { return in_range(x, y, z) && solid[idx(x, y, z)]; }
  int count() const {
    int c = 0;
    for (char s : solid) c += s;
    return c;
  }
};

// Cell box [lo, hi) covered by the op's swept rectangle.
struct CellBox {
  std::array<int, 3> lo{}, hi{};
  bool contains(int x, int y, int z) const {
    const int p[3] = {x, y, z};
    for (int k = 0; k < 3; ++k)
      if (p[k] < lo[k] || p[k] >= hi[k]) return false;
    return true;
  }
};

// Cross axes for a sketch plane: the (u, v) pair completing the axis.
std::pair<int, int> cross_axes(int axis) {
  switch (axis) {
    case 0: return {1, 2};
    case 1: return {0, 2};
    default: return {0, 1};
  }
}

CellBox op_box(const SynthOp& op) {
  CellBox box;
  auto [ua, va] = cross_axes(op.axis);
  box.lo[ua] = op.u0;
  box.hi[ua] = op.u1;
  box.lo[va] = op.v0;
  box.hi[va] = op.v1;
  int a = op.level, b = op.level + op.dir * op.extent;
  box.lo[op.axis] = std::min(a, b);
  box.hi[op.axis] = std::max(a, b);
  return box;
}

void apply_op(CellGrid& grid, const SynthOp& op) {
  CellBox box = op_box(op);
  for (int x = box.lo[0]; x < box.hi[0]; ++x)
    for (int y = box.lo[1]; y < box.hi[1]; ++y)
      for (int z = box.lo[2]; z < box.hi[2]; ++z)
        grid.solid[grid.idx(x, y, z)] = op.type == BoolType::Union ? 1 : 0;
}

bool connected(const CellGrid& grid) {
  int total = grid.count();
  if (total == 0) return false;
  std::vector<char> seen(grid.solid.size(), 0);
  std::vector<std::array<int, 3>> stack;
  for (int x = 0; x < grid.g && stack.empty(); ++x)
    for (int y = 0; y < grid.g && stack.empty(); ++y)
      for (int z = 0; z < grid.g && stack.empty(); ++z)
        if (grid.at(x, y, z)) {
          stack.push_back({x, y, z});
          seen[grid.idx(x, y, z)] = 1;
        }
  int reached = 0;
  const int d[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  while (!stack.empty()) {
    auto [x, y, z] = stack.back();
    stack.pop_back();
    ++reached;
    for (auto& dd : d) {
      int nx = x + dd[0], ny = y + dd[1], nz = z + dd[2];
      if (grid.at(nx, ny, nz) && !seen[grid.idx(nx, ny, nz)]) {
        seen[grid.idx(nx, ny, nz)] = 1;
        stack.push_back({nx, ny, nz});
      }
    }
  }
  return reached == total;
}

// Every empty cell must reach the outside; a trapped pocket is a void.
bool has_void(const CellGrid& grid) {
  std::vector<char> seen(grid.solid.size(), 0);
  std::vector<std::array<int, 3>> stack;
  auto push = [&](int x, int y, int z) {
    if (grid.in_range(x, y, z) && !grid.at(x, y, z) && !seen[grid.idx(x, y, z)]) {
      seen[grid.idx(x, y, z)] = 1;
      stack.push_back({x, y, z});
    }
  };
  for (int a = 0; a < grid.g; ++a)
    for (int b = 0; b < grid.g; ++b) {
      push(0, a, b);
      push(grid.g - 1, a, b);
      push(a, 0, b);
      push(a, grid.g - 1, b);
      push(a, b, 0);
      push(a, b, grid.g - 1);
    }
  const int d[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  while (!stack.empty()) {
    auto [x, y, z] = stack.back();
    stack.pop_back();
    for (auto& dd : d) push(x + dd[0], y + dd[1], z + dd[2]);
  }
  for (int x = 0; x < grid.g; ++x)
    for (int y = 0; y < grid.g; ++y)
      for (int z = 0; z < grid.g; ++z)
        if (!grid.at(x, y, z) && !seen[grid.idx(x, y, z)]) return true;
  return false;
}

// Non-manifold edge: exactly two diagonally-opposite solid cells around a
// lattice edge.
bool manifold_edges(const CellGrid& grid) {
  for (int axis = 0; axis < 3; ++axis) {
    auto [ua, va] = cross_axes(axis);
    for (int u = 0; u <= grid.g; ++u)
      for (int v = 0; v <= grid.g; ++v)
        for (int w = 0; w < grid.g; ++w) {
          auto cell = [&](int du, int dv) {
            int p[3];
            p[axis] = w;
            p[ua] = u + du;
            p[va] = v + dv;
            return grid.at(p[0], p[1], p[2]);
          };
          bool a = cell(-1, -1), b = cell(0, -1), c = cell(-1, 0), e = cell(0, 0);
          int cnt = a + b + c + e;
          if (cnt == 2 && ((a && e && !b && !c) || (b && c && !a && !e))) return false;
        }
  }
  return true;
}

// ---- boundary extraction ---------------------------------------------------

struct UnitFace {
  int axis;
  int level;
  bool positive;  // outward normal sign along the axis
  int u, v;       // 2D cell in the trace frame
};

// Trace frame per (axis, sign) chosen so counter-clockwise loops in (u, v)
// are counter-clockwise seen from outside.
std::pair<int, int> trace_frame(int axis, bool positive) {
  int u, v;
  switch (axis) {
    case 0: u = 1, v = 2; break;
    case 1: u = 2, v = 0; break;
    default: u = 0, v = 1; break;
  }
  if (!positive) std::swap(u, v);
  return {u, v};
}

std::array<int, 3> to_3d(int axis, int level, bool positive, int u, int v) {
  auto [ua, va] = trace_frame(axis, positive);
  std::array<int, 3> p{};
  p[axis] = level;
  p[ua] = u;
  p[va] = v;
  return p;
}

struct RegionKey {
  int axis, level;
  bool positive;
  bool operator<(const RegionKey& o) const {
    return std::tie(axis, level, positive) < std::tie(o.axis, o.level, o.positive);
  }
};

// Chains cancelled directed unit edges into loops; false when the region has
// holes or pinch vertices (multiple outgoing edges / repeated vertices).
bool trace_single_loop(const std::set<std::pair<std::pair<int, int>, std::pair<int, int>>>& edges,
                       std::vector<std::pair<int, int>>& loop) {
  std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> next;
  for (const auto& [a, b] : edges) next[a].push_back(b);
  for (const auto& [v, outs] : next)
    if (outs.size() != 1) return false;
  loop.clear();
  auto start = next.begin()->first;
  auto cur = start;
  do {
    loop.push_back(cur);
    cur = next[cur][0];
  } while (cur != start && loop.size() <= edges.size());
  return cur == start && loop.size() == edges.size();
}

nlohmann::ordered_json extract_brep_document(const CellGrid& grid) {
  // Boundary unit faces grouped by supporting plane and orientation.
  std::map<RegionKey, std::set<std::pair<int, int>>> regions;
  for (int x = 0; x < grid.g; ++x)
    for (int y = 0; y < grid.g; ++y)
      for (int z = 0; z < grid.g; ++z) {
        if (!grid.at(x, y, z)) continue;
        const int c[3] = {x, y, z};
        for (int axis = 0; axis < 3; ++axis) {
          for (int s = -1; s <= 1; s += 2) {
            int n[3] = {x, y, z};
            n[axis] += s;
            if (grid.at(n[0], n[1], n[2])) continue;
            bool positive = s > 0;
            int level = c[axis] + (positive ? 1 : 0);
            auto [ua, va] = trace_frame(axis, positive);
            regions[{axis, level, positive}].insert({c[ua], c[va]});
          }
        }
      }

  // Split each plane's faces into edge-connected components.
  std::map<std::array<int, 3>, int> vertex_ids;
  std::vector<std::array<int, 3>> vertices;
  auto vertex = [&](const std::array<int, 3>& p) {
    auto [it, ins] = vertex_ids.try_emplace(p, static_cast<int>(vertices.size()));
    if (ins) vertices.push_back(p);
    return it->second;
  };
  std::vector<std::vector<int>> faces;

  for (const auto& [key, cells] : regions) {
    std::set<std::pair<int, int>> left = cells;
    while (!left.empty()) {
      std::vector<std::pair<int, int>> comp, stack{*left.begin()};
      left.erase(left.begin());
      while (!stack.empty()) {
        auto [u, v] = stack.back();
        stack.pop_back();
        comp.push_back({u, v});
        const int d[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (auto& dd : d) {
          std::pair<int, int> q{u + dd[0], v + dd[1]};
          auto it = left.find(q);
          if (it != left.end()) {
            left.erase(it);
            stack.push_back(q);
          }
        }
      }

      // Directed unit edges, counter-clockwise per square; interior edges
      // cancel in opposite pairs.
      std::set<std::pair<std::pair<int, int>, std::pair<int, int>>> edges;
      auto toggle = [&](std::pair<int, int> a, std::pair<int, int> b) {
        auto rev = std::make_pair(b, a);
        auto it = edges.find(rev);
        if (it != edges.end())
          edges.erase(it);
        else
          edges.insert({a, b});
      };
      for (auto [u, v] : comp) {
        toggle({u, v}, {u + 1, v});
        toggle({u + 1, v}, {u + 1, v + 1});
        toggle({u + 1, v + 1}, {u, v + 1});
        toggle({u, v + 1}, {u, v});
      }

      std::vector<std::vector<std::pair<int, int>>> loops;
      std::vector<std::pair<int, int>> loop;
      if (trace_single_loop(edges, loop)) {
        loops.push_back(std::move(loop));
      } else {
        // Holes or pinches: fall back to per-column rectangles, which are
        // always simple ("through-holes become multiple coplanar faces").
        loops.clear();
        std::map<int, std::vector<int>> columns;
        for (auto [u, v] : comp) columns[u].push_back(v);
        for (auto& [u, vs] : columns) {
          std::sort(vs.begin(), vs.end());
          std::size_t i = 0;
          while (i < vs.size()) {
            std::size_t j = i;
            while (j + 1 < vs.size() && vs[j + 1] == vs[j] + 1) ++j;
            int va = vs[i], vb = vs[j] + 1;
            std::vector<std::pair<int, int>> rect;
            rect.push_back({u, va});
            rect.push_back({u + 1, va});
            for (int v2 = va + 1; v2 <= vb; ++v2) rect.push_back({u + 1, v2});
            rect.push_back({u, vb});
            for (int v2 = vb - 1; v2 > va; --v2) rect.push_back({u, v2});
            loops.push_back(std::move(rect));
            i = j + 1;
          }
        }
      }

      for (const auto& lp : loops) {
        std::vector<int> face;
        face.reserve(lp.size());
        for (auto [u, v] : lp)
          face.push_back(vertex(to_3d(key.axis, key.level, key.positive, u, v)));
        faces.push_back(std::move(face));
      }
    }
  }

  nlohmann::ordered_json doc;
  auto& vs = doc["vertices"] = nlohmann::ordered_json::array();
  for (const auto& p : vertices) vs.push_back({p[0], p[1], p[2]});
  auto& fs = doc["faces"] = nlohmann::ordered_json::array();
  for (const auto& f : faces) {
    nlohmann::ordered_json fj;
    fj["loop"] = f;
    fs.push_back(std::move(fj));
  }
  return doc;
}

// ---- zone-level ground truth -----------------------------------------------

std::vector<ZoneOp> derive_zone_ops(const SynthProgram& p, const ZoneGraph& zg) {
  const int nz = static_cast<int>(zg.zones.size());
  CellGrid grid(p.grid);
  ZoneSet canvas(nz);
  std::vector<ZoneOp> ops;

  for (const SynthOp& op : p.ops) {
    CellBox box = op_box(op);
    Vec3r lo(Rat(box.lo[0]), Rat(box.lo[1]), Rat(box.lo[2]));
    Vec3r hi(Rat(box.hi[0]), Rat(box.hi[1]), Rat(box.hi[2]));
    ZoneSet inside(nz);
    for (const Zone& z : zg.zones) {
      bool all_in = true;
      for (const Vec3r& v : z.cell.verts) {
        for (int k = 0; k < 3 && all_in; ++k) all_in = lo[k] <= v[k] && v[k] <= hi[k];
        if (!all_in) break;
      }
      if (all_in) inside.insert(z.id);
    }
    ZoneOp zop;
    zop.type = op.type;
    if (op.type == BoolType::Union) {
      ZoneSet add = inside;
      add -= canvas;
      zop.zones = add.ids();
      canvas |= add;
    } else {
      ZoneSet rem = inside.intersect(canvas);
      zop.zones = rem.ids();
      canvas -= rem;
    }
    if (zop.zones.empty())
      throw UnsupportedResult("op has no zone-level effect in the final arrangement");
    zop.canonical_key = make_canonical_key(zop.type, zop.zones);
    ops.push_back(std::move(zop));

    // The zone-level canvas must reproduce the cell-level state exactly:
    // equal volume plus every solid cell center covered by a canvas zone.
    apply_op(grid, op);
    Rat zone_vol(0);
    for (int id = 0; id < nz; ++id)
      if (canvas.contains(id)) zone_vol += zg.zones[id].volume;
    if (zone_vol != Rat(grid.count()))
      throw UnsupportedResult("intermediate state is not a union of final zones");
    for (int x = 0; x < grid.g; ++x)
      for (int y = 0; y < grid.g; ++y)
        for (int z = 0; z < grid.g; ++z) {
          if (!grid.at(x, y, z)) continue;
          Vec3r center(Rat(2 * x + 1, 2), Rat(2 * y + 1, 2), Rat(2 * z + 1, 2));
          int zone = zg.locate(center);
          if (zone < 0 || !canvas.contains(zone))
            throw UnsupportedResult("intermediate state is not a union of final zones");
        }
  }

  ZoneSet target = ZoneSet::from_ids(nz, zg.interior_ids);
  if (!(canvas == target)) throw UnsupportedResult("replayed ops do not reach the interior set");
  return ops;
}

}  // namespace

ExecutedProgram execute_program(const SynthProgram& p) {
  CellGrid grid(p.grid);
  for (const SynthOp& op : p.ops) apply_op(grid, op);
  if (grid.count() == 0) throw UnsupportedResult("program produces an empty solid");
  if (!manifold_edges(grid)) throw UnsupportedResult("boundary has a non-manifold edge");

  ExecutedProgram out;
  out.brep = parse_brep(extract_brep_document(grid));
  std::vector<FaceLoop> loops = find_face_loops(out.brep);
  out.zone_graph = build_zone_graph(out.brep, loops, {});
  classify_zones(out.zone_graph, out.brep);
  out.gt_zone_ops = derive_zone_ops(p, out.zone_graph);
  return out;
}

SynthProgram generate_program(uint64_t seed, const SynthConfig& cfg) {
  if (cfg.min_ops < 1 || cfg.min_ops > cfg.max_ops)
    throw std::invalid_argument("need 1 <= min_ops <= max_ops");
  std::mt19937_64 rng(seed);
  auto rand_int = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };

  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    const int n_ops = rand_int(cfg.min_ops, cfg.max_ops);
    SynthProgram prog;
    prog.grid = cfg.grid;
    CellGrid grid(cfg.grid);
    bool dead = false;

    for (int i = 0; i < n_ops && !dead; ++i) {
      bool placed = false;
      for (int tries = 0; tries < 200 && !placed; ++tries) {
        SynthOp op;
        op.type = (i == 0 || rand_int(0, 1) == 0) ? BoolType::Union : BoolType::Difference;
        op.axis = rand_int(0, 2);
        op.dir = rand_int(0, 1) ? 1 : -1;
        op.level = op.dir > 0 ? rand_int(0, cfg.grid - 1) : rand_int(1, cfg.grid);
        int max_extent = op.dir > 0 ? cfg.grid - op.level : op.level;
        op.extent = rand_int(1, max_extent);
        op.u0 = rand_int(0, cfg.grid - 1);
        op.u1 = rand_int(op.u0 + 1, cfg.grid);
        op.v0 = rand_int(0, cfg.grid - 1);
        op.v1 = rand_int(op.v0 + 1, cfg.grid);

        CellGrid next = grid;
        apply_op(next, op);
        CellBox box = op_box(op);

        if (op.type == BoolType::Union) {
          if (next.count() == grid.count()) continue;  // no-op union
          if (!connected(next)) continue;
        } else {
          if (next.count() == grid.count()) continue;  // nothing removed
          if (next.count() == 0 || !connected(next)) continue;
          if (has_void(next)) continue;
          // The cut must enter from the exposed surface at its start plane.
          auto [ua, va] = cross_axes(op.axis);
          bool touches = false;
          for (int u = op.u0; u < op.u1 && !touches; ++u)
            for (int v = op.v0; v < op.v1 && !touches; ++v) {
              int c[3], o[3];
              c[op.axis] = op.dir > 0 ? op.level : op.level - 1;
              o[op.axis] = op.dir > 0 ? op.level - 1 : op.level;
              c[ua] = o[ua] = u;
              c[va] = o[va] = v;
              touches = grid.at(c[0], c[1], c[2]) && !grid.at(o[0], o[1], o[2]);
            }
          if (!touches) continue;
          (void)box;
        }
        prog.ops.push_back(op);
        grid = next;
        placed = true;
      }
      dead = !placed;
    }
    if (dead || !connected(grid) || has_void(grid) || !manifold_edges(grid)) continue;

    try {
      ExecutedProgram exec = execute_program(prog);
      // Every op must be discoverable: level-1 proposals enumerate whole
      // sketch components only, so an op whose footprint merges into a larger
      // group component could never be found by search.
      ProposalEngine engine(exec.zone_graph);
      const int nz = static_cast<int>(exec.zone_graph.zones.size());
      Canvas canvas{ZoneSet(nz)};
      std::vector<Extrusion> prefix;
      bool discoverable = true;
      for (const ZoneOp& zop : exec.gt_zone_ops) {
        std::vector<Extrusion> props = engine.generate(canvas, 1, prefix);
        Extrusion op;
        op.zones = zop.zones;
        op.type = zop.type;
        op.canonical_key = zop.canonical_key;
        bool hit = false;
        for (const Extrusion& p : props) hit |= p.canonical_key == op.canonical_key;
        if (!hit) {
          discoverable = false;
          break;
        }
        canvas = apply_extrusion(exec.zone_graph, canvas, op);
        prefix.push_back(std::move(op));
      }
      if (!discoverable) continue;
    } catch (const UnsupportedResult&) {
      continue;
    } catch (const BRepError&) {
      continue;
    }
    return prog;
  }
  throw GenerationExhausted("no valid program found within the attempt budget");
}

nlohmann::ordered_json program_to_json(const SynthProgram& p) {
  nlohmann::ordered_json doc;
  doc["grid"] = p.grid;
  auto& ops = doc["ops"] = nlohmann::ordered_json::array();
  for (const SynthOp& op : p.ops) {
    nlohmann::ordered_json oj;
    oj["axis"] = op.axis;
    oj["dir"] = op.dir;
    oj["level"] = op.level;
    auto [ua, va] = cross_axes(op.axis);
    // Sketch rectangle as an explicit polygon on the plane.
    auto corner = [&](int u, int v) {
      std::array<int, 3> p3{};
      p3[op.axis] = op.level;
      p3[ua] = u;
      p3[va] = v;
      return nlohmann::ordered_json{p3[0], p3[1], p3[2]};
    };
    oj["sketch"] = {corner(op.u0, op.v0), corner(op.u1, op.v0), corner(op.u1, op.v1),
                    corner(op.u0, op.v1)};
    oj["rect"] = {op.u0, op.u1, op.v0, op.v1};
    oj["extent"] = op.extent;
    oj["bool"] = op.type == BoolType::Union ? "union" : "difference";
    ops.push_back(std::move(oj));
  }
  return doc;
}

SynthProgram program_from_json(const nlohmann::json& doc) {
  SynthProgram p;
  p.grid = doc.at("grid").get<int>();
  for (const auto& oj : doc.at("ops")) {
    SynthOp op;
    op.axis = oj.at("axis").get<int>();
    op.dir = oj.at("dir").get<int>();
    op.level = oj.at("level").get<int>();
    auto rect = oj.at("rect");
    op.u0 = rect[0].get<int>();
    op.u1 = rect[1].get<int>();
    op.v0 = rect[2].get<int>();
    op.v1 = rect[3].get<int>();
    op.extent = oj.at("extent").get<int>();
    op.type = oj.at("bool").get<std::string>() == "union" ? BoolType::Union : BoolType::Difference;
    p.ops.push_back(op);
  }
  return p;
}

nlohmann::ordered_json zone_ops_to_json(const std::vector<ZoneOp>& ops) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const ZoneOp& op : ops) {
    nlohmann::ordered_json oj;
    oj["zones"] = op.zones;
    oj["bool"] = op.type == BoolType::Union ? "union" : "difference";
    oj["key"] = op.canonical_key;
    arr.push_back(std::move(oj));
  }
  return arr;
}

std::vector<ZoneOp> zone_ops_from_json(const nlohmann::json& doc) {
  std::vector<ZoneOp> ops;
  for (const auto& oj : doc) {
    ZoneOp op;
    op.zones = oj.at("zones").get<std::vector<int>>();
    op.type = oj.at("bool").get<std::string>() == "union" ? BoolType::Union : BoolType::Difference;
    op.canonical_key = oj.at("key").get<std::string>();
    ops.push_back(std::move(op));
  }
  return ops;
}

}  // namespace rezone
