#pragma once

#include "rezone/zone_graph.hpp"

#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace rezone {

enum class BoolType { Union, Difference };

// Fixed-universe bitset of zone ids.
class ZoneSet {
 public:
  ZoneSet() = default;
  explicit ZoneSet(int universe) : universe_(universe), words_((universe + 63) / 64, 0) {}
  static ZoneSet from_ids(int universe, const std::vector<int>& ids) {
    ZoneSet s(universe);
    for (int id : ids) s.insert(id);
    return s;
  }

  void insert(int id) { words_[id >> 6] |= uint64_t(1) << (id & 63); }
  void erase(int id) { words_[id >> 6] &= ~(uint64_t(1) << (id & 63)); }
  bool contains(int id) const { return (words_[id >> 6] >> (id & 63)) & 1; }
  bool empty() const {
    for (uint64_t w : words_)
      if (w) return false;
    return true;
  }
  int count() const {
    int c = 0;
    for (uint64_t w : words_) c += __builtin_popcountll(w);
    return c;
  }
  int universe() const { return universe_; }

  ZoneSet& operator|=(const ZoneSet& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
  }
  ZoneSet& operator-=(const ZoneSet& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
    return *this;
  }
  ZoneSet intersect(const ZoneSet& o) const {
    ZoneSet r(universe_);
    for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] = words_[i] & o.words_[i];
    return r;
  }
  bool intersects(const ZoneSet& o) const {
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & o.words_[i]) return true;
    return false;
  }
  bool is_subset_of(const ZoneSet& o) const {
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & ~o.words_[i]) return false;
    return true;
  }
  bool operator==(const ZoneSet& o) const = default;
  const std::vector<uint64_t>& words() const { return words_; }

  std::vector<int> ids() const {
    std::vector<int> out;
    for (int i = 0; i < universe_; ++i)
      if (contains(i)) out.push_back(i);
    return out;
  }

 private:
  int universe_ = 0;
  std::vector<uint64_t> words_;
};

struct Canvas {
  ZoneSet filled;
};

struct Extrusion {
  int start_plane = -1;
  int end_plane = -1;
  Vec3r direction;  // exact displacement from start plane to end plane
  std::vector<int> sketch_pieces;  // piece ids on the start plane
  std::vector<int> zones;          // sorted, the covered zone set
  BoolType type = BoolType::Union;
  std::string canonical_key;
};

std::string make_canonical_key(BoolType type, const std::vector<int>& zones);

struct InvalidApplication : std::logic_error {
  using std::logic_error::logic_error;
};

// Union adds the zone set, Difference removes it; the Extrusion invariants
// are enforced and a violation signals an engine bug.
Canvas apply_extrusion(const ZoneGraph& zg, const Canvas& canvas, const Extrusion& e);

bool is_complete(const Canvas& canvas, const ZoneGraph& zg);

struct PlanePair {
  int start_plane = -1;
  int end_plane = -1;
  Vec3r direction;
};

// All ordered pairs of distinct parallel planes, deterministic order.
std::vector<PlanePair> enumerate_plane_pairs(const ZoneGraph& zg);

// An arrangement facet on a plane: the smallest sketchable surface patch.
struct SketchPiece {
  std::vector<Vec3r> poly3;  // counter-clockwise from the +normal side
  std::vector<Vec2r> poly2;  // in the shared frame of the plane's direction class
  int zone_neg = -1;         // zone on the negative side, -1 past the AABB wall
  int zone_pos = -1;
};

class ProposalEngine {
 public:
  explicit ProposalEngine(const ZoneGraph& zg);

  std::vector<Extrusion> generate(const Canvas& canvas, int level,
                                  const std::vector<Extrusion>& history);

  const ZoneGraph& graph() const { return zg_; }
  const ZoneSet& target() const { return target_; }
  const std::vector<PlanePair>& plane_pairs() const { return pairs_; }
  const std::vector<SketchPiece>& pieces_on_plane(int plane_id);

 private:
  struct Box2 {
    Rat lo_u, hi_u, lo_v, hi_v;
    bool overlaps(const Box2& o) const {
      return lo_u <= o.hi_u && o.lo_u <= hi_u && lo_v <= o.hi_v && o.lo_v <= hi_v;
    }
    bool inside(const Box2& o) const {
      return o.lo_u <= lo_u && hi_u <= o.hi_u && o.lo_v <= lo_v && hi_v <= o.hi_v;
    }
  };
  struct PlaneLocal {
    bool built = false;
    std::vector<SketchPiece> pieces;
    std::vector<std::vector<int>> adjacency;
    std::vector<Rat> piece_area2;
    std::vector<Box2> piece_box;
    // Exact |zone shadow ^ piece| areas, filled on demand.
    std::map<std::pair<int, int>, Rat> cover;
  };
  struct ClassCache {
    bool built = false;
    std::pair<Vec3i, Vec3i> frame;
    // Per zone: span along the class direction and projected hull.
    std::vector<Rat> span_lo, span_hi;
    std::vector<std::vector<Vec2r>> hull;
    std::vector<Rat> hull_area2;
    std::vector<Box2> hull_box;
  };
  struct RawSketch {
    std::vector<int> pieces;  // sorted piece ids
    std::vector<int> zones;   // sorted covered zones
  };
  using MemoKey = std::tuple<int, int, std::vector<std::pair<int, uint8_t>>>;

  PlaneLocal& plane_local(int plane_id);
  ClassCache& class_cache(int class_id);
  const std::vector<int>& sweep_zones(const PlanePair& pair,
                                      const std::vector<int>& sketch_pieces);
  const std::vector<RawSketch>& raw_sketches(const PlanePair& pair,
                                             const std::vector<std::pair<int, uint8_t>>& fp,
                                             int level);

  const ZoneGraph& zg_;
  ZoneSet target_;
  std::vector<PlanePair> pairs_;
  std::vector<int> plane_class_;  // plane id -> direction class id
  std::vector<PlaneLocal> locals_;
  std::vector<ClassCache> classes_;
  std::map<std::pair<MemoKey, int>, std::vector<RawSketch>> memo_;
  // Canvas-independent sweep geometry: (start, end, sketch) -> covered zones.
  std::map<std::tuple<int, int, std::vector<int>>, std::vector<int>> sweep_cache_;
  std::mutex mutex_;
};

}  // namespace rezone
