#include "rezone/scorer.hpp"

#include <algorithm>
#include <cmath>

namespace rezone {

uint64_t mix_seed(uint64_t a, uint64_t b) {
  // splitmix64 over the combined words
  uint64_t x = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::pair<Rat, Rat> heuristic_score(const ZoneGraph& zg, const Canvas& canvas,
                                    const Extrusion& e) {
  Canvas after = apply_extrusion(zg, canvas, e);
  ZoneSet target = ZoneSet::from_ids(static_cast<int>(zg.zones.size()), zg.interior_ids);
  ZoneSet uni = target;
  uni |= after.filled;
  ZoneSet inter = target.intersect(after.filled);
  int total = static_cast<int>(zg.zones.size());
  int symdiff = uni.count() - inter.count();
  Rat score = Rat(total - symdiff, total);
  Canvas target_canvas{target};
  return {score, compute_iou(after, target_canvas, zg)};
}

Eigen::Matrix<double, 6, Eigen::Dynamic> sample_zone_pointcloud(const Zone& z,
                                                                const Vec3r& aabb_min,
                                                                const Vec3r& aabb_max, int n,
                                                                uint64_t seed) {
  struct Tri {
    Vec3d a, b, c;
    Vec3d normal;
    double area;
  };
  std::vector<Tri> tris;
  std::vector<double> cdf;
  double total = 0;
  for (const CellFacet& f : z.cell.facets) {
    Vec3i ni = f.plane.normal();
    Vec3d nd(ni[0].convert_to<double>(), ni[1].convert_to<double>(), ni[2].convert_to<double>());
    nd.normalize();
    if (!f.outward_pos) nd = -nd;
    const Vec3d a = to_double(z.cell.verts[f.loop[0]]);
    for (std::size_t i = 1; i + 1 < f.loop.size(); ++i) {
      const Vec3d b = to_double(z.cell.verts[f.loop[i]]);
      const Vec3d c = to_double(z.cell.verts[f.loop[i + 1]]);
      double area = 0.5 * (b - a).cross(c - a).norm();
      if (area <= 0) continue;
      total += area;
      tris.push_back({a, b, c, nd, area});
      cdf.push_back(total);
    }
  }

  const double ex = to_double(aabb_max[0] - aabb_min[0]);
  const double ey = to_double(aabb_max[1] - aabb_min[1]);
  const double ez = to_double(aabb_max[2] - aabb_min[2]);
  const Vec3d lo = to_double(aabb_min);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Eigen::Matrix<double, 6, Eigen::Dynamic> out(6, n);
  for (int i = 0; i < n; ++i) {
    double pick = uni(rng) * total;
    std::size_t k = std::lower_bound(cdf.begin(), cdf.end(), pick) - cdf.begin();
    if (k >= tris.size()) k = tris.size() - 1;
    const Tri& t = tris[k];
    double u = uni(rng), v = uni(rng);
    if (u + v > 1) {
      u = 1 - u;
      v = 1 - v;
    }
    Vec3d p = t.a + u * (t.b - t.a) + v * (t.c - t.a);
    out(0, i) = (p[0] - lo[0]) / ex;
    out(1, i) = (p[1] - lo[1]) / ey;
    out(2, i) = (p[2] - lo[2]) / ez;
    out(3, i) = t.normal[0];
    out(4, i) = t.normal[1];
    out(5, i) = t.normal[2];
  }
  return out;
}

Eigen::MatrixXd model_geometry(const ZoneGraph& zg, const NetConfig& cfg, uint64_t seed) {
  const int z = static_cast<int>(zg.zones.size());
  if (cfg.pointcloud) {
    const int n = cfg.points_per_zone;
    Eigen::MatrixXd geom(6, static_cast<Eigen::Index>(z) * n);
    for (const Zone& zone : zg.zones) {
      geom.block(0, static_cast<Eigen::Index>(zone.id) * n, 6, n) = sample_zone_pointcloud(
          zone, zg.aabb_min, zg.aabb_max, n, mix_seed(seed, static_cast<uint64_t>(zone.id)));
    }
    return geom;
  }
  Eigen::MatrixXd geom(4, z);
  Rat box_vol = zg.aabb_volume();
  for (const Zone& zone : zg.zones) {
    geom(0, zone.id) = to_double(zone.volume / box_vol);
    for (int k = 0; k < 3; ++k)
      geom(1 + k, zone.id) =
          to_double((zone.rep_point[k] - zg.aabb_min[k]) / (zg.aabb_max[k] - zg.aabb_min[k]));
  }
  return geom;
}

void graph_topology(const ZoneGraph& zg, bool edge_area_weights,
                    std::vector<std::vector<int>>& neighbors,
                    std::vector<std::vector<double>>& weights) {
  const int z = static_cast<int>(zg.zones.size());
  neighbors.assign(z, {});
  weights.clear();
  if (edge_area_weights) weights.assign(z, {});
  std::vector<std::vector<std::pair<int, double>>> tmp(z);
  for (const ZoneEdge& e : zg.edges) {
    double w = std::sqrt(to_double(e.area_sq));
    tmp[e.zone_a].push_back({e.zone_b, w});
    tmp[e.zone_b].push_back({e.zone_a, w});
  }
  for (int i = 0; i < z; ++i) {
    std::sort(tmp[i].begin(), tmp[i].end());
    for (auto& [j, w] : tmp[i]) {
      neighbors[i].push_back(j);
      if (edge_area_weights) weights[i].push_back(w);
    }
  }
}

namespace {

class RandomScorer : public Scorer {
 public:
  explicit RandomScorer(uint64_t seed) : rng_(seed) {}
  Score score(const Canvas&, const Extrusion&) override {
    return {std::uniform_real_distribution<double>(0.0, 1.0)(rng_), 0.0};
  }
  std::string name() const override { return "random"; }

 private:
  std::mt19937_64 rng_;
};

class HeuristicScorer : public Scorer {
 public:
  explicit HeuristicScorer(const ZoneGraph& zg) : zg_(zg) {}
  Score score(const Canvas& canvas, const Extrusion& e) override {
    auto [s, tie] = heuristic_score(zg_, canvas, e);
    return {to_double(s), to_double(tie)};
  }
  std::string name() const override { return "heur"; }

 private:
  const ZoneGraph& zg_;
};

class LearnedScorer : public Scorer {
 public:
  LearnedScorer(const ZoneGraph& zg, std::shared_ptr<const ScorerModel> model,
                uint64_t cloud_seed)
      : zg_(zg), model_(std::move(model)) {
    input_.zone_count = static_cast<int>(zg.zones.size());
    graph_topology(zg, model_->config.edge_area_weights, input_.neighbors, input_.neighbor_w);
    if (!model_->config.edge_area_weights) input_.neighbor_w.clear();
    input_.geom = model_geometry(zg, model_->config, cloud_seed);
    in_target_.assign(input_.zone_count, 0);
    for (int id : zg.interior_ids) in_target_[id] = 1;
  }

  Score score(const Canvas& canvas, const Extrusion& e) override {
    GraphInput::Example ex;
    ex.in_target = in_target_;
    ex.in_canvas.assign(input_.zone_count, 0);
    ex.in_proposal.assign(input_.zone_count, 0);
    for (int i = 0; i < input_.zone_count; ++i)
      if (canvas.filled.contains(i)) ex.in_canvas[i] = 1;
    for (int id : e.zones) ex.in_proposal[id] = 1;
    ex.op_type = e.type == BoolType::Union ? 1.0 : 0.0;
    input_.examples.assign(1, std::move(ex));
    Eigen::VectorXd probs = net_scores(*model_, input_);
    return {probs[0], 0.0};
  }
  std::string name() const override { return "net"; }

 private:
  const ZoneGraph& zg_;
  std::shared_ptr<const ScorerModel> model_;
  GraphInput input_;
  std::vector<uint8_t> in_target_;
};

}  // namespace

std::unique_ptr<Scorer> make_random_scorer(uint64_t seed) {
  return std::make_unique<RandomScorer>(seed);
}

std::unique_ptr<Scorer> make_heuristic_scorer(const ZoneGraph& zg) {
  return std::make_unique<HeuristicScorer>(zg);
}

std::unique_ptr<Scorer> make_learned_scorer(const ZoneGraph& zg,
                                            std::shared_ptr<const ScorerModel> model,
                                            uint64_t cloud_seed) {
  return std::make_unique<LearnedScorer>(zg, std::move(model), cloud_seed);
}

double neural_score(const ScorerModel& model, const ZoneGraph& zg, const Canvas& canvas,
                    const Extrusion& e, uint64_t cloud_seed) {
  auto shared = std::make_shared<ScorerModel>(model);
  LearnedScorer scorer(zg, shared, cloud_seed);
  return scorer.score(canvas, e).primary;
}

}  // namespace rezone
