#pragma once

#include "rezone/metrics.hpp"
#include "rezone/net.hpp"
#include "rezone/proposal.hpp"

#include <memory>
#include <random>

namespace rezone {

// Score formula from zone counts after applying the candidate, with
// volumetric IoU as the tie-breaker; both exact.
std::pair<Rat, Rat> heuristic_score(const ZoneGraph& zg, const Canvas& canvas,
                                    const Extrusion& e);

// n boundary points with outward unit normals, facet-area weighted.
// Rows 0-2: positions mapped into the AABB unit cube; rows 3-5: normals.
Eigen::Matrix<double, 6, Eigen::Dynamic> sample_zone_pointcloud(const Zone& z,
                                                                const Vec3r& aabb_min,
                                                                const Vec3r& aabb_max, int n,
                                                                uint64_t seed);

// Shared per-zone geometry for the learned scorer; pointcloud or basic
// (volume + centroid) features per the config.
Eigen::MatrixXd model_geometry(const ZoneGraph& zg, const NetConfig& cfg, uint64_t seed);

// Sorted neighbor lists (and optional facet-area weights) per zone.
void graph_topology(const ZoneGraph& zg, bool edge_area_weights,
                    std::vector<std::vector<int>>& neighbors,
                    std::vector<std::vector<double>>& weights);

struct Score {
  double primary = 0;
  double secondary = 0;
};

class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual Score score(const Canvas& canvas, const Extrusion& e) = 0;
  virtual std::string name() const = 0;
};

std::unique_ptr<Scorer> make_random_scorer(uint64_t seed);
std::unique_ptr<Scorer> make_heuristic_scorer(const ZoneGraph& zg);
std::unique_ptr<Scorer> make_learned_scorer(const ZoneGraph& zg,
                                            std::shared_ptr<const ScorerModel> model,
                                            uint64_t cloud_seed);

// Probability that e is a good next operation, per the learned model.
double neural_score(const ScorerModel& model, const ZoneGraph& zg, const Canvas& canvas,
                    const Extrusion& e, uint64_t cloud_seed);

uint64_t mix_seed(uint64_t a, uint64_t b);

}  // namespace rezone
