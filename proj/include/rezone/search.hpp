#pragma once

#include "rezone/proposal.hpp"
#include "rezone/scorer.hpp"

#include <cstdint>
#include <vector>

namespace rezone {

struct SearchConfig {
  int width_k = 5;
  double k_decay = 0.0;  // per-depth decrement of the retained width
  int k_floor = 1;
  double budget_s = 30.0;
  int proposal_level = 1;
  uint64_t seed = 0;  // consumed by the random scorer
};

enum class SearchStatus { Success, Timeout };

struct SearchStats {
  long nodes_expanded = 0;
  long proposals_scored = 0;
  double wall_s = 0;
  // (elapsed seconds, best IoU) sampled at every improvement.
  std::vector<std::pair<double, double>> improvements;
};

struct SearchResult {
  SearchStatus status = SearchStatus::Timeout;
  std::vector<Extrusion> sequence;
  Canvas final_canvas;
  Rat best_iou;
  SearchStats stats;
  std::vector<std::vector<int>> snapshots;  // canvas zone ids after each op
};

// Depth-first best-first search with backtracking over extrusion proposals.
// Keeps the top ceil(max(k_floor, width_k - depth*k_decay)) children per
// node, prunes revisited canvases, and stops on exact reconstruction or
// budget exhaustion (returning the best-IoU canvas encountered).
SearchResult search(const ZoneGraph& zg, ProposalEngine& engine, Scorer& scorer,
                    const SearchConfig& cfg);

}  // namespace rezone
