#pragma once

#include "rezone/proposal.hpp"

#include <string>
#include <vector>

namespace rezone {

// Volumetric IoU over exact zone volumes; 1 when both canvases are empty.
Rat compute_iou(const Canvas& a, const Canvas& b, const ZoneGraph& zg);

struct RankedCandidate {
  double primary = 0;
  double secondary = 0;
  std::string key;
};

// 1-based rank of the ground-truth candidate under descending score (ties by
// ascending canonical key), divided by the candidate count.
Rat relative_rank(const std::vector<RankedCandidate>& candidates, int gt_index);

// Fixed-format decimal with 12 significant digits, for CSV output.
std::string decimal12(const Rat& q);
std::string decimal12(double v);

}  // namespace rezone
