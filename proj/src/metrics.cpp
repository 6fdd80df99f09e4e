#include "rezone/metrics.hpp"

#include <algorithm>
#include <cstdio>

namespace rezone {

Rat compute_iou(const Canvas& a, const Canvas& b, const ZoneGraph& zg) {
  Rat inter(0), uni(0);
  bool any = false;
  for (const Zone& z : zg.zones) {
    bool ia = a.filled.contains(z.id);
    bool ib = b.filled.contains(z.id);
    if (ia && ib) inter += z.volume;
    if (ia || ib) {
      uni += z.volume;
      any = true;
    }
  }
  if (!any) return Rat(1);
  return inter / uni;
}

Rat relative_rank(const std::vector<RankedCandidate>& candidates, int gt_index) {
  if (candidates.empty() || gt_index < 0 || gt_index >= static_cast<int>(candidates.size()))
    throw std::invalid_argument("relative_rank: invalid ground-truth index");
  std::vector<int> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    const RankedCandidate& a = candidates[x];
    const RankedCandidate& b = candidates[y];
    if (a.primary != b.primary) return a.primary > b.primary;
    if (a.secondary != b.secondary) return a.secondary > b.secondary;
    return a.key < b.key;
  });
  int rank = 0;
  for (std::size_t i = 0; i < order.size(); ++i)
    if (order[i] == gt_index) rank = static_cast<int>(i) + 1;
  return Rat(rank, static_cast<int>(candidates.size()));
}

std::string decimal12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string decimal12(const Rat& q) { return decimal12(to_double(q)); }

}  // namespace rezone
