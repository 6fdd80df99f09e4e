#include "rezone/search.hpp"

#include "rezone/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <set>

namespace rezone {

namespace {

bool lex_keys_less(const std::vector<Extrusion>& a, const std::vector<Extrusion>& b) {
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    if (a[i].canonical_key != b[i].canonical_key) return a[i].canonical_key < b[i].canonical_key;
  }
  return a.size() < b.size();
}

}  // namespace

SearchResult search(const ZoneGraph& zg, ProposalEngine& engine, Scorer& scorer,
                    const SearchConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  const auto deadline = t0 + std::chrono::duration_cast<Clock::duration>(
                                 std::chrono::duration<double>(cfg.budget_s));
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };

  const int nz = static_cast<int>(zg.zones.size());
  const ZoneSet target = ZoneSet::from_ids(nz, zg.interior_ids);
  const Canvas target_canvas{target};

  SearchResult res;
  Canvas canvas{ZoneSet(nz)};

  std::set<std::vector<uint64_t>> visited;
  visited.insert(canvas.filled.words());

  std::vector<Extrusion> path;
  std::vector<Extrusion> best_seq;
  Rat best_iou = compute_iou(canvas, target_canvas, zg);
  res.stats.improvements.emplace_back(elapsed(), to_double(best_iou));

  bool timed_out = false;

  auto consider_best = [&](const Rat& iou) {
    bool better = iou > best_iou;
    if (!better && iou == best_iou) {
      better = path.size() < best_seq.size() ||
               (path.size() == best_seq.size() && lex_keys_less(path, best_seq));
    }
    if (better) {
      bool strict = iou > best_iou;
      best_iou = iou;
      best_seq = path;
      if (strict) res.stats.improvements.emplace_back(elapsed(), to_double(best_iou));
    }
  };

  std::function<bool(const Canvas&, int)> descend = [&](const Canvas& c, int depth) -> bool {
    if (c.filled == target) return true;
    if (Clock::now() > deadline) {
      timed_out = true;
      return false;
    }

    std::vector<Extrusion> props = engine.generate(c, cfg.proposal_level, path);
    ++res.stats.nodes_expanded;
    res.stats.proposals_scored += static_cast<long>(props.size());

    std::vector<std::pair<Score, int>> scored;
    scored.reserve(props.size());
    for (std::size_t i = 0; i < props.size(); ++i)
      scored.emplace_back(scorer.score(c, props[i]), static_cast<int>(i));
    std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
      if (a.first.primary != b.first.primary) return a.first.primary > b.first.primary;
      if (a.first.secondary != b.first.secondary) return a.first.secondary > b.first.secondary;
      return props[a.second].canonical_key < props[b.second].canonical_key;
    });

    double k_eff = std::max(static_cast<double>(cfg.k_floor),
                            cfg.width_k - depth * cfg.k_decay);
    std::size_t keep = static_cast<std::size_t>(std::ceil(k_eff));
    if (scored.size() > keep) scored.resize(keep);

    for (const auto& [score, idx] : scored) {
      const Extrusion& e = props[idx];
      Canvas child = apply_extrusion(zg, c, e);
      if (!visited.insert(child.filled.words()).second) continue;
      path.push_back(e);
      consider_best(compute_iou(child, target_canvas, zg));
      if (descend(child, depth + 1)) return true;
      path.pop_back();
      if (timed_out) return false;
    }
    return false;
  };

  bool found = descend(canvas, 0);
  res.stats.wall_s = elapsed();
  res.status = found ? SearchStatus::Success : SearchStatus::Timeout;
  res.sequence = found ? path : best_seq;
  res.best_iou = found ? Rat(1) : best_iou;

  Canvas replay{ZoneSet(nz)};
  for (const Extrusion& e : res.sequence) {
    replay = apply_extrusion(zg, replay, e);
    res.snapshots.push_back(replay.filled.ids());
  }
  res.final_canvas = replay;
  return res;
}

}  // namespace rezone
