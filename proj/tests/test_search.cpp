#include "rezone/search.hpp"

#include "fixtures.hpp"
#include "rezone/metrics.hpp"
#include "rezone/pipeline.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

using namespace rezone;
using namespace rezone::tests;

namespace {

ZoneGraph classified(const nlohmann::json& doc) {
  BRep b = parse_brep(doc);
  ZoneGraph zg = build_zone_graph(b, find_face_loops(b), {});
  classify_zones(zg, b);
  return zg;
}

}  // namespace

TEST_CASE("cube reconstructs in one union") {
  ZoneGraph zg = classified(unit_cube_doc());
  ProposalEngine engine(zg);
  auto scorer = make_heuristic_scorer(zg);
  SearchConfig cfg;
  cfg.budget_s = 10;
  SearchResult res = search(zg, engine, *scorer, cfg);
  CHECK(res.status == SearchStatus::Success);
  REQUIRE(res.sequence.size() == 1);
  CHECK(res.sequence[0].type == BoolType::Union);
  CHECK(res.best_iou == Rat(1));
}

TEST_CASE("heuristic rebuilds the L-prism and ranks block-union over partial unions") {
  ZoneGraph zg = classified(l_prism_doc());
  ProposalEngine engine(zg);
  auto scorer = make_heuristic_scorer(zg);

  // The connected L-shaped sketch reproduces the target in one union, which
  // the heuristic scores 1 and best-first search takes immediately.
  SearchConfig cfg;
  cfg.budget_s = 10;
  SearchResult res = search(zg, engine, *scorer, cfg);
  CHECK(res.status == SearchStatus::Success);
  CHECK(res.best_iou == Rat(1));
  REQUIRE(res.sequence.size() == 1);
  CHECK(res.sequence[0].type == BoolType::Union);
  CHECK(res.sequence[0].zones.size() == 3);

  // Among the remaining first-step options the full-block union (post-step
  // score (4-1)/4) outranks a single-zone union ((4-2)/4).
  Canvas empty{ZoneSet(4)};
  double block = -1, single = -1;
  for (const Extrusion& e : engine.generate(empty, 1, {})) {
    Score s = scorer->score(empty, e);
    if (e.zones.size() == 4) block = s.primary;
    if (e.type == BoolType::Union && e.zones.size() == 1 &&
        zg.is_interior(e.zones[0]))
      single = std::max(single, s.primary);
  }
  CHECK(block == 0.75);
  CHECK(single == 0.5);
  CHECK(block > single);
}

TEST_CASE("tiny budget still returns a replayable result") {
  ZoneGraph zg = classified(plate_with_hole_doc());
  ProposalEngine engine(zg);
  auto scorer = make_random_scorer(3);
  SearchConfig cfg;
  cfg.budget_s = 0.0;  // deadline passes before the first expansion
  SearchResult res = search(zg, engine, *scorer, cfg);
  CHECK(res.status == SearchStatus::Timeout);
  CHECK(res.best_iou >= 0);
  Canvas replay{ZoneSet(static_cast<int>(zg.zones.size()))};
  for (const Extrusion& e : res.sequence) replay = apply_extrusion(zg, replay, e);
  CHECK(replay.filled == res.final_canvas.filled);
}

TEST_CASE("replay soundness and prefix property over search results") {
  ZoneGraph zg = classified(plate_with_hole_doc());
  ProposalEngine engine(zg);
  auto scorer = make_heuristic_scorer(zg);
  SearchConfig cfg;
  cfg.budget_s = 20;
  SearchResult res = search(zg, engine, *scorer, cfg);
  CHECK(res.status == SearchStatus::Success);
  Canvas replay{ZoneSet(static_cast<int>(zg.zones.size()))};
  REQUIRE(res.snapshots.size() == res.sequence.size());
  for (std::size_t i = 0; i < res.sequence.size(); ++i) {
    replay = apply_extrusion(zg, replay, res.sequence[i]);
    CHECK(replay.filled.ids() == res.snapshots[i]);
    for (int id : res.snapshots[i]) CHECK(id < static_cast<int>(zg.zones.size()));
  }
  CHECK(replay.filled == ZoneSet::from_ids(static_cast<int>(zg.zones.size()), zg.interior_ids));
}

TEST_CASE("search success is deterministic and budget-monotone") {
  ZoneGraph zg = classified(l_prism_doc());
  ProposalEngine engine(zg);
  SearchConfig small, large;
  small.budget_s = 5;
  large.budget_s = 50;
  small.seed = large.seed = 9;
  auto s1 = make_random_scorer(9);
  auto s2 = make_random_scorer(9);
  SearchResult a = search(zg, engine, *s1, small);
  SearchResult b = search(zg, engine, *s2, large);
  REQUIRE(a.status == SearchStatus::Success);
  REQUIRE(b.status == SearchStatus::Success);
  REQUIRE(a.sequence.size() == b.sequence.size());
  for (std::size_t i = 0; i < a.sequence.size(); ++i)
    CHECK(a.sequence[i].canonical_key == b.sequence[i].canonical_key);
}

TEST_CASE("is_complete is exact set equality") {
  ZoneGraph zg = classified(l_prism_doc());
  const int nz = static_cast<int>(zg.zones.size());
  Canvas done{ZoneSet::from_ids(nz, zg.interior_ids)};
  CHECK(is_complete(done, zg));
  Canvas empty{ZoneSet(nz)};
  CHECK_FALSE(is_complete(empty, zg));
  Canvas extra = done;
  for (int i = 0; i < nz; ++i)
    if (!extra.filled.contains(i)) extra.filled.insert(i);
  CHECK_FALSE(is_complete(extra, zg));
}

TEST_CASE("random-guided search completes small synthetic targets") {
  // The ground-truth sequence is in the search space; a wide beam makes the
  // search effectively exhaustive at this scale.
  for (uint64_t seed : {101u, 202u, 303u}) {
    SynthConfig scfg;
    scfg.min_ops = 1;
    scfg.max_ops = 3;
    scfg.grid = 3;
    SynthProgram prog = generate_program(seed, scfg);
    ExecutedProgram exec = execute_program(prog);
    if (exec.zone_graph.planes.size() > 12) continue;
    ProposalEngine engine(exec.zone_graph);
    auto scorer = make_random_scorer(seed);
    SearchConfig cfg;
    cfg.width_k = 64;
    cfg.budget_s = 60;
    SearchResult res = search(exec.zone_graph, engine, *scorer, cfg);
    CHECK(res.status == SearchStatus::Success);
  }
}
