#include "rezone/metrics.hpp"

#include "fixtures.hpp"
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

TEST_CASE("IoU identities") {
  ZoneGraph zg = classified(l_prism_doc());
  const int nz = 4;
  Canvas a{ZoneSet::from_ids(nz, {0, 1})};
  Canvas b{ZoneSet::from_ids(nz, {2, 3})};
  Canvas empty{ZoneSet(nz)};
  CHECK(compute_iou(a, a, zg) == Rat(1));
  CHECK(compute_iou(a, b, zg) == Rat(0));
  CHECK(compute_iou(empty, empty, zg) == Rat(1));
  CHECK(compute_iou(a, b, zg) == compute_iou(b, a, zg));

  // Two of three equal-volume target zones, no extras -> exactly 2/3.
  std::vector<int> interior = zg.interior_ids;
  REQUIRE(interior.size() == 3);
  Canvas two{ZoneSet::from_ids(nz, {interior[0], interior[1]})};
  Canvas target{ZoneSet::from_ids(nz, interior)};
  CHECK(compute_iou(two, target, zg) == Rat(2, 3));
  CHECK((compute_iou(two, target, zg) == Rat(1)) == false);
}

TEST_CASE("relative rank with deterministic tie-breaking") {
  std::vector<RankedCandidate> c(10);
  for (int i = 0; i < 10; ++i) {
    c[i].primary = 10 - i;
    c[i].key = "k" + std::to_string(i);
  }
  CHECK(relative_rank(c, 0) == Rat(1, 10));
  CHECK(relative_rank(c, 9) == Rat(1));
  // Ties broken by ascending canonical key.
  std::vector<RankedCandidate> tied{{1.0, 0.0, "b"}, {1.0, 0.0, "a"}, {0.5, 0.0, "c"}};
  CHECK(relative_rank(tied, 0) == Rat(2, 3));
  CHECK(relative_rank(tied, 1) == Rat(1, 3));
  CHECK_THROWS_AS(relative_rank({}, 0), std::invalid_argument);
}

TEST_CASE("random scorer mean relative rank sits near one half") {
  SynthConfig scfg;
  scfg.min_ops = 2;
  scfg.max_ops = 4;
  GenConfig gcfg{30, 1234, scfg};
  std::vector<DatasetEntry> data = generate_dataset(gcfg, 2);
  RankReport report = eval_rank(data, ScorerKind::Random, nullptr, 99, 1, 2);
  CHECK(report.rankable_steps >= 50);
  CHECK(report.mean_relative_rank >= 0.40);
  CHECK(report.mean_relative_rank <= 0.60);
}

TEST_CASE("rank and recon CSV outputs are byte-stable") {
  SynthConfig scfg;
  scfg.min_ops = 2;
  scfg.max_ops = 3;
  GenConfig gcfg{6, 777, scfg};
  std::vector<DatasetEntry> data = generate_dataset(gcfg, 2);

  RankReport r1 = eval_rank(data, ScorerKind::Random, nullptr, 5, 1, 2);
  RankReport r2 = eval_rank(data, ScorerKind::Random, nullptr, 5, 1, 1);
  CHECK(r1.rank_csv == r2.rank_csv);
  CHECK(r1.coverage_csv == r2.coverage_csv);

  SearchConfig cfg;
  cfg.budget_s = 10;
  ReconReport e1 = eval_recon(data, ScorerKind::Heuristic, nullptr, cfg, false, 5, 2);
  ReconReport e2 = eval_recon(data, ScorerKind::Heuristic, nullptr, cfg, false, 5, 1);
  CHECK(e1.recon_csv == e2.recon_csv);
}

TEST_CASE("decimal formatting is fixed-width significant digits") {
  CHECK(decimal12(Rat(1)) == "1");
  CHECK(decimal12(Rat(2, 3)) == "0.666666666667");
  CHECK(decimal12(0.5) == "0.5");
}
