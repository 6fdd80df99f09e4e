#include "rezone/train.hpp"

#include "fixtures.hpp"
#include "rezone/pipeline.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <numeric>

using namespace rezone;
using namespace rezone::tests;

TEST_CASE("label assignment rule") {
  std::vector<std::string> keys{"a", "b", "c", "d"};
  // GT at index 0; rollout fractions for the rest.
  auto labels = assign_labels({1.0, 0.4, 0.7, 1.0}, 0, keys);
  CHECK(labels[0] == ExampleLabel::Positive);
  CHECK(labels[1] == ExampleLabel::Negative);  // smallest p
  CHECK(labels[2] == ExampleLabel::Neutral);
  CHECK(labels[3] == ExampleLabel::Neutral);

  // Any p = 0 is negative, even several.
  labels = assign_labels({1.0, 0.0, 0.5, 0.0}, 0, keys);
  CHECK(labels[1] == ExampleLabel::Negative);
  CHECK(labels[2] == ExampleLabel::Neutral);
  CHECK(labels[3] == ExampleLabel::Negative);

  // Ties on minimum p: the smallest canonical key wins.
  labels = assign_labels({1.0, 0.5, 0.5, 0.9}, 0, keys);
  CHECK(labels[1] == ExampleLabel::Negative);
  CHECK(labels[2] == ExampleLabel::Neutral);
}

namespace {

std::vector<SequenceData> toy_dataset(int count, uint64_t seed) {
  SynthConfig scfg;
  scfg.min_ops = 2;
  scfg.max_ops = 3;
  scfg.grid = 3;
  GenConfig gcfg{count, seed, scfg};
  std::vector<DatasetEntry> data = generate_dataset(gcfg, 2);
  return label_dataset(data, mix_seed(seed, 5), 2, 1);
}

}  // namespace

TEST_CASE("labeling marks the ground truth positive with a negative per step") {
  auto labeled = toy_dataset(4, 21);
  long steps = 0;
  for (const SequenceData& sd : labeled) {
    for (const LabeledStep& st : sd.steps) {
      ++steps;
      int pos = 0, neg = 0;
      for (std::size_t i = 0; i < st.labels.size(); ++i) {
        pos += st.labels[i] == ExampleLabel::Positive;
        neg += st.labels[i] == ExampleLabel::Negative;
        if (static_cast<int>(i) == st.gt_index)
          CHECK(st.labels[i] == ExampleLabel::Positive);
      }
      CHECK(pos == 1);
      if (st.labels.size() > 1) CHECK(neg >= 1);
    }
  }
  CHECK(steps > 0);
}

TEST_CASE("labeling is deterministic per seed") {
  auto a = toy_dataset(3, 33);
  auto b = toy_dataset(3, 33);
  REQUIRE(a.size() == b.size());
  for (std::size_t s = 0; s < a.size(); ++s) {
    REQUIRE(a[s].steps.size() == b[s].steps.size());
    for (std::size_t t = 0; t < a[s].steps.size(); ++t) {
      CHECK(a[s].steps[t].labels == b[s].steps[t].labels);
      CHECK(a[s].steps[t].success_fraction == b[s].steps[t].success_fraction);
    }
  }
}

TEST_CASE("training decreases the smoothed loss and is seed-deterministic") {
  auto labeled = toy_dataset(6, 77);
  TrainConfig cfg;
  cfg.epochs = 8;
  cfg.seed = 7;
  cfg.net.points_per_zone = 16;
  cfg.net.rounds = 2;

  TrainResult a = train_scorer(labeled, cfg);
  REQUIRE(a.step_losses.size() >= 20);
  const std::size_t w = 10;
  double first = std::accumulate(a.step_losses.begin(), a.step_losses.begin() + w, 0.0) / w;
  double last = std::accumulate(a.step_losses.end() - w, a.step_losses.end(), 0.0) / w;
  CHECK(last < first);

  TrainResult b = train_scorer(labeled, cfg);
  REQUIRE(a.step_losses.size() == b.step_losses.size());
  for (std::size_t i = 0; i < a.step_losses.size(); ++i)
    CHECK(a.step_losses[i] == b.step_losses[i]);
  // Final weights bit-identical.
  auto pa = a.model.params();
  auto pb = b.model.params();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (pa[i].mat)
      CHECK((*pa[i].mat - *pb[i].mat).cwiseAbs().maxCoeff() == 0.0);
    else
      CHECK((*pa[i].vec - *pb[i].vec).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("empty effective dataset is rejected") {
  std::vector<SequenceData> empty;
  TrainConfig cfg;
  CHECK_THROWS_AS(train_scorer(empty, cfg), EmptyEffectiveDataset);
}
