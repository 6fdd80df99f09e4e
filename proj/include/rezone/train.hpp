#pragma once

#include "rezone/net.hpp"
#include "rezone/proposal.hpp"
#include "rezone/scorer.hpp"

#include <memory>
#include <vector>

namespace rezone {

enum class ExampleLabel : int8_t { Positive, Negative, Neutral };

struct EmptyEffectiveDataset : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Pure labeling rule: the ground-truth candidate is Positive; any candidate
// with zero completion success is Negative; otherwise only the minimum-p one
// (ties broken by smallest canonical key) is Negative; the rest are Neutral.
std::vector<ExampleLabel> assign_labels(const std::vector<double>& success_fraction,
                                        int gt_index, const std::vector<std::string>& keys);

struct LabeledStep {
  int model_id = 0;
  int step = 0;
  std::vector<int> canvas_ids;  // canvas before the step
  std::vector<Extrusion> proposals;
  int gt_index = -1;
  std::vector<ExampleLabel> labels;
  std::vector<double> success_fraction;
};

// Monte-Carlo rollout labeling: N = remaining ground-truth steps gives both
// the completion count and the depth cap.
LabeledStep label_examples(const ZoneGraph& zg, ProposalEngine& engine,
                           const std::vector<Extrusion>& gt_sequence, int step_index,
                           const std::vector<Extrusion>& proposals, uint64_t seed);

// One random completion; true when the canvas reaches the target within the
// depth budget.
bool random_completion(const ZoneGraph& zg, ProposalEngine& engine, Canvas canvas,
                       std::vector<Extrusion> history, int depth_budget, std::mt19937_64& rng);

struct SequenceData {
  int model_id = 0;
  std::shared_ptr<const ZoneGraph> zg;
  std::vector<LabeledStep> steps;
};

struct TrainConfig {
  double lr = 1e-3;
  double focal_gamma = 2.0;
  int epochs = 10;
  int max_negatives = 3;  // negatives sampled per optimizer step
  double val_fraction = 0.1;
  uint64_t seed = 7;
  NetConfig net;
};

struct TrainResult {
  ScorerModel model;  // weights with the best validation loss
  std::vector<double> step_losses;
  std::vector<double> val_losses;  // one per epoch
};

TrainResult train_scorer(const std::vector<SequenceData>& data, const TrainConfig& cfg);

// Batch input for one step: the positive plus selected negatives.
GraphInput build_graph_input(const ZoneGraph& zg, const NetConfig& cfg,
                             const Eigen::MatrixXd& geom,
                             const std::vector<std::vector<int>>& neighbors,
                             const std::vector<std::vector<double>>& neighbor_w,
                             const std::vector<int>& canvas_ids,
                             const std::vector<const Extrusion*>& proposals,
                             const std::vector<int>& labels);

}  // namespace rezone
