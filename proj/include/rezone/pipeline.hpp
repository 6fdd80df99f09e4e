#pragma once

#include "rezone/search.hpp"
#include "rezone/synth.hpp"
#include "rezone/train.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <functional>
#include <memory>

namespace rezone {

struct DatasetEntry {
  int model_id = 0;
  SynthProgram program;
  std::shared_ptr<BRep> brep;
  std::shared_ptr<ZoneGraph> zg;  // simplify off, classified
  std::vector<ZoneOp> gt_ops;
};

struct GenConfig {
  int count = 100;
  uint64_t seed = 1;
  SynthConfig synth;
};

std::vector<DatasetEntry> generate_dataset(const GenConfig& cfg, int threads);
void write_dataset(const std::vector<DatasetEntry>& data, const std::filesystem::path& dir);
std::vector<DatasetEntry> load_dataset(const std::filesystem::path& dir);

// Zone-level ground-truth ops as replayable extrusions.
std::vector<Extrusion> gt_to_extrusions(const std::vector<ZoneOp>& ops);

// Rollout-labels every covered step of every sequence.
std::vector<SequenceData> label_dataset(const std::vector<DatasetEntry>& data, uint64_t seed,
                                        int threads, int level);

enum class ScorerKind { Random, Heuristic, Learned };
ScorerKind scorer_kind_from_string(const std::string& s);
std::string scorer_kind_name(ScorerKind k);

struct RankReport {
  std::string rank_csv;
  std::string coverage_csv;
  double mean_relative_rank = 0;  // over rankable steps
  double coverage_fraction = 0;   // sequences fully covered at the eval level
  long rankable_steps = 0;
};

RankReport eval_rank(const std::vector<DatasetEntry>& data, ScorerKind kind,
                     const ScorerModel* model, uint64_t seed, int level, int threads);

struct ReconReport {
  std::string recon_csv;   // deterministic columns only
  std::string timing_csv;  // wall-clock side channel
  std::string curve_csv;   // accuracy-vs-time at fixed checkpoints
  int exact_count = 0;
  int model_count = 0;
  double total_wall_s = 0;
};

ReconReport eval_recon(const std::vector<DatasetEntry>& data, ScorerKind kind,
                       const ScorerModel* model, const SearchConfig& cfg, bool simplify,
                       uint64_t seed, int threads);

void parallel_for(int n, int threads, const std::function<void(int)>& fn);

nlohmann::ordered_json extrusion_to_json(const Extrusion& e);
Extrusion extrusion_from_json(const nlohmann::json& doc);
nlohmann::ordered_json search_result_to_json(const SearchResult& res);

}  // namespace rezone
