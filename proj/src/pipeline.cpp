#include "rezone/pipeline.hpp"

#include "rezone/json_util.hpp"
#include "rezone/metrics.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

namespace rezone {

namespace fs = std::filesystem;

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

std::vector<DatasetEntry> generate_dataset(const GenConfig& cfg, int threads) {
  std::vector<DatasetEntry> out(cfg.count);
  parallel_for(cfg.count, threads, [&](int i) {
    SynthProgram prog = generate_program(mix_seed(cfg.seed, static_cast<uint64_t>(i)), cfg.synth);
    ExecutedProgram exec = execute_program(prog);
    DatasetEntry e;
    e.model_id = i;
    e.program = std::move(prog);
    e.brep = std::make_shared<BRep>(std::move(exec.brep));
    e.zg = std::make_shared<ZoneGraph>(std::move(exec.zone_graph));
    e.gt_ops = std::move(exec.gt_zone_ops);
    out[i] = std::move(e);
  });
  return out;
}

void write_dataset(const std::vector<DatasetEntry>& data, const fs::path& dir) {
  fs::create_directories(dir);
  for (const DatasetEntry& e : data) {
    char name[32];
    std::snprintf(name, sizeof(name), "model_%05d", e.model_id);
    fs::path mdir = dir / name;
    fs::create_directories(mdir);
    {
      std::ofstream os(mdir / "model.json");
      os << serialize_brep(*e.brep).dump(1) << "\n";
    }
    {
      nlohmann::ordered_json gt;
      gt["program"] = program_to_json(e.program);
      gt["zone_ops"] = zone_ops_to_json(e.gt_ops);
      std::ofstream os(mdir / "gt.json");
      os << gt.dump(1) << "\n";
    }
    {
      std::ofstream os(mdir / "zg.json");
      os << zone_graph_to_json(*e.zg).dump(1) << "\n";
    }
  }
}

std::vector<DatasetEntry> load_dataset(const fs::path& dir) {
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_directory() && entry.path().filename().string().rfind("model_", 0) == 0)
      dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());
  std::vector<DatasetEntry> out;
  for (const fs::path& mdir : dirs) {
    DatasetEntry e;
    e.model_id = std::stoi(mdir.filename().string().substr(6));
    {
      std::ifstream is(mdir / "model.json");
      nlohmann::json doc = nlohmann::json::parse(is);
      e.brep = std::make_shared<BRep>(parse_brep(doc));
    }
    {
      std::ifstream is(mdir / "gt.json");
      nlohmann::json doc = nlohmann::json::parse(is);
      e.program = program_from_json(doc.at("program"));
      e.gt_ops = zone_ops_from_json(doc.at("zone_ops"));
    }
    {
      std::ifstream is(mdir / "zg.json");
      nlohmann::json doc = nlohmann::json::parse(is);
      e.zg = std::make_shared<ZoneGraph>(zone_graph_from_json(doc));
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<Extrusion> gt_to_extrusions(const std::vector<ZoneOp>& ops) {
  std::vector<Extrusion> out;
  for (const ZoneOp& op : ops) {
    Extrusion e;
    e.zones = op.zones;
    e.type = op.type;
    e.canonical_key = op.canonical_key;
    e.direction = Vec3r(Rat(0), Rat(0), Rat(0));
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<SequenceData> label_dataset(const std::vector<DatasetEntry>& data, uint64_t seed,
                                        int threads, int level) {
  std::vector<SequenceData> out(data.size());
  parallel_for(static_cast<int>(data.size()), threads, [&](int i) {
    const DatasetEntry& entry = data[i];
    SequenceData sd;
    sd.model_id = entry.model_id;
    sd.zg = entry.zg;
    ProposalEngine engine(*entry.zg);
    std::vector<Extrusion> gt = gt_to_extrusions(entry.gt_ops);
    Canvas canvas{ZoneSet(static_cast<int>(entry.zg->zones.size()))};
    std::vector<Extrusion> prefix;
    for (int step = 0; step < static_cast<int>(gt.size()); ++step) {
      std::vector<Extrusion> props = engine.generate(canvas, level, prefix);
      bool covered = false;
      for (const Extrusion& p : props) covered |= p.canonical_key == gt[step].canonical_key;
      if (covered) {
        LabeledStep ls = label_examples(
            *entry.zg, engine, gt, step, props,
            mix_seed(seed, mix_seed(static_cast<uint64_t>(entry.model_id),
                                    static_cast<uint64_t>(step))));
        ls.model_id = entry.model_id;
        sd.steps.push_back(std::move(ls));
      }
      canvas = apply_extrusion(*entry.zg, canvas, gt[step]);
      prefix.push_back(gt[step]);
    }
    out[i] = std::move(sd);
  });
  return out;
}

ScorerKind scorer_kind_from_string(const std::string& s) {
  if (s == "random") return ScorerKind::Random;
  if (s == "heur") return ScorerKind::Heuristic;
  if (s == "net") return ScorerKind::Learned;
  throw std::invalid_argument("unknown scorer: " + s + " (want random|heur|net)");
}

std::string scorer_kind_name(ScorerKind k) {
  switch (k) {
    case ScorerKind::Random: return "random";
    case ScorerKind::Heuristic: return "heur";
    default: return "net";
  }
}

namespace {

std::unique_ptr<Scorer> make_scorer(ScorerKind kind, const ZoneGraph& zg,
                                    const ScorerModel* model, uint64_t seed) {
  switch (kind) {
    case ScorerKind::Random: return make_random_scorer(seed);
    case ScorerKind::Heuristic: return make_heuristic_scorer(zg);
    default: {
      if (!model) throw std::invalid_argument("the learned scorer needs --weights");
      auto shared = std::make_shared<ScorerModel>(*model);
      return make_learned_scorer(zg, shared, seed);
    }
  }
}

}  // namespace

RankReport eval_rank(const std::vector<DatasetEntry>& data, ScorerKind kind,
                     const ScorerModel* model, uint64_t seed, int level, int threads) {
  struct ModelRows {
    std::string rank_rows, coverage_rows;
    double rank_sum = 0;
    long rankable = 0;
    bool fully_covered = true;
  };
  std::vector<ModelRows> rows(data.size());

  parallel_for(static_cast<int>(data.size()), threads, [&](int i) {
    const DatasetEntry& entry = data[i];
    ModelRows& mr = rows[i];
    ProposalEngine engine(*entry.zg);
    std::vector<Extrusion> gt = gt_to_extrusions(entry.gt_ops);
    Canvas canvas{ZoneSet(static_cast<int>(entry.zg->zones.size()))};
    std::vector<Extrusion> prefix;
    int covered_steps = 0;
    std::string cause;
    for (int step = 0; step < static_cast<int>(gt.size()); ++step) {
      std::vector<Extrusion> props = engine.generate(canvas, level, prefix);
      int gt_index = -1;
      for (std::size_t p = 0; p < props.size(); ++p)
        if (props[p].canonical_key == gt[step].canonical_key) gt_index = static_cast<int>(p);
      if (gt_index < 0) {
        mr.fully_covered = false;
        if (cause.empty()) {
          // Would a deeper proposal level have found it?
          std::vector<Extrusion> deep = engine.generate(canvas, 3, prefix);
          bool found3 = false;
          for (const Extrusion& p : deep) found3 |= p.canonical_key == gt[step].canonical_key;
          cause = found3 ? "level1_miss_level3_hit" : "not_proposed";
        }
      } else {
        ++covered_steps;
        auto scorer = make_scorer(kind, *entry.zg, model,
                                  mix_seed(seed, mix_seed(static_cast<uint64_t>(entry.model_id),
                                                          static_cast<uint64_t>(step))));
        std::vector<RankedCandidate> cands;
        cands.reserve(props.size());
        for (const Extrusion& p : props) {
          Score s = scorer->score(canvas, p);
          cands.push_back({s.primary, s.secondary, p.canonical_key});
        }
        Rat rr = relative_rank(cands, gt_index);
        long rank_1based = (rr * Rat(static_cast<int>(cands.size()))).convert_to<long>();
        mr.rank_rows += std::to_string(entry.model_id) + "," + std::to_string(step) + "," +
                        std::to_string(cands.size()) + "," + std::to_string(rank_1based) + "," +
                        decimal12(rr) + "\n";
        mr.rank_sum += to_double(rr);
        ++mr.rankable;
      }
      canvas = apply_extrusion(*entry.zg, canvas, gt[step]);
      prefix.push_back(gt[step]);
    }
    mr.coverage_rows = std::to_string(entry.model_id) + "," + std::to_string(gt.size()) + "," +
                       std::to_string(covered_steps) + "," +
                       (mr.fully_covered ? "1" : "0") + "," + cause + "\n";
  });

  RankReport report;
  std::string rank_csv = "model_id,step,candidate_count,gt_rank,relative_rank\n";
  std::string cov_csv = "model_id,steps,covered_steps,fully_covered,cause\n";
  double sum = 0;
  long rankable = 0;
  int covered_models = 0;
  for (const ModelRows& mr : rows) {
    rank_csv += mr.rank_rows;
    cov_csv += mr.coverage_rows;
    sum += mr.rank_sum;
    rankable += mr.rankable;
    covered_models += mr.fully_covered ? 1 : 0;
  }
  report.rank_csv = std::move(rank_csv);
  report.coverage_csv = std::move(cov_csv);
  report.rankable_steps = rankable;
  report.mean_relative_rank = rankable ? sum / rankable : 0.0;
  report.coverage_fraction = data.empty() ? 0.0 : static_cast<double>(covered_models) / data.size();
  return report;
}

ReconReport eval_recon(const std::vector<DatasetEntry>& data, ScorerKind kind,
                       const ScorerModel* model, const SearchConfig& cfg, bool simplify,
                       uint64_t seed, int threads) {
  struct Row {
    std::string recon, timing;
    bool exact = false;
    double wall = 0;
    std::vector<std::pair<double, double>> improvements;
  };
  std::vector<Row> rows(data.size());
  const std::string sname = scorer_kind_name(kind);

  parallel_for(static_cast<int>(data.size()), threads, [&](int i) {
    const DatasetEntry& entry = data[i];
    const ZoneGraph* zg = entry.zg.get();
    std::shared_ptr<ZoneGraph> rebuilt;
    if (simplify) {
      std::vector<FaceLoop> loops = find_face_loops(*entry.brep);
      rebuilt = std::make_shared<ZoneGraph>(
          build_zone_graph(*entry.brep, loops, {.simplify = true}));
      classify_zones(*rebuilt, *entry.brep);
      zg = rebuilt.get();
    }
    ProposalEngine engine(*zg);
    auto scorer =
        make_scorer(kind, *zg, model, mix_seed(seed, static_cast<uint64_t>(entry.model_id)));
    SearchConfig sc = cfg;
    sc.seed = mix_seed(seed, static_cast<uint64_t>(entry.model_id));
    SearchResult res = search(*zg, engine, *scorer, sc);
    Row& row = rows[i];
    row.exact = res.status == SearchStatus::Success;
    row.wall = res.stats.wall_s;
    row.improvements = res.stats.improvements;
    row.recon = std::to_string(entry.model_id) + "," + sname + "," +
                (row.exact ? "success" : "timeout") + "," + decimal12(res.best_iou) + "," +
                std::to_string(res.sequence.size()) + "," +
                std::to_string(res.stats.nodes_expanded) + "\n";
    row.timing = std::to_string(entry.model_id) + "," + decimal12(row.wall) + "\n";
  });

  ReconReport report;
  report.model_count = static_cast<int>(data.size());
  std::string recon_csv = "model_id,scorer,status,iou,sequence_len,nodes_expanded\n";
  std::string timing_csv = "model_id,wall_s\n";
  for (const Row& r : rows) {
    recon_csv += r.recon;
    timing_csv += r.timing;
    report.exact_count += r.exact ? 1 : 0;
    report.total_wall_s += r.wall;
  }

  std::string curve_csv = "scorer,time_s,mean_iou\n";
  const double checkpoints[] = {0.05, 0.1, 0.2, 0.5, 1, 2, 5, 10, 20, 30};
  for (double t : checkpoints) {
    if (t > cfg.budget_s + 1e-9) break;
    double total = 0;
    for (const Row& r : rows) {
      double best = 0;
      for (const auto& [el, iou] : r.improvements)
        if (el <= t) best = iou;
      total += best;
    }
    curve_csv += sname + "," + decimal12(t) + "," +
                 decimal12(rows.empty() ? 0.0 : total / rows.size()) + "\n";
  }

  report.recon_csv = std::move(recon_csv);
  report.timing_csv = std::move(timing_csv);
  report.curve_csv = std::move(curve_csv);
  return report;
}

nlohmann::ordered_json extrusion_to_json(const Extrusion& e) {
  nlohmann::ordered_json ej;
  ej["start_plane"] = e.start_plane;
  ej["end_plane"] = e.end_plane;
  ej["direction"] = vec3_to_json(e.direction);
  ej["sketch_facets"] = e.sketch_pieces;
  ej["zones"] = e.zones;
  ej["bool_type"] = e.type == BoolType::Union ? "union" : "difference";
  ej["key"] = e.canonical_key;
  return ej;
}

Extrusion extrusion_from_json(const nlohmann::json& doc) {
  Extrusion e;
  e.start_plane = doc.at("start_plane").get<int>();
  e.end_plane = doc.at("end_plane").get<int>();
  e.direction = vec3_from_json(doc.at("direction"));
  e.sketch_pieces = doc.at("sketch_facets").get<std::vector<int>>();
  e.zones = doc.at("zones").get<std::vector<int>>();
  e.type =
      doc.at("bool_type").get<std::string>() == "union" ? BoolType::Union : BoolType::Difference;
  e.canonical_key = doc.at("key").get<std::string>();
  return e;
}

nlohmann::ordered_json search_result_to_json(const SearchResult& res) {
  nlohmann::ordered_json doc;
  doc["status"] = res.status == SearchStatus::Success ? "success" : "timeout";
  doc["iou"] = decimal12(res.best_iou);
  doc["iou_exact"] = rat_to_string(res.best_iou);
  auto& seq = doc["sequence"] = nlohmann::ordered_json::array();
  for (const Extrusion& e : res.sequence) seq.push_back(extrusion_to_json(e));
  auto& snaps = doc["snapshots"] = nlohmann::ordered_json::array();
  for (const auto& s : res.snapshots) snaps.push_back(s);
  doc["stats"] = {{"nodes_expanded", res.stats.nodes_expanded},
                  {"proposals_scored", res.stats.proposals_scored},
                  {"wall_s", res.stats.wall_s}};
  return doc;
}

}  // namespace rezone
