#include "rezone/json_util.hpp"
#include "rezone/metrics.hpp"
#include "rezone/pipeline.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <thread>

namespace {

using namespace rezone;

bool g_json_logs = false;

void log_event(const std::string& event, const nlohmann::ordered_json& fields = {}) {
  if (g_json_logs) {
    nlohmann::ordered_json j = fields;
    j["event"] = event;
    std::cerr << j.dump() << "\n";
  } else {
    std::cerr << event;
    for (auto& [k, v] : fields.items()) std::cerr << " " << k << "=" << v.dump();
    std::cerr << "\n";
  }
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return nlohmann::json::parse(is);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << text;
}

void write_json(const std::string& path, const nlohmann::ordered_json& doc) {
  write_text(path, doc.dump(1) + "\n");
}

ZoneGraph load_zone_graph(const std::string& path) {
  return zone_graph_from_json(read_json(path));
}

int run(int argc, char** argv) {
  CLI::App app{"zone-graph CAD sequence reconstruction"};
  app.require_subcommand(1);

  uint64_t seed = 1;
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  app.add_option("--seed", seed, "global RNG seed");
  app.add_option("--threads", threads, "worker threads for dataset-level commands");
  app.add_flag("--json-logs", g_json_logs, "emit structured log lines on stderr");

  // build-zone-graph
  auto* zg_cmd = app.add_subcommand("build-zone-graph", "partition a B-rep into zones");
  std::string zg_in, zg_out;
  bool zg_simplify = false;
  zg_cmd->add_option("--in", zg_in, "B-rep JSON")->required();
  zg_cmd->add_option("--out", zg_out, "zone graph JSON")->required();
  zg_cmd->add_flag("--simplify", zg_simplify, "restrict loop-plane extension");

  // propose
  auto* prop_cmd = app.add_subcommand("propose", "enumerate extrusion proposals");
  std::string prop_zg, prop_canvas, prop_out;
  int prop_level = 1;
  prop_cmd->add_option("--zg", prop_zg)->required();
  prop_cmd->add_option("--canvas", prop_canvas, "JSON list of filled zone ids");
  prop_cmd->add_option("--level", prop_level);
  prop_cmd->add_option("--out", prop_out)->required();

  // search
  auto* search_cmd = app.add_subcommand("search", "search for a modeling sequence");
  std::string s_zg, s_scorer = "heur", s_weights, s_out, s_stats;
  SearchConfig s_cfg;
  search_cmd->add_option("--zg", s_zg)->required();
  search_cmd->add_option("--scorer", s_scorer, "random|heur|net");
  search_cmd->add_option("--weights", s_weights, "weight file for the net scorer");
  search_cmd->add_option("--k", s_cfg.width_k);
  search_cmd->add_option("--k-decay", s_cfg.k_decay);
  search_cmd->add_option("--k-floor", s_cfg.k_floor);
  search_cmd->add_option("--budget", s_cfg.budget_s, "seconds");
  search_cmd->add_option("--level", s_cfg.proposal_level);
  search_cmd->add_option("--out", s_out)->required();
  search_cmd->add_option("--stats", s_stats, "improvement curve CSV");

  // replay
  auto* replay_cmd = app.add_subcommand("replay", "replay a sequence and verify");
  std::string r_zg, r_seq;
  replay_cmd->add_option("--zg", r_zg)->required();
  replay_cmd->add_option("--seq", r_seq)->required();

  // gen-dataset
  auto* gen_cmd = app.add_subcommand("gen-dataset", "generate synthetic models");
  GenConfig gen_cfg;
  std::string gen_out;
  gen_cmd->add_option("--count", gen_cfg.count);
  gen_cmd->add_option("--min-ops", gen_cfg.synth.min_ops);
  gen_cmd->add_option("--max-ops", gen_cfg.synth.max_ops);
  gen_cmd->add_option("--grid", gen_cfg.synth.grid);
  gen_cmd->add_option("--out", gen_out)->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "train the learned scorer");
  std::string t_data, t_out, t_features = "pointcloud";
  TrainConfig t_cfg;
  train_cmd->add_option("--data", t_data)->required();
  train_cmd->add_option("--out", t_out)->required();
  train_cmd->add_option("--gamma", t_cfg.focal_gamma);
  train_cmd->add_option("--lr", t_cfg.lr);
  train_cmd->add_option("--epochs", t_cfg.epochs);
  train_cmd->add_option("--rounds", t_cfg.net.rounds);
  train_cmd->add_option("--points", t_cfg.net.points_per_zone);
  train_cmd->add_option("--features", t_features, "pointcloud|basic");
  bool t_edge_weights = false;
  train_cmd->add_flag("--edge-weights", t_edge_weights, "facet-area weighted messages");

  // eval-rank
  auto* rank_cmd = app.add_subcommand("eval-rank", "rank ground-truth steps");
  std::string er_data, er_scorer = "heur", er_weights, er_out, er_cov;
  int er_level = 1;
  rank_cmd->add_option("--data", er_data)->required();
  rank_cmd->add_option("--scorer", er_scorer);
  rank_cmd->add_option("--weights", er_weights);
  rank_cmd->add_option("--level", er_level);
  rank_cmd->add_option("--out", er_out)->required();
  rank_cmd->add_option("--coverage-out", er_cov, "per-sequence coverage CSV");

  // eval-recon
  auto* recon_cmd = app.add_subcommand("eval-recon", "reconstruction accuracy vs time");
  std::string ec_data, ec_scorer = "heur", ec_weights, ec_out, ec_curve, ec_timing;
  SearchConfig ec_cfg;
  bool ec_simplify = false;
  recon_cmd->add_option("--data", ec_data)->required();
  recon_cmd->add_option("--scorer", ec_scorer);
  recon_cmd->add_option("--weights", ec_weights);
  recon_cmd->add_option("--k", ec_cfg.width_k);
  recon_cmd->add_option("--k-decay", ec_cfg.k_decay);
  recon_cmd->add_option("--budget", ec_cfg.budget_s);
  recon_cmd->add_flag("--simplify", ec_simplify);
  recon_cmd->add_option("--out", ec_out)->required();
  recon_cmd->add_option("--curve", ec_curve, "accuracy-vs-time CSV");
  recon_cmd->add_option("--timing", ec_timing, "wall time side CSV");

  CLI11_PARSE(app, argc, argv);

  if (zg_cmd->parsed()) {
    BRep brep = parse_brep(read_json(zg_in));
    std::vector<FaceLoop> loops = find_face_loops(brep);
    ZoneGraph zg = build_zone_graph(brep, loops, {.simplify = zg_simplify});
    classify_zones(zg, brep);
    write_json(zg_out, zone_graph_to_json(zg));
    log_event("zone-graph", {{"zones", zg.zones.size()},
                             {"edges", zg.edges.size()},
                             {"interior", zg.interior_ids.size()}});
    return 0;
  }

  if (prop_cmd->parsed()) {
    ZoneGraph zg = load_zone_graph(prop_zg);
    ProposalEngine engine(zg);
    Canvas canvas{ZoneSet(static_cast<int>(zg.zones.size()))};
    if (!prop_canvas.empty())
      canvas.filled = ZoneSet::from_ids(static_cast<int>(zg.zones.size()),
                                        read_json(prop_canvas).get<std::vector<int>>());
    std::vector<Extrusion> props = engine.generate(canvas, prop_level, {});
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const Extrusion& e : props) {
      nlohmann::ordered_json ej = extrusion_to_json(e);
      auto& polys = ej["sketch_polygons"] = nlohmann::ordered_json::array();
      const auto& pieces = engine.pieces_on_plane(e.start_plane);
      for (int pid : e.sketch_pieces) {
        nlohmann::ordered_json poly = nlohmann::ordered_json::array();
        for (const Vec3r& v : pieces[pid].poly3) poly.push_back(vec3_to_json(v));
        polys.push_back(std::move(poly));
      }
      doc.push_back(std::move(ej));
    }
    write_json(prop_out, doc);
    log_event("propose", {{"proposals", props.size()}});
    return 0;
  }

  if (search_cmd->parsed()) {
    ZoneGraph zg = load_zone_graph(s_zg);
    ProposalEngine engine(zg);
    s_cfg.seed = seed;
    std::shared_ptr<ScorerModel> model;
    std::unique_ptr<Scorer> scorer;
    switch (scorer_kind_from_string(s_scorer)) {
      case ScorerKind::Random: scorer = make_random_scorer(seed); break;
      case ScorerKind::Heuristic: scorer = make_heuristic_scorer(zg); break;
      case ScorerKind::Learned:
        model = std::make_shared<ScorerModel>(load_weights(s_weights));
        scorer = make_learned_scorer(zg, model, seed);
        break;
    }
    SearchResult res = search(zg, engine, *scorer, s_cfg);
    write_json(s_out, search_result_to_json(res));
    if (!s_stats.empty()) {
      std::string csv = "elapsed_s,best_iou\n";
      for (auto& [el, iou] : res.stats.improvements)
        csv += decimal12(el) + "," + decimal12(iou) + "\n";
      write_text(s_stats, csv);
    }
    log_event("search", {{"status", res.status == SearchStatus::Success ? "success" : "timeout"},
                         {"iou", to_double(res.best_iou)},
                         {"ops", res.sequence.size()}});
    return res.status == SearchStatus::Success ? 0 : 3;
  }

  if (replay_cmd->parsed()) {
    ZoneGraph zg = load_zone_graph(r_zg);
    nlohmann::json doc = read_json(r_seq);
    Canvas canvas{ZoneSet(static_cast<int>(zg.zones.size()))};
    for (const auto& ej : doc.at("sequence"))
      canvas = apply_extrusion(zg, canvas, extrusion_from_json(ej));
    Canvas target{ZoneSet::from_ids(static_cast<int>(zg.zones.size()), zg.interior_ids)};
    Rat iou = compute_iou(canvas, target, zg);
    bool complete = is_complete(canvas, zg);
    nlohmann::ordered_json out;
    out["complete"] = complete;
    out["iou"] = decimal12(iou);
    out["filled"] = canvas.filled.ids();
    std::cout << out.dump(1) << "\n";
    return complete ? 0 : 3;
  }

  if (gen_cmd->parsed()) {
    gen_cfg.seed = seed;
    std::vector<DatasetEntry> data = generate_dataset(gen_cfg, threads);
    write_dataset(data, gen_out);
    log_event("gen-dataset", {{"count", data.size()}, {"dir", gen_out}});
    return 0;
  }

  if (train_cmd->parsed()) {
    t_cfg.seed = seed;
    t_cfg.net.pointcloud = t_features != "basic";
    t_cfg.net.edge_area_weights = t_edge_weights;
    std::vector<DatasetEntry> data = load_dataset(t_data);
    log_event("labeling", {{"sequences", data.size()}});
    std::vector<SequenceData> labeled = label_dataset(data, mix_seed(seed, 101), threads, 1);
    TrainResult result = train_scorer(labeled, t_cfg);
    save_weights(result.model, t_out);
    log_event("train", {{"steps", result.step_losses.size()},
                        {"final_val_loss",
                         result.val_losses.empty() ? 0.0 : result.val_losses.back()}});
    return 0;
  }

  if (rank_cmd->parsed()) {
    std::vector<DatasetEntry> data = load_dataset(er_data);
    std::unique_ptr<ScorerModel> model;
    if (!er_weights.empty()) model = std::make_unique<ScorerModel>(load_weights(er_weights));
    RankReport report = eval_rank(data, scorer_kind_from_string(er_scorer), model.get(), seed,
                                  er_level, threads);
    write_text(er_out, report.rank_csv);
    if (!er_cov.empty()) write_text(er_cov, report.coverage_csv);
    log_event("eval-rank", {{"mean_relative_rank", report.mean_relative_rank},
                            {"coverage", report.coverage_fraction}});
    return 0;
  }

  if (recon_cmd->parsed()) {
    std::vector<DatasetEntry> data = load_dataset(ec_data);
    std::unique_ptr<ScorerModel> model;
    if (!ec_weights.empty()) model = std::make_unique<ScorerModel>(load_weights(ec_weights));
    ReconReport report = eval_recon(data, scorer_kind_from_string(ec_scorer), model.get(), ec_cfg,
                                    ec_simplify, seed, threads);
    write_text(ec_out, report.recon_csv);
    if (!ec_curve.empty()) write_text(ec_curve, report.curve_csv);
    if (!ec_timing.empty()) write_text(ec_timing, report.timing_csv);
    log_event("eval-recon", {{"exact", report.exact_count}, {"models", report.model_count}});
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::Error&) {
    return 2;
  } catch (const rezone::BRepError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const rezone::TooManyZones& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
