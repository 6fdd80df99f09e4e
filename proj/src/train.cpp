#include "rezone/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rezone {

std::vector<ExampleLabel> assign_labels(const std::vector<double>& success_fraction,
                                        int gt_index, const std::vector<std::string>& keys) {
  const int n = static_cast<int>(success_fraction.size());
  std::vector<ExampleLabel> labels(n, ExampleLabel::Neutral);
  labels[gt_index] = ExampleLabel::Positive;
  bool any_zero = false;
  for (int i = 0; i < n; ++i) {
    if (i == gt_index) continue;
    if (success_fraction[i] == 0) {
      labels[i] = ExampleLabel::Negative;
      any_zero = true;
    }
  }
  if (!any_zero) {
    int worst = -1;
    for (int i = 0; i < n; ++i) {
      if (i == gt_index) continue;
      if (worst == -1 || success_fraction[i] < success_fraction[worst] ||
          (success_fraction[i] == success_fraction[worst] && keys[i] < keys[worst]))
        worst = i;
    }
    if (worst != -1) labels[worst] = ExampleLabel::Negative;
  }
  return labels;
}

bool random_completion(const ZoneGraph& zg, ProposalEngine& engine, Canvas canvas,
                       std::vector<Extrusion> history, int depth_budget, std::mt19937_64& rng) {
  const ZoneSet target = ZoneSet::from_ids(static_cast<int>(zg.zones.size()), zg.interior_ids);
  if (canvas.filled == target) return true;
  for (int d = 0; d < depth_budget; ++d) {
    std::vector<Extrusion> props = engine.generate(canvas, 1, history);
    if (props.empty()) return false;
    std::size_t pick = std::uniform_int_distribution<std::size_t>(0, props.size() - 1)(rng);
    canvas = apply_extrusion(zg, canvas, props[pick]);
    history.push_back(props[pick]);
    if (canvas.filled == target) return true;
  }
  return false;
}

LabeledStep label_examples(const ZoneGraph& zg, ProposalEngine& engine,
                           const std::vector<Extrusion>& gt_sequence, int step_index,
                           const std::vector<Extrusion>& proposals, uint64_t seed) {
  LabeledStep out;
  out.step = step_index;
  const int nz = static_cast<int>(zg.zones.size());

  Canvas canvas{ZoneSet(nz)};
  std::vector<Extrusion> prefix;
  for (int i = 0; i < step_index; ++i) {
    canvas = apply_extrusion(zg, canvas, gt_sequence[i]);
    prefix.push_back(gt_sequence[i]);
  }
  out.canvas_ids = canvas.filled.ids();
  out.proposals = proposals;

  const std::string& gt_key = gt_sequence[step_index].canonical_key;
  for (std::size_t i = 0; i < proposals.size(); ++i)
    if (proposals[i].canonical_key == gt_key) out.gt_index = static_cast<int>(i);
  if (out.gt_index < 0)
    throw std::invalid_argument("ground-truth step is not among the proposals");

  const int remaining = static_cast<int>(gt_sequence.size()) - step_index;
  out.success_fraction.assign(proposals.size(), 0.0);
  out.success_fraction[out.gt_index] = 1.0;
  std::vector<std::string> keys;
  for (const Extrusion& e : proposals) keys.push_back(e.canonical_key);

  for (std::size_t i = 0; i < proposals.size(); ++i) {
    if (static_cast<int>(i) == out.gt_index) continue;
    Canvas start = apply_extrusion(zg, canvas, proposals[i]);
    std::vector<Extrusion> history = prefix;
    history.push_back(proposals[i]);
    int successes = 0;
    for (int r = 0; r < remaining; ++r) {
      std::mt19937_64 rng(mix_seed(seed, mix_seed(i, static_cast<uint64_t>(r))));
      if (random_completion(zg, engine, start, history, remaining - 1, rng)) ++successes;
    }
    out.success_fraction[i] = static_cast<double>(successes) / remaining;
  }
  out.labels = assign_labels(out.success_fraction, out.gt_index, keys);
  return out;
}

GraphInput build_graph_input(const ZoneGraph& zg, const NetConfig& cfg,
                             const Eigen::MatrixXd& geom,
                             const std::vector<std::vector<int>>& neighbors,
                             const std::vector<std::vector<double>>& neighbor_w,
                             const std::vector<int>& canvas_ids,
                             const std::vector<const Extrusion*>& proposals,
                             const std::vector<int>& labels) {
  GraphInput in;
  in.zone_count = static_cast<int>(zg.zones.size());
  in.neighbors = neighbors;
  in.neighbor_w = neighbor_w;
  in.geom = geom;
  std::vector<uint8_t> in_target(in.zone_count, 0), in_canvas(in.zone_count, 0);
  for (int id : zg.interior_ids) in_target[id] = 1;
  for (int id : canvas_ids) in_canvas[id] = 1;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    GraphInput::Example ex;
    ex.in_target = in_target;
    ex.in_canvas = in_canvas;
    ex.in_proposal.assign(in.zone_count, 0);
    for (int id : proposals[i]->zones) ex.in_proposal[id] = 1;
    ex.op_type = proposals[i]->type == BoolType::Union ? 1.0 : 0.0;
    ex.label = labels[i];
    in.examples.push_back(std::move(ex));
  }
  (void)cfg;
  return in;
}

namespace {

struct Adam {
  double lr, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long t = 0;
  std::vector<Eigen::MatrixXd> m_mat, v_mat;
  std::vector<Eigen::VectorXd> m_vec, v_vec;

  explicit Adam(std::vector<ScorerModel::ParamRef>& params, double lr_in) : lr(lr_in) {
    for (auto& p : params) {
      if (p.mat) {
        m_mat.push_back(Eigen::MatrixXd::Zero(p.mat->rows(), p.mat->cols()));
        v_mat.push_back(Eigen::MatrixXd::Zero(p.mat->rows(), p.mat->cols()));
        m_vec.emplace_back();
        v_vec.emplace_back();
      } else {
        m_mat.emplace_back();
        v_mat.emplace_back();
        m_vec.push_back(Eigen::VectorXd::Zero(p.vec->size()));
        v_vec.push_back(Eigen::VectorXd::Zero(p.vec->size()));
      }
    }
  }

  void step(std::vector<ScorerModel::ParamRef>& params) {
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, t);
    const double bc2 = 1.0 - std::pow(beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& p = params[i];
      if (p.mat) {
        m_mat[i] = beta1 * m_mat[i] + (1 - beta1) * *p.gmat;
        v_mat[i] =
            (beta2 * v_mat[i].array() + (1 - beta2) * p.gmat->array().square()).matrix();
        p.mat->array() -=
            lr * (m_mat[i].array() / bc1) / ((v_mat[i].array() / bc2).sqrt() + eps);
      } else {
        m_vec[i] = beta1 * m_vec[i] + (1 - beta1) * *p.gvec;
        v_vec[i] =
            (beta2 * v_vec[i].array() + (1 - beta2) * p.gvec->array().square()).matrix();
        p.vec->array() -=
            lr * (m_vec[i].array() / bc1) / ((v_vec[i].array() / bc2).sqrt() + eps);
      }
    }
  }
};

struct StepRef {
  int seq;
  int step;
};

}  // namespace

TrainResult train_scorer(const std::vector<SequenceData>& data, const TrainConfig& cfg) {
  // Usable steps carry a positive and at least one negative example.
  long positives = 0, negatives = 0;
  std::vector<std::vector<StepRef>> by_seq(data.size());
  for (std::size_t s = 0; s < data.size(); ++s) {
    for (std::size_t t = 0; t < data[s].steps.size(); ++t) {
      const LabeledStep& st = data[s].steps[t];
      int neg = 0;
      for (ExampleLabel l : st.labels) neg += l == ExampleLabel::Negative;
      if (st.gt_index >= 0) ++positives;
      negatives += neg;
      if (st.gt_index >= 0 && neg > 0)
        by_seq[s].push_back({static_cast<int>(s), static_cast<int>(t)});
    }
  }
  if (positives == 0 || negatives == 0)
    throw EmptyEffectiveDataset("training needs at least one positive and one negative");

  // Validation split by sequence, never by step.
  std::mt19937_64 split_rng(mix_seed(cfg.seed, 17));
  std::vector<int> seq_order(data.size());
  std::iota(seq_order.begin(), seq_order.end(), 0);
  std::shuffle(seq_order.begin(), seq_order.end(), split_rng);
  std::size_t val_count =
      std::min(data.size() > 1 ? data.size() - 1 : std::size_t(0),
               static_cast<std::size_t>(std::ceil(cfg.val_fraction * data.size())));
  std::vector<bool> is_val(data.size(), false);
  for (std::size_t i = 0; i < val_count; ++i) is_val[seq_order[i]] = true;

  std::vector<StepRef> train_steps, val_steps;
  for (std::size_t s = 0; s < data.size(); ++s)
    for (const StepRef& ref : by_seq[s]) (is_val[s] ? val_steps : train_steps).push_back(ref);
  if (train_steps.empty())
    throw EmptyEffectiveDataset("no usable training steps after the validation split");

  // Shared per-model tensors.
  std::vector<Eigen::MatrixXd> geom(data.size());
  std::vector<std::vector<std::vector<int>>> nbrs(data.size());
  std::vector<std::vector<std::vector<double>>> nbrw(data.size());
  for (std::size_t s = 0; s < data.size(); ++s) {
    geom[s] = model_geometry(*data[s].zg, cfg.net,
                             mix_seed(cfg.seed, static_cast<uint64_t>(data[s].model_id)));
    graph_topology(*data[s].zg, cfg.net.edge_area_weights, nbrs[s], nbrw[s]);
    if (!cfg.net.edge_area_weights) nbrw[s].clear();
  }

  auto make_batch = [&](const StepRef& ref, int max_neg, uint64_t pick_seed) {
    const SequenceData& sd = data[ref.seq];
    const LabeledStep& st = sd.steps[ref.step];
    std::vector<int> neg_idx;
    for (std::size_t i = 0; i < st.labels.size(); ++i)
      if (st.labels[i] == ExampleLabel::Negative) neg_idx.push_back(static_cast<int>(i));
    if (max_neg > 0 && static_cast<int>(neg_idx.size()) > max_neg) {
      std::mt19937_64 rng(pick_seed);
      std::shuffle(neg_idx.begin(), neg_idx.end(), rng);
      neg_idx.resize(max_neg);
      std::sort(neg_idx.begin(), neg_idx.end());
    }
    std::vector<const Extrusion*> props{&st.proposals[st.gt_index]};
    std::vector<int> labels{1};
    for (int i : neg_idx) {
      props.push_back(&st.proposals[i]);
      labels.push_back(0);
    }
    return build_graph_input(*sd.zg, cfg.net, geom[ref.seq], nbrs[ref.seq], nbrw[ref.seq],
                             st.canvas_ids, props, labels);
  };

  ScorerModel model = ScorerModel::create(cfg.net, cfg.seed);
  auto params = model.params();
  Adam adam(params, cfg.lr);
  NetWorkspace ws;

  TrainResult result{ScorerModel::create(cfg.net, cfg.seed), {}, {}};
  double best_val = std::numeric_limits<double>::infinity();

  auto eval_val = [&]() {
    if (val_steps.empty()) return std::numeric_limits<double>::quiet_NaN();
    double total = 0;
    long count = 0;
    for (const StepRef& ref : val_steps) {
      GraphInput in = make_batch(ref, 0, 0);  // all negatives
      Eigen::VectorXd probs = net_scores(model, in);
      for (std::size_t e = 0; e < in.examples.size(); ++e) {
        double pt = in.examples[e].label == 1 ? probs[e] : 1.0 - probs[e];
        pt = std::min(1.0, std::max(1e-12, pt));
        total += focal_loss(pt, cfg.focal_gamma);
        ++count;
      }
    }
    return total / count;
  };

  std::mt19937_64 order_rng(mix_seed(cfg.seed, 29));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<StepRef> order = train_steps;
    std::shuffle(order.begin(), order.end(), order_rng);
    for (std::size_t i = 0; i < order.size(); ++i) {
      GraphInput in = make_batch(order[i], cfg.max_negatives,
                                 mix_seed(cfg.seed, mix_seed(epoch, i)));
      model.zero_grads();
      double loss = net_forward_loss(model, in, cfg.focal_gamma, ws, true);
      net_backward(model, in, cfg.focal_gamma, ws);
      adam.step(params);
      result.step_losses.push_back(loss);
    }
    double vl = eval_val();
    result.val_losses.push_back(vl);
    if (val_steps.empty() || vl < best_val) {
      best_val = vl;
      result.model = model;  // snapshot
    }
  }
  if (val_steps.empty()) result.model = model;
  return result;
}

}  // namespace rezone
