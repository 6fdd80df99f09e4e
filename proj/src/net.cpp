#include "rezone/net.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace rezone {

using Eigen::MatrixXd;
using Eigen::MatrixXi;
using Eigen::VectorXd;

void LinearLayer::init(int out, int in, std::mt19937_64& rng) {
  const double s = std::sqrt(6.0 / (in + out));
  std::uniform_real_distribution<double> dist(-s, s);
  W.resize(out, in);
  for (int r = 0; r < out; ++r)
    for (int c = 0; c < in; ++c) W(r, c) = dist(rng);
  b = VectorXd::Zero(out);
  gW = MatrixXd::Zero(out, in);
  gb = VectorXd::Zero(out);
}

void BatchNormLayer::init(int channels) {
  gamma = VectorXd::Ones(channels);
  beta = VectorXd::Zero(channels);
  running_mean = VectorXd::Zero(channels);
  running_var = VectorXd::Ones(channels);
  ggamma = VectorXd::Zero(channels);
  gbeta = VectorXd::Zero(channels);
}

ScorerModel ScorerModel::create(const NetConfig& cfg, uint64_t seed) {
  ScorerModel m;
  m.config = cfg;
  std::mt19937_64 rng(seed);
  m.conv1.init(64, kPointFeatureDim, rng);
  m.bn1.init(64);
  m.conv2.init(kHidden, 64, rng);
  m.bn2.init(kHidden);
  m.conv3.init(kHidden, kHidden, rng);
  m.fc1.init(kHidden, kHidden, rng);
  m.bn3.init(kHidden);
  m.fc2.init(kHidden, kHidden, rng);
  m.basic_lift.init(kHidden, kBasicFeatureDim, rng);
  m.msg.resize(cfg.rounds);
  for (MsgBlock& blk : m.msg) {
    blk.fc1.init(kHidden, kHidden, rng);
    blk.bn1.init(kHidden);
    blk.fc2.init(kHidden, kHidden, rng);
    blk.bn2.init(kHidden);
    blk.fc3.init(kHidden, kHidden, rng);
  }
  m.head1.init(kHidden, kHidden, rng);
  m.hbn1.init(kHidden);
  m.head2.init(kHidden, kHidden, rng);
  m.hbn2.init(kHidden);
  m.head3.init(2, kHidden, rng);
  return m;
}

std::vector<ScorerModel::ParamRef> ScorerModel::params() {
  std::vector<ParamRef> out;
  auto lin = [&](const std::string& name, LinearLayer& l) {
    out.push_back({name + ".W", &l.W, nullptr, &l.gW, nullptr});
    out.push_back({name + ".b", nullptr, &l.b, nullptr, &l.gb});
  };
  auto bn = [&](const std::string& name, BatchNormLayer& l) {
    out.push_back({name + ".gamma", nullptr, &l.gamma, nullptr, &l.ggamma});
    out.push_back({name + ".beta", nullptr, &l.beta, nullptr, &l.gbeta});
  };
  if (config.pointcloud) {
    lin("conv1", conv1);
    bn("bn1", bn1);
    lin("conv2", conv2);
    bn("bn2", bn2);
    lin("conv3", conv3);
    lin("fc1", fc1);
    bn("bn3", bn3);
    lin("fc2", fc2);
  } else {
    lin("basic_lift", basic_lift);
    bn("bn3", bn3);
    lin("fc2", fc2);
  }
  for (std::size_t r = 0; r < msg.size(); ++r) {
    std::string p = "msg" + std::to_string(r);
    lin(p + ".fc1", msg[r].fc1);
    bn(p + ".bn1", msg[r].bn1);
    lin(p + ".fc2", msg[r].fc2);
    bn(p + ".bn2", msg[r].bn2);
    lin(p + ".fc3", msg[r].fc3);
  }
  lin("head1", head1);
  bn("hbn1", hbn1);
  lin("head2", head2);
  bn("hbn2", hbn2);
  lin("head3", head3);
  return out;
}

std::vector<ScorerModel::ParamRef> ScorerModel::state_tensors() {
  std::vector<ParamRef> out = params();
  auto stats = [&](const std::string& name, BatchNormLayer& l) {
    out.push_back({name + ".running_mean", nullptr, &l.running_mean, nullptr, nullptr});
    out.push_back({name + ".running_var", nullptr, &l.running_var, nullptr, nullptr});
  };
  if (config.pointcloud) {
    stats("bn1", bn1);
    stats("bn2", bn2);
  }
  stats("bn3", bn3);
  for (std::size_t r = 0; r < msg.size(); ++r) {
    stats("msg" + std::to_string(r) + ".bn1", msg[r].bn1);
    stats("msg" + std::to_string(r) + ".bn2", msg[r].bn2);
  }
  stats("hbn1", hbn1);
  stats("hbn2", hbn2);
  return out;
}

void ScorerModel::zero_grads() {
  for (ParamRef& p : params()) {
    if (p.gmat) p.gmat->setZero();
    if (p.gvec) p.gvec->setZero();
  }
}

double focal_loss(double p_t, double gamma) {
  if (p_t <= 0) throw std::domain_error("focal_loss: p_t must be positive");
  return -std::pow(1.0 - p_t, gamma) * std::log(p_t);
}

namespace {

MatrixXd leaky(const MatrixXd& x, double slope) {
  return x.array().max(x.array() * slope).matrix();
}

// Gradient gate from the post-activation values (sign-preserving for slope>0).
MatrixXd leaky_gate(const MatrixXd& dy, const MatrixXd& y, double slope) {
  return (y.array() > 0).select(dy.array(), dy.array() * slope).matrix();
}

void bn_train(BatchNormLayer& l, const MatrixXd& x, MatrixXd& out, NetWorkspace::BNCache& cache,
              bool update_running) {
  cache.mean = x.rowwise().mean();
  MatrixXd centered = x.colwise() - cache.mean;
  VectorXd var = centered.array().square().rowwise().mean().matrix();
  cache.inv_std = (var.array() + l.eps).rsqrt().matrix();
  cache.xhat = (centered.array().colwise() * cache.inv_std.array()).matrix();
  out = ((cache.xhat.array().colwise() * l.gamma.array()).colwise() + l.beta.array()).matrix();
  if (update_running) {
    l.running_mean = l.momentum * l.running_mean + (1 - l.momentum) * cache.mean;
    l.running_var = l.momentum * l.running_var + (1 - l.momentum) * var;
  }
}

MatrixXd bn_backward(BatchNormLayer& l, const MatrixXd& dy, const NetWorkspace::BNCache& cache) {
  l.ggamma += (dy.array() * cache.xhat.array()).rowwise().sum().matrix();
  l.gbeta += dy.rowwise().sum();
  VectorXd mean_dy = dy.rowwise().mean();
  VectorXd mean_dy_xhat = (dy.array() * cache.xhat.array()).rowwise().mean().matrix();
  MatrixXd dx = (dy.array().colwise() - mean_dy.array()).matrix();
  dx.array() -= cache.xhat.array().colwise() * mean_dy_xhat.array();
  dx.array().colwise() *= (l.gamma.array() * cache.inv_std.array());
  return dx;
}

MatrixXd bn_infer(const BatchNormLayer& l, const MatrixXd& x) {
  Eigen::ArrayXd inv = (l.running_var.array() + l.eps).rsqrt();
  MatrixXd out = ((x.colwise() - l.running_mean).array().colwise() * inv).matrix();
  out = ((out.array().colwise() * l.gamma.array()).colwise() + l.beta.array()).matrix();
  return out;
}

MatrixXd linear(const LinearLayer& l, const MatrixXd& x) {
  return (l.W * x).colwise() + l.b;
}

void linear_backward(LinearLayer& l, const MatrixXd& x, const MatrixXd& dy, MatrixXd* dx) {
  l.gW += dy * x.transpose();
  l.gb += dy.rowwise().sum();
  if (dx) *dx = l.W.transpose() * dy;
}

// Builds the raw input columns from shared geometry plus per-example flags.
MatrixXd assemble_input(const ScorerModel& model, const GraphInput& in) {
  const int e_count = static_cast<int>(in.examples.size());
  const int z = in.zone_count;
  if (model.config.pointcloud) {
    const int n = model.config.points_per_zone;
    if (in.geom.rows() != 6 || in.geom.cols() != static_cast<Eigen::Index>(z) * n)
      throw ShapeMismatch("pointcloud geometry must be 6 x (zones*points)");
    MatrixXd x(kPointFeatureDim, static_cast<Eigen::Index>(e_count) * z * n);
    for (int e = 0; e < e_count; ++e) {
      const auto& ex = in.examples[e];
      for (int zi = 0; zi < z; ++zi) {
        Eigen::Index dst = (static_cast<Eigen::Index>(e) * z + zi) * n;
        x.block(0, dst, 6, n) = in.geom.block(0, static_cast<Eigen::Index>(zi) * n, 6, n);
        x.block(6, dst, 1, n).setConstant(ex.in_target[zi] ? 1.0 : 0.0);
        x.block(7, dst, 1, n).setConstant(ex.in_canvas[zi] ? 1.0 : 0.0);
        x.block(8, dst, 1, n).setConstant(ex.in_proposal[zi] ? 1.0 : 0.0);
        x.block(9, dst, 1, n).setConstant(ex.op_type);
      }
    }
    return x;
  }
  if (in.geom.rows() != 4 || in.geom.cols() != z)
    throw ShapeMismatch("basic geometry must be 4 x zones");
  MatrixXd x(kBasicFeatureDim, static_cast<Eigen::Index>(e_count) * z);
  for (int e = 0; e < e_count; ++e) {
    const auto& ex = in.examples[e];
    for (int zi = 0; zi < z; ++zi) {
      Eigen::Index dst = static_cast<Eigen::Index>(e) * z + zi;
      x.block(0, dst, 4, 1) = in.geom.col(zi);
      x(4, dst) = ex.in_target[zi] ? 1.0 : 0.0;
      x(5, dst) = ex.in_canvas[zi] ? 1.0 : 0.0;
      x(6, dst) = ex.in_proposal[zi] ? 1.0 : 0.0;
      x(7, dst) = ex.op_type;
    }
  }
  return x;
}

// Neighbor mean in value-sorted order so scores are bit-identical under zone
// relabeling.
void aggregate(const GraphInput& in, const MatrixXd& h, int e, int z_count, MatrixXd& m_out,
               Eigen::Index out_col, int zone) {
  const auto& nbrs = in.neighbors[zone];
  std::vector<std::pair<VectorXd, double>> cols;
  cols.reserve(nbrs.size());
  double wsum = 0;
  for (std::size_t k = 0; k < nbrs.size(); ++k) {
    double w = in.neighbor_w.empty() ? 1.0 : in.neighbor_w[zone][k];
    cols.emplace_back(h.col(static_cast<Eigen::Index>(e) * z_count + nbrs[k]) * w, w);
    wsum += w;
  }
  std::sort(cols.begin(), cols.end(), [](const auto& a, const auto& b) {
    for (Eigen::Index i = 0; i < a.first.size(); ++i) {
      if (a.first[i] < b.first[i]) return true;
      if (a.first[i] > b.first[i]) return false;
    }
    return false;
  });
  VectorXd sum = VectorXd::Zero(h.rows());
  for (auto& [col, w] : cols) sum += col;
  m_out.col(out_col) = sum / wsum;
}

MatrixXd gather_cols(const MatrixXd& x, const std::vector<int>& cols) {
  MatrixXd out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) out.col(i) = x.col(cols[i]);
  return out;
}

void softmax_cols(MatrixXd& x) {
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    double mx = x.col(c).maxCoeff();
    x.col(c) = (x.col(c).array() - mx).exp();
    x.col(c) /= x.col(c).sum();
  }
}

}  // namespace

double net_forward_loss(ScorerModel& model, const GraphInput& in, double focal_gamma,
                        NetWorkspace& ws, bool update_running) {
  const NetConfig& cfg = model.config;
  const int e_count = static_cast<int>(in.examples.size());
  const int z = in.zone_count;
  const Eigen::Index nc = static_cast<Eigen::Index>(e_count) * z;
  const double slope = cfg.leaky_slope;

  ws.X = assemble_input(model, in);
  if (cfg.pointcloud) {
    const int n = cfg.points_per_zone;
    MatrixXd t;
    ws.C1 = linear(model.conv1, ws.X);
    bn_train(model.bn1, ws.C1, t, ws.bn1, update_running);
    ws.H1 = leaky(t, slope);
    ws.C2 = linear(model.conv2, ws.H1);
    bn_train(model.bn2, ws.C2, t, ws.bn2, update_running);
    ws.H2 = leaky(t, slope);
    ws.C3 = linear(model.conv3, ws.H2);
    ws.P.resize(kHidden, nc);
    ws.Pargmax.resize(kHidden, nc);
    for (Eigen::Index c = 0; c < nc; ++c) {
      for (int r = 0; r < kHidden; ++r) {
        Eigen::Index base = c * n;
        int best = 0;
        double bv = ws.C3(r, base);
        for (int p = 1; p < n; ++p)
          if (ws.C3(r, base + p) > bv) {
            bv = ws.C3(r, base + p);
            best = p;
          }
        ws.P(r, c) = bv;
        ws.Pargmax(r, c) = best;
      }
    }
    ws.F1 = linear(model.fc1, ws.P);
    bn_train(model.bn3, ws.F1, t, ws.bn3, update_running);
    ws.H3 = leaky(t, slope);
    ws.H0 = linear(model.fc2, ws.H3);
  } else {
    MatrixXd t;
    ws.F1 = linear(model.basic_lift, ws.X);
    bn_train(model.bn3, ws.F1, t, ws.bn3, update_running);
    ws.H3 = leaky(t, slope);
    ws.H0 = linear(model.fc2, ws.H3);
  }

  ws.active_cols.clear();
  for (int e = 0; e < e_count; ++e)
    for (int zi = 0; zi < z; ++zi)
      if (!in.neighbors[zi].empty()) ws.active_cols.push_back(e * z + zi);

  ws.H.assign(1, ws.H0);
  ws.rounds.assign(cfg.rounds, {});
  for (int r = 0; r < cfg.rounds; ++r) {
    const MatrixXd& h = ws.H.back();
    auto& rc = ws.rounds[r];
    rc.M.resize(kHidden, static_cast<Eigen::Index>(ws.active_cols.size()));
    for (std::size_t i = 0; i < ws.active_cols.size(); ++i) {
      int col = ws.active_cols[i];
      aggregate(in, h, col / z, z, rc.M, static_cast<Eigen::Index>(i), col % z);
    }
    MatrixXd t, out = h;
    if (rc.M.cols() > 0) {
      MatrixXd t1 = linear(model.msg[r].fc1, rc.M);
      bn_train(model.msg[r].bn1, t1, t, rc.bn1, update_running);
      rc.A1 = leaky(t, slope);
      MatrixXd t2 = linear(model.msg[r].fc2, rc.A1);
      bn_train(model.msg[r].bn2, t2, t, rc.bn2, update_running);
      rc.A2 = leaky(t, slope);
      rc.T3 = linear(model.msg[r].fc3, rc.A2);
      for (std::size_t i = 0; i < ws.active_cols.size(); ++i)
        out.col(ws.active_cols[i]) += rc.T3.col(static_cast<Eigen::Index>(i));
    }
    ws.H.push_back(std::move(out));
  }

  const MatrixXd& hf = ws.H.back();
  ws.G.resize(kHidden, e_count);
  ws.Gargmax.resize(kHidden, e_count);
  for (int e = 0; e < e_count; ++e) {
    for (int r = 0; r < kHidden; ++r) {
      int best = 0;
      double bv = hf(r, static_cast<Eigen::Index>(e) * z);
      for (int zi = 1; zi < z; ++zi)
        if (hf(r, static_cast<Eigen::Index>(e) * z + zi) > bv) {
          bv = hf(r, static_cast<Eigen::Index>(e) * z + zi);
          best = zi;
        }
      ws.G(r, e) = bv;
      ws.Gargmax(r, e) = best;
    }
  }

  MatrixXd t;
  ws.K1 = linear(model.head1, ws.G);
  bn_train(model.hbn1, ws.K1, t, ws.hbn1, update_running);
  ws.J1 = leaky(t, slope);
  ws.K2 = linear(model.head2, ws.J1);
  bn_train(model.hbn2, ws.K2, t, ws.hbn2, update_running);
  ws.J2 = leaky(t, slope);
  ws.K3 = linear(model.head3, ws.J2);
  ws.probs = ws.K3;
  softmax_cols(ws.probs);

  double loss = 0;
  for (int e = 0; e < e_count; ++e) loss += focal_loss(ws.probs(in.examples[e].label, e), focal_gamma);
  return loss / e_count;
}

void net_backward(ScorerModel& model, const GraphInput& in, double focal_gamma,
                  NetWorkspace& ws) {
  const NetConfig& cfg = model.config;
  const int e_count = static_cast<int>(in.examples.size());
  const int z = in.zone_count;
  const double slope = cfg.leaky_slope;

  MatrixXd dk3 = MatrixXd::Zero(2, e_count);
  for (int e = 0; e < e_count; ++e) {
    int y = in.examples[e].label;
    double pt = ws.probs(y, e);
    // d/dp [-(1-p)^g ln p] = g (1-p)^(g-1) ln p - (1-p)^g / p, with the first
    // term vanishing in the limits g = 0 or p = 1.
    double one_m = 1.0 - pt;
    double t1 = (focal_gamma == 0.0 || one_m == 0.0)
                    ? 0.0
                    : focal_gamma * std::pow(one_m, focal_gamma - 1) * std::log(pt);
    double t2 = std::pow(one_m, focal_gamma) / pt;
    double dfdpt = (t1 - t2) / e_count;
    VectorXd p = ws.probs.col(e);
    VectorXd onehot = VectorXd::Zero(2);
    onehot(y) = 1.0;
    dk3.col(e) = dfdpt * pt * (onehot - p);
  }

  MatrixXd dj2;
  linear_backward(model.head3, ws.J2, dk3, &dj2);
  MatrixXd dk2 = bn_backward(model.hbn2, leaky_gate(dj2, ws.J2, slope), ws.hbn2);
  MatrixXd dj1;
  linear_backward(model.head2, ws.J1, dk2, &dj1);
  MatrixXd dk1 = bn_backward(model.hbn1, leaky_gate(dj1, ws.J1, slope), ws.hbn1);
  MatrixXd dg;
  linear_backward(model.head1, ws.G, dk1, &dg);

  MatrixXd dh = MatrixXd::Zero(kHidden, static_cast<Eigen::Index>(e_count) * z);
  for (int e = 0; e < e_count; ++e)
    for (int r = 0; r < kHidden; ++r)
      dh(r, static_cast<Eigen::Index>(e) * z + ws.Gargmax(r, e)) += dg(r, e);

  for (int r = cfg.rounds - 1; r >= 0; --r) {
    auto& rc = ws.rounds[r];
    if (rc.M.cols() == 0) continue;
    MatrixXd dt3 = gather_cols(dh, ws.active_cols);
    MatrixXd da2;
    linear_backward(model.msg[r].fc3, rc.A2, dt3, &da2);
    MatrixXd dt2 = bn_backward(model.msg[r].bn2, leaky_gate(da2, rc.A2, slope), rc.bn2);
    MatrixXd da1;
    linear_backward(model.msg[r].fc2, rc.A1, dt2, &da1);
    MatrixXd dt1 = bn_backward(model.msg[r].bn1, leaky_gate(da1, rc.A1, slope), rc.bn1);
    MatrixXd dm;
    linear_backward(model.msg[r].fc1, rc.M, dt1, &dm);
    // Residual identity plus the aggregation path.
    for (std::size_t i = 0; i < ws.active_cols.size(); ++i) {
      int col = ws.active_cols[i];
      int e = col / z, zone = col % z;
      const auto& nbrs = in.neighbors[zone];
      double wsum = 0;
      for (std::size_t k = 0; k < nbrs.size(); ++k)
        wsum += in.neighbor_w.empty() ? 1.0 : in.neighbor_w[zone][k];
      for (std::size_t k = 0; k < nbrs.size(); ++k) {
        double w = (in.neighbor_w.empty() ? 1.0 : in.neighbor_w[zone][k]) / wsum;
        dh.col(static_cast<Eigen::Index>(e) * z + nbrs[k]) +=
            w * dm.col(static_cast<Eigen::Index>(i));
      }
    }
  }

  MatrixXd dh0 = dh;
  MatrixXd dh3;
  linear_backward(model.fc2, ws.H3, dh0, &dh3);
  MatrixXd df1 = bn_backward(model.bn3, leaky_gate(dh3, ws.H3, slope), ws.bn3);
  if (cfg.pointcloud) {
    MatrixXd dp;
    linear_backward(model.fc1, ws.P, df1, &dp);
    const int n = cfg.points_per_zone;
    MatrixXd dc3 = MatrixXd::Zero(ws.C3.rows(), ws.C3.cols());
    for (Eigen::Index c = 0; c < ws.P.cols(); ++c)
      for (int r = 0; r < kHidden; ++r) dc3(r, c * n + ws.Pargmax(r, c)) += dp(r, c);
    MatrixXd dh2;
    linear_backward(model.conv3, ws.H2, dc3, &dh2);
    MatrixXd dc2 = bn_backward(model.bn2, leaky_gate(dh2, ws.H2, slope), ws.bn2);
    MatrixXd dh1;
    linear_backward(model.conv2, ws.H1, dc2, &dh1);
    MatrixXd dc1 = bn_backward(model.bn1, leaky_gate(dh1, ws.H1, slope), ws.bn1);
    linear_backward(model.conv1, ws.X, dc1, nullptr);
  } else {
    linear_backward(model.basic_lift, ws.X, df1, nullptr);
  }
}

Eigen::VectorXd net_scores(const ScorerModel& model, const GraphInput& in) {
  const NetConfig& cfg = model.config;
  const int e_count = static_cast<int>(in.examples.size());
  const int z = in.zone_count;
  const Eigen::Index nc = static_cast<Eigen::Index>(e_count) * z;
  const double slope = cfg.leaky_slope;

  MatrixXd x = assemble_input(model, in);
  MatrixXd h0;
  if (cfg.pointcloud) {
    const int n = cfg.points_per_zone;
    MatrixXd h1 = leaky(bn_infer(model.bn1, linear(model.conv1, x)), slope);
    MatrixXd h2 = leaky(bn_infer(model.bn2, linear(model.conv2, h1)), slope);
    MatrixXd c3 = linear(model.conv3, h2);
    MatrixXd p(kHidden, nc);
    for (Eigen::Index c = 0; c < nc; ++c)
      p.col(c) = c3.block(0, c * n, kHidden, n).rowwise().maxCoeff();
    MatrixXd h3 = leaky(bn_infer(model.bn3, linear(model.fc1, p)), slope);
    h0 = linear(model.fc2, h3);
  } else {
    MatrixXd h3 = leaky(bn_infer(model.bn3, linear(model.basic_lift, x)), slope);
    h0 = linear(model.fc2, h3);
  }

  std::vector<int> active;
  for (int e = 0; e < e_count; ++e)
    for (int zi = 0; zi < z; ++zi)
      if (!in.neighbors[zi].empty()) active.push_back(e * z + zi);

  MatrixXd h = h0;
  for (int r = 0; r < cfg.rounds; ++r) {
    if (active.empty()) break;
    MatrixXd m(kHidden, static_cast<Eigen::Index>(active.size()));
    for (std::size_t i = 0; i < active.size(); ++i)
      aggregate(in, h, active[i] / z, z, m, static_cast<Eigen::Index>(i), active[i] % z);
    MatrixXd a1 = leaky(bn_infer(model.msg[r].bn1, linear(model.msg[r].fc1, m)), slope);
    MatrixXd a2 = leaky(bn_infer(model.msg[r].bn2, linear(model.msg[r].fc2, a1)), slope);
    MatrixXd t3 = linear(model.msg[r].fc3, a2);
    for (std::size_t i = 0; i < active.size(); ++i)
      h.col(active[i]) += t3.col(static_cast<Eigen::Index>(i));
  }

  MatrixXd g(kHidden, e_count);
  for (int e = 0; e < e_count; ++e)
    g.col(e) = h.block(0, static_cast<Eigen::Index>(e) * z, kHidden, z).rowwise().maxCoeff();

  MatrixXd j1 = leaky(bn_infer(model.hbn1, linear(model.head1, g)), slope);
  MatrixXd j2 = leaky(bn_infer(model.hbn2, linear(model.head2, j1)), slope);
  MatrixXd k3 = linear(model.head3, j2);
  softmax_cols(k3);
  return k3.row(1).transpose();
}

namespace {

constexpr char kMagic[4] = {'R', 'Z', 'N', 'W'};
constexpr uint32_t kVersion = 1;

template <class T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

}  // namespace

void save_weights(const ScorerModel& model, const std::string& path) {
  auto& m = const_cast<ScorerModel&>(model);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os.write(kMagic, 4);
  write_pod(os, kVersion);
  write_pod(os, static_cast<int32_t>(m.config.points_per_zone));
  write_pod(os, static_cast<int32_t>(m.config.rounds));
  write_pod(os, static_cast<uint8_t>(m.config.pointcloud));
  write_pod(os, static_cast<uint8_t>(m.config.edge_area_weights));
  write_pod(os, m.config.leaky_slope);

  auto tensors = m.state_tensors();
  write_pod(os, static_cast<uint32_t>(tensors.size()));
  nlohmann::ordered_json twin;
  twin["magic"] = "RZNW";
  twin["version"] = kVersion;
  twin["config"] = {{"points_per_zone", m.config.points_per_zone},
                    {"rounds", m.config.rounds},
                    {"pointcloud", m.config.pointcloud},
                    {"edge_area_weights", m.config.edge_area_weights},
                    {"leaky_slope", m.config.leaky_slope}};
  auto& tw = twin["tensors"] = nlohmann::ordered_json::array();
  for (auto& t : tensors) {
    uint16_t len = static_cast<uint16_t>(t.name.size());
    write_pod(os, len);
    os.write(t.name.data(), len);
    uint32_t rows = t.mat ? t.mat->rows() : t.vec->size();
    uint32_t cols = t.mat ? t.mat->cols() : 1;
    write_pod(os, rows);
    write_pod(os, cols);
    const double* data = t.mat ? t.mat->data() : t.vec->data();
    os.write(reinterpret_cast<const char*>(data), sizeof(double) * rows * cols);
    nlohmann::ordered_json tj;
    tj["name"] = t.name;
    tj["rows"] = rows;
    tj["cols"] = cols;
    tj["data"] = std::vector<double>(data, data + static_cast<std::size_t>(rows) * cols);
    tw.push_back(std::move(tj));
  }
  std::ofstream js(path + ".json");
  js << twin.dump(1) << "\n";
}

ScorerModel load_weights(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path);
  char magic[4];
  is.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw ShapeMismatch("bad weight file magic");
  uint32_t version = read_pod<uint32_t>(is);
  if (version != kVersion) throw ShapeMismatch("unsupported weight file version");
  NetConfig cfg;
  cfg.points_per_zone = read_pod<int32_t>(is);
  cfg.rounds = read_pod<int32_t>(is);
  cfg.pointcloud = read_pod<uint8_t>(is);
  cfg.edge_area_weights = read_pod<uint8_t>(is);
  cfg.leaky_slope = read_pod<double>(is);
  ScorerModel model = ScorerModel::create(cfg, 0);
  auto tensors = model.state_tensors();
  uint32_t count = read_pod<uint32_t>(is);
  if (count != tensors.size()) throw ShapeMismatch("weight manifest size mismatch");
  for (auto& t : tensors) {
    uint16_t len = read_pod<uint16_t>(is);
    std::string name(len, '\0');
    is.read(name.data(), len);
    if (name != t.name) throw ShapeMismatch("unexpected tensor " + name + ", wanted " + t.name);
    uint32_t rows = read_pod<uint32_t>(is);
    uint32_t cols = read_pod<uint32_t>(is);
    uint32_t want_rows = t.mat ? t.mat->rows() : t.vec->size();
    uint32_t want_cols = t.mat ? t.mat->cols() : 1;
    if (rows != want_rows || cols != want_cols)
      throw ShapeMismatch("tensor " + name + " has inconsistent shape");
    double* data = t.mat ? t.mat->data() : t.vec->data();
    is.read(reinterpret_cast<char*>(data), sizeof(double) * rows * cols);
  }
  if (!is) throw ShapeMismatch("truncated weight file");
  return model;
}

}  // namespace rezone
