#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace rezone {

struct ShapeMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LinearLayer {
  Eigen::MatrixXd W;
  Eigen::VectorXd b;
  Eigen::MatrixXd gW;
  Eigen::VectorXd gb;

  void init(int out, int in, std::mt19937_64& rng);
};

struct BatchNormLayer {
  Eigen::VectorXd gamma, beta;
  Eigen::VectorXd running_mean, running_var;
  Eigen::VectorXd ggamma, gbeta;
  double momentum = 0.9;
  double eps = 1e-5;

  void init(int channels);
};

// One message-passing block: FC + BN + LeakyReLU, twice, then a bare FC.
struct MsgBlock {
  LinearLayer fc1, fc2, fc3;
  BatchNormLayer bn1, bn2;
};

struct NetConfig {
  int points_per_zone = 64;
  int rounds = 3;
  bool pointcloud = true;         // false: per-zone volume/centroid features
  bool edge_area_weights = false; // facet-area weighted neighbor mean
  double leaky_slope = 0.01;
};

// Per-point features: position(3), normal(3), in-target, in-canvas,
// in-proposal, op-type. Basic mode: volume, centroid(3) + the same 4 flags.
constexpr int kPointFeatureDim = 10;
constexpr int kBasicFeatureDim = 8;
constexpr int kHidden = 128;

struct ScorerModel {
  NetConfig config;
  // Shared per-point encoder, then pooled per zone.
  LinearLayer conv1, conv2, conv3;  // 10->64, 64->128, 128->128
  BatchNormLayer bn1, bn2;
  LinearLayer fc1, fc2;  // 128->128 twice after the pool
  BatchNormLayer bn3;
  LinearLayer basic_lift;  // 8->128, replaces the point encoder in basic mode
  std::vector<MsgBlock> msg;
  LinearLayer head1, head2, head3;  // 128->128, 128->128, 128->2
  BatchNormLayer hbn1, hbn2;

  static ScorerModel create(const NetConfig& cfg, uint64_t seed);

  struct ParamRef {
    std::string name;
    Eigen::MatrixXd* mat = nullptr;
    Eigen::VectorXd* vec = nullptr;
    Eigen::MatrixXd* gmat = nullptr;
    Eigen::VectorXd* gvec = nullptr;
  };
  std::vector<ParamRef> params();         // trainable tensors, fixed order
  std::vector<ParamRef> state_tensors();  // params + batch-norm running stats
  void zero_grads();
};

// A scoring problem: one zone graph plus one or more proposal examples that
// share its geometry.
struct GraphInput {
  int zone_count = 0;
  std::vector<std::vector<int>> neighbors;      // sorted zone ids
  std::vector<std::vector<double>> neighbor_w;  // optional, same shape
  Eigen::MatrixXd geom;  // pointcloud: 6 x (Z*n); basic: 4 x Z

  struct Example {
    std::vector<uint8_t> in_target, in_canvas, in_proposal;
    double op_type = 1.0;  // 1 union, 0 difference
    int label = 1;         // class 1 positive, class 0 negative
  };
  std::vector<Example> examples;
};

// Everything the backward pass needs from the forward pass.
struct NetWorkspace {
  Eigen::MatrixXd X;                   // model input columns
  Eigen::MatrixXd C1, H1, C2, H2, C3;  // encoder pre-activations / activations
  Eigen::MatrixXd P;                   // pooled per zone
  Eigen::MatrixXi Pargmax;
  Eigen::MatrixXd F1, H3, H0;
  struct BNCache {
    Eigen::VectorXd mean, inv_std;
    Eigen::MatrixXd xhat;
  };
  BNCache bn1, bn2, bn3;
  struct RoundCache {
    Eigen::MatrixXd M, T1, A1, T2, A2, T3;  // aggregate and Msg intermediates
    BNCache bn1, bn2;
  };
  std::vector<RoundCache> rounds;
  std::vector<Eigen::MatrixXd> H;  // node states per round (rounds+1 entries)
  std::vector<int> active_cols;    // node columns with neighbors
  Eigen::MatrixXd G;               // pooled per example
  Eigen::MatrixXi Gargmax;
  Eigen::MatrixXd K1, J1, K2, J2, K3, probs;
  BNCache hbn1, hbn2;
};

// -(1 - p_t)^gamma * ln(p_t); domain error for p_t <= 0.
double focal_loss(double p_t, double gamma);

// Inference scores (running statistics): softmax probability of the
// "good next op" class, one entry per example.
Eigen::VectorXd net_scores(const ScorerModel& model, const GraphInput& in);

// Training-mode forward using batch statistics. Running statistics are only
// touched when update_running is set (off for finite-difference checks).
double net_forward_loss(ScorerModel& model, const GraphInput& in, double focal_gamma,
                        NetWorkspace& ws, bool update_running);

// Analytic gradients for every trainable tensor, accumulated into g* fields.
void net_backward(ScorerModel& model, const GraphInput& in, double focal_gamma,
                  NetWorkspace& ws);

void save_weights(const ScorerModel& model, const std::string& path);
ScorerModel load_weights(const std::string& path);

}  // namespace rezone
