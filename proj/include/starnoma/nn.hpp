#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <random>
#include <vector>

namespace starnoma {

enum class Activation { relu, tanh, linear };

// Fully connected network, batch-major: rows are samples. W[l] has shape
// sizes[l] x sizes[l+1]. The hidden activation applies to every layer but
// the last, which uses the output activation.
struct DenseNet {
  std::vector<int> sizes;
  Activation hidden = Activation::relu;
  Activation output = Activation::linear;
  std::vector<Eigen::MatrixXd> W;
  std::vector<Eigen::RowVectorXd> b;

  int num_layers() const { return static_cast<int>(W.size()); }
  int in_dim() const { return sizes.front(); }
  int out_dim() const { return sizes.back(); }
  long long param_count() const;
};

// Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) for weights and biases, drawn
// layer by layer (W row-major, then b). final_scale > 0 narrows the last
// layer to Uniform(-final_scale, +final_scale).
DenseNet make_mlp(const std::vector<int>& sizes, Activation hidden,
                  Activation output, std::mt19937_64& rng,
                  double final_scale = 0.0);

struct ForwardCache {
  Eigen::MatrixXd input;
  std::vector<Eigen::MatrixXd> act;  // post-activation, one per layer
};

Eigen::MatrixXd forward(const DenseNet& net, const Eigen::MatrixXd& x,
                        ForwardCache* cache = nullptr);

struct Gradients {
  std::vector<Eigen::MatrixXd> dW;
  std::vector<Eigen::RowVectorXd> db;
  static Gradients zeros_like(const DenseNet& net);
};

// dY is the loss gradient at the output (batch x out). Returns the loss
// gradient at the input; accumulates parameter gradients into *grads when
// given (grads must be zeroed or fresh).
Eigen::MatrixXd backward(const DenseNet& net, const ForwardCache& cache,
                         const Eigen::MatrixXd& dY, Gradients* grads);

// Input gradient only; skips the parameter-gradient GEMMs.
Eigen::MatrixXd backward_input(const DenseNet& net, const ForwardCache& cache,
                               const Eigen::MatrixXd& dY);

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long long t = 0;
  std::vector<Eigen::MatrixXd> mW, vW;
  std::vector<Eigen::RowVectorXd> mb, vb;

  static AdamState for_net(const DenseNet& net, double lr);
};

void adam_step(DenseNet& net, const Gradients& g, AdamState& state);
void sgd_step(DenseNet& net, const Gradients& g, double lr);
// params += scale * g; plain in-place step with no optimizer state.
void apply_scaled(DenseNet& net, const Gradients& g, double scale);

// target <- tau * online + (1 - tau) * target. Throws on shape mismatch.
void soft_update(DenseNet& target, const DenseNet& online, double tau);

// Operation count for one forward-backward pass at batch 1:
//   2 * sum_l ((2*sizes[l] - 1) * sizes[l+1] + act_cost * sizes[l+1])
double flops_count(const std::vector<int>& sizes, double act_cost);

// Binary round-trip including architecture; load throws on a bad header.
void save_net(std::ostream& out, const DenseNet& net);
DenseNet load_net(std::istream& in);
void save_adam(std::ostream& out, const AdamState& state);
AdamState load_adam(std::istream& in, const DenseNet& net);

}  // namespace starnoma
