#include "starnoma/nn.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace starnoma {

namespace {

constexpr char kNetMagic[8] = {'S', 'N', 'N', 'E', 'T', '1', 0, 0};
constexpr char kAdamMagic[8] = {'S', 'N', 'A', 'D', 'M', '1', 0, 0};

Activation layer_activation(const DenseNet& net, int layer) {
  return layer + 1 == net.num_layers() ? net.output : net.hidden;
}

Eigen::MatrixXd apply_activation(Activation a, Eigen::MatrixXd z) {
  switch (a) {
    case Activation::relu:
      return z.array().max(0.0).matrix();
    case Activation::tanh:
      return z.array().tanh().matrix();
    case Activation::linear:
      return z;
  }
  throw std::logic_error("unknown activation");
}

// Derivative expressed through the post-activation value.
Eigen::MatrixXd activation_backward(Activation a, const Eigen::MatrixXd& post,
                                    const Eigen::MatrixXd& dA) {
  switch (a) {
    case Activation::relu:
      return (dA.array() * (post.array() > 0.0).cast<double>()).matrix();
    case Activation::tanh:
      return (dA.array() * (1.0 - post.array().square())).matrix();
    case Activation::linear:
      return dA;
  }
  throw std::logic_error("unknown activation");
}

void write_raw(std::ostream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void read_raw(std::istream& in, void* p, std::size_t n) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (!in) throw std::runtime_error("checkpoint: truncated stream");
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      double v = m(r, c);
      write_raw(out, &v, sizeof(v));
    }
}

void read_matrix(std::istream& in, Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      double v;
      read_raw(in, &v, sizeof(v));
      m(r, c) = v;
    }
}

}  // namespace

long long DenseNet::param_count() const {
  long long n = 0;
  for (int l = 0; l < num_layers(); ++l) n += W[l].size() + b[l].size();
  return n;
}

DenseNet make_mlp(const std::vector<int>& sizes, Activation hidden,
                  Activation output, std::mt19937_64& rng,
                  double final_scale) {
  if (sizes.size() < 2)
    throw std::invalid_argument("make_mlp: need at least input and output");
  for (int s : sizes)
    if (s < 1) throw std::invalid_argument("make_mlp: layer width must be >= 1");

  DenseNet net;
  net.sizes = sizes;
  net.hidden = hidden;
  net.output = output;
  const int layers = static_cast<int>(sizes.size()) - 1;
  net.W.resize(layers);
  net.b.resize(layers);
  for (int l = 0; l < layers; ++l) {
    double bound = 1.0 / std::sqrt(static_cast<double>(sizes[l]));
    if (final_scale > 0.0 && l == layers - 1) bound = final_scale;
    std::uniform_real_distribution<double> u(-bound, bound);
    net.W[l].resize(sizes[l], sizes[l + 1]);
    for (Eigen::Index r = 0; r < net.W[l].rows(); ++r)
      for (Eigen::Index c = 0; c < net.W[l].cols(); ++c) net.W[l](r, c) = u(rng);
    net.b[l].resize(sizes[l + 1]);
    for (Eigen::Index c = 0; c < net.b[l].size(); ++c) net.b[l](c) = u(rng);
  }
  return net;
}

Eigen::MatrixXd forward(const DenseNet& net, const Eigen::MatrixXd& x,
                        ForwardCache* cache) {
  if (x.cols() != net.in_dim())
    throw std::invalid_argument("forward: input width mismatch");
  if (cache) {
    cache->input = x;
    cache->act.resize(net.num_layers());
  }
  Eigen::MatrixXd y = x;
  for (int l = 0; l < net.num_layers(); ++l) {
    Eigen::MatrixXd z = (y * net.W[l]).rowwise() + net.b[l];
    y = apply_activation(layer_activation(net, l), std::move(z));
    if (cache) cache->act[l] = y;
  }
  return y;
}

Gradients Gradients::zeros_like(const DenseNet& net) {
  Gradients g;
  g.dW.resize(net.num_layers());
  g.db.resize(net.num_layers());
  for (int l = 0; l < net.num_layers(); ++l) {
    g.dW[l] = Eigen::MatrixXd::Zero(net.W[l].rows(), net.W[l].cols());
    g.db[l] = Eigen::RowVectorXd::Zero(net.b[l].size());
  }
  return g;
}

namespace {

Eigen::MatrixXd backprop(const DenseNet& net, const ForwardCache& cache,
                         const Eigen::MatrixXd& dY, Gradients* grads) {
  if (cache.act.size() != static_cast<std::size_t>(net.num_layers()))
    throw std::invalid_argument("backward: cache does not match network");
  Eigen::MatrixXd dA = dY;
  for (int l = net.num_layers() - 1; l >= 0; --l) {
    Eigen::MatrixXd dZ =
        activation_backward(layer_activation(net, l), cache.act[l], dA);
    if (grads) {
      const Eigen::MatrixXd& prev = l == 0 ? cache.input : cache.act[l - 1];
      grads->dW[l] = prev.transpose() * dZ;
      grads->db[l] = dZ.colwise().sum();
    }
    dA = dZ * net.W[l].transpose();
  }
  return dA;
}

}  // namespace

Eigen::MatrixXd backward(const DenseNet& net, const ForwardCache& cache,
                         const Eigen::MatrixXd& dY, Gradients* grads) {
  if (!grads) return backprop(net, cache, dY, nullptr);
  return backprop(net, cache, dY, grads);
}

Eigen::MatrixXd backward_input(const DenseNet& net, const ForwardCache& cache,
                               const Eigen::MatrixXd& dY) {
  return backprop(net, cache, dY, nullptr);
}

AdamState AdamState::for_net(const DenseNet& net, double lr_) {
  AdamState s;
  s.lr = lr_;
  s.mW.resize(net.num_layers());
  s.vW.resize(net.num_layers());
  s.mb.resize(net.num_layers());
  s.vb.resize(net.num_layers());
  for (int l = 0; l < net.num_layers(); ++l) {
    s.mW[l] = Eigen::MatrixXd::Zero(net.W[l].rows(), net.W[l].cols());
    s.vW[l] = Eigen::MatrixXd::Zero(net.W[l].rows(), net.W[l].cols());
    s.mb[l] = Eigen::RowVectorXd::Zero(net.b[l].size());
    s.vb[l] = Eigen::RowVectorXd::Zero(net.b[l].size());
  }
  return s;
}

void adam_step(DenseNet& net, const Gradients& g, AdamState& state) {
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (int l = 0; l < net.num_layers(); ++l) {
    state.mW[l] = state.beta1 * state.mW[l] + (1.0 - state.beta1) * g.dW[l];
    state.vW[l] = (state.beta2 * state.vW[l].array() +
                   (1.0 - state.beta2) * g.dW[l].array().square())
                      .matrix();
    net.W[l].array() -= state.lr * (state.mW[l].array() / bc1) /
                        ((state.vW[l].array() / bc2).sqrt() + state.eps);
    state.mb[l] = state.beta1 * state.mb[l] + (1.0 - state.beta1) * g.db[l];
    state.vb[l] = (state.beta2 * state.vb[l].array() +
                   (1.0 - state.beta2) * g.db[l].array().square())
                      .matrix();
    net.b[l].array() -= state.lr * (state.mb[l].array() / bc1) /
                        ((state.vb[l].array() / bc2).sqrt() + state.eps);
  }
}

void sgd_step(DenseNet& net, const Gradients& g, double lr) {
  apply_scaled(net, g, -lr);
}

void apply_scaled(DenseNet& net, const Gradients& g, double scale) {
  for (int l = 0; l < net.num_layers(); ++l) {
    net.W[l] += scale * g.dW[l];
    net.b[l] += scale * g.db[l];
  }
}

void soft_update(DenseNet& target, const DenseNet& online, double tau) {
  if (target.sizes != online.sizes)
    throw std::invalid_argument("soft_update: architecture mismatch");
  for (int l = 0; l < target.num_layers(); ++l) {
    target.W[l] = tau * online.W[l] + (1.0 - tau) * target.W[l];
    target.b[l] = tau * online.b[l] + (1.0 - tau) * target.b[l];
  }
}

double flops_count(const std::vector<int>& sizes, double act_cost) {
  if (sizes.size() < 2) return 0.0;
  double total = 0.0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
    total += (2.0 * sizes[l] - 1.0) * sizes[l + 1] + act_cost * sizes[l + 1];
  return 2.0 * total;
}

void save_net(std::ostream& out, const DenseNet& net) {
  write_raw(out, kNetMagic, sizeof(kNetMagic));
  std::int32_t n = static_cast<std::int32_t>(net.sizes.size());
  write_raw(out, &n, sizeof(n));
  for (int s : net.sizes) {
    std::int32_t v = s;
    write_raw(out, &v, sizeof(v));
  }
  std::int8_t h = static_cast<std::int8_t>(net.hidden);
  std::int8_t o = static_cast<std::int8_t>(net.output);
  write_raw(out, &h, sizeof(h));
  write_raw(out, &o, sizeof(o));
  for (int l = 0; l < net.num_layers(); ++l) {
    write_matrix(out, net.W[l]);
    write_matrix(out, Eigen::MatrixXd(net.b[l]));
  }
}

DenseNet load_net(std::istream& in) {
  char magic[8];
  read_raw(in, magic, sizeof(magic));
  if (std::memcmp(magic, kNetMagic, sizeof(magic)) != 0)
    throw std::runtime_error("checkpoint: bad network header");
  std::int32_t n;
  read_raw(in, &n, sizeof(n));
  if (n < 2 || n > 64) throw std::runtime_error("checkpoint: bad layer count");
  std::vector<int> sizes(n);
  for (std::int32_t i = 0; i < n; ++i) {
    std::int32_t v;
    read_raw(in, &v, sizeof(v));
    if (v < 1) throw std::runtime_error("checkpoint: bad layer width");
    sizes[i] = v;
  }
  std::int8_t h, o;
  read_raw(in, &h, sizeof(h));
  read_raw(in, &o, sizeof(o));
  DenseNet net;
  net.sizes = sizes;
  net.hidden = static_cast<Activation>(h);
  net.output = static_cast<Activation>(o);
  const int layers = n - 1;
  net.W.resize(layers);
  net.b.resize(layers);
  for (int l = 0; l < layers; ++l) {
    net.W[l].resize(sizes[l], sizes[l + 1]);
    read_matrix(in, net.W[l]);
    Eigen::MatrixXd bias(1, sizes[l + 1]);
    read_matrix(in, bias);
    net.b[l] = bias.row(0);
  }
  return net;
}

void save_adam(std::ostream& out, const AdamState& state) {
  write_raw(out, kAdamMagic, sizeof(kAdamMagic));
  write_raw(out, &state.lr, sizeof(state.lr));
  write_raw(out, &state.beta1, sizeof(state.beta1));
  write_raw(out, &state.beta2, sizeof(state.beta2));
  write_raw(out, &state.eps, sizeof(state.eps));
  write_raw(out, &state.t, sizeof(state.t));
  for (std::size_t l = 0; l < state.mW.size(); ++l) {
    write_matrix(out, state.mW[l]);
    write_matrix(out, state.vW[l]);
    write_matrix(out, Eigen::MatrixXd(state.mb[l]));
    write_matrix(out, Eigen::MatrixXd(state.vb[l]));
  }
}

AdamState load_adam(std::istream& in, const DenseNet& net) {
  char magic[8];
  read_raw(in, magic, sizeof(magic));
  if (std::memcmp(magic, kAdamMagic, sizeof(magic)) != 0)
    throw std::runtime_error("checkpoint: bad optimizer header");
  AdamState s = AdamState::for_net(net, 0.0);
  read_raw(in, &s.lr, sizeof(s.lr));
  read_raw(in, &s.beta1, sizeof(s.beta1));
  read_raw(in, &s.beta2, sizeof(s.beta2));
  read_raw(in, &s.eps, sizeof(s.eps));
  read_raw(in, &s.t, sizeof(s.t));
  for (int l = 0; l < net.num_layers(); ++l) {
    read_matrix(in, s.mW[l]);
    read_matrix(in, s.vW[l]);
    Eigen::MatrixXd mb(1, net.b[l].size()), vb(1, net.b[l].size());
    read_matrix(in, mb);
    read_matrix(in, vb);
    s.mb[l] = mb.row(0);
    s.vb[l] = vb.row(0);
  }
  return s;
}

}  // namespace starnoma
