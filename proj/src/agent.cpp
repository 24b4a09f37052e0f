#include "starnoma/agent.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "starnoma/rng.hpp"

namespace starnoma {

namespace {

constexpr char kAgentMagic[8] = {'S', 'N', 'A', 'G', 'T', '1', 0, 0};

Eigen::MatrixXd join_cols(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

}  // namespace

void AgentOptions::validate() const {
  if (!(discount > 0.0 && discount < 1.0))
    throw std::invalid_argument("agent: discount must lie in (0, 1)");
  if (lr_actor <= 0.0 || lr_critic <= 0.0 || lr_meta < 0.0)
    throw std::invalid_argument("agent: bad learning rate");
  if (!(tau > 0.0 && tau <= 1.0))
    throw std::invalid_argument("agent: tau must lie in (0, 1]");
  if (batch_size < 1) throw std::invalid_argument("agent: bad batch size");
  if (buffer_capacity < static_cast<std::size_t>(batch_size))
    throw std::invalid_argument("agent: buffer smaller than a batch");
  if (update_period < 1) throw std::invalid_argument("agent: bad update period");
  if (psi0 < 0.0 || psi0 > 1.0)
    throw std::invalid_argument("agent: psi0 outside [0, 1]");
  if (noise_scale < 0.0 || noise_floor < 0.0 || noise_decay <= 0.0 ||
      noise_decay > 1.0)
    throw std::invalid_argument("agent: bad noise schedule");
  if (fd_eps <= 0.0) throw std::invalid_argument("agent: bad fd_eps");
  for (int h : hidden)
    if (h < 1) throw std::invalid_argument("agent: bad hidden width");
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ < 1) throw std::invalid_argument("replay: capacity must be >= 1");
  data_.reserve(capacity_);
}

void ReplayBuffer::push(Transition tr) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(tr));
  } else {
    data_[next_] = std::move(tr);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(
    int batch, std::mt19937_64& rng) const {
  if (batch < 1 || data_.size() < static_cast<std::size_t>(batch))
    throw std::logic_error("replay: not enough transitions for a batch");
  std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
  std::vector<std::size_t> idx(batch);
  for (int i = 0; i < batch; ++i) idx[i] = pick(rng);
  return idx;
}

Batch gather_batch(const ReplayBuffer& buffer,
                   const std::vector<std::size_t>& idx) {
  if (idx.empty()) throw std::invalid_argument("gather_batch: empty batch");
  const Transition& first = buffer.at(idx[0]);
  const int b = static_cast<int>(idx.size());
  Batch out;
  out.s.resize(b, first.state.size());
  out.a.resize(b, first.action.size());
  out.s2.resize(b, first.next_state.size());
  out.r.resize(b);
  out.done.resize(b);
  for (int i = 0; i < b; ++i) {
    const Transition& tr = buffer.at(idx[i]);
    out.s.row(i) = tr.state.transpose();
    out.a.row(i) = tr.action.transpose();
    out.s2.row(i) = tr.next_state.transpose();
    out.r(i) = tr.reward;
    out.done(i) = tr.terminal ? 1.0 : 0.0;
  }
  return out;
}

AgentBundle AgentBundle::create(int state_dim, int action_dim,
                                const AgentOptions& opt,
                                std::mt19937_64& rng) {
  opt.validate();
  if (state_dim < 1 || action_dim < 1)
    throw std::invalid_argument("agent: bad state/action dimension");
  std::vector<int> actor_sizes, critic_sizes;
  actor_sizes.push_back(state_dim);
  critic_sizes.push_back(state_dim + action_dim);
  for (int h : opt.hidden) {
    actor_sizes.push_back(h);
    critic_sizes.push_back(h);
  }
  actor_sizes.push_back(action_dim);
  critic_sizes.push_back(1);

  AgentBundle b;
  b.opt = opt;
  b.actor = make_mlp(actor_sizes, Activation::relu, Activation::linear, rng,
                     3e-3);
  b.critic =
      make_mlp(critic_sizes, Activation::relu, Activation::linear, rng, 3e-3);
  b.target_actor = b.actor;
  b.target_critic = b.critic;
  b.actor_opt = AdamState::for_net(b.actor, opt.lr_actor);
  b.critic_opt = AdamState::for_net(b.critic, opt.lr_critic);
  return b;
}

Eigen::VectorXd select_action(const AgentBundle& agent,
                              const Eigen::VectorXd& state, double noise_scale,
                              std::mt19937_64* rng) {
  Eigen::MatrixXd a = forward(agent.actor, state.transpose());
  Eigen::VectorXd out = a.row(0).transpose();
  if (rng != nullptr && noise_scale > 0.0) {
    std::normal_distribution<double> gauss(0.0, noise_scale);
    for (Eigen::Index i = 0; i < out.size(); ++i) out(i) += gauss(*rng);
  }
  return out;
}

namespace {

void optimizer_step(DenseNet& net, const Gradients& g, AdamState& state,
                    OptimizerKind kind) {
  if (kind == OptimizerKind::adam) {
    adam_step(net, g, state);
  } else {
    sgd_step(net, g, state.lr);
  }
}

}  // namespace

double critic_update(AgentBundle& agent, const Batch& batch) {
  if (batch.size() < 1) throw std::invalid_argument("critic_update: empty batch");
  const int b = batch.size();
  // Bootstrap target from the target networks only.
  Eigen::MatrixXd a2 = forward(agent.target_actor, batch.s2);
  Eigen::MatrixXd q2 = forward(agent.target_critic, join_cols(batch.s2, a2));
  Eigen::VectorXd x =
      batch.r.array() +
      (1.0 - batch.done) * agent.opt.discount * q2.col(0).array();

  ForwardCache cache;
  Eigen::MatrixXd q = forward(agent.critic, join_cols(batch.s, batch.a), &cache);
  Eigen::VectorXd diff = q.col(0) - x;
  double loss = diff.squaredNorm() / b;

  Eigen::MatrixXd dY = (2.0 / b) * diff;
  Gradients g = Gradients::zeros_like(agent.critic);
  backward(agent.critic, cache, dY, &g);
  optimizer_step(agent.critic, g, agent.critic_opt, agent.opt.optimizer);
  return loss;
}

double policy_objective(const AgentBundle& agent, const DenseNet& actor,
                        const Batch& batch) {
  Eigen::MatrixXd a = forward(actor, batch.s);
  Eigen::MatrixXd q = forward(agent.critic, join_cols(batch.s, a));
  return -q.col(0).mean();
}

double actor_update_ddpg(AgentBundle& agent, const Batch& batch) {
  if (batch.size() < 1) throw std::invalid_argument("actor_update: empty batch");
  const int b = batch.size();
  ForwardCache actor_cache, critic_cache;
  Eigen::MatrixXd a = forward(agent.actor, batch.s, &actor_cache);
  Eigen::MatrixXd q =
      forward(agent.critic, join_cols(batch.s, a), &critic_cache);
  double j = -q.col(0).mean();

  // dJ/dQ = -1/b; the critic only routes the gradient, its parameters stay.
  Eigen::MatrixXd dQ = Eigen::MatrixXd::Constant(b, 1, -1.0 / b);
  Eigen::MatrixXd dInput = backward_input(agent.critic, critic_cache, dQ);
  Eigen::MatrixXd dA = dInput.rightCols(agent.actor.out_dim());
  Gradients g = Gradients::zeros_like(agent.actor);
  backward(agent.actor, actor_cache, dA, &g);
  optimizer_step(agent.actor, g, agent.actor_opt, agent.opt.optimizer);
  return j;
}

double meta_regularizer(const DenseNet& actor, const Eigen::MatrixXd& states,
                        double psi, OmegaAggregate agg) {
  Eigen::MatrixXd y = forward(actor, states);
  // softplus(x) = log1p(exp(x)) with the large-x guard x + log1p(exp(-x)).
  double total = 0.0;
  for (Eigen::Index r = 0; r < y.rows(); ++r)
    for (Eigen::Index c = 0; c < y.cols(); ++c) {
      double v = y(r, c);
      total += v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
    }
  double denom = agg == OmegaAggregate::mean
                     ? static_cast<double>(y.rows() * y.cols())
                     : static_cast<double>(y.rows());
  return psi * total / denom;
}

MetaStep actor_update_meta(AgentBundle& agent, const MetaState& meta,
                           const Batch& batch) {
  actor_update_ddpg(agent, batch);  // produces omega_old in place
  MetaStep out;
  out.actor_old = agent.actor;

  if (meta.psi == 0.0 && meta.lr_meta == 0.0) {
    // Exact reduction path: no regularizer arithmetic at all.
    out.j_old = out.j_new = policy_objective(agent, agent.actor, batch);
    return out;
  }

  // Gradient of mean softplus(actor output) at omega_old; psi scales later
  // so the same direction serves the finite-difference probes.
  ForwardCache cache;
  Eigen::MatrixXd y = forward(agent.actor, batch.s, &cache);
  double denom = agent.opt.omega_agg == OmegaAggregate::mean
                     ? static_cast<double>(y.rows() * y.cols())
                     : static_cast<double>(y.rows());
  Eigen::MatrixXd dY(y.rows(), y.cols());
  for (Eigen::Index r = 0; r < y.rows(); ++r)
    for (Eigen::Index c = 0; c < y.cols(); ++c) {
      double v = y(r, c);
      double sig = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                            : std::exp(v) / (1.0 + std::exp(v));
      dY(r, c) = sig / denom;
    }
  out.omega_grad = Gradients::zeros_like(agent.actor);
  backward(agent.actor, cache, dY, &out.omega_grad);
  out.have_grad = true;

  if (meta.psi != 0.0) {
    // Plain step, no optimizer state: omega_new = omega_old - lr*psi*grad.
    apply_scaled(agent.actor, out.omega_grad,
                 -agent.opt.lr_actor * meta.psi);
    out.stepped = true;
  }
  out.j_old = policy_objective(agent, out.actor_old, batch);
  out.j_new = out.stepped ? policy_objective(agent, agent.actor, batch)
                          : out.j_old;
  return out;
}

void meta_update(MetaState& meta, const AgentBundle& agent,
                 const MetaStep& step, const Batch& batch) {
  if (meta.lr_meta == 0.0) return;
  if (!step.have_grad)
    throw std::logic_error("meta_update: missing regularizer gradient");
  const double eps = agent.opt.fd_eps;
  auto probe = [&](double psi_e) {
    DenseNet actor_e = step.actor_old;
    apply_scaled(actor_e, step.omega_grad, -agent.opt.lr_actor * psi_e);
    return policy_objective(agent, actor_e, batch);
  };
  double jp = probe(meta.psi + eps);
  double jm = probe(meta.psi - eps);
  double grad =
      (std::tanh(jp - step.j_old) - std::tanh(jm - step.j_old)) / (2.0 * eps);
  meta.psi = std::clamp(meta.psi - meta.lr_meta * grad, 0.0, 1.0);
}

TrainResult train(const Topology& topo, const TrainOptions& opt,
                  std::uint64_t seed) {
  opt.agent.validate();
  if (opt.episodes < 1) throw std::invalid_argument("train: bad episode count");

  Environment env(topo, opt.env, seed);
  std::mt19937_64 init_rng = make_engine(seed, streams::net_init);
  std::mt19937_64 explore_rng = make_engine(seed, streams::exploration);
  std::mt19937_64 replay_rng = make_engine(seed, streams::replay);

  const MdpSpaces& sp = env.spaces();
  AgentBundle agent =
      AgentBundle::create(sp.state_dim, sp.action_dim, opt.agent, init_rng);
  MetaState meta{opt.agent.psi0, opt.agent.lr_meta};
  ReplayBuffer buffer(opt.agent.buffer_capacity);

  TrainResult result;
  result.episodes.reserve(opt.episodes);
  double noise = opt.agent.noise_scale;
  long long global_step = 0;

  for (int ep = 0; ep < opt.episodes; ++ep) {
    Eigen::VectorXd state = env.reset();
    EpisodeStat stat;
    int steps = 0;
    bool done = false;
    while (!done) {
      Eigen::VectorXd raw = select_action(agent, state, noise, &explore_rng);
      StepOutcome out = env.step(raw);
      buffer.push(out.tr);
      state = out.tr.next_state;
      done = out.tr.terminal;
      ++steps;
      ++global_step;

      stat.reward += out.tr.reward;
      stat.total_rate += out.report.total;
      stat.min_rate += out.report.rate.minCoeff();
      if (out.feasible) ++stat.feasible_steps;

      if (buffer.size() >= static_cast<std::size_t>(opt.agent.batch_size)) {
        Batch batch = gather_batch(
            buffer,
            buffer.sample_indices(opt.agent.batch_size, replay_rng));
        critic_update(agent, batch);
        if (agent.opt.kind == AgentKind::ddpg) {
          actor_update_ddpg(agent, batch);
        } else {
          MetaStep ms = actor_update_meta(agent, meta, batch);
          meta_update(meta, agent, ms, batch);
        }
        if (global_step % agent.opt.update_period == 0) {
          soft_update(agent.target_actor, agent.actor, agent.opt.tau);
          soft_update(agent.target_critic, agent.critic, agent.opt.tau);
        }
      }
    }
    stat.reward /= steps;
    stat.total_rate /= steps;
    stat.min_rate /= steps;
    result.episodes.push_back(stat);
    noise = std::max(opt.agent.noise_floor, noise * opt.agent.noise_decay);
  }
  result.bundle = std::move(agent);
  result.meta = meta;
  result.final_noise_scale = noise;
  return result;
}

void save_agent(std::ostream& out, const AgentBundle& bundle,
                const MetaState& meta, double noise_scale) {
  out.write(kAgentMagic, sizeof(kAgentMagic));
  save_net(out, bundle.actor);
  save_net(out, bundle.critic);
  save_net(out, bundle.target_actor);
  save_net(out, bundle.target_critic);
  save_adam(out, bundle.actor_opt);
  save_adam(out, bundle.critic_opt);
  out.write(reinterpret_cast<const char*>(&meta.psi), sizeof(meta.psi));
  out.write(reinterpret_cast<const char*>(&meta.lr_meta),
            sizeof(meta.lr_meta));
  out.write(reinterpret_cast<const char*>(&noise_scale), sizeof(noise_scale));
}

void load_agent(std::istream& in, AgentBundle& bundle, MetaState& meta,
                double& noise_scale) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kAgentMagic, sizeof(magic)) != 0)
    throw std::runtime_error("checkpoint: bad agent header");
  bundle.actor = load_net(in);
  bundle.critic = load_net(in);
  bundle.target_actor = load_net(in);
  bundle.target_critic = load_net(in);
  bundle.actor_opt = load_adam(in, bundle.actor);
  bundle.critic_opt = load_adam(in, bundle.critic);
  in.read(reinterpret_cast<char*>(&meta.psi), sizeof(meta.psi));
  in.read(reinterpret_cast<char*>(&meta.lr_meta), sizeof(meta.lr_meta));
  in.read(reinterpret_cast<char*>(&noise_scale), sizeof(noise_scale));
  if (!in) throw std::runtime_error("checkpoint: truncated agent state");
}

}  // namespace starnoma
