#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "starnoma/mdp.hpp"
#include "starnoma/nn.hpp"

namespace starnoma {

enum class AgentKind { ddpg, meta };
enum class OptimizerKind { adam, sgd };
enum class OmegaAggregate { mean, sum };  // over action dimensions

struct AgentOptions {
  AgentKind kind = AgentKind::meta;
  std::vector<int> hidden = {256, 256};
  double lr_actor = 1e-4;
  double lr_critic = 1e-3;
  double lr_meta = 1e-3;
  double tau = 0.005;       // soft-update rate
  double discount = 0.99;   // eta
  int batch_size = 100;
  std::size_t buffer_capacity = 10000;
  int update_period = 1;    // target sync every A_update steps
  double noise_scale = 0.2;
  double noise_decay = 0.995;  // per episode
  double noise_floor = 0.01;
  double psi0 = 0.5;
  double fd_eps = 1e-3;
  OptimizerKind optimizer = OptimizerKind::adam;
  OmegaAggregate omega_agg = OmegaAggregate::mean;

  void validate() const;  // throws std::invalid_argument
};

// Fixed-capacity ring; sampling is uniform with replacement and only legal
// once size >= batch.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);
  void push(Transition tr);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return data_.at(i); }
  std::vector<std::size_t> sample_indices(int batch,
                                          std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> data_;
};

struct Batch {
  Eigen::MatrixXd s, a, s2;  // rows are samples
  Eigen::VectorXd r;
  Eigen::ArrayXd done;       // 1.0 at terminal transitions
  int size() const { return static_cast<int>(s.rows()); }
};

Batch gather_batch(const ReplayBuffer& buffer,
                   const std::vector<std::size_t>& idx);

struct MetaState {
  double psi = 0.5;     // in [0, 1]
  double lr_meta = 1e-3;
};

struct AgentBundle {
  AgentOptions opt;
  DenseNet actor, critic, target_actor, target_critic;
  AdamState actor_opt, critic_opt;

  // Actor [state, hidden..., action] with linear output (the projection does
  // all squashing); critic [state+action, hidden..., 1]. Targets start as
  // copies. Draw order: actor, then critic.
  static AgentBundle create(int state_dim, int action_dim,
                            const AgentOptions& opt, std::mt19937_64& rng);
};

// Deterministic policy output, plus Gaussian exploration noise when rng is
// given and scale > 0.
Eigen::VectorXd select_action(const AgentBundle& agent,
                              const Eigen::VectorXd& state, double noise_scale,
                              std::mt19937_64* rng);

// One optimizer step on mean((X - Q(s,a))^2) with the bootstrap target
// X = r + (1 - b) * eta * targetQ(s', targetPolicy(s')). Targets are never
// touched. Returns the pre-step loss.
double critic_update(AgentBundle& agent, const Batch& batch);

// J = -mean_batch Q(s, actor(s)) under the given actor and the bundle critic.
double policy_objective(const AgentBundle& agent, const DenseNet& actor,
                        const Batch& batch);

// One optimizer step on J; gradient flows through the critic into the actor,
// critic parameters untouched. Returns J evaluated before the step. The
// post-step parameters are the omega_old of the meta path.
double actor_update_ddpg(AgentBundle& agent, const Batch& batch);

// psi * mean over batch (and, for the mean aggregate, action dimensions) of
// softplus(actor output), natural log.
double meta_regularizer(const DenseNet& actor, const Eigen::MatrixXd& states,
                        double psi, OmegaAggregate agg);

struct MetaStep {
  double j_old = 0.0;      // J at omega_old
  double j_new = 0.0;      // J at omega_new
  bool stepped = false;    // false when the regularizer step was skipped
  bool have_grad = false;
  DenseNet actor_old;      // omega_old snapshot
  Gradients omega_grad;    // gradient of the psi-independent softplus mean
};

// Meta actor path on one batch: the DDPG step first (producing omega_old),
// then the plain step omega_new = omega_old - lr_actor * psi * grad(Omega).
// The regularizer step deliberately bypasses the adaptive optimizer so that
// psi = 0 leaves the parameters bit-identical to the DDPG path; with
// psi = 0 and lr_meta = 0 the gradient evaluation is skipped entirely.
MetaStep actor_update_meta(AgentBundle& agent, const MetaState& meta,
                           const Batch& batch);

// psi <- clamp(psi - lr_meta * d/dpsi tanh(J(omega_new(psi)) - J(omega_old)))
// with the derivative taken by central finite difference at psi +- fd_eps,
// rebuilding omega_new from the cached omega_old and softplus gradient.
// No-op when lr_meta = 0.
void meta_update(MetaState& meta, const AgentBundle& agent,
                 const MetaStep& step, const Batch& batch);

struct EpisodeStat {
  double reward = 0.0;      // mean immediate reward over steps
  double total_rate = 0.0;  // mean sum rate over steps
  double min_rate = 0.0;    // mean minimum user rate over steps
  int feasible_steps = 0;
};

struct TrainOptions {
  int episodes = 300;
  AgentOptions agent;
  EnvOptions env;
};

struct TrainResult {
  std::vector<EpisodeStat> episodes;
  AgentBundle bundle;
  MetaState meta;
  double final_noise_scale = 0.0;
};

// Full loop: per step select/store, then once the buffer holds a batch,
// critic update and the agent-kind actor path every step, target soft
// updates every A_update steps. Exploration scale decays per episode.
// Seed streams: net_init, env, exploration, replay.
TrainResult train(const Topology& topo, const TrainOptions& opt,
                  std::uint64_t seed);

// Checkpoint: four networks, both optimizer states, psi and noise scale.
void save_agent(std::ostream& out, const AgentBundle& bundle,
                const MetaState& meta, double noise_scale);
void load_agent(std::istream& in, AgentBundle& bundle, MetaState& meta,
                double& noise_scale);

}  // namespace starnoma
