#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

#include "starnoma/channel.hpp"
#include "starnoma/starris.hpp"

namespace starnoma {

// Dimensions and raw-action block offsets for a topology. Raw action layout:
//   [0, K*N)                association logits, user-major
//   [beta+, +K)             power logits
//   [power+, +2*K*N_bs)     beamformer components, per user re(0..N_bs-1)
//                           then im(0..N_bs-1)
//   [w+, +5*sum M_n)        per surface: theta_r, theta_t, alpha_r, delta_r,
//                           delta_t blocks of M_n each
// State layout: [prev shaped reward, then re/im pairs of every channel entry
// in sample order (F per surface row-major, f per user, inter-surface pairs
// lexicographic row-major), each divided by sqrt of its link path loss].
struct MdpSpaces {
  int state_dim = 0;
  int action_dim = 0;
  int beta_off = 0;
  int power_off = 0;
  int w_off = 0;
  int profile_off = 0;

  static MdpSpaces of(const Topology& topo);
};

Eigen::VectorXd encode_state(double prev_reward, const ChannelSet& ch,
                             const Topology& topo);

struct ProjectionOptions {
  double p_max = 1.0;
  double delta_max = 1.0;
  bool pin_unit_delta = false;  // passive surfaces: both faces fixed at 1
};

// Deterministic map from an unconstrained raw vector to a feasible action:
// per-user softmax for the association, sigmoid power shares rescaled so the
// sum cannot exceed p_max, unit-normalized beamformers (first basis vector
// when the raw vector is numerically zero), phases 2*pi*sigmoid wrapped into
// [0, 2*pi), energy split sigmoid with alpha_t = 1 - alpha_r, amplification
// delta_max*sigmoid.
FeasibleAction project_action(const Eigen::VectorXd& raw, const Topology& topo,
                              const ProjectionOptions& opt);

// Per-user QoS penalty: 0 when the rate meets the floor, -rate when it is
// positive but short, -c3 when the link is dead (rate below 1e-12).
double qos_penalty(double rate, double r_min, double c3);

struct RewardCoeffs {
  double c1 = 1.0;  // weight on the sum rate
  double c2 = 1.0;  // weight on the summed penalties
  double c3 = 1.0;  // dead-link penalty magnitude
};

// c1 * sum rates + c2 * sum per-user penalties.
double shaped_reward(const RateReport& report, const RewardCoeffs& coeffs,
                     double r_min);

// Shaped value when the action is feasible, 0 otherwise.
double immediate_reward(double shaped, bool feasible);

struct EnvOptions {
  double p_max = 1.0;
  double delta_max = 1.0;
  double r_min = 1.0;
  double noise_power = 1e-12;
  RewardCoeffs coeffs;
  int t_max = 50;
  NumeratorMode numerator = NumeratorMode::selected;
  bool pin_unit_delta = false;   // passive scenario
  bool zero_inter_ris = false;   // drop second-order propagation
  bool resample_each_step = true;
};

struct Transition {
  Eigen::VectorXd state;
  Eigen::VectorXd action;  // raw, pre-projection
  double reward = 0.0;     // immediate (feasibility-gated)
  Eigen::VectorXd next_state;
  bool terminal = false;
};

struct StepOutcome {
  Transition tr;
  RateReport report;
  ConstraintReport constraints;
  double shaped = 0.0;
  bool feasible = false;
};

// Draws a realization and applies the zero_inter_ris switch.
ChannelSet sample_env_channels(const Topology& topo, std::uint64_t seed,
                               bool zero_inter_ris);

// Episodic wrapper. Channel realizations are drawn from a deterministic
// per-instance seed sequence, one draw per reset and (in the default
// per-step mode) one per step.
class Environment {
 public:
  Environment(Topology topo, EnvOptions opt, std::uint64_t seed);

  Eigen::VectorXd reset();
  StepOutcome step(const Eigen::VectorXd& raw_action);

  const Eigen::VectorXd& state() const { return state_; }
  const ChannelSet& channels() const { return channels_; }
  const Topology& topology() const { return topo_; }
  const EnvOptions& options() const { return opt_; }
  const MdpSpaces& spaces() const { return spaces_; }
  int step_index() const { return step_; }

 private:
  Topology topo_;
  EnvOptions opt_;
  MdpSpaces spaces_;
  std::mt19937_64 seeder_;
  ChannelSet channels_;
  Eigen::VectorXd state_;
  double prev_shaped_ = 0.0;
  int step_ = 0;
};

}  // namespace starnoma
