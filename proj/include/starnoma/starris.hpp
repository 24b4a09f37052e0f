#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "starnoma/channel.hpp"

namespace starnoma {

// Per-element operating state of every surface. All arrays are per surface,
// each of length M_n. Energy split: alpha_t is stored explicitly and is
// produced as 1 - alpha_r by the projection, so alpha_r + alpha_t = 1 holds
// to within one ulp; checks use a 1e-9 guard.
struct StarRisProfile {
  std::vector<Eigen::ArrayXd> alpha_r, alpha_t;  // energy split in [0, 1]
  std::vector<Eigen::ArrayXd> theta_r, theta_t;  // phases in [0, 2*pi)
  std::vector<Eigen::ArrayXd> delta_r, delta_t;  // amplification in [0, delta_max]

  int num_ris() const { return static_cast<int>(alpha_r.size()); }

  // Even split, zero phases, unit amplification.
  static StarRisProfile neutral(const std::vector<int>& elements);

  // Throws std::invalid_argument when any entry leaves its range or the
  // energy split is violated beyond the 1e-9 guard.
  void validate(double delta_max) const;
};

// Element coefficients sqrt(delta * alpha) * exp(i * theta) for one face of
// one surface; the beamforming matrix is their diagonal embedding.
Eigen::VectorXcd element_coeffs(const StarRisProfile& prof, int ris, Side side);
Eigen::MatrixXcd beamforming_matrix(const StarRisProfile& prof, int ris,
                                    Side side);

// Joint action after projection: feasible by construction.
struct FeasibleAction {
  Eigen::MatrixXd beta;    // K x N association weights, rows sum to 1
  Eigen::VectorXd power;   // K transmit powers, sum <= p_max
  Eigen::MatrixXcd w;      // N_bs x K receive beamformers, unit columns
  StarRisProfile profile;
};

// Uplink cascade toward the BS for one user through its candidate surface n:
// the first-order hop F_n^H Theta f plus, for every nearer surface np > n,
// the second-order hop F_np^H Theta_np G(n,np)^T Theta_n f. The inter-surface
// matrix enters transposed because G(n,np) is stored as M_n x M_np while the
// second bounce propagates from surface n's elements to surface np's.
Eigen::VectorXcd effective_channel(const ChannelSet& ch,
                                   const StarRisProfile& prof,
                                   const Topology& topo, int user);

// SIC decoding order: users sorted by effective gain ascending, ties broken
// by lower user id. Returns position -> user id.
std::vector<int> decoding_order(const std::vector<double>& gains);

// How the numerator treats the association weights: "selected" serves a user
// only when its strongest beta entry matches its candidate surface (otherwise
// the served power is zero), "beta_sum" ignores beta and always serves the
// candidate-surface channel.
enum class NumeratorMode { selected, beta_sum };

struct RateReport {
  Eigen::VectorXd gain;       // |w_k^H h_k|^2 per user
  Eigen::VectorXd sinr;       // per user
  Eigen::VectorXd rate;       // log2(1 + sinr)
  Eigen::VectorXd qos_slack;  // rate - r_min
  std::vector<int> order;     // SIC order, position -> user
  double total = 0.0;
};

// Full SINR/rate evaluation. Interference on user k comes from same-surface
// users decoded earlier in the SIC order and from every user of a farther
// surface (lower surface index), each contributing p_v |w_k^H h_v|^2; the
// association weights never scale interference. Noise is sigma^2 ||w_k||^2.
RateReport rate_report(const ChannelSet& ch, const Topology& topo,
                       const FeasibleAction& act, double noise_power,
                       double r_min,
                       NumeratorMode mode = NumeratorMode::selected);

struct ConstraintReport {
  struct Entry {
    bool pass = true;
    double violation = 0.0;  // raw excess, 0 when satisfied
  };
  // c[0] = qos rate floor, c[1] = total power budget, c[2] = relaxed binary
  // association sum(beta - beta^2) <= 0, c[3] = per-user association mass
  // <= 1, c[4] = nonneg association, c[5] = nonneg power, c[6] = amplification
  // range, c[7] = energy split equality, c[8] = phase range, c[9] = energy
  // split component range.
  std::array<Entry, 10> c;

  bool all_pass() const;
  // Feasibility gate used for the reward: everything except the rate floor
  // (handled by the penalty) and the relaxed binary-association constraint.
  bool feasible() const;
};

ConstraintReport check_constraints(const FeasibleAction& act,
                                   const RateReport& report, double p_max,
                                   double r_min, double delta_max);

}  // namespace starnoma
