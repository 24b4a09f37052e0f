#include "starnoma/mdp.hpp"

#include <cmath>
#include <stdexcept>

#include "starnoma/rng.hpp"

namespace starnoma {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

MdpSpaces MdpSpaces::of(const Topology& topo) {
  topo.validate();
  const int n = topo.num_ris();
  const int k = topo.num_users();
  int cplx = 0;
  for (int i = 0; i < n; ++i) cplx += topo.elements[i] * topo.bs_antennas;
  for (int u = 0; u < k; ++u) cplx += topo.elements[topo.serving_ris[u]];
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) cplx += topo.elements[a] * topo.elements[b];

  MdpSpaces sp;
  sp.state_dim = 1 + 2 * cplx;
  sp.beta_off = 0;
  sp.power_off = k * n;
  sp.w_off = sp.power_off + k;
  sp.profile_off = sp.w_off + 2 * k * topo.bs_antennas;
  sp.action_dim = sp.profile_off + 5 * topo.total_elements();
  return sp;
}

Eigen::VectorXd encode_state(double prev_reward, const ChannelSet& ch,
                             const Topology& topo) {
  ch.validate(topo);
  MdpSpaces sp = MdpSpaces::of(topo);
  Eigen::VectorXd s(sp.state_dim);
  int at = 0;
  s(at++) = prev_reward;
  auto put = [&](const std::complex<double>& z, double pl) {
    double inv = 1.0 / std::sqrt(pl);
    s(at++) = z.real() * inv;
    s(at++) = z.imag() * inv;
  };
  for (int n = 0; n < topo.num_ris(); ++n) {
    double pl = path_loss(topo.dist_ris_bs(n), topo.pl_bs.exponent,
                          topo.pl_bs.ref_loss_db);
    for (Eigen::Index r = 0; r < ch.F[n].rows(); ++r)
      for (Eigen::Index c = 0; c < ch.F[n].cols(); ++c) put(ch.F[n](r, c), pl);
  }
  for (int u = 0; u < topo.num_users(); ++u) {
    double pl = path_loss(topo.dist_user_ris(u), topo.pl_user.exponent,
                          topo.pl_user.ref_loss_db);
    for (Eigen::Index i = 0; i < ch.f[u].size(); ++i) put(ch.f[u](i), pl);
  }
  for (int a = 0; a < topo.num_ris(); ++a)
    for (int b = a + 1; b < topo.num_ris(); ++b) {
      double pl = path_loss(topo.dist_ris_ris(a, b), topo.pl_ris.exponent,
                            topo.pl_ris.ref_loss_db);
      const Eigen::MatrixXcd& g = ch.inter(a, b);
      for (Eigen::Index r = 0; r < g.rows(); ++r)
        for (Eigen::Index c = 0; c < g.cols(); ++c) put(g(r, c), pl);
    }
  return s;
}

FeasibleAction project_action(const Eigen::VectorXd& raw, const Topology& topo,
                              const ProjectionOptions& opt) {
  MdpSpaces sp = MdpSpaces::of(topo);
  if (raw.size() != sp.action_dim)
    throw std::invalid_argument("project_action: raw action size mismatch");
  const int n = topo.num_ris();
  const int k = topo.num_users();
  const int q = topo.bs_antennas;

  FeasibleAction act;
  // Association: row-wise softmax keeps every row on the simplex.
  act.beta.resize(k, n);
  for (int u = 0; u < k; ++u) {
    Eigen::ArrayXd logits = raw.segment(sp.beta_off + u * n, n).array();
    Eigen::ArrayXd e = (logits - logits.maxCoeff()).exp();
    act.beta.row(u) = (e / e.sum()).matrix().transpose();
  }

  // Powers: sigmoid shares, rescaled only when the share total exceeds 1.
  Eigen::ArrayXd share(k);
  for (int u = 0; u < k; ++u) share(u) = sigmoid(raw(sp.power_off + u));
  double denom = std::max(share.sum(), 1.0);
  act.power = (opt.p_max * share / denom).matrix();

  // Beamformers: unit columns, deterministic fallback for a zero raw block.
  act.w.resize(q, k);
  for (int u = 0; u < k; ++u) {
    Eigen::VectorXcd col(q);
    for (int i = 0; i < q; ++i)
      col(i) = std::complex<double>(raw(sp.w_off + u * 2 * q + i),
                                    raw(sp.w_off + u * 2 * q + q + i));
    double norm = col.norm();
    if (norm < 1e-12) {
      col.setZero();
      col(0) = 1.0;
    } else {
      col /= norm;
    }
    act.w.col(u) = col;
  }

  // Element profile.
  act.profile.alpha_r.resize(n);
  act.profile.alpha_t.resize(n);
  act.profile.theta_r.resize(n);
  act.profile.theta_t.resize(n);
  act.profile.delta_r.resize(n);
  act.profile.delta_t.resize(n);
  int at = sp.profile_off;
  for (int i = 0; i < n; ++i) {
    const int m = topo.elements[i];
    auto block = [&](int slot) {
      return raw.segment(at + slot * m, m).array();
    };
    Eigen::ArrayXd theta_r(m), theta_t(m), alpha_r(m), delta_r(m), delta_t(m);
    for (int e = 0; e < m; ++e) {
      // fmod folds the saturated sigmoid (exactly 1) back to phase 0.
      theta_r(e) = std::fmod(kTwoPi * sigmoid(block(0)(e)), kTwoPi);
      theta_t(e) = std::fmod(kTwoPi * sigmoid(block(1)(e)), kTwoPi);
      alpha_r(e) = sigmoid(block(2)(e));
      delta_r(e) = opt.delta_max * sigmoid(block(3)(e));
      delta_t(e) = opt.delta_max * sigmoid(block(4)(e));
    }
    if (opt.pin_unit_delta) {
      delta_r.setOnes();
      delta_t.setOnes();
    }
    act.profile.theta_r[i] = theta_r;
    act.profile.theta_t[i] = theta_t;
    act.profile.alpha_r[i] = alpha_r;
    act.profile.alpha_t[i] = 1.0 - alpha_r;
    act.profile.delta_r[i] = delta_r;
    act.profile.delta_t[i] = delta_t;
    at += 5 * m;
  }
  return act;
}

double qos_penalty(double rate, double r_min, double c3) {
  if (rate >= r_min) return 0.0;
  if (rate <= 1e-12) return -c3;
  return -rate;
}

double shaped_reward(const RateReport& report, const RewardCoeffs& coeffs,
                     double r_min) {
  double pen = 0.0;
  for (Eigen::Index i = 0; i < report.rate.size(); ++i)
    pen += qos_penalty(report.rate(i), r_min, coeffs.c3);
  return coeffs.c1 * report.rate.sum() + coeffs.c2 * pen;
}

double immediate_reward(double shaped, bool feasible) {
  return feasible ? shaped : 0.0;
}

ChannelSet sample_env_channels(const Topology& topo, std::uint64_t seed,
                               bool zero_inter_ris) {
  ChannelSet ch = sample_channels(topo, seed);
  if (zero_inter_ris)
    for (Eigen::MatrixXcd& g : ch.G) g.setZero();
  return ch;
}

Environment::Environment(Topology topo, EnvOptions opt, std::uint64_t seed)
    : topo_(std::move(topo)),
      opt_(opt),
      spaces_(MdpSpaces::of(topo_)),
      seeder_(make_engine(seed, streams::env)) {
  reset();
}

Eigen::VectorXd Environment::reset() {
  channels_ = sample_env_channels(topo_, seeder_(), opt_.zero_inter_ris);
  prev_shaped_ = 0.0;
  step_ = 0;
  state_ = encode_state(prev_shaped_, channels_, topo_);
  return state_;
}

StepOutcome Environment::step(const Eigen::VectorXd& raw_action) {
  ProjectionOptions popt{opt_.p_max, opt_.delta_max, opt_.pin_unit_delta};
  FeasibleAction act = project_action(raw_action, topo_, popt);
  RateReport rep = rate_report(channels_, topo_, act, opt_.noise_power,
                               opt_.r_min, opt_.numerator);
  ConstraintReport con =
      check_constraints(act, rep, opt_.p_max, opt_.r_min, opt_.delta_max);

  StepOutcome out;
  out.report = rep;
  out.constraints = con;
  out.shaped = shaped_reward(rep, opt_.coeffs, opt_.r_min);
  out.feasible = con.feasible();
  out.tr.state = state_;
  out.tr.action = raw_action;
  out.tr.reward = immediate_reward(out.shaped, out.feasible);

  ++step_;
  out.tr.terminal = step_ >= opt_.t_max;
  if (opt_.resample_each_step)
    channels_ = sample_env_channels(topo_, seeder_(), opt_.zero_inter_ris);
  prev_shaped_ = out.shaped;
  state_ = encode_state(prev_shaped_, channels_, topo_);
  out.tr.next_state = state_;
  return out;
}

}  // namespace starnoma
