#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "starnoma/mdp.hpp"

using namespace starnoma;

namespace {

Topology desk_topology() { return make_line_topology(LineLayout{}); }

// One surface, one element, one user, one antenna: the smallest legal world.
Topology tiny_topology() {
  Topology t;
  t.bs = Eigen::Vector2d::Zero();
  t.ris = {Eigen::Vector2d(10.0, 0.0)};
  t.elements = {1};
  t.bs_antennas = 1;
  t.user = {Eigen::Vector2d(11.0, 0.0)};
  t.side = {Side::reflection};
  t.serving_ris = {0};
  t.pl_bs = {30.0, 2.0};
  t.pl_user = {30.0, 2.0};
  t.validate();
  return t;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST_CASE("space dimensions for the default two-surface layout") {
  MdpSpaces sp = MdpSpaces::of(desk_topology());
  // N=2 surfaces of 4 elements, K=4 users, 2 BS antennas:
  // state = 1 + 2*(F: 2*4*2 + f: 4*4 + G: 4*4) = 97
  // action = beta 4*2 + power 4 + w 4*2*2 + profile 2*5*4 = 68
  CHECK(sp.state_dim == 97);
  CHECK(sp.action_dim == 68);
  CHECK(sp.beta_off == 0);
  CHECK(sp.power_off == 8);
  CHECK(sp.w_off == 12);
  CHECK(sp.profile_off == 28);
}

TEST_CASE("space dimensions for the smallest world") {
  MdpSpaces sp = MdpSpaces::of(tiny_topology());
  // state = 1 + 2*(1 + 1 + 0) = 5; action = 1 + 1 + 2 + 5 = 9
  CHECK(sp.state_dim == 5);
  CHECK(sp.action_dim == 9);
  CHECK(sp.beta_off == 0);
  CHECK(sp.power_off == 1);
  CHECK(sp.w_off == 2);
  CHECK(sp.profile_off == 4);
}

TEST_CASE("zero channels and zero reward encode to the zero vector") {
  Topology topo = desk_topology();
  ChannelSet ch = sample_channels(topo, 7u);
  for (auto& m : ch.F) m.setZero();
  for (auto& v : ch.f) v.setZero();
  for (auto& g : ch.G) g.setZero();
  Eigen::VectorXd s = encode_state(0.0, ch, topo);
  CHECK(s.size() == 97);
  CHECK(s.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("state encoding normalizes each entry by its link loss") {
  Topology topo = tiny_topology();
  ChannelSet ch;
  ch.num_ris = 1;
  ch.F = {Eigen::MatrixXcd::Constant(1, 1, std::complex<double>(3.0, -4.0))};
  ch.f = {Eigen::VectorXcd::Constant(1, std::complex<double>(0.5, 2.0))};

  // Surface at 10 m with exponent 2.0 and 30 dB reference:
  // pl = 1e-3 * 10^-2 = 1e-5, so 1/sqrt(pl) = 10^2.5.
  // User at 1 m: pl = 1e-3, 1/sqrt(pl) = 10^1.5.
  const double inv_bs = 316.22776601683796;   // 10^2.5
  const double inv_user = 31.622776601683793;  // 10^1.5
  Eigen::VectorXd s = encode_state(-1.25, ch, topo);
  REQUIRE(s.size() == 5);
  CHECK(s(0) == -1.25);
  CHECK(s(1) == doctest::Approx(3.0 * inv_bs).epsilon(1e-12));
  CHECK(s(2) == doctest::Approx(-4.0 * inv_bs).epsilon(1e-12));
  CHECK(s(3) == doctest::Approx(0.5 * inv_user).epsilon(1e-12));
  CHECK(s(4) == doctest::Approx(2.0 * inv_user).epsilon(1e-12));
}

TEST_CASE("state encoding is seed-reproducible end to end") {
  Topology topo = desk_topology();
  Eigen::VectorXd a = encode_state(2.5, sample_channels(topo, 99u), topo);
  Eigen::VectorXd b = encode_state(2.5, sample_channels(topo, 99u), topo);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("projecting the zero raw vector gives the neutral midpoint action") {
  Topology topo = desk_topology();
  MdpSpaces sp = MdpSpaces::of(topo);
  ProjectionOptions opt;
  opt.p_max = 10.0;
  opt.delta_max = 4.0;
  FeasibleAction act = project_action(Eigen::VectorXd::Zero(sp.action_dim),
                                      topo, opt);

  // Uniform association over the two surfaces.
  REQUIRE(act.beta.rows() == 4);
  REQUIRE(act.beta.cols() == 2);
  CHECK((act.beta.array() - 0.5).abs().maxCoeff() < 1e-12);

  // Equal sigmoid shares: p_k = 10 * 0.5 / max(4*0.5, 1) = 2.5.
  REQUIRE(act.power.size() == 4);
  CHECK((act.power.array() - 2.5).abs().maxCoeff() < 1e-12);

  // Zero beamformer raw falls back to the first basis vector.
  REQUIRE(act.w.rows() == 2);
  REQUIRE(act.w.cols() == 4);
  for (int k = 0; k < 4; ++k) {
    CHECK(std::abs(act.w(0, k) - std::complex<double>(1.0, 0.0)) < 1e-12);
    CHECK(std::abs(act.w(1, k)) < 1e-12);
  }

  // Midpoint phases, even split, half amplification.
  for (int n = 0; n < 2; ++n) {
    CHECK((act.profile.theta_r[n] - M_PI).abs().maxCoeff() < 1e-12);
    CHECK((act.profile.theta_t[n] - M_PI).abs().maxCoeff() < 1e-12);
    CHECK((act.profile.alpha_r[n] - 0.5).abs().maxCoeff() < 1e-12);
    CHECK((act.profile.alpha_t[n] - 0.5).abs().maxCoeff() < 1e-12);
    CHECK((act.profile.delta_r[n] - 2.0).abs().maxCoeff() < 1e-12);
    CHECK((act.profile.delta_t[n] - 2.0).abs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("projection places each raw block where the layout says") {
  Topology topo = desk_topology();
  MdpSpaces sp = MdpSpaces::of(topo);
  ProjectionOptions opt;
  opt.p_max = 8.0;
  opt.delta_max = 316.0;
  Eigen::VectorXd raw = Eigen::VectorXd::Zero(sp.action_dim);

  // User 0 strongly prefers surface 1 (user-major logits).
  raw(sp.beta_off + 0 * 2 + 1) = 20.0;
  // User 2 demands a large power share.
  raw(sp.power_off + 2) = 20.0;
  // User 0 beamformer raw (re0, re1, im0, im1) = (3, 0, 4, 0).
  raw(sp.w_off + 0) = 3.0;
  raw(sp.w_off + 2) = 4.0;
  // Surface 1, element 2: push the transmission phase logit high and set a
  // known amplification logit (slot order theta_r, theta_t, alpha_r,
  // delta_r, delta_t).
  const int m = 4;
  const int s1 = sp.profile_off + 1 * 5 * m;
  raw(s1 + 1 * m + 2) = 40.0;   // theta_t -> sigmoid saturates at 1.0
  raw(s1 + 3 * m + 2) = 1.0;    // delta_r logit

  FeasibleAction act = project_action(raw, topo, opt);

  CHECK(act.beta(0, 1) > 1.0 - 1e-8);
  CHECK(act.beta(0, 0) < 1e-8);
  CHECK(act.beta.row(1).sum() == doctest::Approx(1.0).epsilon(1e-12));

  // Shares: sigma = {0.5, 0.5, 1, 0.5} -> sum 2.5.
  CHECK(act.power(2) == doctest::Approx(8.0 * 1.0 / 2.5).epsilon(1e-9));
  CHECK(act.power(0) == doctest::Approx(8.0 * 0.5 / 2.5).epsilon(1e-9));
  CHECK(act.power.sum() <= 8.0 + 1e-9);

  CHECK(std::abs(act.w(0, 0) - std::complex<double>(0.6, 0.8)) < 1e-12);
  CHECK(std::abs(act.w.col(0).norm() - 1.0) < 1e-12);

  // A saturated sigmoid must wrap to phase 0, not 2*pi.
  CHECK(act.profile.theta_t[1](2) >= 0.0);
  CHECK(act.profile.theta_t[1](2) < 1e-9);
  CHECK(act.profile.delta_r[1](2) ==
        doctest::Approx(316.0 * sigmoid(1.0)).epsilon(1e-12));
}

TEST_CASE("unit-amplification pinning overrides the raw logits") {
  Topology topo = desk_topology();
  MdpSpaces sp = MdpSpaces::of(topo);
  ProjectionOptions opt;
  opt.p_max = 10.0;
  opt.delta_max = 316.0;
  opt.pin_unit_delta = true;
  Eigen::VectorXd raw = Eigen::VectorXd::Random(sp.action_dim) * 5.0;
  FeasibleAction act = project_action(raw, topo, opt);
  for (int n = 0; n < 2; ++n) {
    CHECK((act.profile.delta_r[n] - 1.0).abs().maxCoeff() == 0.0);
    CHECK((act.profile.delta_t[n] - 1.0).abs().maxCoeff() == 0.0);
  }
}

TEST_CASE("per-user rate penalty branches") {
  CHECK(qos_penalty(2.0, 1.0, 5.0) == 0.0);
  CHECK(qos_penalty(1.0, 1.0, 5.0) == 0.0);       // floor met exactly
  CHECK(qos_penalty(0.5, 1.0, 5.0) == -0.5);      // short but alive
  CHECK(qos_penalty(0.0, 1.0, 2.0) == -2.0);      // dead link
  CHECK(qos_penalty(1e-13, 1.0, 2.0) == -2.0);    // numerically dead
  CHECK(qos_penalty(1e-6, 1.0, 2.0) == -1e-6);    // tiny but alive
}

TEST_CASE("shaped reward combines sum rate and penalties") {
  RateReport rep;
  RewardCoeffs co;  // c1 = c2 = c3 = 1

  SUBCASE("mixed shortfall") {
    rep.rate = Eigen::Vector2d(2.0, 0.5);
    CHECK(shaped_reward(rep, co, 1.0) == doctest::Approx(2.0));
  }
  SUBCASE("all floors met: pure sum rate") {
    rep.rate = Eigen::Vector3d(1.5, 2.5, 3.0);
    CHECK(shaped_reward(rep, co, 1.0) == doctest::Approx(7.0));
  }
  SUBCASE("all links dead") {
    rep.rate = Eigen::VectorXd::Zero(3);
    co.c2 = 2.0;
    co.c3 = 1.5;
    CHECK(shaped_reward(rep, co, 1.0) == doctest::Approx(-9.0));
  }
  SUBCASE("coefficients scale their parts") {
    rep.rate = Eigen::Vector2d(2.0, 0.5);
    co.c1 = 3.0;
    co.c2 = 10.0;
    CHECK(shaped_reward(rep, co, 1.0) == doctest::Approx(3.0 * 2.5 - 5.0));
  }
}

TEST_CASE("immediate reward is gated by feasibility") {
  CHECK(immediate_reward(5.25, true) == 5.25);
  CHECK(immediate_reward(5.25, false) == 0.0);
  CHECK(immediate_reward(-4.0, true) == -4.0);
  CHECK(immediate_reward(-4.0, false) == 0.0);
}

TEST_CASE("every projected action satisfies the hard constraint gate") {
  Topology topo = desk_topology();
  MdpSpaces sp = MdpSpaces::of(topo);
  ProjectionOptions opt;
  opt.p_max = 10.0;
  opt.delta_max = 316.22776601683796;
  std::mt19937_64 rng(404u);
  std::normal_distribution<double> noise(0.0, 3.0);
  ChannelSet ch = sample_channels(topo, 11u);

  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::VectorXd raw(sp.action_dim);
    for (int i = 0; i < raw.size(); ++i) raw(i) = noise(rng);
    FeasibleAction act = project_action(raw, topo, opt);
    RateReport rep = rate_report(ch, topo, act, 1e-13, 1.0);
    ConstraintReport con =
        check_constraints(act, rep, opt.p_max, 1.0, opt.delta_max);
    for (int i : {1, 3, 4, 5, 6, 7, 8, 9}) {
      if (!con.c[i].pass) {
        CAPTURE(trial);
        CAPTURE(i);
        CHECK(con.c[i].pass);
      }
    }
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("inter-surface channels can be switched off at sampling") {
  Topology topo = desk_topology();
  ChannelSet full = sample_env_channels(topo, 5u, false);
  ChannelSet cut = sample_env_channels(topo, 5u, true);
  REQUIRE(full.G.size() == 1);
  CHECK(full.G[0].cwiseAbs().maxCoeff() > 0.0);
  CHECK(cut.G[0].cwiseAbs().maxCoeff() == 0.0);
  // Direct links are untouched by the switch.
  for (size_t n = 0; n < full.F.size(); ++n)
    CHECK((full.F[n] - cut.F[n]).cwiseAbs().maxCoeff() == 0.0);
  for (size_t k = 0; k < full.f.size(); ++k)
    CHECK((full.f[k] - cut.f[k]).cwiseAbs().maxCoeff() == 0.0);
}

namespace {

EnvOptions desk_env_options() {
  EnvOptions opt;
  opt.p_max = 10.0;
  opt.delta_max = 316.22776601683796;
  opt.r_min = 1.0;
  opt.noise_power = 1e-13;
  opt.t_max = 5;
  return opt;
}

}  // namespace

TEST_CASE("environment episode mechanics") {
  Topology topo = desk_topology();
  Environment env(topo, desk_env_options(), 123u);
  Eigen::VectorXd s0 = env.reset();
  REQUIRE(s0.size() == 97);
  CHECK(s0(0) == 0.0);  // no previous reward after a reset
  CHECK(env.step_index() == 0);

  Eigen::VectorXd raw = Eigen::VectorXd::Zero(env.spaces().action_dim);
  for (int t = 1; t <= 5; ++t) {
    StepOutcome out = env.step(raw);
    CHECK(out.tr.terminal == (t == 5));
    CHECK(env.step_index() == t);
    CHECK(out.tr.state.size() == 97);
    CHECK(out.tr.next_state.size() == 97);
    // The carried scalar is the shaped reward, ungated.
    CHECK(out.tr.next_state(0) == out.shaped);
  }
  // A new episode starts clean.
  Eigen::VectorXd s1 = env.reset();
  CHECK(env.step_index() == 0);
  CHECK(s1(0) == 0.0);
  CHECK((s0 - s1).cwiseAbs().maxCoeff() > 0.0);  // fresh channels
}

TEST_CASE("environment reward matches an outside recomputation") {
  Topology topo = desk_topology();
  EnvOptions opt = desk_env_options();
  Environment env(topo, opt, 321u);
  env.reset();
  std::mt19937_64 rng(9u);
  std::normal_distribution<double> noise(0.0, 1.0);

  for (int t = 0; t < 5; ++t) {
    Eigen::VectorXd raw(env.spaces().action_dim);
    for (int i = 0; i < raw.size(); ++i) raw(i) = noise(rng);

    ChannelSet before = env.channels();  // copy pre-step realization
    StepOutcome out = env.step(raw);

    ProjectionOptions popt;
    popt.p_max = opt.p_max;
    popt.delta_max = opt.delta_max;
    popt.pin_unit_delta = opt.pin_unit_delta;
    FeasibleAction act = project_action(raw, topo, popt);
    RateReport rep = rate_report(before, topo, act, opt.noise_power,
                                 opt.r_min, opt.numerator);
    ConstraintReport con =
        check_constraints(act, rep, opt.p_max, opt.r_min, opt.delta_max);
    double sh = shaped_reward(rep, opt.coeffs, opt.r_min);

    CHECK(out.shaped == sh);
    CHECK(out.feasible == con.feasible());
    CHECK(out.tr.reward == immediate_reward(sh, con.feasible()));
    CHECK(out.report.total == rep.total);
    CHECK((out.report.rate - rep.rate).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("environment trajectories are seed-deterministic") {
  Topology topo = desk_topology();
  EnvOptions opt = desk_env_options();
  Environment a(topo, opt, 77u);
  Environment b(topo, opt, 77u);
  Environment c(topo, opt, 78u);
  Eigen::VectorXd sa = a.reset(), sb = b.reset(), sc = c.reset();
  CHECK((sa - sb).cwiseAbs().maxCoeff() == 0.0);
  CHECK((sa - sc).cwiseAbs().maxCoeff() > 0.0);

  std::mt19937_64 rng(5u);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int t = 0; t < 5; ++t) {
    Eigen::VectorXd raw(a.spaces().action_dim);
    for (int i = 0; i < raw.size(); ++i) raw(i) = noise(rng);
    StepOutcome oa = a.step(raw);
    StepOutcome ob = b.step(raw);
    CHECK(oa.tr.reward == ob.tr.reward);
    CHECK((oa.tr.next_state - ob.tr.next_state).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("channels are redrawn after each step by default") {
  Topology topo = desk_topology();
  EnvOptions opt = desk_env_options();
  Environment env(topo, opt, 55u);
  env.reset();
  Eigen::MatrixXcd f0 = env.channels().F[0];
  env.step(Eigen::VectorXd::Zero(env.spaces().action_dim));
  CHECK((env.channels().F[0] - f0).cwiseAbs().maxCoeff() > 0.0);

  opt.resample_each_step = false;
  Environment frozen(topo, opt, 55u);
  frozen.reset();
  Eigen::MatrixXcd g0 = frozen.channels().F[0];
  frozen.step(Eigen::VectorXd::Zero(frozen.spaces().action_dim));
  CHECK((frozen.channels().F[0] - g0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("environment honors the scenario switches") {
  Topology topo = desk_topology();

  SUBCASE("second-order propagation off zeroes the coupling draw") {
    EnvOptions opt = desk_env_options();
    opt.zero_inter_ris = true;
    Environment env(topo, opt, 31u);
    env.reset();
    CHECK(env.channels().G[0].cwiseAbs().maxCoeff() == 0.0);
    env.step(Eigen::VectorXd::Zero(env.spaces().action_dim));
    CHECK(env.channels().G[0].cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("passive pinning makes rewards ignore amplification logits") {
    EnvOptions opt = desk_env_options();
    opt.pin_unit_delta = true;
    Environment a(topo, opt, 13u);
    Environment b(topo, opt, 13u);
    a.reset();
    b.reset();
    MdpSpaces sp = a.spaces();
    Eigen::VectorXd raw_a = Eigen::VectorXd::Zero(sp.action_dim);
    Eigen::VectorXd raw_b = raw_a;
    // Perturb only the two amplification blocks of each surface.
    const int m = 4;
    for (int n = 0; n < 2; ++n) {
      int base = sp.profile_off + n * 5 * m;
      for (int j = 0; j < m; ++j) {
        raw_b(base + 3 * m + j) = 4.0;
        raw_b(base + 4 * m + j) = -4.0;
      }
    }
    StepOutcome oa = a.step(raw_a);
    StepOutcome ob = b.step(raw_b);
    CHECK(oa.tr.reward == ob.tr.reward);
    CHECK(oa.shaped == ob.shaped);
  }

  SUBCASE("an unreachable rate floor penalizes but stays feasible") {
    EnvOptions opt = desk_env_options();
    opt.r_min = 1e9;
    opt.coeffs.c3 = opt.r_min;
    Environment env(topo, opt, 17u);
    env.reset();
    StepOutcome out = env.step(Eigen::VectorXd::Zero(env.spaces().action_dim));
    CHECK_FALSE(out.constraints.c[0].pass);
    CHECK(out.feasible);                 // the floor sits outside the gate
    CHECK(out.shaped < 0.0);             // penalties dominate
    CHECK(out.tr.reward == out.shaped);  // still paid, because feasible
  }
}
