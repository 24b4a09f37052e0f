#include "starnoma/starris.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace starnoma {

namespace {
constexpr double kTwoPi = 2.0 * M_PI;

// Float guard on constraint comparisons, scaled by the bound magnitude.
double tol(double bound) { return 1e-9 * std::max(1.0, std::abs(bound)); }
}  // namespace

StarRisProfile StarRisProfile::neutral(const std::vector<int>& elements) {
  StarRisProfile p;
  const int n = static_cast<int>(elements.size());
  p.alpha_r.resize(n);
  p.alpha_t.resize(n);
  p.theta_r.resize(n);
  p.theta_t.resize(n);
  p.delta_r.resize(n);
  p.delta_t.resize(n);
  for (int i = 0; i < n; ++i) {
    if (elements[i] < 1)
      throw std::invalid_argument("profile: element count must be >= 1");
    p.alpha_r[i] = Eigen::ArrayXd::Constant(elements[i], 0.5);
    p.alpha_t[i] = Eigen::ArrayXd::Constant(elements[i], 0.5);
    p.theta_r[i] = Eigen::ArrayXd::Zero(elements[i]);
    p.theta_t[i] = Eigen::ArrayXd::Zero(elements[i]);
    p.delta_r[i] = Eigen::ArrayXd::Ones(elements[i]);
    p.delta_t[i] = Eigen::ArrayXd::Ones(elements[i]);
  }
  return p;
}

void StarRisProfile::validate(double delta_max) const {
  const int n = num_ris();
  auto same = [&](const std::vector<Eigen::ArrayXd>& a) {
    if (static_cast<int>(a.size()) != n) return false;
    for (int i = 0; i < n; ++i)
      if (a[i].size() != alpha_r[i].size()) return false;
    return true;
  };
  if (!same(alpha_t) || !same(theta_r) || !same(theta_t) || !same(delta_r) ||
      !same(delta_t))
    throw std::invalid_argument("profile: array shape mismatch");
  for (int i = 0; i < n; ++i) {
    if ((alpha_r[i] < -tol(1.0)).any() || (alpha_r[i] > 1.0 + tol(1.0)).any() ||
        (alpha_t[i] < -tol(1.0)).any() || (alpha_t[i] > 1.0 + tol(1.0)).any())
      throw std::invalid_argument("profile: energy split out of [0, 1]");
    if (((alpha_r[i] + alpha_t[i] - 1.0).abs() > tol(1.0)).any())
      throw std::invalid_argument("profile: energy split does not sum to 1");
    if ((theta_r[i] < 0.0).any() || (theta_r[i] >= kTwoPi).any() ||
        (theta_t[i] < 0.0).any() || (theta_t[i] >= kTwoPi).any())
      throw std::invalid_argument("profile: phase out of [0, 2*pi)");
    if ((delta_r[i] < -tol(delta_max)).any() ||
        (delta_r[i] > delta_max + tol(delta_max)).any() ||
        (delta_t[i] < -tol(delta_max)).any() ||
        (delta_t[i] > delta_max + tol(delta_max)).any())
      throw std::invalid_argument("profile: amplification out of range");
  }
}

Eigen::VectorXcd element_coeffs(const StarRisProfile& prof, int ris,
                                Side side) {
  const Eigen::ArrayXd& alpha =
      side == Side::reflection ? prof.alpha_r.at(ris) : prof.alpha_t.at(ris);
  const Eigen::ArrayXd& theta =
      side == Side::reflection ? prof.theta_r.at(ris) : prof.theta_t.at(ris);
  const Eigen::ArrayXd& delta =
      side == Side::reflection ? prof.delta_r.at(ris) : prof.delta_t.at(ris);
  Eigen::ArrayXd mag = (delta * alpha).sqrt();
  Eigen::VectorXcd v(alpha.size());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v(i) = std::polar(mag(i), theta(i));
  return v;
}

Eigen::MatrixXcd beamforming_matrix(const StarRisProfile& prof, int ris,
                                    Side side) {
  return element_coeffs(prof, ris, side).asDiagonal();
}

Eigen::VectorXcd effective_channel(const ChannelSet& ch,
                                   const StarRisProfile& prof,
                                   const Topology& topo, int user) {
  const int n = topo.serving_ris.at(user);
  const Side s = topo.side.at(user);
  // Signal leaving the candidate surface's elements.
  Eigen::VectorXcd at_n =
      element_coeffs(prof, n, s).cwiseProduct(ch.f.at(user));
  Eigen::VectorXcd h = ch.F.at(n).adjoint() * at_n;
  // Second bounce off every nearer surface.
  for (int np = n + 1; np < topo.num_ris(); ++np) {
    Eigen::VectorXcd at_np = element_coeffs(prof, np, s)
                                 .cwiseProduct(ch.inter(n, np).transpose() * at_n);
    h += ch.F.at(np).adjoint() * at_np;
  }
  return h;
}

std::vector<int> decoding_order(const std::vector<double>& gains) {
  std::vector<int> order(gains.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return gains[a] < gains[b]; });
  return order;
}

RateReport rate_report(const ChannelSet& ch, const Topology& topo,
                       const FeasibleAction& act, double noise_power,
                       double r_min, NumeratorMode mode) {
  const int k = topo.num_users();
  RateReport rep;
  rep.gain.resize(k);
  rep.sinr.resize(k);
  rep.rate.resize(k);
  rep.qos_slack.resize(k);

  std::vector<Eigen::VectorXcd> h(k);
  for (int u = 0; u < k; ++u) h[u] = effective_channel(ch, act.profile, topo, u);

  // cross(u, v) = |w_u^H h_v|^2: receive filter of u applied to v's signal.
  Eigen::MatrixXd cross(k, k);
  for (int u = 0; u < k; ++u)
    for (int v = 0; v < k; ++v)
      cross(u, v) = std::norm(act.w.col(u).dot(h[v]));
  for (int u = 0; u < k; ++u) rep.gain(u) = cross(u, u);

  std::vector<double> gains(rep.gain.data(), rep.gain.data() + k);
  rep.order = decoding_order(gains);
  std::vector<int> pos(k);
  for (int p = 0; p < k; ++p) pos[rep.order[p]] = p;

  rep.total = 0.0;
  for (int u = 0; u < k; ++u) {
    double served = act.power(u) * cross(u, u);
    if (mode == NumeratorMode::selected) {
      // Association must point at the candidate surface; the strongest beta
      // entry decides (first index wins ties).
      Eigen::Index star = 0;
      act.beta.row(u).maxCoeff(&star);
      if (static_cast<int>(star) != topo.serving_ris[u]) served = 0.0;
    }
    double interf = 0.0;
    for (int v = 0; v < k; ++v) {
      if (v == u) continue;
      bool same_surface = topo.serving_ris[v] == topo.serving_ris[u];
      bool earlier_same = same_surface && pos[v] < pos[u];
      bool farther = topo.serving_ris[v] < topo.serving_ris[u];
      if (earlier_same || farther) interf += act.power(v) * cross(u, v);
    }
    double noise = noise_power * act.w.col(u).squaredNorm();
    rep.sinr(u) = served / (interf + noise);
    rep.rate(u) = std::log2(1.0 + rep.sinr(u));
    rep.qos_slack(u) = rep.rate(u) - r_min;
    rep.total += rep.rate(u);
  }
  return rep;
}

bool ConstraintReport::all_pass() const {
  for (const Entry& e : c)
    if (!e.pass) return false;
  return true;
}

bool ConstraintReport::feasible() const {
  for (int i : {1, 3, 4, 5, 6, 7, 8, 9})
    if (!c[i].pass) return false;
  return true;
}

ConstraintReport check_constraints(const FeasibleAction& act,
                                   const RateReport& report, double p_max,
                                   double r_min, double delta_max) {
  ConstraintReport rep;
  auto set = [](ConstraintReport::Entry& e, double violation, double bound) {
    e.violation = std::max(0.0, violation);
    e.pass = violation <= tol(bound);
  };

  // Rate floor.
  double worst_qos = 0.0;
  for (Eigen::Index i = 0; i < report.rate.size(); ++i)
    worst_qos = std::max(worst_qos, r_min - report.rate(i));
  set(rep.c[0], worst_qos, r_min);

  // Power budget and nonnegativity.
  set(rep.c[1], act.power.sum() - p_max, p_max);
  set(rep.c[5], -act.power.minCoeff(), 1.0);

  // Association: relaxed binary penalty, per-user mass, nonnegativity.
  double relax = (act.beta.array() - act.beta.array().square()).sum();
  set(rep.c[2], relax, 1.0);
  double mass = (act.beta.rowwise().sum().array() - 1.0).maxCoeff();
  set(rep.c[3], mass, 1.0);
  set(rep.c[4], -act.beta.minCoeff(), 1.0);

  // Element ranges.
  double amp = 0.0, split = 0.0, phase = 0.0, alpha = 0.0;
  bool phase_open_ok = true;
  const StarRisProfile& p = act.profile;
  for (int n = 0; n < p.num_ris(); ++n) {
    for (const Eigen::ArrayXd* d : {&p.delta_r[n], &p.delta_t[n]}) {
      amp = std::max(amp, d->maxCoeff() - delta_max);
      amp = std::max(amp, -d->minCoeff());
    }
    split = std::max(split, (p.alpha_r[n] + p.alpha_t[n] - 1.0).abs().maxCoeff());
    for (const Eigen::ArrayXd* t : {&p.theta_r[n], &p.theta_t[n]}) {
      phase = std::max(phase, -t->minCoeff());
      phase = std::max(phase, t->maxCoeff() - kTwoPi);
      if ((*t >= kTwoPi).any()) phase_open_ok = false;  // [0, 2*pi) half-open
    }
    for (const Eigen::ArrayXd* a :
         {&p.alpha_r[n], &p.alpha_t[n]}) {
      alpha = std::max(alpha, a->maxCoeff() - 1.0);
      alpha = std::max(alpha, -a->minCoeff());
    }
  }
  set(rep.c[6], amp, delta_max);
  set(rep.c[7], split, 1.0);
  set(rep.c[8], phase, 1.0);
  rep.c[8].pass = rep.c[8].pass && phase_open_ok;
  set(rep.c[9], alpha, 1.0);
  return rep;
}

}  // namespace starnoma
