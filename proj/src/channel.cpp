#include "starnoma/channel.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "starnoma/rng.hpp"

namespace starnoma {

double path_loss(double distance_m, double exponent, double ref_loss_db) {
  if (!(distance_m > 0.0))
    throw std::invalid_argument("path_loss: distance must be positive");
  return std::pow(10.0, -ref_loss_db / 10.0) * std::pow(distance_m, -exponent);
}

int Topology::total_elements() const {
  int m = 0;
  for (int e : elements) m += e;
  return m;
}

double Topology::dist_ris_bs(int n) const { return (ris.at(n) - bs).norm(); }

double Topology::dist_user_ris(int k) const {
  return (user.at(k) - ris.at(serving_ris.at(k))).norm();
}

double Topology::dist_ris_ris(int n, int np) const {
  return (ris.at(n) - ris.at(np)).norm();
}

std::vector<std::vector<int>> Topology::users_by_ris() const {
  std::vector<std::vector<int>> groups(ris.size());
  for (int k = 0; k < num_users(); ++k) groups[serving_ris[k]].push_back(k);
  return groups;
}

void Topology::validate() const {
  const int n = num_ris();
  const int k = num_users();
  if (n < 1) throw std::invalid_argument("topology: need at least one surface");
  if (k < 1) throw std::invalid_argument("topology: need at least one user");
  if (static_cast<int>(elements.size()) != n)
    throw std::invalid_argument("topology: elements size mismatch");
  if (static_cast<int>(side.size()) != k ||
      static_cast<int>(serving_ris.size()) != k)
    throw std::invalid_argument("topology: per-user array size mismatch");
  if (bs_antennas < 1)
    throw std::invalid_argument("topology: bs_antennas must be >= 1");
  for (int e : elements)
    if (e < 1) throw std::invalid_argument("topology: element count must be >= 1");
  for (int c : serving_ris)
    if (c < 0 || c >= n)
      throw std::invalid_argument("topology: candidate surface id out of range");
  // Index 0 farthest from the BS, strictly decreasing after that.
  for (int i = 0; i + 1 < n; ++i)
    if (!(dist_ris_bs(i) > dist_ris_bs(i + 1)))
      throw std::invalid_argument(
          "topology: BS distances must strictly decrease with surface index");
  for (int i = 0; i < k; ++i)
    if (!(dist_user_ris(i) > 0.0))
      throw std::invalid_argument("topology: user on top of its surface");
}

int ChannelSet::pair_index(int n, int np, int N) {
  if (n < 0 || np <= n || np >= N)
    throw std::out_of_range("ChannelSet: bad surface pair");
  // Lexicographic position of (n, np) among all pairs with n < np.
  return n * N - n * (n + 1) / 2 + (np - n - 1);
}

const Eigen::MatrixXcd& ChannelSet::inter(int n, int np) const {
  return G.at(pair_index(n, np, num_ris));
}

Eigen::MatrixXcd& ChannelSet::inter(int n, int np) {
  return G.at(pair_index(n, np, num_ris));
}

void ChannelSet::validate(const Topology& topo) const {
  const int n = topo.num_ris();
  if (num_ris != n || static_cast<int>(F.size()) != n)
    throw std::invalid_argument("channels: surface count mismatch");
  for (int i = 0; i < n; ++i)
    if (F[i].rows() != topo.elements[i] || F[i].cols() != topo.bs_antennas)
      throw std::invalid_argument("channels: F shape mismatch");
  if (static_cast<int>(f.size()) != topo.num_users())
    throw std::invalid_argument("channels: user vector count mismatch");
  for (int k = 0; k < topo.num_users(); ++k)
    if (f[k].size() != topo.elements[topo.serving_ris[k]])
      throw std::invalid_argument("channels: f shape mismatch");
  if (static_cast<int>(G.size()) != n * (n - 1) / 2)
    throw std::invalid_argument("channels: pair matrix count mismatch");
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (inter(a, b).rows() != topo.elements[a] ||
          inter(a, b).cols() != topo.elements[b])
        throw std::invalid_argument("channels: inter-surface shape mismatch");
}

namespace {

// Fills row-major, real part then imaginary part for each entry.
void fill_rayleigh(Eigen::MatrixXcd& m, double pl, std::mt19937_64& rng,
                   std::normal_distribution<double>& gauss) {
  const double amp = std::sqrt(pl / 2.0);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      double re = gauss(rng);
      double im = gauss(rng);
      m(r, c) = std::complex<double>(amp * re, amp * im);
    }
}

}  // namespace

ChannelSet sample_channels(const Topology& topo, std::uint64_t seed) {
  topo.validate();
  std::mt19937_64 rng = make_engine(seed, streams::env);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const int n = topo.num_ris();
  const int k = topo.num_users();
  ChannelSet ch;
  ch.num_ris = n;
  ch.F.resize(n);
  for (int i = 0; i < n; ++i) {
    ch.F[i].resize(topo.elements[i], topo.bs_antennas);
    fill_rayleigh(ch.F[i], path_loss(topo.dist_ris_bs(i), topo.pl_bs.exponent,
                                     topo.pl_bs.ref_loss_db),
                  rng, gauss);
  }
  ch.f.resize(k);
  for (int i = 0; i < k; ++i) {
    Eigen::MatrixXcd col(topo.elements[topo.serving_ris[i]], 1);
    fill_rayleigh(col, path_loss(topo.dist_user_ris(i), topo.pl_user.exponent,
                                 topo.pl_user.ref_loss_db),
                  rng, gauss);
    ch.f[i] = col.col(0);
  }
  ch.G.resize(n * (n - 1) / 2);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      Eigen::MatrixXcd& g = ch.inter(a, b);
      g.resize(topo.elements[a], topo.elements[b]);
      fill_rayleigh(g, path_loss(topo.dist_ris_ris(a, b), topo.pl_ris.exponent,
                                 topo.pl_ris.ref_loss_db),
                    rng, gauss);
    }
  return ch;
}

Topology make_line_topology(const LineLayout& layout) {
  if (layout.n_ris < 1 || layout.n_users < 1 || layout.elements_per_ris < 1 ||
      layout.bs_antennas < 1)
    throw std::invalid_argument("line layout: counts must be positive");
  if (!(layout.ris_near_m > 0.0) || !(layout.ris_spacing_m > 0.0))
    throw std::invalid_argument("line layout: distances must be positive");

  Topology topo;
  topo.bs = Eigen::Vector2d::Zero();
  topo.bs_antennas = layout.bs_antennas;
  topo.pl_user = layout.pl_user;
  topo.pl_bs = layout.pl_bs;
  topo.pl_ris = layout.pl_ris;

  const int n = layout.n_ris;
  topo.ris.resize(n);
  topo.elements.assign(n, layout.elements_per_ris);
  for (int i = 0; i < n; ++i) {
    double x = layout.ris_near_m + layout.ris_spacing_m * (n - 1 - i);
    topo.ris[i] = Eigen::Vector2d(x, 0.0);
  }

  // Users round-robin over surfaces; within a surface alternate faces and
  // fan out in radius and angle. Reflection face points back toward the BS.
  const int k = layout.n_users;
  topo.user.resize(k);
  topo.side.resize(k);
  topo.serving_ris.resize(k);
  std::vector<int> count(n, 0);
  for (int i = 0; i < k; ++i) {
    int srv = i % n;
    int j = count[srv]++;
    topo.serving_ris[i] = srv;
    topo.side[i] = (j % 2 == 0) ? Side::reflection : Side::transmission;
    int per = (k + n - 1) / n;  // max users this surface can get
    double frac = per > 1 ? static_cast<double>(j) / (per - 1) : 0.5;
    double radius =
        layout.user_near_m + frac * (layout.user_far_m - layout.user_near_m);
    double angle = (j - 0.5 * (per - 1)) * (M_PI / 12.0);
    Eigen::Vector2d toward_bs = (topo.bs - topo.ris[srv]).normalized();
    Eigen::Rotation2Dd rot(angle);
    Eigen::Vector2d dir = rot * toward_bs;
    if (topo.side[i] == Side::transmission) dir = -dir;
    topo.user[i] = topo.ris[srv] + radius * dir;
  }
  topo.validate();
  return topo;
}

}  // namespace starnoma
