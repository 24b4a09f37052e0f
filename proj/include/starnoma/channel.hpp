#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace starnoma {

// Which face of a surface a user sits on.
enum class Side { reflection, transmission };

struct PathLossModel {
  double ref_loss_db = 30.0;  // loss at 1 m
  double exponent = 2.2;
};

// Linear power attenuation at distance d (meters):
//   10^(-ref_loss_db/10) * (d / 1 m)^(-exponent)
// Throws std::invalid_argument for d <= 0.
double path_loss(double distance_m, double exponent, double ref_loss_db);

// Uplink layout: one multi-antenna BS, N surfaces, K single-antenna users.
// Surfaces are indexed by descending BS distance: index 0 is the farthest,
// index N-1 the closest, and the ordering must be strict. Each user is
// associated with exactly one candidate surface and one of its faces.
struct Topology {
  Eigen::Vector2d bs = Eigen::Vector2d::Zero();
  std::vector<Eigen::Vector2d> ris;       // N positions
  std::vector<int> elements;              // M_n per surface
  int bs_antennas = 1;                    // N_bs
  std::vector<Eigen::Vector2d> user;      // K positions
  std::vector<Side> side;                 // K faces
  std::vector<int> serving_ris;           // K candidate surface ids
  PathLossModel pl_user;                  // user -> surface links
  PathLossModel pl_bs;                    // surface -> BS links
  PathLossModel pl_ris;                   // surface -> surface links

  int num_ris() const { return static_cast<int>(ris.size()); }
  int num_users() const { return static_cast<int>(user.size()); }
  int total_elements() const;

  double dist_ris_bs(int n) const;
  double dist_user_ris(int k) const;      // to the user's candidate surface
  double dist_ris_ris(int n, int np) const;

  // Users grouped by candidate surface, ids ascending within each group.
  std::vector<std::vector<int>> users_by_ris() const;

  // Throws std::invalid_argument on any violated invariant: empty/mismatched
  // arrays, non-positive counts, out-of-range candidate ids, or a BS-distance
  // ordering that is not strictly decreasing in the surface index.
  void validate() const;
};

// One fading realization. Entry (m,q) of F[n] is the element-m-to-antenna-q
// link of surface n (M_n x N_bs). f[k] is the user-k-to-candidate-surface
// vector (M_{serving} x 1). inter(n,np) for n < np is the surface-n-to-
// surface-np matrix (M_n x M_np), stored lexicographically by (n,np).
struct ChannelSet {
  std::vector<Eigen::MatrixXcd> F;
  std::vector<Eigen::VectorXcd> f;
  std::vector<Eigen::MatrixXcd> G;
  int num_ris = 0;

  static int pair_index(int n, int np, int N);
  const Eigen::MatrixXcd& inter(int n, int np) const;
  Eigen::MatrixXcd& inter(int n, int np);

  // Shape consistency against a topology; throws on mismatch.
  void validate(const Topology& topo) const;
};

// Independent Rayleigh draws: each entry is sqrt(pl) * (x + iy)/sqrt(2) with
// x, y standard normal, so E|entry|^2 equals the link path loss. Draw order
// is fixed and documented: F[0..N-1] row-major (re then im per entry), then
// f[0..K-1], then G pairs lexicographic row-major. The engine is seeded via
// derive_seed(seed, streams::env) so equal seeds give identical sets.
ChannelSet sample_channels(const Topology& topo, std::uint64_t seed);

// Parameters for the deterministic line layout used by the builders: the BS
// sits at the origin, surfaces on the +x axis at near + spacing*(N-1-n) so
// index 0 is farthest, and users of each surface alternate faces on circles
// around it (reflection face toward the BS, transmission face away), with
// radii stepped between user_near_m and user_far_m and a small angular fan.
struct LineLayout {
  int n_ris = 2;
  int elements_per_ris = 4;
  int bs_antennas = 2;
  int n_users = 4;
  double ris_near_m = 20.0;
  double ris_spacing_m = 1.5;
  double user_near_m = 2.0;
  double user_far_m = 6.0;
  PathLossModel pl_user, pl_bs, pl_ris;
};

Topology make_line_topology(const LineLayout& layout);

}  // namespace starnoma
