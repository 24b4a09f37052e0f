#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "starnoma/agent.hpp"
#include "starnoma/config.hpp"

namespace starnoma {

// Scenario string: comma-separated tokens, one per axis, order free:
//   {meta | ddpg} {active | passive} {second_order | single_reflection}
//   {multi_ris | single_ris}
// Missing axes keep their defaults (meta, active, second_order, multi_ris).
struct ScenarioFlags {
  AgentKind agent = AgentKind::meta;
  bool active = true;
  bool second_order = true;
  bool multi_ris = true;

  static ScenarioFlags parse(const std::string& name);  // throws on bad token
  std::string to_string() const;
};

struct ExperimentConfig {
  // Topology.
  int n_ris = 4;
  int n_users = 16;
  int bs_antennas = 4;
  int elements_per_ris = 8;
  double ris_near_m = 20.0;
  double ris_spacing_m = 10.0;
  double user_near_m = 2.0;
  double user_far_m = 6.0;
  PathLossModel pl_user, pl_bs, pl_ris;

  // Physics.
  double p_max_w = 20.0;
  double r_min = 1.0;
  double noise_dbm_hz = -174.0;
  double bandwidth_hz = 1e7;
  double delta_max_db = 25.0;
  NumeratorMode numerator = NumeratorMode::selected;

  // Reward. c3 < 0 means "use r_min".
  double c1 = 1.0, c2 = 1.0, c3 = -1.0;

  // Training.
  int e_max = 5000;
  int t_max = 50;
  bool resample_each_step = true;
  AgentOptions agent;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  ScenarioFlags scenario;
  int workers = 0;  // 0 = hardware concurrency

  // Table I numbers; agent hidden layers [256, 256].
  static ExperimentConfig paper();
  // Scaled-down run: N = 2, M = 4, K = 4, N_bs = 2, 300 episodes of 50
  // steps, hidden layers [64, 64], surfaces 1.5 m apart.
  static ExperimentConfig desk();
  // Overrides applied on top of a base profile; unknown keys rejected.
  static ExperimentConfig from_config(const KvConfig& kv,
                                      const ExperimentConfig& base);

  void validate() const;
  double noise_power_w() const;   // dBm/Hz over the bandwidth, in watts
  double delta_max_linear() const;
  Topology build_topology() const;    // applies single_ris
  EnvOptions env_options() const;     // applies passive / single_reflection
  TrainOptions train_options() const;
  KvConfig echo() const;              // every effective knob, for summaries
};

enum class Metric { reward, total_rate, min_rate };
Metric parse_metric(const std::string& name);

struct EpisodeRecord {
  std::uint64_t seed = 0;
  int episode = 0;  // 1-based
  double reward = 0.0;
  double total_rate = 0.0;
  double min_rate = 0.0;
  int feasible_steps = 0;
};

// Seed-major, episode-ascending records plus the config echo. The invariant
// records.size() == seeds.size() * episodes is enforced on construction and
// import.
struct MetricsLog {
  std::vector<std::uint64_t> seeds;
  int episodes = 0;
  std::vector<EpisodeRecord> records;
  KvConfig summary;

  void validate() const;
  double value(const EpisodeRecord& r, Metric m) const;
  // Mean over the last ceil(episodes/10) episodes, one seed or all.
  double tail_mean(Metric m) const;
  double tail_mean(Metric m, std::uint64_t seed) const;
  int tail_window() const;
};

MetricsLog run_experiment(const ExperimentConfig& config);

struct CompareStats {
  double mean_a = 0.0, mean_b = 0.0;
  double relative_gain = 0.0;          // (mean_a - mean_b) / mean_b
  std::vector<double> per_seed_diff;   // paired tail differences
  int positive = 0;                    // count of per-seed diffs > 0
};

// Requires identical seed lists and episode counts.
CompareStats compare(const MetricsLog& a, const MetricsLog& b, Metric m);

enum class SweepVariable { p_max, elements, users };
SweepVariable parse_sweep_variable(const std::string& name);

// One run per value, strictly increasing values, shared seeds.
std::vector<MetricsLog> sweep(const ExperimentConfig& config,
                              SweepVariable variable,
                              const std::vector<double>& values);

struct ComplexityReport {
  // Per-pass operation counts from the layer-size formula.
  double actor_ops = 0.0, critic_ops = 0.0, meta_ops = 0.0;
  // Sums of consecutive layer-size products.
  double actor_terms = 0.0, critic_terms = 0.0, meta_terms = 0.0;
  double with_meta = 0.0;     // actor + critic + meta/2
  double without_meta = 0.0;  // actor + critic
  double overhead_ratio = 0.0;
};

ComplexityReport complexity_report(const std::vector<int>& actor_arch,
                                   const std::vector<int>& critic_arch,
                                   const std::vector<int>& meta_arch,
                                   double act_cost);

// CSV: one header line, records, then "# cfg k = v" summary lines and
// "# stat k = v" aggregate lines. Stats are recomputed on export, so
// import(export(log)) round-trips and re-export is byte-identical.
void export_csv(std::ostream& out, const MetricsLog& log);
void export_csv_file(const std::string& path, const MetricsLog& log);
MetricsLog import_csv(std::istream& in);
MetricsLog import_csv_file(const std::string& path);

}  // namespace starnoma
