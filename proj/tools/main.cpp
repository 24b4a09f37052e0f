#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "starnoma/harness.hpp"
#include "starnoma/mdp.hpp"

namespace {

using namespace starnoma;

struct CommonArgs {
  std::string config_path;
  std::string scenario;
  std::string seeds;
  std::string out;
  bool desk = false;
  bool paper = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "key=value config file");
  cmd->add_option("--scenario", args.scenario,
                  "comma-separated scenario tokens (meta|ddpg, active|passive, "
                  "second_order|single_reflection, multi_ris|single_ris)");
  cmd->add_option("--seeds", args.seeds, "comma-separated seed list");
  cmd->add_option("--out", args.out, "output path");
  auto* desk = cmd->add_flag("--desk", args.desk, "desk-scale profile (default)");
  cmd->add_flag("--paper", args.paper, "full-scale profile")->excludes(desk);
}

KvConfig load_kv(const CommonArgs& args) {
  KvConfig kv;
  if (!args.config_path.empty()) kv = KvConfig::parse_file(args.config_path);
  // Command-line values override file values.
  if (!args.scenario.empty()) kv.set("scenario", args.scenario);
  if (!args.seeds.empty()) kv.set("seeds", args.seeds);
  return kv;
}

ExperimentConfig build_config(const CommonArgs& args) {
  ExperimentConfig base =
      args.paper ? ExperimentConfig::paper() : ExperimentConfig::desk();
  return ExperimentConfig::from_config(load_kv(args), base);
}

void print_log_brief(const MetricsLog& log) {
  std::printf("seeds=%zu episodes=%d records=%zu\n", log.seeds.size(),
              log.episodes, log.records.size());
  std::printf("tail_mean_reward=%s\n",
              format_double(log.tail_mean(Metric::reward)).c_str());
  std::printf("tail_mean_total_rate=%s\n",
              format_double(log.tail_mean(Metric::total_rate)).c_str());
  std::printf("tail_mean_min_rate=%s\n",
              format_double(log.tail_mean(Metric::min_rate)).c_str());
}

int cmd_train(const CommonArgs& args) {
  ExperimentConfig cfg = build_config(args);
  MetricsLog log = run_experiment(cfg);
  if (!args.out.empty()) {
    export_csv_file(args.out, log);
    std::printf("wrote %s\n", args.out.c_str());
  }
  print_log_brief(log);
  return 0;
}

int cmd_sweep(const CommonArgs& args) {
  KvConfig kv = load_kv(args);
  if (!kv.has("sweep_variable") || !kv.has("sweep_values"))
    throw std::invalid_argument(
        "sweep needs config keys sweep_variable and sweep_values");
  SweepVariable var = parse_sweep_variable(kv.get_str("sweep_variable"));
  std::vector<double> values = kv.get_double_list("sweep_values");
  ExperimentConfig cfg = build_config(args);
  std::vector<MetricsLog> logs = sweep(cfg, var, values);
  for (std::size_t i = 0; i < logs.size(); ++i) {
    std::printf("[%s = %s]\n", kv.get_str("sweep_variable").c_str(),
                format_double(values[i]).c_str());
    print_log_brief(logs[i]);
    if (!args.out.empty()) {
      std::string path = args.out + "_" + format_double(values[i]) + ".csv";
      export_csv_file(path, logs[i]);
      std::printf("wrote %s\n", path.c_str());
    }
  }
  return 0;
}

int cmd_compare(const std::string& path_a, const std::string& path_b,
                const std::string& metric) {
  MetricsLog a = import_csv_file(path_a);
  MetricsLog b = import_csv_file(path_b);
  CompareStats st = compare(a, b, parse_metric(metric));
  std::printf("metric=%s\n", metric.c_str());
  std::printf("mean_a=%s mean_b=%s\n", format_double(st.mean_a).c_str(),
              format_double(st.mean_b).c_str());
  std::printf("relative_gain=%s\n", format_double(st.relative_gain).c_str());
  std::printf("positive_seeds=%d/%zu\n", st.positive, st.per_seed_diff.size());
  for (std::size_t i = 0; i < st.per_seed_diff.size(); ++i)
    std::printf("seed[%llu] diff=%s\n",
                static_cast<unsigned long long>(a.seeds[i]),
                format_double(st.per_seed_diff[i]).c_str());
  return 0;
}

int cmd_flops(const CommonArgs& args) {
  ExperimentConfig cfg = build_config(args);
  Topology topo = cfg.build_topology();
  MdpSpaces sp = MdpSpaces::of(topo);
  std::vector<int> actor{sp.state_dim};
  std::vector<int> critic{sp.state_dim + sp.action_dim};
  for (int h : cfg.agent.hidden) {
    actor.push_back(h);
    critic.push_back(h);
  }
  actor.push_back(sp.action_dim);
  critic.push_back(1);
  // The meta machinery re-evaluates the critic stack, so its layer sizes
  // stand in for the meta-critic architecture.
  ComplexityReport rep = complexity_report(actor, critic, critic, 1.0);
  std::printf("state_dim=%d action_dim=%d\n", sp.state_dim, sp.action_dim);
  std::printf("actor_ops=%s critic_ops=%s meta_ops=%s\n",
              format_double(rep.actor_ops).c_str(),
              format_double(rep.critic_ops).c_str(),
              format_double(rep.meta_ops).c_str());
  std::printf("with_meta=%s without_meta=%s\n",
              format_double(rep.with_meta).c_str(),
              format_double(rep.without_meta).c_str());
  std::printf("overhead_ratio=%s\n",
              format_double(rep.overhead_ratio).c_str());
  return 0;
}

int cmd_export(const std::string& in_path, const std::string& out_path) {
  MetricsLog log = import_csv_file(in_path);
  export_csv_file(out_path, log);
  std::printf("wrote %s\n", out_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uplink multi-surface NOMA simulator and RL trainer"};
  app.require_subcommand(1);

  CommonArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train", "train one scenario");
  add_common(train_cmd, train_args);

  CommonArgs sweep_args;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "run a config sweep (sweep_variable key)");
  add_common(sweep_cmd, sweep_args);

  std::string cmp_a, cmp_b, cmp_metric = "reward";
  CLI::App* compare_cmd =
      app.add_subcommand("compare", "compare two metrics CSV files");
  compare_cmd->add_option("log_a", cmp_a, "first CSV")->required();
  compare_cmd->add_option("log_b", cmp_b, "second (baseline) CSV")->required();
  compare_cmd->add_option("--metric", cmp_metric,
                          "reward | total_rate | min_rate");

  CommonArgs flops_args;
  CLI::App* flops_cmd =
      app.add_subcommand("flops", "print the complexity report");
  add_common(flops_cmd, flops_args);

  std::string exp_in;
  CommonArgs export_args;
  CLI::App* export_cmd =
      app.add_subcommand("export", "normalize a metrics CSV file");
  export_cmd->add_option("input", exp_in, "CSV to read")->required();
  export_cmd->add_option("--out", export_args.out, "CSV to write")->required();

  try {
    app.parse(argc, argv);
    if (train_cmd->parsed()) return cmd_train(train_args);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_args);
    if (compare_cmd->parsed()) return cmd_compare(cmp_a, cmp_b, cmp_metric);
    if (flops_cmd->parsed()) return cmd_flops(flops_args);
    if (export_cmd->parsed()) return cmd_export(exp_in, export_args.out);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
