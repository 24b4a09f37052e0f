#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "starnoma/harness.hpp"

using namespace starnoma;

namespace {

// Two-seed synthetic log with a caller-chosen reward pattern.
MetricsLog synthetic_log(const std::vector<std::uint64_t>& seeds, int episodes,
                         double (*reward)(std::uint64_t, int)) {
  MetricsLog log;
  log.seeds = seeds;
  log.episodes = episodes;
  for (std::uint64_t s : seeds)
    for (int ep = 1; ep <= episodes; ++ep) {
      EpisodeRecord r;
      r.seed = s;
      r.episode = ep;
      r.reward = reward(s, ep);
      r.total_rate = 2.0 * r.reward;
      r.min_rate = 0.25 * r.reward;
      r.feasible_steps = ep;
      log.records.push_back(r);
    }
  log.summary.set("source", "synthetic");
  log.validate();
  return log;
}

// Small, fast experiment setup used by the end-to-end harness cases.
ExperimentConfig quick_config() {
  ExperimentConfig c = ExperimentConfig::desk();
  c.e_max = 3;
  c.t_max = 4;
  c.agent.hidden = {8};
  c.agent.batch_size = 8;
  c.agent.buffer_capacity = 64;
  c.seeds = {11, 22};
  c.workers = 2;
  return c;
}

}  // namespace

TEST_CASE("scenario names parse and round-trip") {
  ScenarioFlags def;
  CHECK(def.agent == AgentKind::meta);
  CHECK(def.active);
  CHECK(def.second_order);
  CHECK(def.multi_ris);

  ScenarioFlags all = ScenarioFlags::parse(
      "ddpg,passive,single_reflection,single_ris");
  CHECK(all.agent == AgentKind::ddpg);
  CHECK_FALSE(all.active);
  CHECK_FALSE(all.second_order);
  CHECK_FALSE(all.multi_ris);

  // Order-free, whitespace-tolerant, partial lists keep defaults.
  ScenarioFlags part = ScenarioFlags::parse(" passive , ddpg ");
  CHECK(part.agent == AgentKind::ddpg);
  CHECK_FALSE(part.active);
  CHECK(part.second_order);
  CHECK(part.multi_ris);

  CHECK(ScenarioFlags::parse(all.to_string()).to_string() == all.to_string());
  CHECK(ScenarioFlags::parse("").to_string() == def.to_string());
  CHECK_THROWS_AS(ScenarioFlags::parse("meta,warp_drive"),
                  std::invalid_argument);
}

TEST_CASE("built-in profiles") {
  ExperimentConfig paper = ExperimentConfig::paper();
  CHECK(paper.n_ris == 4);
  CHECK(paper.n_users == 16);
  CHECK(paper.bs_antennas == 4);
  CHECK(paper.elements_per_ris == 8);
  CHECK(paper.e_max == 5000);
  CHECK(paper.agent.hidden == std::vector<int>{256, 256});
  CHECK_NOTHROW(paper.validate());

  ExperimentConfig desk = ExperimentConfig::desk();
  CHECK(desk.n_ris == 2);
  CHECK(desk.n_users == 4);
  CHECK(desk.bs_antennas == 2);
  CHECK(desk.elements_per_ris == 4);
  CHECK(desk.e_max == 300);
  CHECK(desk.t_max == 50);
  CHECK(desk.agent.hidden == std::vector<int>{64, 64});
  CHECK(desk.ris_spacing_m == 1.5);
  CHECK_NOTHROW(desk.validate());
}

TEST_CASE("derived physical quantities") {
  ExperimentConfig c = ExperimentConfig::desk();
  // -174 dBm/Hz over 10 MHz: 10^((-174 - 30)/10) * 1e7 = 10^-13.4 W.
  CHECK(c.noise_power_w() ==
        doctest::Approx(3.9810717055349695e-14).epsilon(1e-12));
  // 25 dB amplification ceiling.
  CHECK(c.delta_max_linear() ==
        doctest::Approx(316.22776601683796).epsilon(1e-12));
}

TEST_CASE("config overrides from key-value text") {
  ExperimentConfig base = ExperimentConfig::desk();
  KvConfig kv = KvConfig::parse_string(
      "p_max_w = 5.5\n"
      "seeds = 7, 8, 9\n"
      "scenario = ddpg,single_ris\n"
      "hidden = 32, 16\n"
      "e_max = 12\n");
  ExperimentConfig c = ExperimentConfig::from_config(kv, base);
  CHECK(c.p_max_w == 5.5);
  CHECK(c.seeds == std::vector<std::uint64_t>{7, 8, 9});
  CHECK(c.scenario.agent == AgentKind::ddpg);
  CHECK_FALSE(c.scenario.multi_ris);
  CHECK(c.agent.hidden == std::vector<int>{32, 16});
  CHECK(c.e_max == 12);
  // Untouched keys keep the base profile.
  CHECK(c.n_users == base.n_users);

  KvConfig bad = KvConfig::parse_string("p_maxw = 5\n");
  CHECK_THROWS_AS(ExperimentConfig::from_config(bad, base),
                  std::invalid_argument);
}

TEST_CASE("config validation") {
  ExperimentConfig c = ExperimentConfig::desk();
  SUBCASE("duplicate seeds") {
    c.seeds = {3, 4, 3};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  }
  SUBCASE("empty seed list") {
    c.seeds.clear();
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  }
  SUBCASE("bad counts") {
    c.n_users = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  }
}

TEST_CASE("scenario switches shape the topology and environment") {
  ExperimentConfig c = ExperimentConfig::desk();

  Topology multi = c.build_topology();
  CHECK(multi.num_ris() == 2);
  CHECK(multi.num_users() == 4);

  c.scenario = ScenarioFlags::parse("single_ris");
  Topology single = c.build_topology();
  CHECK(single.num_ris() == 1);
  CHECK(single.num_users() == 4);
  for (int s : single.serving_ris) CHECK(s == 0);

  c.scenario = ScenarioFlags::parse("passive,single_reflection");
  EnvOptions env = c.env_options();
  CHECK(env.pin_unit_delta);
  CHECK(env.zero_inter_ris);
  CHECK(env.p_max == c.p_max_w);
  CHECK(env.delta_max == doctest::Approx(c.delta_max_linear()));
  CHECK(env.noise_power == doctest::Approx(c.noise_power_w()));
  CHECK(env.coeffs.c3 == c.c3);  // desk pins an explicit penalty depth
  CHECK(env.t_max == 50);

  c.c3 = -1.0;  // sentinel defers to the rate floor
  EnvOptions env_floor = c.env_options();
  CHECK(env_floor.coeffs.c3 == c.r_min);
  c.c3 = 5.0;

  c.scenario = ScenarioFlags::parse("ddpg");
  TrainOptions topt = c.train_options();
  CHECK(topt.agent.kind == AgentKind::ddpg);
  CHECK(topt.episodes == c.e_max);
  CHECK_FALSE(topt.env.pin_unit_delta);
  CHECK_FALSE(topt.env.zero_inter_ris);
}

TEST_CASE("tail statistics over the final tenth") {
  // 20 episodes -> window 2; rewards grow linearly per seed.
  MetricsLog log = synthetic_log({1, 2}, 20, [](std::uint64_t s, int ep) {
    return double(s) * 100.0 + ep;
  });
  CHECK(log.tail_window() == 2);
  // Seed 1 tail: episodes 19, 20 -> mean 119.5; seed 2 -> 219.5.
  CHECK(log.tail_mean(Metric::reward, 1) == doctest::Approx(119.5));
  CHECK(log.tail_mean(Metric::reward, 2) == doctest::Approx(219.5));
  CHECK(log.tail_mean(Metric::reward) == doctest::Approx(169.5));
  CHECK(log.tail_mean(Metric::total_rate, 1) == doctest::Approx(239.0));
  CHECK(log.tail_mean(Metric::min_rate, 1) == doctest::Approx(119.5 / 4.0));

  // Window rounds up: 7 episodes -> 1.
  MetricsLog odd = synthetic_log({1}, 7, [](std::uint64_t, int ep) {
    return double(ep);
  });
  CHECK(odd.tail_window() == 1);
  CHECK(odd.tail_mean(Metric::reward) == doctest::Approx(7.0));

  SUBCASE("shuffled records rejected") {
    std::swap(log.records[0], log.records[1]);
    CHECK_THROWS_AS(log.validate(), std::invalid_argument);
  }
  SUBCASE("count mismatch rejected") {
    log.records.pop_back();
    CHECK_THROWS_AS(log.validate(), std::invalid_argument);
  }
}

TEST_CASE("paired comparison statistics") {
  // Flat series make tail means exact: 1.19 vs 1.0 -> 19% gain.
  MetricsLog a = synthetic_log({1, 2, 3}, 10, [](std::uint64_t, int) {
    return 1.19;
  });
  MetricsLog b = synthetic_log({1, 2, 3}, 10, [](std::uint64_t, int) {
    return 1.0;
  });
  CompareStats st = compare(a, b, Metric::reward);
  CHECK(st.mean_a == doctest::Approx(1.19));
  CHECK(st.mean_b == doctest::Approx(1.0));
  CHECK(st.relative_gain == doctest::Approx(0.19));
  CHECK(st.positive == 3);
  REQUIRE(st.per_seed_diff.size() == 3);
  for (double d : st.per_seed_diff) CHECK(d == doctest::Approx(0.19));

  // 1.741 vs 1.0 -> 74.1%.
  MetricsLog c = synthetic_log({1, 2, 3}, 10, [](std::uint64_t, int) {
    return 1.741;
  });
  CHECK(compare(c, b, Metric::reward).relative_gain ==
        doctest::Approx(0.741));

  SUBCASE("seed lists must match") {
    MetricsLog other = synthetic_log({1, 2, 9}, 10, [](std::uint64_t, int) {
      return 1.0;
    });
    CHECK_THROWS_AS(compare(a, other, Metric::reward), std::invalid_argument);
  }
  SUBCASE("episode counts must match") {
    MetricsLog other = synthetic_log({1, 2, 3}, 8, [](std::uint64_t, int) {
      return 1.0;
    });
    CHECK_THROWS_AS(compare(a, other, Metric::reward), std::invalid_argument);
  }
  SUBCASE("a zero baseline has no relative gain") {
    MetricsLog zero = synthetic_log({1, 2, 3}, 10, [](std::uint64_t, int) {
      return 0.0;
    });
    CHECK_THROWS_AS(compare(a, zero, Metric::reward), std::invalid_argument);
  }
}

TEST_CASE("metric names") {
  CHECK(parse_metric("reward") == Metric::reward);
  CHECK(parse_metric("total_rate") == Metric::total_rate);
  CHECK(parse_metric("min_rate") == Metric::min_rate);
  CHECK_THROWS_AS(parse_metric("latency"), std::invalid_argument);
  CHECK(parse_sweep_variable("p_max") == SweepVariable::p_max);
  CHECK(parse_sweep_variable("elements") == SweepVariable::elements);
  CHECK(parse_sweep_variable("users") == SweepVariable::users);
  CHECK_THROWS_AS(parse_sweep_variable("antennas"), std::invalid_argument);
}

TEST_CASE("operation-count report") {
  const std::vector<int> arch = {4, 8, 2};
  ComplexityReport rep = complexity_report(arch, arch, arch, 1.0);
  // 2 * ((2*4-1)*8 + 8 + (2*8-1)*2 + 2) = 192 per pass.
  CHECK(rep.actor_ops == 192.0);
  CHECK(rep.critic_ops == 192.0);
  CHECK(rep.meta_ops == 192.0);
  CHECK(rep.actor_terms == 48.0);  // 4*8 + 8*2
  CHECK(rep.without_meta == 384.0);
  CHECK(rep.with_meta == 480.0);  // meta path charged at half rate
  CHECK(rep.overhead_ratio == doctest::Approx(0.25));

  ComplexityReport none = complexity_report(arch, arch, {}, 1.0);
  CHECK(none.meta_ops == 0.0);
  CHECK(none.with_meta == none.without_meta);
  CHECK(none.overhead_ratio == 0.0);
}

TEST_CASE("csv round trip") {
  MetricsLog log = synthetic_log({5, 6}, 4, [](std::uint64_t s, int ep) {
    // Awkward decimals to exercise the formatter.
    return double(s) / 3.0 + double(ep) / 7.0;
  });

  std::stringstream first;
  export_csv(first, log);
  std::stringstream parsed(first.str());
  MetricsLog back = import_csv(parsed);

  CHECK(back.seeds == log.seeds);
  CHECK(back.episodes == log.episodes);
  REQUIRE(back.records.size() == log.records.size());
  for (size_t i = 0; i < log.records.size(); ++i) {
    CHECK(back.records[i].reward == log.records[i].reward);
    CHECK(back.records[i].total_rate == log.records[i].total_rate);
    CHECK(back.records[i].min_rate == log.records[i].min_rate);
    CHECK(back.records[i].feasible_steps == log.records[i].feasible_steps);
  }
  CHECK(back.summary.get_str("source") == "synthetic");

  // Re-export is byte-identical.
  std::stringstream second;
  export_csv(second, back);
  CHECK(first.str() == second.str());

  SUBCASE("bad header rejected") {
    std::stringstream bad("sed,episode,reward\n1,1,2.0\n");
    CHECK_THROWS_AS(import_csv(bad), std::invalid_argument);
  }
  SUBCASE("malformed row rejected") {
    std::string text = first.str();
    std::stringstream mangled(text + "5,not_a_number,1,1,1,1\n");
    CHECK_THROWS(import_csv(mangled));
  }
}

TEST_CASE("experiment runner produces an ordered, repeatable log") {
  ExperimentConfig c = quick_config();
  MetricsLog log = run_experiment(c);
  CHECK(log.seeds == std::vector<std::uint64_t>{11, 22});
  CHECK(log.episodes == 3);
  REQUIRE(log.records.size() == 6);
  CHECK_NOTHROW(log.validate());
  // The echo lands in the summary block.
  CHECK(log.summary.get_int("e_max") == 3);
  CHECK(log.summary.get_str("scenario") == c.scenario.to_string());

  // Thread scheduling must not leak into the results: a serial run agrees
  // record by record, and a rerun at the same width is byte-identical.
  ExperimentConfig serial = c;
  serial.workers = 1;
  MetricsLog again = run_experiment(serial);
  REQUIRE(again.records.size() == log.records.size());
  for (size_t i = 0; i < log.records.size(); ++i) {
    CHECK(again.records[i].seed == log.records[i].seed);
    CHECK(again.records[i].episode == log.records[i].episode);
    CHECK(again.records[i].reward == log.records[i].reward);
    CHECK(again.records[i].total_rate == log.records[i].total_rate);
    CHECK(again.records[i].min_rate == log.records[i].min_rate);
    CHECK(again.records[i].feasible_steps == log.records[i].feasible_steps);
  }
  MetricsLog rerun = run_experiment(c);
  std::stringstream sa, sb;
  export_csv(sa, log);
  export_csv(sb, rerun);
  CHECK(sa.str() == sb.str());
}

TEST_CASE("sweeps rerun the experiment per value") {
  ExperimentConfig c = quick_config();
  c.seeds = {11};

  std::vector<MetricsLog> logs = sweep(c, SweepVariable::p_max, {1.0, 2.0});
  REQUIRE(logs.size() == 2);
  CHECK(logs[0].summary.get_double("p_max_w") == 1.0);
  CHECK(logs[1].summary.get_double("p_max_w") == 2.0);
  CHECK(logs[0].records.size() == 3);

  CHECK_THROWS_AS(sweep(c, SweepVariable::p_max, {2.0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(sweep(c, SweepVariable::p_max, {2.0, 2.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(sweep(c, SweepVariable::elements, {4.0, 4.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(sweep(c, SweepVariable::p_max, {}), std::invalid_argument);
}
