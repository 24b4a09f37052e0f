#include "starnoma/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace starnoma {

ScenarioFlags ScenarioFlags::parse(const std::string& name) {
  ScenarioFlags flags;
  if (name.empty()) return flags;
  for (const std::string& raw : split(name, ',')) {
    std::string tok;
    for (char c : raw)
      if (c != ' ' && c != '\t') tok.push_back(c);
    if (tok.empty()) continue;
    if (tok == "meta") {
      flags.agent = AgentKind::meta;
    } else if (tok == "ddpg") {
      flags.agent = AgentKind::ddpg;
    } else if (tok == "active") {
      flags.active = true;
    } else if (tok == "passive") {
      flags.active = false;
    } else if (tok == "second_order") {
      flags.second_order = true;
    } else if (tok == "single_reflection") {
      flags.second_order = false;
    } else if (tok == "multi_ris") {
      flags.multi_ris = true;
    } else if (tok == "single_ris") {
      flags.multi_ris = false;
    } else {
      throw std::invalid_argument("unknown scenario token: '" + tok + "'");
    }
  }
  return flags;
}

std::string ScenarioFlags::to_string() const {
  std::string s = agent == AgentKind::meta ? "meta" : "ddpg";
  s += active ? ",active" : ",passive";
  s += second_order ? ",second_order" : ",single_reflection";
  s += multi_ris ? ",multi_ris" : ",single_ris";
  return s;
}

ExperimentConfig ExperimentConfig::paper() {
  ExperimentConfig c;
  c.n_ris = 4;
  c.n_users = 16;
  c.bs_antennas = 4;
  c.elements_per_ris = 8;
  c.ris_near_m = 20.0;
  c.ris_spacing_m = 10.0;
  c.e_max = 5000;
  c.t_max = 50;
  c.agent.hidden = {256, 256};
  return c;
}

ExperimentConfig ExperimentConfig::desk() {
  ExperimentConfig c;
  c.n_ris = 2;
  c.n_users = 4;
  c.bs_antennas = 2;
  c.elements_per_ris = 4;
  c.ris_near_m = 20.0;
  c.ris_spacing_m = 1.5;
  c.ris_near_m = 30.0;
  c.pl_ris.ref_loss_db = 10.0;
  c.e_max = 300;
  c.t_max = 50;
  c.agent.hidden = {64, 64};
  // Short-horizon training settings, tuned for 300-episode runs.  The slow
  // critic and the full-history buffer keep early healthy experience in
  // play; the light regularizer touch damps actor-output growth without
  // flattening the association logits; the meta rate is sized so the
  // knowledge scalar integrates over the whole run instead of chasing
  // single-batch noise; the binding exploration floor keeps association
  // flips available all the way to the tail.
  c.agent.lr_critic = 5e-4;
  c.agent.psi0 = 0.01;
  c.agent.lr_meta = 1e-5;
  c.agent.noise_decay = 0.997;
  c.agent.noise_floor = 0.12;
  c.agent.buffer_capacity = 15000;
  c.c3 = 5.0;
  return c;
}

namespace {

const char* const kKnownKeys[] = {
    "scenario",       "seeds",          "workers",        "n_ris",
    "n_users",        "bs_antennas",    "elements_per_ris",
    "ris_near_m",     "ris_spacing_m",  "user_near_m",    "user_far_m",
    "pl_user_exp",    "pl_user_ref_db", "pl_bs_exp",      "pl_bs_ref_db",
    "pl_ris_exp",     "pl_ris_ref_db",  "p_max_w",        "r_min",
    "noise_dbm_hz",   "bandwidth_hz",   "delta_max_db",   "numerator",
    "c1",             "c2",             "c3",             "e_max",
    "t_max",          "resample",       "hidden",         "lr_actor",
    "lr_critic",      "lr_meta",        "tau",            "discount",
    "batch_size",     "buffer_capacity", "update_period", "noise_scale",
    "noise_decay",    "noise_floor",    "psi0",           "fd_eps",
    "optimizer",      "omega_aggregate", "sweep_variable", "sweep_values",
};

bool known_key(const std::string& k) {
  for (const char* known : kKnownKeys)
    if (k == known) return true;
  return false;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_config(const KvConfig& kv,
                                               const ExperimentConfig& base) {
  for (const auto& [k, v] : kv.items())
    if (!known_key(k))
      throw std::invalid_argument("unknown config key: '" + k + "'");

  ExperimentConfig c = base;
  if (kv.has("scenario")) c.scenario = ScenarioFlags::parse(kv.get_str("scenario"));
  if (kv.has("seeds")) c.seeds = kv.get_u64_list("seeds");
  c.workers = static_cast<int>(kv.get_int("workers", c.workers));
  c.n_ris = static_cast<int>(kv.get_int("n_ris", c.n_ris));
  c.n_users = static_cast<int>(kv.get_int("n_users", c.n_users));
  c.bs_antennas = static_cast<int>(kv.get_int("bs_antennas", c.bs_antennas));
  c.elements_per_ris =
      static_cast<int>(kv.get_int("elements_per_ris", c.elements_per_ris));
  c.ris_near_m = kv.get_double("ris_near_m", c.ris_near_m);
  c.ris_spacing_m = kv.get_double("ris_spacing_m", c.ris_spacing_m);
  c.user_near_m = kv.get_double("user_near_m", c.user_near_m);
  c.user_far_m = kv.get_double("user_far_m", c.user_far_m);
  c.pl_user.exponent = kv.get_double("pl_user_exp", c.pl_user.exponent);
  c.pl_user.ref_loss_db = kv.get_double("pl_user_ref_db", c.pl_user.ref_loss_db);
  c.pl_bs.exponent = kv.get_double("pl_bs_exp", c.pl_bs.exponent);
  c.pl_bs.ref_loss_db = kv.get_double("pl_bs_ref_db", c.pl_bs.ref_loss_db);
  c.pl_ris.exponent = kv.get_double("pl_ris_exp", c.pl_ris.exponent);
  c.pl_ris.ref_loss_db = kv.get_double("pl_ris_ref_db", c.pl_ris.ref_loss_db);
  c.p_max_w = kv.get_double("p_max_w", c.p_max_w);
  c.r_min = kv.get_double("r_min", c.r_min);
  c.noise_dbm_hz = kv.get_double("noise_dbm_hz", c.noise_dbm_hz);
  c.bandwidth_hz = kv.get_double("bandwidth_hz", c.bandwidth_hz);
  c.delta_max_db = kv.get_double("delta_max_db", c.delta_max_db);
  if (kv.has("numerator")) {
    const std::string v = kv.get_str("numerator");
    if (v == "selected") {
      c.numerator = NumeratorMode::selected;
    } else if (v == "beta_sum") {
      c.numerator = NumeratorMode::beta_sum;
    } else {
      throw std::invalid_argument("numerator must be selected or beta_sum");
    }
  }
  c.c1 = kv.get_double("c1", c.c1);
  c.c2 = kv.get_double("c2", c.c2);
  c.c3 = kv.get_double("c3", c.c3);
  c.e_max = static_cast<int>(kv.get_int("e_max", c.e_max));
  c.t_max = static_cast<int>(kv.get_int("t_max", c.t_max));
  if (kv.has("resample")) {
    const std::string v = kv.get_str("resample");
    if (v == "step") {
      c.resample_each_step = true;
    } else if (v == "episode") {
      c.resample_each_step = false;
    } else {
      throw std::invalid_argument("resample must be step or episode");
    }
  }
  if (kv.has("hidden")) {
    c.agent.hidden.clear();
    for (long long h : kv.get_int_list("hidden"))
      c.agent.hidden.push_back(static_cast<int>(h));
  }
  c.agent.lr_actor = kv.get_double("lr_actor", c.agent.lr_actor);
  c.agent.lr_critic = kv.get_double("lr_critic", c.agent.lr_critic);
  c.agent.lr_meta = kv.get_double("lr_meta", c.agent.lr_meta);
  c.agent.tau = kv.get_double("tau", c.agent.tau);
  c.agent.discount = kv.get_double("discount", c.agent.discount);
  c.agent.batch_size =
      static_cast<int>(kv.get_int("batch_size", c.agent.batch_size));
  c.agent.buffer_capacity = static_cast<std::size_t>(kv.get_int(
      "buffer_capacity", static_cast<long long>(c.agent.buffer_capacity)));
  c.agent.update_period =
      static_cast<int>(kv.get_int("update_period", c.agent.update_period));
  c.agent.noise_scale = kv.get_double("noise_scale", c.agent.noise_scale);
  c.agent.noise_decay = kv.get_double("noise_decay", c.agent.noise_decay);
  c.agent.noise_floor = kv.get_double("noise_floor", c.agent.noise_floor);
  c.agent.psi0 = kv.get_double("psi0", c.agent.psi0);
  c.agent.fd_eps = kv.get_double("fd_eps", c.agent.fd_eps);
  if (kv.has("optimizer")) {
    const std::string v = kv.get_str("optimizer");
    if (v == "adam") {
      c.agent.optimizer = OptimizerKind::adam;
    } else if (v == "sgd") {
      c.agent.optimizer = OptimizerKind::sgd;
    } else {
      throw std::invalid_argument("optimizer must be adam or sgd");
    }
  }
  if (kv.has("omega_aggregate")) {
    const std::string v = kv.get_str("omega_aggregate");
    if (v == "mean") {
      c.agent.omega_agg = OmegaAggregate::mean;
    } else if (v == "sum") {
      c.agent.omega_agg = OmegaAggregate::sum;
    } else {
      throw std::invalid_argument("omega_aggregate must be mean or sum");
    }
  }
  return c;
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw std::invalid_argument("config: empty seed list");
  for (std::size_t i = 0; i < seeds.size(); ++i)
    for (std::size_t j = i + 1; j < seeds.size(); ++j)
      if (seeds[i] == seeds[j])
        throw std::invalid_argument("config: duplicate seed");
  if (e_max < 1 || t_max < 1)
    throw std::invalid_argument("config: bad episode/step counts");
  if (p_max_w <= 0.0 || bandwidth_hz <= 0.0)
    throw std::invalid_argument("config: bad power/bandwidth");
  if (r_min < 0.0) throw std::invalid_argument("config: bad rate floor");
  if (workers < 0) throw std::invalid_argument("config: bad worker count");
  agent.validate();
  build_topology();  // throws on geometric inconsistencies
}

double ExperimentConfig::noise_power_w() const {
  return std::pow(10.0, (noise_dbm_hz - 30.0) / 10.0) * bandwidth_hz;
}

double ExperimentConfig::delta_max_linear() const {
  return std::pow(10.0, delta_max_db / 10.0);
}

Topology ExperimentConfig::build_topology() const {
  LineLayout layout;
  layout.n_ris = scenario.multi_ris ? n_ris : 1;
  layout.elements_per_ris = elements_per_ris;
  layout.bs_antennas = bs_antennas;
  layout.n_users = n_users;
  layout.ris_near_m = ris_near_m;
  layout.ris_spacing_m = ris_spacing_m;
  layout.user_near_m = user_near_m;
  layout.user_far_m = user_far_m;
  layout.pl_user = pl_user;
  layout.pl_bs = pl_bs;
  layout.pl_ris = pl_ris;
  return make_line_topology(layout);
}

EnvOptions ExperimentConfig::env_options() const {
  EnvOptions env;
  env.p_max = p_max_w;
  env.delta_max = delta_max_linear();
  env.r_min = r_min;
  env.noise_power = noise_power_w();
  env.coeffs.c1 = c1;
  env.coeffs.c2 = c2;
  env.coeffs.c3 = c3 < 0.0 ? r_min : c3;
  env.t_max = t_max;
  env.numerator = numerator;
  env.pin_unit_delta = !scenario.active;
  env.zero_inter_ris = !scenario.second_order;
  env.resample_each_step = resample_each_step;
  return env;
}

TrainOptions ExperimentConfig::train_options() const {
  TrainOptions t;
  t.episodes = e_max;
  t.agent = agent;
  t.agent.kind = scenario.agent;
  t.env = env_options();
  return t;
}

KvConfig ExperimentConfig::echo() const {
  KvConfig kv;
  kv.set("scenario", scenario.to_string());
  std::string seed_str;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (i) seed_str += ",";
    seed_str += std::to_string(seeds[i]);
  }
  kv.set("seeds", seed_str);
  kv.set_int("workers", workers);
  kv.set_int("n_ris", n_ris);
  kv.set_int("n_users", n_users);
  kv.set_int("bs_antennas", bs_antennas);
  kv.set_int("elements_per_ris", elements_per_ris);
  kv.set_double("ris_near_m", ris_near_m);
  kv.set_double("ris_spacing_m", ris_spacing_m);
  kv.set_double("user_near_m", user_near_m);
  kv.set_double("user_far_m", user_far_m);
  kv.set_double("pl_user_exp", pl_user.exponent);
  kv.set_double("pl_user_ref_db", pl_user.ref_loss_db);
  kv.set_double("pl_bs_exp", pl_bs.exponent);
  kv.set_double("pl_bs_ref_db", pl_bs.ref_loss_db);
  kv.set_double("pl_ris_exp", pl_ris.exponent);
  kv.set_double("pl_ris_ref_db", pl_ris.ref_loss_db);
  kv.set_double("p_max_w", p_max_w);
  kv.set_double("r_min", r_min);
  kv.set_double("noise_dbm_hz", noise_dbm_hz);
  kv.set_double("bandwidth_hz", bandwidth_hz);
  kv.set_double("delta_max_db", delta_max_db);
  kv.set("numerator",
         numerator == NumeratorMode::selected ? "selected" : "beta_sum");
  kv.set_double("c1", c1);
  kv.set_double("c2", c2);
  kv.set_double("c3", c3);
  kv.set_int("e_max", e_max);
  kv.set_int("t_max", t_max);
  kv.set("resample", resample_each_step ? "step" : "episode");
  std::string hidden_str;
  for (std::size_t i = 0; i < agent.hidden.size(); ++i) {
    if (i) hidden_str += ",";
    hidden_str += std::to_string(agent.hidden[i]);
  }
  kv.set("hidden", hidden_str);
  kv.set_double("lr_actor", agent.lr_actor);
  kv.set_double("lr_critic", agent.lr_critic);
  kv.set_double("lr_meta", agent.lr_meta);
  kv.set_double("tau", agent.tau);
  kv.set_double("discount", agent.discount);
  kv.set_int("batch_size", agent.batch_size);
  kv.set_int("buffer_capacity", static_cast<long long>(agent.buffer_capacity));
  kv.set_int("update_period", agent.update_period);
  kv.set_double("noise_scale", agent.noise_scale);
  kv.set_double("noise_decay", agent.noise_decay);
  kv.set_double("noise_floor", agent.noise_floor);
  kv.set_double("psi0", agent.psi0);
  kv.set_double("fd_eps", agent.fd_eps);
  kv.set("optimizer",
         agent.optimizer == OptimizerKind::adam ? "adam" : "sgd");
  kv.set("omega_aggregate",
         agent.omega_agg == OmegaAggregate::mean ? "mean" : "sum");
  return kv;
}

Metric parse_metric(const std::string& name) {
  if (name == "reward") return Metric::reward;
  if (name == "total_rate") return Metric::total_rate;
  if (name == "min_rate") return Metric::min_rate;
  throw std::invalid_argument("unknown metric: '" + name + "'");
}

void MetricsLog::validate() const {
  if (records.size() != seeds.size() * static_cast<std::size_t>(episodes))
    throw std::invalid_argument("metrics: record count != seeds * episodes");
  std::size_t at = 0;
  for (std::uint64_t seed : seeds)
    for (int ep = 1; ep <= episodes; ++ep, ++at) {
      const EpisodeRecord& r = records[at];
      if (r.seed != seed || r.episode != ep)
        throw std::invalid_argument("metrics: records out of order");
    }
}

double MetricsLog::value(const EpisodeRecord& r, Metric m) const {
  switch (m) {
    case Metric::reward:
      return r.reward;
    case Metric::total_rate:
      return r.total_rate;
    case Metric::min_rate:
      return r.min_rate;
  }
  throw std::logic_error("unknown metric");
}

int MetricsLog::tail_window() const {
  return std::max(1, (episodes + 9) / 10);
}

double MetricsLog::tail_mean(Metric m) const {
  if (seeds.empty()) throw std::logic_error("metrics: empty log");
  double sum = 0.0;
  for (std::uint64_t s : seeds) sum += tail_mean(m, s);
  return sum / static_cast<double>(seeds.size());
}

double MetricsLog::tail_mean(Metric m, std::uint64_t seed) const {
  validate();
  auto it = std::find(seeds.begin(), seeds.end(), seed);
  if (it == seeds.end()) throw std::invalid_argument("metrics: unknown seed");
  std::size_t block = static_cast<std::size_t>(it - seeds.begin()) *
                      static_cast<std::size_t>(episodes);
  int w = tail_window();
  double sum = 0.0;
  for (int i = episodes - w; i < episodes; ++i)
    sum += value(records[block + i], m);
  return sum / w;
}

MetricsLog run_experiment(const ExperimentConfig& config) {
  config.validate();
  const Topology topo = config.build_topology();
  const TrainOptions topt = config.train_options();

  const int n_seeds = static_cast<int>(config.seeds.size());
  std::vector<std::vector<EpisodeStat>> per_seed(n_seeds);
  unsigned hw = std::thread::hardware_concurrency();
  int n_workers = config.workers > 0 ? config.workers
                                     : static_cast<int>(hw > 0 ? hw : 1);
  n_workers = std::min(n_workers, n_seeds);

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&]() {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n_seeds) return;
      try {
        TrainResult res = train(topo, topt, config.seeds[i]);
        per_seed[i] = std::move(res.episodes);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  MetricsLog log;
  log.seeds = config.seeds;
  log.episodes = topt.episodes;
  log.records.reserve(static_cast<std::size_t>(n_seeds) * topt.episodes);
  for (int i = 0; i < n_seeds; ++i) {
    const std::vector<EpisodeStat>& stats = per_seed[i];
    for (int ep = 0; ep < topt.episodes; ++ep) {
      EpisodeRecord r;
      r.seed = config.seeds[i];
      r.episode = ep + 1;
      r.reward = stats[ep].reward;
      r.total_rate = stats[ep].total_rate;
      r.min_rate = stats[ep].min_rate;
      r.feasible_steps = stats[ep].feasible_steps;
      log.records.push_back(r);
    }
  }
  log.summary = config.echo();
  log.validate();
  return log;
}

CompareStats compare(const MetricsLog& a, const MetricsLog& b, Metric m) {
  a.validate();
  b.validate();
  if (a.seeds != b.seeds)
    throw std::invalid_argument("compare: seed lists differ");
  if (a.episodes != b.episodes)
    throw std::invalid_argument("compare: episode counts differ");

  CompareStats st;
  for (std::uint64_t seed : a.seeds) {
    double ta = a.tail_mean(m, seed);
    double tb = b.tail_mean(m, seed);
    st.per_seed_diff.push_back(ta - tb);
    if (ta - tb > 0.0) ++st.positive;
  }
  st.mean_a = a.tail_mean(m);
  st.mean_b = b.tail_mean(m);
  if (st.mean_b == 0.0)
    throw std::invalid_argument("compare: zero baseline mean");
  st.relative_gain = (st.mean_a - st.mean_b) / st.mean_b;
  return st;
}

SweepVariable parse_sweep_variable(const std::string& name) {
  if (name == "p_max") return SweepVariable::p_max;
  if (name == "elements") return SweepVariable::elements;
  if (name == "users") return SweepVariable::users;
  throw std::invalid_argument("unknown sweep variable: '" + name + "'");
}

std::vector<MetricsLog> sweep(const ExperimentConfig& config,
                              SweepVariable variable,
                              const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("sweep: empty value list");
  for (std::size_t i = 0; i + 1 < values.size(); ++i)
    if (!(values[i] < values[i + 1]))
      throw std::invalid_argument("sweep: values must strictly increase");

  std::vector<MetricsLog> out;
  for (double v : values) {
    ExperimentConfig point = config;
    switch (variable) {
      case SweepVariable::p_max:
        point.p_max_w = v;
        break;
      case SweepVariable::elements: {
        int iv = static_cast<int>(std::lround(v));
        if (std::abs(v - iv) > 1e-9)
          throw std::invalid_argument("sweep: element counts must be integral");
        point.elements_per_ris = iv;
        break;
      }
      case SweepVariable::users: {
        int iv = static_cast<int>(std::lround(v));
        if (std::abs(v - iv) > 1e-9)
          throw std::invalid_argument("sweep: user counts must be integral");
        point.n_users = iv;
        break;
      }
    }
    out.push_back(run_experiment(point));
  }
  return out;
}

namespace {

double product_terms(const std::vector<int>& sizes) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i)
    total += static_cast<double>(sizes[i]) * sizes[i + 1];
  return total;
}

}  // namespace

ComplexityReport complexity_report(const std::vector<int>& actor_arch,
                                   const std::vector<int>& critic_arch,
                                   const std::vector<int>& meta_arch,
                                   double act_cost) {
  ComplexityReport rep;
  rep.actor_ops = flops_count(actor_arch, act_cost);
  rep.critic_ops = flops_count(critic_arch, act_cost);
  rep.meta_ops = flops_count(meta_arch, act_cost);
  rep.actor_terms = product_terms(actor_arch);
  rep.critic_terms = product_terms(critic_arch);
  rep.meta_terms = product_terms(meta_arch);
  rep.without_meta = rep.actor_ops + rep.critic_ops;
  rep.with_meta = rep.without_meta + 0.5 * rep.meta_ops;
  rep.overhead_ratio =
      rep.without_meta > 0.0 ? 0.5 * rep.meta_ops / rep.without_meta : 0.0;
  return rep;
}

namespace {
const char* const kCsvHeader =
    "seed,episode,reward,total_rate,min_rate,feasible_steps";
}

void export_csv(std::ostream& out, const MetricsLog& log) {
  if (!log.records.empty()) log.validate();
  out << kCsvHeader << "\n";
  for (const EpisodeRecord& r : log.records)
    out << r.seed << "," << r.episode << "," << format_double(r.reward) << ","
        << format_double(r.total_rate) << "," << format_double(r.min_rate)
        << "," << r.feasible_steps << "\n";
  for (const auto& [k, v] : log.summary.items())
    out << "# cfg " << k << " = " << v << "\n";
  if (!log.records.empty()) {
    // Recomputed on every export, so round-trips stay byte-identical.
    out << "# stat tail_mean_min_rate = "
        << format_double(log.tail_mean(Metric::min_rate)) << "\n";
    out << "# stat tail_mean_reward = "
        << format_double(log.tail_mean(Metric::reward)) << "\n";
    out << "# stat tail_mean_total_rate = "
        << format_double(log.tail_mean(Metric::total_rate)) << "\n";
  }
}

void export_csv_file(const std::string& path, const MetricsLog& log) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  export_csv(out, log);
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
}

MetricsLog import_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw std::invalid_argument("metrics import: bad header");
  MetricsLog log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string cfg_prefix = "# cfg ";
      if (line.rfind(cfg_prefix, 0) == 0) {
        std::string body = line.substr(cfg_prefix.size());
        std::size_t eq = body.find('=');
        if (eq == std::string::npos)
          throw std::invalid_argument("metrics import: bad summary line");
        std::string key = body.substr(0, eq);
        std::string value = body.substr(eq + 1);
        while (!key.empty() && key.back() == ' ') key.pop_back();
        while (!value.empty() && value.front() == ' ') value.erase(0, 1);
        log.summary.set(key, value);
      }
      continue;  // "# stat" lines are derivable, ignored
    }
    std::vector<std::string> parts = split(line, ',');
    if (parts.size() != 6)
      throw std::invalid_argument("metrics import: bad record: " + line);
    EpisodeRecord r;
    r.seed = static_cast<std::uint64_t>(std::stoull(parts[0]));
    r.episode = std::stoi(parts[1]);
    r.reward = std::stod(parts[2]);
    r.total_rate = std::stod(parts[3]);
    r.min_rate = std::stod(parts[4]);
    r.feasible_steps = std::stoi(parts[5]);
    log.records.push_back(r);
  }
  for (const EpisodeRecord& r : log.records) {
    if (std::find(log.seeds.begin(), log.seeds.end(), r.seed) ==
        log.seeds.end())
      log.seeds.push_back(r.seed);
    log.episodes = std::max(log.episodes, r.episode);
  }
  if (!log.records.empty()) log.validate();
  return log;
}

MetricsLog import_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return import_csv(in);
}

}  // namespace starnoma
