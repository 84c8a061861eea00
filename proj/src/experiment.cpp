#include "ehrelay/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ehrelay/error.hpp"
#include "ehrelay/optimizer.hpp"
#include "ehrelay/simulator.hpp"
#include "ehrelay/utility.hpp"

namespace ehrelay {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::map<std::string, std::vector<int>>& default_sweeps() {
  static const std::map<std::string, std::vector<int>> sweeps = {
      {"fig2_power_vs_relays", {2, 4, 6, 8, 10, 15}},
      {"fig3_power_vs_blocks", {1, 10, 100}},
      {"fig4_hardening", {2, 4, 8, 16, 20}},
      {"fig5_multipair", {1, 2, 3, 4, 5}},
  };
  return sweeps;
}

class Reader {
 public:
  explicit Reader(std::vector<std::string>& problems) : problems_(problems) {}

  template <typename T>
  void get(const json& obj, const std::string& key, T& out, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
      out = obj.at(key).get<T>();
    } catch (const json::exception&) {
      problems_.push_back(where + key + ": wrong type");
    }
  }

  void unknown_keys(const json& obj, const std::set<std::string>& known, const std::string& where) {
    for (const auto& item : obj.items()) {
      if (!known.count(item.key())) problems_.push_back(where + item.key() + ": unknown key");
    }
  }

 private:
  std::vector<std::string>& problems_;
};

void read_scenario(const json& obj, Scenario& s, std::vector<std::string>& problems) {
  static const std::set<std::string> known = {
      "M",           "K",        "N_c",          "N_e",       "T_c",     "L_x",
      "L_y",         "d0",       "pl_ref_db",    "bandwidth_hz", "noise_psd", "gamma_th",
      "u_th",        "p_max",    "eh_mean",      "eh_alpha",  "relay_positions", "seed"};
  if (!obj.is_object()) {
    problems.push_back("scenario: must be an object");
    return;
  }
  Reader r(problems);
  const std::string at = "scenario.";
  r.unknown_keys(obj, known, at);
  r.get(obj, "M", s.M, at);
  r.get(obj, "K", s.K, at);
  r.get(obj, "N_c", s.N_c, at);
  r.get(obj, "N_e", s.N_e, at);
  r.get(obj, "T_c", s.T_c, at);
  r.get(obj, "L_x", s.L_x, at);
  r.get(obj, "L_y", s.L_y, at);
  r.get(obj, "d0", s.d0, at);
  r.get(obj, "pl_ref_db", s.pl_ref_db, at);
  r.get(obj, "bandwidth_hz", s.bandwidth_hz, at);
  r.get(obj, "noise_psd", s.noise_psd, at);
  r.get(obj, "gamma_th", s.gamma_th, at);
  r.get(obj, "u_th", s.u_th, at);
  r.get(obj, "p_max", s.p_max, at);
  r.get(obj, "eh_mean", s.eh_mean, at);
  r.get(obj, "eh_alpha", s.eh_alpha, at);
  r.get(obj, "seed", s.seed, at);
  if (obj.contains("relay_positions")) {
    std::vector<std::vector<double>> points;
    r.get(obj, "relay_positions", points, at);
    s.relay_positions.clear();
    for (const auto& p : points) {
      if (p.size() != 2) {
        problems.push_back("scenario.relay_positions: each entry must be [x, y] in meters");
        break;
      }
      s.relay_positions.push_back({p[0], p[1]});
    }
  }
  // Unit sanity beyond the model invariants.
  if (s.T_c > 1.0) problems.push_back("scenario.T_c: expected seconds, got " + std::to_string(s.T_c));
  if (s.noise_psd > 1e-3) {
    problems.push_back("scenario.noise_psd: expected W/Hz, got " + std::to_string(s.noise_psd));
  }
  if (s.eh_mean > s.p_max) problems.push_back("scenario.eh_mean: expected watts below p_max");
}

json parse_json(const std::string& text) {
  const bool blank = std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); });
  if (blank) return json::object();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("malformed JSON: ") + e.what()});
  }
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t i = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(i);
  if (frac == 0.0 || i + 1 >= values.size()) return values[i];
  if (std::isinf(values[i + 1])) return values[i + 1];
  return values[i] + frac * (values[i + 1] - values[i]);
}

double spread(const std::vector<double>& values) {
  const double hi = quantile(values, 0.75);
  const double lo = quantile(values, 0.25);
  if (std::isinf(hi)) return std::isinf(lo) ? 0.0 : kInf;
  return hi - lo;
}

int method_rank(const std::string& method) {
  static const std::vector<std::string> order = {"proposed", "greedy", "lp_bound", "online",
                                                 "error"};
  const auto it = std::find(order.begin(), order.end(), method);
  return static_cast<int>(it - order.begin());
}

int trial_rank(const std::string& trial) {
  if (trial == "median") return 1;
  if (trial == "iqr") return 2;
  return 0;
}

bool row_less(const CsvRow& a, const CsvRow& b) {
  if (a.sweep_value != b.sweep_value) return a.sweep_value < b.sweep_value;
  if (trial_rank(a.trial) != trial_rank(b.trial)) return trial_rank(a.trial) < trial_rank(b.trial);
  if (trial_rank(a.trial) == 0 && a.trial != b.trial) return std::stoi(a.trial) < std::stoi(b.trial);
  return method_rank(a.method) < method_rank(b.method);
}

Scenario sweep_scenario(const ExperimentSpec& spec, int value) {
  Scenario s = spec.scenario;
  if (spec.experiment == "fig3_power_vs_blocks") {
    s.N_c = value;
  } else if (spec.experiment == "fig5_multipair") {
    s.M = value;
  } else {
    s.K = value;
  }
  return s;
}

struct TrialOutput {
  std::vector<CsvRow> rows;
  bool failed = false;
  bool stall = false;
};

class Stopwatch {
 public:
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

TrialOutput run_trial(const ExperimentSpec& spec, int value, int trial) {
  TrialOutput out;
  auto row = [&](const std::string& method, std::optional<double> eta, std::optional<double> ratio,
                 double ms) {
    CsvRow r{spec.experiment, value, std::to_string(trial), method, eta, ratio, std::nullopt};
    if (spec.timing) r.runtime_ms = ms;
    out.rows.push_back(r);
  };

  try {
    Scenario s = sweep_scenario(spec, value);
    // Trials are matched across sweep values: trial t sees the same draws at every value.
    const std::uint64_t seed =
        mix_seed(mix_seed(spec.seed, fnv1a(spec.experiment)), static_cast<std::uint64_t>(trial));
    s.seed = seed;
    if (s.relay_positions.empty()) {
      Rng placement = make_rng(seed, stream::placement);
      place_relays(s, placement);
    }
    validate(s);
    Rng harvest = make_rng(seed, stream::harvest);
    const EhTrace trace = gen_eh_trace(s, harvest);
    const AfSuccessUtility u(s, compute_gains(s));
    BisectOptions opt;
    opt.epsilon = spec.epsilon;

    Stopwatch bracket_clock;
    std::optional<Bracket> bracket;
    try {
      bracket = initial_bracket(s, trace, u, opt);
    } catch (const InfeasibleScenario&) {
    }
    const double bracket_ms = bracket_clock.elapsed_ms();

    {
      Stopwatch clock;
      if (bracket) {
        const PolicyResult policy = bisect_eta(s, trace, u, *bracket, opt);
        const SimRun run = run_constructive_scheduler(s, trace, policy);
        row("proposed", policy.eta_star, run.outcome.no_outage_ratio, bracket_ms + clock.elapsed_ms());
      } else {
        row("proposed", kInf, std::nullopt, bracket_ms);
      }
    }

    if (spec.experiment == "fig4_hardening") {
      Stopwatch clock;
      const OnlineRun online = run_online_mode(s, trace, u, opt);
      row("online", online.mean_eta, online.run.outcome.no_outage_ratio, clock.elapsed_ms());
      return out;
    }

    {
      Stopwatch clock;
      const GreedyRun greedy = greedy_policy(s, trace, u);
      const double ratio = 1.0 - static_cast<double>(greedy.policy.qos_failures) /
                                     (static_cast<double>(s.M) * s.total_blocks());
      row("greedy", greedy.policy.eta_star, ratio, clock.elapsed_ms());
    }

    const long vars = static_cast<long>(s.M) * s.K * s.total_blocks();
    if (vars <= kLpBoundMaxVariables) {
      Stopwatch clock;
      if (bracket) {
        const PolicyResult bound = lp_bound(s, trace, u, *bracket, opt);
        row("lp_bound", bound.eta_star, std::nullopt, bracket_ms + clock.elapsed_ms());
      } else {
        row("lp_bound", kInf, std::nullopt, bracket_ms);
      }
    }
  } catch (const SolverStall&) {
    out.rows.push_back({spec.experiment, value, std::to_string(trial), "error", std::nullopt,
                        std::nullopt, std::nullopt});
    out.failed = true;
    out.stall = true;
  } catch (const std::exception&) {
    out.rows.push_back({spec.experiment, value, std::to_string(trial), "error", std::nullopt,
                        std::nullopt, std::nullopt});
    out.failed = true;
  }
  return out;
}

void append_aggregates(const ExperimentSpec& spec, std::vector<CsvRow>& rows) {
  std::map<std::pair<int, std::string>, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (const CsvRow& r : rows) {
    if (r.method == "error") continue;
    auto& g = groups[{r.sweep_value, r.method}];
    if (r.eta_watts) g.first.push_back(*r.eta_watts);
    if (r.no_outage_ratio) g.second.push_back(*r.no_outage_ratio);
  }
  for (const auto& [key, values] : groups) {
    const auto& [eta, ratio] = values;
    if (eta.empty()) continue;
    CsvRow median{spec.experiment, key.first, "median", key.second, quantile(eta, 0.5),
                  std::nullopt, std::nullopt};
    CsvRow iqr{spec.experiment, key.first, "iqr", key.second, spread(eta), std::nullopt,
               std::nullopt};
    if (!ratio.empty()) {
      median.no_outage_ratio = quantile(ratio, 0.5);
      iqr.no_outage_ratio = spread(ratio);
    }
    rows.push_back(median);
    rows.push_back(iqr);
  }
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"fig2_power_vs_relays", "fig3_power_vs_blocks",
                                                 "fig4_hardening", "fig5_multipair"};
  return names;
}

ExperimentSpec parse_config(const std::string& text, const std::string& base_dir) {
  const json root = parse_json(text);
  std::vector<std::string> problems;
  if (!root.is_object()) throw ConfigError({"top level must be a JSON object"});

  ExperimentSpec spec;
  Reader r(problems);
  r.unknown_keys(root,
                 {"experiment", "sweep", "trials", "seed", "output", "jobs", "epsilon", "timing",
                  "scenario", "scenario_path"},
                 "");
  r.get(root, "experiment", spec.experiment, "");
  r.get(root, "trials", spec.trials, "");
  r.get(root, "output", spec.output, "");
  r.get(root, "jobs", spec.jobs, "");
  r.get(root, "epsilon", spec.epsilon, "");
  r.get(root, "timing", spec.timing, "");
  r.get(root, "sweep", spec.sweep, "");

  if (root.contains("scenario") && root.contains("scenario_path")) {
    problems.push_back("scenario and scenario_path are mutually exclusive");
  }
  if (root.contains("scenario")) read_scenario(root.at("scenario"), spec.scenario, problems);
  if (root.contains("scenario_path")) {
    std::string rel;
    r.get(root, "scenario_path", rel, "");
    const std::filesystem::path path = std::filesystem::path(base_dir) / rel;
    std::ifstream in(path);
    if (!in) {
      problems.push_back("scenario_path: cannot read " + path.string());
    } else {
      std::stringstream buf;
      buf << in.rdbuf();
      try {
        read_scenario(parse_json(buf.str()), spec.scenario, problems);
      } catch (const ConfigError& e) {
        for (const auto& item : e.items()) problems.push_back("scenario_path: " + item);
      }
    }
  }
  spec.seed = spec.scenario.seed;
  r.get(root, "seed", spec.seed, "");

  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), spec.experiment) == names.end()) {
    problems.push_back("experiment: unknown name '" + spec.experiment + "'");
  } else if (!root.contains("sweep")) {
    spec.sweep = default_sweeps().at(spec.experiment);
  }
  if (spec.trials < 1) problems.push_back("trials: must be >= 1");
  if (spec.jobs < 1) problems.push_back("jobs: must be >= 1");
  if (!(spec.epsilon > 0.0)) problems.push_back("epsilon: must be positive (W)");
  if (spec.sweep.empty()) problems.push_back("sweep: must list at least one value");
  for (int v : spec.sweep) {
    if (v < 1) {
      problems.push_back("sweep: values must be positive integers");
      break;
    }
  }
  const bool sweeps_k =
      spec.experiment == "fig2_power_vs_relays" || spec.experiment == "fig4_hardening";
  if (sweeps_k && !spec.scenario.relay_positions.empty()) {
    problems.push_back("scenario.relay_positions: cannot be fixed while sweeping K");
  }

  try {
    validate(spec.scenario);
  } catch (const ConfigError& e) {
    for (const auto& item : e.items()) problems.push_back("scenario: " + item);
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return spec;
}

ExperimentSpec validate_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file " + path});
  std::stringstream buf;
  buf << in.rdbuf();
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  return parse_config(buf.str(), parent.empty() ? "." : parent.string());
}

std::string to_json(const ExperimentSpec& spec) {
  const Scenario& s = spec.scenario;
  json scenario = {{"M", s.M},
                   {"K", s.K},
                   {"N_c", s.N_c},
                   {"N_e", s.N_e},
                   {"T_c", s.T_c},
                   {"L_x", s.L_x},
                   {"L_y", s.L_y},
                   {"d0", s.d0},
                   {"pl_ref_db", s.pl_ref_db},
                   {"bandwidth_hz", s.bandwidth_hz},
                   {"noise_psd", s.noise_psd},
                   {"gamma_th", s.gamma_th},
                   {"u_th", s.u_th},
                   {"p_max", s.p_max},
                   {"eh_mean", s.eh_mean},
                   {"eh_alpha", s.eh_alpha},
                   {"seed", s.seed}};
  json positions = json::array();
  for (const Point& p : s.relay_positions) positions.push_back({p.x, p.y});
  scenario["relay_positions"] = positions;
  json out = {{"experiment", spec.experiment}, {"sweep", spec.sweep},   {"trials", spec.trials},
              {"seed", spec.seed},             {"output", spec.output}, {"jobs", spec.jobs},
              {"epsilon", spec.epsilon},       {"timing", spec.timing}, {"scenario", scenario}};
  return out.dump(2);
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  struct Task {
    int value;
    int trial;
  };
  std::vector<Task> tasks;
  for (int v : spec.sweep) {
    for (int t = 0; t < spec.trials; ++t) tasks.push_back({v, t});
  }
  std::vector<TrialOutput> outputs(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      outputs[i] = run_trial(spec, tasks[i].value, tasks[i].trial);
    }
  };
  const int workers = std::max(1, std::min<int>(spec.jobs, static_cast<int>(tasks.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  ExperimentResult result;
  for (auto& o : outputs) {
    if (o.failed) ++result.failed_trials;
    result.solver_stall = result.solver_stall || o.stall;
    result.rows.insert(result.rows.end(), o.rows.begin(), o.rows.end());
  }
  append_aggregates(spec, result.rows);
  std::stable_sort(result.rows.begin(), result.rows.end(), row_less);
  return result;
}

void write_csv(std::ostream& out, const std::vector<CsvRow>& rows) {
  auto cell = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  auto text = [](const std::string& v) {
    if (v.find_first_of(",\"\r\n") == std::string::npos) return v;
    std::string quoted = "\"";
    for (char c : v) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    return quoted + "\"";
  };
  out << "experiment,sweep_value,trial,method,eta_watts,no_outage_ratio,runtime_ms\r\n";
  for (const CsvRow& r : rows) {
    out << text(r.experiment) << ',' << r.sweep_value << ',' << text(r.trial) << ',' << text(r.method) << ','
        << cell(r.eta_watts) << ',' << cell(r.no_outage_ratio) << ',' << cell(r.runtime_ms)
        << "\r\n";
  }
}

}  // namespace ehrelay
