#include "treecycles/cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "treecycles/estimators.hpp"
#include "treecycles/events.hpp"
#include "treecycles/meander.hpp"
#include "treecycles/parallel.hpp"
#include "treecycles/serialize.hpp"
#include "treecycles/stats.hpp"
#include "treecycles/stirring.hpp"

namespace treecycles {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  int d = 2;
  std::string n_text = "3";
  double t = 0.5;
  std::string t_grid;
  std::uint64_t trials = 0;  // 0: command default
  std::uint64_t seed = 1;
  int n1 = 1;
  int workers = 0;
  std::string format = "json";
  std::string out;
  std::string config;
  std::optional<double> fd_step;
  std::string kind;
  std::string only;
  std::optional<std::uint64_t> replay;
  std::string inject_fault;
};

using OptionMap = std::map<std::string, CLI::Option*>;

void add_common(CLI::App* sub, RunConfig& cfg, OptionMap& opts) {
  opts["d"] = sub->add_option("--d", cfg.d, "offspring degree (>= 2)");
  opts["n"] = sub->add_option("--n", cfg.n_text, "tree depth (>= 1); scan accepts a comma list");
  opts["t"] = sub->add_option("--t", cfg.t, "bar rate per edge (>= 0)");
  opts["trials"] = sub->add_option("--trials", cfg.trials, "number of trials");
  opts["seed"] = sub->add_option("--seed", cfg.seed, "master seed");
  opts["n1"] = sub->add_option("--n1", cfg.n1, "far-from-boundary cutoff (>= 1)");
  opts["workers"] = sub->add_option("--workers", cfg.workers, "worker threads (0 = hardware)");
  opts["format"] = sub->add_option("--format", cfg.format, "json or csv");
  opts["out"] = sub->add_option("--out", cfg.out, "output file (default stdout)");
  sub->add_option("--config", cfg.config, "JSON file with defaults for the flags above");
}

// Fills flags missing on the command line from the JSON config file.
void merge_config(RunConfig& cfg, const OptionMap& opts) {
  if (cfg.config.empty()) return;
  std::ifstream in(cfg.config);
  if (!in) throw UsageError("cannot read config file " + cfg.config);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UsageError(std::string("config file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw UsageError("config file must hold a JSON object");
  auto given = [&](const std::string& key) {
    auto it = opts.find(key);
    return it != opts.end() && it->second->count() > 0;
  };
  try {
    for (const auto& [key, value] : j.items()) {
      if (given(key == "t_grid" ? "t-grid" : key == "fd_step" ? "fd-step" : key)) continue;
      if (key == "d") cfg.d = value.get<int>();
      else if (key == "n") cfg.n_text = value.is_string() ? value.get<std::string>() : std::to_string(value.get<int>());
      else if (key == "t") cfg.t = value.get<double>();
      else if (key == "t_grid") cfg.t_grid = value.get<std::string>();
      else if (key == "trials") cfg.trials = value.get<std::uint64_t>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "n1") cfg.n1 = value.get<int>();
      else if (key == "workers") cfg.workers = value.get<int>();
      else if (key == "format") cfg.format = value.get<std::string>();
      else if (key == "out") cfg.out = value.get<std::string>();
      else if (key == "fd_step") cfg.fd_step = value.get<double>();
      else throw UsageError("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad config value: ") + e.what());
  }
}

std::vector<int> parse_depths(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      int n = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(n);
    } catch (const std::exception&) {
      throw UsageError("bad depth '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError("no depth given");
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  if (text.empty()) throw UsageError("--t-grid is required");
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      parts.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw UsageError("bad grid value '" + item + "'");
    }
  }
  if (parts.size() != 3) throw UsageError("--t-grid must be lo:hi:step");
  double lo = parts[0], hi = parts[1], step = parts[2];
  if (!(step > 0.0) || hi < lo || lo < 0.0) throw UsageError("empty rate grid");
  auto count = static_cast<std::uint64_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> grid;
  for (std::uint64_t k = 0; k < count; ++k) grid.push_back(lo + static_cast<double>(k) * step);
  return grid;
}

void validate(const RunConfig& cfg, bool need_single_n) {
  if (cfg.d < 2) throw UsageError("--d must be >= 2");
  if (!(cfg.t >= 0.0) || !std::isfinite(cfg.t)) throw UsageError("--t must be >= 0");
  if (cfg.n1 < 1) throw UsageError("--n1 must be >= 1");
  if (cfg.workers < 0) throw UsageError("--workers must be >= 0");
  if (cfg.format != "json" && cfg.format != "csv") throw UsageError("--format must be json or csv");
  auto depths = parse_depths(cfg.n_text);
  if (need_single_n && depths.size() != 1) throw UsageError("--n takes a single depth here");
  for (int n : depths) {
    if (n < 1) throw UsageError("--n must be >= 1");
    TreeShape(cfg.d, n);  // capacity guard
  }
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw UsageError("cannot open output file " + path);
    }
    stream_ = path.empty() ? &fallback : &file_;
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

std::uint64_t trials_or(const RunConfig& cfg, std::uint64_t fallback) { return cfg.trials ? cfg.trials : fallback; }

std::string fmt(double x) { return format_double(x); }

// sim ---------------------------------------------------------------------

int cmd_sim(const RunConfig& cfg, std::ostream& os) {
  TreeShape shape(cfg.d, parse_depths(cfg.n_text).front());
  EventConfig events{cfg.n1};
  auto trials = trials_or(cfg, 1);
  if (cfg.format == "csv") {
    std::vector<std::string> header = {"trial", "seed", "cycle_length", "boundary_truncated", "support_size"};
    for (const auto& c : event_csv_columns()) header.push_back(c);
    os << csv_row(header);
  }
  for (std::uint64_t i = 0; i < trials; ++i) {
    auto seed = trial_seed(cfg.seed, Purpose::Bars, i);
    auto bars = sample_bars(shape, cfg.t, seed);
    Stream stream(trial_seed(cfg.seed, Purpose::Added, i), {});
    Bar a = sample_added(shape, stream);
    auto cycle = cycle_of_root(bars);
    auto support = sigma_all(bars).support().size();
    std::optional<EventRecord> rec;
    if (!bars.contains(a)) rec = detect(bars, a, events);
    if (cfg.format == "csv") {
      std::vector<std::string> row = {std::to_string(i), std::to_string(seed), std::to_string(cycle.length()),
                                      cycle.boundary_truncated ? "1" : "0", std::to_string(support)};
      if (rec) {
        for (auto& f : event_csv_fields(shape, *rec)) row.push_back(std::move(f));
      } else {
        row.resize(row.size() + event_csv_columns().size());
      }
      os << csv_row(row);
    } else {
      json line = {{"schema", kSchemaVersion}, {"trial", i}, {"seed", seed}, {"d", cfg.d}, {"n", shape.n()},
                   {"t", cfg.t}};
      line.update(cycle_to_json(shape, cycle));
      line["support_size"] = support;
      line["events"] = rec ? event_to_json(shape, *rec) : json(nullptr);
      os << line.dump() << "\n";
    }
  }
  return 0;
}

// estimate ----------------------------------------------------------------

void emit_estimates(const RunConfig& cfg, std::ostream& os, const std::string& kind, int n,
                    const std::vector<std::pair<std::string, Estimate>>& rows, const json& extra) {
  if (cfg.format == "csv") {
    os << csv_row({"kind", "d", "n", "t", "quantity", "mean", "stderr", "trials", "seed"});
    for (const auto& [name, e] : rows) {
      os << csv_row({kind, std::to_string(cfg.d), std::to_string(n), fmt(cfg.t), name, fmt(e.mean), fmt(e.std_error),
                     std::to_string(e.trials), std::to_string(e.seed)});
    }
    return;
  }
  json j = {{"schema", kSchemaVersion}, {"kind", kind}, {"d", cfg.d}, {"n", n}, {"t", cfg.t}};
  for (const auto& [name, e] : rows) j[name] = estimate_to_json(e);
  j.update(extra);
  os << j.dump() << "\n";
}

int cmd_estimate(const RunConfig& cfg, std::ostream& os) {
  int n = parse_depths(cfg.n_text).front();
  TreeShape shape(cfg.d, n);
  const double tau = cfg.t * cfg.d;
  if (cfg.kind == "pn") {
    auto e = estimate_pn(shape, cfg.t, trials_or(cfg, 10'000), cfg.seed, cfg.workers);
    emit_estimates(cfg, os, "pn", n, {{"p_n", e}}, json::object());
  } else if (cfg.kind == "z") {
    auto e = z_estimate(shape, cfg.t, trials_or(cfg, 10'000), cfg.seed, cfg.workers);
    double lo = cfg.d * std::exp(-tau);
    double hi = 1.2 * cfg.d;
    bool applies = cfg.d >= 15.0 * tau * tau;
    bool inside = e.mean >= lo - 4.0 * e.std_error && e.mean <= hi + 4.0 * e.std_error;
    emit_estimates(cfg, os, "z", n, {{"Z", e}},
                   {{"bracket_lo", lo}, {"bracket_hi", hi}, {"bracket_applies", applies}, {"in_bracket", inside}});
  } else if (cfg.kind == "tail") {
    auto r = tail_checks(shape, cfg.t, trials_or(cfg, 10'000), cfg.seed, cfg.workers);
    if (cfg.format == "csv") {
      os << csv_row({"check", "level", "k", "empirical", "stderr", "bound", "bound_error", "violated"});
      for (const auto& row : r.cluster) {
        os << csv_row({"cluster", "", std::to_string(row.ell), fmt(row.empirical.mean), fmt(row.empirical.std_error),
                       fmt(row.bound), "0", row.violated ? "1" : "0"});
      }
      for (const auto& row : r.level_visits) {
        os << csv_row({"level_visit", std::to_string(row.level), std::to_string(row.k), fmt(row.empirical.mean),
                       fmt(row.empirical.std_error), fmt(row.bound), fmt(row.bound_error), row.violated ? "1" : "0"});
      }
    } else {
      json cluster = json::array();
      for (const auto& row : r.cluster) {
        cluster.push_back({{"ell", row.ell}, {"empirical", estimate_to_json(row.empirical)}, {"bound", row.bound},
                           {"violated", row.violated}});
      }
      json visits = json::array();
      for (const auto& row : r.level_visits) {
        visits.push_back({{"level", row.level}, {"k", row.k}, {"empirical", estimate_to_json(row.empirical)},
                          {"plugin_p", row.plugin_p}, {"bound", row.bound}, {"bound_error", row.bound_error},
                          {"violated", row.violated}});
      }
      json j = {{"schema", kSchemaVersion}, {"kind", "tail"}, {"d", cfg.d}, {"n", n}, {"t", cfg.t},
                {"cluster_checked", r.cluster_checked}, {"notice", r.notice}, {"cluster", cluster},
                {"level_visits", visits}, {"any_violation", r.any_violation()}};
      os << j.dump() << "\n";
    }
  } else if (cfg.kind == "gw") {
    auto g = gw_extinction(cfg.d, cfg.t);
    if (cfg.format == "csv") {
      os << csv_row({"d", "t", "q_ext", "p_upper", "iterations", "within_bound"});
      os << csv_row({std::to_string(cfg.d), fmt(cfg.t), fmt(g.q_ext), fmt(g.p_upper), std::to_string(g.iterations),
                     g.within_bound ? (*g.within_bound ? "1" : "0") : ""});
    } else {
      json j = {{"schema", kSchemaVersion}, {"kind", "gw"}, {"d", cfg.d}, {"t", cfg.t}, {"q_ext", g.q_ext},
                {"p_upper", g.p_upper}, {"iterations", g.iterations}};
      j["within_bound"] = g.within_bound ? json(*g.within_bound) : json(nullptr);
      os << j.dump() << "\n";
    }
  } else if (cfg.kind == "russo") {
    double h = cfg.fd_step.value_or(0.1 / cfg.d);
    if (!(h > 0.0 && h < cfg.t)) throw UsageError("--fd-step must satisfy 0 < fd_step < t");
    auto r = russo_check(shape, cfg.t, h, trials_or(cfg, 100'000), cfg.seed, cfg.workers);
    emit_estimates(cfg, os, "russo", n, {{"lhs", r.lhs}, {"rhs", r.rhs}, {"corrected", r.corrected}},
                   {{"fd_step", h}, {"third_derivative", r.third_derivative}, {"bias_allowance", r.bias_allowance},
                    {"zscore", r.zscore}, {"zscore_uncorrected", r.zscore_uncorrected}});
  } else {
    throw UsageError("unknown estimate kind '" + cfg.kind + "' (pn, z, tail, gw, russo)");
  }
  return 0;
}

// verify ------------------------------------------------------------------

struct SuiteResult {
  std::string name;
  bool pass = false;
  std::string detail;
  std::optional<std::uint64_t> replay_seed;
};

Bar added_for(const TreeShape& shape, std::uint64_t seed) {
  Stream stream(seed, {static_cast<std::uint64_t>(Purpose::Added)});
  return sample_added(shape, stream);
}

SuiteResult suite_inclusions(const RunConfig& cfg, const TreeShape& shape, std::uint64_t trials) {
  SuiteResult r{"inclusions", false, {}, {}};
  std::uint64_t violations = 0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    auto seed = trial_seed(cfg.seed, Purpose::Bars, i);
    std::vector<std::string> v;
    try {
      auto bars = sample_bars(shape, cfg.t, seed);
      Bar a = added_for(shape, seed);
      if (bars.contains(a)) continue;
      v = check_inclusions(bars, a, EventConfig{cfg.n1});
    } catch (const EngineError& e) {
      v = {std::string("engine error: ") + e.what()};
    }
    if (!v.empty()) {
      if (!r.replay_seed) {
        r.replay_seed = seed;
        r.detail = v.front() + "; ";
      }
      violations += v.size();
    }
  }
  r.pass = violations == 0;
  r.detail += std::to_string(violations) + " violations over " + std::to_string(trials) + " samples";
  return r;
}

SuiteResult suite_oracle(const RunConfig& cfg, const TreeShape& shape, std::uint64_t trials) {
  SuiteResult r{"oracle", false, {}, {}};
  std::uint64_t mismatches = 0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    auto seed = trial_seed(cfg.seed, Purpose::Bars, i);
    bool ok = false;
    std::string why = "sigma_t differs from the transposition oracle";
    try {
      auto bars = sample_bars(shape, cfg.t, seed);
      ok = sigma_all(bars) == transposition_oracle(bars);
    } catch (const EngineError& e) {
      why = std::string("engine error: ") + e.what();
    }
    if (!ok) {
      if (!r.replay_seed) {
        r.replay_seed = seed;
        r.detail = why + "; ";
      }
      ++mismatches;
    }
  }
  r.pass = mismatches == 0;
  r.detail += std::to_string(mismatches) + " mismatches over " + std::to_string(trials) + " instances";
  return r;
}

SuiteResult suite_shift(const RunConfig& cfg, const TreeShape& shape, std::uint64_t trials) {
  SuiteResult r{"shift", false, {}, {}};
  const double starts[] = {0.0, 0.25, 0.5, 0.75};
  std::vector<std::vector<double>> samples;
  for (std::uint64_t k = 0; k < 4; ++k) {
    std::vector<double> times;
    for (std::uint64_t i = 0; i < trials; ++i) {
      auto bars = sample_bars(shape, cfg.t, trial_seed(cfg.seed + k, Purpose::Shift, i));
      times.push_back(return_time(bars, PolePoint{kRoot, starts[k]}).value_or(std::numeric_limits<double>::infinity()));
    }
    samples.push_back(std::move(times));
  }
  double worst = 1.0;
  for (int a = 0; a < 4; ++a) {
    for (int b = a + 1; b < 4; ++b) worst = std::min(worst, ks_two_sample(samples[a], samples[b]).p_value);
  }
  r.pass = worst > 0.001;
  r.detail = "smallest pairwise KS p-value " + fmt(worst);
  if (!r.pass) r.replay_seed = cfg.seed;
  return r;
}

SuiteResult suite_russo(const RunConfig& cfg, const TreeShape& shape, std::uint64_t trials) {
  SuiteResult r{"russo", false, {}, {}};
  double h = cfg.fd_step.value_or(0.1 / cfg.d);
  if (!(h > 0.0 && h < cfg.t)) {
    r.pass = true;
    r.detail = "skipped: needs 0 < fd_step < t";
    return r;
  }
  auto res = russo_check(shape, cfg.t, h, trials, cfg.seed, cfg.workers);
  r.pass = std::abs(res.zscore) < 3.0;
  r.detail = "lhs " + fmt(res.lhs.mean) + " rhs " + fmt(res.rhs.mean) + " z " + fmt(res.zscore);
  if (shape.n() >= 2) {
    auto gain = nobar_gain_check(shape, cfg.t, trials, cfg.seed, cfg.workers);
    r.pass = r.pass && std::abs(gain.zscore) < 4.0;
    r.detail += "; NoBar gain " + fmt(gain.gain.mean) + " vs p_(n-1) " + fmt(gain.p_prev.mean);
  }
  if (!r.pass) r.replay_seed = cfg.seed;
  return r;
}

SuiteResult suite_tails(const RunConfig& cfg, const TreeShape& shape, std::uint64_t trials) {
  SuiteResult r{"tails", false, {}, {}};
  auto rep = tail_checks(shape, cfg.t, trials, cfg.seed, cfg.workers);
  r.pass = !rep.any_violation();
  r.detail = std::to_string(rep.cluster.size() + rep.level_visits.size()) + " tail rows checked";
  if (!rep.notice.empty()) r.detail += "; " + rep.notice;
  if (!r.pass) r.replay_seed = cfg.seed;
  return r;
}

SuiteResult suite_conditional(const RunConfig& cfg, const TreeShape& shape) {
  constexpr int kInstances = 50;
  constexpr int kPerInstance = 100;
  SuiteResult r{"conditional", false, {}, {}};
  std::vector<double> rejection;
  std::vector<double> direct;
  std::uint64_t disagreements = 0;
  for (std::uint64_t j = 0; j < kInstances; ++j) {
    auto seed = trial_seed(cfg.seed, Purpose::Conditional, j);
    auto bars = sample_bars(shape, cfg.t, seed);
    MeanderEngine engine(bars);
    auto hit = hit_level_n(engine);
    auto vl = viloc(bars, hit.trajectory);
    Stream propose(seed, {1});
    Stream uniform(seed, {2});
    for (int accepted = 0; accepted < kPerInstance;) {
      Bar a = sample_added(shape, propose);
      if (bars.contains(a)) continue;
      auto rec = detect(engine, hit, a, EventConfig{cfg.n1});
      bool in_set = rec.crossed && !rec.bottleneck;
      if (in_set != vl.contains(a)) {
        ++disagreements;
        if (!r.replay_seed) r.replay_seed = seed;
      }
      if (in_set) {
        rejection.push_back(vl.cdf(a));
        ++accepted;
      }
    }
    for (int s = 0; s < kPerInstance; ++s) direct.push_back(vl.cdf(sample_uniform_on(vl, uniform)));
  }
  auto ks = ks_two_sample(rejection, direct);
  r.pass = ks.p_value > 0.001 && disagreements == 0;
  r.detail = "KS p-value " + fmt(ks.p_value) + ", " + std::to_string(disagreements) + " membership disagreements";
  if (!r.pass && !r.replay_seed) r.replay_seed = cfg.seed;
  return r;
}

int replay_instance(const RunConfig& cfg, const TreeShape& shape, std::uint64_t seed, std::ostream& os) {
  auto bars = sample_bars(shape, cfg.t, seed);
  json j = {{"schema", kSchemaVersion}, {"replay_seed", seed}, {"bars", bars_to_json(bars)}};
  bool ok = true;
  try {
    j["trajectory"] = trajectory_to_json(shape, hit_level_n(bars).trajectory);
    if (cfg.only == "oracle") {
      ok = sigma_all(bars) == transposition_oracle(bars);
      j["oracle_match"] = ok;
    } else {
      Bar a = added_for(shape, seed);
      j["events"] = event_to_json(shape, detect(bars, a, EventConfig{cfg.n1}));
      auto v = check_inclusions(bars, a, EventConfig{cfg.n1});
      j["violations"] = v;
      ok = v.empty();
    }
  } catch (const EngineError& e) {
    j["engine_error"] = e.what();
    ok = false;
  }
  os << j.dump() << "\n";
  return ok ? 0 : 1;
}

int cmd_verify(const RunConfig& cfg, std::ostream& os) {
  TreeShape shape(cfg.d, parse_depths(cfg.n_text).front());
  if (cfg.inject_fault == "right-continuity") {
    set_engine_fault(EngineFault::SkipRightContinuity);
  } else if (!cfg.inject_fault.empty()) {
    throw UsageError("unknown fault '" + cfg.inject_fault + "'");
  }
  struct FaultReset {
    ~FaultReset() { set_engine_fault(EngineFault::None); }
  } reset;

  const std::vector<std::string> names = {"inclusions", "oracle", "shift", "russo", "tails", "conditional"};
  if (!cfg.only.empty() && std::find(names.begin(), names.end(), cfg.only) == names.end()) {
    throw UsageError("unknown subsuite '" + cfg.only + "'");
  }
  if (cfg.replay) {
    if (cfg.only != "inclusions" && cfg.only != "oracle") {
      throw UsageError("--replay needs --only inclusions or --only oracle");
    }
    return replay_instance(cfg, shape, *cfg.replay, os);
  }

  auto trials = trials_or(cfg, 2'000);
  std::vector<SuiteResult> results;
  auto wanted = [&](const std::string& name) { return cfg.only.empty() || cfg.only == name; };
  auto guarded = [&](const std::string& name, std::function<SuiteResult()> fn) {
    if (!wanted(name)) return;
    try {
      results.push_back(fn());
    } catch (const EngineError& e) {
      results.push_back({name, false, std::string("engine error: ") + e.what(), cfg.seed});
    }
  };
  reset_engine_stats();
  guarded("inclusions", [&] { return suite_inclusions(cfg, shape, trials); });
  guarded("oracle", [&] { return suite_oracle(cfg, shape, trials); });
  guarded("shift", [&] { return suite_shift(cfg, shape, trials); });
  guarded("russo", [&] { return suite_russo(cfg, shape, trials); });
  guarded("tails", [&] { return suite_tails(cfg, shape, trials); });
  guarded("conditional", [&] { return suite_conditional(cfg, shape); });

  auto& stats = engine_stats();
  SuiteResult engine{"engine", false, {}, {}};
  engine.pass = stats.violations.load() == 0 && stats.bound_checks.load() == stats.runs.load();
  engine.detail = std::to_string(stats.runs.load()) + " runs, " + std::to_string(stats.violations.load()) +
                  " bound or dichotomy violations";
  results.push_back(engine);

  bool all = true;
  json verdict = {{"schema", kSchemaVersion}, {"suites", json::array()}};
  for (const auto& r : results) {
    all = all && r.pass;
    os << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail;
    if (!r.pass && r.replay_seed) os << " (replay seed " << *r.replay_seed << ")";
    os << "\n";
    json s = {{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}};
    s["replay_seed"] = r.replay_seed ? json(*r.replay_seed) : json(nullptr);
    verdict["suites"].push_back(s);
  }
  verdict["pass"] = all;
  if (!cfg.out.empty()) {
    std::ofstream file(cfg.out);
    if (!file) throw UsageError("cannot open output file " + cfg.out);
    file << verdict.dump(2) << "\n";
  }
  return all ? 0 : 1;
}

// scan --------------------------------------------------------------------

int cmd_scan(const RunConfig& cfg, std::ostream& os) {
  auto depths = parse_depths(cfg.n_text);
  auto grid = parse_grid(cfg.t_grid);
  auto table = critical_scan(cfg.d, depths, grid, trials_or(cfg, 1'000), cfg.seed, cfg.workers);
  if (cfg.format == "csv") {
    os << csv_row(scan_csv_columns());
    for (const auto& row : table.rows) os << csv_row(scan_csv_fields(table, row));
  } else {
    for (const auto& row : table.rows) os << scan_row_to_json(table, row).dump() << "\n";
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random stirring on rooted d-ary trees via the cyclic-time random meander", "treecycles"};
  app.require_subcommand(1);
  RunConfig cfg;
  OptionMap sim_opts, est_opts, ver_opts, scan_opts;

  auto* sim = app.add_subcommand("sim", "sample (B, A) instances and print cycle and event rows");
  add_common(sim, cfg, sim_opts);

  auto* est = app.add_subcommand("estimate", "Monte Carlo estimators");
  add_common(est, cfg, est_opts);
  est->add_option("kind", cfg.kind, "pn | z | tail | gw | russo")->required();
  est_opts["fd-step"] = est->add_option("--fd-step", cfg.fd_step, "finite-difference step (default 0.1/d)");

  auto* ver = app.add_subcommand("verify", "run the invariant suite");
  add_common(ver, cfg, ver_opts);
  ver->add_option("--only", cfg.only, "inclusions | oracle | shift | russo | tails | conditional");
  ver->add_option("--replay", cfg.replay, "replay one instance by its trial seed");
  ver_opts["fd-step"] = ver->add_option("--fd-step", cfg.fd_step, "finite-difference step (default 0.1/d)");
  ver->add_option("--inject-fault", cfg.inject_fault)->group("");

  auto* scan = app.add_subcommand("scan", "p_n over a rate grid");
  add_common(scan, cfg, scan_opts);
  scan_opts["t-grid"] = scan->add_option("--t-grid", cfg.t_grid, "lo:hi:step");

  std::vector<std::string> args;
  for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (sim->parsed()) {
      merge_config(cfg, sim_opts);
      validate(cfg, true);
      Output o(cfg.out, out);
      return cmd_sim(cfg, *o);
    }
    if (est->parsed()) {
      merge_config(cfg, est_opts);
      validate(cfg, true);
      Output o(cfg.out, out);
      return cmd_estimate(cfg, *o);
    }
    if (ver->parsed()) {
      if (ver_opts["d"]->count() == 0) cfg.d = 3;
      if (ver_opts["n"]->count() == 0) cfg.n_text = "3";
      if (ver_opts["t"]->count() == 0) cfg.t = 0.33;
      merge_config(cfg, ver_opts);
      validate(cfg, true);
      return cmd_verify(cfg, out);
    }
    if (scan->parsed()) {
      merge_config(cfg, scan_opts);
      validate(cfg, false);
      Output o(cfg.out, out);
      return cmd_scan(cfg, *o);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const CapacityError& e) {
    err << "capacity error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace treecycles
