// Acceptance suite: one PASS/FAIL line per criterion. With no arguments all
// criteria run; `--only N` runs criterion N together with the engine-bound
// criterion 11 over the runs it made.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "treecycles/bars.hpp"
#include "treecycles/estimators.hpp"
#include "treecycles/events.hpp"
#include "treecycles/meander.hpp"
#include "treecycles/rng.hpp"
#include "treecycles/stats.hpp"
#include "treecycles/stirring.hpp"

using namespace treecycles;

namespace {

constexpr std::uint64_t kSeed = 20240611;

// Pinned thresholds.
constexpr double kSigmas = 4.0;
constexpr double kRussoZ = 3.0;
constexpr double kKsAlpha = 0.001;
constexpr double kFixedPointTol = 1e-9;

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Verdict oracle_equivalence() {
  constexpr std::uint64_t kInstances = 10'000;
  constexpr double kBudget = 30.0;
  auto t0 = std::chrono::steady_clock::now();
  std::uint64_t mismatches = 0;
  std::uint64_t total = 0;
  std::optional<std::uint64_t> first;
  std::uint64_t config = 0;
  for (int d : {2, 3}) {
    for (int n : {2, 3}) {
      for (double tau : {0.5, 1.0, 2.0}) {
        TreeShape shape(d, n);
        double t = tau / d;
        for (std::uint64_t i = 0; i < kInstances; ++i, ++total) {
          auto seed = trial_seed(kSeed + config, Purpose::Bars, i);
          auto bars = sample_bars(shape, t, seed);
          auto viaMeander = sigma_all(bars);
          if (!(viaMeander == transposition_oracle(bars)) || !viaMeander.is_bijection()) {
            ++mismatches;
            if (!first) first = seed;
          }
        }
        ++config;
      }
    }
  }
  double secs = seconds_since(t0);
  std::string detail = fmt("%llu mismatches over %llu instances in %.1f s (budget %.0f s)",
                           static_cast<unsigned long long>(mismatches), static_cast<unsigned long long>(total), secs,
                           kBudget);
  if (first) detail += fmt("; replay seed %llu", static_cast<unsigned long long>(*first));
  return {mismatches == 0 && secs < kBudget, detail};
}

Verdict analytic_p1() {
  constexpr std::uint64_t kTrials = 100'000;
  constexpr double kBudget = 30.0;
  auto t0 = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;
  std::uint64_t k = 0;
  for (auto [d, t] : std::vector<std::pair<int, double>>{{2, 0.3}, {3, 0.4}, {5, 0.2}}) {
    auto est = estimate_pn(TreeShape(d, 1), t, kTrials, kSeed + k++);
    double exact = 1.0 - std::exp(-d * t);
    double z = (est.mean - exact) / est.std_error;
    pass = pass && std::abs(est.mean - exact) <= kSigmas * est.std_error;
    detail += fmt("(d=%d,t=%.1f) %.5f vs %.5f z=%+.2f; ", d, t, est.mean, exact, z);
  }
  double secs = seconds_since(t0);
  detail += fmt("%.1f s (budget %.0f s)", secs, kBudget);
  return {pass && secs < kBudget, detail};
}

Verdict russo_formula() {
  constexpr std::uint64_t kTrials = 1'000'000;
  constexpr double kBudget = 300.0;
  auto t0 = std::chrono::steady_clock::now();
  auto r = russo_check(TreeShape(2, 2), 0.5, 0.05, kTrials, kSeed);
  double secs = seconds_since(t0);
  auto detail = fmt("lhs %.5f+-%.5f rhs %.5f+-%.5f allowance %+.5f z=%+.2f (uncorrected %+.2f); %.1f s", r.lhs.mean,
                    r.lhs.std_error, r.rhs.mean, r.rhs.std_error, r.bias_allowance, r.zscore, r.zscore_uncorrected,
                    secs);
  return {std::abs(r.zscore) < kRussoZ && secs < kBudget, detail};
}

Verdict inclusion_suite() {
  constexpr std::uint64_t kSamples = 100'000;
  constexpr double kBudget = 300.0;
  auto t0 = std::chrono::steady_clock::now();
  TreeShape shape(3, 4);
  std::uint64_t violations = 0;
  std::string first;
  std::uint64_t k = 0;
  for (double t : {0.2, 0.33, 0.5}) {
    for (std::uint64_t i = 0; i < kSamples; ++i) {
      auto seed = trial_seed(kSeed + k, Purpose::Bars, i);
      auto bars = sample_bars(shape, t, seed);
      Stream stream(trial_seed(kSeed + k, Purpose::Added, i), {});
      Bar a = sample_added(shape, stream);
      if (bars.contains(a)) continue;
      auto v = check_inclusions(bars, a);
      if (!v.empty()) {
        if (violations == 0) first = fmt("t=%.2f seed %llu: ", t, static_cast<unsigned long long>(seed)) + v.front();
        violations += v.size();
      }
    }
    ++k;
  }
  double secs = seconds_since(t0);
  auto detail = fmt("%llu violations over %llu samples in %.1f s", static_cast<unsigned long long>(violations),
                    static_cast<unsigned long long>(3 * kSamples), secs);
  if (!first.empty()) detail += "; first: " + first;
  return {violations == 0 && secs < kBudget, detail};
}

Verdict cluster_tail() {
  constexpr std::uint64_t kTrials = 1'000'000;
  constexpr double kBudget = 120.0;
  constexpr int d = 16;
  const double t = 1.0 / d;
  auto t0 = std::chrono::steady_clock::now();
  TreeShape shape(d, 4);
  std::uint64_t counts[4] = {0, 0, 0, 0};
  for (std::uint64_t i = 0; i < kTrials; ++i) {
    auto size = multicluster(sample_bars(shape, t, trial_seed(kSeed, Purpose::Bars, i))).size();
    for (int ell = 1; ell <= 3; ++ell) {
      if (size >= static_cast<std::size_t>(ell)) ++counts[ell];
    }
  }
  bool pass = true;
  std::string detail;
  for (int ell = 1; ell <= 3; ++ell) {
    auto est = bernoulli_estimate(counts[ell], kTrials, kSeed, "cluster_tail");
    double bound = cluster_tail_bound(d, t, ell);
    pass = pass && est.mean <= bound + kSigmas * est.std_error;
    detail += fmt("l=%d %.3g <= %.3g; ", ell, est.mean, bound);
  }
  double secs = seconds_since(t0);
  detail += fmt("%.1f s", secs);
  return {pass && secs < kBudget, detail};
}

Verdict z_bracket() {
  constexpr std::uint64_t kTrials = 100'000;
  constexpr double kBudget = 60.0;
  constexpr int d = 16;
  auto t0 = std::chrono::steady_clock::now();
  auto z = z_estimate(TreeShape(d, 4), 1.0 / d, kTrials, kSeed);
  double lo = d * std::exp(-1.0);
  double hi = 1.2 * d;
  double secs = seconds_since(t0);
  bool pass = z.mean >= lo - kSigmas * z.std_error && z.mean <= hi + kSigmas * z.std_error;
  return {pass && secs < kBudget,
          fmt("Z = %.4f+-%.4f in [%.4f, %.4f]; %.1f s", z.mean, z.std_error, lo, hi, secs)};
}

Verdict shift_invariance() {
  constexpr std::uint64_t kTrials = 10'000;
  TreeShape shape(2, 4);
  const double t = 0.5;
  const double starts[] = {0.0, 0.25, 0.5, 0.75};
  std::vector<std::vector<double>> samples;
  for (std::uint64_t k = 0; k < 4; ++k) {
    std::vector<double> times;
    for (std::uint64_t i = 0; i < kTrials; ++i) {
      auto bars = sample_bars(shape, t, trial_seed(kSeed + k, Purpose::Shift, i));
      auto r = return_time(bars, PolePoint{kRoot, starts[k]});
      times.push_back(r.value_or(std::numeric_limits<double>::infinity()));
    }
    samples.push_back(std::move(times));
  }
  bool pass = true;
  double worst = 1.0;
  std::string detail;
  for (int a = 0; a < 4; ++a) {
    for (int b = a + 1; b < 4; ++b) {
      auto ks = ks_two_sample(samples[a], samples[b]);
      worst = std::min(worst, ks.p_value);
      pass = pass && ks.p_value > kKsAlpha;
    }
  }
  detail = fmt("6 pairwise KS tests, smallest p = %.4f (threshold %.3f)", worst, kKsAlpha);
  return {pass, detail};
}

Verdict conditional_sampler() {
  constexpr int kInstances = 100;
  constexpr int kPerInstance = 200;
  TreeShape shape(3, 3);
  const double t = 0.5;
  std::vector<double> rejection;
  std::vector<double> direct;
  std::uint64_t proposals = 0;
  std::uint64_t disagreements = 0;
  int used = 0;
  for (std::uint64_t j = 0; used < kInstances; ++j) {
    auto bars = sample_bars(shape, t, trial_seed(kSeed, Purpose::Conditional, j));
    MeanderEngine engine(bars);
    auto hit = hit_level_n(engine);
    auto vl = viloc(bars, hit.trajectory);
    if (measure(vl) <= 0.0) continue;
    ++used;
    Stream propose(trial_seed(kSeed, Purpose::Conditional, j), {1});
    Stream uniform(trial_seed(kSeed, Purpose::Conditional, j), {2});
    for (int accepted = 0; accepted < kPerInstance;) {
      Bar a = sample_added(shape, propose);
      if (bars.contains(a)) continue;
      ++proposals;
      auto rec = detect(engine, hit, a);
      bool hit_set = rec.crossed && !rec.bottleneck;
      if (hit_set != vl.contains(a)) ++disagreements;
      if (hit_set) {
        rejection.push_back(vl.cdf(a));
        ++accepted;
      }
    }
    for (int s = 0; s < kPerInstance; ++s) direct.push_back(vl.cdf(sample_uniform_on(vl, uniform)));
  }
  auto ks = ks_two_sample(rejection, direct);
  auto detail = fmt("KS D=%.4f p=%.4f over %zu+%zu pooled draws, %llu proposals, %llu membership disagreements",
                    ks.statistic, ks.p_value, rejection.size(), direct.size(),
                    static_cast<unsigned long long>(proposals), static_cast<unsigned long long>(disagreements));
  return {ks.p_value > kKsAlpha && disagreements == 0, detail};
}

// Smallest root of f(s) = s on [0, 1) by bisection: f(s) - s > 0 below the
// root and < 0 between it and 1 in the supercritical case.
double bisect_extinction(int d, double t) {
  double stay = std::exp(-t);
  auto g = [&](double s) { return std::pow((1.0 - stay) * s + stay, d) - s; };
  double mean = d * (1.0 - stay);
  if (mean <= 1.0) return 1.0;
  double lo = 0.0;
  double hi = 1.0 - 1e-9;
  while (g(hi) >= 0.0) hi = 1.0 - (1.0 - hi) * 2.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Verdict gw_bound() {
  constexpr std::uint64_t kTrials = 100'000;
  bool pass = true;
  std::string detail;
  std::uint64_t k = 0;
  for (int d : {6, 10, 20}) {
    double t = 1.0 / d + 2.0 / (static_cast<double>(d) * d);
    auto gw = gw_extinction(d, t);
    double oracle = bisect_extinction(d, t);
    bool fixed_ok = std::abs(gw.q_ext - oracle) <= kFixedPointTol;
    bool bound_ok = gw.within_bound.value_or(false) && gw.p_upper <= 6.0 / d;
    auto est = estimate_pn(TreeShape(d, 8), t, kTrials, kSeed + k++);
    bool pn_ok = est.mean <= gw.p_upper + kSigmas * est.std_error;
    pass = pass && fixed_ok && bound_ok && pn_ok;
    detail += fmt("d=%d p_upper=%.5f (6/d=%.3f, |q-oracle|=%.1e) p8=%.4f+-%.4f %s; ", d, gw.p_upper, 6.0 / d,
                  std::abs(gw.q_ext - oracle), est.mean, est.std_error, pn_ok ? "ok" : "ABOVE");
  }
  return {pass, detail};
}

Verdict monotone_coupling() {
  constexpr std::uint64_t kSeeds = 10'000;
  auto rep = monotonicity_check(TreeShape(3, 4), {0.2, 0.3, 0.4}, kSeeds, kSeed);
  auto detail = fmt("%llu of %llu seeds decrease in t", static_cast<unsigned long long>(rep.violations),
                    static_cast<unsigned long long>(rep.seeds));
  if (rep.first_violation) {
    detail += fmt("; replay trial %llu (seed %llu)", static_cast<unsigned long long>(*rep.first_violation),
                  static_cast<unsigned long long>(trial_seed(kSeed, Purpose::Bars, *rep.first_violation)));
  }
  return {rep.violations == 0, detail};
}

// With `full` the suite must also have exercised the engine and the
// hit/return dichotomy; a single other criterion may do neither.
Verdict engine_bounds(bool full) {
  auto& s = engine_stats();
  auto runs = s.runs.load();
  auto checks = s.bound_checks.load();
  auto dichotomy = s.dichotomy_checks.load();
  auto violations = s.violations.load();
  auto detail = fmt("%llu runs, %llu bound checks, %llu dichotomy checks, %llu violations",
                    static_cast<unsigned long long>(runs), static_cast<unsigned long long>(checks),
                    static_cast<unsigned long long>(dichotomy), static_cast<unsigned long long>(violations));
  bool exercised = runs > 0 && dichotomy > 0;
  return {checks == runs && violations == 0 && (exercised || !full), detail};
}

}  // namespace

int main(int argc, char** argv) {
  std::optional<int> only;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--only N]\n", argv[0]);
      return 2;
    }
  }
  std::vector<Criterion> criteria = {
      {1, "oracle equivalence", oracle_equivalence},
      {2, "analytic p_1", analytic_p1},
      {3, "derivative formula", russo_formula},
      {4, "exact inclusions", inclusion_suite},
      {5, "multi-cluster tail", cluster_tail},
      {6, "Z bracket", z_bracket},
      {7, "shift invariance", shift_invariance},
      {8, "conditional sampler", conditional_sampler},
      {9, "branching bound", gw_bound},
      {10, "per-seed t-monotonicity", monotone_coupling},
  };
  reset_engine_stats();
  int failures = 0;
  auto report = [&](int id, const char* name, const Verdict& v) {
    std::printf("[%s] C%02d %s: %s\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str());
    std::fflush(stdout);
    if (!v.pass) ++failures;
  };
  for (const auto& c : criteria) {
    if (only && *only != c.id && *only != 11) continue;
    if (only && *only == 11) break;
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    report(c.id, c.name, v);
  }
  if (only && *only == 11) {
    for (const auto& c : criteria) {
      try {
        c.run();
      } catch (const std::exception&) {
      }
    }
  }
  report(11, "engine bounds", engine_bounds(!only || *only == 11));
  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
