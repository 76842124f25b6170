#include "treecycles/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "treecycles/events.hpp"
#include "treecycles/parallel.hpp"
#include "treecycles/rng.hpp"
#include "treecycles/stats.hpp"

namespace treecycles {

namespace {

constexpr std::uint64_t kEagerEdgeLimit = 4096;
constexpr int kTailLevels = 4;

struct Count {
  std::uint64_t hits = 0;
  void merge(const Count& o) { hits += o.hits; }
};

struct Counts {
  std::vector<std::uint64_t> hits;
  void bump(std::size_t i, std::size_t size) {
    if (hits.size() < size) hits.resize(size, 0);
    ++hits[i];
  }
  void merge(const Counts& o) {
    if (hits.size() < o.hits.size()) hits.resize(o.hits.size(), 0);
    for (std::size_t i = 0; i < o.hits.size(); ++i) hits[i] += o.hits[i];
  }
  std::uint64_t at(std::size_t i) const { return i < hits.size() ? hits[i] : 0; }
};

struct MomentSet {
  std::vector<Moments> m;
  void merge(const MomentSet& o) {
    if (m.size() < o.m.size()) m.resize(o.m.size());
    for (std::size_t i = 0; i < o.m.size(); ++i) m[i].merge(o.m[i]);
  }
};

Estimate from_moments(const Moments& m, std::uint64_t seed, std::string label) {
  return Estimate{m.mean(), m.stderr_of_mean(), m.count(), seed, std::move(label)};
}

void check_trials(std::uint64_t trials) {
  if (trials == 0) throw std::invalid_argument("trials must be >= 1");
}

BarCollection thinned(const TreeShape& shape, double t, double t_max, std::uint64_t seed) {
  return BarCollection::from_field(shape, PoissonField{t, t_max, seed});
}

}  // namespace

Estimate bernoulli_estimate(std::uint64_t successes, std::uint64_t trials, std::uint64_t seed, std::string label) {
  check_trials(trials);
  double p = static_cast<double>(successes) / static_cast<double>(trials);
  return Estimate{p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials)), trials, seed, std::move(label)};
}

BarCollection sample_bars(const TreeShape& shape, double t, std::uint64_t seed) {
  if (shape.edge_count() <= kEagerEdgeLimit) {
    Stream stream(seed, {static_cast<std::uint64_t>(Purpose::Eager)});
    return sample_poisson(shape, t, stream);
  }
  return poisson_field(shape, t, seed);
}

Estimate estimate_pn(const TreeShape& shape, double t, std::uint64_t trials, std::uint64_t seed, int workers) {
  check_trials(trials);
  auto total = run_trials<Count>(trials, workers, [&](Count& acc, std::uint64_t i) {
    auto bars = sample_bars(shape, t, trial_seed(seed, Purpose::Bars, i));
    if (hit_level_n(bars).reached) ++acc.hits;
  });
  return bernoulli_estimate(total.hits, trials, seed, "p_n");
}

RussoResult russo_check(const TreeShape& shape, double t, double fd_step, std::uint64_t trials, std::uint64_t seed,
                        int workers) {
  check_trials(trials);
  if (!(fd_step > 0.0 && fd_step < t)) throw std::invalid_argument("russo_check needs 0 < fd_step < t");
  const double edges = static_cast<double>(shape.edge_count());

  auto lhs = run_trials<Moments>(trials, workers, [&](Moments& acc, std::uint64_t i) {
    auto bars = sample_bars(shape, t, trial_seed(seed, Purpose::RussoLhs, i));
    Stream stream(trial_seed(seed, Purpose::Added, i), {});
    Bar a = sample_added(shape, stream);
    double x = 0.0;
    if (!bars.contains(a)) {
      bool before = hit_level_n(bars).reached;
      bool after = hit_level_n(bars.with_bar(a)).reached;
      x = edges * ((!before && after ? 1.0 : 0.0) - (before && !after ? 1.0 : 0.0));
    }
    acc.add(x);
  });

  const double h = fd_step;
  const bool five_point = 2.0 * h < t;
  const double t_max = five_point ? t + 2.0 * h : t + h;
  // Moments: 0 central difference, 1 third difference, 2 five-point stencil.
  auto rhs = run_trials<MomentSet>(trials, workers, [&](MomentSet& acc, std::uint64_t i) {
    auto field_seed = trial_seed(seed, Purpose::RussoRhs, i);
    auto at = [&](double rate) { return hit_level_n(thinned(shape, rate, t_max, field_seed)).reached ? 1.0 : 0.0; };
    double p1 = at(t + h);
    double m1 = at(t - h);
    acc.m.resize(3);
    acc.m[0].add((p1 - m1) / (2.0 * h));
    if (five_point) {
      double p2 = at(t + 2.0 * h);
      double m2 = at(t - 2.0 * h);
      acc.m[1].add((p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2.0 * h * h * h));
      acc.m[2].add((-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h));
    } else {
      acc.m[1].add(0.0);
      acc.m[2].add((p1 - m1) / (2.0 * h));
    }
  });

  RussoResult out;
  out.lhs = from_moments(lhs, seed, "pivotal");
  out.rhs = from_moments(rhs.m[0], seed, "central_difference");
  out.corrected = from_moments(rhs.m[2], seed, "five_point");
  out.third_derivative = rhs.m[1].mean();
  out.bias_allowance = h * h * out.third_derivative / 6.0;
  double se = std::hypot(out.lhs.std_error, out.corrected.std_error);
  out.zscore = se > 0.0 ? (out.lhs.mean - out.rhs.mean + out.bias_allowance) / se : 0.0;
  double se_plain = std::hypot(out.lhs.std_error, out.rhs.std_error);
  out.zscore_uncorrected = se_plain > 0.0 ? (out.lhs.mean - out.rhs.mean) / se_plain : 0.0;
  return out;
}

GainCheck nobar_gain_check(const TreeShape& shape, double t, std::uint64_t trials, std::uint64_t seed, int workers) {
  check_trials(trials);
  if (shape.n() < 2) throw std::invalid_argument("nobar_gain_check needs n >= 2");
  const int d = shape.d();
  auto total = run_trials<Count>(trials, workers, [&](Count& acc, std::uint64_t i) {
    auto bars = sample_bars(shape, t, trial_seed(seed, Purpose::Bars, i));
    for (int k = 0; k < d; ++k) bars = bars.with_edge_cleared(shape.child_edge(kRoot, k));
    Stream stream(trial_seed(seed, Purpose::Added, i), {});
    Bar a{shape.child_edge(kRoot, static_cast<int>(stream.below(static_cast<std::uint64_t>(d)))), stream.uniform()};
    if (hit_level_n(bars).reached) throw std::logic_error("meander left the root pole without a bar on E_0");
    if (hit_level_n(bars.with_bar(a)).reached) ++acc.hits;
  });
  GainCheck out;
  out.gain = bernoulli_estimate(total.hits, trials, seed, "gain_given_nobar");
  out.p_prev = estimate_pn(TreeShape(d, shape.n() - 1), t, trials, trial_seed(seed, Purpose::Plugin, 0), workers);
  out.p_prev.label = "p_n_minus_1";
  double se = std::hypot(out.gain.std_error, out.p_prev.std_error);
  out.zscore = se > 0.0 ? (out.gain.mean - out.p_prev.mean) / se : 0.0;
  return out;
}

Estimate z_estimate(const TreeShape& shape, double t, std::uint64_t trials, std::uint64_t seed, int workers) {
  check_trials(trials);
  auto total = run_trials<Moments>(trials, workers, [&](Moments& acc, std::uint64_t i) {
    auto bars = sample_bars(shape, t, trial_seed(seed, Purpose::Bars, i));
    acc.add(measure(viloc(bars)));
  });
  return from_moments(total, seed, "Z");
}

double cluster_tail_bound(int d, double t, int ell) {
  double tau = t * d;
  return 1.1 * std::exp(-1.0) * std::pow(std::exp(1.0) * tau * tau / d, ell);
}

std::vector<std::uint64_t> level_visit_counts(const TreeShape& shape, const Trajectory& trajectory) {
  std::vector<std::set<std::uint64_t>> seen(static_cast<std::size_t>(shape.n()) + 1);
  for (const auto& s : trajectory.segments) seen[static_cast<std::size_t>(shape.level(s.vertex))].insert(s.vertex.index);
  std::vector<std::uint64_t> out;
  for (const auto& level : seen) out.push_back(level.size());
  return out;
}

bool TailReport::any_violation() const {
  return std::any_of(cluster.begin(), cluster.end(), [](const auto& r) { return r.violated; }) ||
         std::any_of(level_visits.begin(), level_visits.end(), [](const auto& r) { return r.violated; });
}

TailReport tail_checks(const TreeShape& shape, double t, std::uint64_t trials, std::uint64_t seed, int workers) {
  check_trials(trials);
  const int d = shape.d();
  const int n = shape.n();
  const double tau = t * d;
  TailReport report;
  report.cluster_checked = d >= 11.0 * tau * tau;
  if (!report.cluster_checked) report.notice = "multi-cluster tail skipped: d < 11 tau^2";

  // Slots: [0, kTailLevels) cluster tails, then (level i, k) pairs.
  auto slot = [&](int level, int k) {
    return static_cast<std::size_t>(kTailLevels + (level - 1) * kTailLevels + (k - 1));
  };
  const std::size_t slots = slot(n, 1);
  auto counts = run_trials<Counts>(trials, workers, [&](Counts& acc, std::uint64_t i) {
    auto bars = sample_bars(shape, t, trial_seed(seed, Purpose::Bars, i));
    acc.hits.resize(std::max(acc.hits.size(), slots), 0);
    if (report.cluster_checked) {
      auto size = multicluster(bars).size();
      for (int ell = 1; ell <= kTailLevels; ++ell) {
        if (size >= static_cast<std::size_t>(ell)) acc.bump(static_cast<std::size_t>(ell - 1), slots);
      }
    }
    auto visits = level_visit_counts(shape, hit_level_n(bars).trajectory);
    for (int level = 1; level < n; ++level) {
      for (int k = 1; k <= kTailLevels; ++k) {
        if (visits[static_cast<std::size_t>(level)] >= static_cast<std::uint64_t>(k)) acc.bump(slot(level, k), slots);
      }
    }
  });

  if (report.cluster_checked) {
    for (int ell = 1; ell <= kTailLevels; ++ell) {
      ClusterTailRow row;
      row.ell = ell;
      row.empirical = bernoulli_estimate(counts.at(static_cast<std::size_t>(ell - 1)), trials, seed, "cluster_tail");
      row.bound = cluster_tail_bound(d, t, ell);
      row.violated = row.empirical.mean > row.bound + 4.0 * row.empirical.std_error;
      report.cluster.push_back(row);
    }
  }
  for (int level = 1; level < n; ++level) {
    auto plugin = estimate_pn(TreeShape(d, n - level), t, trials,
                              trial_seed(seed, Purpose::Plugin, static_cast<std::uint64_t>(n - level)), workers);
    for (int k = 1; k <= kTailLevels; ++k) {
      LevelVisitRow row;
      row.level = level;
      row.k = k;
      row.empirical = bernoulli_estimate(counts.at(slot(level, k)), trials, seed, "level_visit_tail");
      row.plugin_p = plugin.mean;
      double base = 1.0 - plugin.mean * std::exp(-t);
      row.bound = std::pow(base, k - 1);
      double slope = k >= 2 ? (k - 1) * std::pow(base, k - 2) * std::exp(-t) : 0.0;
      row.bound_error = slope * plugin.std_error;
      row.violated = row.empirical.mean > row.bound + 4.0 * std::hypot(row.empirical.std_error, row.bound_error);
      report.level_visits.push_back(row);
    }
  }
  return report;
}

GwResult gw_extinction(int d, double t) {
  if (d < 2 || !(t >= 0.0)) throw std::invalid_argument("gw_extinction needs d >= 2 and t >= 0");
  const double stay = std::exp(-t);
  auto f = [&](double s) { return std::pow((1.0 - stay) * s + stay, d); };
  GwResult out;
  double s = 0.0;
  for (out.iterations = 1; out.iterations <= 100'000'000; ++out.iterations) {
    double next = f(s);
    double step = std::abs(next - s);
    s = next;
    if (step < 1e-12) break;
  }
  out.q_ext = s;
  out.p_upper = 1.0 - s;
  if (d >= 6 && t <= 1.0 / d + 2.0 / (static_cast<double>(d) * d)) out.within_bound = out.p_upper <= 6.0 / d;
  return out;
}

ScanTable critical_scan(int d, const std::vector<int>& depths, const std::vector<double>& grid, std::uint64_t trials,
                        std::uint64_t seed, int workers) {
  check_trials(trials);
  if (grid.empty()) throw std::invalid_argument("empty rate grid");
  if (depths.empty()) throw std::invalid_argument("empty depth list");
  ScanTable table;
  table.d = d;
  table.depths = depths;
  std::sort(table.depths.begin(), table.depths.end());
  table.depths.erase(std::unique(table.depths.begin(), table.depths.end()), table.depths.end());
  table.grid = grid;
  std::sort(table.grid.begin(), table.grid.end());
  table.bracket_lo = 1.0 / d + 1.0 / (2.0 * d * d);
  table.bracket_hi = 1.0 / d + 2.0 / (static_cast<double>(d) * d);
  const double t_max = table.grid.back();
  if (t_max < 0.0) throw std::invalid_argument("rates must be >= 0");

  std::vector<TreeShape> shapes;
  for (int n : table.depths) shapes.emplace_back(d, n);
  const std::size_t cells = shapes.size() * table.grid.size();
  auto counts = run_trials<Counts>(trials, workers, [&](Counts& acc, std::uint64_t i) {
    auto field_seed = trial_seed(seed, Purpose::Bars, i);
    acc.hits.resize(std::max(acc.hits.size(), cells), 0);
    for (std::size_t a = 0; a < shapes.size(); ++a) {
      for (std::size_t b = 0; b < table.grid.size(); ++b) {
        if (hit_level_n(thinned(shapes[a], table.grid[b], t_max, field_seed)).reached) {
          acc.bump(a * table.grid.size() + b, cells);
        }
      }
    }
  });
  for (std::size_t a = 0; a < shapes.size(); ++a) {
    for (std::size_t b = 0; b < table.grid.size(); ++b) {
      table.rows.push_back({d, table.depths[a], table.grid[b],
                            bernoulli_estimate(counts.at(a * table.grid.size() + b), trials, seed, "p_n")});
    }
  }
  return table;
}

MonotonicityReport monotonicity_check(const TreeShape& shape, const std::vector<double>& rates, std::uint64_t trials,
                                      std::uint64_t seed, int workers) {
  check_trials(trials);
  if (rates.empty()) throw std::invalid_argument("empty rate list");
  auto sorted = rates;
  std::sort(sorted.begin(), sorted.end());
  const double t_max = sorted.back();
  struct Partial {
    std::uint64_t violations = 0;
    std::optional<std::uint64_t> first;
    void merge(const Partial& o) {
      violations += o.violations;
      if (!first) first = o.first;
    }
  };
  auto total = run_trials<Partial>(trials, workers, [&](Partial& acc, std::uint64_t i) {
    auto field_seed = trial_seed(seed, Purpose::Bars, i);
    bool previous = false;
    for (double t : sorted) {
      bool now = hit_level_n(thinned(shape, t, t_max, field_seed)).reached;
      if (previous && !now) {
        ++acc.violations;
        if (!acc.first) acc.first = i;
        break;
      }
      previous = now;
    }
  });
  return MonotonicityReport{trials, total.violations, total.first};
}

}  // namespace treecycles
