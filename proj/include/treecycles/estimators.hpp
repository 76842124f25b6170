#pragma once

// Monte Carlo estimators over seeded trial schedules. Every result is a pure
// function of its parameters and seed, independent of the worker count.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "treecycles/bars.hpp"
#include "treecycles/meander.hpp"
#include "treecycles/tree.hpp"

namespace treecycles {

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::string label;
};

Estimate bernoulli_estimate(std::uint64_t successes, std::uint64_t trials, std::uint64_t seed, std::string label);

/// Poisson-t bars for one trial: eager multinomial sampling on small trees,
/// a lazily generated field above 4096 edges.
BarCollection sample_bars(const TreeShape& shape, double t, std::uint64_t trial_seed);

/// Fraction of trials in which the meander from the root origin reaches V_n.
Estimate estimate_pn(const TreeShape& shape, double t, std::uint64_t trials, std::uint64_t seed, int workers = 0);

struct RussoResult {
  Estimate lhs;        // |E| (P(P+) - P(P-))
  Estimate rhs;        // central difference of coupled p_n estimates
  Estimate corrected;  // five-point stencil, rhs minus the bias allowance
  double third_derivative = 0.0;
  double bias_allowance = 0.0;  // fd_step^2 * p'''/6, estimated
  double zscore = 0.0;          // (lhs - rhs + allowance) / combined stderr
  double zscore_uncorrected = 0.0;
};

/// Compares the pivotal representation of dp_n/dt against a finite
/// difference of p_n. The difference leg uses one field per trial at rate
/// t + 2 fd_step, thinned to t -+ fd_step and t -+ 2 fd_step.
RussoResult russo_check(const TreeShape& shape, double t, double fd_step, std::uint64_t trials, std::uint64_t seed,
                        int workers = 0);

struct GainCheck {
  Estimate gain;    // P(P+ | NoBar, A in E_0 x [0,1))
  Estimate p_prev;  // p_{n-1} from an independent run
  double zscore = 0.0;
};

GainCheck nobar_gain_check(const TreeShape& shape, double t, std::uint64_t trials, std::uint64_t seed,
                           int workers = 0);

/// Mean Lebesgue measure of the viable locations.
Estimate z_estimate(const TreeShape& shape, double t, std::uint64_t trials, std::uint64_t seed, int workers = 0);

struct ClusterTailRow {
  int ell = 0;
  Estimate empirical;
  double bound = 0.0;
  bool violated = false;
};

struct LevelVisitRow {
  int level = 0;
  int k = 0;
  Estimate empirical;
  double plugin_p = 0.0;
  double bound = 0.0;
  double bound_error = 0.0;
  bool violated = false;
};

struct TailReport {
  bool cluster_checked = false;
  std::string notice;
  std::vector<ClusterTailRow> cluster;
  std::vector<LevelVisitRow> level_visits;
  bool any_violation() const;
};

/// Multi-cluster tail P(|M_root| >= l), l = 1..4, against
/// 1.1 e^-1 (e tau^2 / d)^l (only when d >= 11 tau^2), and level-visit
/// tails against (1 - p_{n-i} e^-t)^(k-1) with a plug-in p_{n-i} from an
/// independent seed. A row is violated when the estimate exceeds the bound
/// by more than four combined standard errors.
TailReport tail_checks(const TreeShape& shape, double t, std::uint64_t trials, std::uint64_t seed, int workers = 0);

/// 1.1 e^-1 (e tau^2 / d)^l with tau = t d.
double cluster_tail_bound(int d, double t, int ell);

struct GwResult {
  double q_ext = 1.0;
  double p_upper = 0.0;
  int iterations = 0;
  /// p_upper <= 6/d, asserted when d >= 6 and t <= 1/d + 2/d^2.
  std::optional<bool> within_bound;
};

/// Smallest fixed point of f(s) = ((1 - e^-t) s + e^-t)^d by monotone
/// iteration from 0 until successive iterates differ by less than 1e-12.
GwResult gw_extinction(int d, double t);

struct ScanRow {
  int d = 0;
  int n = 0;
  double t = 0.0;
  Estimate estimate;
};

struct ScanTable {
  int d = 0;
  std::vector<int> depths;
  std::vector<double> grid;
  double bracket_lo = 0.0;  // 1/d + 1/(2 d^2)
  double bracket_hi = 0.0;  // 1/d + 2/d^2
  std::vector<ScanRow> rows;  // sorted by (n, t)
};

/// p_n over a grid of rates. Each trial draws one field at the largest rate
/// and thins it to every grid point, shared across depths.
ScanTable critical_scan(int d, const std::vector<int>& depths, const std::vector<double>& grid,
                        std::uint64_t trials, std::uint64_t seed, int workers = 0);

struct MonotonicityReport {
  std::uint64_t seeds = 0;
  std::uint64_t violations = 0;
  std::optional<std::uint64_t> first_violation;  // trial index
};

/// Counts trials whose indicator of {H_n < infinity} decreases along the
/// increasing rates under the thinning coupling.
MonotonicityReport monotonicity_check(const TreeShape& shape, const std::vector<double>& rates,
                                      std::uint64_t trials, std::uint64_t seed, int workers = 0);

/// Number of distinct level-i vertices the walk visits before H_n.
std::vector<std::uint64_t> level_visit_counts(const TreeShape& shape, const Trajectory& trajectory);

}  // namespace treecycles
