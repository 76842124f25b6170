#pragma once

// Cyclic-time random meander: rise at unit speed on the current pole, wrap
// from height 1 to 0, and jump to the other joint whenever a bar joint is
// reached. The engine is deterministic and event driven: it moves from one
// joint (or wrap) to the next, never in time steps.

#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "treecycles/bars.hpp"
#include "treecycles/interval_set.hpp"
#include "treecycles/tree.hpp"

namespace treecycles {

/// A point (v, h) of a pole.
struct PolePoint {
  Vertex vertex;
  double height = 0.0;

  friend bool operator==(const PolePoint&, const PolePoint&) = default;
};

inline constexpr PolePoint kRootOrigin{kRoot, 0.0};

enum class Direction { DownToChild, UpToParent };

struct Crossing {
  Bar bar;
  Direction direction;
  double time;
};

/// Time spent rising on one pole over the heights [lo, hi).
struct Segment {
  Vertex vertex;
  double lo;
  double hi;
  double start_time;

  double end_time() const { return start_time + (hi - lo); }
};

enum class Outcome { HitLevelN, ReturnedToStart, HitRootOrigin, HitTarget, TimeLimit };

const char* to_string(Outcome outcome);

/// Stop targets for a run. Return to the start point always stops the run.
struct StopRule {
  bool level_n = false;       // V_n x [0, 1)
  bool root_origin = false;   // (root, 0)
  std::optional<PolePoint> target;
  std::optional<double> time_limit;

  static StopRule level_or_return() { return StopRule{true, false, std::nullopt, std::nullopt}; }
};

using Coverage = std::map<std::uint64_t, IntervalSet>;

struct Trajectory {
  PolePoint start;
  std::vector<Crossing> crossings;
  std::vector<Segment> segments;
  Coverage coverage;  // visited heights per pole, keyed by vertex index
  Outcome outcome = Outcome::ReturnedToStart;
  double elapsed = 0.0;
  PolePoint end;
  bool touched_level_n = false;
  std::uint64_t wraps = 0;

  /// Visited heights on the pole at v (empty set if never visited).
  const IntervalSet& pole(Vertex v) const;
  bool visited(const PolePoint& p) const { return pole(p.vertex).contains(p.height); }
  /// X[0, time) as per-pole interval sets.
  Coverage coverage_before(double time) const;
  /// Left limit of the vertex component at the given time (time > 0).
  Vertex vertex_before(double time) const;
};

/// Raised when a run breaks an engine invariant (an injective trajectory
/// that crosses a bar more than twice or revisits a pole height). Always an
/// engine bug or an invalid bar configuration, never a sampling outcome.
class EngineError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Process-wide counters for the termination and dichotomy assertions.
struct EngineStats {
  std::atomic<std::uint64_t> runs{0};
  std::atomic<std::uint64_t> bound_checks{0};
  std::atomic<std::uint64_t> dichotomy_checks{0};
  std::atomic<std::uint64_t> violations{0};
};

EngineStats& engine_stats();
void reset_engine_stats();

/// Mutation hook for smoke tests of the verification suite.
enum class EngineFault { None, SkipRightContinuity };
void set_engine_fault(EngineFault fault);
EngineFault engine_fault();

/// Runs meanders over one bar collection. Keeps a lazily built joint index
/// per visited pole; one engine per thread.
class MeanderEngine {
 public:
  explicit MeanderEngine(const BarCollection& bars) : bars_(bars) {}

  const BarCollection& bars() const { return bars_; }

  /// Exact simulation from start until the first stop target or the return
  /// to start. A start on a joint does not cross that bar at time zero.
  Trajectory run(const PolePoint& start, const StopRule& stop);

 private:
  struct Joint {
    double height;
    Vertex other;
    Edge edge;
    Direction direction;
  };

  const std::vector<Joint>& joints(Vertex v);

  const BarCollection& bars_;
  std::unordered_map<std::uint64_t, std::vector<Joint>> joints_;
};

inline Trajectory run(const BarCollection& bars, const PolePoint& start, const StopRule& stop) {
  return MeanderEngine(bars).run(start, stop);
}

struct LevelHit {
  bool reached = false;
  std::optional<double> time;
  Trajectory trajectory;
};

/// Runs X^B from (root, 0) until V_n or the return to (root, 0). On T_n the
/// two outcomes are exhaustive; anything else is an EngineError.
LevelHit hit_level_n(const BarCollection& bars);
LevelHit hit_level_n(MeanderEngine& engine);

/// Vertex component of the meander from (v, 0) after elapsed time 1.
Vertex sigma_t(const BarCollection& bars, Vertex v);
Vertex sigma_t(MeanderEngine& engine, Vertex v);

/// Time of first return to start, or nullopt when V_n is hit first.
std::optional<double> return_time(const BarCollection& bars, const PolePoint& start);

}  // namespace treecycles
