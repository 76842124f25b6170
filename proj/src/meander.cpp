#include "treecycles/meander.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace treecycles {

namespace {

EngineStats g_stats;
std::atomic<EngineFault> g_fault{EngineFault::None};

const IntervalSet kEmptyPole{};

[[noreturn]] void violation(const std::string& what) {
  g_stats.violations.fetch_add(1, std::memory_order_relaxed);
  throw EngineError(what);
}

struct Candidate {
  double time;
  Outcome outcome;
  double height;
};

}  // namespace

const char* to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::HitLevelN: return "hit_level_n";
    case Outcome::ReturnedToStart: return "returned_to_start";
    case Outcome::HitRootOrigin: return "hit_root_origin";
    case Outcome::HitTarget: return "hit_target";
    case Outcome::TimeLimit: return "time_limit";
  }
  return "unknown";
}

EngineStats& engine_stats() { return g_stats; }

void reset_engine_stats() {
  g_stats.runs = 0;
  g_stats.bound_checks = 0;
  g_stats.dichotomy_checks = 0;
  g_stats.violations = 0;
}

void set_engine_fault(EngineFault fault) { g_fault.store(fault); }
EngineFault engine_fault() { return g_fault.load(); }

const IntervalSet& Trajectory::pole(Vertex v) const {
  auto it = coverage.find(v.index);
  return it == coverage.end() ? kEmptyPole : it->second;
}

Coverage Trajectory::coverage_before(double time) const {
  Coverage out;
  for (const auto& s : segments) {
    if (s.start_time >= time) break;
    double hi = std::min(s.hi, s.lo + (time - s.start_time));
    if (hi > s.lo) out[s.vertex.index].unite(s.lo, hi);
  }
  return out;
}

Vertex Trajectory::vertex_before(double time) const {
  for (const auto& s : segments) {
    if (s.start_time < time && time <= s.end_time()) return s.vertex;
  }
  return segments.empty() ? start.vertex : segments.back().vertex;
}

const std::vector<MeanderEngine::Joint>& MeanderEngine::joints(Vertex v) {
  auto [it, fresh] = joints_.try_emplace(v.index);
  if (!fresh) return it->second;
  const auto& shape = bars_.shape();
  auto& out = it->second;
  if (v != kRoot) {
    Edge up = shape.parent_edge(v);
    for (double h : bars_.heights(up)) out.push_back({h, shape.parent(v), up, Direction::UpToParent});
  }
  if (shape.level(v) < shape.n()) {
    for (int k = 0; k < shape.d(); ++k) {
      Edge down = shape.child_edge(v, k);
      for (double h : bars_.heights(down)) out.push_back({h, down.child, down, Direction::DownToChild});
    }
  }
  std::sort(out.begin(), out.end(), [](const Joint& a, const Joint& b) { return a.height < b.height; });
  return out;
}

Trajectory MeanderEngine::run(const PolePoint& start, const StopRule& stop) {
  const auto& shape = bars_.shape();
  if (!shape.contains(start.vertex) || !(start.height >= 0.0 && start.height < 1.0)) {
    throw std::out_of_range("meander start is not a point of a T_n pole");
  }
  g_stats.runs.fetch_add(1, std::memory_order_relaxed);
  const bool fault = g_fault.load(std::memory_order_relaxed) == EngineFault::SkipRightContinuity;

  Trajectory tr;
  tr.start = start;
  tr.end = start;

  if (stop.level_n && shape.level(start.vertex) == shape.n()) {
    tr.outcome = Outcome::HitLevelN;
    tr.touched_level_n = true;
    return tr;
  }

  std::map<std::pair<std::uint64_t, double>, int> crossed;
  Vertex v = start.vertex;
  double h = start.height;
  double clock = 0.0;
  bool inclusive = false;  // after a wrap, a joint at height 0 is met on arrival

  auto finish = [&](Outcome outcome, double at, PolePoint end) {
    tr.outcome = outcome;
    tr.elapsed = at;
    tr.end = end;
  };
  // Stop points met on arrival at (v, h) by a crossing or a wrap.
  auto arrival_stop = [&]() -> std::optional<Outcome> {
    PolePoint here{v, h};
    if (here == start) return Outcome::ReturnedToStart;
    if (stop.root_origin && here == kRootOrigin) return Outcome::HitRootOrigin;
    if (stop.target && here == *stop.target) return Outcome::HitTarget;
    return std::nullopt;
  };

  for (;;) {
    const auto& js = joints(v);
    auto next = inclusive || fault
                    ? std::lower_bound(js.begin(), js.end(), h,
                                       [](const Joint& j, double x) { return j.height < x; })
                    : std::upper_bound(js.begin(), js.end(), h,
                                       [](double x, const Joint& j) { return x < j.height; });
    double top = next == js.end() ? 1.0 : next->height;

    // Earliest stop inside the open segment (h, top) on pole v.
    std::optional<Candidate> best;
    auto offer = [&](const PolePoint& p, Outcome outcome) {
      if (p.vertex != v || p.height <= h || p.height >= top) return;
      double at = clock + (p.height - h);
      if (!best || at < best->time) best = Candidate{at, outcome, p.height};
    };
    offer(start, Outcome::ReturnedToStart);
    if (stop.root_origin) offer(kRootOrigin, Outcome::HitRootOrigin);
    if (stop.target) offer(*stop.target, Outcome::HitTarget);
    if (stop.time_limit && *stop.time_limit < clock + (top - h) &&
        (!best || *stop.time_limit < best->time)) {
      best = Candidate{*stop.time_limit, Outcome::TimeLimit, h + (*stop.time_limit - clock)};
    }

    double hi = best ? best->height : top;
    if (hi > h) {
      auto& pole = tr.coverage[v.index];
      if (pole.contains(h) || pole.meets_open(h, hi)) {
        violation("meander revisited pole " + shape.address(v) + " before returning to start");
      }
      pole.unite(h, hi);
      tr.segments.push_back({v, h, hi, clock});
    }

    if (best) {
      finish(best->outcome, best->time, PolePoint{v, best->height});
      break;
    }

    clock += top - h;
    if (next == js.end()) {
      h = 0.0;
      inclusive = true;
      ++tr.wraps;
      if (auto o = arrival_stop()) {
        finish(*o, clock, PolePoint{v, h});
        break;
      }
      if (stop.time_limit && *stop.time_limit == clock) {
        finish(Outcome::TimeLimit, clock, PolePoint{v, h});
        break;
      }
      continue;
    }

    const Joint& j = *next;
    if (++crossed[{j.edge.id(), j.height}] > 2) violation("a bar was crossed more than twice in one run");
    tr.crossings.push_back({Bar{j.edge, j.height}, j.direction, clock});
    v = j.other;
    h = j.height;
    inclusive = false;

    if (shape.level(v) == shape.n()) {
      tr.touched_level_n = true;
      if (stop.level_n) {
        finish(Outcome::HitLevelN, clock, PolePoint{v, h});
        break;
      }
    }
    if (auto o = arrival_stop()) {
      finish(*o, clock, PolePoint{v, h});
      break;
    }
  }

  // Termination bound: each bar at most twice, each pole at most once.
  g_stats.bound_checks.fetch_add(1, std::memory_order_relaxed);
  std::uint64_t poles = tr.coverage.size();
  std::uint64_t steps = tr.crossings.size() + tr.wraps;
  if (steps > 2 * crossed.size() + poles + 1) violation("meander exceeded the step bound");
  if (tr.elapsed > static_cast<double>(poles) + 1e-9) violation("meander exceeded the time bound");
  double covered = 0.0;
  for (const auto& [id, pole] : tr.coverage) covered += pole.measure();
  if (std::abs(covered - tr.elapsed) > 1e-9 * (1.0 + tr.elapsed)) {
    violation("covered measure differs from elapsed time");
  }
  return tr;
}

LevelHit hit_level_n(MeanderEngine& engine) {
  LevelHit out;
  out.trajectory = engine.run(kRootOrigin, StopRule::level_or_return());
  g_stats.dichotomy_checks.fetch_add(1, std::memory_order_relaxed);
  switch (out.trajectory.outcome) {
    case Outcome::HitLevelN:
      out.reached = true;
      out.time = out.trajectory.elapsed;
      break;
    case Outcome::ReturnedToStart:
      break;
    default:
      violation("hit_level_n ended in neither V_n nor the return to the root origin");
  }
  return out;
}

LevelHit hit_level_n(const BarCollection& bars) {
  MeanderEngine engine(bars);
  return hit_level_n(engine);
}

Vertex sigma_t(MeanderEngine& engine, Vertex v) {
  StopRule stop;
  stop.time_limit = 1.0;
  auto tr = engine.run(PolePoint{v, 0.0}, stop);
  return tr.end.vertex;
}

Vertex sigma_t(const BarCollection& bars, Vertex v) {
  MeanderEngine engine(bars);
  return sigma_t(engine, v);
}

std::optional<double> return_time(const BarCollection& bars, const PolePoint& start) {
  auto tr = run(bars, start, StopRule::level_or_return());
  if (tr.outcome == Outcome::ReturnedToStart) return tr.elapsed;
  return std::nullopt;
}

}  // namespace treecycles
