#include "treecycles/events.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace treecycles {

namespace {

// x in the open arc (a, a + length) read modulo 1.
bool in_open_arc(double x, double a, double length) {
  double y = x - a;
  if (y < 0.0) y += 1.0;
  return y > 0.0 && y < length;
}

bool path_all_multi(const BarCollection& bars, Vertex v) {
  for (Edge e : bars.shape().path_to_root(v)) {
    if (bars.count(e) < 2) return false;
  }
  return true;
}

std::string edge_name(const TreeShape& shape, Edge e) { return "(" + shape.address(shape.upper(e)) + "," + shape.address(e.child) + ")"; }

}  // namespace

const char* to_string(Pivot pivot) {
  switch (pivot) {
    case Pivot::OnPivotal: return "on";
    case Pivot::OffPivotal: return "off";
    case Pivot::Neither: return "neither";
  }
  return "unknown";
}

const char* to_string(Boundary boundary) { return boundary == Boundary::FB ? "FB" : "CB"; }

bool meets_joint(const TreeShape& shape, const Trajectory& trajectory, const Bar& b) {
  return trajectory.pole(shape.upper(b.edge)).contains(b.height) ||
         trajectory.pole(shape.lower(b.edge)).contains(b.height);
}

EventRecord detect(MeanderEngine& engine, const LevelHit& hit, const Bar& added, const EventConfig& config) {
  const BarCollection& bars = engine.bars();
  const auto& shape = bars.shape();
  EventRecord rec;
  rec.added = added;
  rec.h_n_B = hit.reached;
  rec.h_n_BA = hit_level_n(bars.with_bar(added)).reached;
  if (!rec.h_n_B && rec.h_n_BA) rec.pivot = Pivot::OnPivotal;
  if (rec.h_n_B && !rec.h_n_BA) rec.pivot = Pivot::OffPivotal;

  rec.crossed = meets_joint(shape, hit.trajectory, added);
  auto path = shape.path_to_root(shape.upper(added.edge));
  rec.path_supported = std::all_of(path.begin(), path.end(), [&](Edge e) { return bars.count(e) >= 1; });

  int i = shape.n() - shape.level(added.edge.child);
  if (i >= 0 && i <= 2 * config.n1 - 1) rec.cb_prime_index = i;

  if (!rec.crossed) return rec;
  for (auto it = path.rbegin(); it != path.rend(); ++it) {
    auto hs = bars.heights(*it);
    if (hs.size() == 1) {
      rec.bottleneck = Bottleneck{*it, Bar{*it, hs.front()}};
      break;
    }
  }
  if (!rec.bottleneck) return rec;

  StopRule stop;
  stop.level_n = true;
  stop.root_origin = true;
  auto tr = engine.run(PolePoint{shape.upper(rec.bottleneck->edge), rec.bottleneck->bar.height}, stop);
  rec.no_escape = tr.outcome == Outcome::HitRootOrigin;
  rec.fb_cb = shape.level(rec.bottleneck->edge.child) <= shape.n() - 2 * config.n1 ? Boundary::FB : Boundary::CB;
  return rec;
}

EventRecord detect(const BarCollection& bars, const Bar& added, const EventConfig& config) {
  if (bars.contains(added)) throw std::invalid_argument("the added bar is already in B");
  MeanderEngine engine(bars);
  auto hit = hit_level_n(engine);
  return detect(engine, hit, added, config);
}

LocationSet viloc(const BarCollection& bars, const Trajectory& trajectory) {
  const auto& shape = bars.shape();
  std::set<std::uint64_t> candidates;  // edge ids with a visited endpoint pole
  for (const auto& [index, pole] : trajectory.coverage) {
    if (pole.empty()) continue;
    Vertex u{index};
    if (u != kRoot) candidates.insert(shape.parent_edge(u).id());
    if (shape.level(u) < shape.n()) {
      for (int k = 0; k < shape.d(); ++k) candidates.insert(shape.child_edge(u, k).id());
    }
  }
  LocationSet out;
  for (auto id : candidates) {
    Edge e = Edge::from_id(id);
    if (!path_all_multi(bars, shape.upper(e))) continue;
    IntervalSet heights = trajectory.pole(shape.upper(e));
    heights.unite(trajectory.pole(shape.lower(e)));
    out.unite(e, heights);
  }
  return out;
}

LocationSet viloc(const BarCollection& bars) { return viloc(bars, hit_level_n(bars).trajectory); }

ClusterReport multicluster(const BarCollection& bars, Vertex v) {
  const auto& shape = bars.shape();
  ClusterReport report;
  std::vector<Edge> candidates;
  auto add_below = [&](Vertex u) {
    if (shape.level(u) >= shape.n()) return;
    for (int k = 0; k < shape.d(); ++k) candidates.push_back(shape.child_edge(u, k));
  };
  add_below(v);
  for (std::size_t next = 0; next < candidates.size(); ++next) {
    Edge e = candidates[next];
    auto count = bars.count(e);
    if (count >= 2) {
      report.m_phi.push_back(e);
      if (shape.level(e.child) == shape.n()) report.truncated = true;
      add_below(e.child);
    } else {
      report.boundary.push_back(e);
      if (count == 1) ++report.single_bar_boundary_count;
    }
  }
  return report;
}

bool is_good(const BarCollection& bars, Edge e) {
  const auto& shape = bars.shape();
  auto hs = bars.heights(e);
  if (hs.size() != 1) return false;
  double s = hs.front();
  double arc = 1.0 / shape.d();
  Vertex top = shape.upper(e);
  bool free_sibling = false;
  for (int k = 0; k < shape.d(); ++k) {
    Edge sib = shape.child_edge(top, k);
    auto sib_heights = sib == e ? hs : bars.heights(sib);
    if (sib != e && sib_heights.empty()) free_sibling = true;
    for (double h : sib_heights) {
      if (in_open_arc(h, s, arc)) return false;
    }
  }
  if (!free_sibling) return false;
  if (top != kRoot) {
    for (double h : bars.heights(shape.parent_edge(top))) {
      if (in_open_arc(h, s, arc)) return false;
    }
  }
  return true;
}

GoodWpe good_and_wpe(const BarCollection& bars, Vertex at, const Coverage& coverage) {
  const auto& shape = bars.shape();
  GoodWpe out;
  double arc = 1.0 / shape.d();
  auto pole = [&](Vertex v) -> const IntervalSet* {
    auto it = coverage.find(v.index);
    return it == coverage.end() ? nullptr : &it->second;
  };
  for (Edge e : shape.path_to_root(at)) {
    if (is_good(bars, e)) out.good.push_back(e);
    Vertex top = shape.upper(e);
    if (top == kRoot) continue;
    auto hs = bars.heights(e);
    if (hs.size() != 1) continue;
    double s = hs.front();
    if (const auto* p = pole(top); p && p->meets_open_arc(s, arc)) continue;
    bool parent_bar_in_arc = false;
    for (double h : bars.heights(shape.parent_edge(top))) {
      if (in_open_arc(h, s, arc)) parent_bar_in_arc = true;
    }
    if (parent_bar_in_arc) continue;
    for (int k = 0; k < shape.d(); ++k) {
      Vertex w = shape.child(top, k);
      const auto* p = pole(w);
      if (!p || p->empty()) {
        out.wpe.push_back({e, w});
        break;
      }
    }
  }
  return out;
}

GoodWpe good_and_wpe(const BarCollection& bars, const Trajectory& trajectory, double at_time) {
  return good_and_wpe(bars, trajectory.vertex_before(at_time), trajectory.coverage_before(at_time));
}

std::vector<std::string> good_wpe_violations(const BarCollection& bars, const Trajectory& trajectory) {
  const auto& shape = bars.shape();
  std::vector<std::string> out;
  Coverage coverage;
  for (const auto& seg : trajectory.segments) {
    coverage[seg.vertex.index].unite(seg.lo, seg.hi);
    auto gw = good_and_wpe(bars, seg.vertex, coverage);
    for (Edge e : gw.good) {
      if (shape.upper(e) == kRoot) continue;
      bool witnessed = std::any_of(gw.wpe.begin(), gw.wpe.end(), [&](const EscapeWitness& w) { return w.edge == e; });
      if (!witnessed) {
        out.push_back("good edge " + edge_name(shape, e) + " is not a potential-escape witness at time " +
                      std::to_string(seg.end_time()));
      }
    }
  }
  return out;
}

RootStats root_stats(const BarCollection& bars, const ClusterReport& cluster, bool reached) {
  const auto& shape = bars.shape();
  RootStats out;
  out.no_bar = true;
  out.nqg = true;
  double quick = 1.0 / std::sqrt(static_cast<double>(shape.d()));
  for (int k = 0; k < shape.d(); ++k) {
    auto hs = bars.heights(shape.child_edge(kRoot, k));
    if (!hs.empty()) out.no_bar = false;
    if (!hs.empty() && hs.front() < quick) out.nqg = false;
    if (hs.size() == 1) ++out.s_count;
  }
  out.new_ev = cluster.m_phi.empty() && !reached;
  return out;
}

RootStats root_stats(const BarCollection& bars) {
  return root_stats(bars, multicluster(bars), hit_level_n(bars).reached);
}

bool no_bar_on_added_edge(const BarCollection& bars, const Bar& added) { return bars.count(added.edge) == 0; }

std::vector<std::string> check_inclusions(const BarCollection& bars, const Bar& added, const EventConfig& config) {
  const auto& shape = bars.shape();
  std::vector<std::string> out;
  MeanderEngine engine(bars);
  auto hit = hit_level_n(engine);
  auto rec = detect(engine, hit, added, config);
  bool pivotal = rec.pivot != Pivot::Neither;

  if (pivotal && !rec.crossed) out.push_back("pivotal without crossing");
  if (pivotal && rec.bottleneck && !(rec.crossed && rec.no_escape == true)) {
    out.push_back("pivotal with bottleneck but escape above it");
  }
  if (rec.crossed && !rec.path_supported) out.push_back("crossing with a bar-free edge on the root path");
  if (no_bar_on_added_edge(bars, added) && rec.pivot == Pivot::OffPivotal) {
    out.push_back("off-pivotal although E(A) supports no bar");
  }
  if (rec.cb_prime_index && *rec.cb_prime_index != shape.n() - shape.level(added.edge.child)) {
    out.push_back("CB' index does not match the level of E(A)^-");
  }

  auto cluster = multicluster(bars);
  auto vl = viloc(bars, hit.trajectory);
  std::set<std::uint64_t> explored;
  for (Edge e : cluster.m_phi) explored.insert(e.id());
  for (Edge e : cluster.boundary) explored.insert(e.id());
  for (const auto& [id, set] : vl.edges()) {
    if (!explored.count(id)) {
      out.push_back("viable location on " + edge_name(shape, Edge::from_id(id)) + " outside the multi-cluster closure");
    }
  }
  const auto d = static_cast<std::size_t>(shape.d());
  if (cluster.boundary.size() > d + (d - 1) * cluster.size()) out.push_back("exterior boundary too large");
  double size = measure(vl);
  for (std::size_t k = 0; size > static_cast<double>(d * k); ++k) {
    if (cluster.size() < k) {
      out.push_back("viable measure " + std::to_string(size) + " exceeds d*" + std::to_string(k) +
                    " with a smaller multi-cluster");
      break;
    }
  }
  bool in_viloc = vl.contains(added);
  bool c_bn_c = rec.crossed && !rec.bottleneck;
  if (in_viloc != c_bn_c) out.push_back("A in ViLoc disagrees with C and not BN");

  auto stats = root_stats(bars, cluster, hit.reached);
  if (stats.new_ev) {
    std::vector<Edge> e0;
    for (int k = 0; k < shape.d(); ++k) e0.push_back(shape.child_edge(kRoot, k));
    if (!(vl == LocationSet::full_edges(e0))) out.push_back("NewEv without ViLoc = E_0 x [0,1)");
  }
  if (stats.no_bar && !stats.nqg) out.push_back("NoBar without NQG");

  for (auto& msg : good_wpe_violations(bars, hit.trajectory)) out.push_back(std::move(msg));
  return out;
}

}  // namespace treecycles
