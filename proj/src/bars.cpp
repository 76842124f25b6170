#include "treecycles/bars.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace treecycles {

namespace {

constexpr std::uint64_t kMaterializeLimit = 10'000'000;

void check_bar(const TreeShape& shape, const Bar& b) {
  if (!shape.contains(b.edge)) throw std::out_of_range("bar edge is outside T_n");
  if (!(b.height >= 0.0 && b.height < 1.0)) throw std::domain_error("bar height must lie in [0, 1)");
}

// Sorts and redraws exact duplicates until heights are strictly increasing.
template <typename Redraw>
void make_distinct(std::vector<double>& hs, Redraw redraw) {
  std::sort(hs.begin(), hs.end());
  for (;;) {
    auto dup = std::adjacent_find(hs.begin(), hs.end());
    if (dup == hs.end()) return;
    *dup = redraw();
    std::sort(hs.begin(), hs.end());
  }
}

}  // namespace

Bar shift_bar(const TreeShape& shape, const Bar& b, Vertex v, double h) {
  Vertex upper = shape.upper(b.edge);
  if (!shape.is_descendant(upper, v)) throw std::domain_error("bar is not in the descendent tree of the anchor");
  double shifted = b.height - h;
  if (shifted < 0.0) shifted += 1.0;
  if (shifted >= 1.0) shifted = 0.0;
  return Bar{Edge{shape.strip_prefix(b.edge.child, v)}, shifted};
}

Bar unshift_bar(const TreeShape& shape, const Bar& b, Vertex v, double h) {
  double raised = b.height + h;
  if (raised >= 1.0) raised -= 1.0;
  return Bar{Edge{shape.concat(v, b.edge.child)}, raised};
}

BarCollection::BarCollection(TreeShape shape) : shape_(std::move(shape)) {}

BarCollection BarCollection::from_bars(TreeShape shape, const std::vector<Bar>& bars) {
  BarCollection out(std::move(shape));
  for (const auto& b : bars) {
    check_bar(out.shape_, b);
    out.edges_[b.edge.id()].push_back(b.height);
  }
  for (auto& [id, hs] : out.edges_) {
    std::sort(hs.begin(), hs.end());
    if (std::adjacent_find(hs.begin(), hs.end()) != hs.end()) {
      throw std::invalid_argument("two bars share an edge and a height");
    }
  }
  return out;
}

BarCollection BarCollection::from_field(TreeShape shape, PoissonField field) {
  if (!(field.t >= 0.0) || field.t_max < field.t) {
    throw std::invalid_argument("Poisson field needs 0 <= t <= t_max");
  }
  BarCollection out(std::move(shape));
  out.field_ = field;
  return out;
}

std::vector<double> field_heights(const PoissonField& field, Edge e) {
  if (field.t_max <= 0.0) return {};
  Stream stream(field.seed, {static_cast<std::uint64_t>(Purpose::Bars), e.id()});
  auto k = stream.poisson(field.t_max);
  if (k == 0) return {};
  std::vector<double> hs(k);
  for (auto& h : hs) h = stream.uniform();
  make_distinct(hs, [&] { return stream.uniform(); });
  // Marks are drawn after the heights are fixed, in height order.
  std::vector<double> kept;
  kept.reserve(k);
  double keep_fraction = field.t / field.t_max;
  for (double h : hs) {
    if (stream.uniform() < keep_fraction) kept.push_back(h);
  }
  return kept;
}

std::vector<double> BarCollection::heights(Edge e) const {
  if (auto it = edges_.find(e.id()); it != edges_.end()) return it->second;
  if (field_ && shape_.contains(e)) return field_heights(*field_, e);
  return {};
}

bool BarCollection::contains(const Bar& b) const {
  auto hs = heights(b.edge);
  return std::binary_search(hs.begin(), hs.end(), b.height);
}

BarCollection BarCollection::with_bar(const Bar& b) const {
  check_bar(shape_, b);
  auto hs = heights(b.edge);
  auto pos = std::lower_bound(hs.begin(), hs.end(), b.height);
  if (pos != hs.end() && *pos == b.height) throw std::invalid_argument("bar already present");
  hs.insert(pos, b.height);
  BarCollection out = *this;
  out.edges_[b.edge.id()] = std::move(hs);
  return out;
}

BarCollection BarCollection::with_edge_cleared(Edge e) const {
  BarCollection out = *this;
  if (field_) {
    out.edges_[e.id()] = {};
  } else {
    out.edges_.erase(e.id());
  }
  return out;
}

std::vector<Bar> BarCollection::materialize() const {
  std::vector<Bar> out;
  if (field_) {
    if (shape_.edge_count() > kMaterializeLimit) {
      throw CapacityError("refusing to materialize a lazy collection over more than 10^7 edges");
    }
    for (std::uint64_t id = 0; id < shape_.edge_count(); ++id) {
      Edge e = Edge::from_id(id);
      for (double h : heights(e)) out.push_back({e, h});
    }
    return out;
  }
  for (const auto& [id, hs] : edges_) {
    for (double h : hs) out.push_back({Edge::from_id(id), h});
  }
  return out;
}

BarCollection sample_poisson(const TreeShape& shape, double t, Stream& stream) {
  if (!(t >= 0.0)) throw std::invalid_argument("rate t must be >= 0");
  auto edges = shape.edge_count();
  auto total = stream.poisson(t * static_cast<double>(edges));
  std::map<std::uint64_t, std::vector<double>> placed;
  for (std::uint64_t i = 0; i < total; ++i) {
    auto id = stream.below(edges);
    placed[id].push_back(stream.uniform());
  }
  std::vector<Bar> bars;
  bars.reserve(total);
  for (auto& [id, hs] : placed) {
    make_distinct(hs, [&] { return stream.uniform(); });
    for (double h : hs) bars.push_back({Edge::from_id(id), h});
  }
  return BarCollection::from_bars(shape, bars);
}

BarCollection poisson_field(const TreeShape& shape, double t, std::uint64_t seed,
                            std::optional<double> t_max) {
  return BarCollection::from_field(shape, PoissonField{t, t_max.value_or(t), seed});
}

Bar sample_added(const TreeShape& shape, Stream& stream) {
  auto id = stream.below(shape.edge_count());
  return Bar{Edge::from_id(id), stream.uniform()};
}

LocationSet LocationSet::from_intervals(const std::map<std::uint64_t, std::vector<Interval>>& raw) {
  LocationSet out;
  for (const auto& [id, intervals] : raw) {
    auto set = IntervalSet::from_disjoint(intervals);
    if (!set.empty()) out.edges_[id] = std::move(set);
  }
  return out;
}

LocationSet LocationSet::full_edges(const std::vector<Edge>& edges) {
  LocationSet out;
  for (auto e : edges) out.edges_[e.id()] = IntervalSet::full();
  return out;
}

void LocationSet::unite(Edge e, const IntervalSet& heights) {
  if (heights.empty()) return;
  edges_[e.id()].unite(heights);
}

bool LocationSet::contains(const Bar& b) const {
  auto it = edges_.find(b.edge.id());
  return it != edges_.end() && it->second.contains(b.height);
}

double LocationSet::cdf(const Bar& b) const {
  double total = measure(*this);
  if (total <= 0.0) throw std::domain_error("CDF of an empty location set");
  double below = 0.0;
  for (const auto& [id, set] : edges_) {
    if (id < b.edge.id()) {
      below += set.measure();
      continue;
    }
    if (id > b.edge.id()) break;
    for (const auto& iv : set.pieces()) {
      if (iv.hi <= b.height) {
        below += iv.length();
      } else if (iv.lo < b.height) {
        below += b.height - iv.lo;
      }
    }
  }
  return below / total;
}

bool LocationSet::empty() const { return measure(*this) == 0.0; }

double measure(const LocationSet& set) {
  double total = 0.0;
  for (const auto& [id, s] : set.edges()) total += s.measure();
  return total;
}

Bar sample_uniform_on(const LocationSet& set, Stream& stream) {
  double total = measure(set);
  if (!(total > 0.0)) throw std::domain_error("cannot sample from a set of measure zero");
  double target = stream.uniform() * total;
  const Interval* last = nullptr;
  std::uint64_t last_id = 0;
  for (const auto& [id, s] : set.edges()) {
    for (const auto& iv : s.pieces()) {
      if (target < iv.length()) {
        double h = iv.lo + target;
        if (h >= iv.hi) h = std::nextafter(iv.hi, iv.lo);
        return Bar{Edge::from_id(id), h};
      }
      target -= iv.length();
      last = &iv;
      last_id = id;
    }
  }
  // Rounding left the target past the final piece.
  return Bar{Edge::from_id(last_id), std::nextafter(last->hi, last->lo)};
}

}  // namespace treecycles
