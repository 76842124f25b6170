#include "treecycles/stirring.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "treecycles/meander.hpp"

namespace treecycles {

Vertex Permutation::operator()(Vertex v) const {
  auto it = map_.find(v.index);
  return it == map_.end() ? v : Vertex{it->second};
}

void Permutation::set(Vertex v, Vertex image) {
  if (v == image) {
    map_.erase(v.index);
  } else {
    map_[v.index] = image.index;
  }
}

std::vector<Vertex> Permutation::support() const {
  std::vector<Vertex> out;
  out.reserve(map_.size());
  for (const auto& [from, to] : map_) out.push_back(Vertex{from});
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<Vertex>> Permutation::cycles() const {
  std::vector<std::vector<Vertex>> out;
  std::set<std::uint64_t> seen;
  for (Vertex v : support()) {
    if (seen.count(v.index)) continue;
    std::vector<Vertex> cycle;
    Vertex w = v;
    do {
      seen.insert(w.index);
      cycle.push_back(w);
      w = (*this)(w);
    } while (w != v && cycle.size() <= map_.size());
    out.push_back(std::move(cycle));
  }
  return out;
}

bool Permutation::is_bijection() const {
  std::set<std::uint64_t> images;
  for (const auto& [from, to] : map_) {
    if (!images.insert(to).second) return false;
    if (!map_.count(to)) return false;  // support must be closed
  }
  return true;
}

Permutation transposition_oracle(const BarCollection& bars) {
  auto all = bars.materialize();
  std::sort(all.begin(), all.end(), [](const Bar& a, const Bar& b) { return a.height < b.height; });
  for (std::size_t i = 1; i < all.size(); ++i) {
    if (all[i].height == all[i - 1].height) throw std::invalid_argument("bar heights are not distinct");
  }
  const auto& shape = bars.shape();
  std::unordered_map<std::uint64_t, std::uint64_t> occupant;  // vertex -> label there
  std::unordered_map<std::uint64_t, std::uint64_t> position;  // label -> vertex
  auto occ = [&](std::uint64_t v) {
    auto it = occupant.find(v);
    return it == occupant.end() ? v : it->second;
  };
  for (const auto& b : all) {
    std::uint64_t up = shape.upper(b.edge).index;
    std::uint64_t down = shape.lower(b.edge).index;
    std::uint64_t a = occ(up);
    std::uint64_t c = occ(down);
    occupant[up] = c;
    occupant[down] = a;
    position[a] = down;
    position[c] = up;
  }
  Permutation out;
  for (const auto& [label, at] : position) out.set(Vertex{label}, Vertex{at});
  return out;
}

Permutation sigma_all(const BarCollection& bars) {
  const auto& shape = bars.shape();
  std::set<std::uint64_t> touched;
  for (const auto& b : bars.materialize()) {
    touched.insert(shape.upper(b.edge).index);
    touched.insert(shape.lower(b.edge).index);
  }
  MeanderEngine engine(bars);
  Permutation out;
  for (auto v : touched) out.set(Vertex{v}, sigma_t(engine, Vertex{v}));
  return out;
}

CycleReport cycle_of_root(const BarCollection& bars) {
  MeanderEngine engine(bars);
  CycleReport report;
  report.boundary_truncated = hit_level_n(engine).reached;
  Vertex v = kRoot;
  const auto limit = bars.shape().vertex_count();
  do {
    report.cycle.push_back(v);
    v = sigma_t(engine, v);
  } while (v != kRoot && report.cycle.size() <= limit);
  return report;
}

}  // namespace treecycles
