#include "treecycles/tree.hpp"

#include <algorithm>

namespace treecycles {

namespace {

constexpr std::uint64_t kCapacity = std::uint64_t{1} << 62;
constexpr std::string_view kRootToken = "ε";
constexpr std::string_view kSymbols = "0123456789abcdefghijklmnopqrstuvwxyz";

}  // namespace

TreeShape::TreeShape(int d, int n) : d_(d), n_(n) {
  if (d < 2) throw std::invalid_argument("tree degree d must be at least 2");
  if (n < 1) throw std::invalid_argument("tree depth n must be at least 1");
  // d^(n+1) <= 2^62 keeps every vertex index and counter in range.
  std::uint64_t power = 1;
  for (int i = 0; i <= n; ++i) {
    if (power > kCapacity / static_cast<std::uint64_t>(d)) {
      throw CapacityError("d^(n+1) exceeds 2^62 for d=" + std::to_string(d) +
                          ", n=" + std::to_string(n));
    }
    power *= static_cast<std::uint64_t>(d);
  }
  level_start_.reserve(n + 2);
  std::uint64_t start = 0;
  std::uint64_t width = 1;
  for (int level = 0; level <= n + 1; ++level) {
    level_start_.push_back(start);
    start += width;
    width *= static_cast<std::uint64_t>(d);
  }
}

std::uint64_t TreeShape::level_size(int level) const {
  return level_start_.at(level + 1) - level_start_.at(level);
}

int TreeShape::level(Vertex v) const {
  auto it = std::upper_bound(level_start_.begin(), level_start_.end(), v.index);
  return static_cast<int>(it - level_start_.begin()) - 1;
}

Vertex TreeShape::parent(Vertex v) const {
  if (v.index == 0) throw std::domain_error("the root has no parent");
  return Vertex{(v.index - 1) / static_cast<std::uint64_t>(d_)};
}

Vertex TreeShape::child(Vertex v, int symbol) const {
  if (symbol < 0 || symbol >= d_) throw std::out_of_range("child symbol out of range");
  return Vertex{v.index * static_cast<std::uint64_t>(d_) + 1 + static_cast<std::uint64_t>(symbol)};
}

int TreeShape::symbol(Vertex v) const {
  if (v.index == 0) throw std::domain_error("the root has no symbol");
  return static_cast<int>((v.index - 1) % static_cast<std::uint64_t>(d_));
}

Edge TreeShape::parent_edge(Vertex v) const {
  if (v.index == 0) throw std::domain_error("the root has no parent edge");
  return Edge{v};
}

std::vector<Edge> TreeShape::path_to_root(Vertex v) const {
  std::vector<Edge> path(static_cast<std::size_t>(level(v)));
  for (auto it = path.rbegin(); it != path.rend(); ++it) {
    *it = Edge{v};
    v = parent(v);
  }
  return path;
}

bool TreeShape::is_descendant(Vertex w, Vertex v) const {
  int lw = level(w);
  int lv = level(v);
  if (lw < lv) return false;
  for (int i = lw; i > lv; --i) w = parent(w);
  return w == v;
}

std::vector<int> TreeShape::digits(Vertex v) const {
  std::vector<int> out(static_cast<std::size_t>(level(v)));
  for (auto it = out.rbegin(); it != out.rend(); ++it) {
    *it = symbol(v);
    v = parent(v);
  }
  return out;
}

Vertex TreeShape::from_digits(const std::vector<int>& digits) const {
  if (static_cast<int>(digits.size()) > n_) throw std::out_of_range("address deeper than n");
  Vertex v = kRoot;
  for (int s : digits) v = child(v, s);
  return v;
}

Vertex TreeShape::concat(Vertex v, Vertex w) const {
  if (level(v) + level(w) > n_) throw std::out_of_range("concatenated address leaves T_n");
  for (int s : digits(w)) v = child(v, s);
  return v;
}

Vertex TreeShape::strip_prefix(Vertex w, Vertex v) const {
  if (!is_descendant(w, v)) throw std::domain_error("vertex is not in the descendent tree");
  auto all = digits(w);
  std::vector<int> rest(all.begin() + level(v), all.end());
  return from_digits(rest);
}

std::string TreeShape::address(Vertex v) const {
  if (v.index == 0) return std::string(kRootToken);
  if (d_ > static_cast<int>(kSymbols.size())) {
    throw std::domain_error("digit-string addresses need d <= 36");
  }
  std::string out;
  for (int s : digits(v)) out.push_back(kSymbols[static_cast<std::size_t>(s)]);
  return out;
}

Vertex TreeShape::parse_address(std::string_view text) const {
  if (text == kRootToken || text.empty()) return kRoot;
  std::vector<int> symbols;
  symbols.reserve(text.size());
  for (char c : text) {
    auto pos = kSymbols.find(c);
    if (pos == std::string_view::npos || static_cast<int>(pos) >= d_) {
      throw std::invalid_argument("bad address symbol in '" + std::string(text) + "'");
    }
    symbols.push_back(static_cast<int>(pos));
  }
  return from_digits(symbols);
}

std::uint64_t edge_count(const TreeShape& shape) { return shape.edge_count(); }

}  // namespace treecycles
