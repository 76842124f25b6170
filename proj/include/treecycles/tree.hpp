#pragma once

// Arithmetic addressing on the rooted d-ary tree T_n. The tree is never
// materialized: vertices are identified by their level-order (heap) index,
// so the children of v are d*v+1 .. d*v+d and the parent of v is (v-1)/d.
// Within one level, heap order coincides with lexicographic order of the
// digit labels.

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace treecycles {

/// Raised when d^(n+1) would leave the 62-bit range used for all counters.
class CapacityError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

struct Vertex {
  std::uint64_t index = 0;

  friend constexpr auto operator<=>(Vertex, Vertex) = default;
};

inline constexpr Vertex kRoot{0};

/// An edge is named by its child endpoint e^-; the parent endpoint is e^+.
struct Edge {
  Vertex child;

  /// Dense edge number in [0, |E(T_n)|).
  constexpr std::uint64_t id() const { return child.index - 1; }
  static constexpr Edge from_id(std::uint64_t id) { return Edge{Vertex{id + 1}}; }

  friend constexpr auto operator<=>(Edge, Edge) = default;
};

class TreeShape {
 public:
  /// Throws std::invalid_argument for d < 2 or n < 1 and CapacityError when
  /// d^(n+1) exceeds 2^62.
  TreeShape(int d, int n);

  int d() const { return d_; }
  int n() const { return n_; }

  std::uint64_t vertex_count() const { return level_start_.back(); }
  std::uint64_t edge_count() const { return vertex_count() - 1; }
  /// |V_i| = d^i.
  std::uint64_t level_size(int level) const;
  /// Heap index of the first vertex on the given level.
  std::uint64_t level_start(int level) const { return level_start_.at(level); }

  bool contains(Vertex v) const { return v.index < vertex_count(); }
  bool contains(Edge e) const { return e.child.index >= 1 && contains(e.child); }

  int level(Vertex v) const;
  Vertex parent(Vertex v) const;
  Vertex child(Vertex v, int symbol) const;
  /// Last symbol of the label of v (v != root).
  int symbol(Vertex v) const;

  Vertex upper(Edge e) const { return parent(e.child); }
  Vertex lower(Edge e) const { return e.child; }
  /// e in E_i iff level(e^+) = i.
  int level(Edge e) const { return level(e.child) - 1; }
  Edge parent_edge(Vertex v) const;
  Edge child_edge(Vertex v, int symbol) const { return Edge{child(v, symbol)}; }

  /// Edges of the path from the root to v, ordered from the root outward.
  std::vector<Edge> path_to_root(Vertex v) const;
  /// True when w lies in the descendent tree T_[v] (v itself included).
  bool is_descendant(Vertex w, Vertex v) const;

  std::vector<int> digits(Vertex v) const;
  Vertex from_digits(const std::vector<int>& digits) const;

  /// Concatenation of labels, v + w. Throws std::out_of_range if the result
  /// leaves T_n.
  Vertex concat(Vertex v, Vertex w) const;
  /// Label of w with the prefix v removed. Requires w in T_[v].
  Vertex strip_prefix(Vertex w, Vertex v) const;

  /// Dot-free digit string (base-36 symbols); the root is "ε". Requires d <= 36.
  std::string address(Vertex v) const;
  Vertex parse_address(std::string_view text) const;

 private:
  int d_;
  int n_;
  std::vector<std::uint64_t> level_start_;  // n + 2 entries
};

/// |E(T_n)| = d(d^n - 1)/(d - 1).
std::uint64_t edge_count(const TreeShape& shape);

}  // namespace treecycles
