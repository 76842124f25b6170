#pragma once

// Permutation-level view of the stirring model.

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "treecycles/bars.hpp"
#include "treecycles/tree.hpp"

namespace treecycles {

/// Sparse bijection of V(T_n); vertices outside the support are fixed.
class Permutation {
 public:
  Vertex operator()(Vertex v) const;
  /// Records v -> image; fixed points are not stored.
  void set(Vertex v, Vertex image);
  /// Vertices moved by the permutation.
  std::vector<Vertex> support() const;
  /// Cycles of length >= 2, each starting at its smallest vertex, ordered
  /// by that vertex.
  std::vector<std::vector<Vertex>> cycles() const;
  bool is_bijection() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::unordered_map<std::uint64_t, std::uint64_t> map_;
};

struct CycleReport {
  std::vector<Vertex> cycle;  // starts at the root
  std::size_t length() const { return cycle.size(); }
  bool boundary_truncated = false;
};

/// Composes the transpositions (e^+ e^-) of all bars in increasing height
/// order. sigma(v) is where the label starting at v ends up. Throws
/// std::invalid_argument when two bars share a height.
Permutation transposition_oracle(const BarCollection& bars);

/// sigma_t evaluated by the meander at every vertex incident to a bar.
Permutation sigma_all(const BarCollection& bars);

/// The cycle of the root under sigma_t; boundary_truncated is H_n < infinity.
CycleReport cycle_of_root(const BarCollection& bars);

}  // namespace treecycles
