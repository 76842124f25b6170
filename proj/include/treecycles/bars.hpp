#pragma once

// Bars, bar collections with Poisson-t law, and Lebesgue-measurable sets of
// bar locations.

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "treecycles/interval_set.hpp"
#include "treecycles/rng.hpp"
#include "treecycles/tree.hpp"

namespace treecycles {

/// A point (e, h) of E(T) x [0, 1).
struct Bar {
  Edge edge;
  double height = 0.0;

  friend auto operator<=>(const Bar&, const Bar&) = default;
};

/// The (v, h)-shift: moves a bar of the descendent tree T_[v] to T by
/// stripping the prefix v from its edge and subtracting h from its height
/// modulo 1. Throws std::domain_error when the bar is not in T_[v].
Bar shift_bar(const TreeShape& shape, const Bar& b, Vertex v, double h);
/// Inverse of shift_bar for the same anchor.
Bar unshift_bar(const TreeShape& shape, const Bar& b, Vertex v, double h);

/// Poisson bars generated edge by edge from a keyed stream. Bars are drawn
/// at rate t_max and each carries a uniform mark; the field at rate t keeps
/// the bars with mark < t / t_max. Fields sharing (seed, t_max) are coupled:
/// the field at t is contained in the field at t' whenever t <= t'.
struct PoissonField {
  double t = 0.0;
  double t_max = 0.0;
  std::uint64_t seed = 0;
};

/// A finite set of bars on E(T_n) x [0, 1), immutable once built. Either
/// fully materialized, or backed by a PoissonField whose edges are generated
/// on demand (a pure function of the edge, so the collection stays
/// immutable and thread-safe). Per-edge overrides record added or cleared
/// edges on top of a field.
class BarCollection {
 public:
  explicit BarCollection(TreeShape shape);

  /// Validates heights in [0, 1), edges inside T_n and distinct (edge, h).
  static BarCollection from_bars(TreeShape shape, const std::vector<Bar>& bars);
  static BarCollection from_field(TreeShape shape, PoissonField field);

  const TreeShape& shape() const { return shape_; }
  bool is_lazy() const { return field_.has_value(); }
  const std::optional<PoissonField>& field() const { return field_; }

  /// Heights on one edge, strictly increasing.
  std::vector<double> heights(Edge e) const;
  std::size_t count(Edge e) const { return heights(e).size(); }
  bool contains(const Bar& b) const;

  /// B u {b}; throws std::invalid_argument if b is already present.
  BarCollection with_bar(const Bar& b) const;
  /// B with every bar on e removed.
  BarCollection with_edge_cleared(Edge e) const;

  /// All bars ordered by (edge id, height). For a lazy collection this walks
  /// every edge of T_n and throws CapacityError above 10^7 edges.
  std::vector<Bar> materialize() const;
  std::size_t total_count() const { return materialize().size(); }

 private:
  TreeShape shape_;
  std::optional<PoissonField> field_;
  std::map<std::uint64_t, std::vector<double>> edges_;  // materialized bars or overrides
};

/// Bars a PoissonField places on one edge (sorted, distinct).
std::vector<double> field_heights(const PoissonField& field, Edge e);

/// Poisson-t bar collection: total count ~ Poisson(t |E|), then each bar is
/// placed on a uniform edge at a uniform height. Duplicate heights on one
/// edge are redrawn.
BarCollection sample_poisson(const TreeShape& shape, double t, Stream& stream);

/// Lazily generated Poisson-t collection keyed by seed.
BarCollection poisson_field(const TreeShape& shape, double t, std::uint64_t seed,
                            std::optional<double> t_max = std::nullopt);

/// The added bar: uniform edge of T_n, uniform height.
Bar sample_added(const TreeShape& shape, Stream& stream);

/// Per-edge disjoint unions of height intervals, ordered by edge id.
class LocationSet {
 public:
  LocationSet() = default;

  /// Intervals on one edge must be disjoint (OverlapError otherwise).
  static LocationSet from_intervals(const std::map<std::uint64_t, std::vector<Interval>>& raw);
  /// e x [0, 1) for each listed edge.
  static LocationSet full_edges(const std::vector<Edge>& edges);

  void unite(Edge e, const IntervalSet& heights);
  bool contains(const Bar& b) const;
  /// Normalized-measure CDF at b under the (edge id, height) order.
  double cdf(const Bar& b) const;

  const std::map<std::uint64_t, IntervalSet>& edges() const { return edges_; }
  bool empty() const;

  friend bool operator==(const LocationSet&, const LocationSet&) = default;

 private:
  std::map<std::uint64_t, IntervalSet> edges_;
};

/// Lebesgue measure: the sum of interval lengths over all edges.
double measure(const LocationSet& set);

/// A bar with law normalized Lebesgue measure on the set (inverse CDF over
/// the concatenated intervals). Throws std::domain_error for measure zero.
Bar sample_uniform_on(const LocationSet& set, Stream& stream);

}  // namespace treecycles
