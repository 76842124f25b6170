#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace treecycles {

/// Half-open height interval [lo, hi) inside [0, 1).
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Raised when intervals that must be disjoint overlap.
class OverlapError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Sorted union of disjoint half-open intervals of [0, 1).
class IntervalSet {
 public:
  IntervalSet() = default;

  /// Builds from raw intervals that must be pairwise disjoint; throws
  /// OverlapError otherwise, std::domain_error for intervals outside [0, 1].
  static IntervalSet from_disjoint(std::vector<Interval> intervals);
  static IntervalSet full() { return from_disjoint({{0.0, 1.0}}); }

  /// Union with [lo, hi); touching and overlapping pieces are merged.
  void unite(double lo, double hi);
  void unite(const IntervalSet& other);
  /// Inserts [lo, hi), throwing OverlapError if it meets an existing piece.
  void insert_disjoint(double lo, double hi);

  bool contains(double x) const;
  /// Whether the set meets the open interval (a, b), a < b.
  bool meets_open(double a, double b) const;
  /// Whether the set meets the open arc from a of the given length, read
  /// modulo 1.
  bool meets_open_arc(double a, double length) const;

  double measure() const;
  bool empty() const { return pieces_.empty(); }
  const std::vector<Interval>& pieces() const { return pieces_; }

  friend bool operator==(const IntervalSet&, const IntervalSet&) = default;

 private:
  std::vector<Interval> pieces_;
};

}  // namespace treecycles
