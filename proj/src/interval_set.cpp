#include "treecycles/interval_set.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace treecycles {

namespace {

void check_range(double lo, double hi) {
  if (!(lo >= 0.0 && hi <= 1.0 && lo <= hi)) {
    throw std::domain_error("interval [" + std::to_string(lo) + ", " + std::to_string(hi) +
                            ") is not inside [0, 1)");
  }
}

bool by_lo(const Interval& a, const Interval& b) { return a.lo < b.lo; }

}  // namespace

IntervalSet IntervalSet::from_disjoint(std::vector<Interval> intervals) {
  IntervalSet out;
  for (const auto& iv : intervals) out.insert_disjoint(iv.lo, iv.hi);
  return out;
}

void IntervalSet::unite(double lo, double hi) {
  check_range(lo, hi);
  if (lo == hi) return;
  auto first = std::lower_bound(pieces_.begin(), pieces_.end(), Interval{lo, lo},
                                [](const Interval& a, const Interval& b) { return a.hi < b.lo; });
  auto last = first;
  while (last != pieces_.end() && last->lo <= hi) {
    lo = std::min(lo, last->lo);
    hi = std::max(hi, last->hi);
    ++last;
  }
  auto pos = pieces_.erase(first, last);
  pieces_.insert(pos, Interval{lo, hi});
}

void IntervalSet::unite(const IntervalSet& other) {
  for (const auto& iv : other.pieces_) unite(iv.lo, iv.hi);
}

void IntervalSet::insert_disjoint(double lo, double hi) {
  check_range(lo, hi);
  if (lo == hi) return;
  auto pos = std::lower_bound(pieces_.begin(), pieces_.end(), Interval{lo, hi}, by_lo);
  if (pos != pieces_.end() && pos->lo < hi) {
    throw OverlapError("interval overlaps an existing piece");
  }
  if (pos != pieces_.begin() && std::prev(pos)->hi > lo) {
    throw OverlapError("interval overlaps an existing piece");
  }
  pieces_.insert(pos, Interval{lo, hi});
}

bool IntervalSet::contains(double x) const {
  auto pos = std::upper_bound(pieces_.begin(), pieces_.end(), Interval{x, x}, by_lo);
  if (pos == pieces_.begin()) return false;
  --pos;
  return x >= pos->lo && x < pos->hi;
}

bool IntervalSet::meets_open(double a, double b) const {
  for (const auto& iv : pieces_) {
    if (iv.lo >= b) break;
    if (iv.hi > a && iv.lo < b && iv.hi > iv.lo) return true;
  }
  return false;
}

bool IntervalSet::meets_open_arc(double a, double length) const {
  if (length >= 1.0) return !empty();
  double end = a + length;
  if (end <= 1.0) return meets_open(a, end);
  // (a, 1) together with [0, end - 1); the point 0 itself lies inside the arc.
  return meets_open(a, 1.0) || contains(0.0) || meets_open(0.0, end - 1.0);
}

double IntervalSet::measure() const {
  double total = 0.0;
  for (const auto& iv : pieces_) total += iv.length();
  return total;
}

}  // namespace treecycles
