#include <doctest.h>

#include <set>

#include "treecycles/tree.hpp"

using namespace treecycles;

TEST_SUITE("tree") {
  TEST_CASE("edge counts match the closed form") {
    CHECK(TreeShape(2, 1).edge_count() == 2);
    CHECK(TreeShape(2, 2).edge_count() == 6);
    CHECK(TreeShape(3, 2).edge_count() == 12);
    for (int d = 2; d <= 7; ++d) {
      for (int n = 1; n <= 6; ++n) {
        TreeShape s(d, n);
        std::uint64_t sum = 0, pow = 1;
        for (int i = 1; i <= n; ++i) sum += (pow *= d);
        CHECK(edge_count(s) == sum);
      }
    }
  }

  TEST_CASE("invalid shapes are rejected") {
    CHECK_THROWS_AS(TreeShape(1, 3), std::invalid_argument);
    CHECK_THROWS_AS(TreeShape(2, 0), std::invalid_argument);
    CHECK_THROWS_AS(TreeShape(2, 62), CapacityError);
    CHECK_THROWS_AS(TreeShape(20, 20), CapacityError);
    CHECK_NOTHROW(TreeShape(2, 61));
    CHECK_NOTHROW(TreeShape(20, 8));
  }

  TEST_CASE("levels partition the vertices") {
    TreeShape s(3, 4);
    std::uint64_t total = 0;
    for (int i = 0; i <= 4; ++i) {
      total += s.level_size(i);
      for (std::uint64_t k = 0; k < s.level_size(i); ++k) CHECK(s.level(Vertex{s.level_start(i) + k}) == i);
    }
    CHECK(total == s.vertex_count());
  }

  TEST_CASE("navigation and addresses") {
    TreeShape s(3, 3);
    Vertex v = s.parse_address("120");
    CHECK(s.address(v) == "120");
    CHECK(s.digits(v) == std::vector<int>{1, 2, 0});
    CHECK(s.level(v) == 3);
    CHECK(s.parent(v) == s.parse_address("12"));
    CHECK(s.symbol(v) == 0);
    CHECK(s.address(kRoot) == "ε");
    CHECK(s.parse_address("ε") == kRoot);
    CHECK(s.child(s.parse_address("1"), 2) == s.parse_address("12"));
    CHECK(s.upper(s.parent_edge(v)) == s.parse_address("12"));
    CHECK(s.level(s.parent_edge(v)) == 2);
    CHECK_THROWS(s.parse_address("3"));
    CHECK_THROWS(s.parse_address("0000"));
  }

  TEST_CASE("heap order agrees with lexicographic order within a level") {
    TreeShape s(3, 3);
    std::string prev;
    for (std::uint64_t k = 0; k < s.level_size(3); ++k) {
      auto a = s.address(Vertex{s.level_start(3) + k});
      CHECK(prev < a);
      prev = a;
    }
  }

  TEST_CASE("path to root") {
    TreeShape s(2, 3);
    auto path = s.path_to_root(s.parse_address("101"));
    REQUIRE(path.size() == 3);
    CHECK(s.address(path[0].child) == "1");
    CHECK(s.address(path[1].child) == "10");
    CHECK(s.address(path[2].child) == "101");
    CHECK(s.path_to_root(kRoot).empty());
  }

  TEST_CASE("descendants, concatenation and prefixes") {
    TreeShape s(2, 4);
    Vertex v = s.parse_address("01");
    Vertex w = s.parse_address("0110");
    CHECK(s.is_descendant(w, v));
    CHECK(s.is_descendant(v, v));
    CHECK_FALSE(s.is_descendant(v, w));
    CHECK_FALSE(s.is_descendant(s.parse_address("10"), v));
    CHECK(s.strip_prefix(w, v) == s.parse_address("10"));
    CHECK(s.concat(v, s.parse_address("10")) == w);
    CHECK(s.concat(kRoot, v) == v);
    CHECK_THROWS_AS(s.concat(w, s.parse_address("1")), std::out_of_range);
    for (std::uint64_t x = 0; x < s.vertex_count(); ++x) {
      Vertex u{x};
      CHECK(s.from_digits(s.digits(u)) == u);
      if (s.is_descendant(u, v)) CHECK(s.concat(v, s.strip_prefix(u, v)) == u);
    }
  }

  TEST_CASE("edge ids are dense") {
    TreeShape s(3, 2);
    std::set<std::uint64_t> ids;
    for (std::uint64_t x = 1; x < s.vertex_count(); ++x) ids.insert(s.parent_edge(Vertex{x}).id());
    CHECK(ids.size() == s.edge_count());
    CHECK(*ids.rbegin() == s.edge_count() - 1);
    CHECK(Edge::from_id(5).id() == 5);
  }
}
