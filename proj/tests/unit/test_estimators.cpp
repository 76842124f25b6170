#include <doctest.h>

#include <cmath>

#include "treecycles/estimators.hpp"
#include "treecycles/serialize.hpp"

using namespace treecycles;

namespace {

// P(generation n of the barred-edge branching process is nonempty).
double generation_survival(int d, double t, int n) {
  double q = std::exp(-t);
  double s = 0.0;
  for (int i = 0; i < n; ++i) s = std::pow((1 - q) * s + q, d);
  return 1.0 - s;
}

}  // namespace

TEST_SUITE("estimators") {
  TEST_CASE("results do not depend on the worker count") {
    TreeShape s(3, 4);
    auto one = estimate_pn(s, 0.3, 5000, 99, 1);
    auto four = estimate_pn(s, 0.3, 5000, 99, 4);
    CHECK(one.mean == four.mean);
    CHECK(one.std_error == four.std_error);
    auto z1 = z_estimate(s, 0.3, 3000, 5, 1);
    auto z3 = z_estimate(s, 0.3, 3000, 5, 3);
    CHECK(z1.mean == z3.mean);
  }

  TEST_CASE("p_n is below the branching-process survival") {
    for (int d : {3, 6}) {
      TreeShape s(d, 4);
      double t = 1.5 / d;
      auto e = estimate_pn(s, t, 20000, 7);
      CHECK(e.mean <= generation_survival(d, t, 4) + 4 * e.std_error);
    }
  }

  TEST_CASE("p_1 has the closed form 1 - e^-td") {
    TreeShape s(4, 1);
    auto e = estimate_pn(s, 0.2, 40000, 3);
    CHECK(std::abs(e.mean - (1 - std::exp(-0.8))) < 4 * e.std_error);
  }

  TEST_CASE("extinction fixed point") {
    auto zero = gw_extinction(5, 0.0);
    CHECK(zero.q_ext == doctest::Approx(1.0));
    CHECK(zero.p_upper == doctest::Approx(0.0));
    for (int d : {6, 10, 20}) {
      double t = 1.0 / d + 2.0 / (d * d);
      auto g = gw_extinction(d, t);
      double q = std::exp(-t);
      double lo = 0.0, hi = 1.0 - 1e-9;
      for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (std::pow((1 - q) * mid + q, d) - mid > 0 ? lo : hi) = mid;
      }
      CHECK(std::abs(g.q_ext - lo) < 1e-9);
      CHECK(g.p_upper == doctest::Approx(1 - g.q_ext));
      REQUIRE(g.within_bound.has_value());
      CHECK(*g.within_bound);
    }
    CHECK_FALSE(gw_extinction(4, 0.5).within_bound.has_value());
  }

  TEST_CASE("cluster tail bound formula") {
    double tau = 0.05 * 16;
    CHECK(cluster_tail_bound(16, 0.05, 2) == doctest::Approx(1.1 / std::exp(1.0) * std::pow(std::exp(1.0) * tau * tau / 16, 2)));
  }

  TEST_CASE("scan grid and brackets") {
    auto table = critical_scan(8, {2, 3}, {0.0, 0.1, 0.2}, 500, 1);
    CHECK(table.rows.size() == 6);
    CHECK(table.bracket_lo == 0.1328125);
    CHECK(table.bracket_hi == 0.15625);
    CHECK(table.rows.front().n == 2);
    CHECK(table.rows.front().estimate.mean == 0.0);
    for (std::size_t i = 1; i < table.rows.size(); ++i) {
      auto a = table.rows[i - 1], b = table.rows[i];
      CHECK((a.n < b.n || (a.n == b.n && a.t < b.t)));
    }
  }

  TEST_CASE("thinning coupling agrees with direct estimates") {
    TreeShape s(3, 3);
    auto table = critical_scan(3, {3}, {0.2, 0.4}, 20000, 11);
    auto direct = estimate_pn(s, 0.2, 20000, 12);
    double diff = table.rows[0].estimate.mean - direct.mean;
    CHECK(std::abs(diff) < 4 * std::hypot(table.rows[0].estimate.std_error, direct.std_error));
  }

  TEST_CASE("monotonicity report counts seeds") {
    TreeShape s(3, 3);
    auto r = monotonicity_check(s, {0.2, 0.3}, 2000, 1);
    CHECK(r.seeds == 2000);
    CHECK(r.violations <= r.seeds);
    CHECK(r.first_violation.has_value() == (r.violations > 0));
  }
}

TEST_SUITE("serialize") {
  TEST_CASE("bars round trip through JSON") {
    TreeShape s(3, 3);
    auto b = sample_bars(s, 0.4, 77);
    auto j = bars_to_json(b);
    auto back = bars_from_json(s, nlohmann::json::parse(j.dump()));
    CHECK(back.materialize() == b.materialize());
  }

  TEST_CASE("doubles print in shortest round-trip form") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(0.1328125) == "0.1328125");
    for (double x : {1.0 / 3, 2.5e-17, 123456.789, 0.0}) CHECK(std::stod(format_double(x)) == x);
  }

  TEST_CASE("CSV quoting") {
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_row({"a", "b,c"}) == "a,\"b,c\"\r\n");
  }

  TEST_CASE("event rows have a stable column count") {
    TreeShape s(2, 2);
    auto rec = detect(BarCollection(s), Bar{Edge{s.parse_address("0")}, 0.5});
    CHECK(event_csv_fields(s, rec).size() == event_csv_columns().size());
    auto j = event_to_json(s, rec);
    CHECK(j["crossed"] == true);
    CHECK(j["added"]["edge"] == "0");
  }
}
