#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "treecycles/cli.hpp"

using namespace treecycles;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "treecycles");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("exit codes") {
    CHECK(cli({"--help"}).code == 0);
    CHECK(cli({}).code == 2);
    CHECK(cli({"sim", "--d", "1"}).code == 2);
    CHECK(cli({"sim", "--t", "-0.5"}).code == 2);
    CHECK(cli({"sim", "--format", "xml"}).code == 2);
    CHECK(cli({"sim", "--bogus"}).code == 2);
    CHECK(cli({"estimate", "nope"}).code == 2);
    CHECK(cli({"scan", "--t-grid", "0.5:0.1:0.1"}).code == 2);
    CHECK(cli({"scan", "--t-grid", "0:0.1:0"}).code == 2);
    auto cap = cli({"sim", "--d", "2", "--n", "80"});
    CHECK(cap.code == 3);
    CHECK(cap.err.find("capacity") != std::string::npos);
  }

  TEST_CASE("sim without bars gives the identity") {
    auto r = cli({"sim", "--d", "3", "--n", "2", "--t", "0", "--trials", "3"});
    REQUIRE(r.code == 0);
    auto rows = lines(r.out);
    REQUIRE(rows.size() == 3);
    for (const auto& row : rows) {
      auto j = nlohmann::json::parse(row);
      CHECK(j["schema"] == 1);
      CHECK(j["length"] == 1);
      CHECK(j["support_size"] == 0);
      CHECK(j["boundary_truncated"] == false);
    }
  }

  TEST_CASE("sim CSV has a header and one row per trial") {
    auto r = cli({"sim", "--trials", "10", "--format", "csv", "--seed", "4"});
    REQUIRE(r.code == 0);
    auto rows = lines(r.out);
    CHECK(rows.size() == 11);
    CHECK(rows[0].rfind("trial,seed,cycle_length", 0) == 0);
  }

  TEST_CASE("fixed seeds give identical output for any worker count") {
    auto a = cli({"estimate", "pn", "--d", "3", "--n", "3", "--t", "0.3", "--trials", "3000", "--workers", "1"});
    auto b = cli({"estimate", "pn", "--d", "3", "--n", "3", "--t", "0.3", "--trials", "3000", "--workers", "4"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    auto s1 = cli({"sim", "--trials", "5", "--seed", "8"});
    auto s2 = cli({"sim", "--trials", "5", "--seed", "8"});
    CHECK(s1.out == s2.out);
  }

  TEST_CASE("scan emits one row per (n, t)") {
    auto r = cli({"scan", "--d", "8", "--n", "2,3,4", "--t-grid", "0:0.24:0.02", "--trials", "50"});
    REQUIRE(r.code == 0);
    auto rows = lines(r.out);
    REQUIRE(rows.size() == 39);
    auto first = nlohmann::json::parse(rows.front());
    CHECK(first["bracket_lo"] == 0.1328125);
    CHECK(first["bracket_hi"] == 0.15625);
    CHECK(first["n"] == 2);
    CHECK(nlohmann::json::parse(rows.back())["n"] == 4);
    auto csv = cli({"scan", "--d", "8", "--n", "2", "--t-grid", "0:0.24:0.02", "--trials", "50", "--format", "csv"});
    CHECK(lines(csv.out).size() == 14);
  }

  TEST_CASE("estimate kinds") {
    for (const char* kind : {"pn", "z", "tail", "gw", "russo"}) {
      auto r = cli({"estimate", kind, "--d", "3", "--n", "3", "--t", "0.3", "--trials", "500"});
      CHECK_MESSAGE(r.code == 0, kind << ": " << r.err);
      auto j = nlohmann::json::parse(r.out);
      CHECK(j["kind"] == kind);
    }
    CHECK(cli({"estimate", "russo", "--t", "0.1", "--fd-step", "0.2"}).code == 2);
  }

  TEST_CASE("config file fills flags not given on the command line") {
    const char* path = "treecycles_cli_test_config.json";
    {
      std::ofstream f(path);
      f << R"({"d": 3, "n": 2, "t": 0, "trials": 2, "seed": 5})";
    }
    auto r = cli({"sim", "--config", path, "--trials", "4"});
    REQUIRE(r.code == 0);
    auto rows = lines(r.out);
    CHECK(rows.size() == 4);
    CHECK(nlohmann::json::parse(rows[0])["d"] == 3);
    {
      std::ofstream f(path);
      f << R"({"colour": 1})";
    }
    CHECK(cli({"sim", "--config", path}).code == 2);
    std::remove(path);
  }

  TEST_CASE("verify passes and catches an injected fault") {
    auto ok = cli({"verify", "--only", "oracle", "--trials", "200"});
    CHECK(ok.code == 0);
    CHECK(ok.out.find("[PASS] oracle") != std::string::npos);
    auto bad = cli({"verify", "--only", "oracle", "--trials", "200", "--inject-fault", "right-continuity"});
    CHECK(bad.code == 1);
    CHECK(bad.out.find("[FAIL] oracle") != std::string::npos);
    CHECK(bad.out.find("replay seed") != std::string::npos);
    auto replay = cli({"verify", "--only", "inclusions", "--replay", "12345"});
    CHECK(replay.code == 0);
    CHECK(nlohmann::json::parse(replay.out)["replay_seed"] == 12345);
  }
}
