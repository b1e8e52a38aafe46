#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = JSPKDM_FIXTURES;

struct Scratch {
  fs::path dir = fs::temp_directory_path() / ("jspkdm-cli-" + std::to_string(std::random_device{}()));
  Scratch() { fs::create_directories(dir); }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
};

int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + JSPKDM_CLI + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("clean run exits 0 and writes the requested files") {
    Scratch s;
    CHECK(cli("analyze " + q(kFixtures / "twopage") + " --out " + q(s.dir) + " --format dot") == 0);
    CHECK(fs::exists(s.dir / "deps.dot"));
    CHECK(fs::exists(s.dir / "report.json"));
    CHECK_FALSE(fs::exists(s.dir / "model.xmi"));
    CHECK_FALSE(fs::exists(s.dir / "model.json"));
  }

  TEST_CASE("diagnostics exit 1, or 2 under --strict") {
    Scratch s;
    CHECK(cli("analyze " + q(kFixtures / "broken") + " --out " + q(s.dir)) == 1);
    auto report = read_json(s.dir / "report.json");
    CHECK(report["summary"]["pages"] == 2);
    CHECK(report["summary"]["pages_failed"] == 1);
    CHECK(cli("analyze " + q(kFixtures / "broken") + " --out " + q(s.dir) + " --strict") == 2);
  }

  TEST_CASE("fatal problems exit 2") {
    Scratch s;
    CHECK(cli("analyze " + q(s.dir / "nope") + " --out " + q(s.dir)) == 2);
    CHECK(cli("analyze " + q(kFixtures / "twopage") + " --format pdf --out " + q(s.dir)) == 2);
    CHECK(cli("frobnicate") == 2);
    CHECK(cli("--help") == 0);
  }

  TEST_CASE("servlet sources are written on request") {
    Scratch s;
    CHECK(cli("analyze " + q(kFixtures / "powers") + " --out " + q(s.dir / "out") + " --servlet-src-out " +
              q(s.dir / "java")) == 0);
    CHECK(fs::exists(s.dir / "java" / "jsp_powers_jsp.java"));
  }

  TEST_CASE("config file supplies defaults, flags override") {
    Scratch s;
    {
      std::ofstream cfg(s.dir / "cfg.json");
      cfg << R"({"context_path": "/shop", "formats": ["json"], "out": "from-config"})";
    }
    CHECK(cli("analyze " + q(kFixtures / "webapp") + " --config " + q(s.dir / "cfg.json")) == 0);
    REQUIRE(fs::exists(s.dir / "from-config" / "model.json"));
    auto model = read_json(s.dir / "from-config" / "model.json");
    CHECK(model["relationships"].size() == 10);

    CHECK(cli("analyze " + q(kFixtures / "webapp") + " --config " + q(s.dir / "cfg.json") + " --out " +
              q(s.dir / "flag") + " --context-path /other") == 0);
    auto overridden = read_json(s.dir / "flag" / "model.json");
    CHECK(overridden["relationships"].size() < 10);
  }
}
