#include <doctest.h>
#include <hocp/artifacts.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(HOCP_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hocp_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("missing config file exits 1 without outputs") {
  const fs::path out = scratch("missing");
  CHECK(run("solve fishing --config /nonexistent/config.json --out " + out.string()) == 1);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("cia without its relax input exits 1") {
  const fs::path out = scratch("cia");
  CHECK(run("baseline cia --problem fishing --n 6 --input /nonexistent/solution.json --out " + out.string()) == 1);
}

TEST_CASE("solve, check and corruption") {
  const fs::path out = scratch("solve");
  REQUIRE(run("solve turbo_car --n 10 --out " + out.string()) == 0);
  for (const char* f : {"solution.json", "trajectory.csv", "trace.csv", "manifest.json", "trajectory.svg", "layout.json"})
    CHECK(fs::exists(out / f));
  CHECK(run("check " + (out / "solution.json").string()) == 0);

  nlohmann::json j;
  std::ifstream(out / "solution.json") >> j;
  CHECK(j["x"].size() == j["x"].size());
  const hocp::SolutionRecord rec = hocp::solution_from_json(j);
  nlohmann::json layout;
  std::ifstream(out / "layout.json") >> layout;

  // flip the last binary
  nlohmann::json flipped = j;
  const hocp::Index stride = layout["nx"].get<hocp::Index>() + layout["nu"].get<hocp::Index>() + layout["nw"].get<hocp::Index>();
  const hocp::Index w_last = (layout["N"].get<hocp::Index>() - 1) * stride + stride - 1;
  flipped["x"][w_last] = 1.0 - rec.x[w_last];
  std::ofstream(out / "flipped.json") << flipped.dump();
  CHECK(run("check " + (out / "flipped.json").string()) != 0);

  nlohmann::json frac = j;
  frac["x"][w_last] = 0.5;
  std::ofstream(out / "fractional.json") << frac.dump();
  CHECK(run("check " + (out / "fractional.json").string()) != 0);

  const fs::path again = scratch("solve_again");
  REQUIRE(run("solve turbo_car --n 10 --out " + again.string()) == 0);
  std::ifstream a(out / "solution.json"), b(again / "solution.json");
  const std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
  CHECK(sa == sb);
}

TEST_CASE("refine does not worsen the objective") {
  const fs::path out = scratch("refine_in"), ref = scratch("refine_out");
  REQUIRE(run("solve turbo_car --n 10 --out " + out.string()) == 0);
  REQUIRE(run("baseline refine --problem turbo_car --n 10 --warm-start " + (out / "solution.json").string() +
              " --out " + ref.string()) == 0);
  const auto a = hocp::read_solution(out / "solution.json");
  const auto b = hocp::read_solution(ref / "solution.json");
  CHECK(b.objective <= a.objective + 1e-12);
}
