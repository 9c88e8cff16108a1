#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "lossyphase/cli.hpp"
#include "json.hpp"

using namespace lossyphase;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lossyphase_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

const char* kSmallConfig =
    "eta_list=0.361\n"
    "probe=both\n"
    "phases=0,0.12\n"
    "series=30\n"
    "events=2000\n"
    "seed=4242\n";

}  // namespace

TEST_CASE("bounds at perfect transmission") {
  const fs::path d = scratch("bounds");
  REQUIRE(run({"bounds", "--eta-min", "1", "--eta-max", "1", "--steps", "1", "-o", d.string()}).code == 0);
  CHECK(slurp(d / "bounds.csv") ==
        "eta,dphi_optimal,dphi_noon,dphi_sil,x0,x1,x2,prep_success_p\n"
        "1,0.5,0.5,0.707106781187,0.5,0,0.5,1\n");
  CHECK(fs::exists(d / "bounds_manifest.json"));
}

TEST_CASE("bounds default grid carries the experimental transmissions") {
  const fs::path d = scratch("bounds_default");
  REQUIRE(run({"bounds", "-o", d.string()}).code == 0);
  const std::string csv = slurp(d / "bounds.csv");
  for (const char* eta : {"\n0.2,", "\n0.361,", "\n0.4,", "\n0.547,"}) CHECK(csv.find(eta) != std::string::npos);
  REQUIRE(run({"bounds", "-o", d.string()}).code == 0);
  CHECK(slurp(d / "bounds.csv") == csv);
}

TEST_CASE("exit codes") {
  const fs::path d = scratch("codes");
  CHECK(run({"bounds", "--eta-min", "0", "--eta-max", "1", "--steps", "5", "-o", d.string()}).code == 2);
  CHECK(run({"fringes", "--eta", "1.5", "-o", d.string()}).code == 2);
  CHECK(run({"teleport"}).code == 1);
  CHECK(run({"bounds", "--steps", "many"}).code == 1);
  CHECK(run({"--help"}).code == 0);
  write(d / "bad.cfg", "series=30\nevents two thousand\n");
  const Run bad = run({"simulate", (d / "bad.cfg").string(), "-o", d.string()});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("bad.cfg:2: expected key=value") != std::string::npos);
  write(d / "range.cfg", "series=0\n");
  CHECK(run({"simulate", (d / "range.cfg").string(), "-o", d.string()}).code == 2);
  write(d / "wrong.csv", "eta,probe,phi_true,setting,series,n_AA\n");
  const Run schema = run({"estimate", (d / "wrong.csv").string(), "-o", d.string()});
  CHECK(schema.code == 1);
  CHECK(schema.err.find("'series'") != std::string::npos);
}

TEST_CASE("fringes") {
  const fs::path d = scratch("fringes");
  REQUIRE(run({"fringes", "--eta", "1", "--phi-steps", "5", "-o", d.string()}).code == 0);
  std::istringstream rows(slurp(d / "fringes.csv"));
  std::string line;
  std::getline(rows, line);
  CHECK(line == "phi,setting,AA,AB,BB,AC,BC,CC");
  int n = 0;
  while (std::getline(rows, line)) {
    ++n;
    CHECK(line.substr(line.size() - 6) == ",0,0,0");
  }
  CHECK(n == 10);

  REQUIRE(run({"fringes", "--eta", "0.361", "--counts", "1000", "--seed", "3", "-o", d.string()}).code == 0);
  const std::string first = slurp(d / "fringes.csv");
  REQUIRE(run({"fringes", "--eta", "0.361", "--counts", "1000", "--seed", "3", "-o", d.string()}).code == 0);
  CHECK(slurp(d / "fringes.csv") == first);
}

TEST_CASE("simulate and estimate are byte-stable and replayable") {
  const fs::path d = scratch("pipeline");
  write(d / "run.cfg", kSmallConfig);
  const fs::path a = d / "a", b = d / "b", r = d / "replayed";
  for (const fs::path& out : {a, b}) {
    REQUIRE(run({"simulate", (d / "run.cfg").string(), "-o", out.string()}).code == 0);
    REQUIRE(run({"estimate", (out / "dataset.csv").string(), "-o", out.string(), "--hist", "bin=0.01"}).code == 0);
  }
  for (const char* f : {"dataset.csv", "estimates.csv", "report.csv", "histogram.csv"}) {
    CHECK(slurp(a / f) == slurp(b / f));
  }
  CHECK(slurp(a / "dataset.csv").find('\r') == std::string::npos);

  const auto manifest = nlohmann::json::parse(slurp(a / "simulate_manifest.json"));
  CHECK(manifest["master_seed"] == 4242);
  CHECK(manifest["outputs"][0] == "dataset.csv");
  CHECK(manifest["config"]["series"] == 30);

  REQUIRE(run({"replay", (a / "simulate_manifest.json").string(), "-o", r.string()}).code == 0);
  CHECK(slurp(r / "dataset.csv") == slurp(a / "dataset.csv"));
  REQUIRE(run({"replay", (a / "estimate_manifest.json").string(), "-o", r.string()}).code == 0);
  CHECK(slurp(r / "report.csv") == slurp(a / "report.csv"));
  CHECK(slurp(r / "histogram.csv") == slurp(a / "histogram.csv"));

  const std::string report = slurp(a / "report.csv");
  CHECK(report.rfind("eta,probe,phi_true,mean,sigma,m_bar,sigma_scaled,crb\n", 0) == 0);
  CHECK(std::count(report.begin(), report.end(), '\n') == 5);
}

TEST_CASE("seed precedence") {
  const fs::path d = scratch("seed");
  write(d / "noseed.cfg", "eta_list=0.4\nprobe=noon\nphases=0\nseries=2\nevents=100\n");
  write(d / "seeded.cfg", "eta_list=0.4\nprobe=noon\nphases=0\nseries=2\nevents=100\nseed=11\n");
  auto seed_of = [&](std::vector<std::string> args) {
    args.insert(args.end(), {"-o", d.string()});
    REQUIRE(run(args).code == 0);
    return nlohmann::json::parse(slurp(d / "simulate_manifest.json"))["master_seed"].get<std::uint64_t>();
  };
  ::setenv("LOSSYPHASE_SEED", "5", 1);
  CHECK(seed_of({"simulate", (d / "noseed.cfg").string()}) == 5);
  CHECK(seed_of({"simulate", (d / "seeded.cfg").string()}) == 11);
  CHECK(seed_of({"simulate", (d / "seeded.cfg").string(), "--seed", "12"}) == 12);
  ::unsetenv("LOSSYPHASE_SEED");
  CHECK(seed_of({"simulate", (d / "noseed.cfg").string()}) == 20090615);
}
