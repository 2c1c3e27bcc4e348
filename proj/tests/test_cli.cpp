#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "pdoprior/io.hpp"

using namespace pdoprior;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "pdoprior_test_cli";

int cli(const std::string& args) {
  const std::string cmd = std::string(PDOPRIOR_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string out(const std::string& name) { return "--out " + (kRoot / name).string(); }

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

nlohmann::json metadata(const std::string& name) { return nlohmann::json::parse(slurp(kRoot / name / "metadata.json")); }

}  // namespace

TEST_CASE("sample-prior writes four term tensors and a norms table") {
  REQUIRE(cli(out("sp") + " --seed 3 sample-prior --trunc-order 3") == 0);
  for (int k = 0; k < 4; ++k) {
    const TensorFile t = read_tensor(kRoot / "sp" / ("term_" + std::to_string(k) + ".ipt"));
    CHECK(t.dtype == TensorFile::DType::Complex128);
    CHECK(t.dims == std::vector<std::uint64_t>{65, 64});
  }
  CHECK_FALSE(fs::exists(kRoot / "sp" / "term_4.ipt"));
  CHECK(first_line(kRoot / "sp" / "term_norms.csv") == "k,norm");
  const auto meta = metadata("sp");
  CHECK(meta["command"] == "sample-prior");
  CHECK(meta["seed"] == 3);
  CHECK(meta["parameters"]["trunc_order"] == 3);
  CHECK(meta["term_norms"].size() == 4);
  CHECK(fs::exists(kRoot / "sp" / "config.ini"));
}

TEST_CASE("denoise summary schema") {
  REQUIRE(cli(out("dn") + " denoise --noise-rel 0.05 --warmup 50 --draws 100") == 0);
  CHECK(first_line(kRoot / "dn" / "summary.csv") == "x,truth,y,map,exact_mode,mean,variance,hpd_lo,hpd_hi");
  CHECK(first_line(kRoot / "dn" / "coefficients.csv").find("hpd_lo") != std::string::npos);
  const TensorFile s = read_tensor(kRoot / "dn" / "samples.ipt");
  CHECK(s.dims == std::vector<std::uint64_t>{100, 64});
  const auto meta = metadata("dn");
  CHECK(meta["parameters"]["noise_rel"] == 0.05);
  CHECK(meta["parameters"]["trunc_order"] == 5);
  CHECK(meta["map"]["status"] == "converged");

  REQUIRE(cli(out("dn_map") + " denoise --map-only") == 0);
  CHECK(first_line(kRoot / "dn_map" / "summary.csv") == "x,truth,y,map,exact_mode");
  CHECK_FALSE(fs::exists(kRoot / "dn_map" / "samples.ipt"));
}

TEST_CASE("resolved config reproduces a run") {
  REQUIRE(cli(out("cfg_a") + " --seed 11 compare-fd --alphas 1.5 2 2.5") == 0);
  REQUIRE(cli("--config " + (kRoot / "cfg_a" / "config.ini").string() + " " + out("cfg_b") + " compare-fd") == 0);
  for (const auto& e : fs::directory_iterator(kRoot / "cfg_a")) {
    CHECK_MESSAGE(slurp(e.path()) == slurp(kRoot / "cfg_b" / e.path().filename()), e.path().filename().string());
  }
  CHECK(metadata("cfg_b")["parameters"]["alphas"].size() == 3);
}

TEST_CASE("ct geometry flags reach the outputs") {
  REQUIRE(cli(out("ct") + " ct --grid 32 --half-band 8 --angles 12 --detectors 24 --quad-order 24 --map-only") == 0);
  CHECK(read_tensor(kRoot / "ct" / "sinogram.ipt").dims == std::vector<std::uint64_t>{12, 24});
  CHECK(read_tensor(kRoot / "ct" / "phantom.ipt").dims == std::vector<std::uint64_t>{1024});
  const auto meta = metadata("ct");
  CHECK(meta["parameters"]["angles"] == 12);
  CHECK(meta.contains("fbp_error"));
  CHECK(meta.contains("map_error"));
  CHECK(first_line(kRoot / "ct" / "sinogram.csv") == "theta,s,y_clean,y");
}

TEST_CASE("hierarchical-sample stacks") {
  REQUIRE(cli(out("hs") + " hierarchical-sample --grid 16 --half-band 8 --sigma-draws 2 --samples 3") == 0);
  CHECK(read_tensor(kRoot / "hs" / "sigma.ipt").dims == std::vector<std::uint64_t>{2, 16, 16});
  CHECK(read_tensor(kRoot / "hs" / "xi_normalized.ipt").dims == std::vector<std::uint64_t>{6, 16, 16});
  CHECK(read_tensor(kRoot / "hs" / "level_set.ipt").dims == std::vector<std::uint64_t>{6, 16, 16});
}

TEST_CASE("exit codes") {
  CHECK(cli("--help") == 0);
  CHECK(cli(out("bad")) == 2);  // no subcommand
  CHECK(cli(out("bad") + " denoise --noise-rel -1") == 2);
  CHECK(cli(out("bad") + " denoise --no-such-flag") == 2);
  CHECK(cli("--config /nonexistent/config.ini " + out("bad") + " denoise") == 2);
  CHECK(cli(out("bad") + " --threads 0 sample-prior") == 2);
  CHECK(cli(out("bad") + " ct --angles 1 --map-only") == 2);  // FBP needs two angles
  CHECK(cli(out("bad") + " sample-prior --sigma-base -5 --sigma-amplitude 0") == 3);
}
