#include <gtest/gtest.h>

#include <json.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(CBED_BINARY) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {-1, ""};
  std::string out;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), p)) out += buf.data();
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("cbed_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Cli, LatticeInfoCounts) {
  auto r = run("lattice-info --lattice single-box");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("4 sites, 1 box, 6 bonds, 1 cut\n", 0), 0u) << r.out;
  r = run("lattice-info --lattice checkerboard:4x2 --periodic");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("8 sites, 4 boxes, 24 bonds, 2 cuts\n", 0), 0u) << r.out;
}

TEST(Cli, OddPeriodicExtentIsUsageError) {
  const auto r = run("lattice-info --lattice checkerboard:5x2 --periodic");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("even extent"), std::string::npos) << r.out;
  EXPECT_EQ(run("lattice-info --lattice checkerboard:5x2 --open").code, 0);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("solve --no-such-flag").code, 2);
  EXPECT_EQ(run("solve --spin 0.3 --lattice single-box").code, 2);
  EXPECT_EQ(run("verify --suite bogus").code, 2);
  EXPECT_EQ(run("solve --lattice nowhere.json").code, 2);
}

TEST(Cli, SolveExamples) {
  auto r = run("solve --lattice single-box --spin 1/2");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("degeneracy 2\n"), std::string::npos) << r.out;
  r = run("solve --lattice single-box --spin 1");
  EXPECT_NE(r.out.find("degeneracy 3\n"), std::string::npos) << r.out;
  r = run("solve --lattice dimer");
  ASSERT_EQ(r.out.rfind("E0 = ", 0), 0u);
  EXPECT_NEAR(std::stod(r.out.substr(5)), -0.75, 1e-12);

  const auto dir = scratch("solve");
  r = run("solve --lattice checkerboard-4x2 --dump --out " + dir.string());
  EXPECT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(slurp(dir / "ground.json"));
  EXPECT_EQ(j["schema"], 1);
  for (const auto& v : j["ground"]["vectors"]) EXPECT_LT(std::abs(v["s2"].get<double>()), 1e-8);
  EXPECT_TRUE(j["dump"]["c"].is_array());
  EXPECT_TRUE(fs::exists(dir / "metadata.json"));
}

TEST(Cli, LatticeFromJsonFile) {
  const auto dir = scratch("spec");
  fs::create_directories(dir);
  std::ofstream(dir / "lat.json") << R"({"kind": "checkerboard", "extent": [4, 2], "periodic": [true, true]})";
  const auto r = run("lattice-info --lattice " + (dir / "lat.json").string() + " --out " + dir.string());
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("8 sites, 4 boxes", 0), 0u);
  EXPECT_TRUE(fs::exists(dir / "lattice.json"));
}

TEST(Cli, VerifyAllPassesAndIsReproducible) {
  const auto a = scratch("verify_a"), b = scratch("verify_b");
  const auto r = run("verify --suite all --lattice checkerboard-4x2 --workers 1 --out " + a.string());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(run("verify --suite all --lattice checkerboard-4x2 --workers 2 --out " + b.string()).code, 0);
  for (const char* f : {"report_ground.json", "report_ice.json", "report_thermo.json", "report_reflection.json",
                        "thermo_curve.csv"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  const auto j = nlohmann::json::parse(slurp(a / "report_thermo.json"));
  EXPECT_EQ(j["schema"], 1);
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_FALSE(j.contains("timestamp"));
  EXPECT_EQ(slurp(a / "thermo_curve.csv").rfind("beta,B,Z,F,M,chi,bound_margin\n", 0), 0u);
  EXPECT_TRUE(nlohmann::json::parse(slurp(a / "metadata.json")).contains("timestamp"));
}

TEST(Cli, FerromagnetFailsIceSuite) {
  const auto dir = scratch("ferro");
  const auto r = run("verify --suite ice --ferro --out " + dir.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("FAIL"), std::string::npos);
  const auto j = nlohmann::json::parse(slurp(dir / "report_ice.json"));
  EXPECT_FALSE(j["pass"].get<bool>());
}

TEST(Cli, ScanWritesCsv) {
  const auto r = run("scan --lattice single-box --beta-grid 1,2 --b-grid 0,0.5");
  EXPECT_EQ(r.code, 0);
  std::istringstream is(r.out);
  std::string line;
  int n = 0;
  std::getline(is, line);
  EXPECT_EQ(line, "beta,B,Z,F,M,chi,bound_margin");
  while (std::getline(is, line)) ++n;
  EXPECT_EQ(n, 4);
}
