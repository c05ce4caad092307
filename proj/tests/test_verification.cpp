#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace cbed;
using namespace cbed::testing;

TEST(Verification, AllSuitesPassOnCheckerboard4x2) {
  const auto g = checkerboard(4, 2);
  SpinRep rep(1);
  VerifyOptions opt;
  EXPECT_TRUE(verify_ground_inequalities(g, rep, opt).pass());
  EXPECT_TRUE(verify_ice_rule(g, rep, opt).pass());
  EXPECT_TRUE(verify_thermo_inequalities(g, rep, opt).report.pass());
  EXPECT_TRUE(verify_reflection(g, rep, opt).pass());
}

TEST(Verification, SingleBoxSpinOneReflection) {
  EXPECT_TRUE(verify_reflection(single_box(), SpinRep(2)).pass());
  EXPECT_TRUE(verify_ice_rule(single_box(), SpinRep(2)).pass());
}

TEST(Verification, FerromagnetFailsIceRule) {
  LatticeSpec s;
  s.kind = LatticeKind::checkerboard;
  s.coupling_sign = -1.0;
  const auto r = verify_ice_rule(build_lattice(s), SpinRep(1));
  EXPECT_FALSE(r.pass());
  EXPECT_GT(r.failures(), 0u);
}

TEST(Verification, ReportRowsCarrySignedMargins) {
  InequalityReport r;
  r.at_least("x", {}, 1.0, 2.0, 0.5);
  r.at_most("y", {}, 1.0, 2.0, 0.0);
  r.at_least("z", {}, 1.0, 1.0 + 1e-12, 1e-9);
  EXPECT_FALSE(r.rows[0].pass);
  EXPECT_DOUBLE_EQ(r.rows[0].margin, -1.0);
  EXPECT_TRUE(r.rows[1].pass);
  EXPECT_TRUE(r.rows[2].pass);
  r.at_least("nan", {}, std::nan(""), 0.0, 1.0);
  EXPECT_FALSE(r.rows[3].pass);
  EXPECT_EQ(r.failures(), 2u);
}

TEST(Verification, ReportsAreDeterministic) {
  const auto g = checkerboard(4, 2);
  SpinRep rep(1);
  const auto a = to_json(verify_reflection(g, rep)).dump();
  const auto b = to_json(verify_reflection(g, rep)).dump();
  EXPECT_EQ(a, b);
  const auto j = json::parse(a);
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["suite"], "reflection");
  EXPECT_TRUE(j["pass"].get<bool>());
}

TEST(Verification, RandomFieldDrawsSeeded) {
  const auto g = checkerboard(4, 2);
  const auto a = random_box_fields(g, 3, 1.0, 7);
  const auto b = random_box_fields(g, 3, 1.0, 7);
  const auto c = random_box_fields(g, 3, 1.0, 8);
  for (std::size_t d = 0; d < 3; ++d)
    for (std::size_t x = 0; x < 4; ++x) {
      EXPECT_EQ(a[d].at(x), b[d].at(x));
      EXPECT_LE(std::abs(a[d].at(x)), 1.0);
    }
  EXPECT_NE(a[0].at(0), c[0].at(0));
}

TEST(Io, LatticeSpecJson) {
  const auto spec = lattice_spec_from_json(json::parse(R"({"kind":"checkerboard","extent":[4,4],"periodic":true})"));
  EXPECT_EQ(spec.extent, (std::vector<std::size_t>{4, 4}));
  EXPECT_EQ(spec.periodic, (std::vector<bool>{true, true}));
  const auto back = lattice_spec_from_json(to_json(spec));
  EXPECT_EQ(back.extent, spec.extent);
  EXPECT_THROW(lattice_spec_from_json(json::parse(R"({"kind":"hexagonal"})")), std::exception);
  EXPECT_THROW(lattice_spec_from_json(json::parse(R"([1,2])")), ConfigError);
}

TEST(Io, BoxFieldsJson) {
  const auto f = box_fields_from_json(json::parse(R"({"0": 0.5, "3": -1})"));
  EXPECT_EQ(f.at(0), 0.5);
  EXPECT_EQ(f.at(3), -1.0);
  EXPECT_EQ(f.at(1), 0.0);
  EXPECT_THROW(box_fields_from_json(json::parse(R"({"a": 1})")), ConfigError);
  EXPECT_THROW(box_fields_from_json(json::parse(R"({"0": "x"})")), ConfigError);
}

TEST(Io, LatticeGraphJsonCounts) {
  const auto j = to_json(checkerboard(4, 2));
  EXPECT_EQ(j["n_sites"], 8);
  EXPECT_EQ(j["n_boxes"], 4);
  EXPECT_EQ(j["n_bonds"], 24);
  EXPECT_EQ(j["cuts"].size(), 2u);
}

TEST(Io, CsvFormat) {
  const auto g = single_box();
  SpinRep rep(1);
  HilbertSpace space(4, rep);
  const auto s = dense_spectrum(box_terms(g, rep), space, false);
  std::ostringstream os;
  write_thermo_csv(os, thermo_scan(s, 4, {1.0}, {0.0, 0.5}));
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "beta,B,Z,F,M,chi,bound_margin");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 6);
  }
  EXPECT_EQ(rows, 2);
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Io, MatrixDumpHasRealAndImaginaryParts) {
  Matrix m(1, 2);
  m << cplx(1, 2), cplx(3, -4);
  const auto j = to_json(m);
  EXPECT_EQ(j["real"][0][1], 3.0);
  EXPECT_EQ(j["imag"][0][1], -4.0);
}
