#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "lpvstab/lpvstab.hpp"
#include "oracles.hpp"

using namespace lpvstab;

namespace {

std::string data(const std::string& name) { return std::string(LPVSTAB_DATA_DIR) + "/" + name; }

std::string temp_path(const std::string& name) { return (std::filesystem::temp_directory_path() / ("lpvstab_test_" + name)).string(); }

}  // namespace

TEST(System, ValidationReportsEveryIssue) {
  SwitchedLpvSystem s = example2(0.5);
  EXPECT_TRUE(validate(s).empty());
  s.vertices[1].pop_back();
  s.vertices[0][0] = Matrix::Zero(3, 3);
  const auto issues = validate(s);
  ASSERT_EQ(issues.size(), 2u);
  EXPECT_EQ(issues[0].path, "vertices[0][0]");
  EXPECT_EQ(issues[1].path, "vertices[1]");
  EXPECT_THROW(require_valid(s), ValidationError);

  SwitchedLpvSystem t = example2(0.5);
  t.vertices[0][1](0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(validate(t).size(), 1u);
  t.m = 3;
  EXPECT_FALSE(validate(t).empty());
}

TEST(System, NormBoundedVerticesAreExtremes) {
  const auto u = example1_uncertainty();
  const auto s = example1();
  ASSERT_EQ(s.n, 5);
  ASSERT_EQ(s.m, 2);
  ASSERT_EQ(s.V, 2);
  for (int i = 0; i < 2; ++i) {
    const Matrix de = u.D[static_cast<std::size_t>(i)] * u.E[static_cast<std::size_t>(i)];
    EXPECT_TRUE(s.vertex(i, 0).isApprox(u.A0[static_cast<std::size_t>(i)] + de));
    EXPECT_TRUE(s.vertex(i, 1).isApprox(u.A0[static_cast<std::size_t>(i)] - de));
    // The midpoint recovers the nominal matrix.
    EXPECT_LT((s.at(i, Vector::Constant(2, 0.5)) - u.A0[static_cast<std::size_t>(i)]).cwiseAbs().maxCoeff(), 1e-15);
  }
  auto bad = u;
  bad.rho = -1;
  EXPECT_THROW(from_norm_bounded(bad), std::invalid_argument);
  bad = u;
  bad.D.pop_back();
  EXPECT_THROW(from_norm_bounded(bad), std::invalid_argument);
}

TEST(System, Example2FamilyMatchesClosedForm) {
  const double b = 0.37;
  const auto s = example2(b);
  Matrix a1(2, 2), a2(2, 2);
  a1 << b, b, 0, 0;
  a2 << -b, 0, b, -b;
  EXPECT_TRUE(s.vertex(0, 0).isApprox(a1));
  EXPECT_TRUE(s.vertex(0, 1).isApprox(-a1));
  EXPECT_TRUE(s.vertex(1, 0).isApprox(a2));
  EXPECT_TRUE(s.vertex(1, 1).isApprox(-a2));
  EXPECT_THROW(example2(-0.1), std::invalid_argument);
}

TEST(System, DataFilesMatchBuiltins) {
  EXPECT_TRUE(load_system(data("example1.json")) == example1());
  EXPECT_TRUE(load_system(data("example2_theta0.7.json")) == example2(0.7));
  const auto fam = load_family(data("example2_family.json"));
  EXPECT_TRUE(fam.at(0.3) == example2(0.3));
}

TEST(System, JsonRoundTripIsExact) {
  SplitRng rng(41);
  for (int trial = 0; trial < 5; ++trial) {
    const auto s = oracle::random_system(rng, 3, 2, 3);
    const auto path = temp_path("roundtrip.json");
    save_system(s, path);
    EXPECT_TRUE(load_system(path) == s);
    std::remove(path.c_str());
  }
  const auto fam = example2_family();
  EXPECT_TRUE(family_from_json(family_to_json(fam)).at(0.8) == fam.at(0.8));
}

TEST(System, ParseErrorsCarryLineNumbers) {
  const std::string text = "{\n  \"n\": 2,\n  \"m\": 1,\n  \"V\": ,\n}";
  try {
    parse_system(text, "sys.json");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("sys.json:4:"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_system("{\"n\": 2, \"m\": 1}"), ParseError);
  EXPECT_THROW(parse_system("{\"n\": 2, \"m\": 1, \"V\": 1, \"vertices\": [[[[1, 2], [3]]]]}"), ParseError);
  EXPECT_THROW(parse_system("[1, 2]"), ParseError);
  EXPECT_THROW(load_system(data("does_not_exist.json")), Error);
}

TEST(System, StructurallyValidButInconsistentIsAValidationError) {
  const std::string text = R"({"n": 2, "m": 2, "V": 1, "vertices": [[[[1, 0], [0, 1]]]]})";
  const auto s = parse_system(text);
  EXPECT_THROW(require_valid(s), ValidationError);
}

TEST(Signals, PeriodicExplicitAndRandom) {
  EXPECT_EQ(SwitchingSignal::periodic_cycle(3, 1).materialize(7, 3), (std::vector<int>{1, 2, 0, 1, 2, 0, 1}));
  EXPECT_EQ(SwitchingSignal::explicit_modes({0, 1, 1}).materialize(3, 2), (std::vector<int>{0, 1, 1}));
  EXPECT_THROW(SwitchingSignal::explicit_modes({0, 1}).materialize(3, 2), Error);
  EXPECT_THROW(SwitchingSignal::explicit_modes({0, 2}).materialize(2, 2), Error);
  const auto r1 = SwitchingSignal::random(9).materialize(200, 3);
  const auto r2 = SwitchingSignal::random(9).materialize(200, 3);
  EXPECT_EQ(r1, r2);
  for (int i = 0; i < 3; ++i) EXPECT_NE(std::find(r1.begin(), r1.end(), i), r1.end());
  EXPECT_NE(SwitchingSignal::random(10).materialize(200, 3), r1);
}

TEST(Signals, ParameterTrajectoriesStayOnTheSimplex) {
  for (const auto& traj : {ParameterTrajectory::random(4), ParameterTrajectory::sinusoidal(0.3, 0.1),
                           ParameterTrajectory::constant(Vector::Constant(3, 1.0 / 3))}) {
    const auto pts = traj.materialize(50, 3);
    ASSERT_EQ(pts.size(), 50u);
    for (const auto& a : pts) {
      EXPECT_GE(a.minCoeff(), 0.0);
      EXPECT_NEAR(a.sum(), 1.0, 1e-12);
    }
  }
  const auto a = ParameterTrajectory::random(4).materialize(20, 2);
  const auto b = ParameterTrajectory::random(4).materialize(20, 2);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k], b[k]);
  EXPECT_THROW(ParameterTrajectory::constant(Vector::Constant(2, 0.7)).materialize(3, 2), Error);
  EXPECT_THROW(ParameterTrajectory::constant(Vector::Constant(3, 1.0 / 3)).materialize(3, 2), Error);
  EXPECT_THROW(ParameterTrajectory::explicit_points({Vector::Constant(2, 0.5)}).materialize(2, 2), Error);
}

TEST(Rng, SimplexSamplesAreFlatDirichlet) {
  SplitRng rng(2);
  Vector mean = Vector::Zero(3);
  const int n = 20000;
  for (int i = 0; i < n; ++i) mean += rng.simplex(3);
  mean /= n;
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(mean(i), 1.0 / 3.0, 0.01);
}
