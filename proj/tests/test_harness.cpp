#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <json.hpp>
#include <sstream>

#include "nlvc/errors.hpp"
#include "nlvc/harness.hpp"
#include "nlvc/local_solutions.hpp"
#include "oracles.hpp"

using namespace nlvc;

namespace {

std::string csv_of(const ConvergenceReport& r) {
  std::ostringstream os;
  write_csv(os, r);
  return os.str();
}

ExperimentConfig poisson(const std::string& name, Strategy s = Strategy::Dtd, const std::string& loc = "full_layer") {
  ExperimentConfig c = ExperimentConfig::defaults_for(Model::Poisson);
  c.case_name = name;
  c.strategy = s;
  c.loc_mode = loc;
  return c;
}

}  // namespace

TEST_CASE("e0 closed forms") {
  SquareWithLayer sq;
  sq.horizon = 0.25;
  const PointCloud cloud(sq, 0.1);
  const std::size_t m = cloud.size();
  std::vector<double> a(m, 1.0), b(m, 1.0);
  CHECK(compute_e0(cloud, a, b, 1) == 0.0);
  for (double& x : b) x = 1.3;
  CHECK(compute_e0(cloud, a, b, 1) == doctest::Approx(0.3 * 0.1 * std::sqrt(static_cast<double>(m))).epsilon(1e-12));
  CHECK(compute_e0(cloud, a, b, 1, NormRegion::Omega) ==
        doctest::Approx(0.3 * 0.1 * std::sqrt(static_cast<double>(cloud.count(Region::Interior)))).epsilon(1e-12));

  std::vector<double> u2(2 * m, 0.0), v2(2 * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    v2[2 * i] = 3.0;
    v2[2 * i + 1] = 4.0;
  }
  CHECK(compute_e0(cloud, u2, v2, 2) == doctest::Approx(5.0 * 0.1 * std::sqrt(static_cast<double>(m))).epsilon(1e-12));
}

TEST_CASE("e0 against a midpoint L2 integral") {
  SquareWithLayer sq;
  sq.horizon = 0.25;
  auto f = [](Vec2 x) { return std::sin(2 * x.x) * std::exp(x.y); };
  const double exact =
      std::sqrt(oracle::midpoint_integral([&](Vec2 x) { return f(x) * f(x); }, -0.25, 1.25, -0.25, 1.25, 1200));
  const double h = 0.1;
  const PointCloud cloud(sq, h);
  std::vector<double> d(cloud.size()), z(cloud.size(), 0.0);
  for (std::size_t i = 0; i < cloud.size(); ++i) d[i] = f(cloud.point(i));
  CHECK(std::abs(compute_e0(cloud, d, z, 1) - exact) <= 0.5 * h * h * exact);
}

TEST_CASE("configuration checks") {
  ExperimentConfig c = poisson("poisson_sin");
  CHECK_NOTHROW(c.validate());
  CHECK(c.delta_at(3) == 0.25 / 8);
  CHECK(c.h_at(1) == doctest::Approx(0.05));
  c.loc_mode = "auto";
  CHECK(c.effective_loc_mode() == "full_layer");
  c.strategy = Strategy::Dtn;
  CHECK(c.effective_loc_mode() == "right_strip");
  CHECK(ExperimentConfig::defaults_for(Model::Lps).effective_loc_mode() == "full_layer");
  c.loc_mode = "inner_ring";
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = poisson("lps_linear");
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = poisson("nope");
  CHECK_THROWS_AS(c.validate(), LookupError);
  c = ExperimentConfig::defaults_for(Model::Lps);
  CHECK(c.rule.bond_quartic);
  c.provider = ProviderKind::Fd;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = poisson("poisson_sin");
  c.ratio = 0.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(parse_strategy("ntd"), ConfigError);
  CHECK(parse_norm_region("omega") == NormRegion::Omega);
}

TEST_CASE("consistency runs") {
  CHECK(consistency_threshold(Model::Poisson) == 1e-10);
  CHECK(consistency_threshold(Model::Lps) == 1e-9);
  for (const auto& c : {poisson("poisson_linear"), poisson("poisson_cubic", Strategy::Dtn, "right_strip")}) {
    const ConvergenceReport r = run_consistency(c);
    CHECK(r.passed);
    CHECK(r.levels.size() == 1);
    CHECK(r.levels[0].e0 <= 1e-10);
  }
  ExperimentConfig l = ExperimentConfig::defaults_for(Model::Lps);
  l.strategy = Strategy::Dtn;
  l.loc_mode = "inner_ring";
  const ConvergenceReport r = run_consistency(l);
  CHECK(r.passed);
  CHECK(r.levels[0].e0 <= 1e-9);
  CHECK_THROWS_AS(run_consistency(poisson("poisson_sin")), ConfigError);
  CHECK_THROWS_AS(run_consistency(poisson("poisson_linear", Strategy::Dtn)), ConfigError);
}

TEST_CASE("convergence report") {
  ExperimentConfig c = poisson("poisson_sin");
  c.levels = 3;
  const ConvergenceReport r = run_convergence(c);
  REQUIRE(r.levels.size() == 3);
  CHECK_FALSE(r.levels[0].rate.has_value());
  for (std::size_t k = 1; k < 3; ++k) {
    CHECK(*r.levels[k].rate == doctest::Approx(std::log2(r.levels[k - 1].e0 / r.levels[k].e0)));
    CHECK(r.levels[k].e0 < r.levels[k - 1].e0);
    CHECK(r.levels[k].delta == r.levels[k - 1].delta / 2);
    CHECK(r.levels[k].delta / r.levels[k].h == doctest::Approx(2.5));
  }
  CHECK(r.passed);

  const std::string csv = csv_of(r);
  CHECK(csv.rfind("delta,h,M,e0,rate\n0.25,0.1,225,", 0) == 0);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  std::getline(lines, line);
  CHECK(line.back() == ',');
  CHECK(csv == csv_of(run_convergence(c)));

  std::ostringstream js;
  write_json(js, r);
  const auto j = nlohmann::json::parse(js.str());
  CHECK(j["config"]["case"] == "poisson_sin");
  CHECK(j["levels"].size() == 3);
  CHECK(j["levels"][0]["rate"].is_null());
  CHECK(j["levels"][2]["e0"].get<double>() == r.levels[2].e0);
  CHECK(j["levels"][1].contains("solver"));
  CHECK(j["passed"] == true);

  c.levels = 1;
  CHECK_THROWS_AS(run_convergence(c), ConfigError);
}

TEST_CASE("norm region restricts the error to interior points") {
  ExperimentConfig c = poisson("poisson_sin");
  const double full = run_level(c, 0).e0;
  c.norm_region = NormRegion::Omega;
  const double omega = run_level(c, 0).e0;
  CHECK(omega <= full);
  CHECK(omega > 0.0);
}

TEST_CASE("solution vectors are returned on request") {
  ExperimentConfig c = poisson("poisson_quartic", Strategy::Dtn, "right_strip");
  std::vector<double> un, ul;
  const LevelResult r = run_level(c, 0, &un, &ul);
  REQUIRE(un.size() == r.points);
  REQUIRE(ul.size() == r.points);
  SquareWithLayer sq;
  sq.horizon = 0.25;
  sq.loc_mode = SquareLocMode::RightStrip;
  CHECK(compute_e0(PointCloud(sq, 0.1), un, ul, 1) == r.e0);
  CHECK(r.stats.residual <= 1e-12);
}

TEST_CASE("finite-difference provider") {
  ExperimentConfig c = poisson("poisson_linear");
  c.provider = ProviderKind::Fd;
  CHECK(run_consistency(c).passed);
  c.fd_refinement = 3;
  c.case_name = "poisson_sin";
  const double fd = run_level(c, 0).e0;
  c.provider = ProviderKind::Analytic;
  const double an = run_level(c, 0).e0;
  CHECK(std::abs(fd - an) <= 0.1 * an);
}

TEST_CASE("weight cache and matrix export") {
  const auto dir = std::filesystem::temp_directory_path() / "nlvc_harness_test";
  std::filesystem::remove_all(dir);
  ExperimentConfig c = poisson("poisson_sin", Strategy::Dtn, "right_strip");
  c.levels = 2;
  const std::string plain = csv_of(run_convergence(c));
  c.weight_cache_dir = (dir / "w").string();
  c.matrix_export_dir = (dir / "m").string();
  const std::string first = csv_of(run_convergence(c));
  const std::string cached = csv_of(run_convergence(c));
  CHECK(first == plain);
  CHECK(cached == plain);
  std::size_t weights = 0, matrices = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir / "w")) weights += e.path().filename().string().rfind("weights_", 0) == 0;
  for (const auto& e : std::filesystem::directory_iterator(dir / "m")) matrices += e.path().filename().string().rfind("matrix_", 0) == 0;
  CHECK(weights == 2);
  CHECK(matrices == 2);
  std::filesystem::remove_all(dir);
}
