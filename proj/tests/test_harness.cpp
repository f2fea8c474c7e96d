#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "relapprox/error.hpp"
#include "relapprox/harness.hpp"
#include "relapprox/kernels.hpp"

using namespace relapprox;

namespace {

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

ExperimentConfig small_config() {
  return ExperimentConfig::from_json(nlohmann::json::parse(R"({
    "generator": "uniform_square", "n": 40, "family": "halfplanes2d",
    "p": "1/16", "eps": 0.5, "seeds": [1, 2, 3]
  })"));
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("generators") {
    const PointSet tri = generate_points(GeneratorKind::convex_circle, 3, 77);
    REQUIRE(tri.size() == 3);
    CHECK(kernels::orient2d_exact(tri[0], tri[1], tri[2]) != 0);
    for (auto kind : {GeneratorKind::uniform_square, GeneratorKind::grid, GeneratorKind::convex_circle,
                      GeneratorKind::clustered}) {
      const PointSet a = generate_points(kind, 30, 5), b = generate_points(kind, 30, 5);
      REQUIRE(a.size() == 30);
      for (std::size_t j = 0; j < 30; ++j) CHECK(a[j] == b[j]);
    }
    const PointSet grid = generate_points(GeneratorKind::grid, 9, 1);
    std::set<std::pair<Fixed, Fixed>> cells;
    for (std::size_t j = 0; j < 9; ++j) cells.insert({grid[j].coords[0], grid[j].coords[1]});
    std::set<std::pair<Fixed, Fixed>> expected;
    for (Fixed x = 0; x < 3; ++x)
      for (Fixed y = 0; y < 3; ++y) expected.insert({x * kCoordScale, y * kCoordScale});
    CHECK(cells == expected);
    const PointSet cube = generate_points(GeneratorKind::uniform_cube, 10, 1, 3);
    CHECK(cube.dim() == 3);
    CHECK(generate_points(GeneratorKind::clustered, 10, 1, 3).dim() == 3);
    CHECK(parse_generator("grid") == GeneratorKind::grid);
    CHECK_THROWS(parse_generator("spiral"));
  }

  TEST_CASE("configuration errors") {
    ExperimentConfig c = small_config();
    c.seeds.clear();
    try {
      (void)run(c);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("no seeds") != std::string::npos);
    }
    CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::parse(
                        R"({"family": "rects2d", "n": 10, "p": 0.1, "eps": 0.5, "seeds": [1], "colour": 1})")),
                    Error);
    CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::parse(R"({"n": 10, "p": 0.1, "eps": 0.5})")), Error);
    CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::parse(
                        R"({"family": "rects2d", "p": 0.1, "eps": 0.5, "constants": {"Q": 1}})")),
                    Error);
    ExperimentConfig big = small_config();
    big.n = 100000;
    CHECK_THROWS_AS(big.validate(), Error);
  }

  TEST_CASE("config parsing") {
    const auto c = ExperimentConfig::from_json(nlohmann::json::parse(R"({
      "family": "boxes3d", "generator": "uniform_cube", "n": 20, "p": "0.0625", "eps": "1/4",
      "constants": {"eps_scale": 2, "D": "1/2"}, "caps": {"initial_retries": 5},
      "seeds": {"from": 10, "count": 3}
    })"));
    CHECK(c.family.kind == FamilyKind::boxes3d);
    CHECK(c.params.p == Rational(1, 16));
    CHECK(c.params.eps == Rational(1, 4));
    CHECK(c.params.constants.eps_scale == Rational(2));
    CHECK(c.params.constants.D == Rational(1, 2));
    CHECK(c.params.constants.A == Rational(1));
    CHECK(c.params.caps.initial_retries == 5);
    CHECK(c.seeds == std::vector<std::uint64_t>{10, 11, 12});
    // Round trip through json.
    const auto again = ExperimentConfig::from_json(c.to_json());
    CHECK(again.to_json() == c.to_json());
  }

  TEST_CASE("degenerate single-seed run has exact-zero errors") {
    ExperimentConfig c = small_config();
    c.seeds = {1};
    const Report rep = run(c);
    REQUIRE(rep.seeds.size() == 1);
    CHECK(rep.must_pass_ok);
    CHECK(rep.seeds[0].ok);
    const auto body = rep.body();
    CHECK(body["seeds"][0]["construction"]["plan"]["mode"] == "degenerate_whole_set");
    bool saw = false;
    for (const auto& ck : rep.seeds[0].checks)
      if (ck.name == "relative_vs_X") {
        saw = true;
        CHECK(ck.pass);
        CHECK(ck.detail.find("max mult 0; max add 0") != std::string::npos);
      }
    CHECK(saw);
  }

  TEST_CASE("reports are reproducible and csv rows equal seeds x checks") {
    ExperimentConfig c = small_config();
    c.params.p = Rational(1, 8);
    c.params.constants.eps_scale = Rational(2);
    c.params.constants.D = Rational(1, 8);  // full mode: |F| = 80 of n = 100
    c.n = 100;
    const Report a = run(c), b = run(c);
    CHECK(a.reproducibility_hash() == b.reproducibility_hash());
    CHECK(a.body().dump() == b.body().dump());
    CHECK(a.reproducibility_hash().size() == 16);
    CHECK(line_count(a.checks_csv()) == 1 + c.seeds.size() * check_names().size());
    CHECK(a.comparison.rows.size() == c.seeds.size());
    CHECK(line_count(a.comparison.to_csv()) == 1 + c.seeds.size());
    // Timing lives outside the hashed body.
    CHECK_FALSE(a.body().contains("timing"));
    CHECK(a.to_json().contains("timing"));

    const auto dir = std::filesystem::temp_directory_path() / "relapprox_harness_test";
    std::filesystem::remove_all(dir);
    write_outputs(a, dir.string());
    for (const char* f : {"report.json", "checks.csv", "violations.csv", "comparison.csv"})
      CHECK(std::filesystem::exists(dir / f));
    std::ifstream in(dir / "report.json");
    const auto j = nlohmann::json::parse(in);
    CHECK(j["reproducibility_hash"] == a.reproducibility_hash());
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("points file replaces the generator") {
    const auto path = std::filesystem::temp_directory_path() / "relapprox_points_test.txt";
    {
      std::ofstream out(path);
      out << "# square\n0 0\n1 0\n0 1\n1 1\n0.5 0.5\n";
    }
    ExperimentConfig c = small_config();
    c.points_file = path.string();
    c.seeds = {1, 2};
    const Report rep = run(c);
    CHECK(rep.config.n == 5);
    CHECK(rep.must_pass_ok);
    std::filesystem::remove(path);
  }

  TEST_CASE("profile report") {
    const PointSet pts = generate_points(GeneratorKind::convex_circle, 20, 1);
    const std::vector<std::size_t> ks = {1, 2, 3};
    const ProfileReport pr = profile(pts, RangeFamily::of(FamilyKind::halfplanes2d), ks);
    REQUIRE(pr.rows.size() == 3);
    // count(k) = 20k + 1 against bound 20k.
    CHECK(pr.fitted_beta == doctest::Approx(21.0 / 20.0));
    CHECK(line_count(pr.to_csv()) == 4);
    CHECK(pr.to_json()["rows"].size() == 3);
  }
}
