// relapprox: run experiments, profile range counts, compare against the
// uniform baseline.
//
// Exit status: 0 success, 1 a must-pass check failed, 2 usage or input error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "relapprox/error.hpp"
#include "relapprox/harness.hpp"
#include "relapprox/kernels.hpp"

using namespace relapprox;

namespace {

void write_text(const std::string& dir, const std::string& name, const std::string& text) {
  std::filesystem::create_directories(dir);
  std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
  if (!out) throw Error("output", "cannot write " + name);
  out << text;
}

PointSet load_or_generate(const std::optional<std::string>& points_file, const std::string& generator, std::size_t n,
                          std::uint64_t seed, int dim) {
  if (points_file) return read_point_set_file(*points_file);
  return generate_points(parse_generator(generator), n, seed, dim);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relative (p,eps)-approximations for geometric range spaces"};
  app.require_subcommand(1);

  // run
  auto* run_cmd = app.add_subcommand("run", "Run a configured experiment and write report.json and CSV tables");
  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::string out_dir;
  bool force_large_n = false;
  std::optional<std::string> points_file;
  run_cmd->add_option("--config", config_path, "Experiment configuration (JSON)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", seed_override, "Run this single seed instead of the configured list");
  run_cmd->add_option("--out-dir", out_dir, "Output directory (overrides the config)");
  run_cmd->add_flag("--force-large-n", force_large_n, "Allow n above the family's enumeration cap");
  run_cmd->add_option("--points", points_file, "Point file replacing the generator")->check(CLI::ExistingFile);

  // profile
  auto* prof_cmd = app.add_subcommand("profile", "Count ranges of size <= k and write profile.csv");
  std::string family_name;
  std::size_t n = 0;
  std::vector<std::size_t> ks;
  std::string generator = "uniform_square";
  std::uint64_t seed = 1;
  prof_cmd->add_option("--family", family_name, "halfplanes2d | halfspaces3d | rects2d | boxes3d")->required();
  prof_cmd->add_option("--n", n, "Number of generated points");
  prof_cmd->add_option("--ks", ks, "Shallow sizes k (comma separated)")->required()->delimiter(',');
  prof_cmd->add_option("--generator", generator, "Point generator");
  prof_cmd->add_option("--seed", seed, "Generator seed");
  prof_cmd->add_option("--points", points_file, "Point file replacing the generator")->check(CLI::ExistingFile);
  prof_cmd->add_option("--out-dir", out_dir, "Output directory");
  prof_cmd->add_flag("--force-large-n", force_large_n, "Allow n above the family's enumeration cap");

  // compare
  auto* cmp_cmd = app.add_subcommand("compare", "Baseline sample vs. construction on one point set");
  std::string p_text, eps_text;
  std::vector<std::uint64_t> seeds;
  cmp_cmd->add_option("--family", family_name, "Range family")->required();
  cmp_cmd->add_option("--n", n, "Number of generated points");
  cmp_cmd->add_option("--p", p_text, "p as a rational (\"1/16\" or \"0.0625\")")->required();
  cmp_cmd->add_option("--eps", eps_text, "eps as a rational")->required();
  cmp_cmd->add_option("--seeds", seeds, "Seeds (comma separated)")->required()->delimiter(',');
  cmp_cmd->add_option("--generator", generator, "Point generator");
  cmp_cmd->add_option("--points-seed", seed, "Generator seed");
  cmp_cmd->add_option("--points", points_file, "Point file replacing the generator")->check(CLI::ExistingFile);
  cmp_cmd->add_option("--config", config_path, "Take constants and caps from this config")->check(CLI::ExistingFile);
  cmp_cmd->add_option("--out-dir", out_dir, "Output directory");
  cmp_cmd->add_flag("--force-large-n", force_large_n, "Allow n above the family's enumeration cap");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      ExperimentConfig cfg = read_config_file(config_path);
      if (seed_override) cfg.seeds = {*seed_override};
      if (!out_dir.empty()) cfg.out_dir = out_dir;
      if (force_large_n) cfg.force_large_n = true;
      if (points_file) cfg.points_file = points_file;
      if (cfg.out_dir.empty()) cfg.out_dir = "out";
      const Report rep = run(cfg);
      write_outputs(rep, cfg.out_dir);
      std::size_t failed = 0;
      for (const auto& s : rep.seeds)
        for (const auto& c : s.checks) failed += c.must_pass && c.applicable && !c.pass;
      std::printf("%zu seeds, %zu failed must-pass checks, hash %s, simd %s -> %s\n", rep.seeds.size(), failed,
                  rep.reproducibility_hash().c_str(), kernels::isa_name(kernels::active_isa()), cfg.out_dir.c_str());
      return rep.must_pass_ok ? 0 : 1;
    }
    const RangeFamily family = [&] {
      try {
        return RangeFamily::parse(family_name);
      } catch (const std::invalid_argument& e) {
        throw Error("config", e.what());
      }
    }();
    EnumerationOptions opts;
    opts.force_large_n = force_large_n;
    if (!points_file && n == 0) throw Error("config", "--n is required without --points");

    if (*prof_cmd) {
      const PointSet pts = load_or_generate(points_file, generator, n, seed, family.dim());
      const ProfileReport rep = profile(pts, family, ks, opts);
      const std::string dir = out_dir.empty() ? "out" : out_dir;
      write_text(dir, "profile.csv", rep.to_csv());
      write_text(dir, "profile.json", rep.to_json().dump(2) + "\n");
      std::fputs(rep.to_csv().c_str(), stdout);
      std::printf("fitted_beta %.6g\n", rep.fitted_beta);
      return 0;
    }
    if (*cmp_cmd) {
      ApproxParams params;
      if (!config_path.empty()) params = read_config_file(config_path).params;
      params.p = Rational::parse(p_text);
      params.eps = Rational::parse(eps_text);
      const PointSet pts = load_or_generate(points_file, generator, n, seed, family.dim());
      const ComparisonTable table = compare(pts, family, params, seeds, opts);
      const std::string dir = out_dir.empty() ? "out" : out_dir;
      write_text(dir, "comparison.csv", table.to_csv());
      std::fputs(table.to_csv().c_str(), stdout);
      std::printf("median baseline %.1f, median support %.1f, median resamples %.1f\n", table.median_baseline_size,
                  table.median_support, table.median_resamples);
      return table.construct_passes == table.rows.size() ? 0 : 1;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", e.stage().c_str(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
