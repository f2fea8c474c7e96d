#include "relapprox/harness.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "relapprox/error.hpp"
#include "relapprox/rng.hpp"

namespace relapprox {

// ---------------------------------------------------------------- config

namespace {

Rational rational_from_json(const nlohmann::json& v, const std::string& key) {
  if (v.is_string()) return Rational::parse(v.get<std::string>());
  if (v.is_number_integer()) return Rational(static_cast<i128>(v.get<std::int64_t>()));
  if (v.is_number_float()) return Rational::parse(v.dump());
  throw Error("config", "field '" + key + "' must be a number or a rational string");
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<std::string_view> known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw Error("config", "unknown field '" + it.key() + "' in " + where);
}

std::string csv_field(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error("config", "configuration must be a JSON object");
  reject_unknown(j,
                 {"generator", "n", "family", "p", "eps", "constants", "caps", "seeds", "points_file", "force_large_n",
                  "max_listed_violations", "out_dir"},
                 "config");
  ExperimentConfig c;
  try {
    if (j.contains("generator")) c.generator = parse_generator(j.at("generator").get<std::string>());
    if (j.contains("n")) c.n = j.at("n").get<std::size_t>();
    if (!j.contains("family")) throw Error("config", "missing field 'family'");
    try {
      c.family = RangeFamily::parse(j.at("family").get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw Error("config", e.what());
    }
    if (!j.contains("p") || !j.contains("eps")) throw Error("config", "missing field 'p' or 'eps'");
    c.params.p = rational_from_json(j.at("p"), "p");
    c.params.eps = rational_from_json(j.at("eps"), "eps");
    if (j.contains("constants")) {
      const auto& k = j.at("constants");
      reject_unknown(k, {"A", "C", "D", "D_base", "gamma", "eps_scale"}, "constants");
      auto set = [&](const char* name, Rational& dst) {
        if (k.contains(name)) dst = rational_from_json(k.at(name), name);
      };
      set("A", c.params.constants.A);
      set("C", c.params.constants.C);
      set("D", c.params.constants.D);
      set("D_base", c.params.constants.D_base);
      set("gamma", c.params.constants.gamma);
      set("eps_scale", c.params.constants.eps_scale);
    }
    if (j.contains("caps")) {
      const auto& k = j.at("caps");
      reject_unknown(k, {"initial_retries", "mt_max_resamples"}, "caps");
      if (k.contains("initial_retries")) c.params.caps.initial_retries = k.at("initial_retries").get<std::uint64_t>();
      if (k.contains("mt_max_resamples")) c.params.caps.mt_max_resamples = k.at("mt_max_resamples").get<std::uint64_t>();
    }
    if (j.contains("seeds")) {
      const auto& s = j.at("seeds");
      if (s.is_array()) {
        for (const auto& v : s) c.seeds.push_back(v.get<std::uint64_t>());
      } else if (s.is_object()) {
        reject_unknown(s, {"from", "count"}, "seeds");
        const auto from = s.value("from", std::uint64_t{1});
        const auto count = s.at("count").get<std::uint64_t>();
        for (std::uint64_t k = 0; k < count; ++k) c.seeds.push_back(from + k);
      } else {
        throw Error("config", "'seeds' must be a list or {\"from\", \"count\"}");
      }
    }
    if (j.contains("points_file")) c.points_file = j.at("points_file").get<std::string>();
    if (j.contains("force_large_n")) c.force_large_n = j.at("force_large_n").get<bool>();
    if (j.contains("max_listed_violations")) c.max_listed_violations = j.at("max_listed_violations").get<std::size_t>();
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error("config", e.what());
  }
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["generator"] = std::string(to_string(generator));
  j["n"] = n;
  j["family"] = family.name();
  j["p"] = params.p.str();
  j["eps"] = params.eps.str();
  const Constants& k = params.constants;
  j["constants"] = {{"A", k.A.str()},         {"C", k.C.str()},         {"D", k.D.str()},
                    {"D_base", k.D_base.str()}, {"gamma", k.gamma.str()}, {"eps_scale", k.eps_scale.str()}};
  j["caps"] = {{"initial_retries", params.caps.initial_retries}, {"mt_max_resamples", params.caps.mt_max_resamples}};
  j["seeds"] = seeds;
  if (points_file) j["points_file"] = *points_file;
  j["force_large_n"] = force_large_n;
  j["max_listed_violations"] = max_listed_violations;
  return j;
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw Error("config", "no seeds");
  if (!points_file && n == 0) throw Error("config", "n must be at least 1");
  if (!points_file && n > family.enumeration_cap() && !force_large_n)
    throw Error("config", "n = " + std::to_string(n) + " exceeds the " + family.name() + " enumeration cap of " +
                              std::to_string(family.enumeration_cap()) + " (set force_large_n)");
  params.validate();
}

ExperimentConfig read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("config", "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("config", path + ": " + e.what());
  }
  return ExperimentConfig::from_json(j);
}

// ---------------------------------------------------------------- comparison

double median(std::vector<double> values) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : (values[m - 1] + values[m]) / 2;
}

void ComparisonTable::aggregate() {
  std::vector<double> b, s, r;
  baseline_passes = construct_passes = 0;
  for (const auto& row : rows) {
    b.push_back(static_cast<double>(row.baseline_size));
    s.push_back(static_cast<double>(row.support));
    r.push_back(static_cast<double>(row.resample_count));
    baseline_passes += row.baseline_pass;
    construct_passes += row.construct_pass;
  }
  median_baseline_size = median(b);
  median_support = median(s);
  median_resamples = median(r);
}

nlohmann::json ComparisonTable::to_json() const {
  nlohmann::json j;
  auto& list = j["rows"] = nlohmann::json::array();
  for (const auto& r : rows)
    list.push_back({{"seed", r.seed},
                    {"mode", r.mode},
                    {"n", r.n},
                    {"baseline_size", r.baseline_size},
                    {"baseline_pass", r.baseline_pass},
                    {"support", r.support},
                    {"construct_pass", r.construct_pass},
                    {"resample_count", r.resample_count},
                    {"initial_retries", r.initial_retries}});
  j["median_baseline_size"] = median_baseline_size;
  j["median_support"] = median_support;
  j["median_resamples"] = median_resamples;
  j["baseline_passes"] = baseline_passes;
  j["construct_passes"] = construct_passes;
  return j;
}

std::string ComparisonTable::to_csv() const {
  std::ostringstream o;
  o << "seed,mode,n,baseline_size,baseline_pass,support,construct_pass,resample_count,initial_retries\n";
  for (const auto& r : rows)
    o << r.seed << ',' << r.mode << ',' << r.n << ',' << r.baseline_size << ',' << r.baseline_pass << ','
      << r.support << ',' << r.construct_pass << ',' << r.resample_count << ',' << r.initial_retries << '\n';
  return o.str();
}

// ---------------------------------------------------------------- one seed

std::span<const std::string_view> check_names() {
  static constexpr std::array<std::string_view, 7> names = {
      "construct", "relative_vs_X", "pnet_vs_X", "relative_vs_F", "events_clear", "size_event", "baseline_relative_vs_X"};
  return names;
}

SeedResult run_seed(const PointSet& points, const RangeCatalog& catalog_X, const ExperimentConfig& config,
                    std::uint64_t seed) {
  SeedResult sr;
  sr.seed = seed;
  const std::size_t n = points.size();
  const Rational& p = config.params.p;
  const Rational& eps = config.params.eps;
  std::map<std::string_view, CheckResult> checks;
  for (std::string_view name : check_names()) {
    CheckResult c;
    c.name = std::string(name);
    c.applicable = false;
    c.must_pass = name != "baseline_relative_vs_X";
    checks[name] = c;
  }
  auto record = [&](std::string_view name, bool pass, std::string detail) {
    CheckResult& c = checks[name];
    c.applicable = true;
    c.pass = pass;
    c.detail = std::move(detail);
  };
  auto add_violations = [&](const std::string& check, const ViolationReport& rep) {
    for (const Violation& v : rep.violations) sr.violations.emplace_back(check, v);
  };

  sr.comparison.seed = seed;
  sr.comparison.n = n;
  try {
    ConstructionResult res = construct(points, catalog_X, config.params, seed);
    const ResolvedPlan& plan = res.report.plan;
    sr.construction = res.report.to_json();
    sr.comparison.mode = std::string(to_string(plan.mode));
    sr.comparison.support = res.sample.support_size();
    sr.comparison.resample_count = res.report.mt.resample_count;
    sr.comparison.initial_retries = res.report.initial_retries;
    record("construct", true, std::string(to_string(plan.mode)));

    auto vx = check_relative(catalog_X, res.sample.measure_on_X(n), p, eps, config.max_listed_violations);
    record("relative_vs_X", vx.pass,
           std::to_string(vx.violation_count) + " violations; max mult " + vx.max_multiplicative_error.str() +
               "; max add " + vx.max_additive_error.str());
    add_violations("relative_vs_X", vx);
    sr.comparison.construct_pass = vx.pass;

    auto net = check_pnet(catalog_X, to_mask(n, res.sample.support()), p);
    record("pnet_vs_X", net.pass,
           net.pass ? std::to_string(net.heavy_ranges) + " heavy ranges stabbed"
                    : "range " + std::to_string(*net.witness) + " missed");

    if (plan.mode == Mode::full) {
      const RangeCatalog& cf = *res.catalog_F;
      const Rational two_eps = Rational(2) * plan.eps_int;
      auto vf = check_relative(cf, res.sample.measure_on_F(), plan.p_int, two_eps, config.max_listed_violations);
      record("relative_vs_F", vf.pass,
             std::to_string(vf.violation_count) + " violations at (p_int; 2 eps_int) = (" + plan.p_int.str() + "; " +
                 two_eps.str() + ")");
      add_violations("relative_vs_F", vf);

      auto events = violated_events(cf, res.layers, res.partition, res.coins, plan);
      std::size_t a_events = 0;
      for (const auto& e : events) a_events += e.kind == EventKind::A_tau;
      record("events_clear", a_events == 0, std::to_string(a_events) + " range events violated");

      const i128 a = plan.pi.num(), b = plan.pi.den();
      const i128 gn = plan.constants.gamma.num(), gd = plan.constants.gamma.den();
      const i128 f1 = static_cast<i128>(res.sample.F1.size()), l = static_cast<i128>(res.partition.light.size());
      const bool size_ok = checked_mul(checked_mul(f1, b), gd) <= checked_mul(checked_mul(gd + gn, a), l);
      record("size_event", size_ok,
             "|F1| = " + std::to_string(res.sample.F1.size()) + ", (1+gamma) pi |L| = " +
                 ((Rational(1) + plan.constants.gamma) * plan.pi * Rational(l)).str());
    }
  } catch (const Error& e) {
    sr.ok = false;
    sr.error_stage = e.stage();
    sr.error = e.what();
    record("construct", false, e.what());
  } catch (const std::exception& e) {
    sr.ok = false;
    sr.error_stage = "internal";
    sr.error = e.what();
    record("construct", false, e.what());
  }

  try {
    Rng rng = Rng::for_stage(seed, "baseline");
    auto base = baseline_sample(n, p, eps, config.params.constants.D_base, rng);
    sr.comparison.baseline_size = base.size();
    auto vb = check_relative(catalog_X, CountingMeasure::uniform(n, base), p, eps, config.max_listed_violations);
    sr.comparison.baseline_pass = vb.pass;
    record("baseline_relative_vs_X", vb.pass, std::to_string(vb.violation_count) + " violations");
  } catch (const std::exception& e) {
    record("baseline_relative_vs_X", false, e.what());
  }

  for (std::string_view name : check_names()) sr.checks.push_back(checks[name]);
  return sr;
}

// ---------------------------------------------------------------- run

Report run(const ExperimentConfig& config) {
  config.validate();
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  Report rep;
  rep.config = config;
  EnumerationOptions opts;
  opts.force_large_n = config.force_large_n;

  std::optional<PointSet> fixed;
  std::optional<RangeCatalog> fixed_catalog;
  if (config.points_file) {
    fixed = read_point_set_file(*config.points_file);
    rep.config.n = fixed->size();
  }
  nlohmann::json per_seed_time = nlohmann::json::array();
  for (std::uint64_t seed : config.seeds) {
    const auto ts = clock::now();
    SeedResult sr;
    try {
      if (fixed) {
        if (!fixed_catalog) fixed_catalog = canonical_ranges(*fixed, config.family, opts);
        sr = run_seed(*fixed, *fixed_catalog, config, seed);
      } else {
        const PointSet pts = generate_points(config.generator, config.n, seed, config.family.dim());
        const RangeCatalog cat = canonical_ranges(pts, config.family, opts);
        sr = run_seed(pts, cat, config, seed);
      }
    } catch (const Error& e) {
      sr = SeedResult{};
      sr.seed = seed;
      sr.ok = false;
      sr.error_stage = e.stage();
      sr.error = e.what();
      sr.comparison.seed = seed;
      sr.comparison.n = rep.config.n;
      for (std::string_view name : check_names()) {
        CheckResult c;
        c.name = std::string(name);
        c.must_pass = name != "baseline_relative_vs_X";
        c.applicable = name == "construct";
        c.detail = name == "construct" ? e.what() : "";
        sr.checks.push_back(c);
      }
    }
    per_seed_time.push_back(std::chrono::duration<double>(clock::now() - ts).count());
    rep.seeds.push_back(std::move(sr));
  }
  for (const SeedResult& sr : rep.seeds) {
    rep.comparison.rows.push_back(sr.comparison);
    for (const CheckResult& c : sr.checks)
      if (c.must_pass && c.applicable && !c.pass) rep.must_pass_ok = false;
  }
  rep.comparison.aggregate();
  rep.timing = {{"total_seconds", std::chrono::duration<double>(clock::now() - t0).count()},
                {"per_seed_seconds", per_seed_time}};
  return rep;
}

nlohmann::json Report::body() const {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["config"] = config.to_json();
  auto& list = j["seeds"] = nlohmann::json::array();
  for (const SeedResult& sr : seeds) {
    nlohmann::json s;
    s["seed"] = sr.seed;
    s["ok"] = sr.ok;
    if (!sr.ok) s["error"] = {{"stage", sr.error_stage}, {"message", sr.error}};
    s["construction"] = sr.construction;
    auto& cs = s["checks"] = nlohmann::json::array();
    for (const CheckResult& c : sr.checks)
      cs.push_back({{"name", c.name},
                    {"must_pass", c.must_pass},
                    {"applicable", c.applicable},
                    {"pass", c.pass},
                    {"detail", c.detail}});
    s["violation_count_listed"] = sr.violations.size();
    list.push_back(std::move(s));
  }
  j["comparison"] = comparison.to_json();
  j["must_pass_ok"] = must_pass_ok;
  return j;
}

std::string Report::reproducibility_hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(body().dump())));
  return buf;
}

nlohmann::json Report::to_json() const {
  nlohmann::json j = body();
  j["reproducibility_hash"] = reproducibility_hash();
  j["timing"] = timing;
  return j;
}

std::string Report::checks_csv() const {
  std::ostringstream o;
  o << "seed,check,must_pass,applicable,pass,detail\n";
  for (const SeedResult& sr : seeds)
    for (const CheckResult& c : sr.checks)
      o << sr.seed << ',' << c.name << ',' << c.must_pass << ',' << c.applicable << ',' << c.pass << ','
        << csv_field(c.detail) << '\n';
  return o.str();
}

std::string Report::violations_csv() const {
  std::ostringstream o;
  o << "seed,check,range_id,branch,ground,approx,lower,upper,slack\n";
  for (const SeedResult& sr : seeds)
    for (const auto& [check, v] : sr.violations)
      o << sr.seed << ',' << check << ',' << v.range_id << ',' << to_string(v.branch) << ',' << v.ground.str() << ','
        << v.approx.str() << ',' << v.lower.str() << ',' << v.upper.str() << ',' << v.slack.str() << '\n';
  return o.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("output", "cannot write " + path.string());
  out << content;
}

}  // namespace

void write_outputs(const Report& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path d(dir);
  write_file(d / "report.json", report.to_json().dump(2) + "\n");
  write_file(d / "checks.csv", report.checks_csv());
  write_file(d / "violations.csv", report.violations_csv());
  write_file(d / "comparison.csv", report.comparison.to_csv());
}

ComparisonTable compare(const PointSet& points, const RangeFamily& family, const ApproxParams& params,
                        std::span<const std::uint64_t> seeds, const EnumerationOptions& options) {
  if (seeds.empty()) throw Error("config", "no seeds");
  const RangeCatalog cat = canonical_ranges(points, family, options);
  ExperimentConfig cfg;
  cfg.n = points.size();
  cfg.family = family;
  cfg.params = params;
  cfg.seeds.assign(seeds.begin(), seeds.end());
  ComparisonTable table;
  for (std::uint64_t s : seeds) table.rows.push_back(run_seed(points, cat, cfg, s).comparison);
  table.aggregate();
  return table;
}

// ---------------------------------------------------------------- profile

ProfileReport profile(const RangeCatalog& catalog, std::span<const std::size_t> ks) {
  ProfileReport rep;
  rep.family = catalog.family();
  rep.n = catalog.ground_size();
  rep.rows = well_behaved_profile(catalog, ks);
  for (const ProfileRow& r : rep.rows)
    if (r.k > 0) rep.fitted_beta = std::max(rep.fitted_beta, static_cast<double>(r.count) / r.bound);
  return rep;
}

ProfileReport profile(const PointSet& points, const RangeFamily& family, std::span<const std::size_t> ks,
                      const EnumerationOptions& options) {
  return profile(canonical_ranges(points, family, options), ks);
}

nlohmann::json ProfileReport::to_json() const {
  nlohmann::json j;
  j["family"] = family.name();
  j["n"] = n;
  j["fitted_beta"] = fitted_beta;
  auto& rows_j = j["rows"] = nlohmann::json::array();
  for (const ProfileRow& r : rows)
    rows_j.push_back({{"k", r.k}, {"count", r.count}, {"bound", r.bound}, {"exceeds", r.exceeds}});
  return j;
}

std::string ProfileReport::to_csv() const {
  std::ostringstream o;
  o << "family,n,k,count,bound,ratio\n";
  char buf[64];
  for (const ProfileRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.6g,%.6g", r.bound, r.bound > 0 ? static_cast<double>(r.count) / r.bound : 0.0);
    o << family.name() << ',' << n << ',' << r.k << ',' << r.count << ',' << buf << '\n';
  }
  return o.str();
}

}  // namespace relapprox
