#include "relapprox/plan.hpp"

#include <cmath>

#include "relapprox/error.hpp"

namespace relapprox {

namespace {

long double lg(const Rational& r) {
  return std::log2l(static_cast<long double>(r.num())) - std::log2l(static_cast<long double>(r.den()));
}

long double ld(const Rational& r) { return static_cast<long double>(r.num()) / static_cast<long double>(r.den()); }

// Exact log2 of r when it is an integer power of two.
bool exact_lg(const Rational& r, Rational& out) {
  int k = 0;
  if (!exact_log2(r, k)) return false;
  out = Rational(k);
  return true;
}

std::size_t ceil_size(long double v) {
  if (!(v < 1e18L)) return static_cast<std::size_t>(-1);
  return static_cast<std::size_t>(std::ceil(v));
}

}  // namespace

void ApproxParams::validate() const {
  const Rational zero(0), one(1);
  if (!(p > zero && p < one)) throw Error("plan", "p must lie in (0,1), got " + p.str());
  if (!(eps > zero && eps < one)) throw Error("plan", "eps must lie in (0,1), got " + eps.str());
  const std::pair<const char*, const Rational*> named[] = {{"A", &constants.A},         {"C", &constants.C},
                                                           {"D", &constants.D},         {"D_base", &constants.D_base},
                                                           {"gamma", &constants.gamma}, {"eps_scale", &constants.eps_scale}};
  for (auto [name, value] : named)
    if (!(*value > zero)) throw Error("plan", std::string("constant ") + name + " must be positive");
  if (constants.eps_scale < one) throw Error("plan", "eps_scale must be >= 1");
  if (caps.initial_retries < 1 || caps.mt_max_resamples < 1) throw Error("plan", "caps must be >= 1");
}

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::full:
      return "full";
    case Mode::standard_fallback:
      return "standard_fallback";
    case Mode::absolute_fallback:
      return "absolute_fallback";
    case Mode::degenerate_whole_set:
      return "degenerate_whole_set";
  }
  return "?";
}

int ceil_log2_reciprocal(const Rational& p) {
  int L = 0;
  while (pow2(L) * p < Rational(1)) ++L;
  return L;
}

PiResult sampling_probability(const Rational& p, const Rational& e, GrowthFn phi, std::size_t f_size) {
  PiResult r;
  Rational lg_inv_p, lglg, lg_inv_e, lg_phi;
  bool exact = exact_lg(p.reciprocal(), lg_inv_p) && lg_inv_p > Rational(0) && exact_lg(lg_inv_p, lglg) &&
               exact_lg(e.reciprocal(), lg_inv_e);
  const long double phi_v = phi_value(phi, f_size);
  if (exact) {
    long double lph = std::log2l(phi_v);
    exact = std::floor(lph) == lph;
    if (exact) lg_phi = Rational(static_cast<i128>(lph));
  }
  if (exact) {
    r.pi = (max(lglg, lg_phi) + lg_inv_e) / (lg_inv_p + lg_inv_e);
  } else {
    long double v = (std::max(std::log2l(-lg(p)), std::log2l(phi_v)) - lg(e)) / (-lg(p) - lg(e));
    r.pi = dyadic_floor(v, 32);
  }
  r.exact = exact;
  if (r.pi > Rational(1)) {
    r.pi = Rational(1);
    r.clamped = true;
  }
  if (!(r.pi > Rational(0))) throw Error("plan", "sampling probability rounded to zero");
  return r;
}

ResolvedPlan resolve_plan(std::size_t n, const ApproxParams& params, const RangeFamily& family) {
  if (n == 0) throw Error("plan", "n must be positive");
  params.validate();
  ResolvedPlan plan;
  plan.family = family;
  plan.n = n;
  plan.p = params.p;
  plan.eps = params.eps;
  plan.constants = params.constants;
  plan.caps = params.caps;
  plan.p_int = params.p;
  plan.eps_int = params.eps / params.constants.eps_scale;
  auto& prov = plan.provenance;
  prov["eps_int"] = "eps / eps_scale";
  prov["p_int"] = "p";

  const Rational eighth(1, 8);
  const Rational& p = plan.p_int;
  const Rational& e = plan.eps_int;

  // Layer scales and thresholds are filled in every mode for the report.
  plan.layer_count = ceil_log2_reciprocal(p);
  prov["layer_count"] = "ceil(log2(1/p_int))";
  const long double lg_pe = -lg(p) - lg(e);
  const long double e_ld = ld(e);
  long double f_formula = ld(params.constants.D) * lg_pe / (e_ld * e_ld * ld(p));

  if (plan.p > eighth) {
    plan.mode = Mode::absolute_fallback;
    plan.constant_size_regime = plan.eps >= eighth;
    // An absolute (eps/8)-approximation is a relative (p, eps) one once p > 1/8;
    // with eps >= 1/8 its size is bounded by a constant.
    const long double abs_eps = plan.constant_size_regime ? ld(plan.eps) / 8 : ld(plan.eps);
    long double size = ld(params.constants.D_base) / (abs_eps * abs_eps);
    plan.f_size_formula = static_cast<double>(size);
    plan.f_size = std::min(n, ceil_size(size));
    prov["mode"] = plan.constant_size_regime ? "p > 1/8 and eps >= 1/8: constant-size absolute sample"
                                             : "p > 1/8 and eps < 1/8: absolute sample";
    prov["f_size"] = plan.constant_size_regime ? "min(n, ceil(D_base / (eps/8)^2))" : "min(n, ceil(D_base / eps^2))";
  } else if (plan.p > plan.eps || (ceil_size(f_formula) < n && p > e)) {
    plan.mode = Mode::standard_fallback;
    long double size = ld(params.constants.D_base) * -lg(plan.p) / (ld(plan.eps) * ld(plan.eps) * ld(plan.p));
    plan.f_size_formula = static_cast<double>(size);
    plan.f_size = std::min(n, ceil_size(size));
    prov["mode"] = plan.p > plan.eps ? "p > eps: uniform sample of standard size"
                                     : "|F| < n but p_int > eps_int: uniform sample of standard size";
    prov["f_size"] = "min(n, ceil(D_base * log2(1/p) / (eps^2 p)))";
  } else {
    plan.f_size_formula = static_cast<double>(f_formula);
    std::size_t f = ceil_size(f_formula);
    prov["f_size"] = "ceil(D * log2(1/(p_int eps_int)) / (eps_int^2 p_int))";
    if (f >= n) {
      plan.mode = Mode::degenerate_whole_set;
      plan.f_size = n;
      prov["mode"] = "size formula >= n: the ground set is its own approximation";
    } else {
      plan.mode = Mode::full;
      plan.f_size = f;
      prov["mode"] = "p_int <= 1/8, p_int <= eps_int, |F| < n";
    }
  }

  // Layer scales.
  const long double C = ld(params.constants.C);
  plan.delta.assign(static_cast<std::size_t>(plan.layer_count) + 1, 0.0);
  for (int i = 1; i <= plan.layer_count; ++i)
    plan.delta[static_cast<std::size_t>(i)] =
        static_cast<double>(C * std::ldexp(1.0L, i - 1) * lg_pe / (e_ld * e_ld));
  plan.delta[0] = plan.layer_count >= 1 ? plan.delta[1] / 2 : static_cast<double>(C * lg_pe / (e_ld * e_ld)) / 2;
  prov["delta"] = "Delta_i = C 2^(i-1) log2(1/(p_int eps_int)) / eps_int^2, Delta_0 = Delta_1 / 2";

  const std::size_t f_for_phi = plan.mode == Mode::full ? plan.f_size : n;
  const long double phi = phi_value(family.phi, f_for_phi);
  plan.heavy_thresholds.resize(plan.delta.size());
  for (std::size_t i = 0; i < plan.delta.size(); ++i)
    plan.heavy_thresholds[i] =
        static_cast<double>(ld(params.constants.A) * phi * std::pow(static_cast<long double>(plan.delta[i]), family.c + 2));
  prov["heavy_thresholds"] = "A phi(|F|) Delta_i^(c+2)";

  // Sampling probability.
  if (plan.mode == Mode::full) {
    PiResult r = sampling_probability(p, e, family.phi, plan.f_size);
    plan.pi = r.pi;
    plan.pi_exact = r.exact;
    plan.pi_clamped = r.clamped;
    prov["pi"] = std::string("(max{log2 log2(1/p_int), log2 phi(|F|)} + log2(1/eps_int)) / "
                             "(log2(1/p_int) + log2(1/eps_int))") +
                 (r.exact ? ", exact" : ", rounded down to a multiple of 2^-32") + (r.clamped ? "; clamped to 1" : "");
  } else {
    plan.pi = Rational(1);
    prov["pi"] = "1 (no light/heavy split outside full mode)";
  }
  return plan;
}

nlohmann::json ResolvedPlan::to_json() const {
  nlohmann::json j;
  j["mode"] = std::string(to_string(mode));
  j["constant_size_regime"] = constant_size_regime;
  j["family"] = family.name();
  j["n"] = n;
  j["p"] = p.str();
  j["eps"] = eps.str();
  j["p_int"] = p_int.str();
  j["eps_int"] = eps_int.str();
  j["f_size"] = f_size;
  j["f_size_formula"] = f_size_formula;
  j["layer_count"] = layer_count;
  j["delta"] = delta;
  j["heavy_thresholds"] = heavy_thresholds;
  j["pi"] = pi.str();
  j["pi_clamped"] = pi_clamped;
  j["pi_exact"] = pi_exact;
  j["constants"] = {{"A", constants.A.str()},         {"C", constants.C.str()},
                    {"D", constants.D.str()},         {"D_base", constants.D_base.str()},
                    {"gamma", constants.gamma.str()}, {"eps_scale", constants.eps_scale.str()}};
  j["caps"] = {{"initial_retries", caps.initial_retries}, {"mt_max_resamples", caps.mt_max_resamples}};
  j["provenance"] = provenance;
  return j;
}

}  // namespace relapprox
