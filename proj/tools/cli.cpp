#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>

#include "specinv/specinv.hpp"

namespace specinv::cli {

using nlohmann::json;

namespace {

struct Options {
  std::string expr, expr2;
  FieldSpec field;
  std::string fiber2;
  std::string csv;
  std::string map = "2";
  std::string file;
  std::string check;
  std::uint64_t seed = 0;
  int trials = 10;
  int split = 1;
  int pieces = 4;
  bool strict = false;
};

// Collected by a command handler.
struct Outcome {
  json results = json::object();
  json trials;
  std::vector<std::string> failures;
  double tolerance = std::numeric_limits<double>::quiet_NaN();
  void require(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

int to_int(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (...) {
    throw ValidationError("bad " + what + ": '" + s + "'");
  }
  if (used != s.size()) throw ValidationError("bad " + what + ": '" + s + "'");
  return v;
}

double to_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (...) {
    throw ValidationError("bad " + what + ": '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v)) throw ValidationError("bad " + what + ": '" + s + "'");
  return v;
}

std::optional<double> strict_tol(const Options& o) { return o.strict ? std::optional<double>(0.0) : std::nullopt; }

GridDomain fiber_domain(const std::string& spec, std::vector<int>* signs, const std::string& sign_spec) {
  if (spec.empty()) {
    signs->clear();
    return GridDomain::point();
  }
  auto parts = split_on(spec, ':');
  if (parts.size() < 2 || parts.size() > 3) throw ValidationError("fiber must be <k>:<samples>[:<halfwidth>]");
  const int k = to_int(parts[0], "fiber dimension");
  const int samples = to_int(parts[1], "fiber samples");
  const double h = parts.size() == 3 ? to_double(parts[2], "fiber halfwidth") : 4.0;
  if (k < 0 || k > 3) throw ValidationError("fiber dimension must be in [0, 3]");
  if (samples < 5) throw ValidationError("fiber needs at least 5 samples per axis");
  if (!(h > 0)) throw ValidationError("fiber halfwidth must be positive");
  signs->assign(static_cast<std::size_t>(k), 1);
  if (!sign_spec.empty()) {
    std::vector<std::string> toks;
    if (sign_spec.find(',') != std::string::npos)
      toks = split_on(sign_spec, ',');
    else
      for (char c : sign_spec) toks.emplace_back(1, c);
    if (toks.size() != static_cast<std::size_t>(k)) throw ValidationError("need one sign per fiber axis");
    for (std::size_t i = 0; i < toks.size(); ++i) {
      const auto& t = toks[i];
      if (t == "+" || t == "1" || t == "+1")
        (*signs)[i] = 1;
      else if (t == "-" || t == "-1")
        (*signs)[i] = -1;
      else
        throw ValidationError("bad sign '" + t + "'");
    }
  }
  return k == 0 ? GridDomain::point() : GridDomain::box(k, samples, h);
}

json bars_json(const Barcode& b) {
  auto a = json::array();
  for (const auto& bar : b.bars) a.push_back(json{{"degree", bar.degree}, {"birth", bar.birth}, {"death", bar.infinite() ? json(nullptr) : json(bar.death)}});
  return a;
}

void write_csv(const std::string& path, const std::string& text, Outcome& out, const std::string& key) {
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot write '" + path + "'");
  f << text;
  out.results["files"][key] = path;
}

json spectral_json(const SpectralReport& r) {
  return json{{"c_plus", r.c_plus},
              {"c_minus", r.c_minus},
              {"gamma", r.gamma},
              {"beta", r.beta},
              {"tolerance", r.tolerance},
              {"lipschitz", r.lipschitz},
              {"edge_jump", r.edge_jump},
              {"relative_level", r.relative_level},
              {"degree_offset", r.degree_offset},
              {"cells", r.cells},
              {"grid", {{"base", r.base_samples}, {"fiber", r.fiber_samples}, {"max_spacing", r.max_spacing}}}};
}

GFQIField need_field(const Options& o) {
  if (o.expr.empty()) throw ValidationError("--expr is required");
  return build_field(o.expr, o.field);
}

// ------------------------------------------------------------- commands

void cmd_barcode(const Options& o, Outcome& out) {
  auto s = need_field(o);
  auto rep = spectral_report(s);
  out.tolerance = rep.tolerance;
  std::ostringstream csv;
  csv.precision(17);
  csv << "degree,birth,death\n";
  for (const auto& b : rep.barcode.bars) {
    csv << b.degree << "," << b.birth << ",";
    if (b.infinite())
      csv << "inf";
    else
      csv << b.death;
    csv << "\n";
  }
  out.results["bars"] = bars_json(rep.barcode);
  if (!o.csv.empty()) write_csv(o.csv, csv.str(), out, "barcode");
}

void cmd_spectral(const Options& o, Outcome& out) {
  auto rep = spectral_report(need_field(o));
  out.tolerance = rep.tolerance;
  out.results = spectral_json(rep);
}

void cmd_ks(const Options& o, Outcome& out) {
  auto s = need_field(o);
  auto k = verify_ks(s, strict_tol(o));
  out.tolerance = k.tolerance;
  out.results = json{{"beta", k.beta}, {"gamma", k.gamma}, {"holds", k.holds}};
  out.require(k.holds, "beta > gamma + tolerance");
}

std::pair<ProductGFQI, ProductGFQI> product_pair(const Options& o) {
  auto s1 = need_field(o);
  FieldSpec f2 = o.field;
  f2.fiber = o.fiber2;
  if (o.fiber2.empty()) f2.signs.clear();
  auto s2 = build_field(o.expr2.empty() ? "0" : o.expr2, f2);
  return {ProductGFQI(std::move(s1), o.split), ProductGFQI(std::move(s2), o.split)};
}

void slices_csv(const Options& o, const SliceProfile& p, Outcome& out) {
  if (o.csv.empty()) return;
  std::ostringstream csv;
  csv.precision(17);
  csv << "x_index,c_plus,c_minus,gamma,beta\n";
  for (std::size_t i = 0; i < p.c_plus.size(); ++i)
    csv << i << "," << p.c_plus[i] << "," << p.c_minus[i] << "," << p.gamma[i] << "," << p.beta[i] << "\n";
  write_csv(o.csv, csv.str(), out, "slices");
}

void cmd_reduce_direct(const Options& o, Outcome& out) {
  auto [s1, s2] = product_pair(o);
  auto r = reduction_reports(s1, s2, strict_tol(o));
  const auto& d = r.direct;
  out.tolerance = d.tolerance;
  out.results = json{{"c_plus", d.c_plus},
                     {"c_minus", d.c_minus},
                     {"gamma", d.gamma},
                     {"sup_slice_c_plus", d.sup_slice_c_plus},
                     {"inf_slice_c_minus", d.inf_slice_c_minus},
                     {"sup_slice_gamma", d.sup_slice_gamma},
                     {"margin_plus", d.margin_plus},
                     {"margin_minus", d.margin_minus},
                     {"margin_gamma", d.margin_gamma},
                     {"holds", d.holds}};
  out.require(d.holds, "direct reduction inequality violated beyond tolerance");
  slices_csv(o, r.slices, out);
}

json inverse_json(const InverseReductionReport& i) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json("inf"); };
  return json{{"d", i.d},
              {"c_plus", i.c_plus},
              {"c_minus", i.c_minus},
              {"sup_slice_c_plus", i.sup_slice_c_plus},
              {"inf_slice_c_minus", i.inf_slice_c_minus},
              {"sup_slice_gamma", i.sup_slice_gamma},
              {"excess_plus", i.excess_plus},
              {"excess_minus", i.excess_minus},
              {"ratio_plus", num(i.ratio_plus)},
              {"ratio_minus", num(i.ratio_minus)},
              {"holds_k_d", i.holds_k_d},
              {"holds_k_d_plus_1", i.holds_k_d1},
              {"degenerate_violation", i.degenerate_violation}};
}

void cmd_reduce_inverse(const Options& o, Outcome& out) {
  auto [s1, s2] = product_pair(o);
  auto r = reduction_reports(s1, s2, strict_tol(o));
  out.tolerance = r.inverse.tolerance;
  out.results = inverse_json(r.inverse);
  out.require(r.inverse.holds_k_d1, "inverse reduction inequality with K = d + 1 violated");
  slices_csv(o, r.slices, out);
}

json glue_json(const GlueReport& g) {
  auto steps = json::array();
  for (const auto& s : g.steps)
    steps.push_back(json{{"family", s.family},
                         {"c_plus_prev", s.c_plus_prev},
                         {"c_plus_piece", s.c_plus_piece},
                         {"c_plus_union", s.c_plus_union},
                         {"beta_prev", s.beta_prev},
                         {"beta_piece", s.beta_piece},
                         {"bound", s.bound},
                         {"composed", s.composed},
                         {"holds", s.holds}});
  return json{{"steps", steps},
              {"c_plus_first", g.c_plus_first},
              {"c_plus", g.c_plus_direct},
              {"composed_bound", g.composed_bound},
              {"pointwise_bound", g.pointwise_bound},
              {"sup_slice_beta", g.sup_slice_beta},
              {"holds", g.holds()}};
}

void cmd_mv_glue(const Options& o, Outcome& out) {
  ProductGFQI p(need_field(o), o.split);
  auto cover = triangulation_cover(p.x_domain(), o.pieces);
  auto g = glued_upper_bound(p, cover, strict_tol(o));
  out.tolerance = g.tolerance;
  out.results["glue"] = glue_json(g);
  auto mv = mv_bound(p, cover.piece(0), cover.piece(1), strict_tol(o));
  out.results["mv"] = json{{"c_plus_u", mv.c_plus_u}, {"c_plus_v", mv.c_plus_v}, {"c_plus_union", mv.c_plus_union},
                           {"beta_u", mv.beta_u}, {"beta_v", mv.beta_v}, {"bound_beta", mv.bound_beta},
                           {"bound_gamma", mv.bound_gamma}, {"holds", mv.holds()}};
  out.require(g.holds(), "glued upper bound violated");
  out.require(mv.holds(), "Mayer-Vietoris bound violated for the first two families");
}

MapSpec parse_map(const std::string& spec, const GridDomain& source) {
  if (spec.rfind("const", 0) == 0) {
    double at = 0.0;
    if (spec.size() > 5) {
      if (spec[5] != ':') throw ValidationError("map must be <winding> or const[:<point>]");
      at = to_double(spec.substr(6), "map point");
    }
    return MapSpec::constant(source, {at});
  }
  return MapSpec::circle_map(source, to_int(spec, "map winding"), std::vector<double>(source.size(), 0.0));
}

void cmd_pullback(const Options& o, Outcome& out) {
  auto s = need_field(o);
  if (s.base.dim() != 1) throw ValidationError("pullback needs --base s1:<n>");
  auto r = pullback_check(s, parse_map(o.map, s.base), strict_tol(o));
  out.tolerance = r.tolerance;
  out.results = json{{"winding", r.winding}, {"gamma_source", r.gamma_source}, {"gamma_pulled", r.gamma_pulled},
                     {"holds_inequality", r.holds_inequality}, {"holds_equality", r.holds_equality}};
  out.require(r.holds(), "pullback inequality or equality violated");
}

void cmd_shift(const Options& o, Outcome& out) {
  auto s = need_field(o);
  if (s.base.dim() != 1) throw ValidationError("shift-test needs --base s1:<n>");
  auto r = circle_shift_test(s, strict_tol(o));
  out.tolerance = r.tolerance;
  out.results = json{{"gamma", r.gamma}, {"best_gamma_pair", r.best_gamma_pair}, {"best_theta", r.best_theta},
                     {"ratio", std::isfinite(r.ratio) ? json(r.ratio) : json("inf")}, {"holds", r.holds}};
  out.require(r.holds, "sup over theta of gamma(S, S_theta) < gamma(S)/3 - tolerance");
  if (!o.csv.empty()) {
    std::ostringstream csv;
    csv.precision(17);
    csv << "theta,gamma_pair\n";
    for (std::size_t i = 0; i < r.thetas.size(); ++i) csv << r.thetas[i] << "," << r.gamma_pairs[i] << "\n";
    write_csv(o.csv, csv.str(), out, "theta_sweep");
  }
}

json system_checks(const algebra::ProductSystem& sys, Outcome* out) {
  json res;
  auto v = algebra::validate(sys);
  auto fails = json::array();
  for (const auto& f : v.failures) fails.push_back(json{{"condition", f.condition}, {"message", f.message}, {"witness", f.witness}});
  res["valid"] = v.valid();
  res["checks"] = v.checks;
  res["violations"] = fails;
  if (out)
    for (const auto& f : v.failures) out->require(false, f.condition + ": " + f.message + " [" + f.witness + "]");
  if (!v.valid()) return res;
  auto ks = json::array();
  for (int i = 0; i < sys.n; ++i)
    for (int j = 0; j < sys.n; ++j) {
      auto k = algebra::ks_check(sys, i, j);
      ks.push_back(json{{"i", i}, {"j", j}, {"beta", k.beta.str()}, {"gamma", k.gamma.str()}, {"c_ij", k.c_ij.str()},
                        {"c_ji", k.c_ji.str()}, {"interleaving_distance", k.interleaving_distance.str()},
                        {"ks_holds", k.ks_holds}, {"distance_matches", k.distance_matches}});
      if (out) out->require(k.holds(), "ks_check failed for (" + std::to_string(i) + "," + std::to_string(j) + ")");
      for (int l = 0; l < sys.n; ++l) {
        auto c = algebra::unit_interleaving(sys, i, j, l);
        if (out)
          out->require(c.verified, "unit interleaving (" + std::to_string(i) + "," + std::to_string(j) + "," +
                                       std::to_string(l) + ") not verified");
      }
    }
  res["ks"] = ks;
  return res;
}

void cmd_algebra(const Options& o, Outcome& out) {
  if (o.file.empty()) throw ValidationError("--file is required");
  json doc;
  try {
    if (o.file == "-") {
      doc = json::parse(std::cin);
    } else {
      std::ifstream f(o.file);
      if (!f) throw ValidationError("cannot read '" + o.file + "'");
      doc = json::parse(f);
    }
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("invalid JSON: ") + e.what());
  }
  auto sys = algebra::from_json(doc);
  out.tolerance = 0.0;
  out.results = system_checks(sys, &out);
}

void cmd_fuzz(const Options& o, Outcome& out) {
  if (o.check.empty()) throw ValidationError("--check is required");
  const auto& names = trial_checks();
  if (std::find(names.begin(), names.end(), o.check) == names.end()) throw ValidationError("unknown check '" + o.check + "'");
  if (o.trials < 1) throw ValidationError("--trials must be positive");
  std::vector<TrialOutcome> res(static_cast<std::size_t>(o.trials));
  parallel_for(res.size(), [&](std::size_t t) { res[t] = run_trial(o.check, o.seed + t); });
  out.trials = json::array();
  int passed = 0;
  for (std::size_t t = 0; t < res.size(); ++t) {
    out.trials.push_back(json{{"seed", o.seed + t}, {"pass", res[t].pass}, {"detail", res[t].detail}});
    passed += res[t].pass ? 1 : 0;
    out.require(res[t].pass, o.check + " failed for seed " + std::to_string(o.seed + t));
  }
  out.results = json{{"check", o.check}, {"passed", passed}, {"trials", o.trials}};
}

}  // namespace

// ------------------------------------------------------------ public API

GridDomain parse_base(const std::string& spec) {
  if (spec == "point") return GridDomain::point();
  auto parts = split_on(spec, ':');
  if (parts[0] == "s1") {
    const int n = parts.size() == 1 ? 128 : to_int(parts[1], "circle samples");
    if (parts.size() > 2 || n < 3) throw ValidationError("circle base must be s1:<n> with n >= 3");
    return GridDomain::circle(n);
  }
  if (parts[0] == "t2") {
    int n = 32, m = 32;
    if (parts.size() == 2) {
      auto nm = split_on(parts[1], 'x');
      if (nm.size() != 2) throw ValidationError("torus base must be t2:<n>x<m>");
      n = to_int(nm[0], "torus samples");
      m = to_int(nm[1], "torus samples");
    }
    if (parts.size() > 2 || n < 3 || m < 3) throw ValidationError("torus base must be t2:<n>x<m> with n, m >= 3");
    return GridDomain::torus(n, m);
  }
  throw ValidationError("unknown base '" + spec + "' (use s1:<n>, t2:<n>x<m> or point)");
}

GFQIField build_field(const std::string& expr, const FieldSpec& spec) {
  const auto base = parse_base(spec.base);
  std::vector<int> signs;
  const auto fiber = fiber_domain(spec.fiber, &signs, spec.signs);
  const int k = static_cast<int>(fiber.dim());
  if (k == 0 && !spec.signs.empty()) throw ValidationError("--signs needs a fiber");
  const auto e = parse_expression(expr, static_cast<int>(base.dim()), k);
  if (k == 0) {
    return graph_gf(GridField::sample(base, [&](std::span<const double> x) { return e(x); }));
  }
  const double h = fiber.axis(0).spacing * (fiber.axis(0).length - 1) / 2.0;
  double inner = 0.3 * h, outer = 0.45 * h;
  if (!spec.cutoff.empty()) {
    auto p = split_on(spec.cutoff, ':');
    if (p.size() != 2) throw ValidationError("cutoff must be <inner>:<outer>");
    inner = to_double(p[0], "cutoff");
    outer = to_double(p[1], "cutoff");
    if (!(0 < inner && inner < outer && outer < h)) throw ValidationError("cutoff needs 0 < inner < outer < halfwidth");
  }
  auto s = complete_at_infinity(base, fiber, signs, [&](std::span<const double> x, std::span<const double> xi) { return e(x, xi); },
                                inner, outer);
  for (double v : s.values)
    if (!std::isfinite(v)) throw ValidationError("expression is not finite on the grid");
  return s;
}

const std::vector<std::string>& trial_checks() {
  static const std::vector<std::string> names{"oscillation", "ks",           "duality",        "stability",
                                              "triangle",    "reduce-direct", "reduce-inverse", "mv",
                                              "glue",        "shift",         "pullback",       "algebra",
                                              "oracle"};
  return names;
}

TrialOutcome run_trial(const std::string& check, std::uint64_t seed) {
  Rng rng(seed);
  TrialOutcome t;
  auto& d = t.detail;
  if (check == "oscillation") {
    const bool torus = seed % 2 == 1;
    auto f = random_trig_field(rng, torus ? GridDomain::torus(24, 24) : GridDomain::circle(128));
    const double g = gamma(graph_gf(f));
    d = json{{"gamma", g}, {"oscillation", f.max() - f.min()}};
    t.pass = g == f.max() - f.min();
  } else if (check == "ks") {
    auto k = verify_ks(graph_gf(random_trig_field(rng, GridDomain::circle(128))), 0.0);
    d = json{{"beta", k.beta}, {"gamma", k.gamma}};
    t.pass = k.holds;
  } else if (check == "duality") {
    auto r = verify_duality(random_k1_gfqi(rng, GridDomain::circle(32)));
    d = json{{"gap_plus", r.gap_plus}, {"gap_minus", r.gap_minus}, {"tolerance", r.tolerance}};
    t.pass = r.holds;
  } else if (check == "stability") {
    const auto base = GridDomain::circle(32);
    auto s1 = random_k1_gfqi(rng, base);
    auto s2 = random_k1_gfqi(rng, base);
    auto r = stability_gap(s1, s2);
    d = json{{"gap_plus", r.gap_plus}, {"gap_minus", r.gap_minus}, {"sup_norm", r.sup_norm}};
    t.pass = r.holds;
  } else if (check == "triangle") {
    const auto base = GridDomain::circle(32);
    auto s1 = random_k1_gfqi(rng, base);
    auto s2 = graph_gf(random_trig_field(rng, base));
    auto r = triangle_check(s1, s2);
    d = json{{"margin_minus", r.margin_minus}, {"margin_plus", r.margin_plus}, {"tolerance", r.tolerance}};
    t.pass = r.holds;
  } else if (check == "reduce-direct" || check == "reduce-inverse") {
    auto [s1, s2] = random_product_pair(rng);
    auto r = reduction_reports(ProductGFQI(std::move(s1), 1), ProductGFQI(std::move(s2), 1));
    if (check == "reduce-direct") {
      d = json{{"margin_plus", r.direct.margin_plus}, {"margin_minus", r.direct.margin_minus},
               {"margin_gamma", r.direct.margin_gamma}, {"tolerance", r.direct.tolerance}};
      t.pass = r.direct.holds;
    } else {
      d = inverse_json(r.inverse);
      d["tolerance"] = r.inverse.tolerance;
      t.pass = r.inverse.holds_k_d1;
    }
  } else if (check == "mv") {
    const int n = 128;
    auto f = random_trig_field(rng, GridDomain::circle(n));
    std::uniform_int_distribution<int> start(0, n - 1), len(2, n - 2), overlap(1, 3);
    const int s = start(rng), l1 = len(rng), l2 = len(rng);
    const auto u = Region::arc(f.domain, s, l1);
    const auto v = Region::arc(f.domain, s + l1 - overlap(rng), l2);
    auto r = mv_bound(f, u, v);
    d = json{{"c_plus_union", r.c_plus_union}, {"bound_beta", r.bound_beta}, {"bound_gamma", r.bound_gamma},
             {"tolerance", r.tolerance}};
    t.pass = r.holds();
  } else if (check == "glue") {
    auto [s1, s2] = random_product_pair(rng);
    ProductGFQI p(gf_difference(s1, s2), 1);
    auto g = glued_upper_bound(p, triangulation_cover(p.x_domain(), 4));
    d = glue_json(g);
    d["tolerance"] = g.tolerance;
    t.pass = g.holds();
  } else if (check == "shift") {
    auto r = circle_shift_test(graph_gf(random_trig_field(rng, GridDomain::circle(128))));
    d = json{{"gamma", r.gamma}, {"best_gamma_pair", r.best_gamma_pair}, {"ratio", r.ratio}, {"tolerance", r.tolerance}};
    t.pass = r.holds;
  } else if (check == "pullback") {
    const auto base = GridDomain::circle(128);
    auto s = graph_gf(random_trig_field(rng, base));
    auto r = pullback_check(s, MapSpec::circle_map(base, 2, std::vector<double>(base.size(), 0.0)));
    auto c = pullback_check(s, MapSpec::constant(base, {0.0}));
    d = json{{"gamma_source", r.gamma_source}, {"gamma_pulled", r.gamma_pulled}, {"gamma_constant", c.gamma_pulled},
             {"tolerance", r.tolerance}};
    t.pass = r.holds() && c.holds() && c.gamma_pulled == 0.0;
  } else if (check == "algebra") {
    auto sys = algebra::random_system(seed);
    d = system_checks(sys, nullptr);
    Outcome scratch;
    system_checks(sys, &scratch);
    auto mutated = sys;
    std::mt19937_64 mrng(seed ^ 0x9e3779b97f4a7c15ULL);
    auto m = algebra::mutate(mutated, mrng);
    const bool rejected = !algebra::validate(mutated).valid();
    d["mutation"] = m.description;
    d["mutation_rejected"] = rejected;
    t.pass = scratch.failures.empty() && rejected;
  } else if (check == "oracle") {
    auto k = random_filtered_complex(rng);
    auto bars = reduce(k);
    std::size_t compared = 0, mismatched = 0;
    const auto crit = k.critical_values();
    for (int q = 0; q <= std::max(0, k.max_dim()); ++q)
      for (std::size_t a = 0; a < crit.size(); ++a)
        for (std::size_t b = a; b < crit.size(); ++b) {
          ++compared;
          if (bars.count_containing(crit[a], crit[b], q) != rank_of(k, crit[a], crit[b], q)) ++mismatched;
        }
    d = json{{"cells", k.size()}, {"compared", compared}, {"mismatched", mismatched}};
    t.pass = mismatched == 0;
  } else {
    throw ValidationError("unknown check '" + check + "'");
  }
  return t;
}

RunResult run(const std::vector<std::string>& args) {
  const auto t0 = std::chrono::steady_clock::now();
  Options o;
  CLI::App app{"Spectral invariants of generating functions, persistence and product systems", "specinv"};
  app.require_subcommand(1);

  struct Cmd {
    const char* name;
    const char* help;
    void (*fn)(const Options&, Outcome&);
    bool field;
  };
  const std::vector<Cmd> cmds{
      {"barcode", "Barcode of the relative sublevel filtration (CSV: degree,birth,death)", cmd_barcode, true},
      {"spectral", "c+, c-, gamma and beta of a field", cmd_spectral, true},
      {"ks-check", "beta <= gamma + tolerance", cmd_ks, true},
      {"reduce-direct", "Direct reduction inequalities for S1 - S2 over X x Y", cmd_reduce_direct, true},
      {"reduce-inverse", "Inverse reduction inequality for S1 - S2 over X x Y", cmd_reduce_inverse, true},
      {"mv-glue", "Mayer-Vietoris bound and the gluing chain over a cover of X", cmd_mv_glue, true},
      {"pullback", "gamma under pullback by a circle map", cmd_pullback, true},
      {"shift-test", "sup over rotations of gamma(S, S_theta) against gamma(S)/3", cmd_shift, true},
      {"algebra-check", "Validate a product system (JSON) and check beta <= gamma exactly", cmd_algebra, false},
      {"fuzz", "Seeded batches of random trials for one check", cmd_fuzz, false},
  };
  std::vector<CLI::App*> subs;
  for (const auto& c : cmds) {
    auto* sub = app.add_subcommand(c.name, c.help);
    subs.push_back(sub);
    sub->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    sub->add_flag("--strict", o.strict, "Use tolerance 0");
    sub->add_option("--csv", o.csv, "Write plot data to this CSV file");
    if (c.field) {
      sub->add_option("--expr", o.expr, "Expression in x1..xd, xi1..xik");
      sub->add_option("--base", o.field.base, "s1:<n>, t2:<n>x<m> or point")->capture_default_str();
      sub->add_option("--fiber", o.field.fiber, "<k>:<samples>[:<halfwidth>]");
      sub->add_option("--signs", o.field.signs, "Signs of the quadratic form, e.g. +,-");
      sub->add_option("--cutoff", o.field.cutoff, "<inner>:<outer> radii of the completion");
    }
    if (std::string(c.name).rfind("reduce", 0) == 0 || std::string(c.name) == "mv-glue")
      sub->add_option("--split", o.split, "Number of base axes forming X")->capture_default_str();
    if (std::string(c.name).rfind("reduce", 0) == 0) {
      sub->add_option("--expr2", o.expr2, "Second field (default 0)");
      sub->add_option("--fiber2", o.fiber2, "Fiber of the second field");
    }
    if (std::string(c.name) == "mv-glue") sub->add_option("--pieces", o.pieces, "Pieces per axis of the cover")->capture_default_str();
    if (std::string(c.name) == "pullback") sub->add_option("--map", o.map, "<winding> or const[:<point>]")->capture_default_str();
    if (std::string(c.name) == "algebra-check") sub->add_option("--file", o.file, "System JSON file, or - for stdin");
    if (std::string(c.name) == "fuzz") {
      sub->add_option("--check", o.check, "One of: oscillation ks duality stability triangle reduce-direct "
                                           "reduce-inverse mv glue shift pullback algebra oracle");
      sub->add_option("--trials", o.trials, "Number of trials")->capture_default_str();
    }
  }

  RunResult result;
  json& rep = result.report;
  rep["schema"] = "v1";
  std::string command;
  try {
    std::vector<std::string> argv_s{"specinv"};
    argv_s.insert(argv_s.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_s) argv.push_back(s.data());
    app.parse(static_cast<int>(argv.size()), argv.data());
    for (std::size_t i = 0; i < cmds.size(); ++i)
      if (subs[i]->parsed()) command = cmds[i].name;
    rep["command"] = command;
    rep["inputs"] = json{{"expr", o.expr}, {"expr2", o.expr2}, {"base", o.field.base}, {"fiber", o.field.fiber},
                         {"fiber2", o.fiber2}, {"signs", o.field.signs}, {"cutoff", o.field.cutoff}, {"split", o.split},
                         {"pieces", o.pieces}, {"map", o.map}, {"file", o.file}, {"check", o.check},
                         {"trials", o.trials}, {"strict", o.strict}};
    rep["seed"] = o.seed;
    Outcome out;
    for (const auto& c : cmds)
      if (command == c.name) c.fn(o, out);
    rep["tolerance"] = std::isnan(out.tolerance) ? json(nullptr) : json(out.tolerance);
    rep["results"] = out.results;
    if (!out.trials.is_null()) rep["trials"] = out.trials;
    rep["failures"] = out.failures;
    rep["verdict"] = out.failures.empty() ? "pass" : "fail";
    result.exit_code = out.failures.empty() ? kExitPass : kExitFail;
  } catch (const CLI::CallForHelp&) {
    rep["help"] = app.help();
    rep["verdict"] = "pass";
  } catch (const CLI::ParseError& e) {
    rep["error"] = e.what();
    rep["verdict"] = "input-error";
    result.exit_code = kExitInput;
  } catch (const std::invalid_argument& e) {  // ValidationError, ArgumentError, ParseError
    rep["error"] = e.what();
    rep["verdict"] = "input-error";
    result.exit_code = kExitInput;
  } catch (const std::exception& e) {  // InvariantError and anything unexpected
    rep["error"] = e.what();
    rep["failures"] = json::array({e.what()});
    rep["verdict"] = "fail";
    result.exit_code = kExitFail;
  }
  rep["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace specinv::cli
