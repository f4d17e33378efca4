// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "cli.hpp"
#include "specinv/algebra.hpp"
#include "specinv/random_fields.hpp"
#include "specinv/reduction_lab.hpp"
#include "specinv/spectral.hpp"

using namespace specinv;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

// `shared_s` is time spent outside the body on work the criterion depends on.
void criterion(int id, const char* name, double limit_s, const std::function<Verdict()>& body, double shared_s = 0.0) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double dt = shared_s + std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = v.pass && dt < limit_s;
  if (!ok) ++failures;
  std::printf("[%s] %2d %-22s %s (%.2fs, limit %.0fs)\n", ok ? "PASS" : "FAIL", id, name, v.detail.c_str(), dt, limit_s);
  std::fflush(stdout);
}

// Counts seeds 0..n-1 passing a trial; remembers the first failure.
Verdict trials(const std::string& check, int n) {
  int passed = 0;
  std::string first;
  for (int s = 0; s < n; ++s) {
    auto t = cli::run_trial(check, static_cast<std::uint64_t>(s));
    if (t.pass)
      ++passed;
    else if (first.empty())
      first = " first failure seed " + std::to_string(s) + ": " + t.detail.dump();
  }
  return {passed == n, check + " " + std::to_string(passed) + "/" + std::to_string(n) + first};
}

double num(const nlohmann::json& j, const char* key) { return j["results"][key].get<double>(); }

}  // namespace

int main() {
  criterion(1, "quartic", 1.0, [] {
    const std::vector<std::string> field{"--base", "point", "--fiber", "1:513", "--expr", "xi1^4 - 2*xi1^2"};
    auto args = field;
    args.insert(args.begin(), "spectral");
    auto sp = cli::run(args);
    args[0] = "ks-check";
    auto ks = cli::run(args);
    if (sp.exit_code != cli::kExitPass) return Verdict{false, sp.report.dump()};
    const double g = num(sp.report, "gamma"), b = num(sp.report, "beta");
    const bool holds = ks.report["results"]["holds"].get<bool>();
    return Verdict{std::abs(g) <= 0.02 && std::abs(b - 1) <= 0.02 && !holds && ks.exit_code == cli::kExitFail,
                   fmt("gamma=%.6f beta=%.6f ks holds=%s", g, b, holds ? "true" : "false")};
  });

  criterion(2, "double well", 1.0, [] {
    auto a = cli::run({"spectral", "--base", "s1:256", "--expr", "(1 + cos(2*x1))/2"});
    auto p = cli::run({"spectral", "--base", "s1:256", "--expr", "(1 + cos(2*x1))/2 + 0.05*cos(x1) + 0.03*sin(x1)"});
    if (a.exit_code != cli::kExitPass || p.exit_code != cli::kExitPass) return Verdict{false, a.report.dump() + p.report.dump()};
    const double g = num(a.report, "gamma"), b = num(a.report, "beta");
    const double gp = num(p.report, "gamma"), bp = num(p.report, "beta");
    return Verdict{std::abs(g - 1) <= 0.02 && std::abs(b - 1) <= 0.02 && bp < gp,
                   fmt("gamma=%.6f beta=%.6f; perturbed gamma=%.6f beta=%.6f", g, b, gp, bp)};
  });

  criterion(3, "oscillation", 30.0, [] { return trials("oscillation", 100); });

  // 4 and 5 share the instances; each reduction is computed once.
  std::vector<ReductionReports> reps;
  double reduction_time = 0.0;
  {
    const auto t0 = std::chrono::steady_clock::now();
    for (int s = 0; s < 200; ++s) {
      Rng rng(static_cast<std::uint64_t>(s));
      auto [s1, s2] = random_product_pair(rng);
      reps.push_back(reduction_reports(ProductGFQI(std::move(s1), 1), ProductGFQI(std::move(s2), 1)));
    }
    reduction_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  criterion(4, "direct reduction", 300.0, [&] {
    int ok = 0;
    double worst = kInfinity;
    for (const auto& r : reps) {
      ok += r.direct.holds ? 1 : 0;
      worst = std::min({worst, r.direct.margin_plus + r.direct.tolerance, r.direct.margin_minus + r.direct.tolerance,
                        r.direct.margin_gamma + r.direct.tolerance});
    }
    return Verdict{ok == 200, fmt("%d/200 hold, worst margin+tau=%.6f", ok, worst)};
  }, reduction_time);
  criterion(5, "inverse reduction", 300.0, [&] {
    int k_d1 = 0, k_d = 0, degenerate = 0;
    double worst = 0.0;
    for (const auto& r : reps) {
      k_d1 += r.inverse.holds_k_d1 ? 1 : 0;
      k_d += r.inverse.holds_k_d ? 1 : 0;
      degenerate += r.inverse.degenerate_violation ? 1 : 0;
      worst = std::max({worst, r.inverse.ratio_plus, r.inverse.ratio_minus});
    }
    return Verdict{k_d1 == 200, fmt("K=d+1 %d/200, K=d %d/200, worst ratio=%.6f, degenerate=%d", k_d1, k_d, worst, degenerate)};
  }, reduction_time);

  criterion(6, "mayer-vietoris", 120.0, [] {
    auto mv = trials("mv", 100);
    auto glue = trials("glue", 20);
    return Verdict{mv.pass && glue.pass, mv.detail + "; " + glue.detail};
  });

  criterion(7, "circle shift", 120.0, [] {
    auto r = trials("shift", 50);
    auto cos = circle_shift_test(graph_gf(GridField::sample(GridDomain::circle(128), [](auto x) { return std::cos(x[0]); })));
    const bool two = std::abs(cos.best_gamma_pair - 2 * cos.gamma) <= cos.tolerance;
    return Verdict{r.pass && two, r.detail + fmt("; cos ratio=%.6f", cos.ratio)};
  });

  criterion(8, "pullback", 60.0, [] { return trials("pullback", 20); });

  criterion(9, "algebra", 120.0, [] {
    int valid = 0, rejected = 0;
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
      auto sys = algebra::random_system(seed);
      bool ok = algebra::validate(sys).valid();
      for (int i = 0; ok && i < sys.n; ++i)
        for (int j = 0; ok && j < sys.n; ++j) ok = algebra::ks_check(sys, i, j).holds();
      valid += ok ? 1 : 0;
      if (seed < 100) {
        std::mt19937_64 mrng(seed ^ 0x9e3779b97f4a7c15ULL);
        algebra::mutate(sys, mrng);
        rejected += algebra::validate(sys).valid() ? 0 : 1;
      }
    }
    return Verdict{valid == 500 && rejected == 100, fmt("valid+ks %d/500, mutations rejected %d/100", valid, rejected)};
  });

  criterion(10, "oracle", 120.0, [] { return trials("oracle", 500); });

  criterion(11, "stability+duality", 60.0, [] {
    auto st = trials("stability", 100);
    auto du = trials("duality", 100);
    return Verdict{st.pass && du.pass, st.detail + "; " + du.detail};
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
