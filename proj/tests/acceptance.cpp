// Acceptance run: one PASS/FAIL line per criterion on stdout, details on stderr.
//
// Exit status is 0 when the set of failing criteria equals the --expect-fail set (empty by
// default), so a known, documented deviation can be tracked without hiding a regression
// in any other criterion or an unexpected fix of the deviating one.
#include <CLI11.hpp>
#include <json.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "chain.hpp"
#include "frontier.hpp"
#include "heuristics.hpp"
#include "mdp.hpp"
#include "sim.hpp"

using namespace aoimec;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = false;
  std::string summary;
};

struct Context {
  std::string cli;
  fs::path workdir;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double rel_diff(double x, double y) { return std::abs(x - y) / std::max(1.0, std::abs(y)); }

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  return out + "'";
}

int run(const std::string& command) {
  std::fprintf(stderr, "  $ %s\n", command.c_str());
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

ModelParams params(double mu, double lambda, int a_max) {
  ModelParams p;
  p.mu = mu;
  p.lambda = lambda;
  p.a_max = a_max;
  return p;
}

// 1. Always-MEC gives exactly (1, 1.5), through the command line.
Outcome mec_only_exact(const Context& ctx) {
  const fs::path out = ctx.workdir / "c1_eval.json";
  const int rc = run(quote(ctx.cli) + " eval --family mec_only --format json --out " + quote(out.string()));
  if (rc != 0) return {false, "eval exited with " + std::to_string(rc)};
  const auto doc = nlohmann::json::parse(slurp(out));
  const double delta = doc.at("delta").get<double>();
  const double p_bar = doc.at("p_bar").get<double>();
  return {delta == 1.5 && p_bar == 1.0, "delta=" + fmt(delta) + " p_bar=" + fmt(p_bar)};
}

// 2. Local-only closed form against simulation.
Outcome local_only_vs_sim(const Context&) {
  bool ok = true;
  std::ostringstream s;
  std::uint64_t seed = 2001;
  for (double mu : {0.3, 0.5, 0.7, 1.0}) {
    const double closed = local_only(mu).delta;
    const double formula = (4.0 - mu) / (2.0 * mu);
    // Truncation high enough that the forced offload at a_max never happens in practice.
    const SimResult r = simulate(local_only_policy(400), params(mu, 0.0, 400), SimConfig::with_horizon(10'000'000, seed++));
    const double z = r.stderr_delta > 0 ? std::abs(r.delta_hat - closed) / r.stderr_delta : 0.0;
    bool point_ok = closed == formula && (r.stderr_delta > 0 ? z <= 3.0 : r.delta_hat == closed);
    if (mu == 1.0) point_ok = point_ok && closed == 1.5 && r.delta_hat == 1.5;
    ok = ok && point_ok;
    s << " mu=" << mu << ":" << fmt(r.delta_hat) << "/" << fmt(closed) << "(" << fmt(z) << "se)";
  }
  return {ok, "sim/closed" + s.str()};
}

// Deviation in standard errors. A zero standard error means the simulated path was
// deterministic (z* = 0 always uses the MEC); then only rounding in the closed form may differ.
double sigmas(double estimate, double truth, double se) {
  if (se > 0) return std::abs(estimate - truth) / se;
  return rel_diff(estimate, truth) <= 1e-12 ? 0.0 : INFINITY;
}

// 3. Service threshold: closed form, exact chain and simulation.
Outcome service_three_way(const Context&) {
  bool ok = true;
  double worst_rel = 0.0, worst_z = 0.0;
  int i = 0;
  for (double mu : {0.3, 0.5, 0.7}) {
    for (int z_star = 0; z_star <= 9; ++z_star, ++i) {
      const EvalResult closed = service_threshold_eval(mu, z_star);
      const int a_max = 50;
      const Policy policy = service_threshold_policy(z_star, a_max);
      const ModelParams p = params(mu, 0.0, a_max);
      const EvalResult exact = evaluate_exact(policy, p);
      const SimResult sim = simulate(policy, p, SimConfig::with_horizon(10'000'000, 3000 + static_cast<std::uint64_t>(i)));
      const double rd = std::max(rel_diff(exact.delta, closed.delta), rel_diff(exact.p_bar, closed.p_bar));
      const double zd = sigmas(sim.delta_hat, closed.delta, sim.stderr_delta);
      const double zp = sigmas(sim.p_bar_hat, closed.p_bar, sim.stderr_p);
      const bool point_ok = rd <= 1e-8 && zd <= 3.0 && zp <= 3.0;
      if (!point_ok)
        std::fprintf(stderr, "  mu=%g z*=%d: chain rel %.3g, sim %.3g / %.3g se\n", mu, z_star, rd, zd, zp);
      ok = ok && point_ok;
      worst_rel = std::max(worst_rel, rd);
      worst_z = std::max({worst_z, zd, zp});
    }
  }
  return {ok, "30 points, max closed-vs-chain rel " + fmt(worst_rel) + ", max sim deviation " + fmt(worst_z) + " se"};
}

// 4. Moment formulas against direct enumeration of the truncated geometric atoms.
Outcome moment_oracle(const Context&) {
  double worst = 0.0;
  for (double mu : {0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99, 1.0}) {
    for (int z_star = 0; z_star <= 6; ++z_star) {
      double e_s = 0.0, e_s2 = 0.0, e_y = 0.0, tail = 1.0;
      for (int k = 1; k <= z_star; ++k) {
        const double pk = tail * mu;
        e_s += pk * k;
        e_s2 += pk * k * k;
        e_y += pk * k;
        tail *= 1.0 - mu;
      }
      e_s += tail * (z_star + 1);
      e_s2 += tail * (z_star + 1.0) * (z_star + 1.0);
      e_y += tail;
      const ServiceMoments m = service_moments(mu, z_star);
      worst = std::max({worst, std::abs(m.e_s - e_s), std::abs(m.e_s2 - e_s2), std::abs(m.e_y - e_y)});
    }
  }
  return {worst <= 1e-12, "13 mu values x z* 0..6, max abs error " + fmt(worst)};
}

// 5. Optimal thresholds at mu = 0.5, lambda = 3, a_max = 50.
Outcome fig4_thresholds(const Context&) {
  const SolveReport s = rvi_solve(params(0.5, 3.0, 50));
  const std::vector<int> th = on_path_thresholds(s.policy, 0.5);
  auto at = [&](std::size_t z) { return z < th.size() ? th[z] : -1; };
  std::ostringstream d;
  d << "converged=" << (s.converged ? "yes" : "no") << " g=" << fmt(s.g) << " thresholds";
  for (std::size_t z = 0; z < th.size(); ++z) d << " a" << z << "=" << th[z];
  d << " (raw";
  for (int t : s.thresholds) d << " " << t;
  d << "; expected a1=4 a2=3)";
  return {s.converged && at(1) == 4 && at(2) == 3, d.str()};
}

// 6. Structural checks on the discounted iterates and the RVI policy.
Outcome structure_grid(const Context&) {
  bool ok = true;
  int count = 0;
  for (double mu : {0.1, 0.5, 0.9}) {
    for (double lambda : {0.5, 3.0, 20.0}) {
      const ModelParams p = params(mu, lambda, 50);
      const SolveReport s = rvi_solve(p);
      const std::vector<ValueTable> iterates = discounted_vi(p, 1000);
      const StructureReport r = verify_structure(iterates, s.policy, mu);
      for (const auto& c : r.checks)
        if (!c.passed) std::fprintf(stderr, "  mu=%g lambda=%g: %s failed %s\n", mu, lambda, c.name.c_str(), c.detail.c_str());
      ok = ok && s.converged && r.passed();
      count += static_cast<int>(r.checks.size());
    }
  }
  return {ok, "9 (mu, lambda) points, " + std::to_string(count) + " checks at beta=0.99, 1000 iterates"};
}

// 7. Frontier on the default grid: Lagrangian dominance and the shared MEC-only endpoint.
Outcome frontier_dominance(const Context&) {
  const FrontierConfig config;
  const std::vector<FrontierPoint> pts = run_frontier(config);
  bool ok = pts.size() == 52;
  double worst = -INFINITY;
  for (const auto& opt : pts) {
    if (opt.family != Family::optimal) continue;
    const double lambda = opt.param;
    const double cost = opt.delta + lambda * opt.p_bar;
    for (const auto& h : pts) {
      if (h.family == Family::optimal) continue;
      const double excess = cost - (h.delta + lambda * h.p_bar);
      worst = std::max(worst, excess);
      if (excess > 1e-6) {
        std::fprintf(stderr, "  lambda=%g beaten by %s(%g) by %g\n", lambda, std::string(to_string(h.family)).c_str(),
                     h.param, excess);
        ok = false;
      }
    }
  }
  std::string ends;
  for (Family f : {Family::age_threshold, Family::service_threshold, Family::optimal}) {
    const auto first = std::find_if(pts.begin(), pts.end(), [f](const FrontierPoint& p) { return p.family == f; });
    const bool at_end = first != pts.end() && std::abs(first->p_bar - 1.0) <= 1e-9 && std::abs(first->delta - 1.5) <= 1e-9;
    ok = ok && at_end;
    ends += " " + std::string(to_string(f)) + (at_end ? ":yes" : ":no");
  }
  return {ok, std::to_string(pts.size()) + " rows, max optimal excess " + fmt(worst) + ", (1,1.5) endpoint" + ends};
}

// 8. RVI against exhaustive threshold search.
Outcome oracle_equivalence(const Context&) {
  bool ok = true;
  double worst = 0.0;
  for (double mu : {0.3, 0.5, 0.7}) {
    for (double lambda : {1.0, 3.0, 10.0}) {
      const ModelParams p = params(mu, lambda, 20);
      const SolveReport r = rvi_solve(p);
      const SolveReport b = brute_force_best_threshold(p, 20);
      const double diff = std::abs(r.g - b.g);
      std::fprintf(stderr, "  mu=%g lambda=%g: rvi %.12g brute %.12g\n", mu, lambda, r.g, b.g);
      worst = std::max(worst, diff);
      ok = ok && r.converged && diff <= 1e-6;
    }
  }
  return {ok, "9 points at a_max=20, search bound 20, max |g_rvi - g_brute| " + fmt(worst)};
}

// 9. Doubling the truncation leaves the optimal gain unchanged.
Outcome truncation_stability(const Context&) {
  bool ok = true;
  double worst = 0.0;
  auto compare = [&](double mu, double lambda, int a_max) {
    const SolveReport lo = rvi_solve(params(mu, lambda, a_max));
    const SolveReport hi = rvi_solve(params(mu, lambda, 2 * a_max));
    const double diff = std::abs(hi.g - lo.g);
    std::fprintf(stderr, "  mu=%g lambda=%g: g(%d)=%.12g g(%d)=%.12g\n", mu, lambda, a_max, lo.g, 2 * a_max, hi.g);
    worst = std::max(worst, diff);
    ok = ok && lo.converged && hi.converged && diff < 1e-4;
  };
  compare(0.5, 3.0, 50);
  for (double lambda : default_lambda_grid()) compare(0.01, lambda, 400);
  return {ok, "26 points (mu=0.5 at 50->100, mu=0.01 at 400->800), max |dg| " + fmt(worst)};
}

// 10. Repeated CLI runs give byte-identical files.
Outcome determinism(const Context& ctx) {
  bool ok = true;
  std::string detail;
  auto twice = [&](const std::string& label, const std::string& args, const std::string& ext) {
    const fs::path a = ctx.workdir / ("c10_" + label + "_1." + ext);
    const fs::path b = ctx.workdir / ("c10_" + label + "_2." + ext);
    fs::remove(a);
    fs::remove(b);
    const int ra = run(quote(ctx.cli) + " " + args + " --out " + quote(a.string()));
    const int rb = run(quote(ctx.cli) + " " + args + " --out " + quote(b.string()));
    const std::string ta = slurp(a), tb = slurp(b);
    const bool same = ra == 0 && rb == 0 && !ta.empty() && ta == tb;
    ok = ok && same;
    detail += " " + label + (same ? ":identical(" + std::to_string(ta.size()) + "B)" : ":DIFFERENT");
  };
  twice("frontier", "frontier --format csv", "csv");
  twice("simulate", "simulate --family service_threshold --mu 0.5 --zstar 1 --horizon 1000000 --seed 7", "json");
  return {ok, detail.substr(1)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  Context ctx;
  std::string workdir = (fs::temp_directory_path() / "aoimec-acceptance").string();
  std::vector<int> expect_fail, only;
  app.add_option("--cli", ctx.cli, "Path to the aoimec command-line binary")->required()->check(CLI::ExistingFile);
  app.add_option("--workdir", workdir, "Scratch directory for output files");
  app.add_option("--expect-fail", expect_fail, "Criteria known to fail (exit status ignores them)")
      ->check(CLI::Range(1, 10));
  app.add_option("--only", only, "Run only these criteria")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);
  ctx.workdir = workdir;
  std::error_code ec;
  fs::create_directories(ctx.workdir, ec);
  if (ec) {
    std::fprintf(stderr, "cannot create %s: %s\n", workdir.c_str(), ec.message().c_str());
    return 3;
  }

  const std::vector<std::pair<std::string, std::function<Outcome(const Context&)>>> criteria{
      {"MEC-only exactness", mec_only_exact},
      {"local-only formula vs simulation", local_only_vs_sim},
      {"service-threshold three-way agreement", service_three_way},
      {"moment oracle", moment_oracle},
      {"optimal thresholds at mu=0.5 lambda=3", fig4_thresholds},
      {"structural suite", structure_grid},
      {"frontier dominance", frontier_dominance},
      {"RVI vs brute-force oracle", oracle_equivalence},
      {"truncation stability", truncation_stability},
      {"determinism", determinism},
  };

  std::set<int> failed;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    std::fprintf(stderr, "[criterion %d] %s\n", id, criteria[i].first.c_str());
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.passed) failed.insert(id);
    std::printf("%s %d %s: %s [%.1fs]\n", o.passed ? "PASS" : "FAIL", id, criteria[i].first.c_str(), o.summary.c_str(), secs);
    std::fflush(stdout);
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::set<int> expected(expect_fail.begin(), expect_fail.end());
  if (!only.empty()) {
    std::set<int> subset;
    for (int id : only)
      if (expected.count(id)) subset.insert(id);
    expected = subset;
  }
  std::fprintf(stderr, "%zu failing, %.1fs total\n", failed.size(), total);
  if (failed == expected) return 0;
  for (int id : failed)
    if (!expected.count(id)) std::fprintf(stderr, "unexpected failure: criterion %d\n", id);
  for (int id : expected)
    if (!failed.count(id)) std::fprintf(stderr, "criterion %d was expected to fail but passed\n", id);
  return 1;
}
