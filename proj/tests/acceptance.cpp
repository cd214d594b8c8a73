// Acceptance harness: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "gridot/barycenter.hpp"
#include "gridot/reference.hpp"
#include "gridot/sampling.hpp"
#include "gridot/transportmap.hpp"
#include "lp_oracle.hpp"
#include "stats.hpp"

using namespace gridot;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail, double seconds, double limit) {
  const bool in_time = seconds < limit;
  ok = ok && in_time;
  failures += !ok;
  std::printf("%s %d %s: %s; %.2f s (limit %.0f s)\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str(), seconds,
              limit);
  std::fflush(stdout);
}

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

const Gaussian kSigma1({0.0, 0.0}, {4.0, -1.0, -1.0, 1.0});
const Gaussian kSigma2({0.0, 0.0}, {9.0, 8.0, 8.0, 9.0});
const Gaussian kStandard({0.0, 0.0}, {1.0, 0.0, 0.0, 1.0});

SolveConfig five_levels() {
  SolveConfig c;
  c.max_levels = 5;
  return c;
}

std::vector<double> e1_by_level(const TransportSolution& sol, const SampleSet& src, const PointMap& ref) {
  std::vector<double> out;
  for (const auto& level : sol.levels) out.push_back(map_error_E1(MapEvaluator(level), src, ref));
  return out;
}

void lp_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> size(2, 4);
  double worst = 0.0;
  bool optimal = true;
  for (int k = 0; k < 200; ++k) {
    const std::size_t m = size(rng), n = size(rng);
    const auto inst = testing::random_instance(rng, m, n);
    const auto sol = solve_transportation({inst.p, inst.q, inst.costs}, SparsityPattern::dense(m, n));
    optimal = optimal && sol.status == SolveStatus::optimal;
    worst = std::max(worst, std::abs(sol.objective - testing::enumerate_vertices(inst.p, inst.q, inst.costs, m, n)));
  }
  report(1, "LP oracle equivalence", optimal && worst <= 1e-9,
         fmt("200 instances, max |simplex - enumeration| = %.3g (tol 1e-9)", worst), since(t0), 10);
}

LinearDensity1D random_factor(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double left = -5.0 + 10.0 * u(rng);
  const double width = std::pow(10.0, -1.0 + 2.0 * u(rng));
  const double s = u(rng) < 0.1 ? (u(rng) < 0.5 ? -1.0 : 1.0) : 2.0 * u(rng) - 1.0;
  return {left, left + width, s * 2.0 / width};
}

void additivity() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  constexpr std::size_t kDraws = 1000000, kPush = 100000;
  const double ks_bound = 2.0 * 1.63 / std::sqrt(static_cast<double>(kPush));
  double worst_z = 0.0, worst_ks = 0.0, worst_sum = 0.0;
  for (int k = 0; k < 50; ++k) {
    const std::size_t d = 1 + static_cast<std::size_t>(k % 4);
    CellDensity src{CellIndex{}, 1.0, {}}, tgt{CellIndex{}, 1.0, {}};
    for (std::size_t l = 0; l < d; ++l) src.factors.push_back(random_factor(rng)), tgt.factors.push_back(random_factor(rng));
    const double cost = cell_pair_cost(src, tgt);
    double sum = 0.0;
    for (std::size_t l = 0; l < d; ++l) sum += cost_1d(src.factors[l], tgt.factors[l]);
    worst_sum = std::max(worst_sum, std::abs(cost - sum));

    const auto map = cell_pair_map(src, tgt);
    std::vector<double> x(d), y(d);
    std::vector<std::vector<double>> pushed(d, std::vector<double>(kPush));
    double mean = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < kDraws; ++i) {
      for (std::size_t l = 0; l < d; ++l) x[l] = quantile(src.factors[l], u(rng));
      map.apply(x, y);
      double c = 0.0;
      for (std::size_t l = 0; l < d; ++l) c += 0.5 * (y[l] - x[l]) * (y[l] - x[l]);
      const double delta = c - mean;
      mean += delta / static_cast<double>(i + 1);
      m2 += delta * (c - mean);
      if (i < kPush) {
        for (std::size_t l = 0; l < d; ++l) pushed[l][i] = y[l];
      }
    }
    const double se = std::sqrt(m2 / static_cast<double>(kDraws - 1) / static_cast<double>(kDraws));
    worst_z = std::max(worst_z, std::abs(cost - mean) / std::max(se, 1e-300));
    for (std::size_t l = 0; l < d; ++l) {
      const auto& f = tgt.factors[l];
      worst_ks = std::max(worst_ks, testing::ks_one_sample(pushed[l], [&](double v) { return cdf(f, v); }));
    }
  }
  report(2, "cell pair cost additivity", worst_z <= 3.0 && worst_ks <= ks_bound && worst_sum == 0.0,
         fmt("50 pairs d=1..4, max |cost - MC|/SE = %.3f (tol 3), max KS = %.5f (tol %.5f), axis sum gap %.3g", worst_z,
             worst_ks, ks_bound, worst_sum),
         since(t0), 60);
}

SampleSet random_cloud(std::mt19937_64& rng, std::size_t n, std::size_t d) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int kind = static_cast<int>(3 * u(rng));
  std::vector<double> coords(n * d);
  for (auto& c : coords) c = kind == 0 ? g(rng) : kind == 1 ? u(rng) : std::pow(u(rng), 3.0) * 4.0 - 1.0;
  return SampleSet(d, std::move(coords));
}

std::vector<double> weights_of(const WeightedPartition& part) {
  std::vector<double> w;
  for (const auto& c : part.cells()) w.push_back(c.weight);
  return w;
}

std::vector<double> costs_of(const SparsityPattern& pattern, const MarginalLevel& s, const MarginalLevel& t) {
  std::vector<double> c;
  for (const auto& pr : pattern.pairs()) c.push_back(cell_pair_cost(s.cells[pr.source], t.cells[pr.target], 8));
  return c;
}

void feasibility() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> dim(1, 3), count(50, 1500);
  double worst = 0.0;
  bool feasible = true;
  for (int k = 0; k < 100; ++k) {
    const std::size_t d = dim(rng);
    const auto xs = random_cloud(rng, count(rng), d), ys = random_cloud(rng, count(rng), d);
    Grid gs = initial_grid(xs), gt = initial_grid(ys);
    auto ps = assign_weights(xs, gs), pt = assign_weights(ys, gt);
    auto pattern = SparsityPattern::dense(ps.size(), pt.size());
    std::vector<double> warm;
    for (int level = 1; level <= 3; ++level) {
      const auto p = weights_of(ps), q = weights_of(pt);
      const auto product = product_feasible(p, q);
      worst = std::max(worst, max_marginal_violation(p, q, SparsityPattern::dense(p.size(), q.size()), product.values));
      if (!warm.empty()) worst = std::max(worst, max_marginal_violation(p, q, pattern, warm));
      feasible = feasible && check_feasible(p, q, pattern);
      LevelSolution cur{static_cast<std::size_t>(level),
                        fit_marginal(xs, std::move(ps), DensityModel::linear),
                        fit_marginal(ys, std::move(pt), DensityModel::linear),
                        std::move(pattern),
                        {},
                        {},
                        0.0,
                        0,
                        0.0};
      cur.costs = costs_of(cur.pattern, cur.source, cur.target);
      cur.coupling = solve_transportation({p, q, cur.costs}, cur.pattern, {}, warm);
      feasible = feasible && cur.coupling.status == SolveStatus::optimal;
      if (level == 3) break;

      const auto rs = refine_grid(gs, cur.source.partition, RefinePolicy::standard, 10);
      const auto rt = refine_grid(gt, cur.target.partition, RefinePolicy::standard, 10);
      gs = rs.grid;
      gt = rt.grid;
      ps = assign_weights(xs, gs);
      pt = assign_weights(ys, gt);
      const ParentMaps parents{parent_positions(cur.source.partition, rs, ps),
                               parent_positions(cur.target.partition, rt, pt)};
      const auto minimal = minimal_pattern(cur, parents, ps.size(), pt.size());
      const auto fp = weights_of(ps), fq = weights_of(pt);
      feasible = feasible && check_feasible(fp, fq, minimal);
      const auto scaled_min = scaled_feasible(cur, fp, fq, parents, minimal);
      worst = std::max(worst, max_marginal_violation(fp, fq, minimal, scaled_min.values));
      pattern = expand_pattern(minimal, ps, pt);
      warm = scaled_feasible(cur, fp, fq, parents, pattern).values;
    }
  }
  report(3, "warm start feasibility", feasible && worst <= 1e-9,
         fmt("100 three-level sequences, max marginal violation = %.3g (tol 1e-9)", worst) +
             (feasible ? ", every restricted LP feasible" : ", a restricted LP was infeasible"),
         since(t0), 30);
}

void gaussian_case() {
  const auto t0 = Clock::now();
  const auto src = sample_gaussian(kSigma1, 10000, 1);
  const auto tgt = sample_gaussian(kSigma2, 10000, 2);
  const auto sol = solve(src, tgt, five_levels());
  const auto ref = gaussian_affine_map(kSigma1, kSigma2);
  const auto e1 = e1_by_level(sol, src, [&](std::span<const double> x) { return ref(x); });
  const double w = wasserstein_distance(sol);
  const double w_ref = gaussian_wasserstein(kSigma1, kSigma2);
  const double e2 = distance_error_E2(w, w_ref);
  const double ratio = e1[1] / e1.back();
  std::string trail;
  for (std::size_t k = 0; k < e1.size(); ++k) trail += (k ? ", " : "") + fmt("%.4f", e1[k]);
  report(4, "Gaussian to Gaussian", ratio >= 2.0 && std::abs(e2) <= 0.1 * w_ref,
         fmt("E1 level 2 / final = %.3f (need >= 2), |E2| = %.4f (tol %.4f), W = %.4f", ratio, std::abs(e2), 0.1 * w_ref,
             w) +
             ", E1 by level [" + trail + "]",
         since(t0), 600);
}

void cube_root_case() {
  const auto t0 = Clock::now();
  const auto src = sample_gaussian(kStandard, 10000, 3);
  const auto tgt = sample_cuberoot_target(10000, 2, 4);
  const auto sol = solve(src, tgt, five_levels());
  const auto e1 = e1_by_level(sol, src, [](std::span<const double> x) { return cube_root_map(x); });
  std::string trail;
  for (std::size_t k = 0; k < e1.size(); ++k) trail += (k ? ", " : "") + fmt("%.4f", e1[k]);
  bool ok = e1.size() >= 3;
  int violations = 0;
  for (std::size_t k = e1.size() - 2; ok && k < e1.size(); ++k) {
    if (e1[k] > e1[k - 1]) {
      ++violations;
      ok = e1[k] <= 1.05 * e1[k - 1];
    }
  }
  ok = ok && violations <= 1;
  report(5, "cube-root map", ok,
         fmt("%.0f level(s) with E1 increasing over the last three (allow one within 5%%)", violations) +
             ", E1 by level [" + trail + "]",
         since(t0), 600);
}

void square_cross_case() {
  const auto t0 = Clock::now();
  const auto src = sample_uniform_square(10000, 5);
  const auto tgt = sample_uniform_cross(10000, 6);
  const auto sol = solve(src, tgt, five_levels());
  const std::size_t n = sol.levels.size();
  const double w_last = std::sqrt(2.0 * sol.levels[n - 1].objective);
  const double w_prev = std::sqrt(2.0 * sol.levels[n - 2].objective);
  const double drift = std::abs(w_last - w_prev) / w_prev;
  const auto pushed = push_samples(MapEvaluator(sol), src);
  const auto& cells = sol.final_level().target.cells;
  const double mn = static_cast<double>(src.size()) * static_cast<double>(tgt.size());
  const double sampling = 1.63 * std::sqrt(static_cast<double>(src.size() + tgt.size()) / mn);
  double worst_gap = -INFINITY, worst_ks = 0.0, worst_bound = 0.0;
  for (std::size_t l = 0; l < 2; ++l) {
    double width = 0.0;
    for (const auto& c : cells) width += c.weight * c.factors[l].width();
    const double bound = std::max(2.0 * width, sampling);
    const double ks = testing::ks_two_sample(testing::column(pushed, l), testing::column(tgt, l));
    if (ks - bound > worst_gap) worst_gap = ks - bound, worst_ks = ks, worst_bound = bound;
  }
  report(6, "square to cross", drift <= 0.05 && worst_gap <= 0.0,
         fmt("W %.5f vs previous level %.5f (drift %.4f, tol 0.05)", w_last, w_prev, drift) +
             fmt(", worst axis KS %.4f (bound %.4f)", worst_ks, worst_bound),
         since(t0), 300);
}

void barycenter_translation() {
  const auto t0 = Clock::now();
  const auto nu1 = sample_uniform_square(1000, 7);
  auto shifted = sample_uniform_square(1000, 8).coords();
  for (std::size_t i = 0; i < shifted.size(); i += 2) shifted[i] += 2.0;
  BarycenterProblem p;
  p.marginals = {nu1, SampleSet(2, shifted)};
  p.weights = {0.5, 0.5};
  p.max_iters = 5;
  p.pairwise = five_levels();
  const auto r = barycenter(p);
  const auto m1 = testing::mean_of(nu1), mb = testing::mean_of(r.samples);
  const auto s1 = testing::stddev_of(nu1), sb = testing::stddev_of(r.samples);
  const double mean_err = std::hypot(mb[0] - m1[0] - 1.0, mb[1] - m1[1]);
  const double spread = std::max(std::abs(sb[0] / s1[0] - 1.0), std::abs(sb[1] / s1[1] - 1.0));
  report(7, "barycenter translation", mean_err <= 0.05 && spread <= 0.10,
         fmt("mean offset error %.4f (tol 0.05), worst per-axis spread deviation %.4f (tol 0.10), %.0f iterations",
             mean_err, spread, static_cast<double>(r.iterations)),
         since(t0), 300);
}

void barycenter_fixed_point() {
  const auto t0 = Clock::now();
  const auto nu = sample_gaussian(kSigma1, 2000, 9);
  BarycenterProblem p;
  p.marginals = {nu, nu};
  p.weights = {0.5, 0.5};
  p.max_iters = 2;
  p.tolerance = 0.0;
  p.pairwise = five_levels();
  const auto r = barycenter(p);
  const double disp = r.history.back().mean_displacement;
  const double diam = r.history.back().mean_cell_diameter;
  report(8, "barycenter fixed point", r.iterations == 2 && disp <= diam,
         fmt("mean displacement after %.0f iterations %.3g, final mean cell diameter %.4f",
             static_cast<double>(r.iterations), disp, diam),
         since(t0), 120);
}

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void determinism() {
  const auto t0 = Clock::now();
  const fs::path root = fs::temp_directory_path() / "gridot_acceptance";
  fs::remove_all(root);
  std::string runs[2];
  bool ran = true;
  for (int k = 0; k < 2; ++k) {
    const fs::path dir = root / ("run" + std::to_string(k));
    fs::create_directories(dir);
    const std::string cli = GRIDOT_CLI;
    const std::string quiet = " >/dev/null 2>&1";
    ran = ran &&
          shell(cli + " generate gaussian --n 10000 --seed 1 --mean 0 0 --cov 4 -1 -1 1 --out " +
                (dir / "src.csv").string() + quiet) == 0 &&
          shell(cli + " generate gaussian --n 10000 --seed 2 --mean 0 0 --cov 9 8 8 9 --out " +
                (dir / "dst.csv").string() + quiet) == 0 &&
          shell(cli + " solve --levels 5 --src " + (dir / "src.csv").string() + " --dst " +
                (dir / "dst.csv").string() + " --out " + (dir / "out").string() +
                " --reference gaussian-affine --src-mean 0 0 --src-cov 4 -1 -1 1 --dst-mean 0 0 --dst-cov 9 8 8 9" +
                quiet) == 0;
    runs[k] = slurp(dir / "out" / "metrics.json");
  }
  const bool same = ran && !runs[0].empty() && runs[0] == runs[1];
  report(9, "determinism", same,
         !ran   ? std::string("a CLI run failed")
         : same ? fmt("two CLI runs of the Gaussian case, metrics.json identical (%.0f bytes)",
                      static_cast<double>(runs[0].size()))
                : std::string("metrics.json differs between runs"),
         since(t0), 1200);
  if (ran && !same) std::printf("  run0: %s\n  run1: %s\n", runs[0].c_str(), runs[1].c_str());
  fs::remove_all(root);
}

}  // namespace

int main() {
  lp_oracle();
  additivity();
  feasibility();
  gaussian_case();
  cube_root_case();
  square_cross_case();
  barycenter_translation();
  barycenter_fixed_point();
  determinism();
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
