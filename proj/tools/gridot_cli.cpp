// gridot: command-line front end.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gridot/barycenter.hpp"
#include "gridot/errors.hpp"
#include "gridot/io.hpp"
#include "gridot/reference.hpp"
#include "gridot/refinement.hpp"
#include "gridot/sampling.hpp"
#include "gridot/transportmap.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace gridot;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;

// JSON config files: keys are option long names of the chosen command
// ("levels", "n-min", ...); arrays become repeated values.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* app) : app_(app) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      j = json::parse(input);
    } catch (const json::parse_error& e) {
      throw CLI::ConversionError("config", std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config", "top level must be an object");
    std::vector<CLI::ConfigItem> items;
    std::vector<std::string> parents;
    for (const auto* sub : app_->get_subcommands()) parents.push_back(sub->get_name());
    collect(j, parents, items);
    return items;
  }

 private:
  const CLI::App* app_;

  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  static void collect(const json& j, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        auto next = parents;
        next.push_back(key);
        collect(value, next, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

struct SolveFlags {
  std::size_t levels = 5;
  std::size_t n_min = 10;
  std::string policy = "standard";
  bool no_neighbors = false;
  std::string density = "linear";
  std::size_t quadrature = kDefaultQuadratureOrder;
  std::size_t workers = 1;
  bool header = false;

  SolveConfig config() const {
    SolveConfig c;
    c.max_levels = levels;
    c.n_min = n_min;
    c.policy = policy == "longest_axis" ? RefinePolicy::longest_axis : RefinePolicy::standard;
    c.neighbor_expansion = !no_neighbors;
    c.density_model = density == "uniform" ? DensityModel::uniform : DensityModel::linear;
    c.quadrature_order = quadrature;
    c.workers = workers;
    return c;
  }
};

void add_solve_flags(CLI::App* app, SolveFlags& f) {
  app->add_option("--levels", f.levels, "Maximum number of refinement levels")->capture_default_str();
  app->add_option("--n-min", f.n_min, "Segments with more samples than this are split")->capture_default_str();
  app->add_option("--policy", f.policy, "Refinement policy")
      ->check(CLI::IsMember({"standard", "longest_axis"}))
      ->capture_default_str();
  app->add_flag("--no-neighbors", f.no_neighbors, "Do not widen the pattern with neighbouring cells");
  app->add_option("--density", f.density, "Per-cell density model")
      ->check(CLI::IsMember({"linear", "uniform"}))
      ->capture_default_str();
  app->add_option("--quadrature", f.quadrature, "Gauss-Legendre order for local costs")->capture_default_str();
  app->add_option("--workers", f.workers, "Worker threads")->envname("OT_WORKERS")->capture_default_str();
  app->add_flag("--header", f.header, "Input CSV files start with a header row");
}

// Reference map selection shared by solve and metrics.
struct ReferenceFlags {
  std::string kind = "none";
  std::vector<double> src_mean, src_cov, dst_mean, dst_cov;
  std::string table;
  std::optional<double> w_reference;

  std::optional<Gaussian> source_gaussian() const {
    if (src_cov.empty()) return std::nullopt;
    return Gaussian(src_mean.empty() ? std::vector<double>(std::llround(std::sqrt(src_cov.size())), 0.0) : src_mean,
                    src_cov);
  }
  std::optional<Gaussian> target_gaussian() const {
    if (dst_cov.empty()) return std::nullopt;
    return Gaussian(dst_mean.empty() ? std::vector<double>(std::llround(std::sqrt(dst_cov.size())), 0.0) : dst_mean,
                    dst_cov);
  }

  /// Forward reference map, or nullopt for none / table.
  std::optional<PointMap> forward() const {
    if (kind == "cube-root") return PointMap(cube_root_map);
    if (kind == "gaussian-affine") {
      const auto s = source_gaussian();
      const auto t = target_gaussian();
      if (!s || !t) throw DomainError("gaussian-affine reference needs --src-cov and --dst-cov");
      const auto a = gaussian_affine_map(*s, *t);
      return PointMap([a](std::span<const double> x) { return a(x); });
    }
    return std::nullopt;
  }

  std::optional<PointMap> inverse() const {
    if (kind == "cube-root") {
      return PointMap([](std::span<const double> x) {
        std::vector<double> y(x.begin(), x.end());
        for (auto& v : y) v = v * v * v;
        return y;
      });
    }
    if (kind == "gaussian-affine") {
      const auto a = gaussian_affine_map(*target_gaussian(), *source_gaussian());
      return PointMap([a](std::span<const double> x) { return a(x); });
    }
    return std::nullopt;
  }

  std::optional<double> reference_distance() const {
    if (w_reference) return w_reference;
    if (kind == "gaussian-affine") {
      const auto s = source_gaussian();
      const auto t = target_gaussian();
      if (s && t) return gaussian_wasserstein(*s, *t);
    }
    return std::nullopt;
  }
};

void add_reference_flags(CLI::App* app, ReferenceFlags& f) {
  app->add_option("--reference", f.kind, "Reference map for E1")
      ->check(CLI::IsMember({"none", "gaussian-affine", "cube-root", "table"}))
      ->capture_default_str();
  app->add_option("--src-mean", f.src_mean, "Source Gaussian mean")->delimiter(',');
  app->add_option("--src-cov", f.src_cov, "Source Gaussian covariance, row-major")->delimiter(',');
  app->add_option("--dst-mean", f.dst_mean, "Target Gaussian mean")->delimiter(',');
  app->add_option("--dst-cov", f.dst_cov, "Target Gaussian covariance, row-major")->delimiter(',');
  app->add_option("--reference-table", f.table, "CSV of x,ybar(x) rows");
  app->add_option("--w-reference", f.w_reference, "Reference distance for E2");
}

json number_or_null(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& l : lines) out << l << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_lines(path, {j.dump(2)}); }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::optional<double> level_e1(const LevelSolution& level, const SampleSet& samples, const ReferenceFlags& ref,
                               const std::optional<ReferenceTable>& table) {
  const MapEvaluator ev(level);
  if (table) return map_error_E1(push_samples(ev, table->points), table->images);
  if (const auto f = ref.forward()) return map_error_E1(ev, samples, *f);
  return std::nullopt;
}

// ---- solve ----

struct SolveArgs {
  std::string src, dst, out = "out";
  SolveFlags flags;
  ReferenceFlags ref;
  bool both_directions = false;
  bool no_timing = false;
};

int run_solve(const SolveArgs& a) {
  const auto source = load_samples(a.src, a.flags.header);
  const auto target = load_samples(a.dst, a.flags.header);
  if (source.dim() != target.dim()) {
    throw DomainError("dimension mismatch: " + a.src + " has " + std::to_string(source.dim()) + " columns, " + a.dst +
                      " has " + std::to_string(target.dim()));
  }
  std::optional<ReferenceTable> table;
  if (a.ref.kind == "table") {
    if (a.ref.table.empty()) throw DomainError("--reference table needs --reference-table");
    table = load_reference_table(a.ref.table);
  }
  const auto config = a.flags.config();
  const auto sol = solve(source, target, config);
  ensure_dir(a.out);

  std::vector<std::string> records;
  for (const auto& level : sol.levels) records.push_back(level_record(level, !a.no_timing));
  write_lines(fs::path(a.out) / "levels.jsonl", records);

  {
    const auto& last = sol.final_level();
    std::ofstream out(fs::path(a.out) / "coupling.csv");
    if (!out) throw IoError("cannot write coupling.csv");
    out << "source_cell_linear_index,target_cell_linear_index,lambda\n";
    for (const auto& t : sol.maps) {
      out << last.source.partition[t.pair.source].linear << ',' << last.target.partition[t.pair.target].linear << ','
          << format_double(t.lambda) << '\n';
    }
  }

  const MapEvaluator ev(sol);
  write_samples(fs::path(a.out) / "mapped.csv", push_samples(ev, source, config.workers));

  const double w = wasserstein_distance(sol);
  const auto w_ref = a.ref.reference_distance();
  json metrics;
  metrics["level"] = sol.final_level().level;
  metrics["E1_source_side"] = number_or_null(level_e1(sol.final_level(), source, a.ref, table));
  if (a.both_directions) {
    const auto inv = a.ref.inverse();
    if (!inv) throw DomainError("--both-directions needs a gaussian-affine or cube-root reference");
    const auto back = solve(target, source, config);
    metrics["E1_target_side"] = map_error_E1(MapEvaluator(back), target, *inv);
  }
  metrics["W"] = w;
  metrics["W_reference"] = number_or_null(w_ref);
  metrics["E2"] = w_ref ? json(distance_error_E2(w, *w_ref)) : json(nullptr);
  json per_level = json::array();
  for (const auto& level : sol.levels) {
    json r;
    r["level"] = level.level;
    r["W"] = std::sqrt(2.0 * std::max(0.0, level.objective));
    r["E1_source_side"] = number_or_null(level_e1(level, source, a.ref, table));
    per_level.push_back(r);
  }
  metrics["levels"] = per_level;
  write_json(fs::path(a.out) / "metrics.json", metrics);
  return 0;
}

// ---- barycenter / interpolate ----

struct BarycenterArgs {
  std::vector<std::string> inputs;
  std::vector<double> weights;
  std::string init, out = "out";
  std::size_t max_iters = 10;
  double tol = 1e-3;
  SolveFlags flags;
};

json iteration_record(const BarycenterIteration& h) {
  json j;
  j["iteration"] = h.iteration;
  j["mean_displacement"] = h.mean_displacement;
  j["objective"] = h.objective;
  j["mean_cell_diameter"] = h.mean_cell_diameter;
  return j;
}

void write_history(const fs::path& path, const BarycenterResult& r) {
  std::vector<std::string> lines;
  for (const auto& h : r.history) lines.push_back(iteration_record(h).dump());
  write_lines(path, lines);
}

int run_barycenter(const BarycenterArgs& a) {
  if (a.inputs.size() < 2) throw DomainError("barycenter needs at least two marginals");
  BarycenterProblem problem;
  for (const auto& p : a.inputs) problem.marginals.push_back(load_samples(p, a.flags.header));
  problem.weights = a.weights.empty() ? std::vector<double>(a.inputs.size(), 1.0 / static_cast<double>(a.inputs.size()))
                                      : a.weights;
  if (problem.weights.size() != a.inputs.size()) {
    throw DomainError(std::to_string(problem.weights.size()) + " weights given for " + std::to_string(a.inputs.size()) +
                      " marginals");
  }
  const double sum = std::accumulate(problem.weights.begin(), problem.weights.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-9) throw DomainError("weights sum to " + format_double(sum) + ", expected 1");
  for (auto& w : problem.weights) w /= sum;
  if (!a.init.empty()) problem.init = load_samples(a.init, a.flags.header);
  problem.pairwise = a.flags.config();
  problem.pairwise.workers = 1;
  problem.workers = a.flags.workers;
  problem.max_iters = a.max_iters;
  problem.tolerance = a.tol;
  const auto result = barycenter(problem);
  ensure_dir(a.out);
  write_samples(fs::path(a.out) / "barycenter.csv", result.samples);
  write_history(fs::path(a.out) / "history.jsonl", result);
  return 0;
}

struct InterpolateArgs {
  std::string src, dst, out = "out";
  std::vector<double> t;
  std::size_t max_iters = 10;
  double tol = 1e-3;
  SolveFlags flags;
};

int run_interpolate(const InterpolateArgs& a) {
  const auto source = load_samples(a.src, a.flags.header);
  const auto target = load_samples(a.dst, a.flags.header);
  ensure_dir(a.out);
  std::vector<std::string> summary;
  for (std::size_t k = 0; k < a.t.size(); ++k) {
    const auto r = interpolate(source, target, a.t[k], a.flags.config(), a.max_iters, a.tol);
    const std::string stem = "interpolant_" + std::to_string(k);
    write_samples(fs::path(a.out) / (stem + ".csv"), r.samples);
    json j;
    j["index"] = k;
    j["t"] = a.t[k];
    j["file"] = stem + ".csv";
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["history"] = json::array();
    for (const auto& h : r.history) j["history"].push_back(iteration_record(h));
    summary.push_back(j.dump());
  }
  write_lines(fs::path(a.out) / "history.jsonl", summary);
  return 0;
}

// ---- generate ----

struct GenerateArgs {
  std::string kind;
  std::size_t n = 10000;
  std::uint64_t seed = 0;
  std::vector<double> mean, cov, target_mean, target_cov;
  std::size_t dim = 2;
  std::string out, reference_out;
};

int run_generate(const GenerateArgs& a) {
  SampleSet samples(1, {0.0});
  std::optional<ReferenceTable> table;
  if (a.kind == "gaussian") {
    if (a.cov.empty()) throw DomainError("gaussian generator needs --cov");
    const std::size_t d = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(a.cov.size()))));
    const Gaussian g(a.mean.empty() ? std::vector<double>(d, 0.0) : a.mean, a.cov);
    samples = sample_gaussian(g, a.n, a.seed);
    if (!a.reference_out.empty()) {
      if (a.target_cov.empty()) throw DomainError("--reference-out needs --target-cov");
      const Gaussian t(a.target_mean.empty() ? std::vector<double>(d, 0.0) : a.target_mean, a.target_cov);
      const auto map = gaussian_affine_map(g, t);
      std::vector<double> images;
      for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto y = map(samples.point(i));
        images.insert(images.end(), y.begin(), y.end());
      }
      table = ReferenceTable{samples, SampleSet(d, std::move(images))};
    }
  } else if (a.kind == "uniform-square") {
    samples = sample_uniform_square(a.n, a.seed);
  } else if (a.kind == "uniform-cross") {
    samples = sample_uniform_cross(a.n, a.seed);
  } else {
    samples = sample_cuberoot_target(a.n, a.dim, a.seed);
  }
  if (!a.reference_out.empty() && !table) throw DomainError("--reference-out is only available for gaussian");
  if (a.out.empty()) {
    write_samples(std::cout, samples);
  } else {
    write_samples(fs::path(a.out), samples);
  }
  if (table) write_reference_table(a.reference_out, *table);
  return 0;
}

// ---- metrics ----

struct MetricsArgs {
  std::string src, mapped, out;
  ReferenceFlags ref;
  std::optional<double> w;
  bool header = false;
};

int run_metrics(const MetricsArgs& a) {
  json metrics;
  if (!a.mapped.empty()) {
    const auto mapped = load_samples(a.mapped, a.header);
    if (a.ref.kind == "table") {
      if (a.ref.table.empty()) throw DomainError("--reference table needs --reference-table");
      const auto table = load_reference_table(a.ref.table);
      metrics["E1_source_side"] = map_error_E1(mapped, table.images);
    } else if (const auto f = a.ref.forward()) {
      if (a.src.empty()) throw DomainError("--mapped with a reference map needs --src");
      const auto source = load_samples(a.src, a.header);
      if (source.size() != mapped.size() || source.dim() != mapped.dim()) {
        throw DomainError("--src and --mapped differ in shape");
      }
      std::vector<double> images;
      for (std::size_t i = 0; i < source.size(); ++i) {
        const auto y = (*f)(source.point(i));
        images.insert(images.end(), y.begin(), y.end());
      }
      metrics["E1_source_side"] = map_error_E1(mapped, SampleSet(source.dim(), std::move(images)));
    } else {
      metrics["E1_source_side"] = nullptr;
    }
  }
  const auto w_ref = a.ref.reference_distance();
  metrics["W"] = number_or_null(a.w);
  metrics["W_reference"] = number_or_null(w_ref);
  metrics["E2"] = (a.w && w_ref) ? json(distance_error_E2(*a.w, *w_ref)) : json(nullptr);
  if (a.out.empty()) {
    std::cout << metrics.dump(2) << '\n';
  } else {
    write_json(a.out, metrics);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilevel optimal transport between sample clouds"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "JSON file with option values for the command");
  app.config_formatter(std::make_shared<JsonConfig>(&app));

  SolveArgs solve_args;
  auto* solve_cmd = app.add_subcommand("solve", "Transport plan, map and distance between two clouds");
  solve_cmd->add_option("--src", solve_args.src, "Source samples (CSV)")->required();
  solve_cmd->add_option("--dst", solve_args.dst, "Target samples (CSV)")->required();
  solve_cmd->add_option("--out", solve_args.out, "Output directory")->capture_default_str();
  add_solve_flags(solve_cmd, solve_args.flags);
  add_reference_flags(solve_cmd, solve_args.ref);
  solve_cmd->add_flag("--both-directions", solve_args.both_directions,
                      "Also solve target to source and report E1 on that side");
  solve_cmd->add_flag("--no-timing", solve_args.no_timing, "Leave wall times out of levels.jsonl");

  BarycenterArgs bary_args;
  auto* bary_cmd = app.add_subcommand("barycenter", "Weighted barycenter of several clouds");
  bary_cmd->add_option("inputs", bary_args.inputs, "Marginal sample files (CSV)")->required();
  bary_cmd->add_option("--weights", bary_args.weights, "Barycenter weights (default uniform)")->delimiter(',');
  bary_cmd->add_option("--init", bary_args.init, "Initial cloud (default: first marginal)");
  bary_cmd->add_option("--max-iters", bary_args.max_iters, "Iteration limit")->capture_default_str();
  bary_cmd->add_option("--tol", bary_args.tol, "Stop when mean displacement <= tol * support diameter")
      ->capture_default_str();
  bary_cmd->add_option("--out", bary_args.out, "Output directory")->capture_default_str();
  add_solve_flags(bary_cmd, bary_args.flags);

  InterpolateArgs interp_args;
  auto* interp_cmd = app.add_subcommand("interpolate", "Displacement interpolation between two clouds");
  interp_cmd->add_option("--src", interp_args.src, "Source samples (CSV)")->required();
  interp_cmd->add_option("--dst", interp_args.dst, "Target samples (CSV)")->required();
  interp_cmd->add_option("--t", interp_args.t, "Interpolation parameters in [0,1]")->delimiter(',')->required();
  interp_cmd->add_option("--max-iters", interp_args.max_iters, "Iteration limit")->capture_default_str();
  interp_cmd->add_option("--tol", interp_args.tol, "Barycenter stopping tolerance")->capture_default_str();
  interp_cmd->add_option("--out", interp_args.out, "Output directory")->capture_default_str();
  add_solve_flags(interp_cmd, interp_args.flags);

  GenerateArgs gen_args;
  auto* gen_cmd = app.add_subcommand("generate", "Draw seeded test samples");
  gen_cmd->add_option("kind", gen_args.kind, "Generator")
      ->check(CLI::IsMember({"gaussian", "uniform-square", "uniform-cross", "cuberoot-target"}))
      ->required();
  gen_cmd->add_option("--n", gen_args.n, "Number of samples")->capture_default_str();
  gen_cmd->add_option("--seed", gen_args.seed, "RNG seed")->capture_default_str();
  gen_cmd->add_option("--mean", gen_args.mean, "Gaussian mean")->delimiter(',');
  gen_cmd->add_option("--cov", gen_args.cov, "Gaussian covariance, row-major")->delimiter(',');
  gen_cmd->add_option("--dim", gen_args.dim, "Dimension for cuberoot-target")->capture_default_str();
  gen_cmd->add_option("--out", gen_args.out, "Output CSV (default stdout)");
  gen_cmd->add_option("--reference-out", gen_args.reference_out,
                      "Also write x,ybar(x) rows of the Gaussian affine map to this CSV");
  gen_cmd->add_option("--target-mean", gen_args.target_mean, "Target Gaussian mean for --reference-out")
      ->delimiter(',');
  gen_cmd->add_option("--target-cov", gen_args.target_cov, "Target Gaussian covariance for --reference-out")
      ->delimiter(',');

  MetricsArgs metrics_args;
  auto* metrics_cmd = app.add_subcommand("metrics", "E1 and E2 from stored results");
  metrics_cmd->add_option("--src", metrics_args.src, "Source samples the mapped file was produced from");
  metrics_cmd->add_option("--mapped", metrics_args.mapped, "Mapped samples (CSV)");
  metrics_cmd->add_option("--w", metrics_args.w, "Numerical distance W");
  metrics_cmd->add_option("--out", metrics_args.out, "Output JSON (default stdout)");
  metrics_cmd->add_flag("--header", metrics_args.header, "Input CSV files start with a header row");
  add_reference_flags(metrics_cmd, metrics_args.ref);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (solve_cmd->parsed()) return run_solve(solve_args);
    if (bary_cmd->parsed()) return run_barycenter(bary_args);
    if (interp_cmd->parsed()) return run_interpolate(interp_args);
    if (gen_cmd->parsed()) return run_generate(gen_args);
    if (metrics_cmd->parsed()) return run_metrics(metrics_args);
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const OutOfSupportError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
