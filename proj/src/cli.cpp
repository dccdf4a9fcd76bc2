#include "lvgg/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include "lvgg/datagen.hpp"
#include "lvgg/error.hpp"
#include "lvgg/evalcv.hpp"
#include "lvgg/io.hpp"
#include "lvgg/solver.hpp"

namespace lvgg::cli {

namespace {

using io::Json;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

class UsageError : public Error {
 public:
  using Error::Error;
};

// Defaults for μ and ε can be overridden through the environment.
double env_default(const char* name, double fallback) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return fallback;
  char* end = nullptr;
  const double parsed = std::strtod(v, &end);
  if (end == v || *end != '\0') {
    throw UsageError(std::string("environment variable ") + name + " is not a number");
  }
  return parsed;
}

struct SolverFlags {
  double mu = 0.01;
  double eps = 1e-4;
  int max_iters = 5000;

  void add_to(CLI::App* app) {
    app->add_option("--mu", mu, "Penalty parameter / dual step size (env LVGG_MU)");
    app->add_option("--eps", eps, "Stopping tolerance (env LVGG_EPS)");
    app->add_option("--max-iters", max_iters, "Iteration cap");
  }

  SolverConfig config() const {
    SolverConfig c;
    c.mu = mu;
    c.epsilon = eps;
    c.max_iters = max_iters;
    c.validate();
    return c;
  }
};

struct Context {
  std::vector<std::string> argv;
  std::ostream& out;
  std::ostream& err;
  Clock::time_point start = Clock::now();
};

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw UsageError("cannot create output directory " + dir + ": " + ec.message());
  return p;
}

void finish_manifest(const Context& ctx, io::RunManifest& m, const fs::path& out_dir) {
  m.argv = ctx.argv;
  m.wall_time_seconds = std::chrono::duration<double>(Clock::now() - ctx.start).count();
  io::write_json(out_dir / "manifest.json", m.to_json());
}

// Common solver flags shared by solve and glasso.
struct SolveCommon {
  std::string cov;
  std::string out = ".";
  std::string format = "csv";
  bool telemetry = false;
  bool exempt_diagonal = false;
  SolverFlags solver;

  void add_to(CLI::App* app) {
    app->add_option("--cov", cov, "Covariance matrix file")->required();
    app->add_option("--out", out, "Output directory");
    app->add_option("--format", format, "Matrix output format: csv | bin");
    app->add_flag("--telemetry", telemetry, "Write per-iteration records to telemetry.jsonl");
    app->add_flag("--exempt-diagonal", exempt_diagonal,
                  "NONSTANDARD: leave the diagonal out of the l1 penalty");
    solver.add_to(app);
  }
};

int write_failure(const Context& ctx, const fs::path& out_dir, const std::string& kind,
                  const std::string& message, std::optional<int> last_iter) {
  Json j;
  j["status"] = "error";
  j["kind"] = kind;
  j["message"] = message;
  if (last_iter) j["last_finite_iter"] = *last_iter;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!ec) io::write_json(out_dir / "error.json", j);
  ctx.err << j.dump() << '\n';
  return kNumericalFailure;
}

void write_result_files(const fs::path& out_dir, const SolverResult& res,
                        io::MatrixFormat fmt, io::RunManifest& manifest, Json result_json,
                        bool glasso) {
  const std::string ext = io::extension(fmt);
  Json files;
  if (glasso) {
    io::write_matrix(out_dir / ("k_hat" + ext), res.s_hat, fmt);
    manifest.outputs["k_hat"] = out_dir / ("k_hat" + ext);
    files["k_hat"] = "k_hat" + ext;
  } else {
    io::write_matrix(out_dir / ("s_hat" + ext), res.s_hat, fmt);
    io::write_matrix(out_dir / ("l_hat" + ext), res.l_hat, fmt);
    manifest.outputs["s_hat"] = out_dir / ("s_hat" + ext);
    manifest.outputs["l_hat"] = out_dir / ("l_hat" + ext);
    files["s_hat"] = "s_hat" + ext;
    files["l_hat"] = "l_hat" + ext;
  }
  io::write_matrix(out_dir / ("a_hat" + ext), res.a_hat, fmt);
  manifest.outputs["a_hat"] = out_dir / ("a_hat" + ext);
  files["a_hat"] = "a_hat" + ext;
  result_json["matrices"] = files;
  io::write_json(out_dir / "result.json", result_json);
  manifest.outputs["result"] = out_dir / "result.json";
}

template <typename Solve>
int run_solver_command(const Context& ctx, const SolveCommon& flags, const std::string& command,
                       Json problem_json, const Solve& solve) {
  const fs::path out_dir = prepare_out_dir(flags.out);
  const io::MatrixFormat fmt = io::format_from_string(flags.format);
  const SolverConfig config = flags.solver.config();
  const SymMatrix sigma = io::read_sym_matrix(flags.cov);

  std::unique_ptr<std::ofstream> telemetry;
  IterationObserver observer;
  if (flags.telemetry) {
    telemetry = std::make_unique<std::ofstream>(out_dir / "telemetry.jsonl", std::ios::trunc);
    if (!*telemetry) throw IoError("cannot write telemetry.jsonl");
    observer = [&](const IterationRecord& r) { *telemetry << io::to_json(r).dump() << '\n'; };
  }

  SolveOutput output;
  try {
    output = solve(sigma, config, observer);
  } catch (const DivergenceError& e) {
    return write_failure(ctx, out_dir, "divergence", e.what(), e.last_finite_state().iter);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    return write_failure(ctx, out_dir, "numerical", e.what(), std::nullopt);
  }
  if (telemetry) telemetry->close();

  io::RunManifest manifest;
  manifest.command = command;
  manifest.inputs = {flags.cov};
  manifest.config = {{"solver", io::to_json(config)},
                     {"problem", problem_json},
                     {"format", io::to_string(fmt)},
                     {"telemetry", flags.telemetry}};
  Json result_json = io::to_json(output.result);
  result_json["problem"] = problem_json;
  result_json["config"] = io::to_json(config);
  write_result_files(out_dir, output.result, fmt, manifest, result_json, command == "glasso");
  if (flags.telemetry) manifest.outputs["telemetry"] = out_dir / "telemetry.jsonl";
  finish_manifest(ctx, manifest, out_dir);

  ctx.out << io::to_json(output.result).dump() << '\n';
  return kOk;
}

std::string format_row(const std::vector<double>& values) {
  std::ostringstream os;
  os.precision(10);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) os << ',';
    os << values[i];
  }
  return os.str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context ctx{args, out, err};

  CLI::App app{"Sparse plus low-rank precision matrix estimation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(io::kToolVersion));

  // generate
  LatentModelSpec gen_spec;
  Index gen_n = 0;
  std::string gen_out = ".";
  std::string gen_format = "csv";
  auto* gen = app.add_subcommand("generate", "Synthetic latent-variable data");
  gen->add_option("--p-obs", gen_spec.p_obs, "Observed variables")->required();
  gen->add_option("--p-hidden", gen_spec.p_hidden, "Hidden variables");
  gen->add_option("--sparsity", gen_spec.target_sparsity, "Target off-diagonal density of K_O");
  gen->add_option("--n-samples", gen_n, "Number of samples")->required();
  gen->add_option("--seed", gen_spec.seed, "Random seed")->required();
  gen->add_option("--cross-block-scale", gen_spec.cross_block_scale,
                  "Std. dev. of the observed-hidden noise");
  gen->add_option("--out", gen_out, "Output directory");
  gen->add_option("--format", gen_format, "Matrix output format: csv | bin");

  // solve
  SolveCommon solve_flags;
  double solve_l1 = 0.0, solve_l2 = 0.0;
  auto* solve = app.add_subcommand("solve", "Sparse plus low-rank estimate from a covariance");
  solve_flags.add_to(solve);
  solve->add_option("--lambda1", solve_l1, "l1 weight on S")->required();
  solve->add_option("--lambda2", solve_l2, "Trace weight on L")->required();

  // glasso
  SolveCommon glasso_flags;
  double glasso_lambda = 0.0;
  auto* glasso = app.add_subcommand("glasso", "Graphical lasso baseline");
  glasso_flags.add_to(glasso);
  glasso->add_option("--lambda", glasso_lambda, "l1 weight")->required();

  // cv
  std::string cv_data, cv_model = "lvgg", cv_out = ".";
  std::vector<double> cv_grid1, cv_grid2;
  CvPlan cv_plan;
  SolverFlags cv_solver;
  auto* cv = app.add_subcommand("cv", "K-fold cross-validation with a held-out test split");
  cv->add_option("--data", cv_data, "Sample matrix file (rows = observations)")->required();
  cv->add_option("--model", cv_model, "lvgg | sgg");
  cv->add_option("--grid1", cv_grid1, "lambda1 grid (comma separated)")->delimiter(',');
  cv->add_option("--grid2", cv_grid2, "lambda2 grid (comma separated, lvgg only)")->delimiter(',');
  cv->add_option("--folds", cv_plan.folds, "Number of folds");
  cv->add_option("--seed", cv_plan.split_seed, "Split seed")->required();
  cv->add_option("--train-fraction", cv_plan.train_fraction, "Outer training fraction");
  cv->add_option("--threads", cv_plan.threads, "Worker threads");
  cv->add_option("--out", cv_out, "Output directory");
  cv_solver.add_to(cv);

  // bench
  std::vector<Index> bench_p{100, 200, 400};
  Index bench_hidden = 10;
  double bench_sparsity = 0.05, bench_l1 = 0.02, bench_l2 = 0.2;
  double bench_n_factor = 5.0;
  std::uint64_t bench_seed = 0;
  std::string bench_out = ".";
  SolverFlags bench_solver;
  auto* bench = app.add_subcommand("bench", "Wall-time sweep over problem size");
  bench->add_option("--p-list", bench_p, "Observed dimensions (comma separated)")->delimiter(',');
  bench->add_option("--p-hidden", bench_hidden, "Hidden variables");
  bench->add_option("--sparsity", bench_sparsity, "Target sparsity of K_O");
  bench->add_option("--n-factor", bench_n_factor, "Samples per observed variable");
  bench->add_option("--lambda1", bench_l1, "Base lambda1, in units of mean diag(Sigma)");
  bench->add_option("--lambda2", bench_l2, "Base lambda2, in units of mean diag(Sigma)");
  bench->add_option("--seed", bench_seed, "Random seed")->required();
  bench->add_option("--out", bench_out, "Output directory");
  bench_solver.add_to(bench);

  // replay
  std::string replay_manifest, replay_out;
  auto* replay = app.add_subcommand("replay", "Re-run a manifest and diff its outputs");
  replay->add_option("--manifest", replay_manifest, "manifest.json to replay")->required();
  replay->add_option("--out", replay_out, "Directory for the rerun (default: <dir>/replay)");

  try {
    // Defaults from the environment, before flags can override them.
    for (SolverFlags* f : {&solve_flags.solver, &glasso_flags.solver, &cv_solver, &bench_solver}) {
      f->mu = env_default("LVGG_MU", f->mu);
      f->eps = env_default("LVGG_EPS", f->eps);
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsageError;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    if (*gen) {
      if (!(gen_spec.target_sparsity > 0.0 && gen_spec.target_sparsity < 1.0)) {
        throw UsageError("--sparsity must lie in (0, 1)");
      }
      if (gen_n < 1) throw UsageError("--n-samples must be positive");
      gen_spec.validate();
      const fs::path out_dir = prepare_out_dir(gen_out);
      const io::MatrixFormat fmt = io::format_from_string(gen_format);
      const std::string ext = io::extension(fmt);

      const GroundTruth gt = generate_synthetic(gen_spec);
      const Dataset data = sample_gaussian(gt.k_marginal, gen_n, gen_spec.seed);
      const SymMatrix sigma = empirical_covariance(data);

      io::RunManifest manifest;
      manifest.command = "generate";
      const std::pair<const char*, const Eigen::MatrixXd*> files[] = {
          {"k_full", &gt.k_full.dense()},
          {"k_marginal", &gt.k_marginal.dense()},
          {"samples", &data.samples},
          {"covariance", &sigma.dense()}};
      for (const auto& [name, m] : files) {
        const fs::path path = out_dir / (std::string(name) + ext);
        io::write_matrix(path, *m, fmt);
        manifest.outputs[name] = path;
      }
      manifest.config = {{"spec", io::to_json(gen_spec)},
                         {"n_samples", gen_n},
                         {"format", io::to_string(fmt)},
                         {"covariance_scaling", "1/n"}};
      manifest.seeds = {{"seed", gen_spec.seed}};
      manifest.extra["ground_truth"] = io::ground_truth_summary(gt);
      finish_manifest(ctx, manifest, out_dir);
      out << io::ground_truth_summary(gt).dump() << '\n';
      return kOk;
    }

    if (*solve) {
      const DiagonalPenalty diag = solve_flags.exempt_diagonal ? DiagonalPenalty::kExempt
                                                               : DiagonalPenalty::kPenalized;
      Json problem_json = {{"lambda1", solve_l1},
                           {"lambda2", solve_l2},
                           {"diagonal_penalty", solve_flags.exempt_diagonal ? "exempt" : "penalized"}};
      return run_solver_command(
          ctx, solve_flags, "solve", problem_json,
          [&](const SymMatrix& sigma, const SolverConfig& config, const IterationObserver& obs) {
            return solve_lvgg(LvggProblem{sigma, solve_l1, solve_l2, diag}, config,
                              std::nullopt, obs);
          });
    }

    if (*glasso) {
      const DiagonalPenalty diag = glasso_flags.exempt_diagonal ? DiagonalPenalty::kExempt
                                                                : DiagonalPenalty::kPenalized;
      Json problem_json = {{"lambda", glasso_lambda},
                           {"diagonal_penalty", glasso_flags.exempt_diagonal ? "exempt" : "penalized"}};
      return run_solver_command(
          ctx, glasso_flags, "glasso", problem_json,
          [&](const SymMatrix& sigma, const SolverConfig& config, const IterationObserver& obs) {
            return solve_glasso(GlassoProblem{sigma, glasso_lambda, diag}, config, obs);
          });
    }

    if (*cv) {
      const ModelKind model = model_kind_from_string(cv_model);
      if (cv_grid1.empty()) throw UsageError("--grid1 must not be empty");
      if (model == ModelKind::kLvgg && cv_grid2.empty()) {
        throw UsageError("--grid2 must not be empty for the lvgg model");
      }
      cv_plan.lambda1_grid = cv_grid1;
      cv_plan.lambda2_grid = cv_grid2;
      std::sort(cv_plan.lambda1_grid.begin(), cv_plan.lambda1_grid.end());
      std::sort(cv_plan.lambda2_grid.begin(), cv_plan.lambda2_grid.end());
      cv_plan.validate(model);
      const SolverConfig config = cv_solver.config();
      const fs::path out_dir = prepare_out_dir(cv_out);
      const Dataset data = make_dataset(io::read_matrix(cv_data));

      CvReport report;
      try {
        report = cross_validate(data, cv_plan, config, model);
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& e) {
        return write_failure(ctx, out_dir, "numerical", e.what(), std::nullopt);
      }
      io::write_json(out_dir / "cv_report.json", io::to_json(report));
      {
        std::ofstream csv(out_dir / "cv_grid.csv", std::ios::trunc);
        csv << io::cv_grid_csv(report);
      }
      io::RunManifest manifest;
      manifest.command = "cv";
      manifest.inputs = {cv_data};
      manifest.config = {{"model", to_string(model)},
                         {"lambda1_grid", cv_plan.lambda1_grid},
                         {"lambda2_grid", cv_plan.lambda2_grid},
                         {"folds", cv_plan.folds},
                         {"train_fraction", cv_plan.train_fraction},
                         {"solver", io::to_json(config)}};
      manifest.seeds = {{"split_seed", cv_plan.split_seed}};
      manifest.outputs["cv_report"] = out_dir / "cv_report.json";
      manifest.outputs["cv_grid"] = out_dir / "cv_grid.csv";
      finish_manifest(ctx, manifest, out_dir);
      out << io::to_json(report).dump() << '\n';
      return kOk;
    }

    if (*bench) {
      if (bench_p.empty()) throw UsageError("--p-list must not be empty");
      for (Index p : bench_p) {
        if (p < 2) throw UsageError("--p-list entries must be at least 2");
      }
      if (!(bench_l1 > 0.0 && bench_l2 > 0.0)) throw UsageError("lambdas must be positive");
      if (!(bench_n_factor > 0.0)) throw UsageError("--n-factor must be positive");
      const SolverConfig config = bench_solver.config();
      const fs::path out_dir = prepare_out_dir(bench_out);

      // The four Table-1 style pairs, relative to (bench_l1, bench_l2).
      const std::pair<double, double> pairs[] = {
          {1.0, 1.0}, {1.0, 22.0 / 21.0}, {27.0 / 25.0, 1.0}, {27.0 / 25.0, 22.0 / 21.0}};
      std::string csv = "p,mean_seconds,iters,seconds_per_iter\n";
      Json rows = Json::array();
      for (Index p : bench_p) {
        LatentModelSpec spec;
        spec.p_obs = p;
        spec.p_hidden = bench_hidden;
        spec.target_sparsity = bench_sparsity;
        spec.seed = bench_seed;
        const GroundTruth gt = generate_synthetic(spec);
        const auto n = static_cast<Index>(std::ceil(bench_n_factor * static_cast<double>(p)));
        const SymMatrix sigma = empirical_covariance(sample_gaussian(gt.k_marginal, n, bench_seed));
        const double scale = sigma.trace() / static_cast<double>(p);

        double seconds = 0.0;
        long iters = 0;
        std::vector<int> iter_counts;
        for (const auto& [f1, f2] : pairs) {
          const LvggProblem problem{sigma, bench_l1 * f1 * scale, bench_l2 * f2 * scale};
          const SolverResult res = solve_lvgg(problem, config).result;
          seconds += res.wall_time.count();
          iters += res.iters;
          iter_counts.push_back(res.iters);
        }
        const double mean_seconds = seconds / 4.0;
        const double mean_iters = static_cast<double>(iters) / 4.0;
        const double per_iter = seconds / static_cast<double>(iters);
        csv += format_row({static_cast<double>(p), mean_seconds, mean_iters, per_iter}) + "\n";
        rows.push_back({{"p", p}, {"iters", iter_counts}});
      }
      {
        std::ofstream f(out_dir / "bench.csv", std::ios::trunc);
        f << csv;
      }
      io::RunManifest manifest;
      manifest.command = "bench";
      manifest.config = {{"p_list", bench_p},
                         {"p_hidden", bench_hidden},
                         {"sparsity", bench_sparsity},
                         {"n_factor", bench_n_factor},
                         {"lambda1", bench_l1},
                         {"lambda2", bench_l2},
                         {"solver", io::to_json(config)}};
      manifest.seeds = {{"seed", bench_seed}};
      manifest.outputs["bench"] = out_dir / "bench.csv";
      manifest.timing_outputs = {"bench"};
      manifest.extra["iterations"] = rows;
      finish_manifest(ctx, manifest, out_dir);
      out << csv;
      return kOk;
    }

    if (*replay) {
      const fs::path manifest_path(replay_manifest);
      const Json original = io::read_json(manifest_path);
      const fs::path rerun_dir =
          replay_out.empty() ? manifest_path.parent_path() / "replay" : fs::path(replay_out);
      std::vector<std::string> argv = original.at("argv").get<std::vector<std::string>>();
      bool replaced = false;
      for (std::size_t i = 0; i + 1 < argv.size(); ++i) {
        if (argv[i] == "--out") {
          argv[i + 1] = rerun_dir.string();
          replaced = true;
        }
      }
      if (!replaced) {
        argv.push_back("--out");
        argv.push_back(rerun_dir.string());
      }
      std::ostringstream sink;
      const int code = run(argv, sink, err);
      if (code != kOk) return code;
      const Json rerun = io::read_json(rerun_dir / "manifest.json");
      int mismatches = 0, compared = 0;
      for (const auto& [name, entry] : original.at("outputs").items()) {
        if (!entry.value("deterministic", true)) continue;
        ++compared;
        const Json& other = rerun.at("outputs").at(name);
        if (other.at("digest") != entry.at("digest")) {
          ++mismatches;
          err << "replay: output '" << name << "' differs\n";
        }
      }
      out << "replay: " << compared - mismatches << "/" << compared << " outputs match\n";
      return mismatches == 0 ? kOk : kNumericalFailure;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace lvgg::cli
