// Copyright 2026 The gap-forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Command-line front end. All randomized commands take their seed from the
// config file so a config fully reproduces a run; `gradcheck` is the one
// exception (it verifies the library itself, not an experiment).
//
// Exit codes: 0 success, 1 usage error, 2 invalid input, 3 solver or
// trainer failed to converge, 4 internal consistency check failed.

#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "gapforge/adversary.hpp"
#include "gapforge/io.hpp"
#include "gapforge/probability.hpp"
#include "gapforge/solver.hpp"
#include "gapforge/trainer.hpp"
#include "gapforge/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitNoConverge = 3;
constexpr int kExitInternal = 4;

void emit(const std::string& key, const std::string& value) {
  std::cout << key << "=" << value << "\n";
}

void emit(const std::string& key, double value) {
  emit(key, gapforge::format_number(value));
}

gapforge::LossFunction parse_loss(const std::string& name) {
  if (name == "zero_one") return gapforge::LossFunction::kZeroOne;
  if (name == "log") return gapforge::LossFunction::kLog;
  throw gapforge::Error("loss must be 'zero_one' or 'log', got '" + name + "'");
}

// "START:END:STEP" (END inclusive up to rounding) or a single number.
std::vector<double> parse_budgets(const std::string& text) {
  const std::size_t c1 = text.find(':');
  if (c1 == std::string::npos) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0')
      throw gapforge::Error("bad budget '" + text + "'");
    return {v};
  }
  const std::size_t c2 = text.find(':', c1 + 1);
  if (c2 == std::string::npos)
    throw gapforge::Error("budgets must be START:END:STEP, got '" + text + "'");
  auto num = [&](const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
      throw gapforge::Error("bad number '" + s + "' in budgets");
    return v;
  };
  const double start = num(text.substr(0, c1));
  const double stop = num(text.substr(c1 + 1, c2 - c1 - 1));
  const double step = num(text.substr(c2 + 1));
  if (step <= 0.0 || stop < start)
    throw gapforge::Error("budgets require END >= START and STEP > 0");
  std::vector<double> out;
  for (double v = start; v <= stop + 1e-12; v += step)
    out.push_back(std::min(v, stop));
  return out;
}

// Parallelism cap from the environment, applied on top of --parallel.
int effective_parallelism(int requested) {
  if (requested < 1) requested = 1;
  if (const char* env = std::getenv("GAP_FORGE_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1 && cap < requested) requested = cap;
  }
  return requested;
}

struct CommonSolveArgs {
  std::string joint_path;
  std::string config_path;
};

gapforge::SolverConfig load_solver_config(const std::string& path,
                                          nlohmann::json* raw = nullptr) {
  const auto doc = gapforge::load_json_file(path);
  if (raw) *raw = doc;
  return gapforge::solver_config_from_json(doc, path);
}

int run_solve(const CommonSolveArgs& args, const std::string& loss_name,
              const std::string& out_path, const std::string& strategy_path) {
  const auto joint = gapforge::load_joint_csv(args.joint_path);
  const auto cfg = load_solver_config(args.config_path);
  const auto loss = parse_loss(loss_name);
  const auto d = gapforge::DistortionMeasure::hamming();
  const auto solution = loss == gapforge::LossFunction::kZeroOne
                            ? gapforge::solve_map_gap(joint, d, cfg)
                            : gapforge::solve_mi_gap(joint, d, cfg);
  emit("leakage", solution.leakage);
  emit("achieved_distortion", solution.achieved_distortion);
  emit("iterations", static_cast<double>(solution.iterations));
  emit("converged", solution.converged ? "1" : "0");
  if (!out_path.empty())
    gapforge::save_mechanism_json(out_path, solution.mechanism, cfg.seed);
  if (!strategy_path.empty()) {
    const auto out_joint = gapforge::push_through(joint, solution.mechanism);
    const auto strategy = loss == gapforge::LossFunction::kZeroOne
                              ? gapforge::map_rule(out_joint)
                              : gapforge::posterior_rule(out_joint);
    gapforge::save_strategy_json(strategy_path, strategy,
                                 solution.mechanism.xhat_alphabet(),
                                 joint.y_alphabet(), cfg.seed);
  }
  return solution.converged ? kExitOk : kExitNoConverge;
}

int run_curve(const CommonSolveArgs& args, const std::string& budgets_text,
              const std::string& out_path, int parallel) {
  const auto joint = gapforge::load_joint_csv(args.joint_path);
  nlohmann::json raw;
  const auto cfg = load_solver_config(args.config_path, &raw);
  std::string budgets_spec = budgets_text;
  if (budgets_spec.empty() && raw.contains("budgets"))
    budgets_spec = raw["budgets"].get<std::string>();
  if (budgets_spec.empty())
    throw gapforge::Error("curve needs --budgets or a 'budgets' config key");
  const auto budgets = parse_budgets(budgets_spec);
  const auto points =
      gapforge::tradeoff_curve(joint, gapforge::DistortionMeasure::hamming(),
                               budgets, cfg, effective_parallelism(parallel));
  gapforge::save_curve_csv(out_path, points, cfg.seed);
  bool all_converged = true;
  for (const auto& p : points) all_converged = all_converged && p.converged;
  emit("points", static_cast<double>(points.size()));
  emit("converged", all_converged ? "1" : "0");
  return all_converged ? kExitOk : kExitNoConverge;
}

int run_oracle(const CommonSolveArgs& args, const std::string& loss_name,
               double grid_opt) {
  const auto joint = gapforge::load_joint_csv(args.joint_path);
  nlohmann::json raw;
  const auto cfg = load_solver_config(args.config_path, &raw);
  double grid = grid_opt;
  if (grid <= 0.0 && raw.contains("grid")) grid = raw["grid"].get<double>();
  if (grid <= 0.0 || grid > 1.0)
    throw gapforge::Error("oracle needs a grid in (0, 1] via --grid or config");
  const auto result = gapforge::brute_force_oracle(
      joint, gapforge::DistortionMeasure::hamming(), cfg.budget, grid,
      parse_loss(loss_name));
  emit("leakage", result.solution.leakage);
  emit("achieved_distortion", result.solution.achieved_distortion);
  emit("resolution_bound", result.resolution_bound);
  return kExitOk;
}

int run_sample(const std::string& joint_path, const std::string& config_path,
               const std::string& out_path) {
  const auto joint = gapforge::load_joint_csv(joint_path);
  const auto doc = gapforge::load_json_file(config_path);
  gapforge::detail::require_keys(doc, {"n", "seed"}, config_path);
  if (!doc.contains("n") || !doc.contains("seed"))
    throw gapforge::Error(config_path + ": sample config needs 'n' and 'seed'");
  const auto n = doc["n"].get<std::size_t>();
  const auto seed = doc["seed"].get<std::uint64_t>();
  const auto data = gapforge::sample_dataset(joint, n, seed);
  gapforge::save_dataset_csv(out_path, data, seed);
  emit("n", static_cast<double>(data.n()));
  return kExitOk;
}

int run_train(const std::string& data_path, const std::string& config_path,
              const std::string& out_path, const std::string& history_path) {
  const auto doc = gapforge::load_json_file(config_path);
  const auto cfg = gapforge::training_config_from_json(doc, config_path);
  const auto arch = gapforge::arch_from_json(doc, config_path);
  const auto data = gapforge::load_dataset_csv(data_path);
  const auto model = gapforge::train(data, arch, cfg);
  if (!out_path.empty()) gapforge::save_model_json(out_path, model);
  if (!history_path.empty())
    gapforge::save_history_csv(history_path, model.history, cfg.seed);
  const auto& last = model.history.back();
  emit("rounds", static_cast<double>(model.history.size()));
  emit("final_adv_loss_bits", last.adv_loss_bits);
  emit("final_distortion", last.distortion);
  emit("final_penalty", last.penalty);
  return kExitOk;
}

int run_eval(const std::string& model_path, const std::string& data_path,
             const std::string& mechanism_out, std::size_t samples_per_cell) {
  const auto model = gapforge::load_model_json(model_path);
  const auto data = gapforge::load_dataset_csv(
      data_path, &model.privatizer.x_alphabet, &model.privatizer.y_alphabet);
  const auto ev =
      gapforge::evaluate_fresh_adversary(model.privatizer, data, model.config);
  emit("accuracy", ev.accuracy);
  emit("distortion", ev.distortion);
  if (!mechanism_out.empty()) {
    const auto mech = gapforge::empirical_mechanism(
        model.privatizer, samples_per_cell, model.config.seed);
    gapforge::save_mechanism_json(mechanism_out, mech, model.config.seed);
  }
  return kExitOk;
}

// Verifies the analytic solver gradient against central finite differences
// on randomized instances. --corrupt injects a deliberate error so the
// check's own failure path can be exercised.
int run_gradcheck(std::uint64_t seed, int points, bool corrupt) {
  gapforge::CounterRng rng(seed);
  double max_rel = 0.0;
  const double h = 1e-6;
  for (int trial = 0; trial < points; ++trial) {
    const std::size_t nx = 2 + rng.below(3);
    const std::size_t ny = 2 + rng.below(3);
    const gapforge::Alphabet ax = gapforge::Alphabet::indexed(nx, "x");
    const gapforge::Alphabet ay = gapforge::Alphabet::indexed(ny, "y");

    // Random joint and a random interior channel point.
    std::vector<std::vector<double>> table(nx, std::vector<double>(ny));
    double total = 0.0;
    for (auto& row : table)
      for (auto& v : row) {
        v = rng.uniform() + 0.05;
        total += v;
      }
    for (auto& row : table)
      for (auto& v : row) v /= total;
    const gapforge::JointDistribution joint(ax, ay, table);
    const gapforge::detail::Problem prob(
        joint, gapforge::DistortionMeasure::hamming(), ax, 0.0);

    std::vector<double> q(nx * ny * nx);
    for (std::size_t row = 0; row < nx * ny; ++row) {
      double s = 0.0;
      for (std::size_t k = 0; k < nx; ++k) {
        q[row * nx + k] = rng.uniform() + 0.05;
        s += q[row * nx + k];
      }
      for (std::size_t k = 0; k < nx; ++k) q[row * nx + k] /= s;
    }

    auto analytic = gapforge::detail::mi_gradient_raw(prob, q);
    if (corrupt)
      for (auto& g : analytic) g *= 1.01;
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double saved = q[i];
      q[i] = saved + h;
      const double up = gapforge::detail::mi_objective_raw(prob, q);
      q[i] = saved - h;
      const double down = gapforge::detail::mi_objective_raw(prob, q);
      q[i] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double rel = std::abs(fd - analytic[i]) /
                         std::max({1.0, std::abs(fd), std::abs(analytic[i])});
      max_rel = std::max(max_rel, rel);
    }
  }
  const bool pass = max_rel < 1e-5;
  emit("points", static_cast<double>(points));
  emit("max_rel_err", max_rel);
  emit("pass", pass ? "1" : "0");
  return pass ? kExitOk : kExitInternal;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gap-forge: exact and data-driven privacy-utility trade-offs "
               "on finite alphabets"};
  app.set_version_flag("--version", std::string("gap-forge v") + gapforge::kVersion);
  app.require_subcommand(1);

  // solve
  auto* solve = app.add_subcommand(
      "solve", "Compute an optimal privatization mechanism for one budget");
  CommonSolveArgs solve_args;
  std::string solve_loss, solve_out, solve_strategy;
  solve->add_option("--joint", solve_args.joint_path, "Joint CSV (x,y,p)")
      ->required();
  solve->add_option("--config", solve_args.config_path, "Solver config JSON")
      ->required();
  solve->add_option("--loss", solve_loss, "Adversary loss: zero_one or log")
      ->required();
  solve->add_option("--out", solve_out, "Mechanism JSON output path");
  solve->add_option("--strategy", solve_strategy,
                    "Optimal adversary strategy JSON output path");

  // curve
  auto* curve = app.add_subcommand(
      "curve", "Sweep budgets and write the privacy-utility trade-off CSV");
  CommonSolveArgs curve_args;
  std::string curve_budgets, curve_out;
  int curve_parallel = 1;
  curve->add_option("--joint", curve_args.joint_path, "Joint CSV")->required();
  curve->add_option("--config", curve_args.config_path, "Solver config JSON")
      ->required();
  curve->add_option("--budgets", curve_budgets,
                    "START:END:STEP (inclusive) or a single value");
  curve->add_option("--out", curve_out, "Curve CSV output path")->required();
  curve->add_option("--parallel", curve_parallel,
                    "Worker threads (capped by GAP_FORGE_THREADS)");

  // oracle
  auto* oracle = app.add_subcommand(
      "oracle", "Brute-force grid search over mechanisms (small instances)");
  CommonSolveArgs oracle_args;
  std::string oracle_loss;
  double oracle_grid = 0.0;
  oracle->add_option("--joint", oracle_args.joint_path, "Joint CSV")->required();
  oracle->add_option("--config", oracle_args.config_path, "Config JSON")
      ->required();
  oracle->add_option("--loss", oracle_loss, "zero_one or log")->required();
  oracle->add_option("--grid", oracle_grid, "Per-row probability grid spacing");

  // sample
  auto* sample = app.add_subcommand(
      "sample", "Draw an i.i.d. dataset from a joint distribution");
  std::string sample_joint, sample_config, sample_out;
  sample->add_option("--joint", sample_joint, "Joint CSV")->required();
  sample->add_option("--config", sample_config, "JSON with 'n' and 'seed'")
      ->required();
  sample->add_option("--out", sample_out, "Dataset CSV output path")->required();

  // train
  auto* train_cmd = app.add_subcommand(
      "train", "Adversarially train a privatizer network on a dataset");
  std::string train_data, train_config, train_out, train_history;
  train_cmd->add_option("--data", train_data, "Dataset CSV (x,y)")->required();
  train_cmd->add_option("--config", train_config, "Training config JSON")
      ->required();
  train_cmd->add_option("--out", train_out, "Model JSON output path");
  train_cmd->add_option("--history", train_history, "History CSV output path");

  // eval
  auto* eval_cmd = app.add_subcommand(
      "eval", "Evaluate a trained privatizer against a fresh adversary");
  std::string eval_model, eval_data, eval_mech_out;
  std::size_t eval_samples = 2000;
  eval_cmd->add_option("--model", eval_model, "Model JSON")->required();
  eval_cmd->add_option("--data", eval_data, "Dataset CSV")->required();
  eval_cmd->add_option("--mechanism-out", eval_mech_out,
                       "Write the empirical channel as mechanism JSON");
  eval_cmd->add_option("--samples-per-cell", eval_samples,
                       "Monte-Carlo draws per (x,y) cell");

  // gradcheck
  auto* gradcheck = app.add_subcommand(
      "gradcheck", "Verify analytic solver gradients by finite differences");
  std::uint64_t gc_seed = 0;
  int gc_points = 120;
  bool gc_corrupt = false;
  gradcheck->add_option("--seed", gc_seed, "Seed for the random instances")
      ->required();
  gradcheck->add_option("--points", gc_points, "Number of random instances");
  gradcheck
      ->add_flag("--corrupt", gc_corrupt,
                 "Deliberately corrupt the analytic gradient (negative control)")
      ->group("");  // hidden

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*solve) return run_solve(solve_args, solve_loss, solve_out, solve_strategy);
    if (*curve) return run_curve(curve_args, curve_budgets, curve_out, curve_parallel);
    if (*oracle) return run_oracle(oracle_args, oracle_loss, oracle_grid);
    if (*sample) return run_sample(sample_joint, sample_config, sample_out);
    if (*train_cmd) return run_train(train_data, train_config, train_out, train_history);
    if (*eval_cmd) return run_eval(eval_model, eval_data, eval_mech_out, eval_samples);
    if (*gradcheck) return run_gradcheck(gc_seed, gc_points, gc_corrupt);
  } catch (const gapforge::NonFiniteLoss& e) {
    std::cerr << "error: " << e.what() << " (round " << e.round() << ")\n";
    return kExitNoConverge;
  } catch (const gapforge::FileFormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const gapforge::TooLarge& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const gapforge::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
