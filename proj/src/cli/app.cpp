#include "opirl/cli/app.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>

#include "opirl/agent/opirl.hpp"
#include "opirl/agent/transfer.hpp"
#include "opirl/cli/config.hpp"
#include "opirl/cli/manifest.hpp"
#include "opirl/cli/plot.hpp"
#include "opirl/envs/environment.hpp"
#include "opirl/expert/rollout.hpp"
#include "opirl/expert/sac.hpp"
#include "opirl/numcore/errors.hpp"
#include "opirl/numcore/seeding.hpp"
#include "opirl/oracle/verify.hpp"
#include "opirl/replay/trajectory.hpp"

namespace opirl {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string env_id;
  std::optional<std::string> config_file;
  std::vector<std::string> overrides;
  std::uint64_t seed = 1;
  std::string out_dir;
  std::string demos;
  std::string policy;
  std::string reward;
  std::string output;
  std::string manifest;
  std::string column = "episode-return-mean";
  std::vector<std::string> metrics;
  int episodes = 16;
  bool stochastic = false;
  bool quiet = false;
};

// Writes the manifest before work starts and again with the outcome, whatever it is.
template <typename Work>
void with_manifest(RunManifest& m, const fs::path& path, Work&& work) {
  m.started = utc_timestamp();
  m.write(path);
  try {
    work();
    m.status = "completed";
  } catch (const std::exception& e) {
    m.status = "failed";
    m.error = e.what();
    m.finished = utc_timestamp();
    m.write(path);
    throw;
  }
  m.finished = utc_timestamp();
  m.write(path);
}

RunManifest::Evaluation record_eval(const EvalResult& e, std::uint64_t seed) {
  return {e.mean, e.stddev, e.success_rate, static_cast<int>(e.returns.size()), seed};
}

void print_eval(const std::string& what, const EvalResult& e) {
  std::cout << what << ": return " << e.mean << " +- " << e.stddev << ", success rate " << e.success_rate << " over "
            << e.returns.size() << " episodes\n";
}

RunManifest base_manifest(const std::string& command, const std::vector<std::string>& args, const Options& o) {
  RunManifest m;
  m.command = command;
  m.arguments = args;
  m.seed = o.seed;
  m.env_id = o.env_id;
  if (o.config_file) m.inputs[*o.config_file] = file_digest(*o.config_file);
  return m;
}

std::function<void(std::int64_t, const EvalResult&)> progress(const Options& o) {
  if (o.quiet) return {};
  return [](std::int64_t step, const EvalResult& e) {
    std::cout << "step " << step << " return " << e.mean << " success " << e.success_rate << std::endl;
  };
}

int cmd_train_expert(const Options& o, const std::vector<std::string>& args) {
  const RunConfig rc = load_config(o.config_file, o.overrides);
  auto env = make_env(o.env_id);
  fs::create_directories(o.out_dir);
  const fs::path dir(o.out_dir);
  RunManifest m = base_manifest("train-expert", args, o);
  for (const auto& [k, v] : describe_config(rc)) {
    if (k.rfind("expert.", 0) == 0) m.config[k] = v;
  }
  m.outputs = {{"metrics", (dir / "metrics.csv").string()}, {"policy", (dir / "policy.ckpt").string()}};
  with_manifest(m, dir / "manifest.json", [&] {
    SacHooks hooks;
    hooks.on_eval = progress(o);
    const SacRun run = train_sac(*env, rc.expert, o.seed, hooks);
    write_csv(dir / "metrics.csv", run.metrics);
    save_policy(dir / "policy.ckpt", run.policy, hooks.pipeline, {{"env-id", o.env_id}});
    m.final_eval = record_eval(run.final_eval, derive_seed(o.seed, "sac-eval"));
    print_eval("expert", run.final_eval);
  });
  return kExitOk;
}

int cmd_collect(const Options& o, const std::vector<std::string>& args) {
  ObservationPipeline pipeline;
  std::map<std::string, std::string> meta;
  const SquashedGaussianPolicy policy = load_policy(o.policy, &pipeline, &meta);
  Options opts = o;
  if (opts.env_id.empty()) opts.env_id = meta.count("env-id") ? meta.at("env-id") : "";
  if (opts.env_id.empty()) throw ConfigError("collect: --env is required when the checkpoint names no environment");
  auto env = make_env(opts.env_id);
  RunManifest m = base_manifest("collect", args, opts);
  m.inputs[o.policy] = file_digest(o.policy);
  m.config = {{"episodes", std::to_string(o.episodes)}, {"stochastic", o.stochastic ? "true" : "false"}};
  m.outputs = {{"demonstrations", o.output}};
  with_manifest(m, o.output + ".manifest.json", [&] {
    const TrajectorySet set = collect_trajectories(*env, policy, o.episodes, o.seed, !o.stochastic);
    save_trajectories(o.output, set);
    double total = 0.0;
    for (const auto& ep : set.episodes) total += ep.total_return();
    std::cout << "collected " << set.episodes.size() << " episodes, mean return "
              << total / static_cast<double>(set.episodes.size()) << "\n";
  });
  return kExitOk;
}

int cmd_train_opirl(const Options& o, const std::vector<std::string>& args) {
  const RunConfig rc = load_config(o.config_file, o.overrides);
  auto env = make_env(o.env_id);
  const TrajectorySet demos = load_trajectories(o.demos);
  fs::create_directories(o.out_dir);
  const fs::path dir(o.out_dir);
  RunManifest m = base_manifest("train-opirl", args, o);
  m.inputs[o.demos] = file_digest(o.demos);
  for (const auto& [k, v] : describe_config(rc)) {
    if (k.rfind("agent.", 0) == 0) m.config[k] = v;
  }
  m.outputs = {{"metrics", (dir / "metrics.csv").string()},
               {"policy", (dir / "policy.ckpt").string()},
               {"reward", (dir / "reward.ckpt").string()}};
  with_manifest(m, dir / "manifest.json", [&] {
    OpirlHooks hooks;
    hooks.on_eval = progress(o);
    const OpirlRun run = train_opirl(*env, demos, rc.agent, o.seed, hooks);
    write_csv(dir / "metrics.csv", run.metrics);
    save_policy(dir / "policy.ckpt", run.policy, run.pipeline, {{"env-id", o.env_id}});
    run.reward.save(dir / "reward.ckpt");
    m.final_eval = record_eval(run.final_eval, derive_seed(o.seed, "opirl-eval"));
    m.config["steps-run"] = std::to_string(run.steps_run);
    print_eval("opirl", run.final_eval);
  });
  return kExitOk;
}

int cmd_transfer(const Options& o, const std::vector<std::string>& args) {
  const RunConfig rc = load_config(o.config_file, o.overrides);
  const RewardHandle reward = RewardHandle::load(o.reward);
  auto env = make_env(o.env_id);
  fs::create_directories(o.out_dir);
  const fs::path dir(o.out_dir);
  RunManifest m = base_manifest("transfer", args, o);
  m.inputs[o.reward] = file_digest(o.reward);
  for (const auto& [k, v] : describe_config(rc)) {
    if (k.rfind("expert.", 0) == 0) m.config[k] = v;
  }
  m.config["reward-env-id"] = reward.env_id();
  m.outputs = {{"metrics", (dir / "metrics.csv").string()}, {"policy", (dir / "policy.ckpt").string()}};
  with_manifest(m, dir / "manifest.json", [&] {
    SacHooks hooks;
    hooks.on_eval = progress(o);
    const SacRun run = transfer_reward(reward, *env, rc.expert, o.seed, hooks);
    write_csv(dir / "metrics.csv", run.metrics);
    save_policy(dir / "policy.ckpt", run.policy, reward.pipeline(), {{"env-id", o.env_id}});
    m.final_eval = record_eval(run.final_eval, derive_seed(o.seed, "sac-eval"));
    print_eval("transfer", run.final_eval);
  });
  return kExitOk;
}

int cmd_eval(const Options& o) {
  std::string policy_path = o.policy;
  std::string env_id = o.env_id;
  int episodes = o.episodes;
  std::uint64_t seed = o.seed;
  std::optional<RunManifest> recorded;
  if (!o.manifest.empty()) {
    recorded = RunManifest::read(o.manifest);
    if (!recorded->final_eval) throw SchemaError("manifest " + o.manifest + " records no evaluation");
    if (policy_path.empty()) {
      const auto it = recorded->outputs.find("policy");
      if (it == recorded->outputs.end()) throw SchemaError("manifest " + o.manifest + " names no policy");
      policy_path = it->second;
    }
    if (env_id.empty()) env_id = recorded->env_id;
    episodes = recorded->final_eval->episodes;
    seed = recorded->final_eval->seed;
  }
  if (policy_path.empty()) throw ConfigError("eval: --policy or --manifest is required");
  ObservationPipeline pipeline;
  std::map<std::string, std::string> meta;
  const SquashedGaussianPolicy policy = load_policy(policy_path, &pipeline, &meta);
  if (env_id.empty() && meta.count("env-id")) env_id = meta.at("env-id");
  if (env_id.empty()) throw ConfigError("eval: --env is required when the checkpoint names no environment");
  auto env = make_env(env_id);
  const EvalResult e = evaluate_policy_transfer(policy, pipeline, *env, episodes, seed);
  print_eval("eval on " + env_id, e);
  if (recorded) {
    const double want = recorded->final_eval->mean;
    const bool same = e.mean == want && e.success_rate == recorded->final_eval->success_rate;
    std::cout << "recorded return " << want << (same ? " reproduced exactly" : " NOT reproduced") << "\n";
    if (!same) return kExitFailure;
  }
  return kExitOk;
}

int cmd_verify(const Options& o) {
  const std::vector<VerificationReport> reports = verify_all(o.seed);
  print_report_table(std::cout, reports);
  const std::string path = o.output.empty() ? "verify_report.json" : o.output;
  write_report_json(path, reports);
  bool ok = true;
  for (const auto& r : reports) ok = ok && r.passed;
  std::cout << (ok ? "all checks passed" : "verification FAILED") << "; report written to " << path << "\n";
  return ok ? kExitOk : kExitFailure;
}

int cmd_plot(const Options& o, const std::vector<std::string>& args) {
  std::vector<fs::path> files(o.metrics.begin(), o.metrics.end());
  RunManifest m = base_manifest("plot", args, o);
  m.config = {{"column", o.column}};
  for (const auto& f : o.metrics) m.inputs[f] = file_digest(f);
  m.outputs = {{"chart", o.output}};
  with_manifest(m, o.output + ".manifest.json", [&] {
    const std::string svg = render_svg(chart_from_csv(files, o.column));
    std::ofstream out(o.output);
    if (!out) throw std::runtime_error("cannot open " + o.output + " for writing");
    out << svg;
  });
  std::cout << "wrote " << o.output << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Off-policy inverse reinforcement learning: experts, demonstrations, reward learning and transfer"};
  app.require_subcommand(1);
  Options o;

  auto add_config = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config_file, "Configuration file with [agent] and [expert] sections")
        ->check(CLI::ExistingFile);
    sub->add_option("--set", o.overrides, "Override a configuration value, e.g. --set agent.gamma=0.95")
        ->take_all();
  };
  auto add_seed = [&o](CLI::App* sub) { sub->add_option("--seed", o.seed, "Global seed")->capture_default_str(); };
  auto add_quiet = [&o](CLI::App* sub) { sub->add_flag("--quiet", o.quiet, "Suppress progress lines"); };

  auto* train_expert = app.add_subcommand("train-expert", "Train a SAC expert on an environment");
  train_expert->add_option("--env", o.env_id, "Environment id")->required();
  train_expert->add_option("--out-dir", o.out_dir, "Directory for policy, metrics and manifest")->required();
  add_config(train_expert);
  add_seed(train_expert);
  add_quiet(train_expert);

  auto* collect = app.add_subcommand("collect", "Roll out a policy checkpoint into a demonstration file");
  collect->add_option("--policy", o.policy, "Policy checkpoint")->required()->check(CLI::ExistingFile);
  collect->add_option("--env", o.env_id, "Environment id (defaults to the checkpoint's)");
  collect->add_option("--episodes", o.episodes, "Number of episodes")->capture_default_str()->check(CLI::PositiveNumber);
  collect->add_option("--out", o.output, "Demonstration file (JSON lines)")->required();
  collect->add_flag("--stochastic", o.stochastic, "Sample actions instead of using the policy mean");
  add_seed(collect);

  auto* train_opirl_cmd = app.add_subcommand("train-opirl", "Learn a reward and a policy from demonstrations");
  train_opirl_cmd->add_option("--env", o.env_id, "Environment id")->required();
  train_opirl_cmd->add_option("--demos", o.demos, "Demonstration file")->required()->check(CLI::ExistingFile);
  train_opirl_cmd->add_option("--out-dir", o.out_dir, "Directory for checkpoints, metrics and manifest")->required();
  add_config(train_opirl_cmd);
  add_seed(train_opirl_cmd);
  add_quiet(train_opirl_cmd);

  auto* transfer = app.add_subcommand("transfer", "Train a fresh policy on another environment with a learned reward");
  transfer->add_option("--reward", o.reward, "Reward checkpoint")->required()->check(CLI::ExistingFile);
  transfer->add_option("--env", o.env_id, "Target environment id")->required();
  transfer->add_option("--out-dir", o.out_dir, "Directory for policy, metrics and manifest")->required();
  add_config(transfer);
  add_seed(transfer);
  add_quiet(transfer);

  auto* eval = app.add_subcommand("eval", "Evaluate a policy checkpoint on ground-truth reward");
  eval->add_option("--policy", o.policy, "Policy checkpoint")->check(CLI::ExistingFile);
  eval->add_option("--env", o.env_id, "Environment id (defaults to the checkpoint's)");
  eval->add_option("--episodes", o.episodes, "Number of episodes")->capture_default_str()->check(CLI::PositiveNumber);
  eval->add_option("--manifest", o.manifest,
                   "Run manifest; re-runs its recorded evaluation and fails unless the return is reproduced")
      ->check(CLI::ExistingFile);
  add_seed(eval);

  auto* verify = app.add_subcommand("verify", "Run the exact identity checks on tabular instances");
  verify->add_option("--report", o.output, "Machine-readable report (default verify_report.json)");
  add_seed(verify);

  auto* plot = app.add_subcommand("plot", "Draw learning curves from metrics CSV files as an SVG line chart");
  plot->add_option("--metrics", o.metrics, "Metrics CSV files, one line each")->required()->check(CLI::ExistingFile);
  plot->add_option("--column", o.column, "Column to plot against step")->capture_default_str();
  plot->add_option("--out", o.output, "SVG file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const std::vector<std::string> args(argv + 1, argv + argc);
  try {
    if (*train_expert) return cmd_train_expert(o, args);
    if (*collect) return cmd_collect(o, args);
    if (*train_opirl_cmd) return cmd_train_opirl(o, args);
    if (*transfer) return cmd_transfer(o, args);
    if (*eval) return cmd_eval(o);
    if (*verify) return cmd_verify(o);
    if (*plot) return cmd_plot(o, args);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace opirl
