#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gtg/config.hpp"
#include "gtg/pipeline.hpp"
#include "gtg/stats.hpp"

namespace fs = std::filesystem;
using namespace gtg;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::int64_t> seed;
  bool verbose = false;
  bool force = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_out = true) {
  cmd->add_option("--config", args.config_path, "experiment config file")->required();
  auto* out = cmd->add_option("--out", args.out_dir, "run directory");
  if (needs_out) out->required();
  cmd->add_option("--seed", args.seed, "override the config seed list with one seed");
  cmd->add_flag("--verbose", args.verbose, "chatty progress output");
  cmd->add_flag("--force", args.force, "overwrite existing artifacts");
}

// Seed precedence: --seed flag, then GTG_SEED, then the config list.
ExperimentConfig load_config(const CommonArgs& args) {
  ExperimentConfig cfg = parse_config(args.config_path);
  if (args.seed) {
    cfg.seeds = {static_cast<std::uint64_t>(*args.seed)};
  } else if (const char* env = std::getenv("GTG_SEED")) {
    try {
      cfg.seeds = {static_cast<std::uint64_t>(std::stoll(env))};
    } catch (const std::exception&) {
      throw ConfigError("config: GTG_SEED must be an integer, got '" + std::string(env) + "'");
    }
  }
  validate(cfg);
  return cfg;
}

void require_writable(const fs::path& artifact, bool force) {
  if (fs::exists(artifact) && !force)
    throw ConfigError("output " + artifact.string() + " already exists; pass --force to overwrite");
}

fs::path seed_dir(const CommonArgs& args, std::uint64_t seed) {
  return fs::path(args.out_dir) / ("seed_" + std::to_string(seed));
}

void note(const CommonArgs& args, const std::string& msg) {
  if (args.verbose) std::cout << msg << "\n";
}

int run_guarded(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << nlohmann::json{{"error", e.what()}, {"kind", "config"}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", e.what()}, {"kind", "runtime"}}.dump() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"guided trajectory generation for offline model-based optimization"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string axis;
  std::string values_csv;

  auto* gen = app.add_subcommand("gen-data", "generate the task dataset per seed");
  add_common(gen, args);
  auto* trajs = app.add_subcommand("build-trajs", "construct the trajectory dataset per seed");
  add_common(trajs, args);
  auto* train_cmd = app.add_subcommand("train", "train the denoiser and the proxy per seed");
  add_common(train_cmd, args);
  auto* sample_cmd = app.add_subcommand("sample", "sample guided trajectories per seed");
  add_common(sample_cmd, args);
  auto* select_cmd = app.add_subcommand("select", "harvest designs and filter the top-Q per seed");
  add_common(select_cmd, args);
  auto* eval_cmd = app.add_subcommand("evaluate", "evaluate candidates with the oracle per seed");
  add_common(eval_cmd, args);
  auto* run_cmd = app.add_subcommand("run", "full pipeline over all seeds plus aggregation");
  add_common(run_cmd, args);
  auto* ablate_cmd = app.add_subcommand("ablate", "sweep one hyperparameter axis");
  add_common(ablate_cmd, args);
  ablate_cmd->add_option("--axis", axis, "one of H|C|alpha|K|epsilon|Q")->required();
  ablate_cmd->add_option("--values", values_csv, "comma-separated values")->required();
  auto* stats_cmd = app.add_subcommand("stats", "emit plot-ready CSV/JSON from run artifacts");
  add_common(stats_cmd, args);

  CLI11_PARSE(app, argc, argv);

  return run_guarded([&] {
    const ExperimentConfig cfg = load_config(args);

    if (gen->parsed()) {
      for (const auto s : cfg.seeds) {
        require_writable(seed_dir(args, s) / "dataset.json", args.force);
        stage_dataset(cfg, s, seed_dir(args, s));
        note(args, "wrote " + (seed_dir(args, s) / "dataset.json").string());
      }
    } else if (trajs->parsed()) {
      for (const auto s : cfg.seeds) {
        require_writable(seed_dir(args, s) / "trajs.json", args.force);
        stage_trajectories(cfg, s, seed_dir(args, s));
        note(args, "wrote " + (seed_dir(args, s) / "trajs.json").string());
      }
    } else if (train_cmd->parsed()) {
      for (const auto s : cfg.seeds) {
        require_writable(seed_dir(args, s) / "denoiser.ckpt", args.force);
        stage_train(cfg, s, seed_dir(args, s));
        note(args, "wrote " + (seed_dir(args, s) / "denoiser.ckpt").string());
      }
    } else if (sample_cmd->parsed()) {
      for (const auto s : cfg.seeds) {
        require_writable(seed_dir(args, s) / "samples.json", args.force);
        stage_sample(cfg, s, seed_dir(args, s));
        note(args, "wrote " + (seed_dir(args, s) / "samples.json").string());
      }
    } else if (select_cmd->parsed()) {
      for (const auto s : cfg.seeds) {
        require_writable(seed_dir(args, s) / "candidates.json", args.force);
        stage_select(cfg, seed_dir(args, s));
        note(args, "wrote " + (seed_dir(args, s) / "candidates.json").string());
      }
    } else if (eval_cmd->parsed()) {
      RunResult result;
      for (const auto s : cfg.seeds) {
        RunRecord rec;
        rec.seed = s;
        rec.config_hash = config_hash(cfg);
        rec.report = stage_evaluate(cfg, seed_dir(args, s));
        result.records.push_back(std::move(rec));
      }
      std::vector<double> raw, norm;
      for (const auto& r : result.records) {
        raw.push_back(r.report.best_raw);
        norm.push_back(r.report.best_normalized);
      }
      result.aggregate = {mean(raw), stddev(raw), mean(norm), stddev(norm),
                          static_cast<int>(result.records.size())};
      // Match run's top-level outputs so staged execution resumes cleanly.
      fs::create_directories(args.out_dir);
      nlohmann::ordered_json cj = config_json(cfg);
      std::ofstream(fs::path(args.out_dir) / "config.json") << cj.dump(1) << "\n";
      write_aggregate_report(cfg, args.out_dir, result);
      std::cout << "best: " << result.aggregate.mean_best_raw << " ± "
                << result.aggregate.std_best_raw << "\n";
    } else if (run_cmd->parsed()) {
      require_writable(fs::path(args.out_dir) / "report.json", args.force);
      const RunResult result = run_experiment(cfg, args.out_dir);
      for (const auto& [s, err] : result.failed_seeds)
        std::cerr << "warning: seed " << s << " failed: " << err << "\n";
      std::cout << "best: " << result.aggregate.mean_best_raw << " ± "
                << result.aggregate.std_best_raw << "\n";
    } else if (ablate_cmd->parsed()) {
      require_writable(fs::path(args.out_dir) / "ablate.csv", args.force);
      std::vector<double> values;
      std::stringstream ss(values_csv);
      std::string item;
      while (std::getline(ss, item, ',')) values.push_back(std::stod(item));
      const auto rows = ablate(cfg, axis, values, args.out_dir);
      for (const auto& r : rows)
        std::cout << axis << "=" << r.value << ": " << r.mean << " ± " << r.stddev << "\n";
    } else if (stats_cmd->parsed()) {
      emit_stats(cfg, args.out_dir);
      note(args, "stats written under " + args.out_dir);
    }
  });
}
