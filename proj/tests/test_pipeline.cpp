#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gtg/pipeline.hpp"
#include "gtg/proxy.hpp"

using namespace gtg;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "gtg_pipeline_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small but complete Branin setup: fast enough for unit tests, still runs
// every stage.
ExperimentConfig tiny_branin() {
  ExperimentConfig c;
  c.task = "branin";
  c.gen_n_samples = 300;
  c.gen_trim = 0.10;
  c.construction = {.p = 20.0, .H = 8, .n_traj = 40, .K = 5, .epsilon = 0.05};
  c.diffusion_T = 25;
  c.omega = 1.2;
  c.denoiser_hidden = 32;
  c.denoiser_blocks = 2;
  c.denoiser_time_embed_dim = 16;
  c.denoiser_train = {.batch_size = 16, .learning_rate = 1e-3, .train_steps = 300,
                      .dropout_p = 0.25, .seed = 0, .ema_decay = 0.0};
  c.proxy_hidden = 32;
  c.proxy_layers = 2;
  c.proxy_train = {.batch_size = 32, .learning_rate = 1e-3, .train_steps = 300,
                   .dropout_p = 0.0, .seed = 0, .ema_decay = 0.0};
  c.n_sample_trajectories = 4;
  c.context_length = 4;
  c.alpha = 0.8;
  c.target_mode = TargetMode::known;
  c.q_budget = 8;
  c.seeds = {0};
  return c;
}

}  // namespace

TEST_CASE("estimate_target in both modes") {
  const auto ds = make_branin_dataset(200, 0.10, 1);
  CHECK(estimate_target(ds, TargetMode::gamma_max, 1.0, std::nullopt) == doctest::Approx(1.0));
  CHECK(estimate_target(ds, TargetMode::gamma_max, 1.5, std::nullopt) == doctest::Approx(1.5));
  CHECK(estimate_target(ds, TargetMode::gamma_max, 2.0, std::nullopt) == doctest::Approx(2.0));
  const double known = estimate_target(ds, TargetMode::known, 1.0, -0.398);
  CHECK(known == doctest::Approx(ds.normalize_score(-0.398)));
  CHECK(known > 1.0);  // optimum sits above the trimmed dataset
  CHECK_THROWS_AS(estimate_target(ds, TargetMode::known, 1.0, std::nullopt),
                  std::invalid_argument);
  CHECK_THROWS_AS(estimate_target(ds, TargetMode::gamma_max, 0.0, std::nullopt),
                  std::invalid_argument);
}

TEST_CASE("config validation rejects inconsistent sampling budgets") {
  auto c = tiny_branin();
  c.q_budget = 4 * (8 - 4);  // exactly the harvest: fine
  validate(c);
  c.q_budget += 1;
  CHECK_THROWS_AS(validate(c), ConfigError);

  c = tiny_branin();
  c.context_length = c.construction.H;
  CHECK_THROWS_AS(validate(c), ConfigError);

  c = tiny_branin();
  c.task = "nonsense";
  CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("config parsing: defaults, overrides, unknown keys, hashing") {
  const std::string text = R"(
version = 1
task = "branin"
gen.n_samples = 300          # inline comment
construction.H = 8
sampling.context_length = 4
sampling.n_trajectories = 4
selection.q = 16
seeds = [0, 1]
)";
  const auto cfg = parse_config_text(text);
  CHECK(cfg.gen_n_samples == 300);
  CHECK(cfg.construction.H == 8);
  CHECK(cfg.construction.p == 20.0);  // default
  CHECK(cfg.omega == 1.2);            // default
  CHECK(cfg.seeds == std::vector<std::uint64_t>{0, 1});

  CHECK_THROWS_WITH_AS(parse_config_text(text + "bogus.key = 3\n"),
                       doctest::Contains("unknown key"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("version = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("version = 1\nversion = 1\n"), ConfigError);

  CHECK_FALSE(cfg.dataset_space.has_value());
  const auto discrete = parse_config_text(text + "dataset.space = \"discrete\"\n");
  CHECK(discrete.dataset_space == SpaceKind::discrete);
  CHECK_THROWS_AS(parse_config_text(text + "dataset.space = \"maybe\"\n"), ConfigError);

  const auto same = parse_config_text(text);
  CHECK(config_hash(cfg) == config_hash(same));
  auto other = cfg;
  other.alpha = 0.2;
  CHECK(config_hash(cfg) != config_hash(other));
}

TEST_CASE("tiny end-to-end run produces coherent artifacts") {
  const auto cfg = tiny_branin();
  const auto dir = fresh_dir("run_a");
  const auto result = run_experiment(cfg, dir);

  REQUIRE(result.records.size() == 1);
  CHECK(result.failed_seeds.empty());
  CHECK(result.aggregate.n_seeds == 1);
  CHECK(result.records[0].report.n_candidates == 8);

  for (const auto* name :
       {"config.json", "report.json", "timings.csv", "seed_0/dataset.json", "seed_0/trajs.json",
        "seed_0/denoiser.ckpt", "seed_0/proxy.ckpt", "seed_0/denoiser_loss.csv",
        "seed_0/proxy_validation.json", "seed_0/samples.json", "seed_0/candidates.json",
        "seed_0/report.json"})
    CHECK(fs::exists(dir / name));

  // provenance: every candidate traces to a generated step past the context
  const auto cands = load_candidates(dir / "seed_0/candidates.json");
  REQUIRE(cands.size() == 8);
  CHECK(cands.evaluated());
  for (const auto& p : cands.provenance) {
    CHECK(p.trajectory >= 0);
    CHECK(p.trajectory < cfg.n_sample_trajectories);
    CHECK(p.step >= cfg.context_length + 1);
    CHECK(p.step <= cfg.construction.H);
  }

  // sampled context positions equal the stored source sub-trajectory
  // bit-for-bit
  const auto tds = load_trajectories(dir / "seed_0/trajs.json");
  std::ifstream in(dir / "seed_0/samples.json");
  nlohmann::json samples;
  in >> samples;
  const auto sources = samples.at("context_sources").get<std::vector<int>>();
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const Trajectory sampled = trajectory_from_json(samples.at("trajectories").at(i));
    const auto& src = tds.trajectories[static_cast<std::size_t>(sources[i])];
    for (int h = 0; h < cfg.context_length; ++h) {
      CHECK(sampled.designs.col(h) == src.designs.col(h));
      CHECK(sampled.raw_scores(h) == src.raw_scores(h));
    }
  }
}

TEST_CASE("inpainting guidance pins the generated score channel to y*") {
  auto cfg = tiny_branin();
  cfg.guidance_mode = GuidanceMode::inpaint_y;
  const auto dir = fresh_dir("inpaint");
  const auto result = run_experiment(cfg, dir);
  CHECK(result.records.size() == 1);

  std::ifstream in(dir / "seed_0/samples.json");
  nlohmann::json samples;
  in >> samples;
  CHECK(samples.at("guidance_mode") == "inpaint_y");
  const double y_star = samples.at("y_star_normalized").get<double>();
  const auto ds = load_dataset(dir / "seed_0/dataset.json", FileFormat::json);
  for (const auto& jt : samples.at("trajectories")) {
    const Trajectory t = trajectory_from_json(jt);
    for (int h = cfg.context_length; h < t.length(); ++h)
      CHECK(t.norm_scores(h) == y_star);
    CHECK(t.designs.allFinite());
  }
}

TEST_CASE("identical configs give bitwise-identical candidates and reports") {
  const auto cfg = tiny_branin();
  const auto a = fresh_dir("det_a");
  const auto b = fresh_dir("det_b");
  run_experiment(cfg, a);
  run_experiment(cfg, b);
  CHECK(slurp(a / "seed_0/candidates.json") == slurp(b / "seed_0/candidates.json"));
  CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
}

TEST_CASE("staged execution resumes to the same final artifacts") {
  const auto cfg = tiny_branin();
  const auto mono = fresh_dir("mono");
  run_experiment(cfg, mono);

  const auto staged = fresh_dir("staged");
  const auto seed_dir = staged / "seed_0";
  stage_dataset(cfg, 0, seed_dir);
  stage_trajectories(cfg, 0, seed_dir);
  stage_train(cfg, 0, seed_dir);
  stage_sample(cfg, 0, seed_dir);
  stage_select(cfg, seed_dir);
  stage_evaluate(cfg, seed_dir);

  CHECK(slurp(mono / "seed_0/candidates.json") == slurp(seed_dir / "candidates.json"));
  CHECK(slurp(mono / "seed_0/report.json") == slurp(seed_dir / "report.json"));

  // resume from existing checkpoints: re-sampling alone reproduces the
  // downstream artifacts
  fs::remove(seed_dir / "samples.json");
  fs::remove(seed_dir / "candidates.json");
  stage_sample(cfg, 0, seed_dir);
  stage_select(cfg, seed_dir);
  stage_evaluate(cfg, seed_dir);
  CHECK(slurp(mono / "seed_0/candidates.json") == slurp(seed_dir / "candidates.json"));
}

TEST_CASE("ablate sweeps an axis and a single value matches a plain run") {
  auto cfg = tiny_branin();
  cfg.denoiser_train.train_steps = 120;  // keep the sweep quick
  cfg.proxy_train.train_steps = 120;

  const auto dir = fresh_dir("ablate");
  const auto rows = ablate(cfg, "alpha", {cfg.alpha}, dir);
  REQUIRE(rows.size() == 1);
  CHECK(fs::exists(dir / "ablate.csv"));

  const auto plain = fresh_dir("ablate_ref");
  const auto ref = run_experiment(cfg, plain);
  CHECK(rows[0].mean == ref.aggregate.mean_best_raw);
  CHECK(rows[0].stddev == ref.aggregate.std_best_raw);

  CHECK_THROWS_AS(ablate(cfg, "nonsense", {1.0}, dir), ConfigError);
  // illegal value propagates the validation error
  CHECK_THROWS_AS(ablate(cfg, "C", {static_cast<double>(cfg.construction.H)}, dir), ConfigError);
}

TEST_CASE("emit_stats writes histograms, polylines, shift summary, and contour") {
  const auto cfg = tiny_branin();
  const auto dir = fresh_dir("stats");
  run_experiment(cfg, dir);
  emit_stats(cfg, dir);

  CHECK(fs::exists(dir / "contour.csv"));
  for (const auto* name : {"hist_dataset.csv", "hist_trajectories.csv", "hist_candidates.csv",
                           "traj_polylines.csv", "sample_polylines.csv", "score_shift.json"})
    CHECK(fs::exists(dir / "seed_0" / name));

  // histogram counts sum to the sample count
  std::ifstream hist(dir / "seed_0/hist_dataset.csv");
  std::string line;
  std::getline(hist, line);
  CHECK(line == "bin_lo,bin_hi,count");
  std::int64_t total = 0;
  while (std::getline(hist, line)) total += std::stoll(line.substr(line.rfind(',') + 1));
  const auto ds = load_dataset(dir / "seed_0/dataset.json", FileFormat::json);
  CHECK(total == ds.size());

  // contour covers the branin box at 101x101
  std::ifstream contour(dir / "contour.csv");
  int rows = 0;
  while (std::getline(contour, line)) ++rows;
  CHECK(rows == 101 * 101 + 1);

  CHECK_THROWS_AS(emit_stats(cfg, dir / "missing"), std::runtime_error);
}

TEST_CASE("failed seeds are recorded and aggregation continues") {
  auto cfg = tiny_branin();
  cfg.seeds = {0, 1};
  const auto dir = fresh_dir("partial");
  // sabotage seed 1 by pre-creating its dataset path as a directory
  fs::create_directories(dir / "seed_1" / "dataset.json");
  const auto result = run_experiment(cfg, dir);
  CHECK(result.records.size() == 1);
  REQUIRE(result.failed_seeds.size() == 1);
  CHECK(result.failed_seeds[0].first == 1);
}
