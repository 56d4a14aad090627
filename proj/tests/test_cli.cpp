#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

using namespace std::string_literals;
namespace fs = std::filesystem;

namespace {

const std::string kCli = GTG_CLI_PATH;

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "gtg_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct CommandResult {
  int exit_code = -1;
  std::string stdout_text, stderr_text;
};

CommandResult run_cli(const std::string& args, const std::string& env = "") {
  const auto dir = fs::temp_directory_path() / "gtg_cli_tests";
  fs::create_directories(dir);
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = env + (env.empty() ? "" : " ") + kCli + " " + args + " >" + out.string() +
                          " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  CommandResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::stringstream so, se;
  so << std::ifstream(out).rdbuf();
  se << std::ifstream(err).rdbuf();
  r.stdout_text = so.str();
  r.stderr_text = se.str();
  return r;
}

fs::path write_config(const std::string& name, const std::string& extra = "") {
  const auto dir = fs::temp_directory_path() / "gtg_cli_tests";
  fs::create_directories(dir);
  const auto path = dir / name;
  std::ofstream out(path);
  out << R"(version = 1
task = "branin"
gen.n_samples = 250
construction.H = 8
construction.n_traj = 30
construction.K = 5
diffusion.T = 20
denoiser.hidden = 32
denoiser.blocks = 2
denoiser.time_embed_dim = 16
denoiser.batch_size = 16
denoiser.learning_rate = 0.001
denoiser.train_steps = 200
proxy.hidden = 32
proxy.batch_size = 32
proxy.train_steps = 200
sampling.n_trajectories = 2
sampling.context_length = 4
selection.q = 8
seeds = [0]
)" << extra;
  return path;
}

std::string slurp(const fs::path& p) {
  std::stringstream ss;
  ss << std::ifstream(p, std::ios::binary).rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("missing config file exits 2 and creates no run directory") {
  const auto out = fs::temp_directory_path() / "gtg_cli_tests" / "never_created";
  fs::remove_all(out);
  const auto r = run_cli("run --config /nonexistent.toml --out " + out.string());
  CHECK(r.exit_code == 2);
  CHECK_FALSE(fs::exists(out));
  const auto err = nlohmann::json::parse(r.stderr_text);
  CHECK(err.at("kind") == "config");
}

TEST_CASE("unknown config keys exit 2") {
  const auto cfg = write_config("bad.toml", "mystery.knob = 7\n");
  const auto out = fresh_dir("unknown_key");
  const auto r = run_cli("run --config " + cfg.string() + " --out " + out.string() + " --force");
  CHECK(r.exit_code == 2);
  CHECK(r.stderr_text.find("unknown key") != std::string::npos);
}

TEST_CASE("run executes, prints the aggregate line, and is reproducible") {
  const auto cfg = write_config("tiny.toml");
  const auto a = fresh_dir("run_a");
  const auto r1 = run_cli("run --config " + cfg.string() + " --out " + a.string() + " --force");
  REQUIRE(r1.exit_code == 0);
  CHECK(r1.stdout_text.find("best: ") != std::string::npos);
  CHECK(fs::exists(a / "report.json"));

  const auto b = fresh_dir("run_b");
  const auto r2 = run_cli("run --config " + cfg.string() + " --out " + b.string() + " --force");
  REQUIRE(r2.exit_code == 0);
  CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
  CHECK(slurp(a / "seed_0/candidates.json") == slurp(b / "seed_0/candidates.json"));

  // re-running into the same directory needs --force
  const auto r3 = run_cli("run --config " + cfg.string() + " --out " + a.string());
  CHECK(r3.exit_code == 2);
  const auto r4 = run_cli("run --config " + cfg.string() + " --out " + a.string() + " --force");
  CHECK(r4.exit_code == 0);
}

TEST_CASE("stage commands compose into a full run") {
  const auto cfg = write_config("staged.toml");
  const auto dir = fresh_dir("staged");
  for (const auto* sub : {"gen-data", "build-trajs", "train", "sample", "select", "evaluate"}) {
    const auto r = run_cli(sub + " --config "s + cfg.string() + " --out " + dir.string());
    REQUIRE_MESSAGE(r.exit_code == 0, sub, ": ", r.stderr_text);
  }
  CHECK(fs::exists(dir / "seed_0/candidates.json"));
  CHECK(fs::exists(dir / "report.json"));

  // matches the monolithic run byte-for-byte
  const auto mono = fresh_dir("staged_ref");
  run_cli("run --config " + cfg.string() + " --out " + mono.string() + " --force");
  CHECK(slurp(dir / "seed_0/candidates.json") == slurp(mono / "seed_0/candidates.json"));
  CHECK(slurp(dir / "report.json") == slurp(mono / "report.json"));

  // stage outputs are protected without --force
  const auto again = run_cli("gen-data --config " + cfg.string() + " --out " + dir.string());
  CHECK(again.exit_code == 2);

  // stats emits plot data from the artifacts
  const auto stats = run_cli("stats --config " + cfg.string() + " --out " + dir.string());
  CHECK(stats.exit_code == 0);
  CHECK(fs::exists(dir / "contour.csv"));
  CHECK(fs::exists(dir / "seed_0/hist_dataset.csv"));
}

TEST_CASE("seed precedence: flag beats environment beats config") {
  const auto cfg = write_config("seeds.toml");
  const auto dir = fresh_dir("seed_env");
  const auto r = run_cli("gen-data --config " + cfg.string() + " --out " + dir.string(),
                         "GTG_SEED=5");
  REQUIRE(r.exit_code == 0);
  CHECK(fs::exists(dir / "seed_5/dataset.json"));
  CHECK_FALSE(fs::exists(dir / "seed_0"));

  const auto r2 = run_cli("gen-data --config " + cfg.string() + " --out " + dir.string() +
                              " --seed 9",
                          "GTG_SEED=5");
  REQUIRE(r2.exit_code == 0);
  CHECK(fs::exists(dir / "seed_9/dataset.json"));

  const auto r3 = run_cli("gen-data --config " + cfg.string() + " --out " + dir.string(),
                          "GTG_SEED=junk");
  CHECK(r3.exit_code == 2);
}

TEST_CASE("runtime failures exit 1 with a machine-readable error") {
  const auto cfg = write_config("runtime.toml");
  const auto dir = fresh_dir("runtime_err");
  // select with no prior artifacts is a runtime error, not a config error
  const auto r = run_cli("select --config " + cfg.string() + " --out " + dir.string());
  CHECK(r.exit_code == 1);
  const auto err = nlohmann::json::parse(r.stderr_text);
  CHECK(err.at("kind") == "runtime");
}

TEST_CASE("ablate emits one row per value") {
  const auto cfg = write_config("ablate.toml");
  const auto dir = fresh_dir("ablate");
  const auto r = run_cli("ablate --config " + cfg.string() + " --out " + dir.string() +
                         " --axis alpha --values 0.2,0.8");
  REQUIRE_MESSAGE(r.exit_code == 0, r.stderr_text);
  std::ifstream in(dir / "ablate.csv");
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3);  // header + 2 values
  CHECK(fs::exists(dir / "alpha_0.2/report.json"));
  CHECK(fs::exists(dir / "alpha_0.8/report.json"));
}
