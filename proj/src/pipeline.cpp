#include "gtg/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <span>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gtg/model_io.hpp"
#include "gtg/proxy.hpp"
#include "gtg/stats.hpp"

namespace gtg {

namespace fs = std::filesystem;

namespace {

class StageClock {
 public:
  explicit StageClock(std::map<std::string, double>* sink) : sink_(sink) {}
  template <class F>
  auto time(const std::string& name, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      record(name, t0);
    } else {
      auto r = f();
      record(name, t0);
      return r;
    }
  }

 private:
  void record(const std::string& name, std::chrono::steady_clock::time_point t0) {
    if (sink_)
      (*sink_)[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  std::map<std::string, double>* sink_;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  write_text(path, j.dump(1) + "\n");
}

nlohmann::ordered_json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing artifact " + path.string());
  nlohmann::ordered_json j;
  in >> j;
  return j;
}

void write_curve_csv(const fs::path& path, const std::vector<double>& curve) {
  std::ofstream out(path);
  out << "step,loss\n";
  out.precision(17);
  for (std::size_t i = 0; i < curve.size(); ++i) out << i + 1 << "," << curve[i] << "\n";
}

}  // namespace

Oracle task_oracle(const ExperimentConfig& cfg) {
  if (cfg.task == "file")
    throw ConfigError("task=file has no oracle; evaluation needs task=branin or task=sphere");
  return oracle_by_name(cfg.task, cfg.task_dim);
}

double estimate_target(const OfflineDataset& ds, TargetMode mode, double gamma,
                       std::optional<double> known_raw) {
  if (mode == TargetMode::gamma_max) {
    if (!(gamma > 0.0)) throw std::invalid_argument("estimate_target: gamma must be > 0");
    return gamma * ds.normalize_score(ds.y_max);  // = gamma * 1.0
  }
  if (!known_raw) throw std::invalid_argument("estimate_target: known mode needs the raw optimum");
  return ds.normalize_score(*known_raw);
}

void stage_dataset(const ExperimentConfig& cfg, std::uint64_t seed, const fs::path& seed_dir) {
  fs::create_directories(seed_dir);
  OfflineDataset ds = cfg.task == "file"
                          ? load_dataset(cfg.dataset_path, cfg.dataset_format)
                          : make_oracle_dataset(task_oracle(cfg), cfg.gen_n_samples, cfg.gen_trim,
                                                seed);
  if (cfg.task == "file" && cfg.dataset_space) ds.space = *cfg.dataset_space;
  save_dataset(ds, seed_dir / "dataset.json", FileFormat::json);
}

void stage_trajectories(const ExperimentConfig& cfg, std::uint64_t seed, const fs::path& seed_dir) {
  const auto ds = load_dataset(seed_dir / "dataset.json", FileFormat::json);
  const auto idx = NeighborIndex::build(ds, cfg.neighbor_precompute);
  const auto tds = build_trajectories(ds, idx, cfg.construction, seed);
  save_trajectories(tds, seed_dir / "trajs.json");
  write_text(seed_dir / "neighbor_index.txt",
             "build_seconds=" + std::to_string(idx.build_seconds()) + "\n");
}

void stage_train(const ExperimentConfig& cfg, std::uint64_t seed, const fs::path& seed_dir) {
  const auto ds = load_dataset(seed_dir / "dataset.json", FileFormat::json);
  const auto tds = load_trajectories(seed_dir / "trajs.json");

  const auto sched = make_schedule(cfg.diffusion_T, cfg.schedule, cfg.beta_start, cfg.beta_end);
  DenoiserArch arch;
  arch.input_dim = tds.config.H * model_width(ds);
  arch.hidden = cfg.denoiser_hidden;
  arch.blocks = cfg.denoiser_blocks;
  arch.time_embed_dim = cfg.denoiser_time_embed_dim;
  arch.cond_scale = static_cast<double>(tds.config.H);
  DenoiserModel model(arch, seed);

  TrainConfig dtc = cfg.denoiser_train;
  dtc.seed = seed;
  const Eigen::MatrixXd tau0s = model_matrix(tds, ds);
  const Eigen::VectorXd conds = condition_values(tds);
  const TrainResult tr = train(model, tau0s, conds, sched, dtc);
  write_curve_csv(seed_dir / "denoiser_loss.csv", tr.loss_curve);
  save_denoiser(seed_dir / "denoiser.ckpt", model, sched,
                {{"steps", dtc.train_steps},
                 {"seed", seed},
                 {"first_decile_mean", tr.first_decile_mean},
                 {"last_decile_mean", tr.last_decile_mean}});

  TrainConfig ptc = cfg.proxy_train;
  ptc.seed = seed;
  ProxyArch parch;
  parch.input_dim = ds.dim();
  parch.hidden = cfg.proxy_hidden;
  parch.layers = cfg.proxy_layers;
  const auto weights = rank_weights(ds.scores, cfg.proxy_rank_k);
  ProxyValidation val;
  std::vector<double> pcurve;
  const ProxyModel proxy = train_proxy(ds, ptc, weights, parch, &val, &pcurve);
  write_curve_csv(seed_dir / "proxy_loss.csv", pcurve);
  save_proxy(seed_dir / "proxy.ckpt",
             proxy, {{"steps", ptc.train_steps}, {"seed", seed}, {"rank_k", cfg.proxy_rank_k}});
  write_json(seed_dir / "proxy_validation.json",
             {{"rmse", val.rmse},
              {"spearman", val.spearman},
              {"n_train", val.n_train},
              {"n_val", val.n_val},
              {"split_seed", val.split_seed}});
}

void stage_sample(const ExperimentConfig& cfg, std::uint64_t seed, const fs::path& seed_dir,
                  std::optional<double> alpha_override) {
  const auto ds = load_dataset(seed_dir / "dataset.json", FileFormat::json);
  const auto tds = load_trajectories(seed_dir / "trajs.json");
  NoiseSchedule sched;
  const DenoiserModel model = load_denoiser(seed_dir / "denoiser.ckpt", &sched);

  const int H = tds.config.H;
  const int W = model_width(ds);
  const int C = cfg.context_length;
  const int n = cfg.n_sample_trajectories;

  std::optional<double> known = cfg.y_star_raw;
  if (!known && cfg.task != "file") known = task_oracle(cfg).optimum_value;
  GuidanceConfig guidance;
  guidance.omega = cfg.omega;
  guidance.denoised_clip = cfg.denoised_clip;
  guidance.alpha_level = alpha_override.value_or(cfg.alpha);
  guidance.y_star = estimate_target(ds, cfg.target_mode, cfg.gamma, known);
  guidance.horizon = H;

  // Context sub-trajectories: uniform over the stored set, without
  // replacement while enough are available.
  Rng pick(seed, RngStream::context_pick);
  std::vector<int> sources(static_cast<std::size_t>(n));
  if (n <= tds.size()) {
    std::vector<int> pool(static_cast<std::size_t>(tds.size()));
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < n; ++i) {
      const auto j = static_cast<std::size_t>(pick.uniform_int(i, tds.size() - 1));
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
      sources[static_cast<std::size_t>(i)] = pool[static_cast<std::size_t>(i)];
    }
  } else {
    for (int i = 0; i < n; ++i)
      sources[static_cast<std::size_t>(i)] = static_cast<int>(pick.uniform_int(0, tds.size() - 1));
  }

  Eigen::MatrixXd ctx(C * W, n);
  for (int i = 0; i < n; ++i) {
    const auto flat = flatten_to_model(tds.trajectories[static_cast<std::size_t>(sources[i])], ds);
    ctx.col(i) = flat.head(C * W);
  }

  std::vector<Rng> rngs;
  rngs.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    rngs.emplace_back(seed, RngStream::sample_chain, static_cast<std::uint64_t>(i));

  Eigen::MatrixXd samples;
  if (cfg.guidance_mode == GuidanceMode::cfg) {
    samples = sample_batch_with_context(model, sched, guidance, ctx, H * W, rngs);
  } else {
    // Inpainting guidance: no classifier-free extrapolation; instead pin the
    // score channel of every generated step to the per-step target y*.
    guidance.omega = 0.0;
    std::vector<bool> mask(static_cast<std::size_t>(H * W), false);
    Eigen::MatrixXd values = Eigen::MatrixXd::Zero(H * W, n);
    for (int r = 0; r < C * W; ++r) mask[static_cast<std::size_t>(r)] = true;
    values.topRows(C * W) = ctx;
    for (int h = C; h < H; ++h) {
      mask[static_cast<std::size_t>(h * W + W - 1)] = true;
      values.row(h * W + W - 1).setConstant(guidance.y_star);
    }
    samples = sample_batch_masked(model, sched, guidance, mask, values, H * W, rngs);
  }

  nlohmann::ordered_json out;
  out["seed"] = seed;
  out["alpha"] = guidance.alpha_level;
  out["omega"] = guidance.omega;
  out["guidance_mode"] = cfg.guidance_mode == GuidanceMode::cfg ? "cfg" : "inpaint_y";
  out["y_star_normalized"] = guidance.y_star;
  out["target_sum"] = guidance.target_sum();
  out["context_length"] = C;
  out["context_sources"] = sources;
  auto arr = nlohmann::json::array();
  for (int i = 0; i < n; ++i) {
    Trajectory traj = trajectory_from_model(samples.col(i), ds, H);
    // Context positions: copy raw values from the stored source trajectory so
    // the first C (design, score) pairs match it bit-for-bit.
    const auto& src = tds.trajectories[static_cast<std::size_t>(sources[i])];
    for (int h = 0; h < C; ++h) {
      traj.designs.col(h) = src.designs.col(h);
      traj.raw_scores(h) = src.raw_scores(h);
      traj.norm_scores(h) = src.norm_scores(h);
      traj.source_rows[static_cast<std::size_t>(h)] =
          src.source_rows[static_cast<std::size_t>(h)];
    }
    arr.push_back(trajectory_to_json(traj));
  }
  out["trajectories"] = std::move(arr);
  write_json(seed_dir / "samples.json", out);
}

void save_candidates(const CandidateSet& cands, std::uint64_t seed, const fs::path& path) {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  auto designs = nlohmann::json::array();
  for (int i = 0; i < cands.size(); ++i) {
    auto row = nlohmann::json::array();
    for (int k = 0; k < cands.designs.rows(); ++k) row.push_back(cands.designs(k, i));
    designs.push_back(std::move(row));
  }
  j["designs"] = std::move(designs);
  j["proxy_scores"] = std::vector<double>(cands.proxy_scores.data(),
                                          cands.proxy_scores.data() + cands.proxy_scores.size());
  if (cands.evaluated())
    j["oracle_scores"] = std::vector<double>(
        cands.oracle_scores.data(), cands.oracle_scores.data() + cands.oracle_scores.size());
  auto prov = nlohmann::json::array();
  for (const auto& p : cands.provenance)
    prov.push_back({{"trajectory", p.trajectory}, {"step", p.step}});
  j["provenance"] = std::move(prov);
  write_json(path, j);
}

CandidateSet load_candidates(const fs::path& path, std::uint64_t* seed_out) {
  const auto j = read_json(path);
  CandidateSet c;
  const auto& jd = j.at("designs");
  const auto n = static_cast<int>(jd.size());
  const auto d = n > 0 ? static_cast<int>(jd.at(0).size()) : 0;
  c.designs.resize(d, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) c.designs(k, i) = jd.at(i).at(k).get<double>();
  const auto ps = j.at("proxy_scores").get<std::vector<double>>();
  c.proxy_scores = Eigen::Map<const Eigen::VectorXd>(ps.data(), static_cast<Eigen::Index>(ps.size()));
  if (j.contains("oracle_scores")) {
    const auto os = j["oracle_scores"].get<std::vector<double>>();
    c.oracle_scores =
        Eigen::Map<const Eigen::VectorXd>(os.data(), static_cast<Eigen::Index>(os.size()));
  }
  for (const auto& jp : j.at("provenance"))
    c.provenance.push_back({jp.at("trajectory").get<int>(), jp.at("step").get<int>()});
  if (seed_out) *seed_out = j.at("seed").get<std::uint64_t>();
  return c;
}

void stage_select(const ExperimentConfig& cfg, const fs::path& seed_dir) {
  const auto ds = load_dataset(seed_dir / "dataset.json", FileFormat::json);
  const auto j = read_json(seed_dir / "samples.json");
  const ProxyModel proxy = load_proxy(seed_dir / "proxy.ckpt");
  const int C = j.at("context_length").get<int>();
  const auto seed = j.at("seed").get<std::uint64_t>();

  std::vector<Trajectory> sampled;
  for (const auto& jt : j.at("trajectories")) sampled.push_back(trajectory_from_json(jt));
  if (sampled.empty()) throw std::runtime_error("select: no sampled trajectories");
  const int H = sampled.front().length();

  // Harvest the generated designs x_{C+1..H} of every sampled trajectory.
  CandidateSet pool;
  const auto total = static_cast<int>(sampled.size()) * (H - C);
  pool.designs.resize(ds.dim(), total);
  pool.proxy_scores = Eigen::VectorXd::Zero(total);
  pool.provenance.resize(static_cast<std::size_t>(total));
  int w = 0;
  for (std::size_t i = 0; i < sampled.size(); ++i) {
    for (int h = C; h < H; ++h) {
      pool.designs.col(w) = sampled[i].designs.col(h);
      pool.provenance[static_cast<std::size_t>(w)] = {static_cast<int>(i), h + 1};
      ++w;
    }
  }
  const CandidateSet top = filter_top_q(pool, proxy, ds, cfg.q_budget);
  save_candidates(top, seed, seed_dir / "candidates.json");
}

EvalReport stage_evaluate(const ExperimentConfig& cfg, const fs::path& seed_dir) {
  const auto ds = load_dataset(seed_dir / "dataset.json", FileFormat::json);
  std::uint64_t seed = 0;
  CandidateSet cands = load_candidates(seed_dir / "candidates.json", &seed);
  const Oracle oracle = task_oracle(cfg);
  const EvalReport rep = evaluate_candidates(cands, oracle, ds);
  save_candidates(cands, seed, seed_dir / "candidates.json");
  const double spread = cands.size() >= 2 ? diversity(cands.designs, ds.space) : 0.0;
  write_json(seed_dir / "report.json", {{"seed", seed},
                                        {"best_raw", rep.best_raw},
                                        {"best_normalized", rep.best_normalized},
                                        {"p100", rep.p100},
                                        {"p80", rep.p80},
                                        {"p50", rep.p50},
                                        {"clamped", rep.clamped},
                                        {"n_candidates", rep.n_candidates},
                                        {"diversity", spread}});
  return rep;
}

RunRecord run_seed(const ExperimentConfig& cfg, std::uint64_t seed, const fs::path& seed_dir) {
  RunRecord rec;
  rec.seed = seed;
  rec.config_hash = config_hash(cfg);
  StageClock clock(&rec.stage_seconds);
  clock.time("dataset", [&] { stage_dataset(cfg, seed, seed_dir); });
  clock.time("trajectories", [&] { stage_trajectories(cfg, seed, seed_dir); });
  clock.time("train", [&] { stage_train(cfg, seed, seed_dir); });
  clock.time("sample", [&] { stage_sample(cfg, seed, seed_dir); });
  clock.time("select", [&] { stage_select(cfg, seed_dir); });
  rec.report = clock.time("evaluate", [&] { return stage_evaluate(cfg, seed_dir); });
  return rec;
}

namespace {

Aggregate aggregate_records(const std::vector<RunRecord>& records) {
  Aggregate agg;
  agg.n_seeds = static_cast<int>(records.size());
  std::vector<double> raw, norm;
  for (const auto& r : records) {
    raw.push_back(r.report.best_raw);
    norm.push_back(r.report.best_normalized);
  }
  if (!raw.empty()) {
    agg.mean_best_raw = mean(raw);
    agg.std_best_raw = stddev(raw);
    agg.mean_best_normalized = mean(norm);
    agg.std_best_normalized = stddev(norm);
  }
  return agg;
}

}  // namespace

void write_aggregate_report(const ExperimentConfig& cfg, const fs::path& out_dir,
                            const RunResult& result) {
  nlohmann::ordered_json j;
  j["config_hash"] = config_hash(cfg);
  j["task"] = cfg.task;
  auto per_seed = nlohmann::json::array();
  for (const auto& r : result.records)
    per_seed.push_back({{"seed", r.seed},
                        {"best_raw", r.report.best_raw},
                        {"best_normalized", r.report.best_normalized},
                        {"p100", r.report.p100},
                        {"p80", r.report.p80},
                        {"p50", r.report.p50},
                        {"clamped", r.report.clamped},
                        {"n_candidates", r.report.n_candidates}});
  j["per_seed"] = std::move(per_seed);
  auto failures = nlohmann::json::array();
  for (const auto& [seed, err] : result.failed_seeds)
    failures.push_back({{"seed", seed}, {"error", err}});
  j["failed_seeds"] = std::move(failures);
  j["aggregate"] = {{"n_seeds", result.aggregate.n_seeds},
                    {"mean_best_raw", result.aggregate.mean_best_raw},
                    {"std_best_raw", result.aggregate.std_best_raw},
                    {"mean_best_normalized", result.aggregate.mean_best_normalized},
                    {"std_best_normalized", result.aggregate.std_best_normalized}};
  write_json(out_dir / "report.json", j);

  std::ofstream timings(out_dir / "timings.csv");
  timings << "seed,stage,seconds\n";
  for (const auto& r : result.records)
    for (const auto& [stage, sec] : r.stage_seconds)
      timings << r.seed << "," << stage << "," << sec << "\n";
}

RunResult run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir) {
  validate(cfg);
  task_oracle(cfg);  // run needs an oracle for the final stage; fail early
  fs::create_directories(out_dir);
  write_json(out_dir / "config.json", config_json(cfg));

  RunResult result;
  for (const auto seed : cfg.seeds) {
    const fs::path seed_dir = out_dir / ("seed_" + std::to_string(seed));
    try {
      result.records.push_back(run_seed(cfg, seed, seed_dir));
    } catch (const std::exception& e) {
      result.failed_seeds.emplace_back(seed, e.what());
    }
  }
  if (result.records.empty())
    throw std::runtime_error("run: every seed failed; first error: " +
                             (result.failed_seeds.empty() ? std::string("?")
                                                          : result.failed_seeds.front().second));
  result.aggregate = aggregate_records(result.records);
  write_aggregate_report(cfg, out_dir, result);
  return result;
}

std::vector<AblateRow> ablate(const ExperimentConfig& cfg, const std::string& axis,
                              const std::vector<double>& values, const fs::path& out_dir) {
  if (values.empty()) throw ConfigError("ablate: empty value list");
  fs::create_directories(out_dir);
  std::vector<AblateRow> rows;
  for (const double v : values) {
    ExperimentConfig c = cfg;
    if (axis == "H")
      c.construction.H = static_cast<int>(v);
    else if (axis == "C")
      c.context_length = static_cast<int>(v);
    else if (axis == "alpha")
      c.alpha = v;
    else if (axis == "K")
      c.construction.K = static_cast<int>(v);
    else if (axis == "epsilon")
      c.construction.epsilon = v;
    else if (axis == "Q")
      c.q_budget = static_cast<int>(v);
    else
      throw ConfigError("ablate: unknown axis '" + axis + "'");
    validate(c);

    std::ostringstream tag;
    tag << axis << "_" << v;
    const auto result = run_experiment(c, out_dir / tag.str());
    rows.push_back({v, result.aggregate.mean_best_raw, result.aggregate.std_best_raw});
  }
  std::ofstream out(out_dir / "ablate.csv");
  out << "value,mean_best_raw,std_best_raw\n";
  out.precision(17);
  for (const auto& r : rows) out << r.value << "," << r.mean << "," << r.stddev << "\n";
  return rows;
}

namespace {

void write_histogram_csv(const fs::path& path, std::span<const double> xs, int bins) {
  const Histogram h = histogram(xs, bins);
  std::ofstream out(path);
  out << "bin_lo,bin_hi,count\n";
  out.precision(17);
  for (std::size_t b = 0; b < h.count.size(); ++b)
    out << h.bin_lo[b] << "," << h.bin_hi[b] << "," << h.count[b] << "\n";
}

void emit_seed_stats(const ExperimentConfig& cfg, const fs::path& seed_dir) {
  const auto ds = load_dataset(seed_dir / "dataset.json", FileFormat::json);
  const std::vector<double> ds_scores(ds.scores.data(), ds.scores.data() + ds.size());
  write_histogram_csv(seed_dir / "hist_dataset.csv", ds_scores, 30);

  const bool two_d = ds.dim() == 2;
  if (fs::exists(seed_dir / "trajs.json")) {
    const auto tds = load_trajectories(seed_dir / "trajs.json");
    std::vector<double> traj_scores;
    for (const auto& t : tds.trajectories)
      traj_scores.insert(traj_scores.end(), t.raw_scores.data(),
                         t.raw_scores.data() + t.length());
    write_histogram_csv(seed_dir / "hist_trajectories.csv", traj_scores, 30);

    const auto shift = score_shift_stats(tds, ds);
    nlohmann::ordered_json sj;
    sj["dataset"] = {{"mean", shift.dataset_mean}, {"std", shift.dataset_std}};
    sj["trajectories"] = {{"mean", shift.trajectory_mean}, {"std", shift.trajectory_std}};
    sj["dataset_deciles"] = std::vector<double>(shift.dataset_deciles.data(),
                                                shift.dataset_deciles.data() + 11);
    sj["trajectory_deciles"] = std::vector<double>(shift.trajectory_deciles.data(),
                                                   shift.trajectory_deciles.data() + 11);
    write_json(seed_dir / "score_shift.json", sj);

    if (two_d) {
      std::ofstream out(seed_dir / "traj_polylines.csv");
      out << "trajectory,step,x0,x1,y\n";
      out.precision(17);
      for (int i = 0; i < tds.size(); ++i) {
        const auto& t = tds.trajectories[static_cast<std::size_t>(i)];
        for (int h = 0; h < t.length(); ++h)
          out << i << "," << h + 1 << "," << t.designs(0, h) << "," << t.designs(1, h) << ","
              << t.raw_scores(h) << "\n";
      }
    }
  }
  if (fs::exists(seed_dir / "samples.json") && two_d) {
    const auto j = read_json(seed_dir / "samples.json");
    std::ofstream out(seed_dir / "sample_polylines.csv");
    out << "trajectory,step,x0,x1,y\n";
    out.precision(17);
    int i = 0;
    for (const auto& jt : j.at("trajectories")) {
      const Trajectory t = trajectory_from_json(jt);
      for (int h = 0; h < t.length(); ++h)
        out << i << "," << h + 1 << "," << t.designs(0, h) << "," << t.designs(1, h) << ","
            << t.raw_scores(h) << "\n";
      ++i;
    }
  }
  // Candidate histogram is emitted even when empty (header-only file).
  std::vector<double> cand_scores;
  if (fs::exists(seed_dir / "candidates.json")) {
    const CandidateSet cands = load_candidates(seed_dir / "candidates.json");
    if (cands.evaluated())
      cand_scores.assign(cands.oracle_scores.data(),
                         cands.oracle_scores.data() + cands.oracle_scores.size());
    write_histogram_csv(seed_dir / "hist_candidates.csv", cand_scores, 30);
  }
}

}  // namespace

void emit_stats(const ExperimentConfig& cfg, const fs::path& run_dir) {
  if (!fs::exists(run_dir)) throw std::runtime_error("stats: missing run directory " + run_dir.string());
  bool any = false;
  for (const auto& entry : fs::directory_iterator(run_dir)) {
    if (!entry.is_directory()) continue;
    const auto name = entry.path().filename().string();
    if (!name.starts_with("seed_")) continue;
    if (!fs::exists(entry.path() / "dataset.json")) continue;
    emit_seed_stats(cfg, entry.path());
    any = true;
  }
  if (!any) throw std::runtime_error("stats: no seed artifacts under " + run_dir.string());

  if (cfg.task != "file") {
    const Oracle oracle = task_oracle(cfg);
    if (oracle.dim == 2) {
      std::ofstream out(run_dir / "contour.csv");
      out << "x0,x1,f\n";
      out.precision(17);
      const int res = 101;
      for (int i = 0; i < res; ++i) {
        for (int k = 0; k < res; ++k) {
          Eigen::Vector2d x(oracle.lo(0) + (oracle.hi(0) - oracle.lo(0)) * i / (res - 1.0),
                            oracle.lo(1) + (oracle.hi(1) - oracle.lo(1)) * k / (res - 1.0));
          out << x(0) << "," << x(1) << "," << oracle.evaluate(x) << "\n";
        }
      }
    }
  }
}

}  // namespace gtg
