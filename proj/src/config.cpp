#include "gtg/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "gtg/stats.hpp"

namespace gtg {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

// key = value lines; '#' starts a comment; strings may be double-quoted;
// lists are bracketed and comma-separated.
std::map<std::string, std::string> parse_pairs(const std::string& text) {
  std::map<std::string, std::string> pairs;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    bool in_quote = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_quote = !in_quote;
      if (line[i] == '#' && !in_quote) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config: line " + std::to_string(lineno) + ": empty key or value");
    if (pairs.contains(key))
      throw ConfigError("config: duplicate key '" + key + "'");
    pairs[key] = value;
  }
  return pairs;
}

class Reader {
 public:
  explicit Reader(std::map<std::string, std::string> pairs) : pairs_(std::move(pairs)) {}

  std::optional<std::string> raw(const std::string& key) {
    auto it = pairs_.find(key);
    if (it == pairs_.end()) return std::nullopt;
    std::string v = it->second;
    pairs_.erase(it);
    return v;
  }

  void take_string(const std::string& key, std::string& out) {
    if (auto v = raw(key)) out = unquote(*v);
  }
  void take_double(const std::string& key, double& out) {
    if (auto v = raw(key)) out = to_double(key, *v);
  }
  void take_int(const std::string& key, int& out) {
    if (auto v = raw(key)) out = static_cast<int>(to_int(key, *v));
  }
  void take_int64(const std::string& key, std::int64_t& out) {
    if (auto v = raw(key)) out = to_int(key, *v);
  }
  void take_bool(const std::string& key, bool& out) {
    if (auto v = raw(key)) {
      if (*v == "true")
        out = true;
      else if (*v == "false")
        out = false;
      else
        throw ConfigError("config: key '" + key + "' expects true/false");
    }
  }
  void take_seeds(const std::string& key, std::vector<std::uint64_t>& out) {
    auto v = raw(key);
    if (!v) return;
    std::string s = *v;
    if (s.size() < 2 || s.front() != '[' || s.back() != ']')
      throw ConfigError("config: key '" + key + "' expects a bracketed list");
    s = s.substr(1, s.size() - 2);
    out.clear();
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      out.push_back(static_cast<std::uint64_t>(to_int(key, item)));
    }
    if (out.empty()) throw ConfigError("config: key '" + key + "' has an empty list");
  }

  void finish() const {
    if (!pairs_.empty()) throw ConfigError("config: unknown key '" + pairs_.begin()->first + "'");
  }

 private:
  static std::string unquote(const std::string& v) {
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
    return v;
  }
  static double to_double(const std::string& key, const std::string& v) {
    try {
      std::size_t pos = 0;
      const double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("");
      return d;
    } catch (const std::exception&) {
      throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
    }
  }
  static std::int64_t to_int(const std::string& key, const std::string& v) {
    try {
      std::size_t pos = 0;
      const long long d = std::stoll(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("");
      return d;
    } catch (const std::exception&) {
      throw ConfigError("config: key '" + key + "' expects an integer, got '" + v + "'");
    }
  }

  std::map<std::string, std::string> pairs_;
};

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  Reader r(parse_pairs(text));
  ExperimentConfig c;

  r.take_int("version", c.version);
  if (c.version != 1) throw ConfigError("config: unsupported version");

  r.take_string("task", c.task);
  r.take_int("task.dim", c.task_dim);
  r.take_string("dataset.path", c.dataset_path);
  std::string fmt = "json";
  r.take_string("dataset.format", fmt);
  if (fmt == "csv")
    c.dataset_format = FileFormat::csv;
  else if (fmt == "json")
    c.dataset_format = FileFormat::json;
  else
    throw ConfigError("config: dataset.format must be csv or json");
  std::string space;
  r.take_string("dataset.space", space);
  if (space == "continuous")
    c.dataset_space = SpaceKind::continuous;
  else if (space == "discrete")
    c.dataset_space = SpaceKind::discrete;
  else if (!space.empty())
    throw ConfigError("config: dataset.space must be continuous or discrete");

  r.take_int("gen.n_samples", c.gen_n_samples);
  r.take_double("gen.trim_top_fraction", c.gen_trim);

  r.take_double("construction.p", c.construction.p);
  r.take_int("construction.H", c.construction.H);
  r.take_int("construction.n_traj", c.construction.n_traj);
  r.take_int("construction.K", c.construction.K);
  r.take_double("construction.epsilon", c.construction.epsilon);
  r.take_bool("neighbor.precompute", c.neighbor_precompute);

  r.take_int("diffusion.T", c.diffusion_T);
  std::string sched = "cosine";
  r.take_string("diffusion.schedule", sched);
  if (sched == "cosine")
    c.schedule = ScheduleKind::cosine;
  else if (sched == "linear")
    c.schedule = ScheduleKind::linear;
  else
    throw ConfigError("config: diffusion.schedule must be cosine or linear");
  r.take_double("diffusion.beta_start", c.beta_start);
  r.take_double("diffusion.beta_end", c.beta_end);
  r.take_double("diffusion.omega", c.omega);
  r.take_double("diffusion.denoised_clip", c.denoised_clip);

  r.take_int("denoiser.hidden", c.denoiser_hidden);
  r.take_int("denoiser.blocks", c.denoiser_blocks);
  r.take_int("denoiser.time_embed_dim", c.denoiser_time_embed_dim);
  r.take_int("denoiser.batch_size", c.denoiser_train.batch_size);
  r.take_double("denoiser.learning_rate", c.denoiser_train.learning_rate);
  r.take_int64("denoiser.train_steps", c.denoiser_train.train_steps);
  r.take_double("denoiser.dropout_p", c.denoiser_train.dropout_p);
  r.take_double("denoiser.ema_decay", c.denoiser_train.ema_decay);

  r.take_int("proxy.hidden", c.proxy_hidden);
  r.take_int("proxy.layers", c.proxy_layers);
  r.take_double("proxy.rank_k", c.proxy_rank_k);
  r.take_int("proxy.batch_size", c.proxy_train.batch_size);
  r.take_double("proxy.learning_rate", c.proxy_train.learning_rate);
  r.take_int64("proxy.train_steps", c.proxy_train.train_steps);

  r.take_int("sampling.n_trajectories", c.n_sample_trajectories);
  r.take_int("sampling.context_length", c.context_length);
  r.take_double("sampling.alpha", c.alpha);
  std::string mode = "known";
  r.take_string("sampling.target_mode", mode);
  if (mode == "known")
    c.target_mode = TargetMode::known;
  else if (mode == "gamma_max")
    c.target_mode = TargetMode::gamma_max;
  else
    throw ConfigError("config: sampling.target_mode must be known or gamma_max");
  double y_star = std::numeric_limits<double>::quiet_NaN();
  r.take_double("sampling.y_star", y_star);
  if (!std::isnan(y_star)) c.y_star_raw = y_star;
  r.take_double("sampling.gamma", c.gamma);
  std::string gmode = "cfg";
  r.take_string("sampling.guidance_mode", gmode);
  if (gmode == "cfg")
    c.guidance_mode = GuidanceMode::cfg;
  else if (gmode == "inpaint_y")
    c.guidance_mode = GuidanceMode::inpaint_y;
  else
    throw ConfigError("config: sampling.guidance_mode must be cfg or inpaint_y");

  r.take_int("selection.q", c.q_budget);
  r.take_seeds("seeds", c.seeds);

  r.finish();
  validate(c);
  return c;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
  if (c.task != "branin" && c.task != "sphere" && c.task != "file")
    fail("task must be branin, sphere, or file");
  if (c.task == "file" && c.dataset_path.empty()) fail("task=file requires dataset.path");
  if (c.task == "sphere" && c.task_dim < 1) fail("task.dim must be >= 1");
  if (c.task != "file" && c.gen_n_samples < 10) fail("gen.n_samples must be >= 10");
  if (!(c.gen_trim >= 0.0 && c.gen_trim < 1.0)) fail("gen.trim_top_fraction must be in [0,1)");

  if (!(c.construction.p > 0.0 && c.construction.p <= 100.0)) fail("construction.p in (0,100]");
  if (c.construction.H < 2) fail("construction.H must be >= 2");
  if (c.construction.n_traj < 1) fail("construction.n_traj must be >= 1");
  if (c.construction.K < 1) fail("construction.K must be >= 1");
  if (!(c.construction.epsilon >= 0.0)) fail("construction.epsilon must be >= 0");

  if (c.diffusion_T < 1) fail("diffusion.T must be >= 1");
  if (!(c.omega >= 0.0)) fail("diffusion.omega must be >= 0");
  if (!(c.denoised_clip >= 0.0)) fail("diffusion.denoised_clip must be >= 0");

  if (c.denoiser_hidden < 1 || c.denoiser_blocks < 0) fail("bad denoiser architecture");
  if (c.denoiser_time_embed_dim < 2 || c.denoiser_time_embed_dim % 2 != 0)
    fail("denoiser.time_embed_dim must be even and >= 2");
  if (c.denoiser_train.batch_size < 1) fail("denoiser.batch_size must be >= 1");
  if (!(c.denoiser_train.learning_rate >= 0.0)) fail("denoiser.learning_rate must be >= 0");
  if (c.denoiser_train.train_steps < 1) fail("denoiser.train_steps must be >= 1");
  if (!(c.denoiser_train.dropout_p >= 0.0 && c.denoiser_train.dropout_p <= 1.0))
    fail("denoiser.dropout_p in [0,1]");

  if (c.proxy_hidden < 1 || c.proxy_layers < 1) fail("bad proxy architecture");
  if (!(c.proxy_rank_k > 0.0)) fail("proxy.rank_k must be > 0");
  if (c.proxy_train.batch_size < 1) fail("proxy.batch_size must be >= 1");
  if (c.proxy_train.train_steps < 1) fail("proxy.train_steps must be >= 1");

  if (c.n_sample_trajectories < 1) fail("sampling.n_trajectories must be >= 1");
  if (c.context_length < 0) fail("sampling.context_length must be >= 0");
  if (c.context_length >= c.construction.H)
    fail("sampling.context_length must be < construction.H");
  if (!(c.alpha >= 0.0)) fail("sampling.alpha must be >= 0");
  if (c.target_mode == TargetMode::gamma_max && !(c.gamma > 0.0)) fail("sampling.gamma must be > 0");
  if (c.task == "file" && c.target_mode == TargetMode::known && !c.y_star_raw)
    fail("task=file with target_mode=known requires sampling.y_star");

  if (c.q_budget < 1) fail("selection.q must be >= 1");
  const std::int64_t harvested = static_cast<std::int64_t>(c.n_sample_trajectories) *
                                 (c.construction.H - c.context_length);
  if (c.q_budget > harvested)
    fail("selection.q exceeds harvested candidates (n_trajectories * (H - C) = " +
         std::to_string(harvested) + ")");
  if (c.seeds.empty()) fail("seeds must be non-empty");
}

nlohmann::ordered_json config_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["version"] = c.version;
  j["task"] = c.task;
  j["task_dim"] = c.task_dim;
  j["dataset_path"] = c.dataset_path;
  j["dataset_format"] = c.dataset_format == FileFormat::csv ? "csv" : "json";
  j["dataset_space"] = !c.dataset_space ? "auto"
                       : *c.dataset_space == SpaceKind::discrete ? "discrete"
                                                                 : "continuous";
  j["gen"] = {{"n_samples", c.gen_n_samples}, {"trim_top_fraction", c.gen_trim}};
  j["construction"] = {{"p", c.construction.p},
                       {"H", c.construction.H},
                       {"n_traj", c.construction.n_traj},
                       {"K", c.construction.K},
                       {"epsilon", c.construction.epsilon}};
  j["neighbor_precompute"] = c.neighbor_precompute;
  j["diffusion"] = {{"T", c.diffusion_T},
                    {"schedule", c.schedule == ScheduleKind::cosine ? "cosine" : "linear"},
                    {"beta_start", c.beta_start},
                    {"beta_end", c.beta_end},
                    {"omega", c.omega},
                    {"denoised_clip", c.denoised_clip}};
  j["denoiser"] = {{"hidden", c.denoiser_hidden},
                   {"blocks", c.denoiser_blocks},
                   {"time_embed_dim", c.denoiser_time_embed_dim},
                   {"batch_size", c.denoiser_train.batch_size},
                   {"learning_rate", c.denoiser_train.learning_rate},
                   {"train_steps", c.denoiser_train.train_steps},
                   {"dropout_p", c.denoiser_train.dropout_p},
                   {"ema_decay", c.denoiser_train.ema_decay}};
  j["proxy"] = {{"hidden", c.proxy_hidden},
                {"layers", c.proxy_layers},
                {"rank_k", c.proxy_rank_k},
                {"batch_size", c.proxy_train.batch_size},
                {"learning_rate", c.proxy_train.learning_rate},
                {"train_steps", c.proxy_train.train_steps}};
  j["sampling"] = {{"n_trajectories", c.n_sample_trajectories},
                   {"context_length", c.context_length},
                   {"alpha", c.alpha},
                   {"target_mode", c.target_mode == TargetMode::known ? "known" : "gamma_max"},
                   {"y_star", c.y_star_raw ? nlohmann::ordered_json(*c.y_star_raw)
                                           : nlohmann::ordered_json(nullptr)},
                   {"gamma", c.gamma},
                   {"guidance_mode",
                    c.guidance_mode == GuidanceMode::cfg ? "cfg" : "inpaint_y"}};
  j["selection"] = {{"q", c.q_budget}};
  j["seeds"] = c.seeds;
  return j;
}

std::string config_hash(const ExperimentConfig& c) { return fnv1a_hex(config_json(c).dump()); }

}  // namespace gtg
