#include "gtg/model_io.hpp"

#include <stdexcept>

#include "gtg/checkpoint.hpp"

namespace gtg {

namespace {

nlohmann::json schedule_json(const NoiseSchedule& s) {
  return {{"T", s.T},
          {"kind", s.kind == ScheduleKind::cosine ? "cosine" : "linear"},
          {"beta_start", s.beta_start},
          {"beta_end", s.beta_end}};
}

NoiseSchedule schedule_from_json(const nlohmann::json& j) {
  const auto kind =
      j.at("kind").get<std::string>() == "cosine" ? ScheduleKind::cosine : ScheduleKind::linear;
  return make_schedule(j.at("T").get<int>(), kind, j.at("beta_start").get<double>(),
                       j.at("beta_end").get<double>());
}

}  // namespace

void save_denoiser(const std::filesystem::path& path, const DenoiserModel& model,
                   const NoiseSchedule& sched, const nlohmann::json& training_meta) {
  nlohmann::json meta;
  meta["arch"] = {{"input_dim", model.arch().input_dim},
                  {"hidden", model.arch().hidden},
                  {"blocks", model.arch().blocks},
                  {"time_embed_dim", model.arch().time_embed_dim},
                  {"cond_scale", model.arch().cond_scale}};
  meta["schedule"] = schedule_json(sched);
  meta["training"] = training_meta;
  save_checkpoint(path, "denoiser", meta, model.params());
}

DenoiserModel load_denoiser(const std::filesystem::path& path, NoiseSchedule* sched_out,
                            nlohmann::json* meta_out) {
  const auto ck = read_checkpoint(path);
  if (ck.kind != "denoiser")
    throw std::runtime_error("checkpoint: expected denoiser, found " + ck.kind);
  const auto& ja = ck.meta.at("arch");
  DenoiserArch arch;
  arch.input_dim = ja.at("input_dim").get<int>();
  arch.hidden = ja.at("hidden").get<int>();
  arch.blocks = ja.at("blocks").get<int>();
  arch.time_embed_dim = ja.at("time_embed_dim").get<int>();
  arch.cond_scale = ja.at("cond_scale").get<double>();
  DenoiserModel model(arch, 0);
  fill_params(ck, model.params());
  if (sched_out) *sched_out = schedule_from_json(ck.meta.at("schedule"));
  if (meta_out) *meta_out = ck.meta;
  return model;
}

void save_proxy(const std::filesystem::path& path, const ProxyModel& model,
                const nlohmann::json& training_meta) {
  nlohmann::json meta;
  meta["arch"] = {{"input_dim", model.arch().input_dim},
                  {"hidden", model.arch().hidden},
                  {"layers", model.arch().layers}};
  meta["training"] = training_meta;
  save_checkpoint(path, "proxy", meta, model.params());
}

ProxyModel load_proxy(const std::filesystem::path& path, nlohmann::json* meta_out) {
  const auto ck = read_checkpoint(path);
  if (ck.kind != "proxy") throw std::runtime_error("checkpoint: expected proxy, found " + ck.kind);
  const auto& ja = ck.meta.at("arch");
  ProxyArch arch;
  arch.input_dim = ja.at("input_dim").get<int>();
  arch.hidden = ja.at("hidden").get<int>();
  arch.layers = ja.at("layers").get<int>();
  ProxyModel model(arch, 0);
  fill_params(ck, model.params());
  if (meta_out) *meta_out = ck.meta;
  return model;
}

}  // namespace gtg
