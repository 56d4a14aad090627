#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "gtg/denoiser.hpp"
#include "gtg/proxy.hpp"

namespace gtg {

// Denoiser checkpoints carry the architecture, the noise-schedule config, and
// free-form training metadata; loading rebuilds the schedule from its config.
void save_denoiser(const std::filesystem::path& path, const DenoiserModel& model,
                   const NoiseSchedule& sched, const nlohmann::json& training_meta);
DenoiserModel load_denoiser(const std::filesystem::path& path, NoiseSchedule* sched_out = nullptr,
                            nlohmann::json* meta_out = nullptr);

void save_proxy(const std::filesystem::path& path, const ProxyModel& model,
                const nlohmann::json& training_meta);
ProxyModel load_proxy(const std::filesystem::path& path, nlohmann::json* meta_out = nullptr);

}  // namespace gtg
