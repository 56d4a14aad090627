#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "gtg/nn.hpp"

namespace gtg {

// Self-describing model container: 8-byte magic, u64 header length, a JSON
// header (kind, precision, tensor table, metadata), then the raw parameter
// blob as little-endian doubles, row-major per tensor in table order.
// Binary doubles make save/load bit-exact.
void save_checkpoint(const std::filesystem::path& path, const std::string& kind,
                     const nlohmann::json& meta, const nn::ParamStore& params);

struct LoadedCheckpoint {
  std::string kind;
  nlohmann::json meta;
  std::vector<nn::TensorSpec> tensors;
  Eigen::VectorXd flat;  // concatenated row-major tensor data
};

LoadedCheckpoint read_checkpoint(const std::filesystem::path& path);

// Copies a loaded blob into a finalized store; tensor table must match the
// store's registered names/shapes exactly.
void fill_params(const LoadedCheckpoint& ck, nn::ParamStore& params);

}  // namespace gtg
