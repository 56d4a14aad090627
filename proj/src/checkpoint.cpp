#include "gtg/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace gtg {

namespace {
constexpr char kMagic[8] = {'G', 'T', 'G', 'C', 'K', 'P', 'T', '1'};
}

void save_checkpoint(const std::filesystem::path& path, const std::string& kind,
                     const nlohmann::json& meta, const nn::ParamStore& params) {
  nlohmann::json header;
  header["kind"] = kind;
  header["precision"] = "f64";
  header["layout"] = "row-major";
  header["meta"] = meta;
  auto tensors = nlohmann::json::array();
  for (const auto& s : params.specs())
    tensors.push_back({{"name", s.name}, {"rows", s.rows}, {"cols", s.cols}});
  header["tensors"] = std::move(tensors);

  const std::string hs = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t hlen = hs.size();
  out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (std::size_t id = 0; id < params.specs().size(); ++id) {
    const auto m = params.mat(static_cast<int>(id));
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c) {
        const double v = m(r, c);
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
      }
  }
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path.string());
}

LoadedCheckpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path.string());
  std::uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  std::string hs(hlen, '\0');
  in.read(hs.data(), static_cast<std::streamsize>(hlen));
  if (!in) throw std::runtime_error("checkpoint: truncated header in " + path.string());
  const auto header = nlohmann::json::parse(hs);
  if (header.at("precision").get<std::string>() != "f64")
    throw std::runtime_error("checkpoint: unsupported precision");

  LoadedCheckpoint ck;
  ck.kind = header.at("kind").get<std::string>();
  ck.meta = header.value("meta", nlohmann::json::object());
  std::int64_t total = 0;
  for (const auto& jt : header.at("tensors")) {
    nn::TensorSpec s;
    s.name = jt.at("name").get<std::string>();
    s.rows = jt.at("rows").get<int>();
    s.cols = jt.at("cols").get<int>();
    s.offset = total;
    total += s.count();
    ck.tensors.push_back(std::move(s));
  }
  ck.flat.resize(total);
  in.read(reinterpret_cast<char*>(ck.flat.data()),
          static_cast<std::streamsize>(total * static_cast<std::int64_t>(sizeof(double))));
  if (!in) throw std::runtime_error("checkpoint: truncated blob in " + path.string());
  return ck;
}

void fill_params(const LoadedCheckpoint& ck, nn::ParamStore& params) {
  if (ck.tensors.size() != params.specs().size())
    throw std::runtime_error("checkpoint: tensor count mismatch");
  for (std::size_t id = 0; id < ck.tensors.size(); ++id) {
    const auto& have = ck.tensors[id];
    const auto& want = params.specs()[id];
    if (have.name != want.name || have.rows != want.rows || have.cols != want.cols)
      throw std::runtime_error("checkpoint: tensor '" + have.name + "' does not match model");
    auto m = params.mat(static_cast<int>(id));
    std::int64_t k = have.offset;
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c) m(r, c) = ck.flat(k++);
  }
}

}  // namespace gtg
