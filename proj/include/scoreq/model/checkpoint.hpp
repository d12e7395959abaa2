#ifndef SCOREQ_MODEL_CHECKPOINT_HPP_
#define SCOREQ_MODEL_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "scoreq/model/model.hpp"

namespace scoreq {

inline constexpr int kCheckpointVersion = 1;

struct TrainingMetadata {
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
  std::string loss_mode;
  std::string stage;
  double criterion = 0.0;

  friend bool operator==(const TrainingMetadata&, const TrainingMetadata&) = default;
};

struct Checkpoint {
  Model model;
  TrainingMetadata metadata;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline nlohmann::json checkpoint_to_json(const Checkpoint& ckpt) {
  const EncoderConfig& c = ckpt.model.config();
  nlohmann::json j;
  j["format"] = "scoreq-checkpoint";
  j["version"] = kCheckpointVersion;
  j["config"] = {{"input_dim", c.input_dim},
                 {"hidden_dims", c.hidden_dims},
                 {"embed_dim", c.embed_dim},
                 {"mos_head", c.mos_head}};
  j["metadata"] = {{"seed", ckpt.metadata.seed},
                   {"epoch", ckpt.metadata.epoch},
                   {"loss_mode", ckpt.metadata.loss_mode},
                   {"stage", ckpt.metadata.stage},
                   {"criterion", ckpt.metadata.criterion}};
  nlohmann::json params = nlohmann::json::array();
  for (const Parameter* p : ckpt.model.parameters()) {
    params.push_back({{"name", p->name},
                      {"rows", p->value.rows()},
                      {"cols", p->value.cols()},
                      {"data", p->value.data()}});
  }
  j["parameters"] = std::move(params);
  return j;
}

inline Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "scoreq-checkpoint") throw CheckpointError("not a scoreq checkpoint");
  if (j.at("version").get<int>() != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + j.at("version").dump());
  }
  EncoderConfig c;
  const auto& jc = j.at("config");
  c.input_dim = jc.at("input_dim").get<std::size_t>();
  c.hidden_dims = jc.at("hidden_dims").get<std::vector<std::size_t>>();
  c.embed_dim = jc.at("embed_dim").get<std::size_t>();
  c.mos_head = jc.at("mos_head").get<bool>();

  Checkpoint ckpt{Model(c, 0), {}};
  const auto& jm = j.at("metadata");
  ckpt.metadata.seed = jm.at("seed").get<std::uint64_t>();
  ckpt.metadata.epoch = jm.at("epoch").get<std::size_t>();
  ckpt.metadata.loss_mode = jm.at("loss_mode").get<std::string>();
  ckpt.metadata.stage = jm.at("stage").get<std::string>();
  ckpt.metadata.criterion = jm.at("criterion").get<double>();

  auto params = ckpt.model.parameters();
  const auto& jp = j.at("parameters");
  if (jp.size() != params.size()) throw CheckpointError("parameter count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& e = jp[i];
    Parameter& p = *params[i];
    if (e.at("name").get<std::string>() != p.name || e.at("rows").get<std::size_t>() != p.value.rows() ||
        e.at("cols").get<std::size_t>() != p.value.cols()) {
      throw CheckpointError("parameter '" + p.name + "' does not match the stored layout");
    }
    p.value = Matrix(p.value.rows(), p.value.cols(), e.at("data").get<std::vector<double>>());
    p.zero_grad();
  }
  return ckpt;
}

inline void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw CheckpointError("cannot write checkpoint " + path.string());
  os << checkpoint_to_json(ckpt).dump(1) << '\n';
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot read checkpoint " + path.string());
  try {
    return checkpoint_from_json(nlohmann::json::parse(is));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("malformed checkpoint " + path.string() + ": " + e.what());
  }
}

}  // namespace scoreq

#endif  // SCOREQ_MODEL_CHECKPOINT_HPP_
