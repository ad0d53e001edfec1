#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "scrbm/data.hpp"
#include "scrbm/model.hpp"
#include "scrbm/rnn.hpp"

namespace scrbm::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kCheckpointVersion = 1;

enum class ModelKind { Scrbm, Rnn };

std::string_view to_string(ModelKind k);
ModelKind parse_model_kind(std::string_view s);

/// Versioned JSON checkpoint. Tensors are stored as flat row-major arrays;
/// vocabularies ride along so held-out files can be encoded the same way.
struct Checkpoint {
  int version = kCheckpointVersion;
  std::variant<ModelParams, RnnParams> model;
  std::vector<std::string> class_names;
  std::vector<std::string> feature_names;
  TaskKind task_kind = TaskKind::Labelling;
  Json config = Json::object();
  std::uint64_t seed = 0;
  std::size_t epoch = 0;

  ModelKind kind() const {
    return std::holds_alternative<ModelParams>(model) ? ModelKind::Scrbm : ModelKind::Rnn;
  }
  const ModelDims& dims() const;
};

Json to_json(const Checkpoint& ckpt);
/// Throws DataError on a malformed document or mismatched array lengths.
Checkpoint checkpoint_from_json(const Json& j);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace scrbm::cli
