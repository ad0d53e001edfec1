#include "checkpoint.hpp"

#include <fstream>

#include "scrbm/errors.hpp"

namespace scrbm::cli {

std::string_view to_string(ModelKind k) { return k == ModelKind::Scrbm ? "scrbm" : "rnn"; }

ModelKind parse_model_kind(std::string_view s) {
  if (s == "scrbm") return ModelKind::Scrbm;
  if (s == "rnn") return ModelKind::Rnn;
  throw ContractViolation("unknown model kind '" + std::string(s) + "'");
}

const ModelDims& Checkpoint::dims() const {
  return std::visit([](const auto& p) -> const ModelDims& { return p.dims; }, model);
}

namespace {

template <typename P>
void write_tensors(Json& j, const P& params) {
  const auto tensors = params.tensors();
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    j[std::string(P::kTensorNames[i])] = std::vector<double>(tensors[i].begin(), tensors[i].end());
  }
}

template <typename P>
void read_tensors(const Json& j, P& params) {
  auto tensors = params.tensors();
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const std::string name(P::kTensorNames[i]);
    if (!j.contains(name) || !j[name].is_array()) throw DataError("checkpoint lacks tensor '" + name + "'");
    const auto values = j[name].template get<std::vector<double>>();
    if (values.size() != tensors[i].size()) {
      throw DataError("checkpoint tensor '" + name + "' has " + std::to_string(values.size()) +
                      " entries, expected " + std::to_string(tensors[i].size()));
    }
    std::copy(values.begin(), values.end(), tensors[i].begin());
  }
}

}  // namespace

Json to_json(const Checkpoint& ckpt) {
  const ModelDims& d = ckpt.dims();
  Json j;
  j["version"] = ckpt.version;
  j["model_kind"] = std::string(to_string(ckpt.kind()));
  j["dims"] = {{"n_visible", d.n_visible}, {"n_hidden", d.n_hidden}, {"n_classes", d.n_classes}};
  std::visit([&](const auto& p) { write_tensors(j, p); }, ckpt.model);
  if (const auto* p = std::get_if<ModelParams>(&ckpt.model)) {
    j["options"] = {{"h0", std::string(to_string(p->options.initial_state))},
                    {"free_energy", std::string(to_string(p->options.free_energy))}};
  }
  j["seed"] = ckpt.seed;
  j["epoch"] = ckpt.epoch;
  j["task_kind"] = std::string(to_string(ckpt.task_kind));
  j["class_names"] = ckpt.class_names;
  j["feature_names"] = ckpt.feature_names;
  j["config"] = ckpt.config;
  return j;
}

Checkpoint checkpoint_from_json(const Json& j) {
  try {
    Checkpoint ckpt;
    ckpt.version = j.at("version").get<int>();
    if (ckpt.version != kCheckpointVersion) {
      throw DataError("unsupported checkpoint version " + std::to_string(ckpt.version));
    }
    ModelDims dims;
    dims.n_visible = j.at("dims").at("n_visible").get<std::size_t>();
    dims.n_hidden = j.at("dims").at("n_hidden").get<std::size_t>();
    dims.n_classes = j.at("dims").at("n_classes").get<std::size_t>();
    dims.validate();

    const ModelKind kind = parse_model_kind(j.at("model_kind").get<std::string>());
    if (kind == ModelKind::Scrbm) {
      ModelOptions options;
      if (j.contains("options")) {
        options.initial_state = parse_initial_state(j["options"].value("h0", "learned"));
        options.free_energy = parse_free_energy_form(j["options"].value("free_energy", "recurrent"));
      }
      ModelParams p = ModelParams::zeros(dims, options);
      read_tensors(j, p);
      p.validate();
      ckpt.model = std::move(p);
    } else {
      RnnParams p = RnnParams::zeros(dims);
      read_tensors(j, p);
      p.validate();
      ckpt.model = std::move(p);
    }
    ckpt.seed = j.value("seed", std::uint64_t{0});
    ckpt.epoch = j.value("epoch", std::size_t{0});
    ckpt.task_kind = parse_task_kind(j.value("task_kind", std::string("labelling")));
    ckpt.class_names = j.value("class_names", std::vector<std::string>{});
    ckpt.feature_names = j.value("feature_names", std::vector<std::string>{});
    ckpt.config = j.value("config", Json::object());
    return ckpt;
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  } catch (const ContractViolation& e) {
    throw DataError(std::string("invalid checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json(ckpt).dump(1) << '\n';
  if (!out) throw DataError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw DataError("checkpoint " + path.string() + " is not valid JSON: " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace scrbm::cli
