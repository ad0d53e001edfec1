#include "dataset_json.hpp"

#include <fstream>

#include "scrbm/errors.hpp"

namespace scrbm::cli {

Json dataset_to_json(const Dataset& ds) {
  Json j;
  j["n_visible"] = ds.n_visible;
  j["n_classes"] = ds.n_classes;
  j["task_kind"] = std::string(to_string(ds.task_kind));
  j["class_names"] = ds.class_names;
  j["feature_names"] = ds.feature_names;
  j["folds"] = ds.folds;
  Json examples = Json::array();
  for (const auto& ex : ds.examples) {
    Json inputs = Json::array();
    for (const auto& x : ex.inputs) {
      Json active = Json::array();
      for (const auto& f : x.active()) active.push_back(Json::array({f.index, f.value}));
      inputs.push_back(std::move(active));
    }
    Json e;
    e["inputs"] = std::move(inputs);
    e["labels"] = ex.labels;
    if (!ex.scored.empty()) e["scored"] = ex.scored;
    examples.push_back(std::move(e));
  }
  j["examples"] = std::move(examples);
  return j;
}

Dataset dataset_from_json(const Json& j) {
  try {
    Dataset ds;
    ds.n_visible = j.at("n_visible").get<std::size_t>();
    ds.n_classes = j.at("n_classes").get<std::size_t>();
    ds.task_kind = parse_task_kind(j.value("task_kind", std::string("labelling")));
    ds.class_names = j.value("class_names", std::vector<std::string>{});
    ds.feature_names = j.value("feature_names", std::vector<std::string>{});
    ds.folds = j.value("folds", std::vector<int>{});
    for (const auto& e : j.at("examples")) {
      SequenceExample ex;
      for (const auto& step : e.at("inputs")) {
        std::vector<Feature> active;
        for (const auto& pair : step) {
          active.push_back({pair.at(0).get<std::uint32_t>(), pair.at(1).get<double>()});
        }
        ex.inputs.emplace_back(std::move(active));
      }
      ex.labels = e.at("labels").get<std::vector<std::size_t>>();
      ex.scored = e.value("scored", std::vector<std::uint8_t>{});
      ds.examples.push_back(std::move(ex));
    }
    ds.validate();
    return ds;
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed dataset JSON: ") + e.what());
  } catch (const ContractViolation& e) {
    throw DataError(std::string("invalid dataset JSON: ") + e.what());
  }
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << dataset_to_json(ds).dump() << '\n';
}

Dataset load_dataset_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw DataError(path.string() + " is not valid JSON: " + e.what());
  }
  return dataset_from_json(j);
}

}  // namespace scrbm::cli
