#pragma once

#include <filesystem>

#include "checkpoint.hpp"
#include "scrbm/data.hpp"

namespace scrbm::cli {

// {"n_visible":M,"n_classes":K,"task_kind":"labelling",
//  "class_names":[...],"feature_names":[...],"folds":[...],
//  "examples":[{"inputs":[[[index,value],...],...],"labels":[...],"scored":[...]}]}
Json dataset_to_json(const Dataset& ds);
Dataset dataset_from_json(const Json& j);

void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset_json(const std::filesystem::path& path);

}  // namespace scrbm::cli
