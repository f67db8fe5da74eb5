#pragma once

#include <string>

#include "hkl/engine.hpp"

namespace hkl {

/// JSON text of a model fitted on a grid DAG with a kernel family.
std::string model_to_json(const HklModel& model, int indent = 2);
HklModel model_from_json(const std::string& text);

void save_model(const HklModel& model, const std::string& path);
HklModel load_model(const std::string& path);

}  // namespace hkl
