#pragma once

#include <string>

#include "cardioresp/dsp.hpp"
#include "cardioresp/pipeline_io.hpp"
#include "cardioresp/scenario_io.hpp"

namespace support {

inline std::string source_path(const std::string& rel) { return std::string(CARDIORESP_SOURCE_DIR) + "/" + rel; }

inline cardioresp::PhysioScenario preset(const std::string& name) {
    return cardioresp::load_scenario(source_path("scenarios/" + name + ".toml"));
}

inline cardioresp::PipelineConfig config(const std::string& name) {
    return cardioresp::load_config(source_path("configs/" + name + ".toml"));
}

}  // namespace support
