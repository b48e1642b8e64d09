#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cardioresp/dsp.hpp"
#include "cardioresp/keyvalue.hpp"

namespace cardioresp {

PipelineConfig config_from_document(const KvDocument& doc);
PipelineConfig load_config(const std::filesystem::path& path);
std::string config_to_text(const PipelineConfig& cfg);

// "undefined" or the ratio's decimal value with up to six significant digits.
std::string format_hrr(const std::optional<Ratio>& hrr);

nlohmann::json report_to_json(const VitalsReport& r);
VitalsReport report_from_json(const nlohmann::json& j);

std::vector<EventMark> detected_marks(const DetectedEvents& ev);

// `[0.00-7.20] HR=4 RR=1 HRR=4 healthy_range`
std::string summary_line(const VitalsReport& r);

}  // namespace cardioresp
