#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cardioresp/keyvalue.hpp"
#include "cardioresp/signal_model.hpp"

namespace cardioresp {

PhysioScenario scenario_from_document(const KvDocument& doc);
PhysioScenario load_scenario(const std::filesystem::path& path);
std::string scenario_to_text(const PhysioScenario& sc);

// Nine significant digits, as used by every CSV export.
std::string format_sig9(double x);

void write_trace_csv(std::ostream& out, const std::vector<AccelSample>& trace);
std::vector<AccelSample> read_trace_csv(std::istream& in, const std::string& source = "<trace>");
std::vector<AccelSample> load_trace_csv(const std::filesystem::path& path);

nlohmann::json event_to_json(const EventMark& e);
void write_events_jsonl(std::ostream& out, const std::vector<EventMark>& events);

}  // namespace cardioresp
