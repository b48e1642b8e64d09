#include "cardioresp/scenario_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "cardioresp/errors.hpp"

namespace cardioresp {

namespace {

const char* const kTraceHeader = "t,ax,ay,az,temp,pressure";

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& field, const std::string& source, std::size_t line) {
    if (field.empty()) throw ParseError(source, line, "empty numeric field");
    char* end = nullptr;
    double v = std::strtod(field.c_str(), &end);
    if (end != field.c_str() + field.size() || !std::isfinite(v))
        throw ParseError(source, line, "not a finite number: '" + field + "'");
    return v;
}

EventMark event_from_json(const KvDocument& doc, const KvEntry& entry, const nlohmann::json& item) {
    if (!item.is_array() || item.size() < 2 || item.size() > 3 || !item[0].is_string())
        doc.fail(entry, "each event must be [\"kind\", start, duration]");
    EventMark e;
    try {
        e.kind = event_kind_from_string(item[0].get<std::string>());
    } catch (const ParameterError& err) {
        doc.fail(entry, err.what());
    }
    if (!item[1].is_number()) doc.fail(entry, "event start must be a number");
    e.start = item[1].get<double>();
    if (item.size() == 3) {
        if (!item[2].is_number()) doc.fail(entry, "event duration must be a number");
        e.duration = item[2].get<double>();
    }
    return e;
}

}  // namespace

PhysioScenario scenario_from_document(const KvDocument& doc) {
    PhysioScenario sc;
    for (const auto& e : doc.entries()) {
        const std::string& k = e.key;
        if (k == "duration") sc.duration = doc.number(e);
        else if (k == "sample_rate") sc.sample_rate = doc.number(e);
        else if (k == "resp_rate") sc.resp_rate = doc.number(e);
        else if (k == "resp_amplitude") sc.resp_amplitude = doc.number(e);
        else if (k == "resp_phase") sc.resp_phase = doc.number(e);
        else if (k == "heart_rate") sc.heart_rate = doc.number(e);
        else if (k == "heart_impulse_amplitude") sc.heart_impulse_amplitude = doc.number(e);
        else if (k == "heart_impulse_width") sc.heart_impulse_width = doc.number(e);
        else if (k == "heart_phase") sc.heart_phase = doc.number(e);
        else if (k == "c1") sc.c1 = doc.number(e);
        else if (k == "c2") sc.c2 = doc.number(e);
        else if (k == "gravity_included") sc.gravity_included = doc.boolean(e);
        else if (k == "noise_std") sc.noise_std = doc.number(e);
        else if (k == "skin_temp") sc.skin_temp = doc.number(e);
        else if (k == "skin_temp_ramp") sc.skin_temp_ramp = doc.number(e);
        else if (k == "ambient_pressure") sc.ambient_pressure = doc.number(e);
        else if (k == "orientation") {
            if (!e.value.is_array() || e.value.size() != 3) doc.fail(e, "expected [x, y, z]");
            for (std::size_t i = 0; i < 3; ++i) {
                if (!e.value[i].is_number()) doc.fail(e, "expected [x, y, z]");
                sc.orientation[i] = e.value[i].get<double>();
            }
        } else if (k == "events") {
            if (!e.value.is_array()) doc.fail(e, "expected an array of events");
            sc.events.clear();
            for (const auto& item : e.value) sc.events.push_back(event_from_json(doc, e, item));
        } else {
            doc.fail(e, "unknown scenario key");
        }
    }
    try {
        validate(sc);
    } catch (const ParameterError& err) {
        throw ParameterError(doc.source() + ": " + err.what());
    }
    return sc;
}

PhysioScenario load_scenario(const std::filesystem::path& path) {
    return scenario_from_document(KvDocument::load(path));
}

std::string scenario_to_text(const PhysioScenario& sc) {
    nlohmann::json events = nlohmann::json::array();
    for (const auto& e : sc.events)
        events.push_back(nlohmann::json::array({std::string(to_string(e.kind)), e.start, e.duration}));

    std::ostringstream out;
    auto put = [&](const char* key, const nlohmann::json& v) { out << key << " = " << kv_format(v) << "\n"; };
    put("duration", sc.duration);
    put("sample_rate", sc.sample_rate);
    put("resp_rate", sc.resp_rate);
    put("resp_amplitude", sc.resp_amplitude);
    put("resp_phase", sc.resp_phase);
    put("heart_rate", sc.heart_rate);
    put("heart_impulse_amplitude", sc.heart_impulse_amplitude);
    put("heart_impulse_width", sc.heart_impulse_width);
    if (sc.heart_phase) put("heart_phase", *sc.heart_phase);
    put("c1", sc.c1);
    put("c2", sc.c2);
    put("orientation", sc.orientation);
    put("gravity_included", sc.gravity_included);
    put("noise_std", sc.noise_std);
    put("events", events);
    put("skin_temp", sc.skin_temp);
    put("skin_temp_ramp", sc.skin_temp_ramp);
    put("ambient_pressure", sc.ambient_pressure);
    return out.str();
}

std::string format_sig9(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

void write_trace_csv(std::ostream& out, const std::vector<AccelSample>& trace) {
    out << kTraceHeader << "\n";
    for (const auto& s : trace) {
        out << format_sig9(s.t) << ',' << format_sig9(s.ax) << ',' << format_sig9(s.ay) << ','
            << format_sig9(s.az) << ',';
        if (s.skin_temp) out << format_sig9(*s.skin_temp);
        out << ',';
        if (s.pressure) out << format_sig9(*s.pressure);
        out << "\n";
    }
}

std::vector<AccelSample> read_trace_csv(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(source, 1, "empty file, expected header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTraceHeader)
        throw ParseError(source, 1, std::string("header must be '") + kTraceHeader + "'");

    std::vector<AccelSample> trace;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto f = split_csv(line);
        if (f.size() != 6) throw ParseError(source, lineno, "expected 6 fields, got " + std::to_string(f.size()));
        AccelSample s;
        s.t = parse_double(f[0], source, lineno);
        s.ax = parse_double(f[1], source, lineno);
        s.ay = parse_double(f[2], source, lineno);
        s.az = parse_double(f[3], source, lineno);
        if (!f[4].empty()) s.skin_temp = parse_double(f[4], source, lineno);
        if (!f[5].empty()) s.pressure = parse_double(f[5], source, lineno);
        if (!trace.empty() && s.t < trace.back().t)
            throw ParseError(source, lineno, "time stamps must be non-decreasing");
        trace.push_back(s);
    }
    return trace;
}

std::vector<AccelSample> load_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return read_trace_csv(in, path.string());
}

nlohmann::json event_to_json(const EventMark& e) {
    return {{"kind", std::string(to_string(e.kind))}, {"start", e.start}, {"duration", e.duration}};
}

void write_events_jsonl(std::ostream& out, const std::vector<EventMark>& events) {
    for (const auto& e : events) out << event_to_json(e).dump() << "\n";
}

}  // namespace cardioresp
