#include "cardioresp/pipeline_io.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "cardioresp/errors.hpp"

namespace cardioresp {

namespace {

std::optional<double> opt_number(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

nlohmann::json opt_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

PipelineConfig config_from_document(const KvDocument& doc) {
    PipelineConfig c;
    for (const auto& e : doc.entries()) {
        const std::string& k = e.key;
        auto integer = [&]() {
            double v = doc.number(e);
            if (v != static_cast<double>(static_cast<int>(v))) doc.fail(e, "expected an integer");
            return static_cast<int>(v);
        };
        if (k == "gravity_window") c.gravity_window = doc.number(e);
        else if (k == "integration_detrend_window") c.integration_detrend_window = doc.number(e);
        else if (k == "resp_cutoff") c.resp_cutoff = doc.number(e);
        else if (k == "heart_band") {
            if (!e.value.is_array() || e.value.size() != 2 || !e.value[0].is_number() || !e.value[1].is_number())
                doc.fail(e, "expected [low, high]");
            c.heart_band = {e.value[0].get<double>(), e.value[1].get<double>()};
        } else if (k == "split_order") c.split_order = integer();
        else if (k == "upper_order") c.upper_order = integer();
        else if (k == "heart_refractory") c.heart_refractory = doc.number(e);
        else if (k == "resp_refractory") c.resp_refractory = doc.number(e);
        else if (k == "peak_threshold_k") c.peak_threshold_k = doc.number(e);
        else if (k == "resp_threshold_k") c.resp_threshold_k = doc.number(e);
        else if (k == "heart_floor") c.heart_floor = doc.number(e);
        else if (k == "resp_floor") c.resp_floor = doc.number(e);
        else if (k == "heart_edge_guard") c.heart_edge_guard = doc.number(e);
        else if (k == "resp_edge_guard") c.resp_edge_guard = doc.number(e);
        else if (k == "cough_threshold_k") c.cough_threshold_k = doc.number(e);
        else if (k == "cough_min_separation") c.cough_min_separation = doc.number(e);
        else if (k == "cough_ratio") c.cough_ratio = doc.number(e);
        else if (k == "cough_beat_exclusion") c.cough_beat_exclusion = doc.number(e);
        else if (k == "window") c.window = doc.number(e);
        else if (k == "hop") c.hop = doc.number(e);
        else if (k == "sea_level_pressure") c.sea_level_pressure = doc.number(e);
        else if (k == "motion_floor") c.motion_floor = doc.number(e);
        else doc.fail(e, "unknown config key");
    }
    try {
        validate(c);
    } catch (const ParameterError& err) {
        throw ParameterError(doc.source() + ": " + err.what());
    }
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    return config_from_document(KvDocument::load(path));
}

std::string config_to_text(const PipelineConfig& c) {
    std::ostringstream out;
    auto put = [&](const char* key, const nlohmann::json& v) { out << key << " = " << kv_format(v) << "\n"; };
    put("gravity_window", c.gravity_window);
    put("integration_detrend_window", c.integration_detrend_window);
    put("resp_cutoff", c.resp_cutoff);
    put("heart_band", c.heart_band);
    put("split_order", c.split_order);
    put("upper_order", c.upper_order);
    put("heart_refractory", c.heart_refractory);
    put("resp_refractory", c.resp_refractory);
    put("peak_threshold_k", c.peak_threshold_k);
    put("resp_threshold_k", c.resp_threshold_k);
    put("heart_floor", c.heart_floor);
    put("resp_floor", c.resp_floor);
    put("heart_edge_guard", c.heart_edge_guard);
    put("resp_edge_guard", c.resp_edge_guard);
    put("cough_threshold_k", c.cough_threshold_k);
    put("cough_min_separation", c.cough_min_separation);
    put("cough_ratio", c.cough_ratio);
    put("cough_beat_exclusion", c.cough_beat_exclusion);
    put("window", c.window);
    put("hop", c.effective_hop());
    put("sea_level_pressure", c.sea_level_pressure);
    put("motion_floor", c.motion_floor);
    return out.str();
}

std::string format_hrr(const std::optional<Ratio>& hrr) {
    if (!hrr) return "undefined";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", hrr->value());
    return buf;
}

nlohmann::json report_to_json(const VitalsReport& r) {
    nlohmann::json j;
    j["window_start"] = r.window_start;
    j["window_end"] = r.window_end;
    j["hr_count"] = r.hr_count;
    j["rr_count"] = r.rr_count;
    j["hr_per_min"] = r.hr_per_min;
    j["rr_per_min"] = r.rr_per_min;
    j["hrr"] = r.hrr ? nlohmann::json(r.hrr->value()) : nlohmann::json("undefined");
    j["status"] = std::string(to_string(r.status));
    j["skin_temp"] = opt_json(r.skin_temp);
    j["ambient_pressure"] = opt_json(r.ambient_pressure);
    j["altitude"] = opt_json(r.altitude);
    return j;
}

VitalsReport report_from_json(const nlohmann::json& j) {
    try {
        VitalsReport r;
        r.window_start = j.at("window_start").get<double>();
        r.window_end = j.at("window_end").get<double>();
        r.hr_count = j.at("hr_count").get<long>();
        r.rr_count = j.at("rr_count").get<long>();
        r.hr_per_min = j.at("hr_per_min").get<double>();
        r.rr_per_min = j.at("rr_per_min").get<double>();
        const auto& h = j.at("hrr");
        if (h.is_string()) {
            if (h.get<std::string>() != "undefined") throw DataError("hrr must be a number or \"undefined\"");
            if (r.rr_count != 0) throw DataError("hrr is undefined but rr_count > 0");
        } else {
            if (r.rr_count <= 0 || r.hr_count < 0) throw DataError("hrr defined but rr_count is 0");
            r.hrr = Ratio::of(r.hr_count, r.rr_count);
        }
        r.status = vitals_status_from_string(j.at("status").get<std::string>());
        r.skin_temp = opt_number(j, "skin_temp");
        r.ambient_pressure = opt_number(j, "ambient_pressure");
        r.altitude = opt_number(j, "altitude");
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed report: ") + e.what());
    }
}

std::vector<EventMark> detected_marks(const DetectedEvents& ev) {
    std::vector<EventMark> out;
    for (double t : ev.beats) out.push_back({EventKind::HeartBeat, t, 0.0});
    for (double t : ev.breaths) out.push_back({EventKind::Breath, t, 0.0});
    for (double t : ev.coughs) out.push_back({EventKind::Cough, t, 0.0});
    std::stable_sort(out.begin(), out.end(), [](const EventMark& a, const EventMark& b) { return a.start < b.start; });
    return out;
}

std::string summary_line(const VitalsReport& r) {
    char head[64];
    std::snprintf(head, sizeof head, "[%.2f-%.2f]", r.window_start, r.window_end);
    std::ostringstream out;
    out << head << " HR=" << r.hr_count << " RR=" << r.rr_count << " HRR=" << format_hrr(r.hrr) << ' '
        << to_string(r.status);
    return out.str();
}

}  // namespace cardioresp
