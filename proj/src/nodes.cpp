#include "cardioresp/nodes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "cardioresp/errors.hpp"
#include "cardioresp/pipeline_io.hpp"
#include "cardioresp/rng.hpp"
#include "cardioresp/scenario_io.hpp"

namespace cardioresp {

namespace {

template <typename Int>
Int clamp_round(double v) {
    constexpr double lo = static_cast<double>(std::numeric_limits<Int>::min());
    constexpr double hi = static_cast<double>(std::numeric_limits<Int>::max());
    double r = std::round(v);
    if (std::isnan(r)) return Int{0};
    return static_cast<Int>(std::clamp(r, lo, hi));
}

double lerp(double a, double b, double w) { return a + (b - a) * w; }

std::optional<double> lerp_opt(const std::optional<double>& a, const std::optional<double>& b, double w) {
    if (a && b) return lerp(*a, *b, w);
    return a ? a : b;
}

nlohmann::json hrr_json(const std::optional<Ratio>& hrr) {
    return hrr ? nlohmann::json(hrr->value()) : nlohmann::json("undefined");
}

nlohmann::json stats_json(const LinkStats& s) {
    return {{"frames_ok", s.frames_ok},
            {"frames_crc_rejected", s.frames_crc_rejected},
            {"frames_malformed", s.frames_malformed},
            {"gaps_detected", s.gaps_detected},
            {"samples_delivered", s.samples_delivered}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace

void validate(const LinkConfig& cfg) {
    auto prob = [](double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; };
    if (!prob(cfg.loss_prob)) throw ParameterError("loss_prob must lie in [0, 1]");
    if (!prob(cfg.bit_flip_prob)) throw ParameterError("bit_flip_prob must lie in [0, 1]");
}

std::size_t ImpairmentLog::dropped() const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [](const auto& e) { return e.kind == Impairment::Dropped; }));
}

std::size_t ImpairmentLog::corrupted() const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [](const auto& e) { return e.kind == Impairment::Corrupted; }));
}

std::size_t ImpairmentLog::dropped_runs() const {
    std::size_t runs = 0;
    std::optional<std::size_t> prev;
    for (const auto& e : entries) {
        if (e.kind != Impairment::Dropped) continue;
        if (!prev || e.frame != *prev + 1) ++runs;
        prev = e.frame;
    }
    return runs;
}

std::vector<SensorFrame> quantize_frames(std::span<const AccelSample> trace, std::size_t batch_n,
                                         std::uint8_t node_id) {
    if (batch_n < 1 || batch_n > kMaxFrameSamples) throw ParameterError("batch_n must lie in [1, 16]");
    constexpr double milli_g = 1000.0 / kStandardGravity;
    std::vector<SensorFrame> frames;
    for (std::size_t start = 0, k = 0; start < trace.size(); start += batch_n, ++k) {
        const std::size_t end = std::min(trace.size(), start + batch_n);
        const AccelSample& first = trace[start];
        SensorFrame f;
        f.node_id = node_id;
        f.seq = static_cast<std::uint16_t>(k);
        f.t0_ms = clamp_round<std::uint32_t>(first.t * 1000.0);
        for (std::size_t i = start; i < end; ++i) {
            const auto& s = trace[i];
            f.samples.push_back({clamp_round<std::int16_t>(s.ax * milli_g), clamp_round<std::int16_t>(s.ay * milli_g),
                                 clamp_round<std::int16_t>(s.az * milli_g)});
        }
        f.skin_temp_centi = clamp_round<std::int16_t>(first.skin_temp.value_or(0.0) * 100.0);
        f.pressure_pa = clamp_round<std::uint32_t>(first.pressure.value_or(0.0));
        frames.push_back(std::move(f));
    }
    return frames;
}

std::vector<Bytes> sensor_node_run(const PhysioScenario& sc, std::size_t batch_n, std::uint64_t seed,
                                   std::uint8_t node_id) {
    if (batch_n < 1 || batch_n > kMaxFrameSamples) throw ParameterError("batch_n must lie in [1, 16]");
    auto synth = synthesize_trace(sc, seed);
    std::vector<Bytes> out;
    for (const auto& f : quantize_frames(synth.trace, batch_n, node_id)) out.push_back(encode_frame(f));
    return out;
}

ImpairedStream impair_link(const std::vector<Bytes>& frames, const LinkConfig& cfg) {
    validate(cfg);
    Rng rng(cfg.seed);
    ImpairedStream out;
    out.log.frames_sent = frames.size();
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (rng.bernoulli(cfg.loss_prob)) {
            out.log.entries.push_back({i, Impairment::Dropped, 0});
            continue;
        }
        const auto& f = frames[i];
        auto at = out.bytes.size();
        out.bytes.insert(out.bytes.end(), f.begin(), f.end());
        if (!f.empty() && rng.bernoulli(cfg.bit_flip_prob)) {
            std::size_t bit = rng.below(f.size() * 8);
            out.bytes[at + bit / 8] ^= static_cast<std::uint8_t>(0x80u >> (bit % 8));
            out.log.entries.push_back({i, Impairment::Corrupted, bit});
        }
    }
    return out;
}

SessionRecord central_node_run(std::span<const std::uint8_t> stream, const SessionConfig& cfg) {
    if (!(cfg.sample_rate > 0.0 && cfg.sample_rate <= 1000.0))
        throw ParameterError("session sample_rate must lie in (0, 1000] Hz");
    validate(cfg.pipeline);

    SessionRecord rec;
    rec.session_id = cfg.session_id;
    rec.scenario_digest = cfg.scenario_digest;
    rec.config_digest = cfg.config_digest;
    rec.sample_rate = cfg.sample_rate;

    const double fs = cfg.sample_rate;
    std::vector<std::vector<AccelSample>> segs;
    std::vector<std::size_t> interpolated;
    std::uint16_t prev_seq = 0xFFFF;
    std::uint64_t rejected_since_ok = 0;
    long long last_index = -1;

    for (const auto& ev : decode_stream(stream)) {
        if (ev.kind == StreamEvent::Kind::Rejected) {
            ++rec.stats.frames_crc_rejected;
            ++rejected_since_ok;
            continue;
        }
        if (ev.kind == StreamEvent::Kind::Malformed) {
            ++rec.stats.frames_malformed;
            continue;
        }

        const SensorFrame& f = ev.frame;
        ++rec.stats.frames_ok;
        const auto raw_gap = static_cast<std::uint16_t>(f.seq - prev_seq - 1);
        const auto attributed = static_cast<std::uint16_t>(std::min<std::uint64_t>(rejected_since_ok, raw_gap));
        track_sequence(rec.stats, static_cast<std::uint16_t>(prev_seq + attributed), f.seq);
        prev_seq = f.seq;
        rejected_since_ok = 0;

        auto si = samples_to_si(f, fs);
        rec.stats.samples_delivered += si.size();
        const long long idx0 = std::llround(static_cast<double>(f.t0_ms) * fs / 1000.0);
        for (std::size_t i = 0; i < si.size(); ++i) si[i].t = static_cast<double>(idx0 + static_cast<long long>(i)) / fs;

        if (segs.empty()) {
            segs.emplace_back();
            interpolated.push_back(0);
        } else {
            const long long missing = idx0 - last_index - 1;
            if (missing < 0) continue;  // duplicate or out-of-order frame
            if (missing > 0) {
                if (raw_gap >= 1 && raw_gap <= cfg.max_interpolated_frames) {
                    const AccelSample a = segs.back().back();
                    const AccelSample& b = si.front();
                    for (long long j = 1; j <= missing; ++j) {
                        double w = static_cast<double>(j) / static_cast<double>(missing + 1);
                        AccelSample s;
                        s.t = static_cast<double>(last_index + j) / fs;
                        s.ax = lerp(a.ax, b.ax, w);
                        s.ay = lerp(a.ay, b.ay, w);
                        s.az = lerp(a.az, b.az, w);
                        s.skin_temp = lerp_opt(a.skin_temp, b.skin_temp, w);
                        s.pressure = lerp_opt(a.pressure, b.pressure, w);
                        segs.back().push_back(s);
                    }
                    interpolated.back() += static_cast<std::size_t>(missing);
                } else {
                    segs.emplace_back();
                    interpolated.push_back(0);
                }
            }
        }
        segs.back().insert(segs.back().end(), si.begin(), si.end());
        last_index = idx0 + static_cast<long long>(si.size()) - 1;
    }

    const PipelineConfig& pc = cfg.pipeline;
    const double min_length = std::max(pc.window, pc.gravity_window);
    for (std::size_t k = 0; k < segs.size(); ++k) {
        const auto& seg = segs[k];
        rec.segments.push_back({seg.front().t, seg.back().t + 1.0 / fs, seg.size(), interpolated[k]});
        rec.samples.insert(rec.samples.end(), seg.begin(), seg.end());
        const double length = static_cast<double>(seg.size()) / fs;
        if (length + 0.5 / fs < min_length) continue;
        try {
            auto res = run_pipeline(seg, pc);
            rec.reports.insert(rec.reports.end(), res.reports.begin(), res.reports.end());
        } catch (const InsufficientDataError&) {
            continue;
        }
    }
    if (!rec.samples.empty()) rec.start_time = rec.samples.front().t;

    for (const auto& r : rec.reports)
        if (r.status != VitalsStatus::HealthyRange) rec.alerts.push_back({r.window_start, r.window_end, r.hrr, r.status});
    return rec;
}

std::string digest_hex(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void save_session(const SessionRecord& rec, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    nlohmann::json alerts = nlohmann::json::array();
    for (const auto& a : rec.alerts)
        alerts.push_back({{"window_start", a.window_start},
                          {"window_end", a.window_end},
                          {"hrr", hrr_json(a.hrr)},
                          {"status", std::string(to_string(a.status))}});
    nlohmann::json segments = nlohmann::json::array();
    for (const auto& s : rec.segments)
        segments.push_back(
            {{"start", s.start}, {"end", s.end}, {"samples", s.samples}, {"interpolated", s.interpolated}});

    nlohmann::json meta;
    meta["session_id"] = rec.session_id;
    meta["scenario_digest"] = rec.scenario_digest;
    meta["config_digest"] = rec.config_digest;
    meta["start_time"] = rec.start_time;
    meta["sample_rate"] = rec.sample_rate;
    meta["link_stats"] = stats_json(rec.stats);
    meta["segments"] = segments;
    meta["report_count"] = rec.reports.size();
    meta["alerts"] = alerts;
    write_text(dir / "session.json", meta.dump(2) + "\n");

    std::string reports;
    for (const auto& r : rec.reports) reports += report_to_json(r).dump() + "\n";
    write_text(dir / "reports.jsonl", reports);

    std::ostringstream samples;
    write_trace_csv(samples, rec.samples);
    write_text(dir / "samples.csv", samples.str());
}

SessionRecord load_session(const std::filesystem::path& dir) {
    const auto meta_path = dir / "session.json";
    const auto reports_path = dir / "reports.jsonl";
    if (!std::filesystem::is_regular_file(meta_path)) throw DataError("missing " + meta_path.string());
    if (!std::filesystem::is_regular_file(reports_path)) throw DataError("missing " + reports_path.string());

    SessionRecord rec;
    std::ifstream meta_in(meta_path, std::ios::binary);
    nlohmann::json meta = nlohmann::json::parse(meta_in, nullptr, false);
    if (meta.is_discarded() || !meta.is_object()) throw DataError(meta_path.string() + ": not a JSON object");
    try {
        rec.session_id = meta.at("session_id").get<std::string>();
        rec.scenario_digest = meta.at("scenario_digest").get<std::string>();
        rec.config_digest = meta.at("config_digest").get<std::string>();
        rec.start_time = meta.at("start_time").get<double>();
        rec.sample_rate = meta.at("sample_rate").get<double>();
        const auto& ls = meta.at("link_stats");
        rec.stats.frames_ok = ls.at("frames_ok").get<std::uint64_t>();
        rec.stats.frames_crc_rejected = ls.at("frames_crc_rejected").get<std::uint64_t>();
        rec.stats.frames_malformed = ls.at("frames_malformed").get<std::uint64_t>();
        rec.stats.gaps_detected = ls.at("gaps_detected").get<std::uint64_t>();
        rec.stats.samples_delivered = ls.at("samples_delivered").get<std::uint64_t>();
        for (const auto& s : meta.at("segments"))
            rec.segments.push_back({s.at("start").get<double>(), s.at("end").get<double>(),
                                    s.at("samples").get<std::size_t>(), s.at("interpolated").get<std::size_t>()});
        for (const auto& a : meta.at("alerts")) {
            Alert al;
            al.window_start = a.at("window_start").get<double>();
            al.window_end = a.at("window_end").get<double>();
            al.status = vitals_status_from_string(a.at("status").get<std::string>());
            rec.alerts.push_back(al);
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(meta_path.string() + ": " + e.what());
    }

    std::ifstream rin(reports_path, std::ios::binary);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(rin, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw ParseError(reports_path.string(), lineno, "invalid JSON");
        try {
            rec.reports.push_back(report_from_json(j));
        } catch (const DataError& e) {
            throw ParseError(reports_path.string(), lineno, e.what());
        }
    }
    const auto expected = meta.at("report_count").get<std::size_t>();
    if (expected != rec.reports.size())
        throw DataError("session.json lists " + std::to_string(expected) + " reports, reports.jsonl has " +
                        std::to_string(rec.reports.size()));
    for (std::size_t i = 0; i < rec.alerts.size() && i < rec.reports.size(); ++i) {
        for (const auto& r : rec.reports)
            if (r.window_start == rec.alerts[i].window_start) rec.alerts[i].hrr = r.hrr;
    }
    return rec;
}

Bytes read_capture(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_capture(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace cardioresp
