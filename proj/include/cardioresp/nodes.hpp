#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cardioresp/dsp.hpp"
#include "cardioresp/protocol.hpp"
#include "cardioresp/signal_model.hpp"

namespace cardioresp {

using Bytes = std::vector<std::uint8_t>;

struct LinkConfig {
    double loss_prob = 0.0;
    double bit_flip_prob = 0.0;
    std::uint64_t seed = 0;
};

void validate(const LinkConfig& cfg);

enum class Impairment { Dropped, Corrupted };

struct ImpairmentEntry {
    std::size_t frame = 0;
    Impairment kind = Impairment::Dropped;
    std::size_t bit = 0;  // flipped bit index within the frame, Corrupted only

    bool operator==(const ImpairmentEntry&) const = default;
};

struct ImpairmentLog {
    std::size_t frames_sent = 0;
    std::vector<ImpairmentEntry> entries;

    std::size_t dropped() const;
    std::size_t corrupted() const;
    // Maximal runs of consecutive dropped frames.
    std::size_t dropped_runs() const;
};

struct ImpairedStream {
    Bytes bytes;
    ImpairmentLog log;
};

// Quantizes to milli-g, centi-degC and whole pascals, then batches and encodes.
std::vector<Bytes> sensor_node_run(const PhysioScenario& sc, std::size_t batch_n, std::uint64_t seed,
                                   std::uint8_t node_id = 1);

std::vector<SensorFrame> quantize_frames(std::span<const AccelSample> trace, std::size_t batch_n,
                                         std::uint8_t node_id = 1);

ImpairedStream impair_link(const std::vector<Bytes>& frames, const LinkConfig& cfg);

struct SessionConfig {
    double sample_rate = 100.0;
    PipelineConfig pipeline;
    std::string session_id;
    std::string scenario_digest;
    std::string config_digest;
    std::size_t max_interpolated_frames = 3;
};

struct Alert {
    double window_start = 0.0;
    double window_end = 0.0;
    std::optional<Ratio> hrr;
    VitalsStatus status = VitalsStatus::Indeterminate;

    bool operator==(const Alert&) const = default;
};

struct Segment {
    double start = 0.0;
    double end = 0.0;
    std::size_t samples = 0;
    std::size_t interpolated = 0;

    bool operator==(const Segment&) const = default;
};

struct SessionRecord {
    std::string session_id;
    std::string scenario_digest;
    std::string config_digest;
    double start_time = 0.0;
    double sample_rate = 100.0;
    LinkStats stats;
    std::vector<Segment> segments;
    std::vector<VitalsReport> reports;
    std::vector<Alert> alerts;
    std::vector<AccelSample> samples;
};

SessionRecord central_node_run(std::span<const std::uint8_t> stream, const SessionConfig& cfg);

std::string digest_hex(std::string_view text);

void save_session(const SessionRecord& rec, const std::filesystem::path& dir);

// Reads session.json and reports.jsonl; samples.csv is not loaded.
SessionRecord load_session(const std::filesystem::path& dir);

Bytes read_capture(const std::filesystem::path& path);
void write_capture(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace cardioresp
