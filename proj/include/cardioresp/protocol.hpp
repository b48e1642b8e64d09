#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cardioresp/errors.hpp"
#include "cardioresp/signal_model.hpp"

namespace cardioresp {

inline constexpr std::uint8_t kSync0 = 0xA5;
inline constexpr std::uint8_t kSync1 = 0x5A;
inline constexpr std::size_t kMaxFrameSamples = 16;
inline constexpr std::size_t kHeaderBytes = 10;  // sync, node, seq, t0, n

constexpr std::size_t frame_length(std::size_t n) { return 2 + 1 + 2 + 4 + 1 + 6 * n + 2 + 4 + 2; }

struct SensorFrame {
    std::uint8_t node_id = 0;
    std::uint16_t seq = 0;
    std::uint32_t t0_ms = 0;
    std::vector<std::array<std::int16_t, 3>> samples;  // milli-g
    std::int16_t skin_temp_centi = 0;
    std::uint32_t pressure_pa = 0;

    bool operator==(const SensorFrame&) const = default;
};

class EncodeError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

enum class DecodeError { BadSync, Truncated, BadCrc, BadCount };

std::string_view to_string(DecodeError e);

struct DecodeResult {
    std::optional<SensorFrame> frame;
    DecodeError error = DecodeError::Truncated;
    std::size_t size = 0;  // bytes consumed on success

    bool ok() const { return frame.has_value(); }
};

// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no final xor.
std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> bytes, std::uint16_t crc = 0xFFFF);

std::vector<std::uint8_t> encode_frame(const SensorFrame& frame);

// Decodes the frame that starts at bytes[0]. Bytes past the frame are ignored.
DecodeResult decode_frame(std::span<const std::uint8_t> bytes);

struct LinkStats {
    std::uint64_t frames_ok = 0;
    std::uint64_t frames_crc_rejected = 0;
    std::uint64_t frames_malformed = 0;
    std::uint64_t gaps_detected = 0;
    std::uint64_t samples_delivered = 0;

    bool operator==(const LinkStats&) const = default;
};

std::uint16_t track_sequence(LinkStats& stats, std::uint16_t prev_seq, std::uint16_t new_seq);

std::vector<AccelSample> samples_to_si(const SensorFrame& frame, double sample_rate);

std::string hex_dump(std::span<const std::uint8_t> bytes);

struct StreamEvent {
    enum class Kind { Frame, Rejected, Malformed };
    Kind kind = Kind::Frame;
    SensorFrame frame;                      // Kind::Frame only
    DecodeError error = DecodeError::BadCrc;  // Rejected / Malformed
    std::size_t offset = 0;                 // stream offset of the first byte
    std::size_t length = 0;
};

// Incremental scanner over a concatenation of frames. A frame whose bytes fail
// an integrity check (CRC, a one-bit-damaged sync word at a frame boundary, or
// a one-bit-damaged sample count) is reported once as Rejected. Bytes that
// cannot be attributed to any frame are reported as Malformed runs, and
// scanning resumes at the next sync word.
class StreamDecoder {
public:
    std::vector<StreamEvent> feed(std::span<const std::uint8_t> bytes);
    std::vector<StreamEvent> finish();

private:
    std::vector<StreamEvent> drain(bool final);
    bool boundary_at(std::size_t pos, bool final) const;
    std::optional<std::size_t> corrected_count_length(std::size_t pos) const;

    std::vector<std::uint8_t> buf_;
    std::size_t pos_ = 0;
    std::size_t base_ = 0;  // stream offset of buf_[0]
    bool at_boundary_ = true;
};

std::vector<StreamEvent> decode_stream(std::span<const std::uint8_t> bytes);

}  // namespace cardioresp
