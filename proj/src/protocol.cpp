#include "cardioresp/protocol.hpp"

#include <bit>
#include <cstdio>
#include <string>

namespace cardioresp {

namespace {

constexpr std::size_t kCountOffset = 9;

const std::array<std::uint16_t, 256>& crc_table() {
    static const auto table = [] {
        std::array<std::uint16_t, 256> t{};
        for (unsigned i = 0; i < 256; ++i) {
            std::uint16_t c = static_cast<std::uint16_t>(i << 8);
            for (int b = 0; b < 8; ++b) c = (c & 0x8000) ? static_cast<std::uint16_t>((c << 1) ^ 0x1021) : static_cast<std::uint16_t>(c << 1);
            t[i] = c;
        }
        return t;
    }();
    return table;
}

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

std::uint16_t get16(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint16_t>((b[at] << 8) | b[at + 1]);
}

std::uint32_t get32(std::span<const std::uint8_t> b, std::size_t at) {
    return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) | (std::uint32_t{b[at + 2]} << 8) |
           std::uint32_t{b[at + 3]};
}

bool valid_count(std::size_t n) { return n >= 1 && n <= kMaxFrameSamples; }

bool is_frame_length(std::size_t len) {
    return len >= frame_length(1) && len <= frame_length(kMaxFrameSamples) && (len - frame_length(0)) % 6 == 0;
}

bool crc_matches(std::span<const std::uint8_t> frame) {
    const std::size_t len = frame.size();
    return crc16_ccitt_false(frame.subspan(2, len - 4)) == get16(frame, len - 2);
}

// True when `bytes` is exactly one frame length long and its trailing CRC fails.
bool whole_buffer_crc_fails(std::span<const std::uint8_t> bytes) {
    return is_frame_length(bytes.size()) && !crc_matches(bytes);
}

int sync_distance(std::uint8_t a, std::uint8_t b) {
    return std::popcount(static_cast<unsigned>(a ^ kSync0)) + std::popcount(static_cast<unsigned>(b ^ kSync1));
}

SensorFrame parse_fields(std::span<const std::uint8_t> b) {
    SensorFrame f;
    f.node_id = b[2];
    f.seq = get16(b, 3);
    f.t0_ms = get32(b, 5);
    const std::size_t n = b[kCountOffset];
    std::size_t at = kHeaderBytes;
    f.samples.resize(n);
    for (auto& s : f.samples) {
        for (auto& axis : s) {
            axis = static_cast<std::int16_t>(get16(b, at));
            at += 2;
        }
    }
    f.skin_temp_centi = static_cast<std::int16_t>(get16(b, at));
    f.pressure_pa = get32(b, at + 2);
    return f;
}

}  // namespace

std::string_view to_string(DecodeError e) {
    switch (e) {
        case DecodeError::BadSync: return "bad_sync";
        case DecodeError::Truncated: return "truncated";
        case DecodeError::BadCrc: return "bad_crc";
        case DecodeError::BadCount: return "bad_count";
    }
    return "unknown";
}

std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> bytes, std::uint16_t crc) {
    const auto& t = crc_table();
    for (std::uint8_t b : bytes) crc = static_cast<std::uint16_t>((crc << 8) ^ t[((crc >> 8) ^ b) & 0xFF]);
    return crc;
}

std::vector<std::uint8_t> encode_frame(const SensorFrame& f) {
    if (!valid_count(f.samples.size()))
        throw EncodeError("samples: frame must carry 1 to 16 samples, got " + std::to_string(f.samples.size()));
    std::vector<std::uint8_t> out;
    out.reserve(frame_length(f.samples.size()));
    out.push_back(kSync0);
    out.push_back(kSync1);
    out.push_back(f.node_id);
    put16(out, f.seq);
    put32(out, f.t0_ms);
    out.push_back(static_cast<std::uint8_t>(f.samples.size()));
    for (const auto& s : f.samples)
        for (std::int16_t axis : s) put16(out, static_cast<std::uint16_t>(axis));
    put16(out, static_cast<std::uint16_t>(f.skin_temp_centi));
    put32(out, f.pressure_pa);
    put16(out, crc16_ccitt_false(std::span(out).subspan(2)));
    return out;
}

DecodeResult decode_frame(std::span<const std::uint8_t> bytes) {
    DecodeResult r;
    const std::size_t len = bytes.size();
    if ((len >= 1 && bytes[0] != kSync0) || (len >= 2 && bytes[1] != kSync1)) {
        r.error = DecodeError::BadSync;
        return r;
    }
    if (len < kHeaderBytes) {
        r.error = DecodeError::Truncated;
        return r;
    }
    const std::size_t n = bytes[kCountOffset];
    if (!valid_count(n)) {
        r.error = whole_buffer_crc_fails(bytes) ? DecodeError::BadCrc : DecodeError::BadCount;
        return r;
    }
    const std::size_t flen = frame_length(n);
    if (len < flen) {
        r.error = whole_buffer_crc_fails(bytes) ? DecodeError::BadCrc : DecodeError::Truncated;
        return r;
    }
    auto frame = bytes.subspan(0, flen);
    if (!crc_matches(frame)) {
        r.error = DecodeError::BadCrc;
        return r;
    }
    r.frame = parse_fields(frame);
    r.size = flen;
    return r;
}

std::uint16_t track_sequence(LinkStats& stats, std::uint16_t prev_seq, std::uint16_t new_seq) {
    auto gap = static_cast<std::uint16_t>(new_seq - prev_seq - 1);
    if (gap > 0) ++stats.gaps_detected;
    return gap;
}

std::vector<AccelSample> samples_to_si(const SensorFrame& f, double sample_rate) {
    constexpr double per_milli_g = kStandardGravity / 1000.0;
    std::vector<AccelSample> out;
    out.reserve(f.samples.size());
    const double t0 = static_cast<double>(f.t0_ms) / 1000.0;
    for (std::size_t i = 0; i < f.samples.size(); ++i) {
        AccelSample s;
        s.t = t0 + static_cast<double>(i) / sample_rate;
        s.ax = f.samples[i][0] * per_milli_g;
        s.ay = f.samples[i][1] * per_milli_g;
        s.az = f.samples[i][2] * per_milli_g;
        s.skin_temp = f.skin_temp_centi / 100.0;
        s.pressure = static_cast<double>(f.pressure_pa);
        out.push_back(s);
    }
    return out;
}

std::string hex_dump(std::span<const std::uint8_t> bytes) {
    std::string out;
    out.reserve(bytes.size() * 3);
    char hex[4];
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        std::snprintf(hex, sizeof hex, "%02X", bytes[i]);
        out += hex;
        bool line_end = (i % 16 == 15) || i + 1 == bytes.size();
        out += line_end ? '\n' : ' ';
    }
    return out;
}

std::vector<StreamEvent> StreamDecoder::feed(std::span<const std::uint8_t> bytes) {
    buf_.insert(buf_.end(), bytes.begin(), bytes.end());
    return drain(false);
}

std::vector<StreamEvent> StreamDecoder::finish() { return drain(true); }

bool StreamDecoder::boundary_at(std::size_t pos, bool final) const {
    if (pos == buf_.size()) return final;
    if (pos + 2 > buf_.size()) return false;
    return sync_distance(buf_[pos], buf_[pos + 1]) <= 1;
}

std::optional<std::size_t> StreamDecoder::corrected_count_length(std::size_t pos) const {
    const std::uint8_t n = buf_[pos + kCountOffset];
    std::vector<std::uint8_t> tmp;
    for (int bit = 0; bit < 8; ++bit) {
        const std::size_t alt = static_cast<std::uint8_t>(n ^ (1u << bit));
        if (!valid_count(alt)) continue;
        const std::size_t flen = frame_length(alt);
        if (pos + flen > buf_.size()) continue;
        tmp.assign(buf_.begin() + static_cast<std::ptrdiff_t>(pos),
                   buf_.begin() + static_cast<std::ptrdiff_t>(pos + flen));
        tmp[kCountOffset] = static_cast<std::uint8_t>(alt);
        if (crc_matches(tmp)) return flen;
    }
    return std::nullopt;
}

std::vector<StreamEvent> StreamDecoder::drain(bool final) {
    std::vector<StreamEvent> events;
    constexpr std::size_t kMaxLen = frame_length(kMaxFrameSamples);

    auto emit = [&](StreamEvent::Kind kind, DecodeError err, std::size_t from, std::size_t len) {
        StreamEvent e;
        e.kind = kind;
        e.error = err;
        e.offset = base_ + from;
        e.length = len;
        events.push_back(std::move(e));
    };
    auto resync_from = [&](std::size_t from) -> std::size_t {
        for (std::size_t q = from; q + 1 < buf_.size(); ++q)
            if (buf_[q] == kSync0 && buf_[q + 1] == kSync1) return q;
        return buf_.size();
    };

    while (pos_ < buf_.size()) {
        const std::size_t avail = buf_.size() - pos_;
        if (avail < 2 && !final) break;

        const bool exact = avail >= 2 && buf_[pos_] == kSync0 && buf_[pos_ + 1] == kSync1;
        const bool damaged = !exact && at_boundary_ && avail >= 2 && sync_distance(buf_[pos_], buf_[pos_ + 1]) == 1;

        if (exact || damaged) {
            if (avail < kHeaderBytes) {
                if (!final) break;
                emit(StreamEvent::Kind::Malformed, DecodeError::Truncated, pos_, avail);
                pos_ = buf_.size();
                break;
            }
            const std::size_t n = buf_[pos_ + kCountOffset];
            const bool count_ok = valid_count(n);
            const std::size_t flen = count_ok ? frame_length(n) : 0;
            const std::size_t want = (count_ok ? flen : kMaxLen) + 2;
            if (avail < want && !final) break;

            if (count_ok && avail >= flen) {
                std::span<const std::uint8_t> frame(buf_.data() + pos_, flen);
                if (crc_matches(frame)) {
                    if (exact) {
                        StreamEvent e;
                        e.kind = StreamEvent::Kind::Frame;
                        e.frame = parse_fields(frame);
                        e.offset = base_ + pos_;
                        e.length = flen;
                        events.push_back(std::move(e));
                    } else {
                        emit(StreamEvent::Kind::Rejected, DecodeError::BadSync, pos_, flen);
                    }
                    pos_ += flen;
                    at_boundary_ = true;
                    continue;
                }
            }
            if (auto fixed = corrected_count_length(pos_)) {
                emit(StreamEvent::Kind::Rejected, count_ok ? DecodeError::BadCrc : DecodeError::BadCount, pos_, *fixed);
                pos_ += *fixed;
                at_boundary_ = true;
                continue;
            }
            if (count_ok && avail >= flen && boundary_at(pos_ + flen, final)) {
                emit(StreamEvent::Kind::Rejected, DecodeError::BadCrc, pos_, flen);
                pos_ += flen;
                at_boundary_ = true;
                continue;
            }
            if (count_ok && avail < flen) {
                // Only reachable at end of stream.
                emit(StreamEvent::Kind::Malformed, DecodeError::Truncated, pos_, avail);
                pos_ = buf_.size();
                break;
            }
            if (exact) {
                std::size_t next = resync_from(pos_ + 2);
                if (next == buf_.size() && !final) break;
                emit(StreamEvent::Kind::Rejected, count_ok ? DecodeError::BadCrc : DecodeError::BadCount, pos_,
                     next - pos_);
                pos_ = next;
                at_boundary_ = false;
                continue;
            }
        }

        std::size_t next = resync_from(pos_ + 1);
        if (next == buf_.size() && !final) {
            // Keep a possible first sync byte for the next feed.
            std::size_t keep_from = buf_.back() == kSync0 ? buf_.size() - 1 : buf_.size();
            if (keep_from > pos_) {
                emit(StreamEvent::Kind::Malformed, DecodeError::BadSync, pos_, keep_from - pos_);
                pos_ = keep_from;
                at_boundary_ = false;
            }
            break;
        }
        emit(StreamEvent::Kind::Malformed, DecodeError::BadSync, pos_, next - pos_);
        pos_ = next;
        at_boundary_ = false;
    }

    if (pos_ > 0) {
        buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(pos_));
        base_ += pos_;
        pos_ = 0;
    }
    return events;
}

std::vector<StreamEvent> decode_stream(std::span<const std::uint8_t> bytes) {
    StreamDecoder d;
    auto events = d.feed(bytes);
    auto tail = d.finish();
    events.insert(events.end(), tail.begin(), tail.end());
    return events;
}

}  // namespace cardioresp
