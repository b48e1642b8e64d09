#include <doctest.h>

#include <random>

#include "cardioresp/protocol.hpp"

using namespace cardioresp;

namespace {

std::uint16_t crc_bitwise(const std::vector<std::uint8_t>& bytes) {
    std::uint16_t crc = 0xFFFF;
    for (std::uint8_t b : bytes) {
        crc ^= static_cast<std::uint16_t>(b << 8);
        for (int i = 0; i < 8; ++i) crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021) : static_cast<std::uint16_t>(crc << 1);
    }
    return crc;
}

SensorFrame random_frame(std::mt19937_64& gen, std::size_t n) {
    std::uniform_int_distribution<int> i16(-32768, 32767);
    std::uniform_int_distribution<std::uint32_t> u32;
    SensorFrame f;
    f.node_id = static_cast<std::uint8_t>(gen());
    f.seq = static_cast<std::uint16_t>(gen());
    f.t0_ms = u32(gen);
    f.samples.resize(n);
    for (auto& s : f.samples)
        for (auto& a : s) a = static_cast<std::int16_t>(i16(gen));
    f.skin_temp_centi = static_cast<std::int16_t>(i16(gen));
    f.pressure_pa = u32(gen);
    return f;
}

SensorFrame example_frame() {
    SensorFrame f;
    f.node_id = 1;
    f.samples = {{0, 0, 0}};
    f.pressure_pa = 101325;
    return f;
}

std::vector<std::uint8_t> concat(const std::vector<std::vector<std::uint8_t>>& parts) {
    std::vector<std::uint8_t> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

std::size_t count_kind(const std::vector<StreamEvent>& ev, StreamEvent::Kind k) {
    std::size_t c = 0;
    for (const auto& e : ev) c += e.kind == k;
    return c;
}

}  // namespace

TEST_CASE("crc matches the standard check value and a bitwise oracle") {
    const std::string check = "123456789";
    std::vector<std::uint8_t> bytes(check.begin(), check.end());
    CHECK(crc16_ccitt_false(bytes) == 0x29B1);
    CHECK(crc_bitwise(bytes) == 0x29B1);

    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<std::uint8_t> v(gen() % 200);
        for (auto& b : v) b = static_cast<std::uint8_t>(gen());
        CHECK(crc16_ccitt_false(v) == crc_bitwise(v));
    }
}

TEST_CASE("example frame encodes to the hand-computed bytes") {
    std::vector<std::uint8_t> body{0x01, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00,
                                   0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x01, 0x8B, 0xCD};
    const std::uint16_t crc = crc_bitwise(body);
    CHECK(crc == 0x7EDB);
    std::vector<std::uint8_t> expect{0xA5, 0x5A};
    expect.insert(expect.end(), body.begin(), body.end());
    expect.push_back(static_cast<std::uint8_t>(crc >> 8));
    expect.push_back(static_cast<std::uint8_t>(crc));

    auto bytes = encode_frame(example_frame());
    CHECK(bytes.size() == 24);
    CHECK(bytes == expect);
    CHECK(hex_dump(bytes) == "A5 5A 01 00 00 00 00 00 00 01 00 00 00 00 00 00\n00 00 00 01 8B CD 7E DB\n");
}

TEST_CASE("encoded length is affine in the sample count") {
    std::mt19937_64 gen(1);
    for (std::size_t n = 1; n <= 16; ++n) {
        CHECK(encode_frame(random_frame(gen, n)).size() == 18 + 6 * n);
        CHECK(frame_length(n) == 18 + 6 * n);
    }
    CHECK(frame_length(16) == 114);
}

TEST_CASE("round trip over random frames") {
    std::mt19937_64 gen(99);
    for (int trial = 0; trial < 10000; ++trial) {
        auto f = random_frame(gen, 1 + gen() % 16);
        auto r = decode_frame(encode_frame(f));
        REQUIRE(r.ok());
        CHECK(*r.frame == f);
        CHECK(r.size == frame_length(f.samples.size()));
    }
}

TEST_CASE("encoding rejects invalid sample counts") {
    SensorFrame f;
    CHECK_THROWS_WITH_AS(encode_frame(f), doctest::Contains("samples"), EncodeError);
    f.samples.resize(17);
    CHECK_THROWS_WITH_AS(encode_frame(f), doctest::Contains("samples"), EncodeError);
}

TEST_CASE("decode error kinds") {
    auto bytes = encode_frame(example_frame());

    auto bad = bytes;
    bad[0] = 0xA4;
    CHECK(decode_frame(bad).error == DecodeError::BadSync);
    bad = bytes;
    bad[1] = 0x00;
    CHECK(decode_frame(bad).error == DecodeError::BadSync);

    auto cut = std::vector<std::uint8_t>(bytes.begin(), bytes.end() - 1);
    CHECK(decode_frame(cut).error == DecodeError::Truncated);
    CHECK(decode_frame(std::vector<std::uint8_t>{0xA5, 0x5A, 0x01}).error == DecodeError::Truncated);
    CHECK(decode_frame(std::vector<std::uint8_t>{}).error == DecodeError::Truncated);

    for (std::uint8_t n : {0, 17, 200}) {
        auto b = bytes;
        b[9] = n;
        b.resize(10);
        CHECK(decode_frame(b).error == DecodeError::BadCount);
    }

    auto tail = bytes;
    tail[tail.size() - 1] ^= 0x01;
    CHECK(decode_frame(tail).error == DecodeError::BadCrc);
}

TEST_CASE("every single-bit flip after the sync word is a crc failure") {
    std::mt19937_64 gen(12);
    for (std::size_t n : {1, 7, 16}) {
        auto bytes = encode_frame(random_frame(gen, n));
        for (std::size_t bit = 16; bit < bytes.size() * 8; ++bit) {
            auto b = bytes;
            b[bit / 8] ^= static_cast<std::uint8_t>(0x80u >> (bit % 8));
            auto r = decode_frame(b);
            CHECK_FALSE(r.ok());
            CHECK(r.error == DecodeError::BadCrc);
        }
        for (std::size_t bit = 0; bit < 16; ++bit) {
            auto b = bytes;
            b[bit / 8] ^= static_cast<std::uint8_t>(0x80u >> (bit % 8));
            CHECK(decode_frame(b).error == DecodeError::BadSync);
        }
    }
}

TEST_CASE("trailing bytes after a frame are ignored") {
    auto bytes = encode_frame(example_frame());
    bytes.push_back(0x77);
    auto r = decode_frame(bytes);
    REQUIRE(r.ok());
    CHECK(r.size == 24);
}

TEST_CASE("track_sequence examples and modular oracle") {
    LinkStats s;
    CHECK(track_sequence(s, 5, 6) == 0);
    CHECK(s.gaps_detected == 0);
    CHECK(track_sequence(s, 5, 8) == 2);
    CHECK(s.gaps_detected == 1);
    CHECK(track_sequence(s, 65535, 0) == 0);
    CHECK(s.gaps_detected == 1);

    std::mt19937_64 gen(8);
    for (int trial = 0; trial < 200000; ++trial) {
        const auto prev = static_cast<std::uint16_t>(gen());
        const auto next = static_cast<std::uint16_t>(gen());
        const long oracle = ((static_cast<long>(next) - static_cast<long>(prev) - 1) % 65536 + 65536) % 65536;
        LinkStats t;
        CHECK(track_sequence(t, prev, next) == oracle);
        CHECK(t.gaps_detected == (oracle > 0 ? 1u : 0u));
    }
}

TEST_CASE("samples_to_si unit conversion") {
    SensorFrame f;
    f.t0_ms = 1500;
    f.samples = {{1000, 0, -32768}, {-1000, 1, 32767}};
    f.skin_temp_centi = 3350;
    f.pressure_pa = 101325;
    auto s = samples_to_si(f, 100.0);
    REQUIRE(s.size() == 2);
    CHECK(s[0].ax == doctest::Approx(9.80665));
    CHECK(s[0].ay == 0.0);
    CHECK(s[0].az == doctest::Approx(-32768 * 9.80665 / 1000.0).epsilon(1e-15));
    CHECK(s[0].az == doctest::Approx(-321.3443072).epsilon(1e-9));
    CHECK(s[1].t == doctest::Approx(1.51));
    CHECK(*s[0].skin_temp == doctest::Approx(33.5));
    CHECK(*s[0].pressure == 101325.0);
}

TEST_CASE("hex dump wraps at sixteen bytes") {
    std::vector<std::uint8_t> b(33);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = static_cast<std::uint8_t>(i);
    auto text = hex_dump(b);
    CHECK(text.substr(0, 48) == "00 01 02 03 04 05 06 07 08 09 0A 0B 0C 0D 0E 0F\n");
    CHECK(text.substr(96) == "20\n");
    CHECK(hex_dump(std::vector<std::uint8_t>{}).empty());
}

TEST_CASE("stream decoder recovers every frame of a clean stream") {
    std::mt19937_64 gen(3);
    std::vector<SensorFrame> frames;
    std::vector<std::vector<std::uint8_t>> parts;
    for (int i = 0; i < 50; ++i) {
        frames.push_back(random_frame(gen, 1 + gen() % 16));
        parts.push_back(encode_frame(frames.back()));
    }
    auto stream = concat(parts);
    auto ev = decode_stream(stream);
    REQUIRE(ev.size() == frames.size());
    for (std::size_t i = 0; i < ev.size(); ++i) {
        CHECK(ev[i].kind == StreamEvent::Kind::Frame);
        CHECK(ev[i].frame == frames[i]);
    }

    // byte-at-a-time feeding gives the same result
    StreamDecoder d;
    std::vector<StreamEvent> chunked;
    for (std::uint8_t b : stream) {
        auto e = d.feed(std::span(&b, 1));
        chunked.insert(chunked.end(), e.begin(), e.end());
    }
    auto tail = d.finish();
    chunked.insert(chunked.end(), tail.begin(), tail.end());
    REQUIRE(chunked.size() == ev.size());
    for (std::size_t i = 0; i < ev.size(); ++i) CHECK(chunked[i].frame == ev[i].frame);
}

TEST_CASE("stream decoder resynchronises after garbage") {
    std::mt19937_64 gen(4);
    auto a = random_frame(gen, 16), b = random_frame(gen, 5), c = random_frame(gen, 9);
    std::vector<std::uint8_t> garbage;
    for (int i = 0; i < 57; ++i) {
        auto g = static_cast<std::uint8_t>(gen());
        garbage.push_back(g == kSync0 ? 0x00 : g);
    }
    auto stream = concat({garbage, encode_frame(a), garbage, encode_frame(b), encode_frame(c), {0x13, 0x37}});
    auto ev = decode_stream(stream);
    std::vector<SensorFrame> got;
    for (const auto& e : ev)
        if (e.kind == StreamEvent::Kind::Frame) got.push_back(e.frame);
    REQUIRE(got.size() == 3);
    CHECK(got[0] == a);
    CHECK(got[1] == b);
    CHECK(got[2] == c);
    CHECK(count_kind(ev, StreamEvent::Kind::Malformed) == 3);
    CHECK(count_kind(ev, StreamEvent::Kind::Rejected) == 0);
}

TEST_CASE("a single damaged frame costs exactly that frame") {
    std::mt19937_64 gen(6);
    for (std::size_t n : {1, 4, 16}) {
        auto before = random_frame(gen, 1 + gen() % 16), victim = random_frame(gen, n), after = random_frame(gen, 1 + gen() % 16);
        auto vb = encode_frame(victim);
        for (std::size_t bit = 0; bit < vb.size() * 8; ++bit) {
            auto damaged = vb;
            damaged[bit / 8] ^= static_cast<std::uint8_t>(0x80u >> (bit % 8));
            auto ev = decode_stream(concat({encode_frame(before), damaged, encode_frame(after)}));
            REQUIRE(ev.size() == 3);
            CHECK(ev[0].frame == before);
            CHECK(ev[1].kind == StreamEvent::Kind::Rejected);
            CHECK(ev[2].kind == StreamEvent::Kind::Frame);
            CHECK(ev[2].frame == after);
        }
    }
}

TEST_CASE("a truncated tail is reported as malformed") {
    auto bytes = encode_frame(example_frame());
    auto stream = concat({bytes, std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 15)});
    auto ev = decode_stream(stream);
    REQUIRE(ev.size() == 2);
    CHECK(ev[0].kind == StreamEvent::Kind::Frame);
    CHECK(ev[1].kind == StreamEvent::Kind::Malformed);
    CHECK(ev[1].error == DecodeError::Truncated);
}
