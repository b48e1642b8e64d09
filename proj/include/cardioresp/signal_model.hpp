#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace cardioresp {

inline constexpr double kStandardGravity = 9.80665;

enum class EventKind { HeartBeat, Breath, Cough, BreathHold };

std::string_view to_string(EventKind kind);
EventKind event_kind_from_string(std::string_view name);

struct EventMark {
    EventKind kind = EventKind::HeartBeat;
    double start = 0.0;
    double duration = 0.0;

    bool operator==(const EventMark&) const = default;
};

struct PhysioScenario {
    double duration = 7.2;
    double sample_rate = 100.0;

    double resp_rate = 0.25;
    double resp_amplitude = 0.005;
    double resp_phase = 0.0;  // cycles, added to the respiration phase at t = 0

    double heart_rate = 1.2;
    double heart_impulse_amplitude = 0.0025;
    double heart_impulse_width = 0.1;
    std::optional<double> heart_phase;  // first impulse centre; half a period if unset

    double c1 = 1.0;
    double c2 = 0.05;

    std::array<double, 3> orientation{0.0, 0.0, 1.0};
    bool gravity_included = true;
    double noise_std = 0.0;

    std::vector<EventMark> events;

    double skin_temp = 33.5;
    double skin_temp_ramp = 0.0;  // degC per second
    double ambient_pressure = 101325.0;
};

struct AccelSample {
    double t = 0.0;
    double ax = 0.0;
    double ay = 0.0;
    double az = 0.0;
    std::optional<double> skin_temp;
    std::optional<double> pressure;

    bool operator==(const AccelSample&) const = default;
};

struct SynthResult {
    std::vector<AccelSample> trace;
    std::vector<EventMark> truth;
};

void validate(const PhysioScenario& sc);

std::size_t sample_count(const PhysioScenario& sc);

SynthResult synthesize_trace(const PhysioScenario& sc, std::uint64_t seed);

double displacement_of(const PhysioScenario& sc, double t);

// Noiseless acceleration along the chest normal, before projection and gravity.
double acceleration_of(const PhysioScenario& sc, double t);

std::vector<double> heart_beat_times(const PhysioScenario& sc);
std::vector<double> breath_times(const PhysioScenario& sc);

double heart_peak_acceleration(const PhysioScenario& sc);

}  // namespace cardioresp
