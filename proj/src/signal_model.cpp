#include "cardioresp/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cardioresp/errors.hpp"
#include "cardioresp/rng.hpp"

namespace cardioresp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMaxHoldTaper = 0.5;
constexpr double kCoughAmplitudeFactor = 10.0;
constexpr double kCoughWidth = 0.1;

struct Hold {
    double start;
    double duration;
    double taper;
};

struct Warp {
    double tau;
    double d1;
    double d2;
};

std::vector<Hold> holds_of(const PhysioScenario& sc) {
    std::vector<Hold> holds;
    for (const auto& e : sc.events) {
        if (e.kind == EventKind::BreathHold && e.duration > 0.0)
            holds.push_back({e.start, e.duration, std::min(kMaxHoldTaper, e.duration / 4.0)});
    }
    std::sort(holds.begin(), holds.end(),
              [](const Hold& a, const Hold& b) { return a.start < b.start; });
    return holds;
}

// Respiration time: advances with t outside holds, stops inside them,
// with raised-cosine tapers at both ends of every hold.
Warp warp_at(const std::vector<Hold>& holds, double t) {
    Warp w{t, 1.0, 0.0};
    for (const auto& h : holds) {
        const double s = h.start;
        const double e = h.start + h.duration;
        const double tt = h.taper;
        if (t < s) break;
        if (t >= e) {
            w.tau -= h.duration - tt;
            continue;
        }
        if (t < s + tt) {
            double x = t - s;
            double arg = kPi * x / tt;
            w.tau -= 0.5 * x - tt / (2.0 * kPi) * std::sin(arg);
            w.d1 = 0.5 * (1.0 + std::cos(arg));
            w.d2 = -kPi / (2.0 * tt) * std::sin(arg);
        } else if (t < e - tt) {
            w.tau -= (t - s) - 0.5 * tt;
            w.d1 = 0.0;
            w.d2 = 0.0;
        } else {
            double y = t - (e - tt);
            double arg = kPi * y / tt;
            w.tau -= (t - s) - 0.5 * tt - (0.5 * y - tt / (2.0 * kPi) * std::sin(arg));
            w.d1 = 0.5 * (1.0 - std::cos(arg));
            w.d2 = kPi / (2.0 * tt) * std::sin(arg);
        }
        break;
    }
    return w;
}

double pulse(double x, double width, double height) {
    if (std::abs(x) >= width / 2.0) return 0.0;
    double c = 0.5 * (1.0 + std::cos(2.0 * kPi * x / width));
    return height * c * c;
}

double pulse_dd(double x, double width, double height) {
    if (std::abs(x) >= width / 2.0) return 0.0;
    double k = 2.0 * kPi / width;
    double u = k * x;
    double s = std::sin(u);
    double c = std::cos(u);
    return height * k * k * (s * s - (1.0 + c) * c) / 2.0;
}

double first_beat(const PhysioScenario& sc) {
    return sc.heart_phase ? *sc.heart_phase : 0.5 / sc.heart_rate;
}

// Centres of every impulse that overlaps [0, duration], including a partial one
// before t = 0 when the phase puts it there.
std::vector<double> impulse_centres(const PhysioScenario& sc) {
    std::vector<double> centres;
    if (sc.heart_rate <= 0.0) return centres;
    const double period = 1.0 / sc.heart_rate;
    const double half = sc.heart_impulse_width / 2.0;
    const double phi = first_beat(sc);
    for (long k = -1;; ++k) {
        double c = phi + static_cast<double>(k) * period;
        if (c - half >= sc.duration) break;
        if (c + half > 0.0) centres.push_back(c);
    }
    return centres;
}

std::vector<double> cough_times(const PhysioScenario& sc) {
    std::vector<double> out;
    for (const auto& e : sc.events)
        if (e.kind == EventKind::Cough) out.push_back(e.start);
    return out;
}

struct Evaluator {
    const PhysioScenario& sc;
    std::vector<Hold> holds = holds_of(sc);
    std::vector<double> centres = impulse_centres(sc);
    std::vector<double> coughs = cough_times(sc);

    double omega() const { return 2.0 * kPi * sc.resp_rate; }

    double displacement(double t) const {
        Warp w = warp_at(holds, t);
        double dl = sc.resp_amplitude * std::sin(omega() * w.tau + 2.0 * kPi * sc.resp_phase);
        double dh = 0.0;
        for (double c : centres) dh += pulse(t - c, sc.heart_impulse_width, sc.heart_impulse_amplitude);
        for (double c : coughs)
            dh += pulse(t - c, kCoughWidth, kCoughAmplitudeFactor * sc.heart_impulse_amplitude);
        return sc.c1 * dl + sc.c2 * dh;
    }

    double acceleration(double t) const {
        Warp w = warp_at(holds, t);
        double om = omega();
        double ph = om * w.tau + 2.0 * kPi * sc.resp_phase;
        double al = sc.resp_amplitude *
                    (-om * om * std::sin(ph) * w.d1 * w.d1 + om * std::cos(ph) * w.d2);
        double ah = 0.0;
        for (double c : centres)
            ah += pulse_dd(t - c, sc.heart_impulse_width, sc.heart_impulse_amplitude);
        for (double c : coughs)
            ah += pulse_dd(t - c, kCoughWidth, kCoughAmplitudeFactor * sc.heart_impulse_amplitude);
        return sc.c1 * al + sc.c2 * ah;
    }
};

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::HeartBeat: return "heart_beat";
        case EventKind::Breath: return "breath";
        case EventKind::Cough: return "cough";
        case EventKind::BreathHold: return "breath_hold";
    }
    return "unknown";
}

EventKind event_kind_from_string(std::string_view name) {
    if (name == "heart_beat") return EventKind::HeartBeat;
    if (name == "breath") return EventKind::Breath;
    if (name == "cough") return EventKind::Cough;
    if (name == "breath_hold") return EventKind::BreathHold;
    throw ParameterError("unknown event kind '" + std::string(name) + "'");
}

void validate(const PhysioScenario& sc) {
    auto fail = [](const std::string& msg) { throw ParameterError("invalid scenario: " + msg); };

    if (!(std::isfinite(sc.duration) && sc.duration > 0.0)) fail("duration must be > 0");
    if (!(std::isfinite(sc.sample_rate) && sc.sample_rate > 0.0)) fail("sample_rate must be > 0");
    if (!finite_nonneg(sc.resp_rate)) fail("resp_rate must be >= 0");
    if (!finite_nonneg(sc.resp_amplitude)) fail("resp_amplitude must be >= 0");
    if (!finite_nonneg(sc.heart_rate)) fail("heart_rate must be >= 0");
    if (!finite_nonneg(sc.heart_impulse_amplitude)) fail("heart_impulse_amplitude must be >= 0");
    if (!(std::isfinite(sc.heart_impulse_width) && sc.heart_impulse_width > 0.0))
        fail("heart_impulse_width must be > 0");
    if (sc.heart_rate > 0.0 && !(sc.heart_impulse_width * sc.heart_rate < 1.0))
        fail("heart_impulse_width * heart_rate must be < 1 (impulses overlap)");
    if (!std::isfinite(sc.resp_phase)) fail("resp_phase must be finite");
    if (sc.heart_phase && sc.heart_rate > 0.0 &&
        !(*sc.heart_phase >= 0.0 && *sc.heart_phase < 1.0 / sc.heart_rate))
        fail("heart_phase must lie in [0, 1/heart_rate)");
    if (!std::isfinite(sc.c1) || !std::isfinite(sc.c2)) fail("c1 and c2 must be finite");
    if (!finite_nonneg(sc.noise_std)) fail("noise_std must be >= 0");

    const auto& o = sc.orientation;
    double norm = std::sqrt(o[0] * o[0] + o[1] * o[1] + o[2] * o[2]);
    if (!(std::abs(norm - 1.0) <= 1e-9)) fail("orientation must have unit norm (within 1e-9)");

    if (!std::isfinite(sc.skin_temp) || !std::isfinite(sc.skin_temp_ramp))
        fail("skin_temp must be finite");
    if (!(std::isfinite(sc.ambient_pressure) && sc.ambient_pressure > 0.0))
        fail("ambient_pressure must be > 0");

    for (const auto& e : sc.events) {
        std::string name(to_string(e.kind));
        if (e.kind != EventKind::Cough && e.kind != EventKind::BreathHold)
            fail("scheduled events must be cough or breath_hold, got " + name);
        if (!(std::isfinite(e.start) && e.start >= 0.0)) fail(name + " start must be >= 0");
        if (!finite_nonneg(e.duration)) fail(name + " duration must be >= 0");
        if (e.start + e.duration > sc.duration) fail(name + " must end within the scenario duration");
        if (e.kind == EventKind::BreathHold && e.duration <= 0.0)
            fail("breath_hold duration must be > 0");
    }
    for (EventKind kind : {EventKind::Cough, EventKind::BreathHold}) {
        std::vector<EventMark> same;
        for (const auto& e : sc.events)
            if (e.kind == kind) same.push_back(e);
        std::sort(same.begin(), same.end(),
                  [](const EventMark& a, const EventMark& b) { return a.start < b.start; });
        for (std::size_t i = 1; i < same.size(); ++i) {
            bool overlap = kind == EventKind::Cough
                               ? same[i].start == same[i - 1].start
                               : same[i].start < same[i - 1].start + same[i - 1].duration;
            if (overlap) fail(std::string(to_string(kind)) + " events overlap");
        }
    }
}

std::size_t sample_count(const PhysioScenario& sc) {
    return static_cast<std::size_t>(std::llround(sc.duration * sc.sample_rate));
}

double displacement_of(const PhysioScenario& sc, double t) {
    validate(sc);
    if (!(t >= 0.0 && t <= sc.duration))
        throw RangeError("t = " + std::to_string(t) + " outside [0, duration]");
    return Evaluator{sc}.displacement(t);
}

double acceleration_of(const PhysioScenario& sc, double t) {
    validate(sc);
    if (!(t >= 0.0 && t <= sc.duration))
        throw RangeError("t = " + std::to_string(t) + " outside [0, duration]");
    return Evaluator{sc}.acceleration(t);
}

std::vector<double> heart_beat_times(const PhysioScenario& sc) {
    std::vector<double> out;
    if (sc.heart_rate <= 0.0) return out;
    const double period = 1.0 / sc.heart_rate;
    const double phi = first_beat(sc);
    for (long k = 0;; ++k) {
        double c = phi + static_cast<double>(k) * period;
        if (c >= sc.duration) break;
        out.push_back(c);
    }
    return out;
}

std::vector<double> breath_times(const PhysioScenario& sc) {
    std::vector<double> out;
    if (sc.resp_rate <= 0.0 || sc.resp_amplitude <= 0.0 || sc.c1 == 0.0) return out;
    const auto holds = holds_of(sc);
    // Crest of c1*A*sin(.): phase a quarter cycle when c1 > 0, three quarters when c1 < 0.
    const double crest = sc.c1 > 0.0 ? 0.25 : 0.75;
    const double f = sc.resp_rate;
    const double first_m = std::ceil(sc.resp_phase - crest);
    for (double m = first_m;; m += 1.0) {
        double tau = (crest - sc.resp_phase + m) / f;
        double offset = 0.0;
        bool inside_hold = false;
        for (const auto& h : holds) {
            double tau_s = h.start - offset;
            if (tau < tau_s) break;
            if (tau <= tau_s + h.taper) {
                inside_hold = true;
                break;
            }
            offset += h.duration - h.taper;
        }
        double t = tau + offset;
        if (t >= sc.duration) break;
        if (!inside_hold && tau >= 0.0) out.push_back(t);
    }
    return out;
}

double heart_peak_acceleration(const PhysioScenario& sc) {
    double k = 2.0 * kPi / sc.heart_impulse_width;
    return std::abs(sc.c2) * sc.heart_impulse_amplitude * k * k;
}

SynthResult synthesize_trace(const PhysioScenario& sc, std::uint64_t seed) {
    validate(sc);
    Evaluator ev{sc};
    Rng rng(seed);

    const std::size_t n = sample_count(sc);
    const auto& o = sc.orientation;
    const double g = sc.gravity_included ? kStandardGravity : 0.0;

    SynthResult out;
    out.trace.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double t = static_cast<double>(i) / sc.sample_rate;
        double a = ev.acceleration(t);
        AccelSample s;
        s.t = t;
        s.ax = a * o[0];
        s.ay = a * o[1];
        s.az = a * o[2] + g;
        if (sc.noise_std > 0.0) {
            s.ax += sc.noise_std * rng.normal();
            s.ay += sc.noise_std * rng.normal();
            s.az += sc.noise_std * rng.normal();
        }
        s.skin_temp = sc.skin_temp + sc.skin_temp_ramp * t;
        s.pressure = sc.ambient_pressure;
        out.trace.push_back(s);
    }

    for (double c : heart_beat_times(sc)) out.truth.push_back({EventKind::HeartBeat, c, 0.0});
    for (double c : breath_times(sc)) out.truth.push_back({EventKind::Breath, c, 0.0});
    for (const auto& e : sc.events) out.truth.push_back(e);
    std::stable_sort(out.truth.begin(), out.truth.end(), [](const EventMark& a, const EventMark& b) {
        if (a.start != b.start) return a.start < b.start;
        return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    });
    return out;
}

}  // namespace cardioresp
