#include "cardioresp/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "cardioresp/errors.hpp"
#include "cardioresp/filters.hpp"

namespace cardioresp {

namespace {

std::size_t samples_for(double seconds, double fs) {
    return static_cast<std::size_t>(std::llround(seconds * fs));
}

bool positive(double x) { return std::isfinite(x) && x > 0.0; }
bool non_negative(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

void validate(const PipelineConfig& c) {
    auto fail = [](const std::string& msg) { throw ParameterError("invalid pipeline config: " + msg); };
    if (!positive(c.gravity_window)) fail("gravity_window must be > 0");
    if (!non_negative(c.integration_detrend_window)) fail("integration_detrend_window must be >= 0");
    if (!positive(c.resp_cutoff)) fail("resp_cutoff must be > 0");
    if (!positive(c.heart_band[0]) || !positive(c.heart_band[1]) || !(c.heart_band[0] < c.heart_band[1]))
        fail("heart_band must be (low, high) with 0 < low < high");
    if (!(c.heart_band[0] >= c.resp_cutoff)) fail("heart_band low edge must be >= resp_cutoff");
    if (c.split_order < 1 || c.upper_order < 1) fail("filter orders must be >= 1");
    if (!positive(c.heart_refractory)) fail("heart_refractory must be > 0");
    if (!positive(c.resp_refractory)) fail("resp_refractory must be > 0");
    if (!non_negative(c.peak_threshold_k) || !non_negative(c.resp_threshold_k) ||
        !non_negative(c.cough_threshold_k))
        fail("threshold multipliers must be >= 0");
    if (!non_negative(c.heart_floor) || !non_negative(c.resp_floor)) fail("relative floors must be >= 0");
    if (!non_negative(c.heart_edge_guard) || !non_negative(c.resp_edge_guard)) fail("edge guards must be >= 0");
    if (!positive(c.cough_min_separation)) fail("cough_min_separation must be > 0");
    if (!non_negative(c.cough_ratio)) fail("cough_ratio must be >= 0");
    if (!non_negative(c.cough_beat_exclusion)) fail("cough_beat_exclusion must be >= 0");
    if (!positive(c.window)) fail("window must be > 0");
    if (!positive(c.effective_hop())) fail("hop must be > 0");
    if (!(c.window >= c.effective_hop())) fail("window must be >= hop");
    if (!positive(c.sea_level_pressure)) fail("sea_level_pressure must be > 0");
    if (!non_negative(c.motion_floor)) fail("motion_floor must be >= 0");
}

Ratio Ratio::of(long num, long den) {
    if (den <= 0 || num < 0) throw ParameterError("ratio needs num >= 0 and den > 0");
    long g = std::gcd(num, den);
    return {num / g, den / g};
}

std::string_view to_string(VitalsStatus s) {
    switch (s) {
        case VitalsStatus::HealthyRange: return "healthy_range";
        case VitalsStatus::OutOfRange: return "out_of_range";
        case VitalsStatus::Indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

VitalsStatus vitals_status_from_string(std::string_view s) {
    if (s == "healthy_range") return VitalsStatus::HealthyRange;
    if (s == "out_of_range") return VitalsStatus::OutOfRange;
    if (s == "indeterminate") return VitalsStatus::Indeterminate;
    throw DataError("unknown status '" + std::string(s) + "'");
}

double magnitude(const AccelSample& s) {
    if (!std::isfinite(s.ax) || !std::isfinite(s.ay) || !std::isfinite(s.az))
        throw DataError("non-finite acceleration at t = " + std::to_string(s.t));
    std::array<double, 3> sq{s.ax * s.ax, s.ay * s.ay, s.az * s.az};
    std::sort(sq.begin(), sq.end());
    return std::sqrt(sq[0] + sq[1] + sq[2]);
}

double median(std::span<const double> x) {
    if (x.empty()) return 0.0;
    std::vector<double> v(x.begin(), x.end());
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

std::vector<double> moving_trend(std::span<const double> x, std::size_t window_samples) {
    const std::size_t n = x.size();
    std::vector<double> out(n);
    if (n == 0) return out;
    if (window_samples <= 1) {
        out.assign(x.begin(), x.end());
        return out;
    }
    const std::size_t h = window_samples / 2;

    double offset = 0.0;
    for (double v : x) offset += v;
    offset /= static_cast<double>(n);

    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + (x[i] - offset);

    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= h ? i - h : 0;
        const std::size_t hi = std::min(n, i + h + 1);
        const double m = static_cast<double>(hi - lo);
        if ((i >= h && i + h + 1 <= n) || hi - lo < 3) {
            out[i] = offset + (prefix[hi] - prefix[lo]) / m;
            continue;
        }
        // Truncated window: fit x ~ a + b*(j - i) and evaluate at j = i.
        double sj = 0.0, sjj = 0.0, sx = 0.0, sjx = 0.0;
        for (std::size_t j = lo; j < hi; ++j) {
            double u = static_cast<double>(j) - static_cast<double>(i);
            double v = x[j] - offset;
            sj += u;
            sjj += u * u;
            sx += v;
            sjx += u * v;
        }
        double den = m * sjj - sj * sj;
        double b = (m * sjx - sj * sx) / den;
        out[i] = offset + (sx - b * sj) / m;
    }
    return out;
}

std::vector<double> cumtrapz(std::span<const double> x, double fs) {
    std::vector<double> y(x.size(), 0.0);
    const double half_dt = 0.5 / fs;
    for (std::size_t i = 1; i < x.size(); ++i) y[i] = y[i - 1] + (x[i] + x[i - 1]) * half_dt;
    return y;
}

double infer_sample_rate(std::span<const AccelSample> trace) {
    if (trace.size() < 2) throw InsufficientDataError("need at least two samples to infer the sample rate");
    const double t0 = trace.front().t;
    const double span = trace.back().t - t0;
    if (!(span > 0.0)) throw DataError("trace time stamps do not advance");
    const double steps = static_cast<double>(trace.size() - 1);
    double fs = steps / span;
    double rounded = std::round(fs);
    if (std::abs(fs - rounded) <= 1e-6 * fs) fs = rounded;
    const double dt = 1.0 / fs;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        double expect = t0 + static_cast<double>(i) * dt;
        double tol = std::max(1e-3 * dt, 1e-8 * std::abs(expect));
        if (std::abs(trace[i].t - expect) > tol)
            throw DataError("trace is not uniformly sampled near t = " + std::to_string(trace[i].t));
    }
    return fs;
}

std::vector<double> remove_gravity(std::span<const AccelSample> trace, double fs, const PipelineConfig& cfg) {
    if (!positive(fs)) throw ParameterError("sample rate must be > 0");
    const double length = static_cast<double>(trace.size()) / fs;
    if (length + 0.5 / fs < cfg.gravity_window)
        throw InsufficientDataError("trace of " + std::to_string(length) + " s is shorter than gravity_window " +
                                    std::to_string(cfg.gravity_window) + " s");
    std::vector<double> mag(trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) mag[i] = magnitude(trace[i]);
    auto trend = moving_trend(mag, samples_for(cfg.gravity_window, fs));
    for (std::size_t i = 0; i < mag.size(); ++i) mag[i] -= trend[i];
    return mag;
}

std::vector<double> integrate_twice(std::span<const double> a, double fs, const PipelineConfig& cfg) {
    if (!positive(fs)) throw ParameterError("sample rate must be > 0");
    const std::size_t w = samples_for(cfg.integration_detrend_window, fs);
    auto stage = [&](std::span<const double> x) {
        auto y = cumtrapz(x, fs);
        if (cfg.integration_detrend_window > 0.0) {
            auto trend = moving_trend(y, w);
            for (std::size_t i = 0; i < y.size(); ++i) y[i] -= trend[i];
        }
        return y;
    };
    auto v = stage(a);
    return stage(v);
}

std::size_t longest_filter_memory(const PipelineConfig& cfg) {
    const int order = std::max(cfg.split_order, cfg.upper_order);
    const auto sections = static_cast<std::size_t>((order + 1) / 2);
    return 3 * (2 * sections + 1 - static_cast<std::size_t>(order % 2));
}

Bands separate_bands(std::span<const double> d, double fs, const PipelineConfig& cfg) {
    if (!positive(fs)) throw ParameterError("sample rate must be > 0");
    const std::size_t need = 4 * longest_filter_memory(cfg);
    if (d.size() < need)
        throw InsufficientDataError("band separation needs " + std::to_string(need) + " samples, got " +
                                    std::to_string(d.size()));
    auto low = butterworth(cfg.split_order, cfg.resp_cutoff, fs, FilterKind::LowPass);
    auto high = butterworth(cfg.split_order, cfg.heart_band[0], fs, FilterKind::HighPass);
    Bands b;
    b.resp = sosfiltfilt(low, d);
    auto hp = sosfiltfilt(high, d);
    if (cfg.heart_band[1] < fs / 2.0) {
        auto upper = butterworth(cfg.upper_order, cfg.heart_band[1], fs, FilterKind::LowPass);
        b.heart = sosfiltfilt(upper, hp);
    } else {
        b.heart = std::move(hp);
    }
    return b;
}

std::vector<double> negative_curvature(std::span<const double> x, double fs) {
    const std::size_t n = x.size();
    std::vector<double> c(n, 0.0);
    if (n < 3) return c;
    const double fs2 = fs * fs;
    for (std::size_t i = 1; i + 1 < n; ++i) c[i] = -(x[i + 1] - 2.0 * x[i] + x[i - 1]) * fs2;
    c[0] = c[1];
    c[n - 1] = c[n - 2];
    return c;
}

std::vector<double> detect_peaks(std::span<const double> x, double fs, const PeakOptions& opt) {
    const std::size_t n = x.size();
    if (n < 3) return {};
    const double m = median(x);
    std::vector<double> dev(n);
    for (std::size_t i = 0; i < n; ++i) dev[i] = std::abs(x[i] - m);
    const double threshold = m + opt.threshold_k * median(dev);

    const std::size_t guard = samples_for(opt.edge_guard, fs);
    const std::size_t first = std::max<std::size_t>(1, guard);
    const std::size_t last = n - 1 < guard ? 0 : std::min(n - 1, n - guard);

    std::vector<std::size_t> cand;
    for (std::size_t i = first; i < last; ++i)
        if (x[i] > x[i - 1] && x[i] >= x[i + 1] && x[i] > threshold) cand.push_back(i);
    std::stable_sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) { return x[a] > x[b]; });

    const auto spacing = static_cast<std::size_t>(std::ceil(opt.refractory * fs - 1e-9));
    std::set<std::size_t> taken;
    for (std::size_t i : cand) {
        auto it = taken.lower_bound(i >= spacing ? i - spacing + 1 : 0);
        if (it != taken.end() && *it < i + spacing) continue;
        taken.insert(i);
    }

    std::vector<std::size_t> keep(taken.begin(), taken.end());
    // Upper-quartile reference, repeated until no candidate falls below the floor.
    while (opt.relative_floor > 0.0 && !keep.empty()) {
        std::vector<double> heights;
        for (std::size_t i : keep) heights.push_back(x[i] - m);
        std::sort(heights.begin(), heights.end(), std::greater<>());
        const double ref = heights[heights.size() / 4];
        if (std::erase_if(keep, [&](std::size_t i) { return x[i] - m < opt.relative_floor * ref; }) == 0) break;
    }

    std::vector<double> times;
    times.reserve(keep.size());
    for (std::size_t i : keep) times.push_back(static_cast<double>(i) / fs);
    return times;
}

std::vector<double> detect_peaks(std::span<const double> x, double fs, double refractory, double threshold_k) {
    return detect_peaks(x, fs, PeakOptions{refractory, threshold_k, 0.0, 0.0});
}

std::vector<double> detect_cough(std::span<const double> a, double fs, const PipelineConfig& cfg,
                                 std::span<const double> beats) {
    const std::size_t n = a.size();
    if (n < 3) return {};
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = std::abs(a[i]);
    const double m = median(x);

    double ordinary = 0.0;
    if (!beats.empty()) {
        std::vector<double> heights;
        for (double t : beats) {
            auto c = static_cast<std::ptrdiff_t>(std::llround(t * fs));
            std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, c - 3);
            std::ptrdiff_t hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n) - 1, c + 3);
            if (lo > hi) continue;
            heights.push_back(*std::max_element(x.begin() + lo, x.begin() + hi + 1) - m);
        }
        ordinary = median(heights);
    }

    auto cand = detect_peaks(x, fs,
                             PeakOptions{cfg.cough_min_separation, cfg.cough_threshold_k, cfg.heart_edge_guard, 0.0});
    std::vector<double> out;
    for (double t : cand) {
        auto i = static_cast<std::size_t>(std::llround(t * fs));
        if (x[i] - m >= cfg.cough_ratio * ordinary) out.push_back(t);
    }
    return out;
}

VitalsStatus classify_hrr(std::optional<Ratio> hrr) {
    if (!hrr) return VitalsStatus::Indeterminate;
    bool healthy = hrr->num >= 3 * hrr->den && hrr->num <= 8 * hrr->den;
    return healthy ? VitalsStatus::HealthyRange : VitalsStatus::OutOfRange;
}

VitalsStatus classify_hrr(std::optional<double> hrr) {
    if (!hrr || std::isnan(*hrr)) return VitalsStatus::Indeterminate;
    return (*hrr >= 3.0 && *hrr <= 8.0) ? VitalsStatus::HealthyRange : VitalsStatus::OutOfRange;
}

double altitude_from_pressure(double pressure, double sea_level_ref) {
    if (!positive(sea_level_ref)) throw ParameterError("sea-level reference pressure must be > 0");
    if (!positive(pressure)) throw ParameterError("pressure must be > 0");
    if (pressure > 1.1 * sea_level_ref) throw ParameterError("pressure exceeds 1.1 x sea-level reference");
    constexpr double T0 = 288.15;
    constexpr double L = 0.0065;
    constexpr double R = 8.3144598;
    constexpr double M = 0.0289644;
    constexpr double exponent = R * L / (kStandardGravity * M);
    return (T0 / L) * (1.0 - std::pow(pressure / sea_level_ref, exponent));
}

VitalsReport count_vitals(const DetectedEvents& events, double window_start, double window_end,
                          const VitalsContext& context) {
    if (!(window_end > window_start)) throw ParameterError("window_end must be greater than window_start");
    auto count = [&](const std::vector<double>& ts) {
        return static_cast<long>(
            std::count_if(ts.begin(), ts.end(), [&](double t) { return t >= window_start && t < window_end; }));
    };
    VitalsReport r;
    r.window_start = window_start;
    r.window_end = window_end;
    r.hr_count = count(events.beats);
    r.rr_count = count(events.breaths);
    const double minutes = (window_end - window_start) / 60.0;
    r.hr_per_min = static_cast<double>(r.hr_count) / minutes;
    r.rr_per_min = static_cast<double>(r.rr_count) / minutes;
    if (r.rr_count > 0) r.hrr = Ratio::of(r.hr_count, r.rr_count);
    r.status = classify_hrr(r.hrr);
    r.skin_temp = context.skin_temp;
    r.ambient_pressure = context.ambient_pressure;
    if (context.ambient_pressure)
        r.altitude = altitude_from_pressure(*context.ambient_pressure, context.sea_level_pressure);
    return r;
}

PipelineResult run_pipeline(std::span<const AccelSample> trace, const PipelineConfig& cfg) {
    validate(cfg);
    const double fs = infer_sample_rate(trace);
    const double t0 = trace.front().t;
    const double length = static_cast<double>(trace.size()) / fs;
    const double slack = 0.5 / fs;
    if (length + slack < cfg.window)
        throw InsufficientDataError("trace of " + std::to_string(length) + " s is shorter than one window (" +
                                    std::to_string(cfg.window) + " s)");

    PipelineResult res;
    auto a = remove_gravity(trace, fs, cfg);
    double peak = 0.0;
    for (double v : a) peak = std::max(peak, std::abs(v));

    if (peak > cfg.motion_floor) {
        auto d = integrate_twice(a, fs, cfg);
        auto bands = separate_bands(d, fs, cfg);
        auto curvature = negative_curvature(bands.heart, fs);
        auto beats = detect_peaks(
            curvature, fs, PeakOptions{cfg.heart_refractory, cfg.peak_threshold_k, cfg.heart_edge_guard, cfg.heart_floor});
        auto breaths = detect_peaks(
            bands.resp, fs, PeakOptions{cfg.resp_refractory, cfg.resp_threshold_k, cfg.resp_edge_guard, cfg.resp_floor});
        auto coughs = detect_cough(a, fs, cfg, beats);
        std::erase_if(beats, [&](double t) {
            return std::any_of(coughs.begin(), coughs.end(),
                               [&](double c) { return std::abs(t - c) <= cfg.cough_beat_exclusion + 1e-9; });
        });
        for (double& t : beats) t += t0;
        for (double& t : breaths) t += t0;
        for (double& t : coughs) t += t0;
        res.events = {std::move(beats), std::move(breaths), std::move(coughs)};
    }

    const double hop = cfg.effective_hop();
    for (std::size_t k = 0;; ++k) {
        const double ws = t0 + static_cast<double>(k) * hop;
        const double we = ws + cfg.window;
        if (we > t0 + length + slack) break;
        VitalsContext ctx;
        ctx.sea_level_pressure = cfg.sea_level_pressure;
        double temp_sum = 0.0, press_sum = 0.0;
        std::size_t temp_n = 0, press_n = 0;
        for (const auto& s : trace) {
            if (s.t < ws || s.t >= we) continue;
            if (s.skin_temp) {
                temp_sum += *s.skin_temp;
                ++temp_n;
            }
            if (s.pressure) {
                press_sum += *s.pressure;
                ++press_n;
            }
        }
        if (temp_n) ctx.skin_temp = temp_sum / static_cast<double>(temp_n);
        if (press_n) ctx.ambient_pressure = press_sum / static_cast<double>(press_n);
        res.reports.push_back(count_vitals(res.events, ws, we, ctx));
    }
    return res;
}

}  // namespace cardioresp
