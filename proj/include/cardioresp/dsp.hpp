#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cardioresp/signal_model.hpp"

namespace cardioresp {

struct PipelineConfig {
    double gravity_window = 6.0;
    double integration_detrend_window = 8.0;  // 0 disables the detrend
    double resp_cutoff = 0.7;
    std::array<double, 2> heart_band{0.7, 10.0};
    int split_order = 8;  // respiration low-pass and heart high-pass
    int upper_order = 4;  // heart band upper edge

    double heart_refractory = 0.25;
    double resp_refractory = 1.5;
    double peak_threshold_k = 4.0;
    double resp_threshold_k = 0.5;
    double heart_floor = 0.5;
    double resp_floor = 0.25;
    double heart_edge_guard = 0.25;
    double resp_edge_guard = 1.0;

    double cough_threshold_k = 10.0;
    double cough_min_separation = 0.5;
    double cough_ratio = 3.0;
    double cough_beat_exclusion = 0.1;

    double window = 7.2;
    std::optional<double> hop;  // defaults to window

    double sea_level_pressure = 101325.0;
    double motion_floor = 1e-6;

    double effective_hop() const { return hop ? *hop : window; }
};

void validate(const PipelineConfig& cfg);

// Non-negative ratio kept in lowest terms.
struct Ratio {
    long num = 0;
    long den = 1;

    static Ratio of(long num, long den);
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    bool operator==(const Ratio&) const = default;
};

enum class VitalsStatus { HealthyRange, OutOfRange, Indeterminate };

std::string_view to_string(VitalsStatus s);
VitalsStatus vitals_status_from_string(std::string_view s);

struct VitalsContext {
    std::optional<double> skin_temp;
    std::optional<double> ambient_pressure;
    double sea_level_pressure = 101325.0;
};

struct VitalsReport {
    double window_start = 0.0;
    double window_end = 0.0;
    long hr_count = 0;
    long rr_count = 0;
    double hr_per_min = 0.0;
    double rr_per_min = 0.0;
    std::optional<Ratio> hrr;
    VitalsStatus status = VitalsStatus::Indeterminate;
    std::optional<double> skin_temp;
    std::optional<double> ambient_pressure;
    std::optional<double> altitude;

    bool operator==(const VitalsReport&) const = default;
};

struct DetectedEvents {
    std::vector<double> beats;
    std::vector<double> breaths;
    std::vector<double> coughs;
};

struct PeakOptions {
    double refractory = 0.25;
    double threshold_k = 4.0;
    double edge_guard = 0.0;
    double relative_floor = 0.0;
};

double magnitude(const AccelSample& s);

double median(std::span<const double> x);

// Local least-squares line over the centred window of `window_samples`
// (truncated at the ends), evaluated at each sample. Equals the centred moving
// mean wherever the window fits.
std::vector<double> moving_trend(std::span<const double> x, std::size_t window_samples);

std::vector<double> cumtrapz(std::span<const double> x, double fs);

double infer_sample_rate(std::span<const AccelSample> trace);

std::vector<double> remove_gravity(std::span<const AccelSample> trace, double fs, const PipelineConfig& cfg);

std::vector<double> integrate_twice(std::span<const double> a, double fs, const PipelineConfig& cfg);

struct Bands {
    std::vector<double> resp;
    std::vector<double> heart;
};

std::size_t longest_filter_memory(const PipelineConfig& cfg);
Bands separate_bands(std::span<const double> d, double fs, const PipelineConfig& cfg);

std::vector<double> negative_curvature(std::span<const double> x, double fs);

std::vector<double> detect_peaks(std::span<const double> x, double fs, const PeakOptions& opt);
std::vector<double> detect_peaks(std::span<const double> x, double fs, double refractory, double threshold_k);

std::vector<double> detect_cough(std::span<const double> a, double fs, const PipelineConfig& cfg,
                                 std::span<const double> beats);

VitalsStatus classify_hrr(std::optional<Ratio> hrr);
VitalsStatus classify_hrr(std::optional<double> hrr);

VitalsReport count_vitals(const DetectedEvents& events, double window_start, double window_end,
                          const VitalsContext& context);

double altitude_from_pressure(double pressure, double sea_level_ref = 101325.0);

struct PipelineResult {
    DetectedEvents events;
    std::vector<VitalsReport> reports;
};

PipelineResult run_pipeline(std::span<const AccelSample> trace, const PipelineConfig& cfg);

}  // namespace cardioresp
