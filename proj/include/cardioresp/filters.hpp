#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace cardioresp {

struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;  // a0 == 1
};

using Sos = std::vector<Biquad>;

enum class FilterKind { LowPass, HighPass };

Sos butterworth(int order, double cutoff_hz, double fs, FilterKind kind);

std::complex<double> frequency_response(const Sos& sos, double f, double fs);

// Direct form II transposed cascade; `state` holds two delays per section.
std::vector<double> sosfilt(const Sos& sos, std::span<const double> x,
                            std::vector<std::array<double, 2>>& state);

// Per-section delays that make the cascade output a constant for a unit step.
std::vector<std::array<double, 2>> sosfilt_steady_state(const Sos& sos);

std::size_t filtfilt_padlen(const Sos& sos);

// Zero-phase forward-backward filtering with odd extension at both ends.
std::vector<double> sosfiltfilt(const Sos& sos, std::span<const double> x);

}  // namespace cardioresp
