#include "cardioresp/filters.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cardioresp/errors.hpp"

namespace cardioresp {

namespace {

using cd = std::complex<double>;

cd bilinear(cd s, double fs2) { return (fs2 + s) / (fs2 - s); }

void normalize(Biquad& q, FilterKind kind) {
    // Unity gain at DC for low-pass sections, at Nyquist for high-pass ones.
    double num, den;
    if (kind == FilterKind::LowPass) {
        num = q.b0 + q.b1 + q.b2;
        den = 1.0 + q.a1 + q.a2;
    } else {
        num = q.b0 - q.b1 + q.b2;
        den = 1.0 - q.a1 + q.a2;
    }
    double g = den / num;
    q.b0 *= g;
    q.b1 *= g;
    q.b2 *= g;
}

}  // namespace

Sos butterworth(int order, double cutoff_hz, double fs, FilterKind kind) {
    if (order < 1) throw ParameterError("filter order must be >= 1");
    if (!(fs > 0.0)) throw ParameterError("sample rate must be > 0");
    if (!(cutoff_hz > 0.0 && cutoff_hz < fs / 2.0))
        throw ParameterError("cutoff " + std::to_string(cutoff_hz) + " Hz must lie in (0, fs/2)");

    const double fs2 = 2.0 * fs;
    const double warped = fs2 * std::tan(std::numbers::pi * cutoff_hz / fs);
    const double zero = kind == FilterKind::LowPass ? -1.0 : 1.0;

    Sos sos;
    for (int k = 0; k < order / 2; ++k) {
        cd p = std::polar(1.0, std::numbers::pi * (2.0 * k + order + 1) / (2.0 * order));
        cd s = kind == FilterKind::LowPass ? warped * p : warped / p;
        cd z = bilinear(s, fs2);
        Biquad q;
        q.b0 = 1.0;
        q.b1 = -2.0 * zero;
        q.b2 = 1.0;
        q.a1 = -2.0 * z.real();
        q.a2 = std::norm(z);
        normalize(q, kind);
        sos.push_back(q);
    }
    if (order % 2 == 1) {
        double z = bilinear(cd(-warped, 0.0), fs2).real();
        Biquad q;
        q.b0 = 1.0;
        q.b1 = -zero;
        q.a1 = -z;
        normalize(q, kind);
        sos.push_back(q);
    }
    return sos;
}

std::complex<double> frequency_response(const Sos& sos, double f, double fs) {
    cd zinv = std::polar(1.0, -2.0 * std::numbers::pi * f / fs);
    cd h = 1.0;
    for (const auto& q : sos) {
        cd num = q.b0 + zinv * (q.b1 + zinv * q.b2);
        cd den = 1.0 + zinv * (q.a1 + zinv * q.a2);
        h *= num / den;
    }
    return h;
}

std::vector<double> sosfilt(const Sos& sos, std::span<const double> x,
                            std::vector<std::array<double, 2>>& state) {
    state.resize(sos.size(), {0.0, 0.0});
    std::vector<double> y(x.begin(), x.end());
    for (std::size_t s = 0; s < sos.size(); ++s) {
        const Biquad& q = sos[s];
        double z0 = state[s][0];
        double z1 = state[s][1];
        for (double& v : y) {
            double in = v;
            double out = q.b0 * in + z0;
            z0 = q.b1 * in - q.a1 * out + z1;
            z1 = q.b2 * in - q.a2 * out;
            v = out;
        }
        state[s] = {z0, z1};
    }
    return y;
}

std::vector<std::array<double, 2>> sosfilt_steady_state(const Sos& sos) {
    std::vector<std::array<double, 2>> zi;
    double scale = 1.0;
    for (const auto& q : sos) {
        double gain = (q.b0 + q.b1 + q.b2) / (1.0 + q.a1 + q.a2);
        double z1 = q.b2 - q.a2 * gain;
        double z0 = gain - q.b0;
        zi.push_back({scale * z0, scale * z1});
        scale *= gain;
    }
    return zi;
}

std::size_t filtfilt_padlen(const Sos& sos) {
    std::size_t taps = 2 * sos.size() + 1;
    std::size_t b_zero = 0, a_zero = 0;
    for (const auto& q : sos) {
        if (q.b2 == 0.0) ++b_zero;
        if (q.a2 == 0.0) ++a_zero;
    }
    taps -= std::min(b_zero, a_zero);
    return 3 * taps;
}

std::vector<double> sosfiltfilt(const Sos& sos, std::span<const double> x) {
    const std::size_t n = x.size();
    const std::size_t pad = filtfilt_padlen(sos);
    if (n <= pad)
        throw InsufficientDataError("filtfilt needs more than " + std::to_string(pad) + " samples, got " +
                                    std::to_string(n));

    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

    const auto zi = sosfilt_steady_state(sos);

    auto state = zi;
    for (auto& z : state) {
        z[0] *= ext.front();
        z[1] *= ext.front();
    }
    std::vector<double> fwd = sosfilt(sos, ext, state);

    std::reverse(fwd.begin(), fwd.end());
    state = zi;
    for (auto& z : state) {
        z[0] *= fwd.front();
        z[1] *= fwd.front();
    }
    std::vector<double> back = sosfilt(sos, fwd, state);
    std::reverse(back.begin(), back.end());

    return std::vector<double>(back.begin() + static_cast<std::ptrdiff_t>(pad),
                               back.begin() + static_cast<std::ptrdiff_t>(pad + n));
}

}  // namespace cardioresp
