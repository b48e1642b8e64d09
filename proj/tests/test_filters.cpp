#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cardioresp/errors.hpp"
#include "cardioresp/filters.hpp"

using namespace cardioresp;

namespace {

constexpr double kPi = std::numbers::pi;

// Analog Butterworth magnitude evaluated at the bilinear-warped frequency.
double butterworth_gain(int order, double fc, double fs, double f, FilterKind kind) {
    double wc = std::tan(kPi * fc / fs);
    double w = std::tan(kPi * f / fs);
    double r = kind == FilterKind::LowPass ? w / wc : wc / w;
    return 1.0 / std::sqrt(1.0 + std::pow(r, 2 * order));
}

std::vector<double> reference_input() {
    std::vector<double> x(300);
    for (std::size_t i = 0; i < x.size(); ++i) {
        double t = i / 100.0;
        x[i] = std::sin(2 * kPi * 0.5 * t) + 0.3 * std::cos(2 * kPi * 7 * t) + 0.01 * t;
    }
    return x;
}

}  // namespace

TEST_CASE("butterworth magnitude follows the analytic response") {
    for (int order : {1, 2, 3, 4, 5, 8}) {
        for (auto kind : {FilterKind::LowPass, FilterKind::HighPass}) {
            for (double fc : {0.7, 2.0, 10.0}) {
                auto sos = butterworth(order, fc, 100.0, kind);
                CHECK(sos.size() == static_cast<std::size_t>((order + 1) / 2));
                for (double f : {0.05, 0.3, 0.7, 1.0, 3.0, 9.0, 10.0, 20.0, 45.0}) {
                    double got = std::abs(frequency_response(sos, f, 100.0));
                    CHECK(got == doctest::Approx(butterworth_gain(order, fc, 100.0, f, kind)).epsilon(1e-9));
                }
            }
        }
    }
}

TEST_CASE("cutoff gain is minus three decibels") {
    auto sos = butterworth(8, 0.7, 100.0, FilterKind::LowPass);
    CHECK(std::abs(frequency_response(sos, 0.7, 100.0)) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
}

TEST_CASE("invalid filter designs are rejected") {
    CHECK_THROWS_AS(butterworth(0, 1.0, 100.0, FilterKind::LowPass), ParameterError);
    CHECK_THROWS_AS(butterworth(4, 0.0, 100.0, FilterKind::LowPass), ParameterError);
    CHECK_THROWS_AS(butterworth(4, 50.0, 100.0, FilterKind::HighPass), ParameterError);
}

TEST_CASE("steady state makes a unit step pass without transient") {
    for (auto kind : {FilterKind::LowPass, FilterKind::HighPass}) {
        auto sos = butterworth(5, 3.0, 100.0, kind);
        auto zi = sosfilt_steady_state(sos);
        std::vector<double> step(50, 1.0);
        auto y = sosfilt(sos, step, zi);
        double dc = std::abs(frequency_response(sos, 0.0, 100.0));
        for (double v : y) CHECK(v == doctest::Approx(dc).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("padding length matches the forward-backward convention") {
    CHECK(filtfilt_padlen(butterworth(4, 2.0, 100.0, FilterKind::LowPass)) == 15);
    CHECK(filtfilt_padlen(butterworth(8, 0.7, 100.0, FilterKind::HighPass)) == 27);
    CHECK(filtfilt_padlen(butterworth(3, 5.0, 100.0, FilterKind::LowPass)) == 12);
}

TEST_CASE("zero-phase filtering reproduces reference values") {
    struct Case {
        int order;
        double fc;
        FilterKind kind;
        std::array<double, 6> expect;
    };
    const std::array<std::size_t, 6> idx{0, 1, 57, 150, 298, 299};
    const Case cases[] = {
        {4, 2.0, FilterKind::LowPass,
         {0.275432155156762, 0.286138120329662, 0.990319094672929, -0.984969197877331, 0.349132170704378,
          0.345593488544935}},
        {8, 0.7, FilterKind::HighPass,
         {-0.0036548164619839, -0.0194734550092521, 0.368264826009363, -0.265154604225165, -0.104584535686717,
          -0.0521592400740724}},
        {3, 5.0, FilterKind::LowPass,
         {0.295978692071603, 0.243390983167523, 1.01522385577419, -1.01870197157873, 0.253543151895951,
          0.301278429716053}},
    };
    auto x = reference_input();
    for (const auto& c : cases) {
        auto y = sosfiltfilt(butterworth(c.order, c.fc, 100.0, c.kind), x);
        for (std::size_t k = 0; k < idx.size(); ++k) CHECK(std::abs(y[idx[k]] - c.expect[k]) < 1e-9);
    }
}

TEST_CASE("zero-phase filtering keeps passband sinusoids in place") {
    auto sos = butterworth(4, 10.0, 100.0, FilterKind::LowPass);
    std::vector<double> x(1000);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2 * kPi * 1.3 * i / 100.0);
    auto y = sosfiltfilt(sos, x);
    for (std::size_t i = 200; i < 800; ++i) CHECK(std::abs(y[i] - x[i]) < 1e-3);
}

TEST_CASE("too-short input is insufficient data") {
    auto sos = butterworth(8, 0.7, 100.0, FilterKind::LowPass);
    std::vector<double> x(27, 1.0);
    CHECK_THROWS_AS(sosfiltfilt(sos, x), InsufficientDataError);
}
