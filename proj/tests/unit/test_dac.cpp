#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "otfs/dac.hpp"

using namespace otfs;

namespace {

CVector random_signal(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    CVector v(n);
    for (auto& x : v) x = cd(g(rng), g(rng));
    return v;
}

}  // namespace

TEST_CASE("filter responses") {
    const double Ts = 2e-6;
    const auto dirac = InterpolationFilterSpec::dirac(Ts);
    const auto sinc = InterpolationFilterSpec::sinc(50, Ts);
    const auto hold = InterpolationFilterSpec::rect(Ts);
    for (double f : {-3e6, 0.0, 1e5, 7e5}) CHECK(filter_response_sq(dirac, f) == 1.0);

    CHECK(filter_response_sq(sinc, 0.0) == 1.0);
    CHECK(filter_response_sq(sinc, 0.75 / Ts) == 0.0);
    CHECK(filter_response_sq(sinc, 0.5 / Ts) == 0.25);
    CHECK(filter_response_sq(sinc, -0.5 / Ts) == 0.25);

    const double edge = filter_response_sq(hold, 0.5 / Ts);
    CHECK(edge == doctest::Approx(4.0 / (std::numbers::pi * std::numbers::pi)).epsilon(1e-14));
    CHECK(10.0 * std::log10(edge) == doctest::Approx(-3.92).epsilon(1e-3));
    CHECK(filter_response_sq(hold, 1.0 / Ts) < 1e-30);
}

TEST_CASE("sinc_pi and rect") {
    CHECK(sinc_pi(0.0) == 1.0);
    CHECK(std::abs(sinc_pi(3.0)) < 1e-15);
    CHECK(sinc_pi(0.5) == doctest::Approx(2.0 / std::numbers::pi));
    CHECK(rect(0.0) == 1.0);
    CHECK(rect(0.5) == 0.5);
    CHECK(rect(-0.5) == 0.5);
    CHECK(rect(0.51) == 0.0);
}

TEST_CASE("filter spec parsing and validation") {
    CHECK(InterpolationFilterSpec::parse_kind("sinc") == FilterKind::TruncatedSinc);
    CHECK(InterpolationFilterSpec::parse_kind("rect") == FilterKind::Rect);
    CHECK(InterpolationFilterSpec::parse_kind("dirac") == FilterKind::DiracDelta);
    CHECK_THROWS_AS(InterpolationFilterSpec::parse_kind("gauss"), ConfigError);
    CHECK_THROWS_AS(InterpolationFilterSpec::sinc(0).validate(), ConfigError);
    CHECK_THROWS_AS(validate_reconstruction(InterpolationFilterSpec::dirac(), 4), ConfigError);
    CHECK_NOTHROW(validate_reconstruction(InterpolationFilterSpec::dirac(), 1));
}

TEST_CASE("dirac reconstruction is the discrete sequence") {
    const auto x = random_signal(40, 1);
    const auto out = reconstruct(x, InterpolationFilterSpec::dirac(0.5), 1);
    CHECK(out.samples == x);
    CHECK(out.sample_rate == 2.0);
    CHECK(out.origin_time == 0.0);
}

TEST_CASE("zero-order hold") {
    const CVector x = {cd(1, 0), cd(0, 1)};
    const auto out = reconstruct(x, InterpolationFilterSpec::rect(), 4);
    const CVector expect = {1.0, 1.0, 1.0, 1.0, cd(0, 1), cd(0, 1), cd(0, 1), cd(0, 1)};
    CHECK(out.samples == expect);

    const auto y = random_signal(123, 2);
    double ein = 0.0, eout = 0.0;
    for (const auto& v : y) ein += std::norm(v);
    for (const auto& v : reconstruct(y, InterpolationFilterSpec::rect(), 7).samples) eout += std::norm(v);
    CHECK(eout == doctest::Approx(7.0 * ein).epsilon(1e-13));
}

TEST_CASE("truncated sinc impulse response") {
    const int order = 50, L = 100;
    const auto out = reconstruct(CVector{1.0}, InterpolationFilterSpec::sinc(order), L);
    REQUIRE(out.samples.size() == static_cast<std::size_t>(2 * order * L + 1));
    CHECK(out.origin_time == -order);
    double worst = 0.0;
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        const double t = out.origin_time + static_cast<double>(i) / out.sample_rate;
        worst = std::max(worst, std::abs(out.samples[i] - sinc_pi(t)));
    }
    CHECK(worst < 1e-12);
    CHECK(out.samples[static_cast<std::size_t>(order * L)] == cd(1.0, 0.0));
}

TEST_CASE("all-zero input gives all-zero output") {
    for (const auto& f : {InterpolationFilterSpec::sinc(10), InterpolationFilterSpec::rect()})
        for (const auto& v : reconstruct(CVector(20), f, 3).samples) CHECK(v == cd{});
}

TEST_CASE("streaming reconstruction equals batch after the leading tail") {
    const auto x = random_signal(300, 3);
    for (const auto& f : {InterpolationFilterSpec::sinc(6), InterpolationFilterSpec::rect(), InterpolationFilterSpec::dirac()}) {
        const int L = f.kind == FilterKind::DiracDelta ? 1 : 5;
        const auto batch = reconstruct(x, f, L);
        const auto lead = static_cast<std::size_t>(std::llround(-batch.origin_time * batch.sample_rate));

        StreamingReconstructor sr(f, L);
        CVector streamed;
        std::size_t pos = 0;
        for (std::size_t chunk : {1u, 7u, 32u, 100u, 160u}) {
            sr.push(std::span<const cd>(x).subspan(pos, chunk), streamed);
            pos += chunk;
        }
        sr.finish(streamed);
        REQUIRE(streamed.size() + lead == batch.samples.size());
        double worst = 0.0;
        for (std::size_t i = 0; i < streamed.size(); ++i) worst = std::max(worst, std::abs(streamed[i] - batch.samples[i + lead]));
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("longer sinc truncation reconstructs a band-limited tone better") {
    // tone at 0.2 / T_s, compare against the exact continuous waveform away from the edges
    const int n = 2000, L = 4;
    CVector x(n);
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = std::polar(1.0, 2.0 * std::numbers::pi * 0.2 * i);
    double prev = INFINITY;
    for (int order : {10, 50, 200}) {
        const auto out = reconstruct(x, InterpolationFilterSpec::sinc(order), L);
        double err = 0.0;
        for (std::size_t i = 0; i < out.samples.size(); ++i) {
            const double t = out.origin_time + static_cast<double>(i) / out.sample_rate;
            if (t < 400.0 || t > n - 400.0) continue;
            err += std::norm(out.samples[i] - std::polar(1.0, 2.0 * std::numbers::pi * 0.2 * t));
        }
        CHECK(err < prev);
        prev = err;
    }
}
