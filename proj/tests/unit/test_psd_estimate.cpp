#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "otfs/psd_estimate.hpp"
#include "otfs/waveform.hpp"

using namespace otfs;

namespace {

const double kPi = std::numbers::pi;

CVector random_signal(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    CVector v(n);
    for (auto& x : v) x = cd(g(rng), g(rng));
    return v;
}

// mean over segments of |sum_n x_n e^{-j 2 pi f n / rate}|^2 / (seg * rate), summed directly
std::vector<double> brute_force_periodogram(const CVector& x, double rate, int seg, const std::vector<double>& freqs) {
    const std::size_t segments = x.size() / static_cast<std::size_t>(seg);
    std::vector<double> out(freqs.size(), 0.0);
    for (std::size_t s = 0; s < segments; ++s)
        for (std::size_t j = 0; j < freqs.size(); ++j) {
            cd acc{};
            for (int n = 0; n < seg; ++n)
                acc += x[s * static_cast<std::size_t>(seg) + static_cast<std::size_t>(n)] *
                       std::polar(1.0, -2.0 * kPi * freqs[j] * n / rate);
            out[j] += std::norm(acc) / (seg * rate);
        }
    for (auto& v : out) v /= static_cast<double>(segments);
    return out;
}

}  // namespace

TEST_CASE("periodogram frequency grid") {
    const auto f = periodogram_freqs(8, 4.0);
    CHECK(f == std::vector<double>{-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5});
    const auto g = periodogram_freqs(5, 1.0);
    CHECK(g.front() == doctest::Approx(-0.4));
    CHECK(g[2] == 0.0);
}

TEST_CASE("periodogram equals the brute-force DFT average") {
    for (int seg : {2, 7, 16, 64}) {
        const auto x = random_signal(static_cast<std::size_t>(seg * 9 + 3), static_cast<std::uint64_t>(seg));
        const double rate = 3.5;
        const auto p = periodogram(x, rate, seg);
        const auto ref = brute_force_periodogram(x, rate, seg, p.freqs);
        double worst = 0.0, peak = 0.0;
        for (std::size_t j = 0; j < ref.size(); ++j) {
            worst = std::max(worst, std::abs(p.values[j] - ref[j]));
            peak = std::max(peak, ref[j]);
        }
        CHECK(worst <= 1e-9 * peak);
    }
}

TEST_CASE("periodogram of a tone and of zeros") {
    const int n = 32;
    CVector tone(n);
    for (int i = 0; i < n; ++i) tone[static_cast<std::size_t>(i)] = std::polar(1.0, 2.0 * kPi * 3 * i / n);
    const auto p = periodogram(tone, 1.0, n);
    const std::size_t bin3 = 16 + 3;
    for (std::size_t j = 0; j < p.size(); ++j) {
        if (j == bin3) CHECK(p.values[j] == doctest::Approx(32.0));
        else CHECK(p.values[j] <= 1e-20 * p.values[bin3]);
    }
    for (double v : periodogram(CVector(64), 1.0, 16).values) CHECK(v == 0.0);
    CHECK_THROWS_AS(periodogram(CVector(10), 1.0, 16), InputError);
    CHECK_THROWS_AS(periodogram(CVector(10), 1.0, 1), InputError);
}

TEST_CASE("periodogram satisfies Parseval per segment") {
    const auto x = random_signal(256, 4);
    const double rate = 2.0;
    const auto p = periodogram(x, rate, 256);
    double e = 0.0, s = 0.0;
    for (const auto& v : x) e += std::norm(v);
    for (double v : p.values) s += v;
    CHECK(s * rate == doctest::Approx(e).epsilon(1e-12));
}

TEST_CASE("accumulator result does not depend on chunking") {
    const auto x = random_signal(40 * 33 + 5, 5);
    PeriodogramAccumulator a(33, 1.0), b(33, 1.0);
    a.push(x);
    std::size_t pos = 0;
    std::mt19937 rng(1);
    while (pos < x.size()) {
        const std::size_t c = std::min<std::size_t>(x.size() - pos, 1 + rng() % 50);
        b.push(std::span<const cd>(x).subspan(pos, c));
        pos += c;
    }
    CHECK(a.segments() == 40);
    CHECK(a.result().values == b.result().values);
}

TEST_CASE("nmse and cosine similarity") {
    PsdCurve a{{0.0, 1.0, 2.0, 3.0}, {1.0, 2.0, 3.0, 4.0}};
    CHECK(nmse_db(a, a) <= -300.0);
    CHECK(cosine_similarity(a, a) == doctest::Approx(1.0).epsilon(1e-15));

    PsdCurve b = a;
    for (auto& v : b.values) v *= 2.0;
    CHECK(nmse_db(a.normalized_peak_one(), b.normalized_peak_one()) <= -300.0);
    CHECK(compare_normalized(b, a, 0.0, 4.0).nmse_db <= -300.0);

    PsdCurve c{{0.0, 1.0, 2.0, 3.0}, {0.0, 0.0, 1.0, 1.0}};
    PsdCurve d{{0.0, 1.0, 2.0, 3.0}, {1.0, 1.0, 0.0, 0.0}};
    CHECK(cosine_similarity(c, d) == 0.0);
    // ||c - d||^2 / ||d||^2 = 4 / 2
    CHECK(nmse_db(c, d) == doctest::Approx(10.0 * std::log10(2.0)));

    PsdCurve z{{0.0, 1.0}, {0.0, 0.0}};
    CHECK_THROWS_AS(cosine_similarity(z, z), InputError);
    PsdCurve far{{10.0, 11.0}, {1.0, 1.0}};
    CHECK_THROWS_AS(nmse_db(far, a), InputError);

    // reference on a coarser grid is interpolated linearly
    PsdCurve fine{{0.0, 0.5, 1.0}, {1.0, 1.5, 2.0}};
    PsdCurve coarse{{0.0, 1.0}, {1.0, 2.0}};
    CHECK(nmse_db(fine, coarse) <= -300.0);
}

TEST_CASE("white QPSK stream matches the flat discrete PSD") {
    const auto prof = VarianceProfile(4, 8, 1.0);
    const RandomGridSource src(prof, Constellation::qpsk(), 99);
    const std::size_t frames = 100000;
    const EstimatorSetup setup{InterpolationFilterSpec::dirac(), 1, 0};
    const auto est = estimate_psd([&](std::size_t i) { return otfs_modulate(src.grid(i)).samples; }, 32, frames, setup);
    const auto ref = otfs_psd(prof, setup.filter, est.freqs);
    const auto cmp = compare_normalized(est, ref, -0.5, 0.5);
    CHECK(cmp.nmse_db <= -30.0);
    CHECK(cmp.cosine >= 0.999);
}

TEST_CASE("stream estimator matches the batch periodogram") {
    const auto prof = VarianceProfile(2, 4, 1.0);
    const auto stream = generate_random_stream(prof, Constellation::qpsk(), 50, 3);
    for (const auto& [filter, L] : {std::pair{InterpolationFilterSpec::sinc(3), 4}, std::pair{InterpolationFilterSpec::rect(), 3},
                                    std::pair{InterpolationFilterSpec::dirac(), 1}}) {
        const auto dense = reconstruct(stream, filter, L);
        const auto lead = static_cast<std::size_t>(std::llround(-dense.origin_time * dense.sample_rate));
        const CVector body(dense.samples.begin() + static_cast<std::ptrdiff_t>(lead),
                           dense.samples.begin() + static_cast<std::ptrdiff_t>(lead + 50 * 8 * static_cast<std::size_t>(L)));
        const auto batch = periodogram(body, dense.sample_rate, 8 * L);

        StreamPsdEstimator est(8, {filter, L, 0}, {10, 50});
        for (const auto& f : stream.frames) est.push_frame(f.samples);
        est.finish();
        CHECK(est.segments() == 50);
        REQUIRE(est.snapshots().size() == 2);
        const auto r = est.result();
        double worst = 0.0, peak = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j) {
            worst = std::max(worst, std::abs(r.values[j] - batch.values[j]));
            peak = std::max(peak, batch.values[j]);
        }
        CHECK(worst <= 1e-12 * peak);
        CHECK(est.snapshots()[1].values == r.values);
    }
}

TEST_CASE("autocorrelation: zero stream, diagonal term, period shift") {
    const auto zero = generate_random_stream(VarianceProfile(2, 4), Constellation::qpsk(), 10, 1);
    const std::vector<AutocorrProbe> probes = {{0, 0}, {1, 3}, {5, 2}};
    for (const auto& e : cyclo_autocorr(zero, probes, 8)) {
        CHECK(e.base == cd{});
        CHECK(e.shifted == cd{});
    }

    Eigen::MatrixXd s(2, 4);
    s << 1.0, 2.0, 0.0, 1.0, 0.5, 0.5, 3.0, 0.0;
    const VarianceProfile prof(s);
    const auto stream = generate_random_stream(prof, Constellation::qpsk(), 20000, 8);
    // E|s_eta|^2 = sum_k sigma^2_{l,k} / N with l = eta mod M
    const std::vector<AutocorrProbe> diag = {{0, 0}, {1, 1}, {2, 2}, {3, 3}};
    const auto est = cyclo_autocorr(stream, diag, 8);
    for (std::size_t i = 0; i < diag.size(); ++i) {
        const double expect = s.row(static_cast<Eigen::Index>(i % 2)).sum() / 4.0;
        CHECK(std::abs(est[i].base - expect) < 5.0 * est[i].base_se);
        CHECK(est[i].z_score() < 5.0);
    }
    CHECK_THROWS_AS(cyclo_autocorr(generate_random_stream(prof, Constellation::qpsk(), 1, 1), probes, 8), InputError);

    const auto means = cyclic_mean(stream);
    REQUIRE(means.size() == 8);
    for (const auto& m : means) CHECK(std::abs(m.mean) <= 5.0 * m.se);
}
