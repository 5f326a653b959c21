#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "otfs/waveform.hpp"

using namespace otfs;

namespace {

const double kPi = std::numbers::pi;

DelayDopplerGrid random_grid(int M, int N, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    DelayDopplerGrid X(M, N);
    for (int l = 0; l < M; ++l)
        for (int k = 0; k < N; ++k) X(l, k) = cd(g(rng), g(rng));
    return X;
}

// samples[nM + l] = (1/sqrt N) sum_k x_{l,k} e^{j 2 pi k n / N}, summed directly
CVector brute_force_otfs(const DelayDopplerGrid& X) {
    const int M = X.M(), N = X.N();
    CVector s(static_cast<std::size_t>(M * N));
    for (int n = 0; n < N; ++n)
        for (int l = 0; l < M; ++l) {
            cd acc{};
            for (int k = 0; k < N; ++k) acc += X(l, k) * std::polar(1.0, 2.0 * kPi * k * n / N);
            s[static_cast<std::size_t>(n * M + l)] = acc / std::sqrt(static_cast<double>(N));
        }
    return s;
}

double max_abs_diff(const CVector& a, const CVector& b) {
    REQUIRE(a.size() == b.size());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double norm2(const CVector& v) {
    double s = 0.0;
    for (const auto& x : v) s += std::norm(x);
    return s;
}

}  // namespace

TEST_CASE("dft_matrix hand values") {
    CHECK(dft_matrix(1)(0, 0) == cd(1.0, 0.0));
    const auto F2 = dft_matrix(2);
    const double h = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(F2(0, 0) - h) < 1e-15);
    CHECK(std::abs(F2(1, 1) + h) < 1e-15);
    CHECK(std::abs(dft_matrix(4)(1, 1) - cd(0.0, -0.5)) < 1e-15);
}

TEST_CASE("dft_matrix is unitary") {
    for (int N : {1, 3, 8, 17, 64}) {
        const auto F = dft_matrix(N);
        const Eigen::MatrixXcd I = F * F.adjoint();
        CHECK((I - Eigen::MatrixXcd::Identity(N, N)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("otfs_modulate matches the direct double sum") {
    std::mt19937_64 rng(5);
    for (int M : {1, 2, 3, 4, 8})
        for (int N : {1, 2, 5, 8}) {
            const auto X = random_grid(M, N, rng);
            const auto s = otfs_modulate(X).samples;
            const auto ref = brute_force_otfs(X);
            CHECK(max_abs_diff(s, ref) <= 1e-10 * std::sqrt(norm2(ref)));
        }
}

TEST_CASE("otfs_modulate hand example and degenerate cases") {
    DelayDopplerGrid X(2, 2);
    X(0, 0) = 1.0;
    const auto s = otfs_modulate(X).samples;
    const double h = 1.0 / std::sqrt(2.0);
    CHECK(max_abs_diff(s, {h, 0.0, h, 0.0}) < 1e-15);

    const auto z = otfs_modulate(DelayDopplerGrid(3, 4)).samples;
    for (const auto& v : z) CHECK(v == cd{});

    // M = 1 is a single inverse DFT, same as OFDM
    std::mt19937_64 rng(1);
    const auto Y = random_grid(1, 16, rng);
    CHECK(max_abs_diff(otfs_modulate(Y).samples, ofdm_modulate(Y).samples) < 1e-13);
    const Eigen::VectorXcd idft = dft_matrix(16).adjoint() * Y.matrix().row(0).transpose();
    const auto o = otfs_modulate(Y).samples;
    for (int n = 0; n < 16; ++n) CHECK(std::abs(o[static_cast<std::size_t>(n)] - idft(n)) < 1e-13);
}

TEST_CASE("ofdm_modulate hand example") {
    DelayDopplerGrid X(2, 2);
    X(0, 0) = 1.0;
    X(1, 1) = 1.0;
    const double h = 1.0 / std::sqrt(2.0);
    CHECK(max_abs_diff(ofdm_modulate(X).samples, {h, h, h, -h}) < 1e-15);
}

TEST_CASE("modulators preserve energy") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const auto X = random_grid(1 + trial % 7, 1 + (trial * 3) % 11, rng);
        const double e = X.matrix().squaredNorm();
        CHECK(std::abs(norm2(otfs_modulate(X).samples) - e) <= 1e-10 * e);
        CHECK(std::abs(norm2(ofdm_modulate(X).samples) - e) <= 1e-10 * e);
    }
}

TEST_CASE("OTFS is the time interleaving of the OFDM rows") {
    std::mt19937_64 rng(3);
    const int M = 4, N = 8;
    const auto X = random_grid(M, N, rng);
    const auto s = otfs_modulate(X).samples;
    const auto o = ofdm_modulate(X).samples;
    for (int l = 0; l < M; ++l)
        for (int n = 0; n < N; ++n)
            CHECK(std::abs(s[static_cast<std::size_t>(n * M + l)] - o[static_cast<std::size_t>(l * N + n)]) < 1e-13);
}

TEST_CASE("CEP-OFDM components") {
    DelayDopplerGrid X(2, 2);
    X(0, 0) = 1.0;
    X(1, 0) = 1.0;
    const double h = 1.0 / std::sqrt(2.0);
    CHECK(max_abs_diff(cep_ofdm_component(X, 1).samples, {0.0, h, 0.0, h}) < 1e-15);

    std::mt19937_64 rng(4);
    const auto Y = random_grid(4, 8, rng);
    CVector sum(32);
    for (int l = 0; l < 4; ++l) {
        const auto c = cep_ofdm_component(Y, l).samples;
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (static_cast<int>(i % 4) != l) CHECK(c[i] == cd{});
            sum[i] += c[i];
        }
    }
    CHECK(max_abs_diff(sum, otfs_modulate(Y).samples) <= 1e-12);

    const auto Z = random_grid(1, 8, rng);
    CHECK(max_abs_diff(cep_ofdm_component(Z, 0).samples, otfs_modulate(Z).samples) == 0.0);

    CHECK_THROWS_AS(cep_ofdm_component(Y, 4), IndexError);
    CHECK_THROWS_AS(cep_ofdm_component(Y, -1), IndexError);
}

TEST_CASE("constellations") {
    CHECK_THROWS_AS(Constellation::parse("bpsk"), ConfigError);
    for (const auto& c : {Constellation::qpsk(), Constellation::qam16(), Constellation::parse("16qam")}) {
        double p = 0.0;
        for (const auto& a : c.alphabet()) p += std::norm(a);
        CHECK(p / static_cast<double>(c.alphabet().size()) == doctest::Approx(1.0).epsilon(1e-14));
    }
    const auto custom = Constellation::custom({cd(3, 0), cd(-3, 0)});
    CHECK(std::abs(custom.alphabet()[0] - cd(1, 0)) < 1e-15);
}

TEST_CASE("random stream: exact zeros, unit-modulus QPSK, reproducibility") {
    Eigen::MatrixXd s = Eigen::MatrixXd::Ones(3, 4);
    s(1, 2) = 0.0;
    s(0, 0) = 2.0;
    const VarianceProfile prof(s);
    const RandomGridSource src(prof, Constellation::qpsk(), 77);
    for (std::uint64_t i = 0; i < 50; ++i) {
        const auto X = src.grid(i);
        CHECK(X(1, 2) == cd{});
        CHECK(std::norm(X(0, 0)) == doctest::Approx(2.0));
        CHECK(std::norm(X(2, 3)) == doctest::Approx(1.0));
    }
    const auto a = generate_random_stream(prof, Constellation::qpsk(), 5, 77);
    const auto b = generate_random_stream(prof, Constellation::qpsk(), 9, 77);
    for (std::size_t i = 0; i < 5; ++i) CHECK(a.frames[i].samples == b.frames[i].samples);
    const auto c = generate_random_stream(prof, Constellation::qpsk(), 5, 78);
    CHECK(a.frames[0].samples != c.frames[0].samples);

    const auto zero = generate_random_stream(VarianceProfile(2, 2), Constellation::qam16(), 3, 1);
    for (const auto& f : zero.frames)
        for (const auto& v : f.samples) CHECK(v == cd{});
    CHECK_THROWS_AS(generate_random_stream(prof, Constellation::qpsk(), 0, 1), InputError);
}

TEST_CASE("random symbols have the requested per-bin power and zero mean") {
    Eigen::MatrixXd s(2, 3);
    s << 1.0, 0.5, 2.0, 0.25, 1.0, 3.0;
    const RandomGridSource src(VarianceProfile(s), Constellation::qam16(), 123);
    Eigen::MatrixXd power = Eigen::MatrixXd::Zero(2, 3);
    Eigen::MatrixXcd mean = Eigen::MatrixXcd::Zero(2, 3);
    const int frames = 100000;
    for (int i = 0; i < frames; ++i) {
        const auto X = src.grid(static_cast<std::uint64_t>(i));
        power += X.matrix().cwiseAbs2();
        mean += X.matrix();
    }
    power /= frames;
    mean /= frames;
    for (int l = 0; l < 2; ++l)
        for (int k = 0; k < 3; ++k) {
            CHECK(std::abs(power(l, k) / s(l, k) - 1.0) < 0.02);
            CHECK(std::abs(mean(l, k)) < 5.0 * std::sqrt(s(l, k) / frames));
        }
}

TEST_CASE("variance profile subcarrier powers are the mean over delay rows") {
    Eigen::MatrixXd s(2, 2);
    s << 1.0, 0.0, 3.0, 1.0;
    const auto p = VarianceProfile(s).subcarrier_powers();
    CHECK(p(0) == 2.0);
    CHECK(p(1) == 0.5);
    CHECK_THROWS(VarianceProfile(Eigen::MatrixXd::Constant(1, 1, -1.0)));
}
