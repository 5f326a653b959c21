#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "otfs/types.hpp"

namespace otfs {

/// Unitary DFT matrix, entry (a, b) = exp(-j*2*pi*a*b/N) / sqrt(N).
Eigen::MatrixXcd dft_matrix(int N);

/// OTFS frame s = (F_N^H kron I_M) vec(X); samples[n*M + l] is the
/// N-point inverse DFT of row l evaluated at n. No cyclic prefix, g_P = 1.
BasebandFrame otfs_modulate(const DelayDopplerGrid& grid, double sample_interval = 1.0);

/// OFDM frame (I_M kron F_N^*) vec(X^T): M consecutive N-point inverse DFTs,
/// one per row of X, laid out row after row.
BasebandFrame ofdm_modulate(const DelayDopplerGrid& grid, double sample_interval = 1.0);

BasebandFrame modulate(Modulation kind, const DelayDopplerGrid& grid, double sample_interval = 1.0);

/// l-th component-expanded OFDM sequence: the row-l samples of the OTFS frame
/// at positions n*M + l, zeros elsewhere. Summing over l gives the OTFS frame.
BasebandFrame cep_ofdm_component(const DelayDopplerGrid& grid, int l, double sample_interval = 1.0);

enum class ConstellationKind { QPSK, QAM16, Custom };

struct Constellation {
    ConstellationKind kind = ConstellationKind::QPSK;
    /// Only used for Custom; rescaled to unit average power on construction.
    std::vector<cd> points;

    static Constellation qpsk() { return {}; }
    static Constellation qam16() { return {ConstellationKind::QAM16, {}}; }
    static Constellation custom(std::vector<cd> points);

    /// "qpsk" | "qam16". Throws ConfigError for anything else.
    static Constellation parse(const std::string& name);

    std::string name() const;

    /// Unit-average-power alphabet.
    std::vector<cd> alphabet() const;
};

/// Counter-based symbol source: the symbol at (frame, l, k) depends only on
/// (seed, frame, l, k), so frames can be produced in any order or in parallel
/// and enlarging the frame count never changes earlier frames.
class RandomGridSource {
public:
    RandomGridSource(VarianceProfile profile, Constellation constellation, std::uint64_t seed);

    DelayDopplerGrid grid(std::uint64_t frame) const;

    const VarianceProfile& profile() const { return profile_; }
    std::uint64_t seed() const { return seed_; }

private:
    VarianceProfile profile_;
    std::vector<cd> alphabet_;
    Eigen::MatrixXd amplitude_;
    std::uint64_t seed_;
};

/// Stateless 64-bit hash of a (seed, a, b, c) counter tuple (splitmix64 finalizer).
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c);

FrameStream generate_random_stream(const VarianceProfile& profile, const Constellation& constellation,
                                   std::size_t num_frames, std::uint64_t seed,
                                   double sample_interval = 1.0, Modulation kind = Modulation::OTFS);

}  // namespace otfs
