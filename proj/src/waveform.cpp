#include "otfs/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

namespace otfs {

DelayDopplerGrid::DelayDopplerGrid(int M, int N) {
    if (M < 1 || N < 1) throw InputError("grid dimensions must be positive");
    entries_ = Eigen::MatrixXcd::Zero(M, N);
}

DelayDopplerGrid::DelayDopplerGrid(Eigen::MatrixXcd entries) : entries_(std::move(entries)) {
    if (entries_.rows() < 1 || entries_.cols() < 1) throw InputError("grid dimensions must be positive");
}

Eigen::VectorXcd DelayDopplerGrid::vec() const {
    return Eigen::Map<const Eigen::VectorXcd>(entries_.data(), entries_.size());
}

VarianceProfile::VarianceProfile(int M, int N, double fill) {
    if (M < 1 || N < 1) throw InputError("profile dimensions must be positive");
    if (!(fill >= 0.0)) throw InputError("symbol power must be nonnegative");
    sigma2_ = Eigen::MatrixXd::Constant(M, N, fill);
}

VarianceProfile::VarianceProfile(Eigen::MatrixXd sigma2) : sigma2_(std::move(sigma2)) {
    if (sigma2_.rows() < 1 || sigma2_.cols() < 1) throw InputError("profile dimensions must be positive");
    if (!sigma2_.allFinite() || (sigma2_.array() < 0.0).any())
        throw InputError("symbol power must be finite and nonnegative");
}

VarianceProfile VarianceProfile::from_subcarrier_powers(int M, const std::vector<double>& per_k) {
    if (per_k.empty()) throw InputError("subcarrier power list is empty");
    Eigen::MatrixXd s(M, static_cast<Eigen::Index>(per_k.size()));
    for (int k = 0; k < s.cols(); ++k) s.col(k).setConstant(per_k[k]);
    return VarianceProfile(std::move(s));
}

Eigen::VectorXd VarianceProfile::subcarrier_powers() const {
    return sigma2_.colwise().sum().transpose() / static_cast<double>(M());
}

CVector FrameStream::concatenated() const {
    CVector out;
    out.reserve(total_samples());
    for (const auto& f : frames) out.insert(out.end(), f.samples.begin(), f.samples.end());
    return out;
}

void FrameStream::validate() const {
    if (M < 1 || N < 1) throw InputError("frame stream dimensions must be positive");
    for (const auto& f : frames) {
        if (f.samples.size() != frame_length()) throw InputError("frame length differs from M*N");
        if (f.sample_interval != sample_interval) throw InputError("frames disagree on sample interval");
    }
}

Eigen::MatrixXcd dft_matrix(int N) {
    if (N < 1) throw InputError("DFT size must be positive");
    const double scale = 1.0 / std::sqrt(static_cast<double>(N));
    Eigen::MatrixXcd F(N, N);
    for (int a = 0; a < N; ++a) {
        for (int b = 0; b < N; ++b) {
            // reduce a*b mod N first so large sizes keep full phase accuracy
            const auto r = static_cast<double>((static_cast<long long>(a) * b) % N);
            F(a, b) = std::polar(scale, -2.0 * std::numbers::pi * r / N);
        }
    }
    return F;
}

namespace {

const Eigen::MatrixXcd& inverse_dft(int N) {
    thread_local std::unordered_map<int, Eigen::MatrixXcd> cache;
    auto it = cache.find(N);
    if (it == cache.end()) it = cache.emplace(N, dft_matrix(N).adjoint()).first;
    return it->second;
}

// S = X F_N^H, row l holds the inverse DFT of row l of X.
Eigen::MatrixXcd time_matrix(const DelayDopplerGrid& grid) {
    return grid.matrix() * inverse_dft(grid.N());
}

}  // namespace

BasebandFrame otfs_modulate(const DelayDopplerGrid& grid, double sample_interval) {
    const Eigen::MatrixXcd S = time_matrix(grid);
    BasebandFrame frame{CVector(S.data(), S.data() + S.size()), sample_interval};
    return frame;
}

BasebandFrame ofdm_modulate(const DelayDopplerGrid& grid, double sample_interval) {
    const Eigen::MatrixXcd S = time_matrix(grid);
    const int M = grid.M(), N = grid.N();
    BasebandFrame frame{CVector(static_cast<std::size_t>(M) * N), sample_interval};
    for (int l = 0; l < M; ++l)
        for (int n = 0; n < N; ++n) frame.samples[static_cast<std::size_t>(l) * N + n] = S(l, n);
    return frame;
}

BasebandFrame modulate(Modulation kind, const DelayDopplerGrid& grid, double sample_interval) {
    return kind == Modulation::OTFS ? otfs_modulate(grid, sample_interval) : ofdm_modulate(grid, sample_interval);
}

BasebandFrame cep_ofdm_component(const DelayDopplerGrid& grid, int l, double sample_interval) {
    const int M = grid.M(), N = grid.N();
    if (l < 0 || l >= M) throw IndexError("CEP-OFDM component index out of range");
    const Eigen::VectorXcd row = grid.matrix().row(l) * inverse_dft(N);
    BasebandFrame frame{CVector(static_cast<std::size_t>(M) * N), sample_interval};
    for (int n = 0; n < N; ++n) frame.samples[static_cast<std::size_t>(n) * M + l] = row(n);
    return frame;
}

Constellation Constellation::custom(std::vector<cd> points) {
    if (points.empty()) throw ConfigError("custom constellation has no points");
    double power = 0.0;
    for (const auto& p : points) power += std::norm(p);
    power /= static_cast<double>(points.size());
    if (!(power > 0.0)) throw ConfigError("custom constellation has zero power");
    const double s = 1.0 / std::sqrt(power);
    for (auto& p : points) p *= s;
    return {ConstellationKind::Custom, std::move(points)};
}

Constellation Constellation::parse(const std::string& name) {
    std::string lower = name;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "qpsk") return qpsk();
    if (lower == "qam16" || lower == "16qam") return qam16();
    throw ConfigError("unknown constellation '" + name + "'");
}

std::string Constellation::name() const {
    switch (kind) {
        case ConstellationKind::QPSK: return "qpsk";
        case ConstellationKind::QAM16: return "qam16";
        case ConstellationKind::Custom: return "custom";
    }
    return "custom";
}

std::vector<cd> Constellation::alphabet() const {
    switch (kind) {
        case ConstellationKind::QPSK: {
            const double a = 1.0 / std::sqrt(2.0);
            return {{a, a}, {-a, a}, {-a, -a}, {a, -a}};
        }
        case ConstellationKind::QAM16: {
            std::vector<cd> pts;
            const double s = 1.0 / std::sqrt(10.0);
            for (int re : {-3, -1, 1, 3})
                for (int im : {-3, -1, 1, 3}) pts.emplace_back(re * s, im * s);
            return pts;
        }
        case ConstellationKind::Custom: return points;
    }
    return points;
}

namespace {
std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return splitmix64(splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b) ^ c);
}

RandomGridSource::RandomGridSource(VarianceProfile profile, Constellation constellation, std::uint64_t seed)
    : profile_(std::move(profile)), alphabet_(constellation.alphabet()), seed_(seed) {
    if (alphabet_.empty()) throw ConfigError("constellation has no points");
    amplitude_ = profile_.matrix().cwiseSqrt();
}

DelayDopplerGrid RandomGridSource::grid(std::uint64_t frame) const {
    const int M = profile_.M(), N = profile_.N();
    DelayDopplerGrid g(M, N);
    const auto q = static_cast<std::uint64_t>(alphabet_.size());
    for (int k = 0; k < N; ++k) {
        for (int l = 0; l < M; ++l) {
            const double amp = amplitude_(l, k);
            if (amp == 0.0) continue;
            g(l, k) = amp * alphabet_[counter_hash(seed_, frame, static_cast<std::uint64_t>(l),
                                                   static_cast<std::uint64_t>(k)) % q];
        }
    }
    return g;
}

FrameStream generate_random_stream(const VarianceProfile& profile, const Constellation& constellation,
                                   std::size_t num_frames, std::uint64_t seed, double sample_interval,
                                   Modulation kind) {
    if (num_frames < 1) throw InputError("num_frames must be at least 1");
    RandomGridSource source(profile, constellation, seed);
    FrameStream stream;
    stream.M = profile.M();
    stream.N = profile.N();
    stream.sample_interval = sample_interval;
    stream.seed = seed;
    stream.frames.reserve(num_frames);
    for (std::size_t i = 0; i < num_frames; ++i)
        stream.frames.push_back(modulate(kind, source.grid(i), sample_interval));
    return stream;
}

}  // namespace otfs
