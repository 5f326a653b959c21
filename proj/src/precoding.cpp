#include "otfs/precoding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "otfs/fft.hpp"

namespace otfs {

Eigen::VectorXcd discrete_spectrum(std::span<const cd> frame) {
    const int n = static_cast<int>(frame.size());
    if (n < 1) throw InputError("empty frame");
    FftPlan plan(n);
    Eigen::VectorXcd y(n);
    plan.execute(frame, std::span<cd>(y.data(), static_cast<std::size_t>(n)));
    y /= std::sqrt(static_cast<double>(n));
    return y;
}

Eigen::VectorXcd discrete_spectrum(const BasebandFrame& frame) { return discrete_spectrum(frame.samples); }

namespace {

// W_n^e = exp(-j 2 pi e / n) with the exponent reduced mod n
cd twiddle(long long e, long long n) {
    const long long r = ((e % n) + n) % n;
    return std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(n));
}

}  // namespace

Eigen::VectorXcd discrete_spectrum_from_grid(const DelayDopplerGrid& grid) {
    const int M = grid.M(), N = grid.N();
    const long long MN = static_cast<long long>(M) * N;
    const double scale = 1.0 / std::sqrt(static_cast<double>(M));
    Eigen::VectorXcd y(MN);
    for (int m = 0; m < M; ++m) {
        for (int k = 0; k < N; ++k) {
            cd acc{};
            for (int l = 0; l < M; ++l)
                acc += grid(l, k) * twiddle(static_cast<long long>(l) * k, MN) * twiddle(static_cast<long long>(l) * m, M);
            y(static_cast<Eigen::Index>(m) * N + k) = scale * acc;
        }
    }
    return y;
}

Eigen::MatrixXcd subcarrier_transform(int k, int M, int N) {
    if (M < 1 || N < 1) throw InputError("grid dimensions must be positive");
    if (k < 0 || k >= N) throw IndexError("subcarrier index out of range");
    const long long MN = static_cast<long long>(M) * N;
    const double scale = 1.0 / std::sqrt(static_cast<double>(M));
    Eigen::MatrixXcd F(M, M);
    for (int m = 0; m < M; ++m)
        for (int l = 0; l < M; ++l)
            F(m, l) = scale * twiddle(static_cast<long long>(l) * m, M) * twiddle(static_cast<long long>(l) * k, MN);
    return F;
}

SpectrumMask::SpectrumMask(int M, int N, std::vector<int> null_bins) : M_(M), N_(N), null_(std::move(null_bins)) {
    if (M < 1 || N < 1) throw InputError("mask dimensions must be positive");
    const int MN = M * N;
    std::sort(null_.begin(), null_.end());
    null_.erase(std::unique(null_.begin(), null_.end()), null_.end());
    if (!null_.empty() && (null_.front() < 0 || null_.back() >= MN))
        throw InputError("null bin index outside [0, M*N)");
    null_rows_.assign(static_cast<std::size_t>(N), {});
    used_rows_.assign(static_cast<std::size_t>(N), {});
    std::vector<char> is_null(static_cast<std::size_t>(MN), 0);
    for (int i : null_) is_null[static_cast<std::size_t>(i)] = 1;
    for (int k = 0; k < N; ++k) {
        for (int m = 0; m < M; ++m) {
            auto& dst = is_null[static_cast<std::size_t>(m * N + k)] ? null_rows_ : used_rows_;
            dst[static_cast<std::size_t>(k)].push_back(m);
        }
    }
}

std::vector<int> SpectrumMask::used_bins() const {
    std::vector<int> out;
    std::size_t j = 0;
    for (int i = 0; i < M_ * N_; ++i) {
        if (j < null_.size() && null_[j] == i) {
            ++j;
            continue;
        }
        out.push_back(i);
    }
    return out;
}

int SpectrumMask::payload_size() const {
    int total = 0;
    for (const auto& rows : used_rows_) total += static_cast<int>(rows.size());
    return total;
}

SpectrumMask decompose_mask(std::span<const int> null_bins, int M, int N) {
    return SpectrumMask(M, N, std::vector<int>(null_bins.begin(), null_bins.end()));
}

double bin_frequency(int bin, int M, int N, double sample_interval) {
    const int MN = M * N;
    const int q = bin < (MN + 1) / 2 ? bin : bin - MN;
    return static_cast<double>(q) / (MN * sample_interval);
}

SpectrumMask mask_from_pass_bands(const std::vector<std::pair<double, double>>& bands_hz, int M, int N,
                                  double sample_interval) {
    if (M < 1 || N < 1) throw InputError("mask dimensions must be positive");
    if (!(sample_interval > 0.0)) throw InputError("sample interval must be positive");
    const int MN = M * N;
    const double spacing = 1.0 / (MN * sample_interval);
    const long long q_min = -(MN / 2);
    const long long q_end = (MN + 1) / 2;
    // nearest bin, exact half-way ties go to the lower (more negative) bin
    auto snap = [&](double f) { return static_cast<long long>(std::ceil(f / spacing - 0.5)); };

    std::vector<char> used(static_cast<std::size_t>(MN), 0);
    for (const auto& [lo, hi] : bands_hz) {
        if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) throw InputError("pass band must satisfy lo < hi");
        const long long a = std::max(snap(lo), q_min);
        const long long b = std::min(snap(hi), q_end);
        for (long long q = a; q < b; ++q) used[static_cast<std::size_t>((q % MN + MN) % MN)] = 1;
    }
    std::vector<int> nulls;
    for (int i = 0; i < MN; ++i)
        if (!used[static_cast<std::size_t>(i)]) nulls.push_back(i);
    return SpectrumMask(M, N, std::move(nulls));
}

namespace {

void check_subcarrier(int k, const SpectrumMask& mask) {
    if (k < 0 || k >= mask.N()) throw IndexError("subcarrier index out of range");
}

// [F~(k)]^H restricted to the used rows J_k: M x |J_k|
Eigen::MatrixXcd used_basis(int k, const SpectrumMask& mask) {
    const Eigen::MatrixXcd F = subcarrier_transform(k, mask.M(), mask.N());
    const auto& J = mask.used_rows(k);
    Eigen::MatrixXcd B(mask.M(), static_cast<Eigen::Index>(J.size()));
    for (std::size_t c = 0; c < J.size(); ++c) B.col(static_cast<Eigen::Index>(c)) = F.row(J[c]).adjoint();
    return B;
}

void normalize_power(Eigen::MatrixXcd& P) {
    const double power = P.squaredNorm();
    if (power > 0.0) P *= std::sqrt(static_cast<double>(P.cols()) / power);
}

}  // namespace

Eigen::MatrixXcd nslp_precoder(int k, const SpectrumMask& mask, const std::optional<Eigen::MatrixXcd>& U) {
    check_subcarrier(k, mask);
    const Eigen::MatrixXcd B = used_basis(k, mask);
    const auto J = B.cols();
    if (J == 0) return Eigen::MatrixXcd(mask.M(), 0);
    if (!U) return B;
    if (U->rows() != J) throw InputError("U must have |J_k| rows");
    if (U->cols() > J) throw InputError("U cannot have more columns than |J_k|");
    const double trace = U->squaredNorm();
    if (std::abs(trace - static_cast<double>(J)) > 1e-9 * static_cast<double>(J))
        throw InputError("U must satisfy trace(U^H U) = |J_k|");
    return B * (*U);
}

Eigen::MatrixXcd systematic_precoder(int k, const SpectrumMask& mask, bool normalize) {
    check_subcarrier(k, mask);
    const Eigen::MatrixXcd B = used_basis(k, mask);
    const auto J = B.cols();
    const auto M = B.rows();
    if (J == 0) return Eigen::MatrixXcd(M, 0);

    const Eigen::MatrixXcd F1 = B.topRows(J);
    const Eigen::MatrixXcd F2 = B.bottomRows(M - J);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(F1);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (!(smin > 0.0) || sv(0) / smin > 1e12)
        throw FeasibilityError("systematic-form precoder infeasible for subcarrier " + std::to_string(k) +
                               ": leading block condition number " + std::to_string(sv(0) / smin) +
                               " exceeds 1e12; use the null-space precoder instead");

    Eigen::MatrixXcd P(M, J);
    P.topRows(J).setIdentity();
    if (M > J) P.bottomRows(M - J) = F2 * F1.partialPivLu().inverse();
    if (normalize) normalize_power(P);
    return P;
}

PrecoderSet build_precoders(const SpectrumMask& mask, PrecoderForm form) {
    PrecoderSet set;
    set.form = form;
    set.M = mask.M();
    set.N = mask.N();
    set.per_subcarrier.reserve(static_cast<std::size_t>(mask.N()));
    for (int k = 0; k < mask.N(); ++k)
        set.per_subcarrier.push_back(form == PrecoderForm::NullSpace ? nslp_precoder(k, mask)
                                                                     : systematic_precoder(k, mask));
    return set;
}

DelayDopplerGrid precode_grid(std::span<const Eigen::VectorXcd> info, const PrecoderSet& precoders) {
    if (static_cast<int>(info.size()) != precoders.N) throw InputError("payload has wrong number of subcarriers");
    DelayDopplerGrid grid(precoders.M, precoders.N);
    for (int k = 0; k < precoders.N; ++k) {
        const auto& P = precoders.per_subcarrier[static_cast<std::size_t>(k)];
        const auto& x = info[static_cast<std::size_t>(k)];
        if (x.size() != P.cols()) throw InputError("payload length does not match precoder on subcarrier " + std::to_string(k));
        if (P.cols() == 0) continue;
        grid.matrix().col(k) = P * x;
    }
    return grid;
}

std::vector<Eigen::VectorXcd> random_payload(const PrecoderSet& precoders, const Constellation& constellation,
                                             std::uint64_t seed, std::uint64_t frame) {
    const auto alphabet = constellation.alphabet();
    const auto q = static_cast<std::uint64_t>(alphabet.size());
    // distinct stream from the grid symbols drawn with the same seed
    const std::uint64_t salt = seed ^ 0xa0761d6478bd642fULL;
    std::vector<Eigen::VectorXcd> out;
    out.reserve(static_cast<std::size_t>(precoders.N));
    for (int k = 0; k < precoders.N; ++k) {
        Eigen::VectorXcd x(precoders.payload_size(k));
        for (Eigen::Index j = 0; j < x.size(); ++j)
            x(j) = alphabet[counter_hash(salt, frame, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(j)) % q];
        out.push_back(std::move(x));
    }
    return out;
}

Eigen::MatrixXcd column_space_projector(const Eigen::MatrixXcd& P) {
    if (P.cols() == 0) return Eigen::MatrixXcd::Zero(P.rows(), P.rows());
    const Eigen::MatrixXcd gram = P.adjoint() * P;
    return P * gram.ldlt().solve(P.adjoint());
}

}  // namespace otfs
