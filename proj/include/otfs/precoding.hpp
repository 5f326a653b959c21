#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "otfs/types.hpp"
#include "otfs/waveform.hpp"

namespace otfs {

/// y = F_MN s: the MN-point unitary DFT of one frame (FFT route).
Eigen::VectorXcd discrete_spectrum(std::span<const cd> frame);
Eigen::VectorXcd discrete_spectrum(const BasebandFrame& frame);

/// Same spectrum straight from the symbols:
/// y[mN + k] = (1/sqrt(M)) sum_l x_{l,k} W_MN^{lk} W_M^{lm}.
Eigen::VectorXcd discrete_spectrum_from_grid(const DelayDopplerGrid& grid);

/// Per-subcarrier map F~(k) = (1/sqrt(M)) F_M Lambda(k), with F_M the
/// unnormalized M-point DFT and Lambda(k) = diag(W_MN^{lk}). It takes column
/// k of X to the spectrum bins y[k], y[N+k], ..., y[(M-1)N+k].
Eigen::MatrixXcd subcarrier_transform(int k, int M, int N);

/// Null bins I of the MN-point discrete spectrum, split per subcarrier:
/// bin m*N + k belongs to subcarrier k at row m.
class SpectrumMask {
public:
    SpectrumMask(int M, int N, std::vector<int> null_bins);

    int M() const { return M_; }
    int N() const { return N_; }

    const std::vector<int>& null_bins() const { return null_; }
    std::vector<int> used_bins() const;

    /// I_k and J_k, ascending.
    const std::vector<int>& null_rows(int k) const { return null_rows_.at(static_cast<std::size_t>(k)); }
    const std::vector<int>& used_rows(int k) const { return used_rows_.at(static_cast<std::size_t>(k)); }

    /// Total payload symbols per frame, sum_k |J_k|.
    int payload_size() const;

private:
    int M_, N_;
    std::vector<int> null_;
    std::vector<std::vector<int>> null_rows_;
    std::vector<std::vector<int>> used_rows_;
};

/// Validates and splits a null-bin set. Throws InputError on out-of-range bins.
SpectrumMask decompose_mask(std::span<const int> null_bins, int M, int N);

/// Frequency of bin i on the MN-point grid, wrapped to [-f_s/2, f_s/2).
double bin_frequency(int bin, int M, int N, double sample_interval);

/// Builds a mask whose used bins are those inside any [lo, hi) pass band.
/// Band edges snap to the nearest bin; exact ties snap toward -inf frequency.
SpectrumMask mask_from_pass_bands(const std::vector<std::pair<double, double>>& bands_hz, int M, int N,
                                  double sample_interval);

enum class PrecoderForm { NullSpace, Systematic };

/// Null-space precoder P_k = [F~(k)]^H_{J_k} U, M x cols(U).
///
/// U defaults to the |J_k| x |J_k| identity; a custom U must have |J_k| rows
/// and satisfy trace(U^H U) = |J_k|. A subcarrier with J_k empty yields an
/// M x 0 matrix (nothing to transmit on it) instead of an error.
Eigen::MatrixXcd nslp_precoder(int k, const SpectrumMask& mask, const std::optional<Eigen::MatrixXcd>& U = std::nullopt);

/// Systematic precoder [I; F2 F1^{-1}] where F1/F2 are the first |J_k| and
/// last |I_k| rows of [F~(k)]^H_{J_k}. With `normalize` it is scaled so that
/// trace(P^H P) = |J_k|. Throws FeasibilityError when F1 is numerically
/// singular (condition number above 1e12); nslp_precoder always works.
Eigen::MatrixXcd systematic_precoder(int k, const SpectrumMask& mask, bool normalize = true);

struct PrecoderSet {
    PrecoderForm form = PrecoderForm::NullSpace;
    int M = 0;
    int N = 0;
    std::vector<Eigen::MatrixXcd> per_subcarrier;

    bool is_empty_subcarrier(int k) const { return per_subcarrier.at(static_cast<std::size_t>(k)).cols() == 0; }
    /// Number of payload symbols carried on subcarrier k.
    int payload_size(int k) const { return static_cast<int>(per_subcarrier.at(static_cast<std::size_t>(k)).cols()); }
};

PrecoderSet build_precoders(const SpectrumMask& mask, PrecoderForm form);

/// Column k of the returned grid is P_k * info[k].
DelayDopplerGrid precode_grid(std::span<const Eigen::VectorXcd> info, const PrecoderSet& precoders);

/// Counter-based random payload (one vector per subcarrier), unit-power symbols.
std::vector<Eigen::VectorXcd> random_payload(const PrecoderSet& precoders, const Constellation& constellation,
                                             std::uint64_t seed, std::uint64_t frame);

/// Orthogonal projector onto the column space of P.
Eigen::MatrixXcd column_space_projector(const Eigen::MatrixXcd& P);

}  // namespace otfs
