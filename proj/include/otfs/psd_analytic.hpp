#pragma once

#include <span>
#include <string>
#include <vector>

#include "otfs/dac.hpp"
#include "otfs/types.hpp"

namespace otfs {

enum class Normalization { Absolute, PeakOne };

std::string to_string(Normalization n);
Normalization parse_normalization(const std::string& s);

/// Power spectral density sampled on a strictly increasing frequency grid (Hz).
struct PsdCurve {
    std::vector<double> freqs;
    std::vector<double> values;
    Normalization normalization = Normalization::Absolute;

    std::size_t size() const { return freqs.size(); }

    /// Copy scaled so the largest value is 1 (all-zero curves are returned unchanged).
    PsdCurve normalized_peak_one() const;

    /// Points with lo <= f < hi.
    PsdCurve restricted(double lo, double hi) const;

    /// Throws InputError on size mismatch, non-increasing grid, negative or non-finite values.
    void validate() const;
};

/// Squared Dirichlet kernel sin^2(pi x) / (N^2 sin^2(pi x / N)), period N, peak 1
/// at multiples of N.
double dirichlet_sq(int N, double x);

/// `points` uniformly spaced frequencies over [-1/(2T_s), 1/(2T_s)), or over
/// [-1.5/T_s, 1.5/T_s) for the Rect filter so images beyond Nyquist show.
std::vector<double> default_frequency_grid(const InterpolationFilterSpec& filter, int points = 4096);

/// Uniform grid of `points` frequencies over [lo, hi).
std::vector<double> uniform_grid(double lo, double hi, int points);

/// P_c(f) = sum_k (sigma^2_k / T_s) D^2_N(k - f M N T_s) |G_I(f)|^2.
/// T_s is taken from the filter; DiracDelta yields the discrete-signal PSD P_d.
PsdCurve otfs_psd(const VarianceProfile& profile, const InterpolationFilterSpec& filter, std::span<const double> freqs);

/// OFDM counterpart, kernel argument k - f N T_s.
PsdCurve ofdm_psd(const VarianceProfile& profile, const InterpolationFilterSpec& filter, std::span<const double> freqs);

/// PSD of the l-th CEP-OFDM component:
/// sum_k (sigma^2_{l,k} / (M T_s)) D^2_N(k - f M N T_s) |G_I(f)|^2.
PsdCurve cep_ofdm_psd(const VarianceProfile& profile, int l, const InterpolationFilterSpec& filter,
                      std::span<const double> freqs);

PsdCurve analytic_psd(Modulation kind, const VarianceProfile& profile, const InterpolationFilterSpec& filter,
                      std::span<const double> freqs);

}  // namespace otfs
