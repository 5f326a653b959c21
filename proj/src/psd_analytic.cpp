#include "otfs/psd_analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace otfs {

std::string to_string(Normalization n) { return n == Normalization::PeakOne ? "peak_one" : "absolute"; }

Normalization parse_normalization(const std::string& s) {
    if (s == "peak_one") return Normalization::PeakOne;
    if (s == "absolute") return Normalization::Absolute;
    throw InputError("unknown normalization '" + s + "'");
}

PsdCurve PsdCurve::normalized_peak_one() const {
    PsdCurve out = *this;
    out.normalization = Normalization::PeakOne;
    const double peak = values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
    if (peak > 0.0)
        for (auto& v : out.values) v /= peak;
    return out;
}

PsdCurve PsdCurve::restricted(double lo, double hi) const {
    PsdCurve out;
    out.normalization = normalization;
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        if (freqs[i] >= lo && freqs[i] < hi) {
            out.freqs.push_back(freqs[i]);
            out.values.push_back(values[i]);
        }
    }
    return out;
}

void PsdCurve::validate() const {
    if (freqs.size() != values.size()) throw InputError("PSD curve has mismatched frequency and value counts");
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        if (!std::isfinite(freqs[i]) || !std::isfinite(values[i])) throw InputError("PSD curve has non-finite entries");
        if (values[i] < 0.0) throw InputError("PSD curve has negative values");
        if (i > 0 && !(freqs[i] > freqs[i - 1])) throw InputError("PSD frequency grid is not strictly increasing");
    }
}

double dirichlet_sq(int N, double x) {
    if (N < 1) throw InputError("Dirichlet kernel order must be positive");
    // sin^2(pi x) is invariant under x -> x - N*j, so reduce into [-N/2, N/2)
    const double period = static_cast<double>(N);
    const double r = x - period * std::floor(x / period + 0.5);
    if (std::abs(r) <= 1e-9) return 1.0;
    const double num = std::sin(std::numbers::pi * r);
    const double den = period * std::sin(std::numbers::pi * r / period);
    const double v = (num * num) / (den * den);
    return std::clamp(v, 0.0, 1.0 + 1e-12);
}

std::vector<double> uniform_grid(double lo, double hi, int points) {
    if (points < 1 || !(hi > lo)) throw InputError("invalid frequency grid");
    std::vector<double> f(static_cast<std::size_t>(points));
    const double step = (hi - lo) / points;
    for (int i = 0; i < points; ++i) f[static_cast<std::size_t>(i)] = lo + step * i;
    return f;
}

std::vector<double> default_frequency_grid(const InterpolationFilterSpec& filter, int points) {
    const double half = (filter.kind == FilterKind::Rect ? 1.5 : 0.5) / filter.sample_interval;
    return uniform_grid(-half, half, points);
}

namespace {

// sum_k weight_k D^2_N(k - f * span) |G_I(f)|^2
PsdCurve dirichlet_sum(const Eigen::VectorXd& weight, double span, const InterpolationFilterSpec& filter,
                       std::span<const double> freqs) {
    filter.validate();
    const int N = static_cast<int>(weight.size());
    PsdCurve out;
    out.freqs.assign(freqs.begin(), freqs.end());
    out.values.resize(freqs.size());
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        const double f = freqs[i];
        if (!std::isfinite(f)) throw InputError("frequency grid contains non-finite values");
        const double g = filter_response_sq(filter, f);
        double acc = 0.0;
        if (g != 0.0) {
            const double u = f * span;
            for (int k = 0; k < N; ++k)
                if (weight(k) != 0.0) acc += weight(k) * dirichlet_sq(N, k - u);
        }
        out.values[i] = acc * g;
    }
    return out;
}

}  // namespace

PsdCurve otfs_psd(const VarianceProfile& profile, const InterpolationFilterSpec& filter, std::span<const double> freqs) {
    const double T = filter.sample_interval;
    const Eigen::VectorXd w = profile.subcarrier_powers() / T;
    return dirichlet_sum(w, static_cast<double>(profile.M()) * profile.N() * T, filter, freqs);
}

PsdCurve ofdm_psd(const VarianceProfile& profile, const InterpolationFilterSpec& filter, std::span<const double> freqs) {
    const double T = filter.sample_interval;
    const Eigen::VectorXd w = profile.subcarrier_powers() / T;
    return dirichlet_sum(w, static_cast<double>(profile.N()) * T, filter, freqs);
}

PsdCurve cep_ofdm_psd(const VarianceProfile& profile, int l, const InterpolationFilterSpec& filter,
                      std::span<const double> freqs) {
    if (l < 0 || l >= profile.M()) throw IndexError("CEP-OFDM component index out of range");
    const double T = filter.sample_interval;
    const Eigen::VectorXd w = profile.matrix().row(l).transpose() / (profile.M() * T);
    return dirichlet_sum(w, static_cast<double>(profile.M()) * profile.N() * T, filter, freqs);
}

PsdCurve analytic_psd(Modulation kind, const VarianceProfile& profile, const InterpolationFilterSpec& filter,
                      std::span<const double> freqs) {
    return kind == Modulation::OTFS ? otfs_psd(profile, filter, freqs) : ofdm_psd(profile, filter, freqs);
}

}  // namespace otfs
