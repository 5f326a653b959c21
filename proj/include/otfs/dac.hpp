#pragma once

#include <span>
#include <string>

#include "otfs/types.hpp"

namespace otfs {

enum class FilterKind { DiracDelta, TruncatedSinc, Rect };

/// DAC interpolation filter g_I(t).
///
/// DiracDelta leaves the discrete sequence as is. TruncatedSinc is
/// sinc_pi(t/T_s) cut off without a taper at |t| = order*T_s. Rect is
/// rect(t/T_s), a zero-order hold.
struct InterpolationFilterSpec {
    FilterKind kind = FilterKind::DiracDelta;
    int order = 50;
    double sample_interval = 1.0;

    static InterpolationFilterSpec dirac(double T_s = 1.0) { return {FilterKind::DiracDelta, 0, T_s}; }
    static InterpolationFilterSpec sinc(int order = 50, double T_s = 1.0) { return {FilterKind::TruncatedSinc, order, T_s}; }
    static InterpolationFilterSpec rect(double T_s = 1.0) { return {FilterKind::Rect, 0, T_s}; }

    /// "dirac" | "sinc" | "rect" (throws ConfigError otherwise).
    static FilterKind parse_kind(const std::string& name);

    std::string name() const;
    void validate() const;
};

double sinc_pi(double x);

/// rect(x): 1 inside |x| < 1/2, 1/2 on the boundary, 0 outside.
double rect(double x);

/// |G_I(f)|^2 in the normalization where the passband is 1:
/// Dirac -> 1, sinc -> rect(f T_s)^2, rect -> sinc_pi(f T_s)^2.
double filter_response_sq(const InterpolationFilterSpec& filter, double f);

/// Dense-grid rendering of s(t) = sum_eta s_eta g_I(t - eta T_s).
struct OversampledSignal {
    CVector samples;
    double sample_rate = 1.0;
    /// Time of samples[0] in seconds.
    double origin_time = 0.0;
};

/// Batch reconstruction of a finite sequence. Samples outside the sequence
/// are zero. For TruncatedSinc the output starts at -order*T_s and carries
/// the full two-sided filter tail; for Rect each sample is held for L points.
OversampledSignal reconstruct(std::span<const cd> samples, const InterpolationFilterSpec& filter, int oversample);
OversampledSignal reconstruct(const FrameStream& stream, const InterpolationFilterSpec& filter, int oversample);

/// Incremental reconstruction for long streams. Emits dense samples in order
/// starting at t = 0 (the leading filter tail before the first input sample
/// is dropped) once no later input can modify them.
class StreamingReconstructor {
public:
    StreamingReconstructor(const InterpolationFilterSpec& filter, int oversample);

    /// Appends finalized dense samples for the new input to `out`.
    void push(std::span<const cd> input, CVector& out);

    /// Emits the remaining tail (everything after the last finalized sample).
    void finish(CVector& out);

    int oversample() const { return L_; }
    double sample_rate() const { return L_ / filter_.sample_interval; }

private:
    InterpolationFilterSpec filter_;
    int L_;
    long long reach_;            // dense taps on each side of an input position
    std::vector<double> taps_;   // kernel at dense offsets -reach_..reach_
    CVector pending_;            // accumulator for dense indices base_.. onward
    long long base_ = 0;         // absolute dense index of pending_[0]
    long long inputs_ = 0;
};

/// Throws ConfigError for invalid (filter, oversample) combinations,
/// e.g. DiracDelta with oversample != 1.
void validate_reconstruction(const InterpolationFilterSpec& filter, int oversample);

}  // namespace otfs
