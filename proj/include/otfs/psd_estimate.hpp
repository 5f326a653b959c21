#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "otfs/dac.hpp"
#include "otfs/fft.hpp"
#include "otfs/psd_analytic.hpp"

namespace otfs {

/// Averaged periodogram over non-overlapping rectangular segments.
///
/// Each full segment contributes |DFT|^2 / (segment_len * sample_rate); the
/// mean over segments is reported on the shifted bin grid [-rate/2, rate/2).
/// Segment sums are combined by a fixed binary cascade (pairwise summation),
/// so the result does not depend on how input is chunked.
class PeriodogramAccumulator {
public:
    PeriodogramAccumulator(int segment_len, double sample_rate);

    /// Buffers input; every completed segment is transformed immediately.
    void push(std::span<const cd> samples);

    std::size_t segments() const { return count_; }
    int segment_len() const { return segment_len_; }

    /// Throws InputError if no full segment has been seen.
    PsdCurve result() const;

private:
    void add_segment(std::span<const cd> segment);

    FftPlan plan_;
    int segment_len_;
    double sample_rate_;
    CVector partial_;
    CVector spectrum_;
    std::vector<std::optional<std::vector<double>>> levels_;
    std::size_t count_ = 0;
};

/// Frequencies of the shifted DFT grid for `n` bins at `sample_rate`.
std::vector<double> periodogram_freqs(int n, double sample_rate);

PsdCurve periodogram(std::span<const cd> signal, double sample_rate, int segment_len);
PsdCurve periodogram(const OversampledSignal& signal, int segment_len);
PsdCurve periodogram(const FrameStream& stream, int segment_len);

/// 10 log10(||a - b||^2 / ||b||^2) with b the reference. If the grids differ,
/// b is linearly interpolated onto the points of a that fall inside b's span.
/// Identical curves give the -300 dB floor.
double nmse_db(const PsdCurve& a, const PsdCurve& b);

/// <a, b> / (||a|| ||b||) over the common grid (same resampling rule as nmse_db).
double cosine_similarity(const PsdCurve& a, const PsdCurve& b);

struct CurveComparison {
    double nmse_db = 0.0;
    double cosine = 0.0;
};

/// Restricts both curves to [lo, hi), rescales each to PeakOne, then
/// compares `estimate` against `reference`.
CurveComparison compare_normalized(const PsdCurve& estimate, const PsdCurve& reference, double lo, double hi);

/// Comparison band for a filter: [-1/(2T_s), 1/(2T_s)), or +-1.5/T_s for Rect.
std::pair<double, double> comparison_band(const InterpolationFilterSpec& filter);

/// Turns a stream of baseband frames into an averaged periodogram: frames are
/// reconstructed through the DAC filter at L-times oversampling, the dense
/// signal is cut into segments aligned with t = 0, and segments are averaged.
/// A segment length of 0 selects one frame per segment (frame_len * L).
struct EstimatorSetup {
    InterpolationFilterSpec filter;
    int oversample = 1;
    int segment_len = 0;
};

class StreamPsdEstimator {
public:
    /// `checkpoints` lists segment counts at which a snapshot of the running
    /// estimate is kept.
    StreamPsdEstimator(std::size_t frame_len, const EstimatorSetup& setup, std::vector<std::size_t> checkpoints = {});

    void push_frame(std::span<const cd> frame);

    /// Flushes the filter tail of the last frame. Dense samples past the end
    /// of the last frame are not used.
    void finish();

    std::size_t segments() const { return acc_.segments(); }
    PsdCurve result() const { return acc_.result(); }
    const std::vector<PsdCurve>& snapshots() const { return snapshots_; }

private:
    void feed(std::span<const cd> dense);

    std::size_t frame_len_;
    StreamingReconstructor recon_;
    PeriodogramAccumulator acc_;
    std::vector<std::size_t> checkpoints_;
    std::vector<PsdCurve> snapshots_;
    std::size_t frames_ = 0;
    std::size_t consumed_ = 0;
    CVector scratch_;
    bool finished_ = false;
};

using FrameGenerator = std::function<CVector(std::size_t frame)>;

PsdCurve estimate_psd(const FrameGenerator& gen, std::size_t frame_len, std::size_t num_frames,
                      const EstimatorSetup& setup);

struct AutocorrProbe {
    long long eta = 0;
    long long eta_hat = 0;
};

/// Monte Carlo estimates of E(s*_eta s_eta_hat) and of the same correlation
/// moved by `shift` samples, with standard errors of each mean.
struct AutocorrEstimate {
    cd base;
    cd shifted;
    double base_se = 0.0;
    double shifted_se = 0.0;
    std::size_t realizations = 0;

    /// |base - shifted| in units of the combined standard error.
    double z_score() const;
};

/// The stream is cut into disjoint frame-aligned windows (window length is
/// the smallest multiple of M*N covering every probe index plus `shift`);
/// each window is one realization.
std::vector<AutocorrEstimate> cyclo_autocorr(const FrameStream& stream, std::span<const AutocorrProbe> probes,
                                             long long shift);

struct MeanEstimate {
    cd mean;
    double se = 0.0;
};

/// Per-phase mean of s_eta over frames, phase = eta mod M*N.
std::vector<MeanEstimate> cyclic_mean(const FrameStream& stream);

}  // namespace otfs
