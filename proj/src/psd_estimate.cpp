#include "otfs/psd_estimate.hpp"

#include <algorithm>
#include <cmath>

namespace otfs {

PeriodogramAccumulator::PeriodogramAccumulator(int segment_len, double sample_rate)
    : plan_(std::max(segment_len, 1)), segment_len_(segment_len), sample_rate_(sample_rate) {
    if (segment_len < 2) throw InputError("segment length must be at least 2");
    if (!(sample_rate > 0.0)) throw InputError("sample rate must be positive");
    spectrum_.resize(static_cast<std::size_t>(segment_len));
}

void PeriodogramAccumulator::push(std::span<const cd> samples) {
    const auto seg = static_cast<std::size_t>(segment_len_);
    if (!partial_.empty()) {
        const std::size_t take = std::min(seg - partial_.size(), samples.size());
        partial_.insert(partial_.end(), samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(take));
        samples = samples.subspan(take);
        if (partial_.size() < seg) return;
        add_segment(partial_);
        partial_.clear();
    }
    while (samples.size() >= seg) {
        add_segment(samples.first(seg));
        samples = samples.subspan(seg);
    }
    partial_.assign(samples.begin(), samples.end());
}

void PeriodogramAccumulator::add_segment(std::span<const cd> segment) {
    plan_.execute(segment, spectrum_);
    const double scale = 1.0 / (segment_len_ * sample_rate_);
    std::vector<double> power(spectrum_.size());
    for (std::size_t i = 0; i < power.size(); ++i) power[i] = std::norm(spectrum_[i]) * scale;

    // binary-counter cascade: level j holds the sum of 2^j segments
    std::size_t j = 0;
    while (j < levels_.size() && levels_[j]) {
        const auto& held = *levels_[j];
        for (std::size_t i = 0; i < power.size(); ++i) power[i] = held[i] + power[i];
        levels_[j].reset();
        ++j;
    }
    if (j == levels_.size()) levels_.emplace_back();
    levels_[j] = std::move(power);
    ++count_;
}

std::vector<double> periodogram_freqs(int n, double sample_rate) {
    std::vector<double> f(static_cast<std::size_t>(n));
    const int half = n / 2;
    for (int j = 0; j < n; ++j) f[static_cast<std::size_t>(j)] = static_cast<double>(j - half) * sample_rate / n;
    return f;
}

PsdCurve PeriodogramAccumulator::result() const {
    if (count_ == 0) throw InputError("signal is shorter than one periodogram segment");
    const int n = segment_len_;
    std::vector<double> total(static_cast<std::size_t>(n), 0.0);
    for (const auto& level : levels_) {
        if (!level) continue;
        for (std::size_t i = 0; i < total.size(); ++i) total[i] += (*level)[i];
    }
    PsdCurve out;
    out.freqs = periodogram_freqs(n, sample_rate_);
    out.values.resize(total.size());
    const int half = n / 2;
    const double inv = 1.0 / static_cast<double>(count_);
    for (int j = 0; j < n; ++j) {
        const int bin = ((j - half) % n + n) % n;
        out.values[static_cast<std::size_t>(j)] = total[static_cast<std::size_t>(bin)] * inv;
    }
    return out;
}

PsdCurve periodogram(std::span<const cd> signal, double sample_rate, int segment_len) {
    if (segment_len < 2) throw InputError("segment length must be at least 2");
    if (signal.size() < static_cast<std::size_t>(segment_len))
        throw InputError("signal is shorter than one periodogram segment");
    PeriodogramAccumulator acc(segment_len, sample_rate);
    acc.push(signal);
    return acc.result();
}

PsdCurve periodogram(const OversampledSignal& signal, int segment_len) {
    return periodogram(signal.samples, signal.sample_rate, segment_len);
}

PsdCurve periodogram(const FrameStream& stream, int segment_len) {
    stream.validate();
    if (stream.total_samples() < static_cast<std::size_t>(std::max(segment_len, 0)))
        throw InputError("signal is shorter than one periodogram segment");
    PeriodogramAccumulator acc(segment_len, 1.0 / stream.sample_interval);
    for (const auto& f : stream.frames) acc.push(f.samples);
    return acc.result();
}

namespace {

struct Aligned {
    std::vector<double> a;
    std::vector<double> b;
};

bool same_grid(const PsdCurve& a, const PsdCurve& b) {
    return a.freqs == b.freqs;
}

double interpolate(const PsdCurve& c, double f) {
    auto it = std::lower_bound(c.freqs.begin(), c.freqs.end(), f);
    const auto i = static_cast<std::size_t>(it - c.freqs.begin());
    if (i < c.freqs.size() && c.freqs[i] == f) return c.values[i];
    const double f0 = c.freqs[i - 1], f1 = c.freqs[i];
    const double t = (f - f0) / (f1 - f0);
    return c.values[i - 1] + t * (c.values[i] - c.values[i - 1]);
}

Aligned align(const PsdCurve& a, const PsdCurve& b) {
    if (a.freqs.size() != a.values.size() || b.freqs.size() != b.values.size())
        throw InputError("PSD curve has mismatched frequency and value counts");
    if (same_grid(a, b)) return {a.values, b.values};
    Aligned out;
    if (a.freqs.empty() || b.freqs.empty()) throw InputError("PSD curve grids do not overlap");
    const double lo = b.freqs.front(), hi = b.freqs.back();
    for (std::size_t i = 0; i < a.freqs.size(); ++i) {
        const double f = a.freqs[i];
        if (f < lo || f > hi) continue;
        out.a.push_back(a.values[i]);
        out.b.push_back(interpolate(b, f));
    }
    if (out.a.empty()) throw InputError("PSD curve grids do not overlap");
    return out;
}

}  // namespace

double nmse_db(const PsdCurve& a, const PsdCurve& b) {
    const Aligned v = align(a, b);
    if (v.a.empty()) throw InputError("PSD curve grids do not overlap");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < v.a.size(); ++i) {
        const double d = v.a[i] - v.b[i];
        num += d * d;
        den += v.b[i] * v.b[i];
    }
    if (!(den > 0.0)) throw InputError("reference PSD curve has zero norm");
    if (num == 0.0) return -300.0;
    return std::max(-300.0, 10.0 * std::log10(num / den));
}

double cosine_similarity(const PsdCurve& a, const PsdCurve& b) {
    const Aligned v = align(a, b);
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < v.a.size(); ++i) {
        ab += v.a[i] * v.b[i];
        aa += v.a[i] * v.a[i];
        bb += v.b[i] * v.b[i];
    }
    if (!(aa > 0.0) || !(bb > 0.0)) throw InputError("cosine similarity of a zero-norm curve");
    return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

CurveComparison compare_normalized(const PsdCurve& estimate, const PsdCurve& reference, double lo, double hi) {
    const PsdCurve a = estimate.restricted(lo, hi).normalized_peak_one();
    const PsdCurve b = reference.restricted(lo, hi).normalized_peak_one();
    return {nmse_db(a, b), cosine_similarity(a, b)};
}

std::pair<double, double> comparison_band(const InterpolationFilterSpec& filter) {
    const double half = (filter.kind == FilterKind::Rect ? 1.5 : 0.5) / filter.sample_interval;
    return {-half, half};
}

StreamPsdEstimator::StreamPsdEstimator(std::size_t frame_len, const EstimatorSetup& setup,
                                       std::vector<std::size_t> checkpoints)
    : frame_len_(frame_len),
      recon_(setup.filter, setup.oversample),
      acc_(setup.segment_len > 0 ? setup.segment_len : static_cast<int>(frame_len) * setup.oversample,
           setup.oversample / setup.filter.sample_interval),
      checkpoints_(std::move(checkpoints)) {
    if (frame_len < 1) throw InputError("frame length must be positive");
    std::sort(checkpoints_.begin(), checkpoints_.end());
}

void StreamPsdEstimator::feed(std::span<const cd> dense) {
    // never use dense samples beyond the end of the last pushed frame
    const std::size_t limit = frames_ * frame_len_ * static_cast<std::size_t>(recon_.oversample());
    const std::size_t room = limit > consumed_ ? limit - consumed_ : 0;
    dense = dense.first(std::min(room, dense.size()));
    consumed_ += dense.size();

    const auto seg = static_cast<std::size_t>(acc_.segment_len());
    while (!dense.empty()) {
        // feed one segment boundary at a time so snapshots land on exact counts
        const std::size_t before = acc_.segments();
        const std::size_t chunk = std::min(dense.size(), seg);
        acc_.push(dense.first(chunk));
        dense = dense.subspan(chunk);
        if (acc_.segments() != before && snapshots_.size() < checkpoints_.size() &&
            acc_.segments() == checkpoints_[snapshots_.size()])
            snapshots_.push_back(acc_.result());
    }
}

void StreamPsdEstimator::push_frame(std::span<const cd> frame) {
    if (finished_) throw InputError("estimator already finished");
    if (frame.size() != frame_len_) throw InputError("frame length mismatch");
    ++frames_;
    scratch_.clear();
    recon_.push(frame, scratch_);
    feed(scratch_);
}

void StreamPsdEstimator::finish() {
    if (finished_) return;
    finished_ = true;
    scratch_.clear();
    recon_.finish(scratch_);
    feed(scratch_);
}

PsdCurve estimate_psd(const FrameGenerator& gen, std::size_t frame_len, std::size_t num_frames,
                      const EstimatorSetup& setup) {
    StreamPsdEstimator est(frame_len, setup);
    for (std::size_t i = 0; i < num_frames; ++i) est.push_frame(gen(i));
    est.finish();
    return est.result();
}

double AutocorrEstimate::z_score() const {
    const double diff = std::abs(base - shifted);
    const double se = std::hypot(base_se, shifted_se);
    if (se == 0.0) return diff == 0.0 ? 0.0 : INFINITY;
    return diff / se;
}

namespace {

struct MeanAndError {
    cd mean;
    double se;
};

MeanAndError mean_and_se(const CVector& v) {
    const auto n = static_cast<double>(v.size());
    cd sum{};
    for (const auto& x : v) sum += x;
    const cd mean = sum / n;
    double ss = 0.0;
    for (const auto& x : v) ss += std::norm(x - mean);
    const double se = v.size() > 1 ? std::sqrt(ss / ((n - 1.0) * n)) : 0.0;
    return {mean, se};
}

}  // namespace

std::vector<AutocorrEstimate> cyclo_autocorr(const FrameStream& stream, std::span<const AutocorrProbe> probes,
                                             long long shift) {
    stream.validate();
    if (shift < 0) throw InputError("autocorrelation shift must be nonnegative");
    const auto period = static_cast<long long>(stream.frame_length());
    long long reach = 0;
    for (const auto& p : probes) {
        if (p.eta < 0 || p.eta_hat < 0) throw InputError("autocorrelation probe indices must be nonnegative");
        reach = std::max({reach, p.eta + shift, p.eta_hat + shift});
    }
    const long long window = (reach / period + 1) * period;
    const CVector s = stream.concatenated();
    const auto realizations = static_cast<std::size_t>(static_cast<long long>(s.size()) / window);
    if (realizations < 2) throw InputError("not enough frames to estimate the requested autocorrelation probes");

    std::vector<AutocorrEstimate> out;
    out.reserve(probes.size());
    CVector base(realizations), moved(realizations);
    for (const auto& p : probes) {
        for (std::size_t r = 0; r < realizations; ++r) {
            const auto o = static_cast<std::size_t>(static_cast<long long>(r) * window);
            base[r] = std::conj(s[o + p.eta]) * s[o + p.eta_hat];
            moved[r] = std::conj(s[o + p.eta + shift]) * s[o + p.eta_hat + shift];
        }
        const auto b = mean_and_se(base);
        const auto m = mean_and_se(moved);
        out.push_back({b.mean, m.mean, b.se, m.se, realizations});
    }
    return out;
}

std::vector<MeanEstimate> cyclic_mean(const FrameStream& stream) {
    stream.validate();
    if (stream.frames.size() < 2) throw InputError("not enough frames to estimate the mean");
    const std::size_t P = stream.frame_length();
    std::vector<MeanEstimate> out(P);
    CVector column(stream.frames.size());
    for (std::size_t p = 0; p < P; ++p) {
        for (std::size_t i = 0; i < stream.frames.size(); ++i) column[i] = stream.frames[i].samples[p];
        const auto m = mean_and_se(column);
        out[p] = {m.mean, m.se};
    }
    return out;
}

}  // namespace otfs
