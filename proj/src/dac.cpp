#include "otfs/dac.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace otfs {

FilterKind InterpolationFilterSpec::parse_kind(const std::string& name) {
    if (name == "dirac" || name == "delta" || name == "dirac_delta") return FilterKind::DiracDelta;
    if (name == "sinc" || name == "truncated_sinc") return FilterKind::TruncatedSinc;
    if (name == "rect" || name == "rectangular" || name == "zoh") return FilterKind::Rect;
    throw ConfigError("unknown interpolation filter '" + name + "'");
}

std::string InterpolationFilterSpec::name() const {
    switch (kind) {
        case FilterKind::DiracDelta: return "dirac";
        case FilterKind::TruncatedSinc: return "sinc";
        case FilterKind::Rect: return "rect";
    }
    return "dirac";
}

void InterpolationFilterSpec::validate() const {
    if (!(sample_interval > 0.0) || !std::isfinite(sample_interval))
        throw ConfigError("filter sample interval must be positive");
    if (kind == FilterKind::TruncatedSinc && order < 1) throw ConfigError("truncated sinc order must be >= 1");
}

double sinc_pi(double x) {
    if (x == 0.0) return 1.0;
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

double rect(double x) {
    const double a = std::abs(x);
    if (a < 0.5) return 1.0;
    if (a == 0.5) return 0.5;
    return 0.0;
}

double filter_response_sq(const InterpolationFilterSpec& filter, double f) {
    const double x = f * filter.sample_interval;
    switch (filter.kind) {
        case FilterKind::DiracDelta: return 1.0;
        case FilterKind::TruncatedSinc: {
            const double r = rect(x);
            return r * r;
        }
        case FilterKind::Rect: {
            const double s = sinc_pi(x);
            return s * s;
        }
    }
    return 1.0;
}

void validate_reconstruction(const InterpolationFilterSpec& filter, int oversample) {
    filter.validate();
    if (oversample < 1) throw ConfigError("oversampling factor must be >= 1");
    if (filter.kind == FilterKind::DiracDelta && oversample != 1)
        throw ConfigError("Dirac delta interpolation is the discrete sequence itself; oversampling must be 1");
}

namespace {

struct Kernel {
    long long lo = 0;  // first dense offset relative to eta*L
    std::vector<double> taps;
};

Kernel make_kernel(const InterpolationFilterSpec& filter, int L) {
    Kernel k;
    switch (filter.kind) {
        case FilterKind::DiracDelta:
            k.taps = {1.0};
            break;
        case FilterKind::Rect:
            k.taps.assign(static_cast<std::size_t>(L), 1.0);
            break;
        case FilterKind::TruncatedSinc: {
            const long long R = static_cast<long long>(filter.order) * L;
            k.lo = -R;
            k.taps.resize(static_cast<std::size_t>(2 * R + 1));
            for (long long o = -R; o <= R; ++o)
                k.taps[static_cast<std::size_t>(o + R)] = sinc_pi(static_cast<double>(o) / L);
            break;
        }
    }
    return k;
}

void scatter(cd x, const std::vector<double>& taps, cd* dst) {
    for (std::size_t t = 0; t < taps.size(); ++t) dst[t] += x * taps[t];
}

}  // namespace

OversampledSignal reconstruct(std::span<const cd> samples, const InterpolationFilterSpec& filter, int oversample) {
    validate_reconstruction(filter, oversample);
    const Kernel kernel = make_kernel(filter, oversample);
    const long long L = oversample;
    const long long n = static_cast<long long>(samples.size());
    const long long width = static_cast<long long>(kernel.taps.size());

    OversampledSignal out;
    out.sample_rate = static_cast<double>(L) / filter.sample_interval;
    out.origin_time = static_cast<double>(kernel.lo) / static_cast<double>(L) * filter.sample_interval;
    if (n == 0) return out;
    out.samples.assign(static_cast<std::size_t>((n - 1) * L + width), cd{});
    for (long long eta = 0; eta < n; ++eta) {
        const cd x = samples[static_cast<std::size_t>(eta)];
        if (x == cd{}) continue;
        scatter(x, kernel.taps, out.samples.data() + eta * L);
    }
    return out;
}

OversampledSignal reconstruct(const FrameStream& stream, const InterpolationFilterSpec& filter, int oversample) {
    stream.validate();
    const CVector flat = stream.concatenated();
    return reconstruct(flat, filter, oversample);
}

StreamingReconstructor::StreamingReconstructor(const InterpolationFilterSpec& filter, int oversample)
    : filter_(filter), L_(oversample) {
    validate_reconstruction(filter, oversample);
    Kernel k = make_kernel(filter, oversample);
    reach_ = -k.lo;
    taps_ = std::move(k.taps);
    base_ = -reach_;
}

void StreamingReconstructor::push(std::span<const cd> input, CVector& out) {
    const long long L = L_;
    const long long width = static_cast<long long>(taps_.size());
    const long long last = inputs_ + static_cast<long long>(input.size()) - 1;
    const long long needed = last * L - reach_ + width - base_;
    if (needed > static_cast<long long>(pending_.size())) pending_.resize(static_cast<std::size_t>(needed), cd{});

    for (const cd& x : input) {
        if (x != cd{}) scatter(x, taps_, pending_.data() + (inputs_ * L - reach_ - base_));
        ++inputs_;
    }

    // Future inputs only touch dense indices >= inputs_*L - reach_.
    const long long final_end = inputs_ * L - reach_;
    const long long count = std::min<long long>(final_end - base_, static_cast<long long>(pending_.size()));
    if (count <= 0) return;
    const long long skip = std::clamp<long long>(-base_, 0, count);
    out.insert(out.end(), pending_.begin() + skip, pending_.begin() + count);
    pending_.erase(pending_.begin(), pending_.begin() + count);
    base_ += count;
}

void StreamingReconstructor::finish(CVector& out) {
    const long long count = static_cast<long long>(pending_.size());
    const long long skip = std::clamp<long long>(-base_, 0, count);
    out.insert(out.end(), pending_.begin() + skip, pending_.end());
    base_ += count;
    pending_.clear();
}

}  // namespace otfs
