#pragma once

#include <memory>
#include <span>

#include "otfs/types.hpp"

namespace otfs {

/// Unnormalized 1-D complex DFT of a fixed length, forward sign exp(-j*2*pi*.../n).
/// Thin RAII wrapper over an FFTW plan; execute() is safe to call concurrently
/// on distinct buffers.
class FftPlan {
public:
    enum class Direction { Forward, Backward };

    explicit FftPlan(int n, Direction dir = Direction::Forward);
    ~FftPlan();
    FftPlan(FftPlan&&) noexcept;
    FftPlan& operator=(FftPlan&&) noexcept;
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;

    int size() const { return n_; }

    void execute(std::span<const cd> in, std::span<cd> out) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int n_ = 0;
};

}  // namespace otfs
