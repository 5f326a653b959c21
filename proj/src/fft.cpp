#include "otfs/fft.hpp"

#include <mutex>

#include <fftw3.h>

namespace otfs {

namespace {
// The FFTW planner is not reentrant; execution with new-array is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

struct FftPlan::Impl {
    fftw_plan plan = nullptr;

    ~Impl() {
        if (plan) {
            std::lock_guard lock(planner_mutex());
            fftw_destroy_plan(plan);
        }
    }
};

FftPlan::FftPlan(int n, Direction dir) : impl_(std::make_unique<Impl>()), n_(n) {
    if (n < 1) throw InputError("FFT length must be positive");
    std::lock_guard lock(planner_mutex());
    fftw_complex* in = fftw_alloc_complex(n);
    fftw_complex* out = fftw_alloc_complex(n);
    impl_->plan = fftw_plan_dft_1d(n, in, out, dir == Direction::Forward ? FFTW_FORWARD : FFTW_BACKWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    if (!impl_->plan) throw Error("FFTW failed to create a plan");
}

FftPlan::~FftPlan() = default;

FftPlan::FftPlan(FftPlan&&) noexcept = default;
FftPlan& FftPlan::operator=(FftPlan&&) noexcept = default;

void FftPlan::execute(std::span<const cd> in, std::span<cd> out) const {
    if (static_cast<int>(in.size()) != n_ || static_cast<int>(out.size()) != n_)
        throw InputError("FFT buffer length does not match plan");
    if (in.data() == out.data()) {
        CVector copy(in.begin(), in.end());
        execute(copy, out);
        return;
    }
    // fftw_execute_dft does not write to its input for out-of-place complex plans.
    auto* src = reinterpret_cast<fftw_complex*>(const_cast<cd*>(in.data()));
    auto* dst = reinterpret_cast<fftw_complex*>(out.data());
    fftw_execute_dft(impl_->plan, src, dst);
}

}  // namespace otfs
