#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace otfs {

using cd = std::complex<double>;
using CVector = std::vector<cd>;

// Error hierarchy. The CLI maps ConfigError to exit code 2 and
// FeasibilityError to exit code 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class InputError : public Error {
public:
    using Error::Error;
};

class IndexError : public InputError {
public:
    using InputError::InputError;
};

class FeasibilityError : public Error {
public:
    using Error::Error;
};

enum class Modulation { OTFS, OFDM };

/// M x N matrix of delay-Doppler information symbols x_{l,k}.
///
/// Row l is the delay (vector) index, column k the Doppler (subcarrier)
/// index. Storage is column-major, so the underlying buffer is vec(X):
/// x_{0,0}, x_{1,0}, ..., x_{M-1,0}, x_{0,1}, ...
class DelayDopplerGrid {
public:
    DelayDopplerGrid(int M, int N);
    explicit DelayDopplerGrid(Eigen::MatrixXcd entries);

    int M() const { return static_cast<int>(entries_.rows()); }
    int N() const { return static_cast<int>(entries_.cols()); }

    cd operator()(int l, int k) const { return entries_(l, k); }
    cd& operator()(int l, int k) { return entries_(l, k); }

    const Eigen::MatrixXcd& matrix() const { return entries_; }
    Eigen::MatrixXcd& matrix() { return entries_; }

    /// Column-major vectorization vec(X).
    Eigen::VectorXcd vec() const;

private:
    Eigen::MatrixXcd entries_;
};

/// Per-bin symbol power sigma^2_{l,k}.
class VarianceProfile {
public:
    VarianceProfile(int M, int N, double fill = 0.0);
    explicit VarianceProfile(Eigen::MatrixXd sigma2);

    /// Same power on every delay row l for each subcarrier k.
    static VarianceProfile from_subcarrier_powers(int M, const std::vector<double>& per_k);

    int M() const { return static_cast<int>(sigma2_.rows()); }
    int N() const { return static_cast<int>(sigma2_.cols()); }

    double operator()(int l, int k) const { return sigma2_(l, k); }
    const Eigen::MatrixXd& matrix() const { return sigma2_; }

    /// sigma^2_k = (1/M) * sum_l sigma^2_{l,k}
    Eigen::VectorXd subcarrier_powers() const;

private:
    Eigen::MatrixXd sigma2_;
};

/// One symbol period of baseband samples.
struct BasebandFrame {
    CVector samples;
    double sample_interval = 1.0;
};

struct FrameStream {
    int M = 0;
    int N = 0;
    double sample_interval = 1.0;
    std::uint64_t seed = 0;
    std::vector<BasebandFrame> frames;

    std::size_t frame_length() const { return static_cast<std::size_t>(M) * N; }
    std::size_t total_samples() const { return frames.size() * frame_length(); }

    /// Frames laid end to end (the sequence s_eta).
    CVector concatenated() const;

    /// Throws InputError if frames disagree on length or sample interval.
    void validate() const;
};

}  // namespace otfs
