#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "otfs/dac.hpp"
#include "otfs/io.hpp"
#include "otfs/precoding.hpp"
#include "otfs/types.hpp"
#include "otfs/waveform.hpp"

namespace otfs {

/// Zero-setting layouts of the information matrix.
///   block_diag_x1      row l occupies the columns c with floor(c*M/N) == l
///   head_tail_columns  ceil(b/2) entries in column-major order from the start,
///                      floor(b/2) from the end
///   head_tail_rows     same split in row-major order
/// Every selected entry gets sigma^2 = 1. block_diag_x1 ignores the budget.
VarianceProfile builtin_pattern(const std::string& name, int M, int N, int budget);
std::vector<std::string> builtin_pattern_names();

/// One DAC filter to evaluate, with its own estimator settings.
struct FilterRun {
    InterpolationFilterSpec spec;
    int oversample = 1;
    std::size_t num_frames = 0;
    int segment_len = 0;
};

struct ScenarioConfig {
    std::string name = "custom";
    int M = 0;
    int N = 0;
    double sample_interval = 1.0;
    double sample_rate = 1.0;
    Modulation modulation = Modulation::OTFS;
    Constellation constellation;
    /// Symbol powers. Absent only for precoded (masked) scenarios.
    std::optional<VarianceProfile> profile;
    std::optional<SpectrumMask> mask;
    std::vector<std::pair<double, double>> pass_bands_hz;
    PrecoderForm precoder = PrecoderForm::NullSpace;
    std::vector<FilterRun> filters;
    std::uint64_t seed = 0;
    int grid_points = 4096;
    std::vector<std::string> tasks;
    std::vector<std::size_t> checkpoints;
    std::size_t null_trials = 100;
    std::string output_dir;

    /// The JSON the config was parsed from and its hash.
    nlohmann::json source;
    std::string hash;

    bool has_task(const std::string& t) const;
};

/// Parses and validates a scenario. All violations are reported together in
/// one ConfigError.
///
/// Keys: name, M, N, T_s or f_s, modulation (otfs|ofdm), constellation,
/// profile {sigma2 | subcarrier_sigma2 | subcarrier_ranges}, pattern {name,
/// budget}, mask {null_bins | pass_bands_hz}, precoder (nslp|systematic),
/// filters [{kind, order, oversample, num_frames, segment_len}], num_frames,
/// oversample_L, segment_len, seed, grid_points, tasks, checkpoints,
/// null_trials, output_dir.
ScenarioConfig parse_config(const nlohmann::json& j);

std::vector<std::string> preset_names();
std::string preset_description(const std::string& name);
/// Throws ConfigError for unknown names.
nlohmann::json preset_config(const std::string& name);

struct ScenarioResult {
    std::vector<std::filesystem::path> files;
    std::vector<io::MetricRecord> metrics;

    /// Throws InputError if the metric is missing.
    double metric(const std::string& name) const;
};

/// Runs every task of the scenario, writing outputs under out_dir:
///   analytic    analytic_<filter>.csv
///   estimate    estimate_<filter>.csv; NMSE/cosine against the analytic PSD,
///               or null suppression when a mask is set
///   cep         cep_<l>_<filter>.csv, cep_sum_<filter>.csv, cep_otfs_<filter>.csv,
///               cep_analytic_<l>_<filter>.csv, trend_<filter>.csv at checkpoints
///   precoders   mask.json, precoders.csv, null depth and power checks
///   bandwidth   bandwidth.json
/// plus config.json and metrics.json.
ScenarioResult run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir);

/// Occupied bandwidth on the discrete frequency grid.
struct BandwidthReport {
    std::size_t occupied_bins = 0;
    double bin_spacing_hz = 0.0;
    double occupied_bandwidth_hz = 0.0;
    double lowest_hz = 0.0;
    double highest_hz = 0.0;
};

/// OFDM: subcarriers with nonzero power times f_s/N. OTFS: bins of the
/// MN-point grid carrying power (all of subcarrier comb k when sigma^2_k > 0,
/// or the mask's used bins) times f_s/(MN).
BandwidthReport bandwidth_report(const ScenarioConfig& config);

}  // namespace otfs
