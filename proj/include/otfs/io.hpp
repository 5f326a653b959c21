#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "otfs/dac.hpp"
#include "otfs/precoding.hpp"
#include "otfs/psd_analytic.hpp"
#include "otfs/types.hpp"

namespace otfs::io {

enum class SampleFormat { Csv, Binary };

SampleFormat parse_sample_format(const std::string& s);

/// On-disk sample sequence shared by frame streams and oversampled signals.
///
/// CSV: '#'-prefixed key=value header lines (M, N, T_s, seed, sample_rate,
/// origin_time), a "re,im" column line, then one sample per row.
/// Binary: magic "OTFSSMP1", int32 M, int32 N, f64 T_s, u64 seed,
/// f64 sample_rate, f64 origin_time, u64 count, then count interleaved
/// (re, im) f64 pairs, little endian.
struct SampleFile {
    int M = 0;
    int N = 0;
    double sample_interval = 1.0;
    std::uint64_t seed = 0;
    double sample_rate = 1.0;
    double origin_time = 0.0;
    CVector samples;
};

void write_samples(const std::filesystem::path& path, const SampleFile& file, SampleFormat format);
/// Format is detected from the leading bytes.
SampleFile read_samples(const std::filesystem::path& path);

SampleFile from_stream(const FrameStream& stream);
SampleFile from_oversampled(const OversampledSignal& signal, int M, int N, double sample_interval, std::uint64_t seed);
/// Throws InputError unless the file holds whole frames at rate 1/T_s.
FrameStream to_stream(const SampleFile& file);

/// Header rows written above the freq_hz,psd_value columns.
struct CurveHeader {
    int M = 0;
    int N = 0;
    double sample_interval = 1.0;
    std::string filter = "dirac";
    std::string config_hash;
};

void write_curve(const std::filesystem::path& path, const PsdCurve& curve, const CurveHeader& header);
PsdCurve read_curve(const std::filesystem::path& path, CurveHeader* header = nullptr);

/// Mask file: {"M", "N", "T_s", and either "null_bins": [...] or "pass_bands_hz": [[lo, hi], ...]}.
struct MaskFile {
    SpectrumMask mask;
    double sample_interval;
};
MaskFile parse_mask(const nlohmann::json& j);
MaskFile read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const SpectrumMask& mask, double sample_interval);

/// Rows "k,row,col,re,im" for every entry of every P_k.
void write_precoders(const std::filesystem::path& path, const PrecoderSet& set, const std::string& config_hash = {});
PrecoderSet read_precoders(const std::filesystem::path& path);

struct MetricRecord {
    std::string metric;
    double value = 0.0;
    std::string config_hash;
};

void write_metrics(const std::filesystem::path& path, const std::vector<MetricRecord>& records);
std::vector<MetricRecord> read_metrics(const std::filesystem::path& path);

/// Shortest text that round-trips the double exactly.
std::string format_double(double v);

/// 64-bit FNV-1a of the text, as 16 hex digits.
std::string hash_text(const std::string& text);

nlohmann::json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace otfs::io
