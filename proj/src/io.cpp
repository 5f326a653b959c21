#include "otfs/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace otfs::io {

namespace fs = std::filesystem;

namespace {

constexpr char kSampleMagic[8] = {'O', 'T', 'F', 'S', 'S', 'M', 'P', '1'};

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw InputError("cannot open '" + path.string() + "' for reading");
    return in;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
    return out;
}

double parse_double(const std::string& s, const std::string& what) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw InputError("malformed number for " + what + ": '" + s + "'");
    return v;
}

std::string trim(std::string s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

// Reads '# key=value' header lines and returns the first non-header line via `first_data`.
std::map<std::string, std::string> read_header(std::istream& in, std::string& column_line) {
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        if (line[0] != '#') {
            column_line = line;
            return kv;
        }
        const auto body = trim(line.substr(1));
        const auto eq = body.find('=');
        if (eq != std::string::npos) kv[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
    }
    column_line.clear();
    return kv;
}

std::pair<double, double> split_pair(const std::string& line) {
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw InputError("malformed CSV row: '" + line + "'");
    return {parse_double(line.substr(0, comma), "column 1"), parse_double(line.substr(comma + 1), "column 2")};
}

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw InputError("truncated binary sample file");
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string hash_text(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

SampleFormat parse_sample_format(const std::string& s) {
    if (s == "csv") return SampleFormat::Csv;
    if (s == "bin" || s == "binary") return SampleFormat::Binary;
    throw ConfigError("unknown sample format '" + s + "' (expected csv or bin)");
}

void write_samples(const fs::path& path, const SampleFile& file, SampleFormat format) {
    if (format == SampleFormat::Binary) {
        auto out = open_out(path, std::ios::binary);
        out.write(kSampleMagic, sizeof(kSampleMagic));
        put<std::int32_t>(out, file.M);
        put<std::int32_t>(out, file.N);
        put<double>(out, file.sample_interval);
        put<std::uint64_t>(out, file.seed);
        put<double>(out, file.sample_rate);
        put<double>(out, file.origin_time);
        put<std::uint64_t>(out, file.samples.size());
        out.write(reinterpret_cast<const char*>(file.samples.data()),
                  static_cast<std::streamsize>(file.samples.size() * sizeof(cd)));
        return;
    }
    auto out = open_out(path);
    out << "# otfs-samples v1\n"
        << "# M=" << file.M << "\n"
        << "# N=" << file.N << "\n"
        << "# T_s=" << format_double(file.sample_interval) << "\n"
        << "# seed=" << file.seed << "\n"
        << "# sample_rate=" << format_double(file.sample_rate) << "\n"
        << "# origin_time=" << format_double(file.origin_time) << "\n"
        << "re,im\n";
    for (const auto& s : file.samples) out << format_double(s.real()) << ',' << format_double(s.imag()) << '\n';
}

SampleFile read_samples(const fs::path& path) {
    {
        auto probe = open_in(path, std::ios::binary);
        char magic[8] = {};
        probe.read(magic, sizeof(magic));
        if (probe.gcount() == 8 && std::memcmp(magic, kSampleMagic, 8) == 0) {
            SampleFile f;
            f.M = get<std::int32_t>(probe);
            f.N = get<std::int32_t>(probe);
            f.sample_interval = get<double>(probe);
            f.seed = get<std::uint64_t>(probe);
            f.sample_rate = get<double>(probe);
            f.origin_time = get<double>(probe);
            const auto count = get<std::uint64_t>(probe);
            f.samples.resize(count);
            probe.read(reinterpret_cast<char*>(f.samples.data()), static_cast<std::streamsize>(count * sizeof(cd)));
            if (!probe) throw InputError("truncated binary sample file");
            return f;
        }
    }
    auto in = open_in(path);
    std::string columns;
    const auto kv = read_header(in, columns);
    auto need = [&](const char* key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw InputError(std::string("sample file header lacks '") + key + "'");
        return it->second;
    };
    SampleFile f;
    f.M = static_cast<int>(parse_double(need("M"), "M"));
    f.N = static_cast<int>(parse_double(need("N"), "N"));
    f.sample_interval = parse_double(need("T_s"), "T_s");
    f.seed = std::stoull(need("seed"));
    f.sample_rate = kv.count("sample_rate") ? parse_double(kv.at("sample_rate"), "sample_rate") : 1.0 / f.sample_interval;
    f.origin_time = kv.count("origin_time") ? parse_double(kv.at("origin_time"), "origin_time") : 0.0;
    if (columns != "re,im") throw InputError("sample file lacks the 're,im' column line");
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        const auto [re, im] = split_pair(line);
        f.samples.emplace_back(re, im);
    }
    return f;
}

SampleFile from_stream(const FrameStream& stream) {
    stream.validate();
    SampleFile f;
    f.M = stream.M;
    f.N = stream.N;
    f.sample_interval = stream.sample_interval;
    f.seed = stream.seed;
    f.sample_rate = 1.0 / stream.sample_interval;
    f.samples = stream.concatenated();
    return f;
}

SampleFile from_oversampled(const OversampledSignal& signal, int M, int N, double sample_interval, std::uint64_t seed) {
    SampleFile f;
    f.M = M;
    f.N = N;
    f.sample_interval = sample_interval;
    f.seed = seed;
    f.sample_rate = signal.sample_rate;
    f.origin_time = signal.origin_time;
    f.samples = signal.samples;
    return f;
}

FrameStream to_stream(const SampleFile& file) {
    if (file.M < 1 || file.N < 1) throw InputError("sample file has invalid M or N");
    if (std::abs(file.sample_rate * file.sample_interval - 1.0) > 1e-12)
        throw InputError("sample file is oversampled; it is not a frame stream");
    const std::size_t P = static_cast<std::size_t>(file.M) * file.N;
    if (file.samples.size() % P != 0) throw InputError("sample count is not a whole number of frames");
    FrameStream s;
    s.M = file.M;
    s.N = file.N;
    s.sample_interval = file.sample_interval;
    s.seed = file.seed;
    for (std::size_t o = 0; o < file.samples.size(); o += P)
        s.frames.push_back({CVector(file.samples.begin() + static_cast<std::ptrdiff_t>(o),
                                    file.samples.begin() + static_cast<std::ptrdiff_t>(o + P)),
                            file.sample_interval});
    return s;
}

void write_curve(const fs::path& path, const PsdCurve& curve, const CurveHeader& header) {
    curve.validate();
    auto out = open_out(path);
    out << "# M=" << header.M << "\n"
        << "# N=" << header.N << "\n"
        << "# T_s=" << format_double(header.sample_interval) << "\n"
        << "# filter=" << header.filter << "\n"
        << "# normalization=" << to_string(curve.normalization) << "\n";
    if (!header.config_hash.empty()) out << "# config_hash=" << header.config_hash << "\n";
    out << "freq_hz,psd_value\n";
    for (std::size_t i = 0; i < curve.size(); ++i)
        out << format_double(curve.freqs[i]) << ',' << format_double(curve.values[i]) << '\n';
}

PsdCurve read_curve(const fs::path& path, CurveHeader* header) {
    auto in = open_in(path);
    std::string columns;
    const auto kv = read_header(in, columns);
    if (columns != "freq_hz,psd_value") throw InputError("curve file lacks the 'freq_hz,psd_value' column line");
    PsdCurve c;
    if (auto it = kv.find("normalization"); it != kv.end()) c.normalization = parse_normalization(it->second);
    if (header) {
        if (auto it = kv.find("M"); it != kv.end()) header->M = std::stoi(it->second);
        if (auto it = kv.find("N"); it != kv.end()) header->N = std::stoi(it->second);
        if (auto it = kv.find("T_s"); it != kv.end()) header->sample_interval = parse_double(it->second, "T_s");
        if (auto it = kv.find("filter"); it != kv.end()) header->filter = it->second;
        if (auto it = kv.find("config_hash"); it != kv.end()) header->config_hash = it->second;
    }
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        const auto [f, v] = split_pair(line);
        c.freqs.push_back(f);
        c.values.push_back(v);
    }
    c.validate();
    return c;
}

MaskFile parse_mask(const nlohmann::json& j) {
    try {
        const int M = j.at("M").get<int>();
        const int N = j.at("N").get<int>();
        double T = 1.0;
        if (j.contains("T_s")) T = j.at("T_s").get<double>();
        else if (j.contains("f_s")) T = 1.0 / j.at("f_s").get<double>();
        const bool has_bins = j.contains("null_bins");
        const bool has_bands = j.contains("pass_bands_hz");
        if (has_bins == has_bands) throw ConfigError("mask needs exactly one of 'null_bins' or 'pass_bands_hz'");
        if (has_bins) {
            const auto bins = j.at("null_bins").get<std::vector<int>>();
            return {decompose_mask(bins, M, N), T};
        }
        std::vector<std::pair<double, double>> bands;
        for (const auto& b : j.at("pass_bands_hz")) {
            if (!b.is_array() || b.size() != 2) throw ConfigError("pass band must be [lo, hi]");
            bands.emplace_back(b[0].get<double>(), b[1].get<double>());
        }
        return {mask_from_pass_bands(bands, M, N, T), T};
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed mask: ") + e.what());
    } catch (const InputError& e) {
        throw ConfigError(std::string("invalid mask: ") + e.what());
    }
}

nlohmann::json read_json(const fs::path& path) {
    auto in = open_in(path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("cannot parse '" + path.string() + "': " + e.what());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
}

MaskFile read_mask(const fs::path& path) { return parse_mask(read_json(path)); }

void write_mask(const fs::path& path, const SpectrumMask& mask, double sample_interval) {
    nlohmann::json j;
    j["M"] = mask.M();
    j["N"] = mask.N();
    j["T_s"] = sample_interval;
    j["null_bins"] = mask.null_bins();
    write_text(path, j.dump(2) + "\n");
}

void write_precoders(const fs::path& path, const PrecoderSet& set, const std::string& config_hash) {
    auto out = open_out(path);
    out << "# form=" << (set.form == PrecoderForm::NullSpace ? "nslp" : "systematic") << "\n"
        << "# M=" << set.M << "\n"
        << "# N=" << set.N << "\n";
    for (int k = 0; k < set.N; ++k) out << "# cols_" << k << "=" << set.payload_size(k) << "\n";
    if (!config_hash.empty()) out << "# config_hash=" << config_hash << "\n";
    out << "k,row,col,re,im\n";
    for (int k = 0; k < set.N; ++k) {
        const auto& P = set.per_subcarrier[static_cast<std::size_t>(k)];
        for (Eigen::Index c = 0; c < P.cols(); ++c)
            for (Eigen::Index r = 0; r < P.rows(); ++r)
                out << k << ',' << r << ',' << c << ',' << format_double(P(r, c).real()) << ','
                    << format_double(P(r, c).imag()) << '\n';
    }
}

PrecoderSet read_precoders(const fs::path& path) {
    auto in = open_in(path);
    std::string columns;
    const auto kv = read_header(in, columns);
    if (columns != "k,row,col,re,im") throw InputError("precoder file lacks the 'k,row,col,re,im' column line");
    PrecoderSet set;
    set.form = kv.at("form") == "systematic" ? PrecoderForm::Systematic : PrecoderForm::NullSpace;
    set.M = std::stoi(kv.at("M"));
    set.N = std::stoi(kv.at("N"));
    for (int k = 0; k < set.N; ++k)
        set.per_subcarrier.emplace_back(Eigen::MatrixXcd::Zero(set.M, std::stoi(kv.at("cols_" + std::to_string(k)))));
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> f;
        while (std::getline(ss, field, ',')) f.push_back(field);
        if (f.size() != 5) throw InputError("malformed precoder row: '" + line + "'");
        auto& P = set.per_subcarrier.at(static_cast<std::size_t>(std::stoi(f[0])));
        P(std::stoi(f[1]), std::stoi(f[2])) = cd(parse_double(f[3], "re"), parse_double(f[4], "im"));
    }
    return set;
}

void write_metrics(const fs::path& path, const std::vector<MetricRecord>& records) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : records) arr.push_back({{"metric", r.metric}, {"value", r.value}, {"config_hash", r.config_hash}});
    write_text(path, arr.dump(2) + "\n");
}

std::vector<MetricRecord> read_metrics(const fs::path& path) {
    const auto j = read_json(path);
    std::vector<MetricRecord> out;
    for (const auto& r : j) out.push_back({r.at("metric").get<std::string>(), r.at("value").get<double>(),
                                           r.at("config_hash").get<std::string>()});
    return out;
}

}  // namespace otfs::io
