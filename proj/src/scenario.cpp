#include "otfs/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "otfs/psd_analytic.hpp"
#include "otfs/psd_estimate.hpp"

namespace otfs {

namespace fs = std::filesystem;
using nlohmann::json;

VarianceProfile builtin_pattern(const std::string& name, int M, int N, int budget) {
    if (M < 1 || N < 1) throw ConfigError("pattern needs positive M and N");
    const long long MN = static_cast<long long>(M) * N;
    if (budget < 0 || budget > MN)
        throw ConfigError("pattern budget " + std::to_string(budget) + " outside [0, M*N = " + std::to_string(MN) + "]");
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(M, N);
    if (name == "block_diag_x1") {
        for (int c = 0; c < N; ++c) {
            const int l = static_cast<int>(static_cast<long long>(c) * M / N);
            s(l, c) = 1.0;
        }
        return VarianceProfile(std::move(s));
    }
    const long long head = (budget + 1) / 2;
    const long long tail = budget / 2;
    if (name == "head_tail_columns") {
        for (long long i = 0; i < head; ++i) s(i % M, i / M) = 1.0;
        for (long long i = MN - tail; i < MN; ++i) s(i % M, i / M) = 1.0;
    } else if (name == "head_tail_rows") {
        for (long long i = 0; i < head; ++i) s(i / N, i % N) = 1.0;
        for (long long i = MN - tail; i < MN; ++i) s(i / N, i % N) = 1.0;
    } else {
        throw ConfigError("unknown pattern '" + name + "' (expected block_diag_x1, head_tail_columns or head_tail_rows)");
    }
    return VarianceProfile(std::move(s));
}

std::vector<std::string> builtin_pattern_names() { return {"block_diag_x1", "head_tail_columns", "head_tail_rows"}; }

bool ScenarioConfig::has_task(const std::string& t) const {
    return std::find(tasks.begin(), tasks.end(), t) != tasks.end();
}

namespace {

const std::set<std::string> kKnownKeys = {
    "name",     "M",           "N",       "T_s",        "f_s",         "modulation",  "constellation",
    "profile",  "pattern",     "mask",    "precoder",   "filters",     "num_frames",  "oversample_L",
    "segment_len", "seed",     "grid_points", "tasks",  "checkpoints", "null_trials", "output_dir"};

const std::set<std::string> kTasks = {"analytic", "estimate", "cep", "precoders", "bandwidth"};

// Collects every problem instead of stopping at the first one.
class Reader {
public:
    explicit Reader(const json& j) : j_(j) {}

    std::vector<std::string> errors;

    void fail(std::string msg) { errors.push_back(std::move(msg)); }

    bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    std::optional<long long> integer(const char* key) {
        if (!has(key)) return std::nullopt;
        const auto& v = j_.at(key);
        if (v.is_number_integer()) return v.get<long long>();
        if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>()) return static_cast<long long>(v.get<double>());
        fail(std::string("'") + key + "' must be an integer");
        return std::nullopt;
    }

    std::optional<double> number(const char* key) {
        if (!has(key)) return std::nullopt;
        const auto& v = j_.at(key);
        if (v.is_number()) return v.get<double>();
        fail(std::string("'") + key + "' must be a number");
        return std::nullopt;
    }

    std::optional<std::string> text(const char* key) {
        if (!has(key)) return std::nullopt;
        const auto& v = j_.at(key);
        if (v.is_string()) return v.get<std::string>();
        fail(std::string("'") + key + "' must be a string");
        return std::nullopt;
    }

private:
    const json& j_;
};

std::optional<VarianceProfile> read_profile(const json& p, int M, int N, Reader& r) {
    if (!p.is_object()) {
        r.fail("'profile' must be an object");
        return std::nullopt;
    }
    const int forms = static_cast<int>(p.contains("sigma2")) + static_cast<int>(p.contains("subcarrier_sigma2")) +
                      static_cast<int>(p.contains("subcarrier_ranges"));
    if (forms != 1) {
        r.fail("'profile' needs exactly one of sigma2, subcarrier_sigma2, subcarrier_ranges");
        return std::nullopt;
    }
    try {
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(M, N);
        if (p.contains("sigma2")) {
            const auto rows = p.at("sigma2").get<std::vector<std::vector<double>>>();
            if (static_cast<int>(rows.size()) != M) {
                r.fail("profile.sigma2 must have M rows");
                return std::nullopt;
            }
            for (int l = 0; l < M; ++l) {
                if (static_cast<int>(rows[static_cast<std::size_t>(l)].size()) != N) {
                    r.fail("profile.sigma2 row " + std::to_string(l) + " must have N entries");
                    return std::nullopt;
                }
                for (int k = 0; k < N; ++k) s(l, k) = rows[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)];
            }
        } else if (p.contains("subcarrier_sigma2")) {
            const auto per_k = p.at("subcarrier_sigma2").get<std::vector<double>>();
            if (static_cast<int>(per_k.size()) != N) {
                r.fail("profile.subcarrier_sigma2 must have N entries");
                return std::nullopt;
            }
            for (int k = 0; k < N; ++k) s.col(k).setConstant(per_k[static_cast<std::size_t>(k)]);
        } else {
            // inclusive [first, last] subcarrier ranges at unit power
            for (const auto& range : p.at("subcarrier_ranges")) {
                const auto ab = range.get<std::vector<int>>();
                if (ab.size() != 2 || ab[0] > ab[1] || ab[0] < 0 || ab[1] >= N) {
                    r.fail("profile.subcarrier_ranges entries must be [first, last] within [0, N)");
                    return std::nullopt;
                }
                for (int k = ab[0]; k <= ab[1]; ++k) s.col(k).setOnes();
            }
        }
        if ((s.array() < 0.0).any() || !s.allFinite()) {
            r.fail("profile powers must be finite and nonnegative");
            return std::nullopt;
        }
        return VarianceProfile(std::move(s));
    } catch (const json::exception& e) {
        r.fail(std::string("malformed profile: ") + e.what());
        return std::nullopt;
    }
}

std::vector<FilterRun> read_filters(const json& j, Reader& r, std::size_t frames, int oversample, int segment) {
    std::vector<FilterRun> out;
    if (!j.is_array() || j.empty()) {
        r.fail("'filters' must be a non-empty array");
        return out;
    }
    for (const auto& f : j) {
        if (f.is_string()) {
            FilterRun run;
            try {
                run.spec.kind = InterpolationFilterSpec::parse_kind(f.get<std::string>());
            } catch (const ConfigError& e) {
                r.fail(e.what());
                continue;
            }
            run.spec.order = 50;
            run.oversample = run.spec.kind == FilterKind::DiracDelta ? 1 : oversample;
            run.num_frames = frames;
            run.segment_len = segment;
            out.push_back(run);
            continue;
        }
        if (!f.is_object() || !f.contains("kind")) {
            r.fail("each filter needs a 'kind'");
            continue;
        }
        Reader fr(f);
        FilterRun run;
        if (auto kind = fr.text("kind")) {
            try {
                run.spec.kind = InterpolationFilterSpec::parse_kind(*kind);
            } catch (const ConfigError& e) {
                r.fail(e.what());
                continue;
            }
        }
        run.spec.order = static_cast<int>(fr.integer("order").value_or(50));
        run.oversample = static_cast<int>(fr.integer("oversample").value_or(run.spec.kind == FilterKind::DiracDelta ? 1 : oversample));
        const auto nf = fr.integer("num_frames");
        if (nf && *nf < 1) fr.fail("filter num_frames must be positive");
        run.num_frames = nf ? static_cast<std::size_t>(std::max(*nf, 1LL)) : frames;
        run.segment_len = static_cast<int>(fr.integer("segment_len").value_or(segment));
        for (const auto& e : fr.errors) r.fail(e);
        out.push_back(run);
    }
    return out;
}

std::string join_errors(const std::vector<std::string>& errors) {
    std::ostringstream os;
    os << "invalid scenario config (" << errors.size() << (errors.size() == 1 ? " problem" : " problems") << "):";
    for (const auto& e : errors) os << "\n  - " << e;
    return os.str();
}

}  // namespace

ScenarioConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("scenario config must be a JSON object");
    Reader r(j);
    ScenarioConfig c;
    c.source = j;
    c.hash = io::hash_text(j.dump());

    for (const auto& [key, _] : j.items())
        if (!kKnownKeys.count(key)) r.fail("unknown key '" + key + "'");

    c.name = r.text("name").value_or("custom");
    const auto M = r.integer("M");
    const auto N = r.integer("N");
    if (!M) r.fail("'M' is required");
    else if (*M < 1) r.fail("'M' must be at least 1");
    if (!N) r.fail("'N' is required");
    else if (*N < 1) r.fail("'N' must be at least 1");
    const bool dims_ok = M && N && *M >= 1 && *N >= 1;
    if (dims_ok) {
        c.M = static_cast<int>(*M);
        c.N = static_cast<int>(*N);
    }

    const auto Ts = r.number("T_s");
    const auto fs_ = r.number("f_s");
    if (Ts && *Ts <= 0.0) r.fail("'T_s' must be positive");
    if (fs_ && *fs_ <= 0.0) r.fail("'f_s' must be positive");
    if (Ts && fs_ && *Ts > 0.0 && *fs_ > 0.0 && std::abs(*Ts * *fs_ - 1.0) > 1e-9)
        r.fail("'T_s' and 'f_s' disagree: T_s * f_s must be 1");
    if (fs_ && *fs_ > 0.0) {
        c.sample_rate = *fs_;
        c.sample_interval = 1.0 / *fs_;
    } else if (Ts && *Ts > 0.0) {
        c.sample_interval = *Ts;
        c.sample_rate = 1.0 / *Ts;
    }

    if (auto m = r.text("modulation")) {
        if (*m == "otfs") c.modulation = Modulation::OTFS;
        else if (*m == "ofdm") c.modulation = Modulation::OFDM;
        else r.fail("unknown modulation '" + *m + "' (expected otfs or ofdm)");
    }
    if (auto name = r.text("constellation")) {
        try {
            c.constellation = Constellation::parse(*name);
        } catch (const ConfigError& e) {
            r.fail(e.what());
        }
    }

    const auto seed = r.integer("seed");
    if (!seed) {
        if (!r.has("seed")) r.fail("'seed' is required (there is no implicit seeding)");
    } else if (*seed < 0) {
        r.fail("'seed' must be nonnegative");
    } else {
        c.seed = static_cast<std::uint64_t>(*seed);
    }

    const bool has_profile = r.has("profile");
    const bool has_pattern = r.has("pattern");
    const bool has_mask = r.has("mask");
    if (has_mask) {
        if (has_profile || has_pattern)
            r.fail("a masked (precoded) scenario takes its symbols from the precoder; drop 'profile'/'pattern'");
        if (c.modulation != Modulation::OTFS) r.fail("a mask requires modulation 'otfs'");
    } else if (has_profile == has_pattern) {
        r.fail("exactly one of 'profile' or 'pattern' is required");
    }
    if (dims_ok && has_profile && !has_pattern && !has_mask) c.profile = read_profile(j.at("profile"), c.M, c.N, r);
    if (dims_ok && has_pattern && !has_profile && !has_mask) {
        const auto& p = j.at("pattern");
        if (!p.is_object() || !p.contains("name") || !p.at("name").is_string()) {
            r.fail("'pattern' needs a string 'name'");
        } else {
            Reader pr(p);
            const auto budget = pr.integer("budget").value_or(static_cast<long long>(c.M) * c.N);
            for (const auto& e : pr.errors) r.fail(e);
            try {
                c.profile = builtin_pattern(p.at("name").get<std::string>(), c.M, c.N, static_cast<int>(budget));
            } catch (const ConfigError& e) {
                r.fail(e.what());
            }
        }
    }
    if (dims_ok && has_mask) {
        json m = j.at("mask");
        if (!m.is_object()) {
            r.fail("'mask' must be an object");
        } else {
            m["M"] = c.M;
            m["N"] = c.N;
            m["T_s"] = c.sample_interval;
            m.erase("f_s");
            try {
                c.mask = io::parse_mask(m).mask;
                if (m.contains("pass_bands_hz"))
                    for (const auto& b : m.at("pass_bands_hz")) c.pass_bands_hz.emplace_back(b[0].get<double>(), b[1].get<double>());
            } catch (const ConfigError& e) {
                r.fail(e.what());
            }
        }
    }
    if (auto p = r.text("precoder")) {
        if (*p == "nslp") c.precoder = PrecoderForm::NullSpace;
        else if (*p == "systematic") c.precoder = PrecoderForm::Systematic;
        else r.fail("unknown precoder '" + *p + "' (expected nslp or systematic)");
    }

    const auto frames = r.integer("num_frames").value_or(1000);
    if (frames < 1) r.fail("'num_frames' must be positive");
    const auto L = r.integer("oversample_L").value_or(1);
    if (L < 1) r.fail("'oversample_L' must be at least 1");
    const auto seg = r.integer("segment_len").value_or(0);
    if (seg < 0) r.fail("'segment_len' must be nonnegative (0 = one frame)");

    if (r.has("filters")) {
        c.filters = read_filters(j.at("filters"), r, static_cast<std::size_t>(std::max(frames, 1LL)),
                                 static_cast<int>(std::max(L, 1LL)), static_cast<int>(std::max(seg, 0LL)));
    } else {
        c.filters.push_back({InterpolationFilterSpec::dirac(), 1, static_cast<std::size_t>(std::max(frames, 1LL)),
                             static_cast<int>(std::max(seg, 0LL))});
    }
    for (auto& f : c.filters) {
        f.spec.sample_interval = c.sample_interval;
        try {
            f.spec.validate();
            validate_reconstruction(f.spec, f.oversample);
        } catch (const Error& e) {
            r.fail(std::string("filter ") + f.spec.name() + ": " + e.what());
        }
        if (f.segment_len < 0) r.fail("filter segment_len must be nonnegative");
    }

    c.grid_points = static_cast<int>(r.integer("grid_points").value_or(4096));
    if (c.grid_points < 2) r.fail("'grid_points' must be at least 2");

    if (r.has("tasks")) {
        try {
            c.tasks = j.at("tasks").get<std::vector<std::string>>();
        } catch (const json::exception&) {
            r.fail("'tasks' must be an array of strings");
        }
        for (const auto& t : c.tasks)
            if (!kTasks.count(t)) r.fail("unknown task '" + t + "'");
    } else {
        c.tasks = {"analytic"};
    }
    if (r.has("checkpoints")) {
        try {
            c.checkpoints = j.at("checkpoints").get<std::vector<std::size_t>>();
        } catch (const json::exception&) {
            r.fail("'checkpoints' must be an array of frame counts");
        }
        if (!std::is_sorted(c.checkpoints.begin(), c.checkpoints.end()) ||
            std::adjacent_find(c.checkpoints.begin(), c.checkpoints.end()) != c.checkpoints.end())
            r.fail("'checkpoints' must be strictly increasing");
        for (const auto& f : c.filters)
            if (!c.checkpoints.empty() && c.checkpoints.back() > f.num_frames)
                r.fail("checkpoint beyond num_frames for filter " + f.spec.name());
    }
    const auto trials = r.integer("null_trials").value_or(100);
    if (trials < 1) r.fail("'null_trials' must be positive");
    c.null_trials = static_cast<std::size_t>(std::max(trials, 1LL));
    c.output_dir = r.text("output_dir").value_or("");

    if ((c.has_task("precoders")) && !has_mask) r.fail("task 'precoders' needs a 'mask'");
    if (c.has_task("cep") && c.modulation != Modulation::OTFS) r.fail("task 'cep' needs modulation 'otfs'");
    if (c.has_task("cep") && has_mask) r.fail("task 'cep' is defined for independent symbols, not precoded ones");

    if (!r.errors.empty()) throw ConfigError(join_errors(r.errors));
    return c;
}

// ---------------------------------------------------------------- presets

namespace {

json example1_profile() { return {{"subcarrier_sigma2", {1, 1, 1, 0, 0, 0, 1, 1}}}; }

struct Preset {
    std::string description;
    json config;
};

const std::map<std::string, Preset>& presets() {
    static const std::map<std::string, Preset> table = [] {
        std::map<std::string, Preset> t;
        t["example1"] = {"analytic OTFS PSD, M=4 N=8, all three DAC filters",
                         {{"name", "example1"}, {"M", 4}, {"N", 8}, {"T_s", 1.0}, {"seed", 1},
                          {"profile", example1_profile()}, {"filters", {"dirac", "sinc", "rect"}},
                          {"tasks", {"analytic", "bandwidth"}}}};
        json ex2 = json::array();
        for (int k = 0; k < 32; ++k) ex2.push_back(k <= 9 || k >= 22 ? 1 : 0);
        t["example2"] = {"analytic OFDM PSD, N=32 with 20 active subcarriers",
                         {{"name", "example2"}, {"M", 1}, {"N", 32}, {"T_s", 1.0}, {"seed", 1},
                          {"modulation", "ofdm"}, {"profile", {{"subcarrier_sigma2", ex2}}},
                          {"filters", {"dirac", "sinc", "rect"}}, {"tasks", {"analytic", "bandwidth"}}}};
        t["table1"] = {"estimated vs analytic PSD for the three DAC filters, M=4 N=8",
                       {{"name", "table1"}, {"M", 4}, {"N", 8}, {"T_s", 1.0}, {"seed", 2024},
                        {"profile", example1_profile()},
                        {"filters",
                         {{{"kind", "dirac"}, {"num_frames", 100000}},
                          {{"kind", "sinc"}, {"order", 50}, {"oversample", 100}, {"num_frames", 1000}},
                          {{"kind", "rect"}, {"oversample", 100}, {"num_frames", 100000}}}},
                        {"tasks", {"analytic", "estimate"}}}};
        const json x1 = {{"name", "block_diag_x1"}};
        t["cep-x1"] = {"CEP-OFDM component PSDs and their sum for the block-diagonal X1 pattern",
                       {{"name", "cep-x1"}, {"M", 4}, {"N", 8}, {"T_s", 1.0}, {"seed", 11}, {"pattern", x1},
                        {"filters", {{{"kind", "sinc"}, {"order", 50}, {"oversample", 4}}}},
                        {"num_frames", 10000}, {"tasks", {"cep"}}}};
        t["cep-trend"] = {"OTFS vs summed CEP-OFDM estimate discrepancy against frame count",
                          {{"name", "cep-trend"}, {"M", 4}, {"N", 8}, {"T_s", 1.0}, {"seed", 12}, {"pattern", x1},
                           {"filters", {{{"kind", "sinc"}, {"order", 50}, {"oversample", 4}}}},
                           {"num_frames", 100000}, {"checkpoints", {100, 1000, 10000, 100000}},
                           {"tasks", {"cep"}}}};
        const json lte_base = {{"M", 16}, {"N", 128}, {"f_s", 30.72e6}, {"filters", {"dirac"}},
                               {"num_frames", 2000}, {"grid_points", 8192}};
        json p1 = lte_base;
        p1.update({{"name", "lte-pattern1"}, {"seed", 21},
                   {"pattern", {{"name", "head_tail_columns"}, {"budget", 1201}}},
                   {"tasks", {"analytic", "estimate", "bandwidth"}}});
        t["lte-pattern1"] = {"OTFS with 1201 symbols in the head and tail columns, M=16 N=128", p1};
        json p2 = lte_base;
        p2.update({{"name", "lte-pattern2"}, {"seed", 22},
                   {"pattern", {{"name", "head_tail_rows"}, {"budget", 1201}}},
                   {"tasks", {"analytic", "estimate", "bandwidth"}}});
        t["lte-pattern2"] = {"OTFS with 1201 symbols in the head and tail rows, M=16 N=128", p2};
        json ns = lte_base;
        ns.update({{"name", "lte-otfs-nslp"}, {"seed", 23}, {"mask", {{"pass_bands_hz", {{-9e6, 9e6}}}}},
                   {"precoder", "nslp"}, {"tasks", {"precoders", "estimate", "bandwidth"}}});
        t["lte-otfs-nslp"] = {"null-space precoded OTFS confined to [-9 MHz, 9 MHz), M=16 N=128", ns};
        t["lte-ofdm"] = {"LTE-like OFDM: 2048-point FFT at 30.72 MHz with 1201 occupied subcarriers",
                         {{"name", "lte-ofdm"}, {"M", 1}, {"N", 2048}, {"f_s", 30.72e6}, {"seed", 24},
                          {"modulation", "ofdm"}, {"profile", {{"subcarrier_ranges", {{0, 600}, {1448, 2047}}}}},
                          {"filters", {"sinc"}}, {"grid_points", 8192}, {"tasks", {"analytic", "bandwidth"}}}};
        return t;
    }();
    return table;
}

}  // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& [name, _] : presets()) out.push_back(name);
    return out;
}

std::string preset_description(const std::string& name) {
    auto it = presets().find(name);
    if (it == presets().end()) throw ConfigError("unknown preset '" + name + "'");
    return it->second.description;
}

json preset_config(const std::string& name) {
    auto it = presets().find(name);
    if (it == presets().end()) throw ConfigError("unknown preset '" + name + "'");
    return it->second.config;
}

// ---------------------------------------------------------------- running

double ScenarioResult::metric(const std::string& name) const {
    for (const auto& m : metrics)
        if (m.metric == name) return m.value;
    throw InputError("no metric named '" + name + "'");
}

BandwidthReport bandwidth_report(const ScenarioConfig& c) {
    BandwidthReport r;
    std::vector<double> occupied;
    if (c.modulation == Modulation::OFDM) {
        // OFDM subcarrier k sits at frequency k/(N T_s), wrapped to [-f_s/2, f_s/2)
        r.bin_spacing_hz = c.sample_rate / c.N;
        const Eigen::VectorXd p = c.profile->subcarrier_powers();
        for (int k = 0; k < c.N; ++k)
            if (p(k) > 0.0) occupied.push_back(bin_frequency(k, 1, c.N, c.sample_interval));
    } else {
        const int MN = c.M * c.N;
        r.bin_spacing_hz = c.sample_rate / MN;
        if (c.mask) {
            for (int i : c.mask->used_bins()) occupied.push_back(bin_frequency(i, c.M, c.N, c.sample_interval));
        } else {
            const Eigen::VectorXd p = c.profile->subcarrier_powers();
            for (int i = 0; i < MN; ++i)
                if (p(i % c.N) > 0.0) occupied.push_back(bin_frequency(i, c.M, c.N, c.sample_interval));
        }
    }
    r.occupied_bins = occupied.size();
    r.occupied_bandwidth_hz = static_cast<double>(r.occupied_bins) * r.bin_spacing_hz;
    if (!occupied.empty()) {
        const auto [lo, hi] = std::minmax_element(occupied.begin(), occupied.end());
        r.lowest_hz = *lo;
        r.highest_hz = *hi;
    }
    return r;
}

namespace {

class Runner {
public:
    Runner(const ScenarioConfig& c, const fs::path& dir) : c_(c), dir_(dir) {}

    ScenarioResult run() {
        fs::create_directories(dir_);
        write_file("config.json", [&](const fs::path& p) { io::write_text(p, c_.source.dump(2) + "\n"); });
        if (c_.mask) build_precoders_once();
        if (c_.has_task("precoders")) precoders_task();
        for (const auto& f : c_.filters) {
            if (c_.has_task("analytic")) analytic_task(f);
            if (c_.has_task("estimate")) estimate_task(f);
            if (c_.has_task("cep")) cep_task(f);
        }
        if (c_.has_task("bandwidth")) bandwidth_task();
        write_file("metrics.json", [&](const fs::path& p) { io::write_metrics(p, result_.metrics); });
        return std::move(result_);
    }

private:
    template <typename F>
    void write_file(const std::string& name, F&& writer) {
        const fs::path p = dir_ / name;
        writer(p);
        result_.files.push_back(p);
    }

    void metric(const std::string& name, double value) { result_.metrics.push_back({name, value, c_.hash}); }

    io::CurveHeader header(const FilterRun& f) const { return {c_.M, c_.N, c_.sample_interval, f.spec.name(), c_.hash}; }

    void curve(const std::string& name, const PsdCurve& curve, const FilterRun& f) {
        write_file(name, [&](const fs::path& p) { io::write_curve(p, curve, header(f)); });
    }

    void build_precoders_once() { precoders_ = build_precoders(*c_.mask, c_.precoder); }

    DelayDopplerGrid grid(const RandomGridSource* src, std::size_t i) const {
        if (precoders_) {
            const auto payload = random_payload(*precoders_, c_.constellation, c_.seed, i);
            return precode_grid(payload, *precoders_);
        }
        return src->grid(i);
    }

    EstimatorSetup setup(const FilterRun& f) const { return {f.spec, f.oversample, f.segment_len}; }

    void analytic_task(const FilterRun& f) {
        if (!c_.profile) return;  // precoded symbols are correlated across delay rows
        const auto freqs = default_frequency_grid(f.spec, c_.grid_points);
        curve("analytic_" + f.spec.name() + ".csv", analytic_psd(c_.modulation, *c_.profile, f.spec, freqs), f);
    }

    void estimate_task(const FilterRun& f) {
        std::optional<RandomGridSource> src;
        if (c_.profile) src.emplace(*c_.profile, c_.constellation, c_.seed);
        const auto frame_len = static_cast<std::size_t>(c_.M) * c_.N;
        const auto est = estimate_psd(
            [&](std::size_t i) { return modulate(c_.modulation, grid(src ? &*src : nullptr, i), c_.sample_interval).samples; },
            frame_len, f.num_frames, setup(f));
        const std::string tag = f.spec.name();
        curve("estimate_" + tag + ".csv", est, f);

        if (c_.profile) {
            const auto [lo, hi] = comparison_band(f.spec);
            const auto ref = analytic_psd(c_.modulation, *c_.profile, f.spec, est.freqs);
            const auto cmp = compare_normalized(est, ref, lo, hi);
            metric("nmse_db:" + tag, cmp.nmse_db);
            metric("cosine:" + tag, cmp.cosine);
        }
        if (c_.mask && !c_.mask->null_bins().empty()) suppression(est, tag);
    }

    // In-band mean over used bins against the strongest null bin, within [-f_s/2, f_s/2).
    void suppression(const PsdCurve& est, const std::string& tag) {
        const int MN = c_.M * c_.N;
        std::vector<char> used(static_cast<std::size_t>(MN), 0);
        for (int i : c_.mask->used_bins()) used[static_cast<std::size_t>(i)] = 1;
        double in_sum = 0.0, in_min = INFINITY, out_max = 0.0;
        std::size_t in_count = 0;
        for (std::size_t j = 0; j < est.size(); ++j) {
            const double u = est.freqs[j] * c_.sample_interval;
            if (u < -0.5 || u >= 0.5) continue;
            const long long q = std::llround(u * MN);
            const auto bin = static_cast<std::size_t>(((q % MN) + MN) % MN);
            if (used[bin]) {
                in_sum += est.values[j];
                in_min = std::min(in_min, est.values[j]);
                ++in_count;
            } else {
                out_max = std::max(out_max, est.values[j]);
            }
        }
        if (in_count == 0) return;
        const double in_mean = in_sum / static_cast<double>(in_count);
        metric("suppression_db:" + tag, 10.0 * std::log10(in_mean / std::max(out_max, 1e-300 * in_mean)));
        metric("inband_min_to_mean_db:" + tag, 10.0 * std::log10(std::max(in_min, 1e-300) / in_mean));
    }

    void cep_task(const FilterRun& f) {
        const int M = c_.M;
        const auto frame_len = static_cast<std::size_t>(M) * c_.N;
        const std::string tag = f.spec.name();
        const int seg = f.segment_len > 0 ? f.segment_len : static_cast<int>(frame_len) * f.oversample;
        std::vector<std::size_t> checkpoints;
        for (auto frames : c_.checkpoints) checkpoints.push_back(frames * frame_len * static_cast<std::size_t>(f.oversample) / static_cast<std::size_t>(seg));

        StreamPsdEstimator otfs_est(frame_len, setup(f), checkpoints);
        std::vector<StreamPsdEstimator> cep_est;
        cep_est.reserve(static_cast<std::size_t>(M));
        for (int l = 0; l < M; ++l) cep_est.emplace_back(frame_len, setup(f), checkpoints);

        RandomGridSource src(*c_.profile, c_.constellation, c_.seed);
        for (std::size_t i = 0; i < f.num_frames; ++i) {
            const auto g = src.grid(i);
            otfs_est.push_frame(otfs_modulate(g, c_.sample_interval).samples);
            for (int l = 0; l < M; ++l)
                cep_est[static_cast<std::size_t>(l)].push_frame(cep_ofdm_component(g, l, c_.sample_interval).samples);
        }
        otfs_est.finish();
        for (auto& e : cep_est) e.finish();

        auto summed = [&](auto&& pick) {
            PsdCurve s = pick(cep_est[0]);
            for (int l = 1; l < M; ++l) {
                const PsdCurve p = pick(cep_est[static_cast<std::size_t>(l)]);
                for (std::size_t j = 0; j < s.size(); ++j) s.values[j] += p.values[j];
            }
            return s;
        };
        const auto [lo, hi] = comparison_band(f.spec);

        const auto otfs = otfs_est.result();
        const auto sum = summed([](const StreamPsdEstimator& e) { return e.result(); });
        curve("cep_otfs_" + tag + ".csv", otfs, f);
        curve("cep_sum_" + tag + ".csv", sum, f);
        const auto freqs = default_frequency_grid(f.spec, c_.grid_points);
        for (int l = 0; l < M; ++l) {
            curve("cep_" + std::to_string(l) + "_" + tag + ".csv", cep_est[static_cast<std::size_t>(l)].result(), f);
            curve("cep_analytic_" + std::to_string(l) + "_" + tag + ".csv", cep_ofdm_psd(*c_.profile, l, f.spec, freqs), f);
        }
        const auto cmp = compare_normalized(otfs, sum, lo, hi);
        metric("cep_sum_nmse_db:" + tag, cmp.nmse_db);
        metric("cep_sum_cosine:" + tag, cmp.cosine);

        if (checkpoints.empty()) return;
        std::ostringstream trend;
        trend << "# config_hash=" << c_.hash << "\n# filter=" << tag << "\nframes,nmse_db,cosine\n";
        for (std::size_t j = 0; j < checkpoints.size(); ++j) {
            const auto s = summed([j](const StreamPsdEstimator& e) { return e.snapshots().at(j); });
            const auto t = compare_normalized(otfs_est.snapshots().at(j), s, lo, hi);
            trend << c_.checkpoints[j] << ',' << io::format_double(t.nmse_db) << ',' << io::format_double(t.cosine) << '\n';
            metric("trend_nmse_db:" + tag + ":" + std::to_string(c_.checkpoints[j]), t.nmse_db);
            metric("trend_cosine:" + tag + ":" + std::to_string(c_.checkpoints[j]), t.cosine);
        }
        write_file("trend_" + tag + ".csv", [&](const fs::path& p) { io::write_text(p, trend.str()); });
    }

    void precoders_task() {
        write_file("mask.json", [&](const fs::path& p) { io::write_mask(p, *c_.mask, c_.sample_interval); });
        write_file("precoders.csv", [&](const fs::path& p) { io::write_precoders(p, *precoders_, c_.hash); });

        double power_err = 0.0;
        for (int k = 0; k < c_.N; ++k) {
            const auto& P = precoders_->per_subcarrier[static_cast<std::size_t>(k)];
            power_err = std::max(power_err, std::abs(P.squaredNorm() - static_cast<double>(P.cols())));
        }
        metric("max_power_error", power_err);

        double worst = 0.0;
        const auto& nulls = c_.mask->null_bins();
        for (std::size_t t = 0; t < c_.null_trials; ++t) {
            const auto payload = random_payload(*precoders_, c_.constellation, c_.seed, t);
            double norm2 = 0.0;
            for (const auto& x : payload) norm2 += x.squaredNorm();
            const auto y = discrete_spectrum(otfs_modulate(precode_grid(payload, *precoders_), c_.sample_interval));
            double peak = 0.0;
            for (int i : nulls) peak = std::max(peak, std::abs(y(i)));
            if (norm2 > 0.0) worst = std::max(worst, peak / std::sqrt(norm2));
        }
        metric("max_null_ratio", worst);
        metric("used_bins", static_cast<double>(c_.mask->used_bins().size()));
        metric("payload_symbols", static_cast<double>(c_.mask->payload_size()));
    }

    void bandwidth_task() {
        const auto r = bandwidth_report(c_);
        json j = {{"config_hash", c_.hash},
                  {"modulation", c_.modulation == Modulation::OTFS ? "otfs" : "ofdm"},
                  {"occupied_bins", r.occupied_bins},
                  {"bin_spacing_hz", r.bin_spacing_hz},
                  {"occupied_bandwidth_hz", r.occupied_bandwidth_hz},
                  {"lowest_hz", r.lowest_hz},
                  {"highest_hz", r.highest_hz}};
        write_file("bandwidth.json", [&](const fs::path& p) { io::write_text(p, j.dump(2) + "\n"); });
        metric("occupied_bandwidth_hz", r.occupied_bandwidth_hz);
        metric("occupied_bins", static_cast<double>(r.occupied_bins));
    }

    const ScenarioConfig& c_;
    fs::path dir_;
    std::optional<PrecoderSet> precoders_;
    ScenarioResult result_;
};

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& config, const fs::path& out_dir) {
    return Runner(config, out_dir).run();
}

}  // namespace otfs
