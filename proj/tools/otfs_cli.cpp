// otfs-spectrum: command line front end.
//
// Settings precedence, lowest to highest: preset defaults, --config file,
// individual flags.
//
// Exit codes: 0 success, 1 input/runtime error, 2 configuration error,
// 3 numerical feasibility error.

#include <atomic>
#include <iostream>
#include <mutex>
#include <thread>

#include "CLI11.hpp"
#include "otfs/io.hpp"
#include "otfs/psd_estimate.hpp"
#include "otfs/scenario.hpp"

using namespace otfs;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitInput = 1;
constexpr int kExitConfig = 2;
constexpr int kExitFeasibility = 3;

// Flags shared by the subcommands that build a scenario config.
struct ConfigFlags {
    std::string config;
    std::optional<int> M, N;
    std::optional<double> T_s, f_s;
    std::optional<std::string> modulation, constellation, pattern;
    std::optional<int> budget;
    std::vector<double> powers;
    std::optional<long long> seed;
    std::optional<long long> frames;

    void add(CLI::App* app) {
        app->add_option("--config", config, "JSON scenario file")->check(CLI::ExistingFile);
        app->add_option("-M", M, "delay dimension");
        app->add_option("-N", N, "Doppler dimension");
        app->add_option("--T_s", T_s, "sample interval in seconds");
        app->add_option("--f_s", f_s, "sample rate in Hz");
        app->add_option("--modulation", modulation, "otfs or ofdm");
        app->add_option("--constellation", constellation, "qpsk or qam16");
        app->add_option("--pattern", pattern, "block_diag_x1, head_tail_columns or head_tail_rows");
        app->add_option("--budget", budget, "nonzero entries for head/tail patterns");
        app->add_option("--powers", powers, "per-subcarrier symbol powers (N values)")->delimiter(',');
        app->add_option("--seed", seed, "random seed");
        app->add_option("--frames", frames, "number of frames");
    }

    json build() const {
        json j = config.empty() ? json::object() : io::read_json(config);
        if (M) j["M"] = *M;
        if (N) j["N"] = *N;
        if (T_s) {
            j["T_s"] = *T_s;
            j.erase("f_s");
        }
        if (f_s) {
            j["f_s"] = *f_s;
            j.erase("T_s");
        }
        if (modulation) j["modulation"] = *modulation;
        if (constellation) j["constellation"] = *constellation;
        if (pattern) {
            j["pattern"] = {{"name", *pattern}};
            if (budget) j["pattern"]["budget"] = *budget;
            j.erase("profile");
        }
        if (!powers.empty()) {
            j["profile"] = {{"subcarrier_sigma2", powers}};
            j.erase("pattern");
        }
        if (seed) j["seed"] = *seed;
        if (frames) j["num_frames"] = *frames;
        return j;
    }
};

struct FilterFlags {
    std::string kind = "dirac";
    int order = 50;
    int oversample = 1;

    void add(CLI::App* app) {
        app->add_option("--filter", kind, "dirac, sinc or rect")->capture_default_str();
        app->add_option("--order", order, "truncated sinc order")->capture_default_str();
        app->add_option("--oversample", oversample, "oversampling factor L")->capture_default_str();
    }

    InterpolationFilterSpec spec(double T_s) const {
        InterpolationFilterSpec f;
        f.kind = InterpolationFilterSpec::parse_kind(kind);
        f.order = order;
        f.sample_interval = T_s;
        f.validate();
        validate_reconstruction(f, oversample);
        return f;
    }
};

io::CurveHeader header_for(const ScenarioConfig& c, const InterpolationFilterSpec& f) {
    return {c.M, c.N, c.sample_interval, f.name(), c.hash};
}

int cmd_generate(const ConfigFlags& cf, const FilterFlags& ff, bool filter_given, const std::string& format,
                 const std::string& out) {
    const auto c = parse_config(cf.build());
    if (!c.profile) throw ConfigError("generate needs a 'profile' or 'pattern'; use 'precode' for masked streams");
    const auto stream = generate_random_stream(*c.profile, c.constellation, c.filters.front().num_frames, c.seed,
                                               c.sample_interval, c.modulation);
    const auto fmt = io::parse_sample_format(format);
    if (!filter_given) {
        io::write_samples(out, io::from_stream(stream), fmt);
    } else {
        const auto f = ff.spec(c.sample_interval);
        io::write_samples(out, io::from_oversampled(reconstruct(stream, f, ff.oversample), c.M, c.N, c.sample_interval, c.seed), fmt);
    }
    std::cout << out << "\n";
    return 0;
}

int cmd_psd_analytic(ConfigFlags cf, const FilterFlags& ff, std::optional<int> cep, int points, const std::string& out) {
    json j = cf.build();
    // no randomness is involved here
    if (!j.contains("seed")) j["seed"] = 0;
    const auto c = parse_config(j);
    if (!c.profile) throw ConfigError("psd-analytic needs a 'profile' or 'pattern'");
    const auto f = ff.spec(c.sample_interval);
    const auto freqs = default_frequency_grid(f, points);
    PsdCurve curve;
    if (cep) {
        if (c.modulation != Modulation::OTFS) throw ConfigError("--cep applies to otfs only");
        curve = cep_ofdm_psd(*c.profile, *cep, f, freqs);
    } else {
        curve = analytic_psd(c.modulation, *c.profile, f, freqs);
    }
    io::write_curve(out, curve, header_for(c, f));
    std::cout << out << "\n";
    return 0;
}

int cmd_psd_estimate(const std::string& input, const FilterFlags& ff, int segment, const std::string& out) {
    const auto file = io::read_samples(input);
    const bool discrete = std::abs(file.sample_rate * file.sample_interval - 1.0) < 1e-12;
    PsdCurve est;
    InterpolationFilterSpec f = InterpolationFilterSpec::dirac(file.sample_interval);
    if (discrete) {
        f = ff.spec(file.sample_interval);
        const auto stream = io::to_stream(file);
        StreamPsdEstimator e(stream.frame_length(), {f, ff.oversample, segment});
        for (const auto& fr : stream.frames) e.push_frame(fr.samples);
        e.finish();
        est = e.result();
    } else {
        // already dense: estimate at the stored rate
        const int seg = segment > 0 ? segment
                                    : static_cast<int>(std::llround(file.M * file.N * file.sample_rate * file.sample_interval));
        est = periodogram(file.samples, file.sample_rate, seg);
    }
    io::write_curve(out, est, {file.M, file.N, file.sample_interval, f.name(), io::hash_text(input)});
    std::cout << out << "\n";
    return 0;
}

int cmd_precode(const std::string& mask_path, const std::string& form, const std::string& out,
                const std::string& stream_out, std::size_t frames, std::optional<long long> seed,
                const std::string& constellation, const std::string& format) {
    const auto m = io::read_mask(mask_path);
    PrecoderForm pf;
    if (form == "nslp") pf = PrecoderForm::NullSpace;
    else if (form == "systematic") pf = PrecoderForm::Systematic;
    else throw ConfigError("unknown precoder form '" + form + "' (expected nslp or systematic)");
    const auto set = build_precoders(m.mask, pf);
    const std::string hash = io::hash_text(io::read_json(mask_path).dump() + form);
    io::write_precoders(out, set, hash);
    std::cout << out << "\n";
    if (stream_out.empty()) return 0;
    if (!seed) throw ConfigError("--seed is required when writing a precoded stream");
    const auto cons = Constellation::parse(constellation);
    FrameStream s;
    s.M = set.M;
    s.N = set.N;
    s.sample_interval = m.sample_interval;
    s.seed = static_cast<std::uint64_t>(*seed);
    for (std::size_t i = 0; i < frames; ++i) {
        const auto payload = random_payload(set, cons, s.seed, i);
        s.frames.push_back(otfs_modulate(precode_grid(payload, set), m.sample_interval));
    }
    io::write_samples(stream_out, io::from_stream(s), io::parse_sample_format(format));
    std::cout << stream_out << "\n";
    return 0;
}

int cmd_compare(const std::string& estimate, const std::string& reference, const std::vector<double>& band,
                const std::string& out) {
    io::CurveHeader h;
    const auto a = io::read_curve(estimate, &h);
    const auto b = io::read_curve(reference);
    double lo = std::max(a.freqs.front(), b.freqs.front());
    double hi = std::nextafter(std::min(a.freqs.back(), b.freqs.back()), INFINITY);
    if (band.size() == 2) {
        lo = band[0];
        hi = band[1];
    }
    const auto cmp = compare_normalized(a, b, lo, hi);
    const std::vector<io::MetricRecord> m = {{"nmse_db", cmp.nmse_db, h.config_hash}, {"cosine", cmp.cosine, h.config_hash}};
    if (out.empty()) {
        std::cout << "nmse_db " << io::format_double(cmp.nmse_db) << "\ncosine " << io::format_double(cmp.cosine) << "\n";
    } else {
        io::write_metrics(out, m);
        std::cout << out << "\n";
    }
    return 0;
}

int exit_code_for(const std::exception_ptr& ep, std::string& what) {
    try {
        std::rethrow_exception(ep);
    } catch (const ConfigError& e) {
        what = e.what();
        return kExitConfig;
    } catch (const FeasibilityError& e) {
        what = e.what();
        return kExitFeasibility;
    } catch (const std::exception& e) {
        what = e.what();
        return kExitInput;
    }
}

int cmd_scenario(const std::vector<std::string>& names, const std::string& config_path, const std::string& out_dir,
                 int jobs, std::optional<long long> frames, std::optional<long long> seed) {
    struct Job {
        std::string label;
        json config;
    };
    std::vector<Job> work;
    const json file = config_path.empty() ? json::object() : io::read_json(config_path);
    auto finish = [&](json j) {
        if (frames) {
            j["num_frames"] = *frames;
            if (j.contains("filters"))
                for (auto& f : j["filters"])
                    if (f.is_object()) f.erase("num_frames");
            if (j.contains("checkpoints")) {
                json kept = json::array();
                for (const auto& c : j["checkpoints"])
                    if (c.get<long long>() <= *frames) kept.push_back(c);
                j["checkpoints"] = kept;
            }
        }
        if (seed) j["seed"] = *seed;
        return j;
    };
    if (names.empty()) {
        if (config_path.empty()) throw ConfigError("give one or more presets, or --config");
        work.push_back({file.value("name", std::string("custom")), finish(file)});
    }
    for (const auto& n : names) {
        json j = preset_config(n);
        j.merge_patch(file);
        j["name"] = n;
        work.push_back({n, finish(j)});
    }

    std::vector<int> codes(work.size(), 0);
    std::mutex io_mutex;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < work.size(); i = next++) {
            std::string what;
            try {
                const auto c = parse_config(work[i].config);
                fs::path dir = out_dir.empty() ? (c.output_dir.empty() ? fs::path("out") / c.name : fs::path(c.output_dir))
                                               : fs::path(out_dir) / c.name;
                const auto res = run_scenario(c, dir);
                std::lock_guard lock(io_mutex);
                std::cout << "[" << work[i].label << "] " << dir.string() << "\n";
                for (const auto& m : res.metrics) std::cout << "  " << m.metric << " = " << io::format_double(m.value) << "\n";
            } catch (...) {
                codes[i] = exit_code_for(std::current_exception(), what);
                std::lock_guard lock(io_mutex);
                std::cerr << "[" << work[i].label << "] error: " << what << "\n";
            }
        }
    };
    const int n = std::max(1, std::min<int>(jobs, static_cast<int>(work.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    int code = 0;
    for (int c : codes) code = std::max(code, c);
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"OTFS/OFDM spectrum analysis and null-space precoding"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("generate", "write a random frame stream (optionally DAC-reconstructed)");
    ConfigFlags gen_cfg;
    FilterFlags gen_filt;
    std::string gen_format = "csv", gen_out;
    gen_cfg.add(gen);
    gen_filt.add(gen);
    gen->add_option("--format", gen_format, "csv or bin")->capture_default_str();
    gen->add_option("-o,--out", gen_out, "output file")->required();

    auto* ana = app.add_subcommand("psd-analytic", "evaluate the closed-form PSD");
    ConfigFlags ana_cfg;
    FilterFlags ana_filt;
    std::optional<int> ana_cep;
    int ana_points = 4096;
    std::string ana_out;
    ana_cfg.add(ana);
    ana_filt.add(ana);
    ana->add_option("--cep", ana_cep, "CEP-OFDM component index l");
    ana->add_option("--points", ana_points, "frequency grid size")->capture_default_str();
    ana->add_option("-o,--out", ana_out, "output CSV")->required();

    auto* est = app.add_subcommand("psd-estimate", "averaged periodogram of a sample file");
    std::string est_in, est_out;
    FilterFlags est_filt;
    int est_segment = 0;
    est->add_option("-i,--input", est_in, "sample file (csv or bin)")->required()->check(CLI::ExistingFile);
    est_filt.add(est);
    est->add_option("--segment", est_segment, "segment length (0 = one frame)")->capture_default_str();
    est->add_option("-o,--out", est_out, "output CSV")->required();

    auto* pre = app.add_subcommand("precode", "build per-subcarrier precoders for a spectrum mask");
    std::string pre_mask, pre_form = "nslp", pre_out, pre_stream, pre_cons = "qpsk", pre_format = "csv";
    std::size_t pre_frames = 1;
    std::optional<long long> pre_seed;
    pre->add_option("--mask", pre_mask, "mask JSON")->required()->check(CLI::ExistingFile);
    pre->add_option("--form", pre_form, "nslp or systematic")->capture_default_str();
    pre->add_option("-o,--out", pre_out, "precoder CSV")->required();
    pre->add_option("--stream", pre_stream, "also write a precoded frame stream here");
    pre->add_option("--frames", pre_frames, "frames in the precoded stream")->capture_default_str();
    pre->add_option("--seed", pre_seed, "payload seed");
    pre->add_option("--constellation", pre_cons, "qpsk or qam16")->capture_default_str();
    pre->add_option("--format", pre_format, "csv or bin")->capture_default_str();

    auto* cmp = app.add_subcommand("compare", "NMSE and cosine similarity of two PSD curves (PeakOne normalized)");
    std::string cmp_a, cmp_b, cmp_out;
    std::vector<double> cmp_band;
    cmp->add_option("--estimate", cmp_a, "estimated curve CSV")->required()->check(CLI::ExistingFile);
    cmp->add_option("--reference", cmp_b, "reference curve CSV")->required()->check(CLI::ExistingFile);
    cmp->add_option("--band", cmp_band, "comparison band lo hi in Hz")->expected(2);
    cmp->add_option("-o,--out", cmp_out, "metrics JSON");

    auto* sc = app.add_subcommand("scenario", "run named presets or a scenario file");
    std::vector<std::string> sc_names;
    std::string sc_config, sc_out;
    int sc_jobs = 1;
    bool sc_list = false;
    std::optional<long long> sc_frames, sc_seed;
    sc->add_option("presets", sc_names, "preset names");
    sc->add_option("--config", sc_config, "JSON scenario file (overrides preset values)")->check(CLI::ExistingFile);
    sc->add_option("--out-dir", sc_out, "output root; each scenario writes to <out-dir>/<name>");
    sc->add_option("-j,--jobs", sc_jobs, "scenarios run in parallel")->capture_default_str();
    sc->add_flag("--list", sc_list, "list presets and exit");
    sc->add_option("--frames", sc_frames, "override the frame count");
    sc->add_option("--seed", sc_seed, "override the seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*gen) return cmd_generate(gen_cfg, gen_filt, gen->count("--filter") > 0, gen_format, gen_out);
        if (*ana) return cmd_psd_analytic(ana_cfg, ana_filt, ana_cep, ana_points, ana_out);
        if (*est) return cmd_psd_estimate(est_in, est_filt, est_segment, est_out);
        if (*pre) return cmd_precode(pre_mask, pre_form, pre_out, pre_stream, pre_frames, pre_seed, pre_cons, pre_format);
        if (*cmp) return cmd_compare(cmp_a, cmp_b, cmp_band, cmp_out);
        if (*sc) {
            if (sc_list) {
                for (const auto& n : preset_names()) std::cout << n << "\t" << preset_description(n) << "\n";
                return 0;
            }
            return cmd_scenario(sc_names, sc_config, sc_out, sc_jobs, sc_frames, sc_seed);
        }
    } catch (...) {
        std::string what;
        const int code = exit_code_for(std::current_exception(), what);
        std::cerr << "error: " << what << "\n";
        return code;
    }
    return 0;
}
