#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "otfs/io.hpp"
#include "otfs/psd_estimate.hpp"

using namespace otfs;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "otfs_io_tests";
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("format_double round-trips exactly") {
    for (double v : {0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0, -0.0, 30.72e6}) {
        CHECK(std::stod(io::format_double(v)) == v);
    }
    CHECK(io::hash_text("") == "cbf29ce484222325");
    CHECK(io::hash_text("a") == "af63dc4c8601ec8c");
}

TEST_CASE("frame streams round-trip through csv and binary") {
    const auto prof = VarianceProfile(2, 3, 1.0);
    const auto stream = generate_random_stream(prof, Constellation::qam16(), 4, 42, 1e-6);
    for (auto fmt : {io::SampleFormat::Csv, io::SampleFormat::Binary}) {
        const auto path = scratch(fmt == io::SampleFormat::Csv ? "s.csv" : "s.bin");
        io::write_samples(path, io::from_stream(stream), fmt);
        const auto back = io::to_stream(io::read_samples(path));
        CHECK(back.M == 2);
        CHECK(back.N == 3);
        CHECK(back.seed == 42);
        CHECK(back.sample_interval == 1e-6);
        REQUIRE(back.frames.size() == 4);
        for (std::size_t i = 0; i < 4; ++i) CHECK(back.frames[i].samples == stream.frames[i].samples);
    }
    CHECK(io::parse_sample_format("bin") == io::SampleFormat::Binary);
    CHECK_THROWS_AS(io::parse_sample_format("hdf5"), ConfigError);
}

TEST_CASE("oversampled signals keep rate and origin") {
    const auto sig = reconstruct(CVector{1.0, cd(0, 2)}, InterpolationFilterSpec::sinc(3, 0.5), 4);
    const auto path = scratch("o.csv");
    io::write_samples(path, io::from_oversampled(sig, 1, 2, 0.5, 9), io::SampleFormat::Csv);
    const auto f = io::read_samples(path);
    CHECK(f.sample_rate == 8.0);
    CHECK(f.origin_time == -1.5);
    CHECK(f.samples == sig.samples);
    CHECK_THROWS_AS(io::to_stream(f), InputError);
}

TEST_CASE("curves round-trip with header") {
    PsdCurve c{{-0.5, 0.0, 0.25}, {1.0 / 3.0, 2.5e-17, 7.0}, Normalization::PeakOne};
    const auto path = scratch("c.csv");
    io::write_curve(path, c, {4, 8, 1e-3, "rect", "abc123"});
    io::CurveHeader h;
    const auto back = io::read_curve(path, &h);
    CHECK(back.freqs == c.freqs);
    CHECK(back.values == c.values);
    CHECK(back.normalization == Normalization::PeakOne);
    CHECK(h.M == 4);
    CHECK(h.filter == "rect");
    CHECK(h.config_hash == "abc123");
    CHECK(h.sample_interval == 1e-3);

    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    CHECK(first == "# M=4");
}

TEST_CASE("masks from json") {
    const auto a = io::parse_mask(nlohmann::json::parse(R"({"M":4,"N":8,"T_s":1.0,"null_bins":[3,11,19,27]})"));
    CHECK(a.mask.null_rows(3).size() == 4);
    const auto b = io::parse_mask(nlohmann::json::parse(R"({"M":16,"N":128,"f_s":30720000,"pass_bands_hz":[[-9e6,9e6]]})"));
    CHECK(b.mask.used_bins().size() == 1200);
    CHECK_THROWS_AS(io::parse_mask(nlohmann::json::parse(R"({"M":4,"N":8})")), ConfigError);
    CHECK_THROWS_AS(io::parse_mask(nlohmann::json::parse(R"({"M":4,"N":8,"null_bins":[40]})")), ConfigError);
    CHECK_THROWS_AS(io::parse_mask(nlohmann::json::parse(R"({"M":4,"N":8,"null_bins":[1],"pass_bands_hz":[[0,1]]})")), ConfigError);

    const auto path = scratch("mask.json");
    io::write_mask(path, a.mask, 1.0);
    CHECK(io::read_mask(path).mask.null_bins() == a.mask.null_bins());
}

TEST_CASE("precoders and metrics round-trip") {
    const SpectrumMask mask(4, 4, {0, 5, 10, 4, 8, 12});
    const auto set = build_precoders(mask, PrecoderForm::NullSpace);
    const auto path = scratch("p.csv");
    io::write_precoders(path, set, "h");
    const auto back = io::read_precoders(path);
    REQUIRE(back.per_subcarrier.size() == 4);
    for (int k = 0; k < 4; ++k) CHECK(back.per_subcarrier[static_cast<std::size_t>(k)] == set.per_subcarrier[static_cast<std::size_t>(k)]);
    CHECK(back.is_empty_subcarrier(0));

    const std::vector<io::MetricRecord> m = {{"nmse_db:dirac", -48.123456789012345, "h1"}, {"cosine:dirac", 0.9999937, "h1"}};
    const auto mp = scratch("m.json");
    io::write_metrics(mp, m);
    const auto r = io::read_metrics(mp);
    REQUIRE(r.size() == 2);
    CHECK(r[0].value == m[0].value);
    CHECK(r[1].metric == "cosine:dirac");
}

TEST_CASE("missing files and bad contents are reported") {
    CHECK_THROWS_AS(io::read_samples(scratch("does_not_exist.csv")), InputError);
    const auto p = scratch("bad.csv");
    io::write_text(p, "# M=1\nfreq,psd\n1,2\n");
    CHECK_THROWS_AS(io::read_curve(p), InputError);
    io::write_text(p, "{not json");
    CHECK_THROWS_AS(io::read_json(p), ConfigError);
}
