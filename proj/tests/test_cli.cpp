#include <filesystem>
#include <fstream>
#include <sstream>

#include "boxmodel/io.hpp"
#include "cli.hpp"
#include "doctest.h"

namespace fs = std::filesystem;
using boxmodel::io::Json;

namespace {

struct Run {
    int code = 0;
    std::string out, err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream o, e;
    Run r;
    r.code = boxmodel::cli::run(args, o, e);
    r.out = o.str();
    r.err = e.str();
    return r;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("boxmodel_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p) { return boxmodel::io::read_text(p.string()); }

}  // namespace

TEST_CASE("meanfield writes lambda_star with a header") {
    const auto dir = scratch("mf");
    const auto cfg = write(dir / "c.json", R"({"free_energy":{"kind":"tonks","rod_length":1,"beta":1},"model":{"alpha":12}})");
    const auto r = cli({"meanfield", "--config", cfg.string(), "--out", (dir / "o").string()});
    REQUIRE(r.code == 0);
    const Json j = Json::parse(slurp(dir / "o" / "meanfield.json"));
    CHECK(j.at("header").at("format_version") == "boxmodel-artifact/1");
    CHECK(boxmodel::io::to_double(j.at("lambda_star")) == doctest::Approx(-4.398413073730069).epsilon(1e-9));
    const std::string csv = slurp(dir / "o" / "meanfield_phi.csv");
    CHECK(csv.rfind("# format=boxmodel-artifact/1 manifest=fnv1a64:", 0) == 0);
    CHECK(csv.find(j.at("header").at("manifest_digest").get<std::string>().substr(8)) != std::string::npos);
}

TEST_CASE("exit codes") {
    const auto dir = scratch("codes");
    const std::string out = (dir / "o").string();
    CHECK(cli({"meanfield", "--config", write(dir / "bad.json", "{\"model\":").string(), "--out", out}).code == 2);
    CHECK(cli({"nonsense"}).code == 2);
    CHECK(cli({"meanfield", "--config", (dir / "missing.json").string()}).code == 2);

    const auto ill = cli({"meanfield", "--config",
                          write(dir / "ill.json", R"({"free_energy":{"kind":"ideal_gas","beta":1},"model":{"alpha":1}})")
                              .string(),
                          "--out", out});
    CHECK(ill.code == 3);
    CHECK(ill.err.find("model ill-defined") != std::string::npos);

    const auto typo = cli({"meanfield", "--config", write(dir / "typo.json", R"({"model":{"alhpa":1}})").string(),
                           "--out", out});
    CHECK(typo.code == 3);
    CHECK(typo.err.find("model.alhpa") != std::string::npos);

    CHECK(cli({"meanfield", "--config", write(dir / "type.json", R"({"model":{"L":"big"}})").string(), "--out", out})
              .code == 3);
    CHECK(cli({"verify", "--config", write(dir / "empty.json", R"({"verify":{"suites":[]}})").string(), "--out", out})
              .code == 2);
    CHECK(cli({"verify", "--config", write(dir / "unk.json", R"({"verify":{"suites":["nope"]}})").string(), "--out",
               out})
              .code == 2);
}

TEST_CASE("manifest round-trips byte for byte") {
    const auto dir = scratch("manifest");
    REQUIRE(cli({"meanfield", "--out", (dir / "o").string(), "--seed", "9"}).code == 0);
    const std::string first = slurp(dir / "o" / "manifest.json");
    const auto copy = write(dir / "m.json", first);
    REQUIRE(cli({"meanfield", "--config", copy.string()}).code == 0);
    CHECK(slurp(dir / "o" / "manifest.json") == first);

    // tampering with a field breaks the digest
    Json j = Json::parse(first);
    j["manifest"]["seed"] = 10;
    CHECK(cli({"meanfield", "--config", write(dir / "t.json", j.dump()).string()}).code == 3);
}

TEST_CASE("verify reports the injected violation") {
    const auto dir = scratch("verify");
    const auto r = cli({"verify", "--config",
                        write(dir / "c.json", R"({"verify":{"suites":["injected_violation","ds_budget"]}})").string(),
                        "--out", (dir / "o").string()});
    CHECK(r.code == 1);
    const Json j = Json::parse(slurp(dir / "o" / "verify.json"));
    bool seen = false;
    for (const auto& s : j.at("suites"))
        if (s.at("suite") == "injected_violation") {
            seen = true;
            CHECK_FALSE(s.at("pass").get<bool>());
            CHECK(boxmodel::io::to_double(s.at("worst_margin")) < 0.0);
        } else {
            CHECK(s.at("pass").get<bool>());
        }
    CHECK(seen);
}

TEST_CASE("scan resumes from checkpoints with identical bytes") {
    const auto dir = scratch("scan");
    const auto cfg = write(dir / "c.json", R"({"model":{"L":4,"gamma":0.5},
        "scan":{"sweeps":200,"burn_in":20,"thin":5,"pressures":false}})");
    const std::string a = (dir / "a").string(), b = (dir / "b").string();
    REQUIRE(cli({"scan", "--config", cfg.string(), "--out", a}).code == 0);
    REQUIRE(cli({"scan", "--config", cfg.string(), "--out", b, "--stop-after", "2"}).code == 0);
    CHECK_FALSE(fs::exists(fs::path(b) / "scan_report.json"));
    CHECK(fs::exists(fs::path(b) / "checkpoints" / "scan_point_1.json"));
    const auto resumed = cli({"scan", "--config", cfg.string(), "--out", b});
    REQUIRE(resumed.code == 0);
    CHECK(resumed.out.find("resumed 2 of 5") != std::string::npos);
    // the out path is part of the manifest, so compare bodies below the header
    auto body = [](const std::string& s) {
        Json j = Json::parse(s);
        j.erase("header");
        j["manifest"].erase("out");
        return j.dump();
    };
    CHECK(body(slurp(fs::path(a) / "scan_report.json")) == body(slurp(fs::path(b) / "scan_report.json")));
    auto csv_body = [](const std::string& s) { return s.substr(s.find('\n')); };
    CHECK(csv_body(slurp(fs::path(a) / "scan_traces.csv")) == csv_body(slurp(fs::path(b) / "scan_traces.csv")));
}

TEST_CASE("same manifest, same bytes") {
    const auto dir = scratch("det");
    const auto cfg = write(dir / "c.json", R"({"model":{"L":4,"gamma":0.5},"sampler":{"sweeps":100,"burn_in":10}})");
    const std::string out = (dir / "o").string();
    REQUIRE(cli({"sample", "--config", cfg.string(), "--out", out}).code == 0);
    const std::string first = slurp(fs::path(out) / "sample_trace.csv");
    const std::string first_json = slurp(fs::path(out) / "sample.json");
    REQUIRE(cli({"sample", "--config", cfg.string(), "--out", out, "--threads", "2"}).code == 0);
    CHECK(slurp(fs::path(out) / "sample_trace.csv") == first);
    CHECK(slurp(fs::path(out) / "sample.json") == first_json);
}
