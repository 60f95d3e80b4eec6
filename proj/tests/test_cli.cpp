#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "sset/core.hpp"
#include "sset/io.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using testsupport::ScratchDir;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr interleaved
};

RunResult run(const std::string& command) {
    RunResult result;
    FILE* pipe = popen((command + " 2>&1").c_str(), "r");
    REQUIRE_MESSAGE(pipe != nullptr, "popen failed");
    std::array<char, 4096> buffer{};
    while (fgets(buffer.data(), buffer.size(), pipe) != nullptr) {
        result.output += buffer.data();
    }
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string cli() {
    const char* path = std::getenv("SSET_CLI");
    REQUIRE_MESSAGE(path != nullptr, "SSET_CLI must point at the sset binary");
    return path;
}

/// Small three-class spec: plants on distinct signals over a shared interval,
/// far enough above the noise for reliable winners.
void write_mini_spec(const fs::path& file) {
    sset::write_text_file_atomic(file, R"({
  "steps": 12,
  "signals": 4,
  "classes": 3,
  "planted": [
    {"signal": 0, "t_lo": 4, "t_hi": 9, "amplitude": 0.3},
    {"signal": 1, "t_lo": 4, "t_hi": 9, "amplitude": 0.3},
    {"signal": 2, "t_lo": 4, "t_hi": 9, "amplitude": 0.3}
  ],
  "noise_sigma": 0.05,
  "n_train": 30,
  "n_test": 6,
  "seed": 11
}
)");
}

bool same_bytes(const fs::path& a, const fs::path& b) {
    return sset::read_text_file(a) == sset::read_text_file(b);
}

}  // namespace

TEST_CASE("the CLI requires a subcommand") {
    CHECK(run(cli()).exit_code != 0);
    CHECK(run(cli() + " frobnicate").exit_code != 0);
}

TEST_CASE("synth generates a loadable dataset, reproducibly") {
    ScratchDir dir("cli_synth");
    write_mini_spec(dir.path() / "spec.json");

    const RunResult first =
        run(cli() + " synth --spec " + (dir.path() / "spec.json").string() + " --out " +
            (dir.path() / "a").string());
    REQUIRE_MESSAGE(first.exit_code == 0, first.output);
    CHECK(first.output.find("30 train / 6 test") != std::string::npos);

    const sset::LabeledDataset ds = sset::load_dataset(dir.path() / "a");
    CHECK(ds.meta.steps == 12);
    CHECK(ds.train.size() == 30);
    CHECK(fs::exists(dir.path() / "a" / "ground_truth.json"));
    CHECK(fs::exists(dir.path() / "a" / "manifest.json"));

    const RunResult second =
        run(cli() + " synth --spec " + (dir.path() / "spec.json").string() + " --out " +
            (dir.path() / "b").string());
    REQUIRE(second.exit_code == 0);
    for (const char* name : {"meta.json", "train.csv", "test.csv", "ground_truth.json"}) {
        CHECK(same_bytes(dir.path() / "a" / name, dir.path() / "b" / name));
    }
}

TEST_CASE("synth rejects an inverted planted interval") {
    ScratchDir dir("cli_badspec");
    sset::write_text_file_atomic(dir.path() / "spec.json", R"({
  "steps": 12, "signals": 2, "classes": 1,
  "planted": [{"signal": 0, "t_lo": 6, "t_hi": 2, "amplitude": 0.3}],
  "noise_sigma": 0.0, "n_train": 2, "n_test": 1, "seed": 1
})");
    const RunResult got = run(cli() + " synth --spec " + (dir.path() / "spec.json").string() +
                              " --out " + (dir.path() / "out").string());
    CHECK(got.exit_code != 0);
    CHECK(got.output.find("error") != std::string::npos);
}

TEST_CASE("explain covers selection, determinism, failure modes, and downstream commands") {
    ScratchDir dir("cli_explain");
    write_mini_spec(dir.path() / "spec.json");
    const std::string data = (dir.path() / "data").string();
    REQUIRE(run(cli() + " synth --spec " + (dir.path() / "spec.json").string() + " --out " + data)
                .exit_code == 0);

    SUBCASE("--sample 0 writes the manifest and nothing else, exiting zero") {
        const std::string out = (dir.path() / "zero").string();
        const RunResult got = run(cli() + " explain --data " + data +
                                  " --sample 0 --seed 3 --out " + out);
        CHECK(got.exit_code == 0);
        CHECK(fs::exists(fs::path(out) / "manifest.json"));
        int entries = 0;
        for (const auto& e : fs::directory_iterator(out)) {
            (void)e;
            ++entries;
        }
        CHECK(entries == 1);
    }

    SUBCASE("an instance selection is required") {
        const RunResult got =
            run(cli() + " explain --data " + data + " --out " + (dir.path() / "x").string());
        CHECK(got.exit_code != 0);
        CHECK(got.output.find("--ids or --sample") != std::string::npos);
    }

    SUBCASE("--ids and --sample exclude each other") {
        const RunResult got = run(cli() + " explain --data " + data +
                                  " --ids test_0 --sample 2 --out " + (dir.path() / "x").string());
        CHECK(got.exit_code != 0);
    }

    SUBCASE("unknown instance ids are an error") {
        const RunResult got = run(cli() + " explain --data " + data + " --ids nope --out " +
                                  (dir.path() / "x").string());
        CHECK(got.exit_code != 0);
        CHECK(got.output.find("nope") != std::string::npos);
    }

    SUBCASE("unknown config keys are an error") {
        sset::write_text_file_atomic(dir.path() / "config.json", R"({"thr_x": 1})");
        const RunResult got = run(cli() + " explain --data " + data + " --config " +
                                  (dir.path() / "config.json").string() + " --ids test_0 --out " +
                                  (dir.path() / "x").string());
        CHECK(got.exit_code != 0);
        CHECK(got.output.find("thr_x") != std::string::npos);
    }

    SUBCASE("a sampling budget larger than the test split is an error") {
        const RunResult got = run(cli() + " explain --data " + data + " --sample 7 --out " +
                                  (dir.path() / "x").string());
        CHECK(got.exit_code != 0);
    }

    SUBCASE("explicit ids run end to end and rerun byte-identically") {
        const std::string out_a = (dir.path() / "run_a").string();
        const std::string out_b = (dir.path() / "run_b").string();
        const std::string selection = " --ids test_0,test_3 --seed 5 ";
        const RunResult a = run(cli() + " explain --data " + data + selection + "--out " + out_a);
        REQUIRE_MESSAGE(a.exit_code == 0, a.output);
        CHECK(a.output.find("explained") != std::string::npos);

        const RunResult b = run(cli() + " explain --data " + data + selection + "--out " + out_b +
                                " --jobs 2");
        REQUIRE(b.exit_code == 0);
        for (const char* name : {"test_0.json", "test_0.csv", "test_3.json", "test_3.csv"}) {
            CHECK(same_bytes(fs::path(out_a) / name, fs::path(out_b) / name));
        }

        const json manifest = sset::parse_json_file(fs::path(out_a) / "manifest.json");
        CHECK(manifest["command"] == "explain");
        CHECK(manifest["ids"] == json::array({"test_0", "test_3"}));
        CHECK(manifest["oracle"] == "builtin");

        // report over the run, with the occlusion baseline
        const std::string report_dir = (dir.path() / "report").string();
        const RunResult rep = run(cli() + " report --explanations " + out_a + " --data " + data +
                                  " --with-baseline --out " + report_dir);
        REQUIRE_MESSAGE(rep.exit_code == 0, rep.output);
        const std::string md = sset::read_text_file(fs::path(report_dir) / "report.md");
        CHECK(md.find("| Explainer | Precision | Informativeness | Similarity |") !=
              std::string::npos);
        CHECK(md.find("| SSET | ") != std::string::npos);
        CHECK(md.find("| Occlusion | ") != std::string::npos);
        const json report = sset::parse_json_file(fs::path(report_dir) / "report.json");
        CHECK(report.contains("sset"));
        CHECK(report.contains("occlusion"));
        CHECK(report.contains("salient_signal_histogram"));

        // render one explanation
        const std::string svg_path = (dir.path() / "test_0.svg").string();
        const RunResult ren = run(cli() + " render --explanation " + out_a +
                                  "/test_0.json --out " + svg_path);
        REQUIRE_MESSAGE(ren.exit_code == 0, ren.output);
        const std::string svg = sset::read_text_file(svg_path);
        CHECK(svg.find("<svg") != std::string::npos);
        CHECK(svg.find("test_0") != std::string::npos);
    }
}

TEST_CASE("report refuses to run without explanations") {
    ScratchDir dir("cli_report_empty");
    write_mini_spec(dir.path() / "spec.json");
    const std::string data = (dir.path() / "data").string();
    REQUIRE(run(cli() + " synth --spec " + (dir.path() / "spec.json").string() + " --out " + data)
                .exit_code == 0);
    fs::create_directories(dir.path() / "none");
    const RunResult got = run(cli() + " report --explanations " + (dir.path() / "none").string() +
                              " --data " + data + " --out " + (dir.path() / "rep").string());
    CHECK(got.exit_code != 0);
}

TEST_CASE("render rejects a missing explanation file") {
    const RunResult got =
        run(cli() + " render --explanation /nonexistent.json --out /tmp/never.svg");
    CHECK(got.exit_code != 0);
}
