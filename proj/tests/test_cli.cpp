#include "doctest.h"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "grfkit/container.hpp"
#include "grfkit/model.hpp"
#include "helpers.hpp"

using namespace grfkit;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(GRFKIT_CLI_PATH) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

double csv_value(const std::filesystem::path& report, const std::string& metric,
                 const std::string& channel) {
    std::ifstream is(report);
    REQUIRE(is.good());
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
        std::stringstream ss(line);
        std::string m, c, v;
        std::getline(ss, m, ',');
        std::getline(ss, c, ',');
        std::getline(ss, v, ',');
        if (m == metric && c == channel) return std::stod(v);
    }
    FAIL("metric not found in report: " << metric);
    return 0.0;
}

}  // namespace

TEST_CASE("synth -> label -> eval closed loop scores near-perfect F1") {
    testutil::TempDir dir("cli_loop");
    const auto take = (dir.path() / "take").string();
    const auto relabeled = (dir.path() / "labeled").string();
    const auto report = dir.path() / "report.csv";

    REQUIRE(run("synth --minutes 0.5 --seed 3 --out " + take) == 0);
    REQUIRE(run("label --take " + take + " --out " + relabeled) == 0);
    REQUIRE(run("eval contacts --pred " + relabeled + " --truth " + take + " --out " +
                report.string()) == 0);
    CHECK(csv_value(report, "f1", "all") >= 0.98);
}

TEST_CASE("train --epochs 0 writes a loadable initialization") {
    testutil::TempDir dir("cli_train0");
    const auto take = (dir.path() / "take").string();
    const auto model = (dir.path() / "model.upm").string();
    REQUIRE(run("synth --minutes 0.25 --seed 5 --out " + take) == 0);
    REQUIRE(run("train --data " + take + " --variant vgrf --width-scale 0.25 --epochs 0 "
                "--val-split 0 --out " + model) == 0);
    const auto loaded = nn::load_model(model);
    CHECK(loaded.config.variant == nn::Variant::vgrf);
    CHECK(std::filesystem::exists(model + ".history.csv"));
}

TEST_CASE("sync without jump markers exits 1 with a validation error") {
    testutil::TempDir dir("cli_sync");
    const auto take = (dir.path() / "take").string();
    REQUIRE(run("synth --minutes 0.25 --seed 7 --out " + take) == 0);
    CHECK(run("sync --take " + take + " --out " + (dir.path() / "synced").string()) == 1);
    // Partial outputs are deleted on failure.
    CHECK(!std::filesystem::exists(dir.path() / "synced"));
}

TEST_CASE("sync with jump markers round-trips") {
    testutil::TempDir dir("cli_sync_ok");
    const auto take = (dir.path() / "take").string();
    const auto synced = (dir.path() / "synced").string();
    REQUIRE(run("synth --minutes 0.35 --seed 9 --jump-markers --out " + take) == 0);
    REQUIRE(run("sync --take " + take + " --out " + synced) == 0);
    const Take out = load_take(synced);
    CHECK(out.synchronized);
    CHECK(out.poses.frames() < load_take(take).poses.frames());  // patterns trimmed
}

TEST_CASE("unknown flags are rejected") {
    CHECK(run("synth --nonsense 1 --out /tmp/x") != 0);
    CHECK(run("wat") != 0);
}

TEST_CASE("missing take directory is an I/O error (exit 2)") {
    testutil::TempDir dir("cli_missing");
    CHECK(run("label --take " + (dir.path() / "nope").string() + " --out " +
              (dir.path() / "out").string()) == 2);
}

TEST_CASE("estimate writes a blob sized to the take") {
    testutil::TempDir dir("cli_estimate");
    const auto take = (dir.path() / "take").string();
    const auto model = (dir.path() / "model.upm").string();
    const auto blob = (dir.path() / "vgrf_hat.f32").string();
    REQUIRE(run("synth --minutes 0.25 --seed 11 --out " + take) == 0);
    REQUIRE(run("train --data " + take + " --variant vgrf --width-scale 0.125 --epochs 0 "
                "--val-split 0 --out " + model) == 0);
    REQUIRE(run("estimate --model " + model + " --take " + take + " --out " + blob) == 0);
    const Take t = load_take(take);
    CHECK(std::filesystem::file_size(blob) ==
          static_cast<std::uintmax_t>(t.poses.frames()) * 2 * kCellsPerFoot * 4);

    // And the estimate evaluates against the truth take.
    const auto report = dir.path() / "rmse.csv";
    REQUIRE(run("eval vgrf --pred " + blob + " --truth " + take + " --out " + report.string()) ==
            0);
    CHECK(csv_value(report, "vgrf_rmse_bw", "left") >= 0.0);
}

TEST_CASE("ot fit and apply round-trip through thresholds.json") {
    testutil::TempDir dir("cli_ot");
    const auto take = (dir.path() / "take").string();
    const auto thresholds = (dir.path() / "thresholds.json").string();
    const auto applied = (dir.path() / "applied").string();
    const auto report = dir.path() / "report.csv";
    REQUIRE(run("synth --minutes 0.5 --seed 13 --out " + take) == 0);
    REQUIRE(run("ot fit --data " + take + " --out " + thresholds) == 0);
    REQUIRE(run("ot apply --take " + take + " --thresholds " + thresholds + " --out " +
                applied) == 0);
    REQUIRE(run("eval contacts --pred " + applied + " --truth " + take + " --out " +
                report.string()) == 0);
    CHECK(csv_value(report, "f1", "all") >= 0.85);
}

TEST_CASE("reproducibility: identical inputs and seeds give byte-identical outputs") {
    testutil::TempDir dir("cli_repro");
    const auto a = (dir.path() / "a").string();
    const auto b = (dir.path() / "b").string();
    REQUIRE(run("synth --minutes 0.25 --seed 21 --out " + a) == 0);
    REQUIRE(run("synth --minutes 0.25 --seed 21 --out " + b) == 0);
    for (const char* name : {"meta.json", "poses.f32", "vgrf.f32", "contacts.u8"}) {
        std::ifstream fa(std::filesystem::path(a) / name, std::ios::binary);
        std::ifstream fb(std::filesystem::path(b) / name, std::ios::binary);
        std::stringstream sa, sb;
        sa << fa.rdbuf();
        sb << fb.rdbuf();
        CHECK(sa.str() == sb.str());
    }
}
