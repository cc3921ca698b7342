#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mmdqn/harness.hpp"

using namespace mmdqn;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(MMDQN_CLI_PATH) + " " + args + " > cli_stdout.txt 2> cli_stderr.txt";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("train / eval / report pipeline through the CLI") {
    fs::remove_all("cli_out");

    std::ofstream cfg("cli_cfg.ini");
    cfg << "[render]\nresolution = 10\n"
        << "[dqn]\ntotal_steps = 1200\nwarmup = 200\nbatch_size = 32\n"
        << "[experiment]\nreport_window = 400\n";
    cfg.close();

    int rc = run_cli("train --config cli_cfg.ini --scenario big-fixed --modality raw "
                     "--seed 1 --out cli_out/raw");
    CHECK(rc == 0);
    CHECK(fs::exists("cli_out/raw/train_s1.csv"));
    CHECK(fs::exists("cli_out/raw/model_s1.mmdq"));

    SUBCASE("eval runs on the trained checkpoint") {
        rc = run_cli("eval --checkpoint cli_out/raw/model_s1.mmdq --config cli_cfg.ini "
                     "--scenario big-fixed --modality raw --episodes 5 --seed 1 --out cli_out/raw");
        CHECK(rc == 0);
        CHECK(fs::exists("cli_out/raw/eval_s1.csv"));
        std::string out = slurp("cli_stdout.txt");
        CHECK(out.find("success_rate:") != std::string::npos);
    }

    SUBCASE("report aggregates the run directory into an SVG") {
        rc = run_cli("report --in cli_out --out cli_out/plot.svg");
        CHECK(rc == 0);
        std::string svg = slurp("cli_out/plot.svg");
        CHECK(svg.find("<svg") != std::string::npos);
        CHECK(svg.find("polyline") != std::string::npos);
        CHECK(svg.find("raw") != std::string::npos);
    }

    SUBCASE("checkpoint-vs-config mismatch fails with a diagnostic") {
        rc = run_cli("eval --checkpoint cli_out/raw/model_s1.mmdq --config cli_cfg.ini "
                     "--scenario big-fixed --modality pitch --episodes 2 --out cli_out/bad");
        CHECK(rc != 0);
        CHECK(!slurp("cli_stderr.txt").empty());
    }

    fs::remove_all("cli_out");
    std::remove("cli_cfg.ini");
}

TEST_CASE("CLI error handling") {
    CHECK(run_cli("train") != 0);                       // missing required --out
    CHECK(run_cli("bogus-subcommand") != 0);
    CHECK(run_cli("train --scenario nowhere --out x") != 0);
    CHECK(run_cli("eval --checkpoint does_not_exist.mmdq") != 0);
    CHECK(run_cli("report --in does_not_exist_dir --out x.svg") != 0);
}

TEST_CASE("dump-map matches the map layout") {
    CHECK(run_cli("dump-map --out cli_map.txt") == 0);
    std::ostringstream want;
    build_five_room_map().dump(want);
    CHECK(slurp("cli_map.txt") == want.str());
    std::remove("cli_map.txt");
}

TEST_CASE("render-frame writes a PPM with the requested resolution") {
    CHECK(run_cli("render-frame --x 0 --y 0 --heading-deg 45 --goal-x 2 --goal-y 2 "
                  "--resolution 24 --out cli_frame.ppm") == 0);
    std::ifstream is("cli_frame.ppm", std::ios::binary);
    std::string magic;
    int w = 0, h = 0;
    is >> magic >> w >> h;
    CHECK(magic == "P6");
    CHECK(w == 24);
    CHECK(h == 24);
    std::remove("cli_frame.ppm");
}

TEST_CASE("synth-beacon writes a WAV clip") {
    CHECK(run_cli("synth-beacon --distance 5 --out cli_beacon.wav") == 0);
    std::string wav = slurp("cli_beacon.wav");
    REQUIRE(wav.size() > 44);
    CHECK(wav.substr(0, 4) == "RIFF");
    CHECK(wav.substr(8, 4) == "WAVE");
    std::remove("cli_beacon.wav");
}
