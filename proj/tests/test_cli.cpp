#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

using doctest::Approx;
namespace fs = std::filesystem;

namespace {

const char* cli_path() { return MSTATIC_CLI_PATH; }

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("mstatic_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
    const std::string cmd = std::string(cli_path()) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

// Small scenario so CLI runs stay fast.
const char* kSmallConfig = R"({
  "targets": {"count": 2, "region": {"x_min": -4, "x_max": 4, "y_min": 5, "y_max": 9},
              "min_separation_m": 2.0},
  "grid": {"x_min": -5, "x_max": 5, "y_min": 4, "y_max": 10, "step": 0.5},
  "pairs": [
    {"pair_id": 0, "tx": {"origin": [-5, 0], "elements": 4}, "rx": {"origin": [0, 0], "elements": 4},
     "subcarriers": 64, "noise_variance": 0.5},
    {"pair_id": 1, "tx": {"origin": [0, 0], "elements": 4}, "rx": {"origin": [0, 0], "elements": 4},
     "subcarriers": 64, "noise_variance": 0.5}
  ]
})";

}  // namespace

TEST_CASE("unknown flags and subcommands exit nonzero") {
    CHECK(run("definitely-not-a-subcommand") != 0);
    CHECK(run("mc --definitely-not-a-flag") != 0);
    CHECK(run("") != 0);  // a subcommand is required
}

TEST_CASE("mc is byte-deterministic for a fixed seed") {
    TempDir dir;
    write_file(dir.file("cfg.json"), kSmallConfig);
    const std::string base = "mc --config " + dir.file("cfg.json") + " --trials 6 --seed 7";
    REQUIRE(run(base + " --out " + dir.file("a")) == 0);
    REQUIRE(run(base + " --out " + dir.file("b")) == 0);
    CHECK(read_file(dir.file("a/report.json")) == read_file(dir.file("b/report.json")));
    CHECK(read_file(dir.file("a/trials.jsonl")) == read_file(dir.file("b/trials.jsonl")));

    SUBCASE("thread count does not change the bytes") {
        REQUIRE(run(base + " --threads 4 --out " + dir.file("c")) == 0);
        CHECK(read_file(dir.file("a/report.json")) == read_file(dir.file("c/report.json")));
        CHECK(read_file(dir.file("a/trials.jsonl")) == read_file(dir.file("c/trials.jsonl")));
    }
    SUBCASE("a different seed changes the report") {
        REQUIRE(run("mc --config " + dir.file("cfg.json") + " --trials 6 --seed 8 --out " +
                    dir.file("d")) == 0);
        CHECK(read_file(dir.file("a/report.json")) != read_file(dir.file("d/report.json")));
    }
}

TEST_CASE("map emits one combined plus one per-pair csv per map method") {
    TempDir dir;
    write_file(dir.file("cfg.json"), kSmallConfig);
    REQUIRE(run("map --config " + dir.file("cfg.json") + " --seed 3 --out " + dir.file("maps")) ==
            0);
    for (const std::string method : {"proposed", "method_a", "method_b", "fft2d"}) {
        CHECK(fs::exists(dir.file("maps/map_" + method + "_pair0.csv")));
        CHECK(fs::exists(dir.file("maps/map_" + method + "_pair1.csv")));
        CHECK(fs::exists(dir.file("maps/map_" + method + "_combined.csv")));
    }
    CHECK(!fs::exists(dir.file("maps/map_soft_combined.csv")));  // soft has no map
    CHECK(fs::exists(dir.file("maps/scene.json")));

    SUBCASE("map runs are byte-deterministic too") {
        REQUIRE(run("map --config " + dir.file("cfg.json") + " --seed 3 --out " +
                    dir.file("maps2")) == 0);
        CHECK(read_file(dir.file("maps/map_proposed_combined.csv")) ==
              read_file(dir.file("maps2/map_proposed_combined.csv")));
    }
}

TEST_CASE("oracle reports cell agreement on a small noiseless scene") {
    TempDir dir;
    std::string cfg(kSmallConfig);
    write_file(dir.file("cfg.json"), cfg);
    REQUIRE(run("oracle --config " + dir.file("cfg.json") + " --seed 5 --grid-step 1.0 --out " +
                dir.file("oracle")) == 0);
    const std::string text = read_file(dir.file("oracle/oracle.json"));
    CHECK(text.find("\"agreement\"") != std::string::npos);
    CHECK(text.find("\"noiseless\": true") != std::string::npos);

    SUBCASE("budget refusal exits nonzero") {
        CHECK(run("oracle --config " + dir.file("cfg.json") + " --budget 3 --out " +
                  dir.file("o2")) != 0);
    }
}

TEST_CASE("sweep writes one report per Q") {
    TempDir dir;
    write_file(dir.file("cfg.json"), kSmallConfig);
    REQUIRE(run("sweep --config " + dir.file("cfg.json") + " --trials 3 --seed 2 --q-list 16,32 "
                "--out " + dir.file("sweep")) == 0);
    const std::string text = read_file(dir.file("sweep/sweep.json"));
    CHECK(text.find("\"runs\"") != std::string::npos);
    CHECK(text.find("\"subcarriers\": 16") != std::string::npos);
    CHECK(text.find("\"subcarriers\": 32") != std::string::npos);
}

TEST_CASE("invalid config exits nonzero with the key in the message") {
    TempDir dir;
    write_file(dir.file("bad.json"), R"({"pairs": [{"noise_variance": -2}]})");
    const std::string cmd = std::string(cli_path()) + " mc --config " + dir.file("bad.json") +
                            " --trials 1 --out " + dir.file("x") + " 2>" + dir.file("err.txt") +
                            " >/dev/null";
    const int status = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(status) != 0);
    CHECK(read_file(dir.file("err.txt")).find("noise_variance") != std::string::npos);
}
