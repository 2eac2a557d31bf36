#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <iovmesh/cli.hpp>

using namespace iovmesh;
namespace fs = std::filesystem;

namespace {

// Drive cli_main in-process with stdout captured.
struct CliResult {
    int code = 0;
    std::string out;
};

CliResult run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"iovmesh"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream captured;
    auto* old = std::cout.rdbuf(captured.rdbuf());
    CliResult r;
    try {
        r.code = cli_main(static_cast<int>(argv.size()), argv.data());
    } catch (...) {
        std::cout.rdbuf(old);
        throw;
    }
    std::cout.rdbuf(old);
    r.out = captured.str();
    return r;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("iovmesh_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Small static scenario: one vehicle, one all-covering RSU, 40 slots.
fs::path write_small_scenario(const fs::path& dir) {
    SimConfig c;
    c.scenario.area_width = 400.0;
    c.scenario.area_height = 300.0;
    c.scenario.n_vehicles = 1;
    c.scenario.n_rsus = 1;
    c.scenario.rsu_positions = {{200.0, 150.0}};
    c.scenario.n_slots = 40;
    c.scenario.light_schedule = {{0, LightPhaseKind::all_yellow}};
    const fs::path file = dir / "small.cfg";
    std::ofstream out(file);
    save_config(c, out);
    return file;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int line_count(const std::string& text) {
    int n = 0;
    for (char ch : text)
        if (ch == '\n') ++n;
    return n;
}

}  // namespace

TEST_CASE("seed list specs parse to explicit lists") {
    CHECK(detail::parse_seed_list("1..5") == std::vector<std::uint64_t>{1, 2, 3, 4, 5});
    CHECK(detail::parse_seed_list("7..7") == std::vector<std::uint64_t>{7});
    CHECK(detail::parse_seed_list("3,9,27") == std::vector<std::uint64_t>{3, 9, 27});
    CHECK(detail::parse_seed_list("42") == std::vector<std::uint64_t>{42});

    // A trailing comma is tolerated; empty tokens anywhere else are not.
    CHECK(detail::parse_seed_list("3,") == std::vector<std::uint64_t>{3});

    CHECK_THROWS_AS(detail::parse_seed_list("5..2"), ConfigError);
    CHECK_THROWS_AS(detail::parse_seed_list("x"), ConfigError);
    CHECK_THROWS_AS(detail::parse_seed_list("1..x"), ConfigError);
    CHECK_THROWS_AS(detail::parse_seed_list(",3"), ConfigError);
    CHECK_THROWS_AS(detail::parse_seed_list(""), ConfigError);
    CHECK_THROWS_AS(detail::parse_seed_list("1..9999999"), ConfigError);  // cap
}

TEST_CASE("validate accepts good scenarios and flags bad ones") {
    const auto dir = fresh_dir("validate");
    const auto good = write_small_scenario(dir);
    auto r = run_cli({"validate", "--scenario", good.string()});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("ok") != std::string::npos);

    CHECK(run_cli({"validate", "--scenario", "default"}).code == kExitOk);

    const fs::path bad = dir / "bad.cfg";
    std::ofstream(bad) << "[scenario]\nslots = 0\n";
    CHECK(run_cli({"validate", "--scenario", bad.string()}).code == kExitConfig);

    const fs::path typo = dir / "typo.cfg";
    std::ofstream(typo) << "[scenario]\nvehicle = 3\n";
    CHECK(run_cli({"validate", "--scenario", typo.string()}).code == kExitConfig);

    CHECK(run_cli({"validate", "--scenario", (dir / "missing.cfg").string()}).code ==
          kExitConfig);
}

TEST_CASE("usage errors exit with the usage code") {
    CHECK(run_cli({}).code == kExitUsage);                      // subcommand required
    CHECK(run_cli({"frobnicate"}).code == kExitUsage);          // unknown subcommand
    CHECK(run_cli({"sweep"}).code == kExitUsage);               // --seeds required
    CHECK(run_cli({"run", "--no-such-flag"}).code == kExitUsage);
    CHECK(run_cli({"--help"}).code == kExitOk);                 // help is not an error
}

TEST_CASE("run writes metrics, task ledger and a reloadable manifest") {
    const auto dir = fresh_dir("run");
    const auto scenario = write_small_scenario(dir);
    const auto out1 = dir / "out1";

    const auto r = run_cli({"run", "--scenario", scenario.string(), "--seed", "5", "--out",
                            out1.string()});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("loss_rate=") != std::string::npos);

    const std::string metrics = slurp(out1 / "metrics.csv");
    CHECK(line_count(metrics) == 41);  // header + one row per slot
    CHECK(metrics.rfind("slot,loss_rate,arrive_rate,", 0) == 0);

    const std::string tasks = slurp(out1 / "tasks.csv");
    CHECK(line_count(tasks) == 41);  // header + one task per slot

    const std::string manifest = slurp(out1 / "manifest.cfg");
    CHECK(manifest.find("[manifest]") != std::string::npos);
    CHECK(manifest.find("seeds = 5") != std::string::npos);

    // The manifest is itself a runnable scenario that reproduces the run
    // byte for byte (it carries the seed; [manifest] is ignored on load).
    const auto out2 = dir / "out2";
    const auto rerun = run_cli({"run", "--scenario", (out1 / "manifest.cfg").string(),
                                "--out", out2.string()});
    CHECK(rerun.code == kExitOk);
    CHECK(slurp(out2 / "metrics.csv") == metrics);
    CHECK(slurp(out2 / "tasks.csv") == tasks);
}

TEST_CASE("run emits optional artifacts on request") {
    const auto dir = fresh_dir("artifacts");
    const auto scenario = write_small_scenario(dir);
    const auto out = dir / "out";
    const auto r = run_cli({"run", "--scenario", scenario.string(), "--out", out.string(),
                            "--flow-log", "--charts"});
    CHECK(r.code == kExitOk);
    CHECK(fs::exists(out / "flow_log.csv"));
    CHECK(line_count(slurp(out / "flow_log.csv")) > 1);

    bool any_svg = false;
    for (const auto& entry : fs::directory_iterator(out))
        if (entry.path().extension() == ".svg") any_svg = true;
    CHECK(any_svg);

    // Without the flags neither artifact appears.
    const auto bare = dir / "bare";
    run_cli({"run", "--scenario", scenario.string(), "--out", bare.string()});
    CHECK_FALSE(fs::exists(bare / "flow_log.csv"));
}

TEST_CASE("run option overrides land in the manifest") {
    const auto dir = fresh_dir("override");
    const auto scenario = write_small_scenario(dir);
    const auto out = dir / "out";
    const auto r = run_cli({"run", "--scenario", scenario.string(), "--out", out.string(),
                            "--qos", "40", "--cache-scale", "0.5"});
    CHECK(r.code == kExitOk);
    const std::string manifest = slurp(out / "manifest.cfg");
    CHECK(manifest.find("qos = 40000000") != std::string::npos);
    CHECK(manifest.find("cache_scale = 0.5") != std::string::npos);
}

TEST_CASE("sweep writes one directory per grid point") {
    const auto dir = fresh_dir("sweep");
    const auto scenario = write_small_scenario(dir);
    const auto out = dir / "out";
    const auto r = run_cli({"sweep", "--scenario", scenario.string(), "--seeds", "1..2",
                            "--qos", "20,40", "--out", out.string(), "--jobs", "2"});
    CHECK(r.code == kExitOk);

    for (const std::string label : {"qos20", "qos40"}) {
        const fs::path point = out / label;
        CHECK(fs::exists(point / "metrics_mean.csv"));
        CHECK(fs::exists(point / "metrics_seed1.csv"));
        CHECK(fs::exists(point / "metrics_seed2.csv"));
        CHECK(fs::exists(point / "manifest.cfg"));
        CHECK(line_count(slurp(point / "metrics_mean.csv")) == 41);
        const std::string manifest = slurp(point / "manifest.cfg");
        CHECK(manifest.find("seeds = 1 2") != std::string::npos);
    }
    // Labels echo into the summary output.
    CHECK(r.out.find("qos20:") != std::string::npos);
    CHECK(r.out.find("qos40:") != std::string::npos);

    // The per-point manifest pins the overridden QoS.
    CHECK(slurp(out / "qos40" / "manifest.cfg").find("qos = 40000000") != std::string::npos);
}

TEST_CASE("calibrate reports the largest passing QoS") {
    const auto dir = fresh_dir("calibrate");
    const auto scenario = write_small_scenario(dir);
    // The static pipeline is lossless, so the search returns the upper bound.
    const auto r = run_cli({"calibrate", "--scenario", scenario.string(), "--seeds", "1",
                            "--target-loss", "0.05", "--lo", "10", "--hi", "12"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("calibrated_qos_mbps=12") != std::string::npos);
}
