#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sar/output.hpp"
#include "sar/runner.hpp"

using namespace sar;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path temp_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("quadsar_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

RunOptions short_mission(const fs::path& out) {
    RunOptions opts;
    opts.out_dir = out.string();
    opts.overrides = {
        "sim.duration=4.0",
        "scenario.area.width=15", "scenario.area.height=15",
        "scenario.victims=[{\"x\":7.5,\"y\":7.5,\"height\":1.7}]",
    };
    return opts;
}

}  // namespace

TEST_CASE("format_double round-trips exactly") {
    for (double v : {0.1, 1.0 / 3.0, 9.81, -0.0049, 1e-12, 12345.6789}) {
        CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("two runs with one seed produce byte-identical artifacts") {
    const fs::path out1 = temp_dir("det1"), out2 = temp_dir("det2");
    RunOptions a = short_mission(out1);
    RunOptions b = short_mission(out2);
    run_simulation(a);
    run_simulation(b);
    for (const char* f : {"manifest.json", "attitude.csv", "detections.jsonl", "metrics.json"}) {
        INFO(f);
        CHECK(slurp(out1 / f) == slurp(out2 / f));
    }
}

TEST_CASE("manifest records the overridden value") {
    const fs::path out = temp_dir("override");
    RunOptions opts;
    opts.out_dir = out.string();
    opts.overrides = {"filter.alpha=0.5", "sim.duration=1.0"};
    run_simulation(opts);
    const json manifest = json::parse(slurp(out / "manifest.json"));
    CHECK(manifest["filter"]["alpha"].get<double>() == 0.5);
}

TEST_CASE("zero victims reports recall as null") {
    const fs::path out = temp_dir("novictims");
    RunOptions opts;
    opts.out_dir = out.string();
    opts.overrides = {"sim.duration=2.0"};  // default scenario has no victims
    const RunResult res = run_simulation(opts);
    CHECK(std::isnan(res.metrics.recall));
    CHECK(res.metrics.false_positives >= 0);
    const json metrics = json::parse(slurp(out / "metrics.json"));
    CHECK(metrics["recall"].is_null());
}

TEST_CASE("unknown override paths list the valid ones") {
    json tree = to_json(MasterConfig{});
    CHECK_THROWS_WITH_AS(apply_override(tree, "filter.alpa=0.5"),
                         doctest::Contains("filter.alpha"), ConfigError);
    CHECK_THROWS_AS(apply_override(tree, "no_equals_sign"), ConfigError);
}

TEST_CASE("config file errors carry their origin") {
    const fs::path dir = temp_dir("badcfg");
    write_file(dir / "bad.json", "{\"filter\": {\"alpa\": 0.5}}");
    CHECK_THROWS_WITH_AS(load_config((dir / "bad.json").string()),
                         doctest::Contains("filter: unknown key 'alpa'"), ConfigError);

    write_file(dir / "syntax.json", "{nope");
    CHECK_THROWS_AS(load_config((dir / "syntax.json").string()), ConfigError);

    CHECK_THROWS_WITH_AS(load_config((dir / "missing.json").string()),
                         doctest::Contains("cannot open"), ConfigError);

    write_file(dir / "badval.json", "{\"sim\": {\"dt\": -1}}");
    CHECK_THROWS_WITH_AS(load_config((dir / "badval.json").string()),
                         doctest::Contains("sim.dt"), ConfigError);
}

TEST_CASE("scenario_file is resolved into the config") {
    const fs::path dir = temp_dir("scenfile");
    write_file(dir / "scen.json",
               R"({"area": {"width": 9, "height": 9}, "victims": [], "search_altitude": 2.5})");
    write_file(dir / "cfg.json",
               "{\"scenario_file\": \"" + (dir / "scen.json").string() + "\"}");
    const MasterConfig cfg = load_config((dir / "cfg.json").string());
    CHECK(cfg.scenario.area_width == 9.0);
    CHECK(cfg.scenario.search_altitude == 2.5);
}

TEST_CASE("sweep writes one row per value with deterministic sub-seeds") {
    const fs::path out = temp_dir("sweep");
    RunOptions opts;
    opts.out_dir = out.string();
    opts.overrides = {"sim.duration=1.0"};
    run_sweep(opts, "filter.alpha", {"0.5", "0.9", "0.98"});

    std::istringstream csv(slurp(out / "sweep.csv"));
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(csv, line)) lines.push_back(line);
    REQUIRE(lines.size() == 4);
    CHECK(lines[0].rfind("parameter,value,seed", 0) == 0);
    CHECK(lines[1].rfind("filter.alpha,0.5,", 0) == 0);
    CHECK(lines[3].rfind("filter.alpha,0.98,", 0) == 0);

    // Re-running reproduces the same bytes.
    const std::string first = slurp(out / "sweep.csv");
    run_sweep(opts, "filter.alpha", {"0.5", "0.9", "0.98"});
    CHECK(slurp(out / "sweep.csv") == first);
}

TEST_CASE("sweep rejects empty value lists and unknown paths") {
    RunOptions opts;
    opts.out_dir = temp_dir("sweepbad").string();
    CHECK_THROWS_AS(run_sweep(opts, "filter.alpha", {}), ConfigError);
    CHECK_THROWS_WITH_AS(run_sweep(opts, "not.a.path", {"1"}),
                         doctest::Contains("valid paths"), ConfigError);
}

TEST_CASE("raising far_limit recovers a distant victim") {
    // One transect at 25 m altitude over a victim placed far from the climb
    // point, so the closest approach is the 25 m overflight. A better
    // rangefinder stands in for the stock 4 m one at that height.
    const fs::path out = temp_dir("farsweep");
    RunOptions opts;
    opts.out_dir = out.string();
    opts.overrides = {
        "sim.duration=60.0",
        "ultrasonic.max_range=40",
        "scenario.search_altitude=25",
        "scenario.area.width=10", "scenario.area.height=40",
        "scenario.cruise_speed=2.0",
        "scenario.victims=[{\"x\":5,\"y\":35,\"height\":1.7}]",
        "detector.false_positive_rate=0",
    };
    run_sweep(opts, "detector.far_limit", {"10", "20", "30"});

    std::istringstream csv(slurp(out / "sweep.csv"));
    std::string line;
    std::getline(csv, line);  // header
    std::vector<double> recalls;
    while (std::getline(csv, line)) {
        std::stringstream ss(line);
        std::string field;
        for (int i = 0; i < 4; ++i) std::getline(ss, field, ',');
        recalls.push_back(std::stod(field));
    }
    REQUIRE(recalls.size() == 3);
    CHECK(recalls[0] <= recalls[1]);
    CHECK(recalls[1] <= recalls[2]);
    CHECK(recalls[2] > recalls[0]);
    CHECK(recalls[2] == 1.0);
}

TEST_CASE("eval reproduces the run metrics from the log file") {
    const fs::path out = temp_dir("eval");
    RunOptions opts = short_mission(out);
    const RunResult res = run_simulation(opts);
    const json evaluated = run_eval((out / "detections.jsonl").string(), opts);
    CHECK(evaluated["false_positives"] == res.metrics_json["false_positives"]);
    CHECK(evaluated["matched"] == res.metrics_json["matched"]);
    CHECK(evaluated["recall"] == res.metrics_json["recall"]);
    CHECK(evaluated["raw_detections"] == res.metrics_json["raw_detections"]);
}

TEST_CASE("detection records round-trip through their JSONL form") {
    MissionLogEntry e;
    e.t = 1.25;
    e.drone_pos = {1.0, 2.0, 3.0};
    e.drone_att = {0.1, -0.2, 0.3};
    e.box = {0.4, 0.5, 0.05, 0.1};
    e.conf = 0.87;
    e.geo = Vec2{10.5, 20.25};
    const MissionLogEntry back = parse_detection_record(detection_record(e));
    CHECK(back.t == e.t);
    CHECK(back.drone_pos.z == e.drone_pos.z);
    CHECK(back.box.w == e.box.w);
    CHECK(back.conf == e.conf);
    REQUIRE(back.geo.has_value());
    CHECK(back.geo->x == e.geo->x);

    e.geo.reset();
    CHECK_FALSE(parse_detection_record(detection_record(e)).geo.has_value());
}

TEST_CASE("schema documents every config path and the file formats") {
    const std::string schema = schema_text();
    for (const auto& path : config_paths(to_json(MasterConfig{}))) {
        INFO(path);
        CHECK(schema.find(path) != std::string::npos);
    }
    CHECK(schema.find(kTimeseriesColumns) != std::string::npos);
    CHECK(schema.find("QUADSAR_OUT") != std::string::npos);
    CHECK(schema.find("sweep.csv") != std::string::npos);
}
