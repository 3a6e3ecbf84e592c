#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "mocam/errors.hpp"
#include "mocam/kpath.hpp"
#include "mocam/scenario.hpp"

using namespace mocam;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t data_rows(const std::string& csv) {
    std::size_t rows = 0;
    bool first = true;
    std::istringstream ss(csv);
    std::string line;
    while (std::getline(ss, line)) {
        if (first) {
            first = false;
            continue;
        }
        if (!line.empty()) ++rows;
    }
    return rows;
}

const char* kFig4Json = R"({
  "name": "fig4",
  "mode": "analytic",
  "static_point": [200, -650, 500],
  "target": {"type": "constant_velocity", "r0": [30, 60, 150], "v": [200, -20, 60]},
  "k0": 0.1,
  "boundary": "capture",
  "tf": 12.0,
  "dt": 0.001,
  "ccl_interval": 0.4
})";

} // namespace

TEST_CASE("config validation lists the violated fields") {
    SUBCASE("missing horizon") {
        try {
            (void)parse_scenario_config(R"({"name":"x","mode":"analytic",
                "static_point":[0,0],"k0":0.1,"k0_dot":0.1,
                "target":{"type":"constant_velocity","r0":[1,1],"v":[1,0]}})");
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("tf") != std::string::npos);
        }
    }
    SUBCASE("unknown mode") {
        CHECK_THROWS_AS((void)parse_scenario_config(
                            R"({"name":"x","mode":"warp","tf":1,
                                "target":{"type":"constant_velocity","r0":[1,1],"v":[1,0]}})"),
                        ValidationError);
    }
    SUBCASE("both initial-condition styles at once") {
        try {
            (void)parse_scenario_config(R"({"name":"x","mode":"analytic","tf":1,
                "static_point":[0,0],"k0":0.1,"k0_dot":0.1,
                "cartesian":{"xt0":[30,60],"vt0":[650,-20],"xd0":[300,-650],"vd0":[9,11]},
                "target":{"type":"constant_velocity","r0":[30,60],"v":[650,-20]}})");
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("exactly one") != std::string::npos);
        }
    }
    SUBCASE("interval below the step") {
        CHECK_THROWS_AS((void)parse_scenario_config(
                            R"({"name":"x","mode":"analytic","tf":1,"dt":0.01,
                                "ccl_interval":0.001,"static_point":[0,0],
                                "k0":0.1,"k0_dot":0.1,
                                "target":{"type":"constant_velocity","r0":[1,1],"v":[1,0]}})"),
                        ValidationError);
    }
    SUBCASE("not JSON at all") {
        CHECK_THROWS_AS((void)parse_scenario_config("well this is not json"),
                        ValidationError);
    }
}

TEST_CASE("capture scenario writes the expected artifacts") {
    const fs::path dir = fs::temp_directory_path() / "mocam_scenario_fig4";
    fs::remove_all(dir);
    const ScenarioConfig cfg = parse_scenario_config(kFig4Json);
    const std::string summary_text = run_scenario(cfg, dir.string());

    const auto summary = nlohmann::json::parse(summary_text);
    CHECK(summary.at("scenario") == "fig4");
    CHECK(summary.at("mode") == "analytic");
    CHECK(std::abs(summary.at("capture_time").get<double>() - 12.0) <= 1e-3);
    CHECK(summary.at("max_collinearity_dev").get<double>() <= 1e-8);

    const std::string csv = slurp(dir / "fig4_trajectory.csv");
    CHECK(csv.rfind("t,dx,dy,dz,tx,ty,tz,k,k_dot,vdx,vdy,vdz,a_r,a_theta,J_cum\n", 0) == 0);
    CHECK(data_rows(csv) == 12001);

    // one constraint line every 0.4 s across 12 s, endpoints included
    const std::string ccls = slurp(dir / "fig4_ccls.csv");
    CHECK(data_rows(ccls) == 31);

    fs::remove_all(dir);
}

TEST_CASE("scenario outputs are byte-identical across runs") {
    const fs::path d1 = fs::temp_directory_path() / "mocam_det_1";
    const fs::path d2 = fs::temp_directory_path() / "mocam_det_2";
    fs::remove_all(d1);
    fs::remove_all(d2);
    const ScenarioConfig cfg = parse_scenario_config(kFig4Json);
    (void)run_scenario(cfg, d1.string());
    (void)run_scenario(cfg, d2.string());
    for (const char* leaf : {"fig4_trajectory.csv", "fig4_ccls.csv", "fig4_summary.json"}) {
        CHECK(slurp(d1 / leaf) == slurp(d2 / leaf));
    }
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("constraint-line export") {
    const fs::path dir = fs::temp_directory_path() / "mocam_ccls";
    fs::create_directories(dir);
    const TargetModel target(ConstantVelocity{{30, 60, 150}, {200, -20, 60}});

    SUBCASE("single time gives a single segment") {
        const auto path = (dir / "one.csv").string();
        export_ccls({200, -650, 500}, target, {0.0}, path);
        const std::string text = slurp(path);
        CHECK(data_rows(text) == 1);
        CHECK(text.find("30,60,150") != std::string::npos);
    }
    SUBCASE("reactive shadowees cannot be exported") {
        CHECK_THROWS_AS(export_ccls({0, 0, 0}, TargetModel(ReactiveTarget{"tpn", {}, {}}),
                                    {0.0}, (dir / "bad.csv").string()),
                        DomainError);
    }
    fs::remove_all(dir);
}

TEST_CASE("infinity scenarios refuse constraint-line exports with a hint") {
    const char* json = R"({
      "name": "inf",
      "mode": "infinity",
      "infinity_mode": "track",
      "target": {"type": "constant_velocity", "r0": [30, 60, 150], "v": [200, -20, 60]},
      "shadower0": [0, 0, 0],
      "tf": 2.0,
      "dt": 0.01,
      "ccl_interval": 0.5
    })";
    const fs::path dir = fs::temp_directory_path() / "mocam_infc";
    fs::remove_all(dir);
    const ScenarioConfig cfg = parse_scenario_config(json);
    try {
        (void)run_scenario(cfg, dir.string());
        FAIL("expected DomainError");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("offset direction") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("infinity tracking scenario reports the constant offset") {
    const char* json = R"({
      "name": "track",
      "mode": "infinity",
      "infinity_mode": "track",
      "target": {"type": "constant_velocity", "r0": [30, 60, 150], "v": [200, -20, 60]},
      "shadower0": [0, 0, 0],
      "tf": 2.0,
      "dt": 0.01
    })";
    const fs::path dir = fs::temp_directory_path() / "mocam_track";
    fs::remove_all(dir);
    const std::string summary_text = run_scenario(parse_scenario_config(json), dir.string());
    const auto summary = nlohmann::json::parse(summary_text);
    CHECK(summary.at("max_collinearity_dev").get<double>() <= 1e-10);
    fs::remove_all(dir);
}

TEST_CASE("energy-compare scenario carries the ratio key") {
    const char* json = R"({
      "name": "cmp",
      "mode": "energy-compare",
      "target": {"type": "constant_velocity", "r0": [30, 60], "v": [650, -20]},
      "cartesian": {"xt0": [30, 60], "vt0": [650, -20], "xd0": [300, -650], "vd0": [9, 11]},
      "tf": 2.0,
      "dt": 0.001
    })";
    const fs::path dir = fs::temp_directory_path() / "mocam_cmp";
    fs::remove_all(dir);
    const std::string summary_text = run_scenario(parse_scenario_config(json), dir.string());
    const auto summary = nlohmann::json::parse(summary_text);
    CHECK(summary.contains("ratio"));
    CHECK(summary.at("ratio").get<double>() >= 1.0); // stationary path is the minimizer
    CHECK(fs::exists(dir / "cmp_baseline.csv"));
    fs::remove_all(dir);
}

TEST_CASE("trajectory numbers serialize with 12 significant digits") {
    const fs::path dir = fs::temp_directory_path() / "mocam_digits";
    fs::remove_all(dir);
    const ScenarioConfig cfg = parse_scenario_config(kFig4Json);
    (void)run_scenario(cfg, dir.string());
    const std::string csv = slurp(dir / "fig4_trajectory.csv");
    // second data row, first column is the step time 0.001
    std::istringstream ss(csv);
    std::string line;
    std::getline(ss, line);
    std::getline(ss, line);
    std::getline(ss, line);
    CHECK(line.rfind("0.001,", 0) == 0);
    // k column must carry full precision (12 digits -> period plus 11+)
    const auto k_pos = [&] {
        std::size_t comma = 0, idx = 0;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == ',') {
                ++comma;
                if (comma == 7) { idx = i + 1; break; }
            }
        }
        return idx;
    }();
    const std::string k_field = line.substr(k_pos, line.find(',', k_pos) - k_pos);
    CHECK(k_field.size() >= 12);
    fs::remove_all(dir);
}
