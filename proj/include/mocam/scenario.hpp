#ifndef MOCAM_SCENARIO_HPP
#define MOCAM_SCENARIO_HPP

#include <optional>
#include <string>
#include <vector>

#include "mocam/targets.hpp"
#include "mocam/vec3.hpp"

namespace mocam {

/// Declarative engagement description loaded from a JSON document.
struct ScenarioConfig {
    enum class Mode { analytic, ode, guidance, energy_compare, infinity };
    enum class Boundary { open, capture };
    enum class InfinityMode { open, capture, track };
    enum class TargetKind { constant_velocity, tpn, sampled_file };

    std::string name;
    Mode mode = Mode::analytic;

    std::optional<Vec3> static_point;

    TargetKind target_kind = TargetKind::constant_velocity;
    Vec3 target_r0, target_v;
    std::string target_file;

    std::optional<double> k0, k0_dot;
    struct Cartesian {
        Vec3 xt0, vt0, xd0, vd0;
    };
    std::optional<Cartesian> cartesian;

    Boundary boundary = Boundary::open;
    InfinityMode infinity_mode = InfinityMode::capture;
    std::optional<Vec3> shadower0; // infinity mode: rD(0)

    std::optional<double> lambda;
    double tf = 0.0;
    double dt = 1e-3;
    std::optional<double> ccl_interval;
    int output_stride = 1;

    struct Outputs {
        std::string trajectory, accel, ccl, summary, baseline;
    } outputs;
};

/// Parse a scenario file. Throws ValidationError listing every violated field.
ScenarioConfig load_scenario_config(const std::string& path);

/// Parse from an in-memory JSON document (used by tests and the batch runner).
ScenarioConfig parse_scenario_config(const std::string& json_text);

/// Validate a parsed config; returns the list of violations (empty when valid).
std::vector<std::string> validate_config(const ScenarioConfig& config);

/// Execute a scenario, writing its data files under out_dir. Returns the JSON
/// summary text that was also written to the summary file.
std::string run_scenario(const ScenarioConfig& config, const std::string& out_dir,
                         std::optional<double> dt_override = std::nullopt);

/// Write constraint-line segments (one row per time: t, static point, shadowee
/// position) for plot overlays. Only meaningful for static-point engagements.
void export_ccls(const Vec3& p, const TargetModel& target,
                 const std::vector<double>& times, const std::string& path);

} // namespace mocam

#endif
