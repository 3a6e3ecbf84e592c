#ifndef MOCAM_GUIDANCE_HPP
#define MOCAM_GUIDANCE_HPP

#include <optional>
#include <vector>

#include "mocam/kpath.hpp"
#include "mocam/trajectory.hpp"
#include "mocam/vec3.hpp"

namespace mocam {

/// Measurable state of a planar closed-loop engagement. Everything here is
/// available from relative geometry: no stored analytic ratio path is used.
struct GuidanceState {
    Vec3 rd, vd; // shadower
    Vec3 rt, vt; // shadowee
    double t = 0.0;
    double k = 0.0;
    double k_dot = 0.0;
    double theta_dot = 0.0; // line-of-sight rate (rad/s)
};

/// Acceleration commands resolved in the line-of-sight frame, one record per
/// integration step. The shadower's radial component is zero by construction;
/// a quasi-3D shadowee's is too.
struct AccelRecord {
    double t = 0.0;
    double shadower_a_r = 0.0;
    double shadower_a_theta = 0.0;
    double target_a_r = 0.0;
    double target_a_theta = 0.0;
};

/// Camouflage-preserving proportional-navigation command for the shadower:
/// perpendicular to the line of sight with signed magnitude
/// k a_T,theta + 2 k' rT theta_dot (rT inferred from the measured separation
/// as |rT - rD| / (1 - k)). a_t is the shadowee's current acceleration.
Vec3 mcpn_accel(const GuidanceState& state, const Vec3& a_t);

/// True-proportional-navigation command for the shadowee: perpendicular to
/// the line of sight with magnitude lambda r0_dot theta_dot.
Vec3 tpn_accel(const GuidanceState& state, double lambda, double r0_dot);

struct GuidanceConfig {
    enum class Integrator { semi_implicit_euler, rk4 };
    double dt = 1e-4;
    double tf = 0.0;
    Integrator integrator = Integrator::semi_implicit_euler;
};

struct SimResult {
    Trajectory trajectory;
    std::vector<AccelRecord> accel;
};

/// Closed-loop planar simulation: the shadower flies the camouflage-preserving
/// PN law against either a constant-velocity shadowee or one flying true
/// proportional navigation (engagement.target reactive, gain = *lambda).
/// Both agents are integrated jointly; the run terminates at the capture
/// epsilon (1e-6 of the initial separation) or at cfg.tf. Loss of camouflage
/// (relative collinearity deviation above 1e-3) aborts with an error naming
/// the first bad step.
SimResult simulate_mcpn(const Engagement& engagement, std::optional<double> lambda,
                        const GuidanceConfig& cfg);

} // namespace mocam

#endif
