#ifndef MOCAM_TRAJECTORY_HPP
#define MOCAM_TRAJECTORY_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "mocam/vec3.hpp"

namespace mocam {

/// Time-sampled record of a camouflaged engagement: shadower and shadowee
/// states, the camouflage ratio and its rate, and the running energy integral
/// J(t) = 1/2 int |vd|^2 dt for a unit-mass shadower (cm^2/s^2).
///
/// Samples are uniformly spaced in time. cumulative_energy is accumulated
/// with an interval-local corrected-trapezoid rule (uses the stored
/// accelerations), so energies are exactly additive across any split knot.
struct Trajectory {
    std::vector<double> times;
    std::vector<Vec3> rd, vd, ad; // shadower
    std::vector<Vec3> rt, vt;     // shadowee
    std::vector<double> k, k_dot;
    std::vector<double> cumulative_energy;

    bool infinity_frame = false;
    Vec3 static_point;        // valid when !infinity_frame
    Vec3 infinity_direction;  // valid when infinity_frame

    /// Largest collinearity deviation relative to the instantaneous range
    /// (static-point frame), or largest angular drift of the offset direction
    /// in radians (infinity frame).
    double max_constraint_residual = 0.0;

    bool captured = false;
    std::optional<double> capture_time;

    std::size_t size() const { return times.size(); }
    double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
    double total_energy() const {
        return cumulative_energy.empty() ? 0.0 : cumulative_energy.back();
    }
};

/// Fill traj.cumulative_energy from the stored velocities and accelerations.
void finalize_energy(Trajectory& traj);

} // namespace mocam

#endif
