#ifndef MOCAM_ELODE_HPP
#define MOCAM_ELODE_HPP

#include <vector>

#include "mocam/kpath.hpp"
#include "mocam/targets.hpp"
#include "mocam/trajectory.hpp"
#include "mocam/vec3.hpp"

namespace mocam {

/// Fixed-step integrator settings. The method is classical RK4; a fixed step
/// keeps runs deterministic and reproducible.
struct OdeConfig {
    double t0 = 0.0;
    double tf = 0.0;
    double dt = 1e-3;
};

/// Diagnostics for the orthogonality condition along a trajectory: the
/// shadower's acceleration must be orthogonal to the line of sight.
struct ResidualReport {
    double max_orthogonality_cos = 0.0;
    double max_collinearity_dev = 0.0; // relative to the instantaneous range
    std::vector<double> per_sample_cos;
};

/// Numerically integrate the governing ratio equation
///   k'' (alpha . alpha) + 2 k' (alpha' . alpha) + k (alpha'' . alpha) = 0,
/// alpha = p - rT(t), for any twice-differentiable shadowee model.
/// Returns a Sampled ratio path on the step grid. Integration stops early
/// with a capture sample appended when k reaches 1. Throws SingularityError
/// if the shadowee range to the static point collapses below 1e-9 of its
/// initial value.
KPath solve_el_ode(const Vec3& p, const TargetModel& target,
                   double k0, double k0_dot, const OdeConfig& cfg);

/// Measure the orthogonality condition on a sampled trajectory by second
/// finite differences of the shadower positions. Samples whose finite-
/// difference acceleration is below the roundoff floor are skipped; if all
/// are, the report is zero.
ResidualReport orthogonality_residual(const Trajectory& traj);

} // namespace mocam

#endif
