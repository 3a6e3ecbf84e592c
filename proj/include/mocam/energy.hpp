#ifndef MOCAM_ENERGY_HPP
#define MOCAM_ENERGY_HPP

#include <string>
#include <vector>

#include "mocam/kpath.hpp"
#include "mocam/targets.hpp"
#include "mocam/trajectory.hpp"
#include "mocam/vec3.hpp"

namespace mocam {

/// Unit-mass kinetic energy integral J = 1/2 int |vd|^2 dt over the sampled
/// trajectory. Interval-local corrected-trapezoid quadrature using the stored
/// accelerations; exact for piecewise-cubic integrands and exactly additive
/// across a split at any interior knot. Requires uniform sampling.
double energy_of(const Trajectory& traj);

/// Static point and ratio initial conditions recovered from Cartesian data.
struct InferredEngagement {
    Vec3 p;
    double k0;
    double k0_dot;
};

/// Invert the camouflage constraint and its time derivative against Cartesian
/// initial conditions: solves vd0 = k0 vt0 - beta (xd0 - xt0) for (k0, beta)
/// in least squares, with beta = k0_dot / (1 - k0); then
/// p = xt0 + (xd0 - xt0) / (1 - k0). Throws when the system is singular
/// (vt0 parallel to xd0 - xt0), inconsistent, or yields k0 >= 1.
InferredEngagement infer_engagement(const Vec3& xt0, const Vec3& vt0,
                                    const Vec3& xd0, const Vec3& vd0);

/// Shadower that flies the straight segment d0 -> x_int while staying
/// camouflaged: its position at time t is the intersection of the fixed
/// segment with the constraint line through p and rT(t). The speed profile
/// follows by differentiating that intersection; there is no free parameter.
Trajectory straight_line_baseline(const Vec3& p, const ConstantVelocity& target,
                                  const Vec3& d0, double t_int, const Vec3& x_int,
                                  double dt);

struct PerturbationResult {
    double amplitude;
    double delta_j;    // J(k + eps eta) - J(k); meaningless when !feasible
    bool feasible;     // false when the perturbed ratio exceeds 1 somewhere
};

/// Energy change under endpoint-vanishing bumps eta(t) = sin(pi (t-t0)/(tf-t0))
/// added to the ratio path. A stationary path shows delta_j > 0 for every
/// feasible amplitude and a vanishing first derivative at zero amplitude.
std::vector<PerturbationResult> perturbation_test(const KPath& kpath,
                                                  const Engagement& engagement,
                                                  const std::vector<double>& amplitudes,
                                                  double dt = 1e-3);

/// Side-by-side energy comparison of an optimal and a baseline trajectory
/// ending at the same interception point.
struct EnergyReport {
    double j_optimal = 0.0;
    double j_baseline = 0.0;
    double final_speed_optimal = 0.0;
    double final_speed_baseline = 0.0;
    double ratio = 0.0; // j_baseline / j_optimal
    double interception_time = 0.0;
    Vec3 interception_point;

    std::string to_key_value_text() const;
};

EnergyReport compare_energy(const Trajectory& optimal, const Trajectory& baseline);

} // namespace mocam

#endif
