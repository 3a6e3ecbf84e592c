#ifndef MOCAM_GEOMETRY_HPP
#define MOCAM_GEOMETRY_HPP

#include "mocam/vec3.hpp"

namespace mocam {

/// Relative collinearity tolerance: a point is accepted as lying on a
/// constraint line when its perpendicular distance is below this fraction
/// of the line's defining segment length.
inline constexpr double kCollinearityTol = 1e-6;

/// Slack applied to the k <= 1 domain check so that exact-capture paths
/// (k hitting 1 up to roundoff) evaluate cleanly.
inline constexpr double kRatioDomainSlack = 1e-9;

/// Spherical coordinates and rates about an engagement's static point.
/// theta is measured in the x-y plane from +x, phi is elevation from that
/// plane, so theta in (-pi, pi], phi in (-pi/2, pi/2].
struct SphericalState {
    double r = 0.0;
    double theta = 0.0;
    double phi = 0.0;
    double r_dot = 0.0;
    double theta_dot = 0.0;
    double phi_dot = 0.0;
};

/// Perpendicular distance (cm) from rd to the infinite line through p and rt.
/// Zero exactly when the camouflage constraint holds at this instant.
/// Throws DomainError if p == rt (constraint line undefined).
double collinearity_deviation(const Vec3& p, const Vec3& rt, const Vec3& rd);

/// Camouflage ratio k with p - rd = k (p - rt). Requires rd on the line
/// through p and rt (within tol * |p - rt|) and k <= 1.
double camouflage_ratio(const Vec3& p, const Vec3& rt, const Vec3& rd,
                        double tol = kCollinearityTol);

/// Angular velocity Omega = (rd x vd) / |rd|^2 of an agent whose position rd
/// is expressed relative to the static point. Purely radial motion gives 0.
Vec3 angular_velocity(const Vec3& rd, const Vec3& vd);

/// Spherical coordinates and rates of the point r (velocity v) about origin p.
SphericalState to_spherical(const Vec3& p, const Vec3& r, const Vec3& v);

/// Inverse of to_spherical: Cartesian position and velocity about origin p.
void from_spherical(const Vec3& p, const SphericalState& s, Vec3& r_out, Vec3& v_out);

} // namespace mocam

#endif
