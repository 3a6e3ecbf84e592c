#include "mocam/geometry.hpp"

#include <cmath>
#include <sstream>

#include "mocam/errors.hpp"

namespace mocam {

double collinearity_deviation(const Vec3& p, const Vec3& rt, const Vec3& rd) {
    const Vec3 axis = rt - p;
    const double len = axis.norm();
    if (len == 0.0) {
        throw DomainError("collinearity_deviation: target coincides with the static point, "
                          "constraint line undefined");
    }
    return (rd - p).cross(axis).norm() / len;
}

double camouflage_ratio(const Vec3& p, const Vec3& rt, const Vec3& rd, double tol) {
    const Vec3 axis = p - rt;
    const double len2 = axis.squared_norm();
    if (len2 == 0.0) {
        throw DomainError("camouflage_ratio: target coincides with the static point");
    }
    const double dev = collinearity_deviation(p, rt, rd);
    const double len = std::sqrt(len2);
    if (dev > tol * len) {
        std::ostringstream os;
        os << "camouflage_ratio: point off the constraint line (deviation " << dev
           << " cm exceeds " << tol * len << " cm)";
        throw DomainError(os.str());
    }
    // Signed projection; exact when the point is on the line.
    const double k = (p - rd).dot(axis) / len2;
    if (k > 1.0 + kRatioDomainSlack) {
        std::ostringstream os;
        os << "camouflage_ratio: k = " << k << " exceeds 1 (shadower beyond the target)";
        throw DomainError(os.str());
    }
    return k;
}

Vec3 angular_velocity(const Vec3& rd, const Vec3& vd) {
    const double r2 = rd.squared_norm();
    if (r2 == 0.0) {
        throw DomainError("angular_velocity: agent at the static point");
    }
    return rd.cross(vd) / r2;
}

SphericalState to_spherical(const Vec3& p, const Vec3& r, const Vec3& v) {
    const Vec3 rel = r - p;
    const double rad = rel.norm();
    if (rad == 0.0) {
        throw DomainError("to_spherical: point coincides with the origin");
    }
    SphericalState s;
    s.r = rad;
    s.phi = std::asin(rel.z / rad);
    const double rho2 = rel.x * rel.x + rel.y * rel.y;
    s.theta = (rho2 == 0.0) ? 0.0 : std::atan2(rel.y, rel.x);

    s.r_dot = rel.dot(v) / rad;
    if (rho2 > 0.0) {
        s.theta_dot = (rel.x * v.y - rel.y * v.x) / rho2;
    }
    // phi = asin(z / r)  =>  phi_dot = (z_dot r - z r_dot) / (r^2 cos(phi))
    const double cphi = std::cos(s.phi);
    if (cphi > 0.0) {
        s.phi_dot = (v.z * rad - rel.z * s.r_dot) / (rad * rad * cphi);
    }
    return s;
}

void from_spherical(const Vec3& p, const SphericalState& s, Vec3& r_out, Vec3& v_out) {
    const double ct = std::cos(s.theta), st = std::sin(s.theta);
    const double cp = std::cos(s.phi), sp = std::sin(s.phi);
    const Vec3 e_r{cp * ct, cp * st, sp};
    const Vec3 e_theta{-st, ct, 0.0};
    const Vec3 e_phi{-sp * ct, -sp * st, cp};
    r_out = p + s.r * e_r;
    v_out = s.r_dot * e_r + s.r * s.theta_dot * cp * e_theta + s.r * s.phi_dot * e_phi;
}

} // namespace mocam
