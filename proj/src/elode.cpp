#include "mocam/elode.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "mocam/errors.hpp"
#include "mocam/geometry.hpp"

namespace mocam {

namespace {

struct OdeRhs {
    const Vec3& p;
    const TargetModel& target;
    double alpha0_sq;

    // k'' = -(2 k' (alpha' . alpha) + k (alpha'' . alpha)) / (alpha . alpha)
    double k_ddot(double t, double k, double k_dot) const {
        const TargetState ts = target.eval(t);
        const Vec3 alpha = p - ts.r;
        const double aa = alpha.squared_norm();
        if (aa < 1e-18 * alpha0_sq) {
            throw SingularityError("solve_el_ode: shadowee reached the static point", t);
        }
        const double da = (-ts.v).dot(alpha);
        const double dda = (-ts.a).dot(alpha);
        return -(2.0 * k_dot * da + k * dda) / aa;
    }
};

} // namespace

KPath solve_el_ode(const Vec3& p, const TargetModel& target,
                   double k0, double k0_dot, const OdeConfig& cfg) {
    if (!(cfg.dt > 0.0) || !(cfg.tf > cfg.t0)) {
        throw ValidationError("solve_el_ode: need dt > 0 and tf > t0");
    }
    if (target.is_reactive()) {
        throw ValidationError("solve_el_ode: reactive shadowees are integrated by the "
                              "guidance module");
    }
    const Vec3 alpha0 = p - target.eval(cfg.t0).r;
    const OdeRhs rhs{p, target, alpha0.squared_norm()};

    KPath::Sampled out;
    double k = k0, kd = k0_dot;
    double t = cfg.t0;
    out.times.push_back(t);
    out.k.push_back(k);
    out.k_dot.push_back(kd);
    out.k_ddot.push_back(rhs.k_ddot(t, k, kd));

    const auto steps = static_cast<std::size_t>(std::ceil((cfg.tf - cfg.t0) / cfg.dt - 1e-9));
    for (std::size_t i = 0; i < steps; ++i) {
        const double h = std::min(cfg.dt, cfg.tf - t);
        const double a1 = rhs.k_ddot(t, k, kd);
        const double k2 = k + 0.5 * h * kd, kd2 = kd + 0.5 * h * a1;
        const double a2 = rhs.k_ddot(t + 0.5 * h, k2, kd2);
        const double k3 = k + 0.5 * h * kd2, kd3 = kd + 0.5 * h * a2;
        const double a3 = rhs.k_ddot(t + 0.5 * h, k3, kd3);
        const double k4 = k + h * kd3, kd4 = kd + h * a3;
        const double a4 = rhs.k_ddot(t + h, k4, kd4);

        const double k_new = k + h / 6.0 * (kd + 2.0 * kd2 + 2.0 * kd3 + kd4);
        const double kd_new = kd + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        const double t_new = t + h;

        if (k_new >= 1.0) {
            // Capture event: append the interpolated crossing and stop.
            const double frac = (1.0 - k) / (k_new - k);
            const double tc = t + frac * h;
            const double kdc = kd + frac * (kd_new - kd);
            out.times.push_back(tc);
            out.k.push_back(1.0);
            out.k_dot.push_back(kdc);
            out.k_ddot.push_back(rhs.k_ddot(tc, 1.0, kdc));
            return KPath(std::move(out), cfg.t0, tc);
        }

        k = k_new;
        kd = kd_new;
        t = t_new;
        out.times.push_back(t);
        out.k.push_back(k);
        out.k_dot.push_back(kd);
        out.k_ddot.push_back(rhs.k_ddot(t, k, kd));
    }
    return KPath(std::move(out), cfg.t0, t);
}

ResidualReport orthogonality_residual(const Trajectory& traj) {
    const std::size_t n = traj.times.size();
    if (n < 3) throw ValidationError("orthogonality_residual: need at least 3 samples");
    const double h = traj.times[1] - traj.times[0];
    for (std::size_t i = 1; i < n; ++i) {
        if (std::abs(traj.times[i] - traj.times[i - 1] - h) > 1e-9 * std::max(1.0, h)) {
            throw ValidationError("orthogonality_residual: sampling must be uniform");
        }
    }

    double pos_scale = 0.0;
    for (const Vec3& r : traj.rd) {
        pos_scale = std::max(pos_scale, std::max({std::abs(r.x), std::abs(r.y), std::abs(r.z)}));
    }
    double accel_scale = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const Vec3 a = (traj.rd[i + 1] - 2.0 * traj.rd[i] + traj.rd[i - 1]) / (h * h);
        accel_scale = std::max(accel_scale, a.norm());
    }
    // Samples with (near-)zero acceleration are skipped: the cosine of a
    // vanishing vector is undefined, and the finite-difference direction there
    // is truncation/roundoff noise. The floor combines the roundoff level of
    // second differences with one percent of the path's acceleration scale;
    // below that the sample's radial content is negligible no matter its
    // direction.
    const double accel_floor = std::max(
        64.0 * std::numeric_limits<double>::epsilon() * std::max(pos_scale, 1.0) / (h * h),
        1e-2 * accel_scale);

    ResidualReport rep;
    rep.per_sample_cos.assign(n, 0.0);
    const Vec3 e_hat = traj.infinity_frame ? traj.infinity_direction.normalized() : Vec3{};
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const Vec3 a_fd = (traj.rd[i + 1] - 2.0 * traj.rd[i] + traj.rd[i - 1]) / (h * h);
        const double an = a_fd.norm();

        Vec3 los;
        double range = 0.0;
        if (traj.infinity_frame) {
            los = e_hat;
            range = (traj.rt[i] - traj.rd[i]).norm();
        } else {
            los = traj.static_point - traj.rd[i];
            range = (traj.static_point - traj.rt[i]).norm();
            const double ln = los.norm();
            if (ln < 1e-12 * std::max(range, 1.0)) continue; // shadower at the static point
            los = los / ln;
            const double dev = collinearity_deviation(traj.static_point, traj.rt[i], traj.rd[i]);
            rep.max_collinearity_dev = std::max(rep.max_collinearity_dev, dev / range);
        }
        if (an < accel_floor) continue;
        const double c = std::abs(a_fd.dot(los)) / an;
        rep.per_sample_cos[i] = c;
        rep.max_orthogonality_cos = std::max(rep.max_orthogonality_cos, c);
    }
    return rep;
}

} // namespace mocam
