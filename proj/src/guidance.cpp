#include "mocam/guidance.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "mocam/errors.hpp"
#include "mocam/geometry.hpp"

namespace mocam {

namespace {

Vec3 rot90(const Vec3& v) { return {-v.y, v.x, 0.0}; }
double cross_z(const Vec3& a, const Vec3& b) { return a.x * b.y - a.y * b.x; }

struct RawState {
    Vec3 rd, vd, rt, vt;
};

// Everything the guidance laws need, measured from instantaneous geometry.
GuidanceState measure(const RawState& s, const Vec3& p, double t) {
    GuidanceState g;
    g.rd = s.rd;
    g.vd = s.vd;
    g.rt = s.rt;
    g.vt = s.vt;
    g.t = t;

    const Vec3 rho = s.rt - p; // static point -> shadowee
    const double r_t = rho.norm();
    const Vec3 e_r = rho / r_t;
    const double r_d = (s.rd - p).dot(e_r);
    g.k = r_d / r_t;
    const double rd_rate = s.vd.dot(e_r);
    const double rt_rate = s.vt.dot(e_r);
    g.k_dot = (rd_rate * r_t - r_d * rt_rate) / (r_t * r_t);

    const Vec3 rel = s.rt - s.rd;
    const double rel2 = rel.squared_norm();
    g.theta_dot = rel2 > 0.0 ? cross_z(rel, s.vt - s.vd) / rel2 : 0.0;
    return g;
}

} // namespace

Vec3 mcpn_accel(const GuidanceState& state, const Vec3& a_t) {
    const Vec3 rel = state.rt - state.rd;
    const double r = rel.norm();
    const Vec3 e_r = rel / r;
    const Vec3 e_theta = rot90(e_r);
    // rT recovered from the separation: |rT - rD| = (1 - k) rT.
    const double r_t = r / (1.0 - state.k);
    const double mag = state.k * a_t.dot(e_theta) + 2.0 * state.k_dot * r_t * state.theta_dot;
    return mag * e_theta;
}

Vec3 tpn_accel(const GuidanceState& state, double lambda, double r0_dot) {
    const Vec3 rel = state.rt - state.rd;
    const Vec3 e_theta = rot90(rel.normalized());
    return (lambda * r0_dot * state.theta_dot) * e_theta;
}

SimResult simulate_mcpn(const Engagement& engagement, std::optional<double> lambda,
                        const GuidanceConfig& cfg) {
    if (engagement.frame != Engagement::Frame::static_point) {
        throw ValidationError("simulate_mcpn: guidance loop needs a static-point engagement");
    }
    if (!(cfg.dt > 0.0) || !(cfg.tf > 0.0)) {
        throw ValidationError("simulate_mcpn: need dt > 0 and tf > 0");
    }

    const bool tpn_target = engagement.target.is_reactive();
    if (tpn_target && engagement.target.reactive()->law != "tpn") {
        throw ValidationError("simulate_mcpn: unsupported reactive law '" +
                              engagement.target.reactive()->law + "'");
    }
    if (tpn_target && !lambda) {
        throw ValidationError("simulate_mcpn: reactive shadowee needs a navigation gain");
    }

    Vec3 rt0, vt0;
    if (tpn_target) {
        rt0 = engagement.target.reactive()->r0;
        vt0 = engagement.target.reactive()->v0;
    } else if (const auto* cv = engagement.target.constant_velocity()) {
        rt0 = cv->r0;
        vt0 = cv->v;
    } else {
        throw ValidationError("simulate_mcpn: shadowee must be constant-velocity or reactive");
    }
    const Vec3 p = engagement.p;
    for (const Vec3& v : {p, rt0, vt0}) {
        if (v.z != 0.0) throw ValidationError("simulate_mcpn: engagement must be planar (z = 0)");
    }

    RawState s;
    s.rt = rt0;
    s.vt = vt0;
    s.rd = p + engagement.k0 * (rt0 - p);
    s.vd = engagement.k0 * vt0 - engagement.k0_dot * (p - rt0);

    const double initial_sep = (s.rt - s.rd).norm();
    const double capture_eps = 1e-6 * initial_sep;
    const double r0_dot = (s.rt - s.rd).dot(s.vt - s.vd) / initial_sep;

    SimResult out;
    Trajectory& traj = out.trajectory;
    traj.static_point = p;

    const auto commands = [&](const RawState& raw, double t, Vec3& a_d, Vec3& a_t) {
        const GuidanceState g = measure(raw, p, t);
        a_t = tpn_target ? tpn_accel(g, *lambda, r0_dot) : Vec3{};
        a_d = mcpn_accel(g, a_t);
    };

    const auto steps = static_cast<std::size_t>(std::ceil(cfg.tf / cfg.dt - 1e-9));
    double t = 0.0;
    for (std::size_t i = 0; i <= steps; ++i) {
        const GuidanceState g = measure(s, p, t);
        const Vec3 a_t = tpn_target ? tpn_accel(g, *lambda, r0_dot) : Vec3{};
        const Vec3 a_d = mcpn_accel(g, a_t);
        if (!std::isfinite(a_d.x) || !std::isfinite(a_d.y)) {
            throw SingularityError("simulate_mcpn: command overflow before the capture epsilon", t);
        }

        const Vec3 rho = s.rt - p;
        const double range = rho.norm();
        const double dev = collinearity_deviation(p, s.rt, s.rd);
        if (dev > 1e-3 * range) {
            std::ostringstream os;
            os << "simulate_mcpn: camouflage lost at t = " << t << " s (deviation " << dev
               << " cm against range " << range << " cm)";
            throw Error(os.str());
        }

        traj.times.push_back(t);
        traj.rd.push_back(s.rd);
        traj.vd.push_back(s.vd);
        traj.ad.push_back(a_d);
        traj.rt.push_back(s.rt);
        traj.vt.push_back(s.vt);
        traj.k.push_back(g.k);
        traj.k_dot.push_back(g.k_dot);
        traj.max_constraint_residual = std::max(traj.max_constraint_residual, dev / range);

        // Commands are resolved in the frame they are issued in: the measured
        // relative line of sight. Near coincidence fall back to the
        // static-point bearing (same direction under camouflage).
        const Vec3 rel_axis = s.rt - s.rd;
        const Vec3 e_r = rel_axis.squared_norm() > 1e-18 * rho.squared_norm()
                             ? rel_axis.normalized()
                             : rho / range;
        const Vec3 e_theta = rot90(e_r);
        out.accel.push_back({t, a_d.dot(e_r), a_d.dot(e_theta), a_t.dot(e_r), a_t.dot(e_theta)});

        // Capture: inside the epsilon ball, or the ratio will cross 1 within
        // the next step.
        const double sep = (s.rt - s.rd).norm();
        if (sep <= capture_eps || (g.k_dot > 0.0 && g.k + g.k_dot * cfg.dt >= 1.0)) {
            traj.captured = true;
            traj.capture_time = (sep <= capture_eps)
                                    ? t
                                    : t + std::min((1.0 - g.k) / g.k_dot, cfg.dt);
            break;
        }
        if (i == steps) break;

        if (cfg.integrator == GuidanceConfig::Integrator::semi_implicit_euler) {
            s.vt += a_t * cfg.dt;
            s.rt += s.vt * cfg.dt;
            s.vd += a_d * cfg.dt;
            s.rd += s.vd * cfg.dt;
        } else {
            // RK4 on the joint state, commands recomputed at each stage.
            const auto deriv = [&](const RawState& y, double tt, RawState& dy) {
                Vec3 ad, at;
                commands(y, tt, ad, at);
                dy.rd = y.vd;
                dy.vd = ad;
                dy.rt = y.vt;
                dy.vt = at;
            };
            RawState d1, d2, d3, d4, tmp;
            deriv(s, t, d1);
            tmp = {s.rd + 0.5 * cfg.dt * d1.rd, s.vd + 0.5 * cfg.dt * d1.vd,
                   s.rt + 0.5 * cfg.dt * d1.rt, s.vt + 0.5 * cfg.dt * d1.vt};
            deriv(tmp, t + 0.5 * cfg.dt, d2);
            tmp = {s.rd + 0.5 * cfg.dt * d2.rd, s.vd + 0.5 * cfg.dt * d2.vd,
                   s.rt + 0.5 * cfg.dt * d2.rt, s.vt + 0.5 * cfg.dt * d2.vt};
            deriv(tmp, t + 0.5 * cfg.dt, d3);
            tmp = {s.rd + cfg.dt * d3.rd, s.vd + cfg.dt * d3.vd,
                   s.rt + cfg.dt * d3.rt, s.vt + cfg.dt * d3.vt};
            deriv(tmp, t + cfg.dt, d4);
            s.rd += cfg.dt / 6.0 * (d1.rd + 2.0 * d2.rd + 2.0 * d3.rd + d4.rd);
            s.vd += cfg.dt / 6.0 * (d1.vd + 2.0 * d2.vd + 2.0 * d3.vd + d4.vd);
            s.rt += cfg.dt / 6.0 * (d1.rt + 2.0 * d2.rt + 2.0 * d3.rt + d4.rt);
            s.vt += cfg.dt / 6.0 * (d1.vt + 2.0 * d2.vt + 2.0 * d3.vt + d4.vt);
        }
        t += cfg.dt;
    }

    finalize_energy(traj);
    return out;
}

} // namespace mocam
