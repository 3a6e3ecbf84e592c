#include "mocam/energy.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "mocam/errors.hpp"
#include "mocam/geometry.hpp"

namespace mocam {

namespace {

void require_uniform(const std::vector<double>& times, const char* who) {
    if (times.size() < 2) throw ValidationError(std::string(who) + ": need at least 2 samples");
    const double h = times[1] - times[0];
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (std::abs(times[i] - times[i - 1] - h) > 1e-9 * std::max(1.0, std::abs(h))) {
            throw ValidationError(std::string(who) + ": sampling must be uniform");
        }
    }
}

// One interval of the corrected trapezoid rule for g = 1/2 |v|^2 with
// g' = v . a known at both ends: exact for cubic g and interval-local,
// so sums split exactly at any knot.
double energy_increment(double h, const Vec3& v0, const Vec3& a0,
                        const Vec3& v1, const Vec3& a1) {
    const double g0 = 0.5 * v0.squared_norm();
    const double g1 = 0.5 * v1.squared_norm();
    const double dg0 = v0.dot(a0);
    const double dg1 = v1.dot(a1);
    return 0.5 * h * (g0 + g1) + h * h / 12.0 * (dg0 - dg1);
}

} // namespace

void finalize_energy(Trajectory& traj) {
    const std::size_t n = traj.times.size();
    traj.cumulative_energy.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = traj.times[i + 1] - traj.times[i];
        traj.cumulative_energy[i + 1] =
            traj.cumulative_energy[i] +
            energy_increment(h, traj.vd[i], traj.ad[i], traj.vd[i + 1], traj.ad[i + 1]);
    }
}

double energy_of(const Trajectory& traj) {
    require_uniform(traj.times, "energy_of");
    double j = 0.0;
    for (std::size_t i = 0; i + 1 < traj.times.size(); ++i) {
        const double h = traj.times[i + 1] - traj.times[i];
        j += energy_increment(h, traj.vd[i], traj.ad[i], traj.vd[i + 1], traj.ad[i + 1]);
    }
    return j;
}

InferredEngagement infer_engagement(const Vec3& xt0, const Vec3& vt0,
                                    const Vec3& xd0, const Vec3& vd0) {
    const Vec3 d = xd0 - xt0;
    if (d.squared_norm() == 0.0) {
        throw DomainError("infer_engagement: agents coincide at t = 0");
    }
    // Least-squares solve of vd0 = k0 vt0 - beta d (planar systems are square).
    const double g00 = vt0.dot(vt0);
    const double g01 = -vt0.dot(d);
    const double g11 = d.dot(d);
    const double r0 = vt0.dot(vd0);
    const double r1 = -d.dot(vd0);
    const double det = g00 * g11 - g01 * g01; // = |vt0 x d|^2
    const double scale = std::max(g00 * g11, 1e-300);
    if (det <= 1e-20 * scale) {
        throw DomainError("infer_engagement: singular system, shadowee velocity parallel "
                          "to the initial separation");
    }
    const double k0 = (r0 * g11 - r1 * g01) / det;
    const double beta = (g00 * r1 - g01 * r0) / det;

    const Vec3 residual = k0 * vt0 - beta * d - vd0;
    const double res_scale = vd0.norm() + std::abs(k0) * vt0.norm() + std::abs(beta) * d.norm();
    if (residual.norm() > 1e-9 * std::max(res_scale, 1e-12)) {
        std::ostringstream os;
        os << "infer_engagement: initial velocity inconsistent with camouflage (residual "
           << residual.norm() << " cm/s)";
        throw DomainError(os.str());
    }
    if (k0 >= 1.0) {
        throw DomainError("infer_engagement: recovered k0 >= 1, shadower at or beyond the target");
    }
    InferredEngagement out;
    out.k0 = k0;
    out.k0_dot = beta * (1.0 - k0);
    out.p = xt0 + d / (1.0 - k0);
    return out;
}

Trajectory straight_line_baseline(const Vec3& p, const ConstantVelocity& target,
                                  const Vec3& d0, double t_int, const Vec3& x_int,
                                  double dt) {
    if (!(t_int > 0.0)) throw ValidationError("straight_line_baseline: t_int must be positive");
    const Vec3 seg = x_int - d0;
    const double seg_len = seg.norm();
    if (seg_len == 0.0) {
        throw ValidationError("straight_line_baseline: degenerate segment");
    }

    // Intersection parameter s(t) of the segment with the constraint line,
    // as a ratio of quadratics in t (least-squares closest point in 3D).
    const Vec3 alpha0 = target.r0 - p;
    const Vec3 g0 = (d0 - p).cross(alpha0);
    const Vec3 g1 = (d0 - p).cross(target.v);
    const Vec3 h0 = seg.cross(alpha0);
    const Vec3 h1 = seg.cross(target.v);

    // Degenerate collinear geometry: the segment lies on every constraint
    // line (shadowee receding radially), so the intersection no longer pins
    // the motion. Any profile along the segment stays camouflaged; use the
    // stationary one through the same endpoints.
    const bool degenerate =
        h0.squared_norm() <= 1e-20 * seg.squared_norm() * alpha0.squared_norm() &&
        h1.squared_norm() <= 1e-20 * seg.squared_norm() * target.v.squared_norm() &&
        g0.squared_norm() <= 1e-20 * (d0 - p).squared_norm() * alpha0.squared_norm();
    if (degenerate) {
        const double k_start = camouflage_ratio(p, target.r0, d0);
        const double k_end =
            camouflage_ratio(p, target.r0 + target.v * t_int, x_int);
        KPath profile = k_el_const_velocity(p, target, k_start, 0.0, t_int);
        const auto* fam = profile.as<KPath::ConstVelStationary>();
        const double full = (k_end - k_start);
        // Rescale so the path lands on x_int at t_int.
        double integral_tf = 0.0;
        {
            // invert through the family: k(tf) = k_start + scale * I(tf)
            KPath unit(KPath::ConstVelStationary{fam->p, fam->target, 0.0, 1.0}, 0.0, t_int);
            integral_tf = unit.k(t_int);
        }
        KPath pinned(KPath::ConstVelStationary{p, target, k_start,
                                               integral_tf != 0.0 ? full / integral_tf : 0.0},
                     0.0, t_int);
        Engagement eng{Engagement::Frame::static_point, p, Vec3{}, TargetModel(target),
                       k_start, pinned.k_dot(0.0), t_int, Engagement::Mode::open};
        return reconstruct_shadower(eng, pinned, uniform_times(0.0, t_int, dt));
    }
    const double p0 = -g0.dot(h0);
    const double p1 = -(g0.dot(h1) + g1.dot(h0));
    const double p2 = -g1.dot(h1);
    const double q0 = h0.dot(h0);
    const double q1 = 2.0 * h0.dot(h1);
    const double q2 = h1.dot(h1);
    const double q_scale = std::max({std::abs(q0), std::abs(q1) * t_int,
                                     std::abs(q2) * t_int * t_int, 1e-300});

    Trajectory traj;
    traj.static_point = p;
    traj.times = uniform_times(0.0, t_int, dt);
    const std::size_t n = traj.times.size();
    traj.rd.resize(n);
    traj.vd.resize(n);
    traj.ad.resize(n);
    traj.rt.resize(n);
    traj.vt.resize(n);
    traj.k.resize(n);
    traj.k_dot.resize(n);

    for (std::size_t i = 0; i < n; ++i) {
        const double t = traj.times[i];
        const double pp = (p2 * t + p1) * t + p0;
        const double qq = (q2 * t + q1) * t + q0;
        if (std::abs(qq) <= 1e-12 * q_scale) {
            throw SingularityError(
                "straight_line_baseline: constraint line parallel to the segment", t);
        }
        const double dp = 2.0 * p2 * t + p1;
        const double dq = 2.0 * q2 * t + q1;
        const double s = pp / qq;
        if (s < -0.1 || s > 1.1) {
            throw SingularityError(
                "straight_line_baseline: constraint line intersects outside the segment", t);
        }
        const double s_dot = (dp * qq - pp * dq) / (qq * qq);
        const double s_ddot = (2.0 * p2 * qq - pp * 2.0 * q2) / (qq * qq) -
                              2.0 * dq * (dp * qq - pp * dq) / (qq * qq * qq);

        traj.rd[i] = d0 + s * seg;
        traj.vd[i] = s_dot * seg;
        traj.ad[i] = s_ddot * seg;
        traj.rt[i] = target.r0 + target.v * t;
        traj.vt[i] = target.v;

        const Vec3 alpha = p - traj.rt[i];
        const double range = alpha.norm();
        const double dev = collinearity_deviation(p, traj.rt[i], traj.rd[i]);
        if (dev > 1e-8 * range) {
            throw SingularityError(
                "straight_line_baseline: constraint line misses the segment", t);
        }
        traj.max_constraint_residual = std::max(traj.max_constraint_residual, dev / range);

        // Ratio bookkeeping from the projection onto the constraint line.
        const double nk = (p - traj.rd[i]).dot(alpha);
        const double nk_dot = (-traj.vd[i]).dot(alpha) + (p - traj.rd[i]).dot(-target.v);
        const double q_t = alpha.squared_norm();
        const double q_t_dot = 2.0 * alpha.dot(-target.v);
        traj.k[i] = nk / q_t;
        traj.k_dot[i] = (nk_dot * q_t - nk * q_t_dot) / (q_t * q_t);
    }

    finalize_energy(traj);
    return traj;
}

std::vector<PerturbationResult> perturbation_test(const KPath& kpath,
                                                  const Engagement& engagement,
                                                  const std::vector<double>& amplitudes,
                                                  double dt) {
    const double t0 = kpath.t0();
    const double tf = std::min(kpath.tf(), engagement.tf > t0 ? engagement.tf : kpath.tf());
    const std::vector<double> times = uniform_times(t0, tf, dt);
    const double span = times.back() - times.front();
    const double omega = std::numbers::pi / span;

    const Trajectory base = reconstruct_shadower(engagement, kpath, times);
    const double j0 = energy_of(base);

    std::vector<PerturbationResult> out;
    out.reserve(amplitudes.size());
    for (double eps : amplitudes) {
        KPath::Sampled s;
        s.times = times;
        s.k.resize(times.size());
        s.k_dot.resize(times.size());
        s.k_ddot.resize(times.size());
        bool feasible = true;
        for (std::size_t i = 0; i < times.size(); ++i) {
            const double tau = times[i] - times.front();
            const KSample ks = kpath.sample(times[i]);
            s.k[i] = ks.k + eps * std::sin(omega * tau);
            s.k_dot[i] = ks.k_dot + eps * omega * std::cos(omega * tau);
            s.k_ddot[i] = ks.k_ddot - eps * omega * omega * std::sin(omega * tau);
            if (s.k[i] > 1.0 + kRatioDomainSlack) feasible = false;
        }
        if (!feasible) {
            out.push_back({eps, 0.0, false});
            continue;
        }
        const KPath perturbed(std::move(s), times.front(), times.back());
        const Trajectory traj = reconstruct_shadower(engagement, perturbed, times);
        out.push_back({eps, energy_of(traj) - j0, true});
    }
    return out;
}

EnergyReport compare_energy(const Trajectory& optimal, const Trajectory& baseline) {
    EnergyReport r;
    r.j_optimal = energy_of(optimal);
    r.j_baseline = energy_of(baseline);
    r.final_speed_optimal = optimal.vd.back().norm();
    r.final_speed_baseline = baseline.vd.back().norm();
    r.ratio = r.j_baseline / r.j_optimal;
    r.interception_time = optimal.times.back();
    r.interception_point = optimal.rd.back();
    return r;
}

std::string EnergyReport::to_key_value_text() const {
    std::ostringstream os;
    os.precision(12);
    os << "J_optimal " << j_optimal << "\n"
       << "J_baseline " << j_baseline << "\n"
       << "final_speed_optimal " << final_speed_optimal << "\n"
       << "final_speed_baseline " << final_speed_baseline << "\n"
       << "ratio " << ratio << "\n"
       << "interception_time " << interception_time << "\n"
       << "interception_point " << interception_point.x << " " << interception_point.y << " "
       << interception_point.z << "\n";
    return os.str();
}

} // namespace mocam
