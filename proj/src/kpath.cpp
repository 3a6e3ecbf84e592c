#include "mocam/kpath.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mocam/errors.hpp"

namespace mocam {

namespace {

// ---------------------------------------------------------------------------
// Range polynomial q(t) = |p - rT(t)|^2 = A t^2 + B t + C for a
// constant-velocity shadowee.
struct RangeSquared {
    double a, b, c;

    double eval(double t) const { return (a * t + b) * t + c; }
    double deriv(double t) const { return 2.0 * a * t + b; }

    static RangeSquared from(const Vec3& p, const ConstantVelocity& target) {
        const Vec3 alpha0 = p - target.r0;
        return {target.v.squared_norm(), -2.0 * alpha0.dot(target.v), alpha0.squared_norm()};
    }

    // Discriminant 4ac - b^2 = 4 |alpha0 x v|^2; zero iff the shadowee's
    // line passes through the static point.
    double disc() const { return 4.0 * a * c - b * b; }

    double min_over(double t0, double tf) const {
        double m = std::min(eval(t0), eval(tf));
        if (a > 0.0) {
            const double tstar = -b / (2.0 * a);
            if (tstar > t0 && tstar < tf) m = std::min(m, eval(tstar));
        }
        return m;
    }
};

void require_nondegenerate_range(const RangeSquared& q, double tf, const char* who) {
    const double floor2 = 1e-18 * q.c; // (1e-9 x initial range)^2
    if (q.min_over(0.0, tf) <= floor2) {
        double tbad = 0.0;
        if (q.a > 0.0) tbad = std::clamp(-q.b / (2.0 * q.a), 0.0, tf);
        throw SingularityError(std::string(who) +
                               ": shadowee passes through the static point, constraint line degenerates",
                               tbad);
    }
}

// int_0^t ds / q(s) for q as above, q > 0 on the interval.
double range_integral(const RangeSquared& q, double t) {
    if (q.a == 0.0) return t / q.c; // stationary shadowee
    const double disc = q.disc();
    const double scale = 4.0 * q.a * q.c;
    if (disc > 1e-14 * scale) {
        const double rt = std::sqrt(disc);
        return 2.0 / rt * (std::atan((2.0 * q.a * t + q.b) / rt) - std::atan(q.b / rt));
    }
    // Degenerate: q = a (t - t*)^2 with t* outside the domain.
    const double tstar = -q.b / (2.0 * q.a);
    return (1.0 / q.a) * (1.0 / (tstar - t) - 1.0 / tstar);
}

// Smallest t in [0, tf] with range_integral(q, t) == target, if any.
std::optional<double> invert_range_integral(const RangeSquared& q, double target, double tf) {
    if (target <= 0.0) return 0.0;
    if (q.a == 0.0) {
        const double t = target * q.c;
        return t <= tf ? std::optional<double>(t) : std::nullopt;
    }
    const double disc = q.disc();
    const double scale = 4.0 * q.a * q.c;
    if (disc > 1e-14 * scale) {
        const double rt = std::sqrt(disc);
        const double phi = std::atan(q.b / rt) + 0.5 * target * rt;
        if (phi >= std::numbers::pi / 2.0) return std::nullopt;
        const double t = (rt * std::tan(phi) - q.b) / (2.0 * q.a);
        if (t >= -1e-12 && t <= tf * (1.0 + 1e-12)) return std::max(t, 0.0);
        return std::nullopt;
    }
    const double tstar = -q.b / (2.0 * q.a);
    const double denom = q.a * target + 1.0 / tstar;
    if (denom == 0.0) return std::nullopt;
    const double t = tstar - 1.0 / denom;
    if (t >= -1e-12 && t <= tf * (1.0 + 1e-12)) return std::max(t, 0.0);
    return std::nullopt;
}

struct Hermite {
    double y, dy, d2y;
};

// Cubic Hermite on [t0, t1] from endpoint values and slopes.
Hermite hermite_eval(double t, double t0, double t1, double y0, double y1,
                     double s0, double s1) {
    const double h = t1 - t0;
    const double u = (t - t0) / h;
    const double u2 = u * u, u3 = u2 * u;
    Hermite out;
    out.y = (2.0 * u3 - 3.0 * u2 + 1.0) * y0 + (u3 - 2.0 * u2 + u) * h * s0 +
            (-2.0 * u3 + 3.0 * u2) * y1 + (u3 - u2) * h * s1;
    out.dy = (6.0 * u2 - 6.0 * u) / h * y0 + (3.0 * u2 - 4.0 * u + 1.0) * s0 +
             (6.0 * u - 6.0 * u2) / h * y1 + (3.0 * u2 - 2.0 * u) * s1;
    out.d2y = (12.0 * u - 6.0) / (h * h) * y0 + (6.0 * u - 4.0) / h * s0 +
              (6.0 - 12.0 * u) / (h * h) * y1 + (6.0 * u - 2.0) / h * s1;
    return out;
}

std::size_t locate(const std::vector<double>& grid, double t) {
    auto it = std::upper_bound(grid.begin(), grid.end(), t);
    std::size_t i = (it == grid.begin()) ? 0 : static_cast<std::size_t>(it - grid.begin()) - 1;
    if (i + 1 >= grid.size()) i = grid.size() - 2;
    return i;
}

double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                            double fa, double fm, double fb, double whole, double tol,
                            int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 28);
}

// Capture search on a tabulated family: first crossing of k = 1 from below.
std::optional<double> table_capture(const std::vector<double>& times,
                                    const std::vector<double>& k,
                                    const std::vector<double>& k_dot) {
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
        if (k[i] < 1.0 && k[i + 1] >= 1.0) {
            double lo = times[i], hi = times[i + 1];
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                const Hermite hh = hermite_eval(mid, times[i], times[i + 1], k[i], k[i + 1],
                                                k_dot[i], k_dot[i + 1]);
                (hh.y < 1.0 ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
        if (k[i] >= 1.0) return times[i];
    }
    if (!k.empty() && k.back() >= 1.0 - 1e-12) return times.back();
    return std::nullopt;
}

} // namespace

// ---------------------------------------------------------------------------

KPath::KPath(Variant v, double t0, double tf) : v_(std::move(v)), t0_(t0), tf_(tf) {
    if (!(tf_ > t0_)) throw ValidationError("KPath: empty domain");
}

KSample KPath::sample(double t) const {
    const double slack = 1e-9 * std::max(1.0, std::abs(tf_));
    if (t < t0_ - slack || t > tf_ + slack) {
        std::ostringstream os;
        os << "KPath: t = " << t << " outside domain [" << t0_ << ", " << tf_ << "]";
        throw DomainError(os.str());
    }
    KSample s = sample_unchecked(std::clamp(t, t0_, tf_));
    if (s.k > 1.0 + kRatioDomainSlack) {
        std::ostringstream os;
        os << "KPath: k(" << t << ") = " << s.k << " exceeds 1, camouflage domain violated";
        throw DomainError(os.str());
    }
    return s;
}

KSample KPath::sample_unchecked(double t) const {
    if (const auto* f = std::get_if<ConstVelLinear>(&v_)) {
        const RangeSquared q = RangeSquared::from(f->p, f->target);
        const double qv = q.eval(t), qd = q.deriv(t), qdd = 2.0 * q.a;
        const double n = std::sqrt(qv);
        const double u = f->c1 * t + f->c2;
        KSample s;
        s.k = u / n;
        s.k_dot = f->c1 / n - 0.5 * u * qd / (qv * n);
        s.k_ddot = -f->c1 * qd / (qv * n) - 0.5 * u * qdd / (qv * n) +
                   0.75 * u * qd * qd / (qv * qv * n);
        return s;
    }
    if (const auto* f = std::get_if<ConstVelStationary>(&v_)) {
        const RangeSquared q = RangeSquared::from(f->p, f->target);
        const double qv = q.eval(t);
        KSample s;
        s.k = f->k0 + f->scale * range_integral(q, t);
        s.k_dot = f->scale / qv;
        s.k_ddot = -f->scale * q.deriv(t) / (qv * qv);
        return s;
    }
    if (const auto* f = std::get_if<InfinityLinear>(&v_)) {
        const double ee = f->e.squared_norm();
        const Vec3 rt = f->target.r0 + f->target.v * t;
        KSample s;
        s.k = (rt.dot(f->e) + f->c1 * t + f->c2) / ee;
        s.k_dot = (f->target.v.dot(f->e) + f->c1) / ee;
        s.k_ddot = 0.0;
        return s;
    }
    if (const auto* f = std::get_if<Quasi3D>(&v_)) {
        const std::size_t i = locate(f->times, t);
        const Hermite hh = hermite_eval(t, f->times[i], f->times[i + 1], f->integral[i],
                                        f->integral[i + 1], f->inv_r2[i], f->inv_r2[i + 1]);
        return {f->c1 + f->c2 * hh.y, f->c2 * hh.dy, f->c2 * hh.d2y};
    }
    if (const auto* f = std::get_if<TpnClosedForm>(&v_)) {
        const std::size_t i = locate(f->times, t);
        const Hermite hh = hermite_eval(t, f->times[i], f->times[i + 1], f->k[i], f->k[i + 1],
                                        f->k_dot[i], f->k_dot[i + 1]);
        const double w = (t - f->times[i]) / (f->times[i + 1] - f->times[i]);
        return {hh.y, hh.dy, (1.0 - w) * f->k_ddot[i] + w * f->k_ddot[i + 1]};
    }
    const auto& f = std::get<Sampled>(v_);
    const std::size_t i = locate(f.times, t);
    const Hermite hh = hermite_eval(t, f.times[i], f.times[i + 1], f.k[i], f.k[i + 1],
                                    f.k_dot[i], f.k_dot[i + 1]);
    double kdd = hh.d2y;
    if (!f.k_ddot.empty()) {
        const double w = (t - f.times[i]) / (f.times[i + 1] - f.times[i]);
        kdd = (1.0 - w) * f.k_ddot[i] + w * f.k_ddot[i + 1];
    }
    return {hh.y, hh.dy, kdd};
}

std::optional<double> KPath::capture_time() const {
    if (const auto* f = std::get_if<ConstVelLinear>(&v_)) {
        // k = 1 where (c1 t + c2)^2 = q(t) and the numerator is positive.
        const RangeSquared q = RangeSquared::from(f->p, f->target);
        const double a = f->c1 * f->c1 - q.a;
        const double b = 2.0 * f->c1 * f->c2 - q.b;
        const double c = f->c2 * f->c2 - q.c;
        std::vector<double> roots;
        if (std::abs(a) < 1e-14 * std::max(std::abs(q.a), 1.0)) {
            if (b != 0.0) roots.push_back(-c / b);
        } else {
            const double d = b * b - 4.0 * a * c;
            if (d >= 0.0) {
                const double sd = std::sqrt(d);
                roots.push_back((-b - sd) / (2.0 * a));
                roots.push_back((-b + sd) / (2.0 * a));
            }
        }
        std::optional<double> best;
        for (double r : roots) {
            if (r < -1e-12 || r > tf_ * (1.0 + 1e-12)) continue;
            if (f->c1 * r + f->c2 <= 0.0) continue;
            if (!best || r < *best) best = std::max(r, 0.0);
        }
        return best;
    }
    if (const auto* f = std::get_if<ConstVelStationary>(&v_)) {
        if (f->k0 >= 1.0 - 1e-15) return t0_;
        if (f->scale <= 0.0) return std::nullopt;
        const RangeSquared q = RangeSquared::from(f->p, f->target);
        return invert_range_integral(q, (1.0 - f->k0) / f->scale, tf_);
    }
    if (const auto* f = std::get_if<InfinityLinear>(&v_)) {
        (void)f;
        return std::nullopt; // capture there is k -> 0, not k -> 1
    }
    if (const auto* f = std::get_if<Quasi3D>(&v_)) {
        std::vector<double> kd(f->inv_r2.size());
        std::vector<double> kv(f->integral.size());
        for (std::size_t i = 0; i < kv.size(); ++i) {
            kv[i] = f->c1 + f->c2 * f->integral[i];
            kd[i] = f->c2 * f->inv_r2[i];
        }
        return table_capture(f->times, kv, kd);
    }
    if (const auto* f = std::get_if<TpnClosedForm>(&v_)) {
        return table_capture(f->times, f->k, f->k_dot);
    }
    const auto& f = std::get<Sampled>(v_);
    return table_capture(f.times, f.k, f.k_dot);
}

// ---------------------------------------------------------------------------

KPath k_const_velocity(const Vec3& p, const ConstantVelocity& target,
                       double k0, double k0_dot, double tf) {
    const RangeSquared q = RangeSquared::from(p, target);
    require_nondegenerate_range(q, tf, "k_const_velocity");
    const double n0 = std::sqrt(q.c);
    const Vec3 alpha0 = p - target.r0;
    const double c2 = k0 * n0;
    const double c1 = k0_dot * n0 - k0 * target.v.dot(alpha0) / n0;
    return KPath(KPath::ConstVelLinear{p, target, c1, c2}, 0.0, tf);
}

KPath k_finite_horizon(const Vec3& p, const ConstantVelocity& target,
                       double k0, double tf) {
    if (!(tf > 0.0)) throw ValidationError("k_finite_horizon: tf must be positive");
    const RangeSquared q = RangeSquared::from(p, target);
    require_nondegenerate_range(q, tf, "k_finite_horizon");
    const double n0 = std::sqrt(q.c);
    const double nf = std::sqrt(q.eval(tf));
    const double c1 = (nf - k0 * n0) / tf;
    return KPath(KPath::ConstVelLinear{p, target, c1, k0 * n0}, 0.0, tf);
}

KPath k_el_const_velocity(const Vec3& p, const ConstantVelocity& target,
                          double k0, double k0_dot, double tf) {
    const RangeSquared q = RangeSquared::from(p, target);
    require_nondegenerate_range(q, tf, "k_el_const_velocity");
    return KPath(KPath::ConstVelStationary{p, target, k0, k0_dot * q.c}, 0.0, tf);
}

KPath k_el_capture(const Vec3& p, const ConstantVelocity& target, double k0, double tf) {
    if (!(tf > 0.0)) throw ValidationError("k_el_capture: tf must be positive");
    const RangeSquared q = RangeSquared::from(p, target);
    require_nondegenerate_range(q, tf, "k_el_capture");
    const double scale = (1.0 - k0) / range_integral(q, tf);
    return KPath(KPath::ConstVelStationary{p, target, k0, scale}, 0.0, tf);
}

KPath k_infinity(const Vec3& e, const ConstantVelocity& target,
                 Engagement::Mode mode, double tf_or_k0_dot, double tf) {
    const double ee = e.squared_norm();
    if (ee == 0.0) {
        throw DomainError("k_infinity: agents coincide at start, offset direction undefined");
    }
    const double c2 = ee - target.r0.dot(e);
    double c1 = 0.0;
    double horizon = tf;
    switch (mode) {
        case Engagement::Mode::open:
            c1 = tf_or_k0_dot * ee - target.v.dot(e);
            break;
        case Engagement::Mode::capture: {
            horizon = tf_or_k0_dot;
            if (!(horizon > 0.0)) throw ValidationError("k_infinity: capture needs tf > 0");
            const Vec3 rtf = target.r0 + target.v * horizon;
            c1 = -(rtf.dot(e) + c2) / horizon;
            break;
        }
        case Engagement::Mode::track:
            c1 = -target.v.dot(e);
            break;
    }
    return KPath(KPath::InfinityLinear{e, target, c1, c2}, 0.0, horizon);
}

KPath k_quasi3d(double c1, double c2, const std::function<double(double)>& rT_of_t,
                double t0, double tf) {
    if (!(tf > t0)) throw ValidationError("k_quasi3d: tf must exceed t0");
    const auto integrand = [&](double t) {
        const double r = rT_of_t(t);
        if (!(r > 0.0)) {
            throw SingularityError("k_quasi3d: shadowee range reached zero", t);
        }
        return 1.0 / (r * r);
    };

    const std::size_t n = 2048;
    KPath::Quasi3D q;
    q.c1 = c1;
    q.c2 = c2;
    q.times.resize(n + 1);
    q.integral.resize(n + 1);
    q.inv_r2.resize(n + 1);
    const double h = (tf - t0) / static_cast<double>(n);
    const double seg_tol = 1e-9 / static_cast<double>(n);
    q.times[0] = t0;
    q.integral[0] = 0.0;
    q.inv_r2[0] = integrand(t0);
    for (std::size_t i = 1; i <= n; ++i) {
        q.times[i] = t0 + h * static_cast<double>(i);
        q.integral[i] = q.integral[i - 1] +
                        adaptive_simpson(integrand, q.times[i - 1], q.times[i], seg_tol);
        q.inv_r2[i] = integrand(q.times[i]);
    }
    return KPath(std::move(q), t0, tf);
}

KPath k_tpn_engagement(const SphericalState& polar0, double lambda,
                       double k0, double k0_dot, double tf, double dt) {
    const double rt0 = polar0.r;
    const double theta0 = polar0.theta;
    const double rt_dot0 = polar0.r_dot;
    const double theta_dot0 = polar0.theta_dot;
    if (!(rt0 > 0.0)) throw ValidationError("k_tpn_engagement: shadowee range must be positive");

    // Closing rate of the shadower-shadowee separation r = (1 - k) rT.
    const double r0_dot = -k0_dot * rt0 + (1.0 - k0) * rt_dot0;

    // V_r = A cos(theta + B) + lambda r0_dot fitted to the initial state.
    const double den = lambda * r0_dot - rt_dot0;
    const double vtheta0 = rt0 * theta_dot0;
    const double a_const = std::hypot(den, vtheta0);
    const double scale = std::abs(rt_dot0) + std::abs(vtheta0) + std::abs(lambda * r0_dot);
    if (a_const <= 1e-12 * std::max(scale, 1.0)) {
        throw DomainError("k_tpn_engagement: degenerate radial engagement (A = 0), "
                          "line-of-sight never rotates");
    }
    const double psi0 = std::atan2(-vtheta0, -den); // theta0 + B
    const double b_const = psi0 - theta0;

    // Fixed-step RK4 on (rT, theta, S) with S' = 1/rT^2; k = k0 + k0_dot rT0^2 S.
    const double c2 = k0_dot * rt0 * rt0;
    auto deriv = [&](const std::array<double, 3>& y, std::array<double, 3>& dy) {
        const double s = std::sin(y[1] + b_const);
        dy[0] = a_const * std::cos(y[1] + b_const) + lambda * r0_dot;
        dy[1] = -a_const * s / y[0];
        dy[2] = 1.0 / (y[0] * y[0]);
    };

    KPath::TpnClosedForm out;
    out.a_const = a_const;
    out.b_const = b_const;
    out.lambda = lambda;
    out.r0_dot = r0_dot;
    out.polar0 = polar0;
    out.c1 = k0;
    out.c2 = c2;

    std::array<double, 3> y{rt0, theta0, 0.0};
    const auto push = [&](double t, const std::array<double, 3>& s) {
        out.times.push_back(t);
        out.r_t.push_back(s[0]);
        out.theta.push_back(s[1]);
        out.k.push_back(k0 + c2 * s[2]);
        out.k_dot.push_back(c2 / (s[0] * s[0]));
        const double rdot = a_const * std::cos(s[1] + b_const) + lambda * r0_dot;
        out.k_ddot.push_back(-2.0 * c2 * rdot / (s[0] * s[0] * s[0]));
    };
    push(0.0, y);

    std::array<double, 3> k1{}, k2{}, k3{}, k4{}, tmp{};
    const auto rk4_step = [&](const std::array<double, 3>& from, double h,
                              std::array<double, 3>& to) {
        deriv(from, k1);
        for (int j = 0; j < 3; ++j) tmp[j] = from[j] + 0.5 * h * k1[j];
        deriv(tmp, k2);
        for (int j = 0; j < 3; ++j) tmp[j] = from[j] + 0.5 * h * k2[j];
        deriv(tmp, k3);
        for (int j = 0; j < 3; ++j) tmp[j] = from[j] + h * k3[j];
        deriv(tmp, k4);
        for (int j = 0; j < 3; ++j) {
            to[j] = from[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    };

    const auto steps = static_cast<std::size_t>(std::ceil(tf / dt - 1e-9));
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) * dt;
        if (std::abs(std::sin(y[1] + b_const)) < 1e-12) {
            throw SingularityError("k_tpn_engagement: line-of-sight rate vanished", t);
        }
        if (!(y[0] > 0.0)) {
            throw SingularityError("k_tpn_engagement: shadowee range collapsed", t);
        }
        std::array<double, 3> y_new{};
        rk4_step(y, dt, y_new);
        const double k_new = k0 + c2 * y_new[2];
        if (k_new >= 1.0) {
            // Capture inside this step: re-take a shortened step to land on
            // k = 1 (two refinement passes), then stop.
            const double k_old = out.k.back();
            double h = dt * (1.0 - k_old) / (k_new - k_old);
            for (int pass = 0; pass < 2; ++pass) {
                rk4_step(y, h, y_new);
                const double kc = k0 + c2 * y_new[2];
                const double kd = c2 / (y_new[0] * y_new[0]);
                if (kd > 0.0) h += (1.0 - kc) / kd;
            }
            rk4_step(y, h, y_new);
            push(t + h, y_new);
            out.k.back() = std::min(out.k.back(), 1.0);
            break;
        }
        y = y_new;
        push(static_cast<double>(i + 1) * dt, y);
    }
    const double t_end = out.times.back();
    if (out.times.size() < 2) {
        throw ValidationError("k_tpn_engagement: horizon shorter than one step");
    }
    return KPath(std::move(out), 0.0, t_end);
}

// ---------------------------------------------------------------------------

std::vector<double> uniform_times(double t0, double tf, double dt) {
    if (!(dt > 0.0) || !(tf > t0)) throw ValidationError("uniform_times: need dt > 0, tf > t0");
    const auto n = static_cast<std::size_t>(std::floor((tf - t0) / dt * (1.0 + 1e-12)));
    std::vector<double> out(n + 1);
    for (std::size_t i = 0; i <= n; ++i) out[i] = t0 + dt * static_cast<double>(i);
    return out;
}

Trajectory reconstruct_shadower(const Engagement& engagement, const KPath& kpath,
                                const std::vector<double>& times) {
    if (times.size() < 2) throw ValidationError("reconstruct_shadower: need at least 2 samples");
    const double h = times[1] - times[0];
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (std::abs(times[i] - times[i - 1] - h) > 1e-9 * std::max(1.0, std::abs(h))) {
            throw ValidationError("reconstruct_shadower: times must be uniformly spaced");
        }
    }

    Trajectory traj;
    traj.infinity_frame = (engagement.frame == Engagement::Frame::infinity);
    traj.static_point = engagement.p;
    traj.infinity_direction = engagement.e;
    const std::size_t n = times.size();
    traj.times = times;
    traj.rd.resize(n);
    traj.vd.resize(n);
    traj.ad.resize(n);
    traj.rt.resize(n);
    traj.vt.resize(n);
    traj.k.resize(n);
    traj.k_dot.resize(n);

    const Vec3 e_hat = traj.infinity_frame ? engagement.e.normalized() : Vec3{};
    for (std::size_t i = 0; i < n; ++i) {
        const double t = times[i];
        const TargetState ts = engagement.target.eval(t);
        const KSample ks = kpath.sample(t);
        traj.rt[i] = ts.r;
        traj.vt[i] = ts.v;
        traj.k[i] = ks.k;
        traj.k_dot[i] = ks.k_dot;
        if (traj.infinity_frame) {
            traj.rd[i] = ts.r - ks.k * engagement.e;
            traj.vd[i] = ts.v - ks.k_dot * engagement.e;
            traj.ad[i] = ts.a - ks.k_ddot * engagement.e;
            // Offset-direction drift in radians.
            const Vec3 offset = traj.rt[i] - traj.rd[i];
            const double on = offset.norm();
            if (on > 1e-12 * engagement.e.norm()) {
                const double sign = offset.dot(e_hat) >= 0.0 ? 1.0 : -1.0;
                const double drift = (offset / on - sign * e_hat).norm();
                traj.max_constraint_residual = std::max(traj.max_constraint_residual, drift);
            }
        } else {
            const Vec3 alpha = engagement.p - ts.r;
            traj.rd[i] = engagement.p - ks.k * alpha;
            traj.vd[i] = ks.k * ts.v - ks.k_dot * alpha;
            traj.ad[i] = ks.k * ts.a + 2.0 * ks.k_dot * ts.v - ks.k_ddot * alpha;
            const double range = alpha.norm();
            const double dev = collinearity_deviation(engagement.p, ts.r, traj.rd[i]);
            traj.max_constraint_residual = std::max(traj.max_constraint_residual, dev / range);
        }
    }

    finalize_energy(traj);
    if (const auto tc = kpath.capture_time(); tc && *tc <= times.back() * (1.0 + 1e-12)) {
        traj.captured = true;
        traj.capture_time = *tc;
    }
    return traj;
}

} // namespace mocam
