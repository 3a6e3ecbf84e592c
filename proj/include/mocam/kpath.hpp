#ifndef MOCAM_KPATH_HPP
#define MOCAM_KPATH_HPP

#include <optional>
#include <variant>
#include <vector>

#include "mocam/geometry.hpp"
#include "mocam/targets.hpp"
#include "mocam/trajectory.hpp"
#include "mocam/vec3.hpp"

namespace mocam {

/// Full scenario description: the mimicked point (a static point or a fixed
/// direction for camouflage at infinity), the shadowee model, initial ratio
/// conditions and the evaluation horizon.
struct Engagement {
    enum class Frame { static_point, infinity };
    enum class Mode { open, capture, track };

    Frame frame = Frame::static_point;
    Vec3 p;                 // static point (static_point frame)
    Vec3 e;                 // offset vector rT - rD (infinity frame)
    TargetModel target;
    double k0 = 0.0;
    double k0_dot = 0.0;
    double tf = 0.0;
    Mode mode = Mode::open;
};

/// One instant of a camouflage-ratio path.
struct KSample {
    double k;
    double k_dot;
    double k_ddot;
};

/// Evaluable camouflage ratio function k(t) on a domain [t0, tf].
///
/// Families:
///  - ConstVelLinear:      k = (c1 t + c2) / |p - rT(t)|, linear-in-time
///                         numerator against a constant-velocity shadowee.
///  - ConstVelStationary:  stationary point of the energy functional for a
///                         constant-velocity shadowee; k' = C / |p - rT|^2
///                         with a closed-form (arctangent) time integral.
///  - InfinityLinear:      k e'e = rT'e + c1 t + c2, camouflage at infinity.
///  - Quasi3D:             k = c1 + c2 int 1/rT(t)^2 dt for a caller-supplied
///                         range history rT(t) (distance of the shadowee from
///                         the static point).
///  - TpnClosedForm:       quasi-3D engagement against a true-proportional-
///                         navigation shadowee; polar closed forms integrated
///                         numerically.
///  - Sampled:             tabulated k, k', k'' (numeric solver output).
///
/// Evaluating k above 1 throws DomainError: such a path breaks the camouflage
/// domain and is never silently clamped.
class KPath {
public:
    struct ConstVelLinear {
        Vec3 p;
        ConstantVelocity target;
        double c1, c2;
    };
    struct ConstVelStationary {
        Vec3 p;
        ConstantVelocity target;
        double k0;
        double scale; // C in k' = C / |p - rT|^2
    };
    struct InfinityLinear {
        Vec3 e;
        ConstantVelocity target;
        double c1, c2;
    };
    struct Quasi3D {
        double c1, c2;
        std::vector<double> times;    // dense quadrature grid
        std::vector<double> integral; // cumulative int 1/rT^2
        std::vector<double> inv_r2;   // integrand at the grid points
    };
    struct TpnClosedForm {
        double a_const, b_const; // V_r = A cos(theta + B) + lambda r0_dot
        double lambda, r0_dot;
        SphericalState polar0;
        double c1, c2;
        std::vector<double> times, k, k_dot, k_ddot;
        std::vector<double> r_t, theta; // shadowee polar history about P
    };
    struct Sampled {
        std::vector<double> times, k, k_dot, k_ddot;
    };

    using Variant = std::variant<ConstVelLinear, ConstVelStationary, InfinityLinear,
                                 Quasi3D, TpnClosedForm, Sampled>;

    KPath(Variant v, double t0, double tf);

    double k(double t) const { return sample(t).k; }
    double k_dot(double t) const { return sample(t).k_dot; }
    double k_ddot(double t) const { return sample(t).k_ddot; }
    KSample sample(double t) const;

    double t0() const { return t0_; }
    double tf() const { return tf_; }

    /// Earliest time in the domain at which k reaches 1, if any.
    std::optional<double> capture_time() const;

    const Variant& variant() const { return v_; }
    template <class T> const T* as() const { return std::get_if<T>(&v_); }

private:
    KSample sample_unchecked(double t) const;

    Variant v_;
    double t0_, tf_;
};

/// Linear-numerator solution against a constant-velocity shadowee, with the
/// constants determined by the initial conditions:
///   c2 = k0 |p - rT(0)|,
///   c1 = k0_dot |p - rT(0)| - k0 (vT . (p - rT(0))) / |p - rT(0)|.
KPath k_const_velocity(const Vec3& p, const ConstantVelocity& target,
                       double k0, double k0_dot, double tf);

/// Same family with c1 chosen from the terminal condition k(tf) = 1:
///   c1 = (|p - rT(tf)| - k0 |p - rT(0)|) / tf.
KPath k_finite_horizon(const Vec3& p, const ConstantVelocity& target,
                       double k0, double tf);

/// Stationary (energy-minimal) solution against a constant-velocity shadowee,
/// open-ended: k(0) = k0, k'(0) = k0_dot, k' = C / |p - rT|^2.
KPath k_el_const_velocity(const Vec3& p, const ConstantVelocity& target,
                          double k0, double k0_dot, double tf);

/// Stationary solution with C chosen from the terminal condition k(tf) = 1.
KPath k_el_capture(const Vec3& p, const ConstantVelocity& target,
                   double k0, double tf);

/// Camouflage at infinity with e = rT(0) - rD(0), so k(0) = 1 by construction.
/// mode = open:    k'(0) = k0_dot (pass tf_or_k0_dot as k0_dot);
/// mode = capture: k(tf) = 0      (pass tf_or_k0_dot as tf);
/// mode = track:   k == 1 and |rT - rD| == |e| throughout.
KPath k_infinity(const Vec3& e, const ConstantVelocity& target,
                 Engagement::Mode mode, double tf_or_k0_dot, double tf);

/// Quasi-3D integral form for a caller-supplied shadowee range history
/// (distance from the static point): k = c1 + c2 int_t0^t 1/rT(s)^2 ds,
/// evaluated by adaptive Simpson quadrature (absolute tolerance 1e-9).
KPath k_quasi3d(double c1, double c2, const std::function<double(double)>& rT_of_t,
                double t0, double tf);

/// Engagement against a shadowee flying true proportional navigation:
/// polar closed forms V_r = A cos(theta+B) + lambda r0_dot,
/// V_theta = -A sin(theta+B), integrated at fixed step dt, feeding the
/// quasi-3D integral with c1 = k0, c2 = k0_dot rT0^2. The shadowee's initial
/// polar state about the static point is polar0; r0_dot is derived from the
/// camouflage initial conditions.
KPath k_tpn_engagement(const SphericalState& polar0, double lambda,
                       double k0, double k0_dot, double tf, double dt = 1e-3);

/// Rebuild the shadower trajectory from a ratio path:
/// static point:  rD = p - k (p - rT),  vD = k vT - k' (p - rT);
/// infinity:      rD = rT - k e,        vD = vT - k' e.
/// times must be uniformly spaced and lie inside the path domain.
Trajectory reconstruct_shadower(const Engagement& engagement, const KPath& kpath,
                                const std::vector<double>& times);

/// Uniform sample vector over [t0, tf] with step dt (tf included within
/// roundoff; the last sample never exceeds tf).
std::vector<double> uniform_times(double t0, double tf, double dt);

} // namespace mocam

#endif
