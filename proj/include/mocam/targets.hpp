#ifndef MOCAM_TARGETS_HPP
#define MOCAM_TARGETS_HPP

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "mocam/vec3.hpp"

namespace mocam {

/// Position, velocity and acceleration of a target at one instant.
struct TargetState {
    Vec3 r;
    Vec3 v;
    Vec3 a;
};

/// Straight-line shadowee: r(t) = r0 + v t, zero acceleration.
struct ConstantVelocity {
    Vec3 r0;
    Vec3 v;
};

/// Shadowee defined by position samples, interpolated with a natural cubic
/// spline per axis so position, velocity and acceleration are all evaluable
/// (the spline is C2). Evaluation is restricted to [times.front(), times.back()].
/// Natural end conditions mean the interpolated acceleration is only trustworthy
/// away from the first and last few knots; pad the sampling window if the
/// boundary matters.
class SampledPath {
public:
    SampledPath(std::vector<double> times, std::vector<Vec3> positions);

    TargetState eval(double t) const;
    double t0() const { return times_.front(); }
    double tf() const { return times_.back(); }

private:
    std::vector<double> times_;
    std::vector<Vec3> positions_;
    std::vector<Vec3> second_derivs_; // spline curvature at the knots
};

/// Marker for shadowees driven by a guidance law; they cannot be evaluated on
/// their own and are integrated jointly by the guidance loop.
struct ReactiveTarget {
    std::string law; // e.g. "tpn"
    Vec3 r0;
    Vec3 v0;
};

class TargetModel {
public:
    TargetModel(ConstantVelocity cv) : model_(cv) {}                  // NOLINT(google-explicit-constructor)
    TargetModel(SampledPath sampled) : model_(std::move(sampled)) {}  // NOLINT(google-explicit-constructor)
    TargetModel(ReactiveTarget reactive) : model_(reactive) {}        // NOLINT(google-explicit-constructor)

    /// Position, velocity, acceleration at time t. Throws for reactive targets
    /// and for t outside a sampled model's window.
    TargetState eval(double t) const;

    bool is_constant_velocity() const { return std::holds_alternative<ConstantVelocity>(model_); }
    bool is_reactive() const { return std::holds_alternative<ReactiveTarget>(model_); }
    const ConstantVelocity* constant_velocity() const { return std::get_if<ConstantVelocity>(&model_); }
    const ReactiveTarget* reactive() const { return std::get_if<ReactiveTarget>(&model_); }

private:
    std::variant<ConstantVelocity, SampledPath, ReactiveTarget> model_;
};

/// Convenience wrapper matching the free-function naming used elsewhere.
TargetState eval_target(const TargetModel& model, double t);

/// Sample f at n evenly spaced times over [t0, tf] and build a spline-backed
/// model. Requires n >= 4 (minimum for a C2 interpolant).
TargetModel sampled_from_function(const std::function<Vec3(double)>& f,
                                  double t0, double tf, int n);

/// Load a sampled model from a delimited text file with rows "t x y z"
/// (whitespace or comma separated; lines starting with '#' are skipped).
TargetModel load_sampled_target(const std::string& path);

} // namespace mocam

#endif
