#include "doctest.h"

#include <cmath>

#include "mocam/errors.hpp"
#include "mocam/geometry.hpp"
#include "mocam/kpath.hpp"

#include "support/oracles.hpp"

using namespace mocam;

namespace {
const Vec3 kP4{200, -650, 500};
const ConstantVelocity kCv4{{30, 60, 150}, {200, -20, 60}};
const Vec3 kP8{200, -650, 0};
const ConstantVelocity kCv8{{30, 60, 0}, {200, -20, 0}};
} // namespace

TEST_CASE("k_const_velocity trivial solution stays at the static point") {
    const KPath kp = k_const_velocity(kP4, kCv4, 0.0, 0.0, 10.0);
    for (double t : {0.0, 3.7, 10.0}) CHECK(kp.k(t) == doctest::Approx(0.0));

    Engagement eng{Engagement::Frame::static_point, kP4, {}, TargetModel(kCv4),
                   0.0, 0.0, 10.0, Engagement::Mode::open};
    const Trajectory traj = reconstruct_shadower(eng, kp, uniform_times(0.0, 10.0, 0.1));
    for (std::size_t i = 0; i < traj.size(); ++i) {
        CHECK((traj.rd[i] - kP4).norm() <= 1e-12);
        CHECK(traj.vd[i].norm() <= 1e-12);
    }
    CHECK(traj.total_energy() == doctest::Approx(0.0));
}

TEST_CASE("k_const_velocity against a stationary shadowee is linear in time") {
    const ConstantVelocity still{{100, -40, 7}, {0, 0, 0}};
    const KPath kp = k_const_velocity({0, 0, 0}, still, 0.1, 0.05, 10.0);
    for (double t : {0.0, 1.0, 5.5, 10.0}) {
        CHECK(kp.k(t) == doctest::Approx(0.1 + 0.05 * t).epsilon(1e-12));
    }
}

TEST_CASE("k_const_velocity matches its initial conditions") {
    const KPath kp = k_const_velocity(kP8, kCv8, 0.1, 0.2, 6.0);
    CHECK(std::abs(kp.k(0.0) - 0.1) <= 1e-10);
    CHECK(std::abs(kp.k_dot(0.0) - 0.2) <= 1e-10);
}

TEST_CASE("k_finite_horizon constants and terminal condition") {
    const KPath kp = k_finite_horizon(kP4, kCv4, 0.1, 12.0);
    const auto* fam = kp.as<KPath::ConstVelLinear>();
    REQUIRE(fam != nullptr);
    // c2 = k0 |p - rT(0)| and c1 = (|p - rT(tf)| - c2) / tf
    const double n0 = std::sqrt(655500.0);
    const double nf = std::sqrt(5330700.0);
    CHECK(fam->c2 == doctest::Approx(0.1 * n0).epsilon(1e-12));
    CHECK(fam->c1 == doctest::Approx((nf - 0.1 * n0) / 12.0).epsilon(1e-12));
    CHECK(fam->c1 == doctest::Approx(185.6557).epsilon(1e-4));
    CHECK(fam->c2 == doctest::Approx(80.9630).epsilon(1e-4));
    CHECK(std::abs(kp.k(12.0) - 1.0) <= 1e-10);
    CHECK(std::abs(kp.k(0.0) - 0.1) <= 1e-12);
}

TEST_CASE("linear-numerator family rejects ratios above 1 instead of clamping") {
    // This engagement's linear-numerator capture path overshoots the
    // camouflage domain mid-flight; evaluation there must fail loudly.
    const KPath kp = k_finite_horizon(kP4, kCv4, 0.1, 12.0);
    CHECK_THROWS_AS(kp.k(6.0), DomainError);
    // k0 = 1: the numerator is the linear chord of the convex range history,
    // so the interior ratio exceeds 1 and must be flagged, while both
    // endpoints evaluate to exactly 1.
    const KPath bulge = k_finite_horizon(kP8, kCv8, 1.0, 3.0);
    CHECK(std::abs(bulge.k(3.0) - 1.0) <= 1e-10);
    CHECK(std::abs(bulge.k(0.0) - 1.0) <= 1e-12);
    CHECK_THROWS_AS(bulge.k(1.5), DomainError);
}

TEST_CASE("open and finite-horizon parameterizations agree when c1 matches") {
    // tf = 4 keeps this capture path inside the camouflage domain.
    const KPath cap = k_finite_horizon(kP4, kCv4, 0.1, 4.0);
    const auto* fam = cap.as<KPath::ConstVelLinear>();
    const double n0 = std::sqrt(655500.0);
    const double n0_dot = -69200.0 / n0;
    const double k0_dot = (fam->c1 - 0.1 * n0_dot) / n0;
    const KPath open = k_const_velocity(kP4, kCv4, 0.1, k0_dot, 4.0);
    for (double t = 0.0; t <= 4.0; t += 0.05) {
        CHECK(std::abs(open.k(t) - cap.k(t)) <= 1e-12);
    }
}

TEST_CASE("stationary family satisfies its boundary conditions") {
    const KPath open = k_el_const_velocity(kP8, kCv8, 0.1, 0.2, 6.0);
    CHECK(std::abs(open.k(0.0) - 0.1) <= 1e-12);
    CHECK(std::abs(open.k_dot(0.0) - 0.2) <= 1e-12);

    const KPath cap = k_el_capture(kP4, kCv4, 0.1, 12.0);
    CHECK(std::abs(cap.k(0.0) - 0.1) <= 1e-12);
    CHECK(std::abs(cap.k(12.0) - 1.0) <= 1e-12);
    for (double t = 0.0; t < 12.0; t += 0.1) CHECK(cap.k(t) <= 1.0);
}

TEST_CASE("stationary family rate integral agrees with quadrature") {
    // k' = C / |p - rT|^2, so k(t) - k0 must equal C int dt / q against an
    // independent Simpson evaluation of the range integral.
    const KPath kp = k_el_const_velocity(kP8, kCv8, 0.1, 0.2, 6.0);
    const Vec3 alpha0 = kP8 - kCv8.r0;
    const double scale = 0.2 * alpha0.squared_norm();
    std::vector<double> ts, f;
    for (int i = 0; i <= 4000; ++i) {
        const double t = 4.5 * i / 4000.0;
        ts.push_back(t);
        f.push_back(1.0 / (alpha0 - kCv8.v * t).squared_norm());
    }
    const double integral = mocam::testing::simpson(ts, f);
    CHECK(kp.k(4.5) - 0.1 == doctest::Approx(scale * integral).epsilon(1e-9));
}

TEST_CASE("pursuit ratio path is strictly increasing and captures") {
    const KPath kp = k_el_const_velocity(kP8, kCv8, 0.1, 0.2, 20.0);
    const auto tc = kp.capture_time();
    REQUIRE(tc.has_value());
    CHECK(*tc == doctest::Approx(4.98589).epsilon(1e-4));
    double prev = -1.0;
    for (double t = 0.0; t < *tc; t += 0.01) {
        const double k = kp.k(t);
        CHECK(k > prev);
        prev = k;
    }
    // negative initial rate gives an escape path instead
    const KPath esc = k_el_const_velocity(kP8, kCv8, 0.1, -0.2, 20.0);
    CHECK_FALSE(esc.capture_time().has_value());
    CHECK(esc.k(20.0) < 0.1);
}

TEST_CASE("shadowee through the static point is rejected") {
    const ConstantVelocity through{{-100, 0, 0}, {50, 0, 0}}; // hits p at t = 2
    CHECK_THROWS_AS(k_const_velocity({0, 0, 0}, through, 0.1, 0.0, 5.0), SingularityError);
    CHECK_THROWS_AS(k_el_const_velocity({0, 0, 0}, through, 0.1, 0.0, 5.0), SingularityError);
}

TEST_CASE("infinity family: track keeps the offset exactly") {
    const Vec3 e = kCv4.r0; // shadower starts at the origin
    const KPath kp = k_infinity(e, kCv4, Engagement::Mode::track, 0.0, 12.0);
    Engagement eng{Engagement::Frame::infinity, {}, e, TargetModel(kCv4),
                   1.0, 0.0, 12.0, Engagement::Mode::track};
    const Trajectory traj = reconstruct_shadower(eng, kp, uniform_times(0.0, 12.0, 0.01));
    for (std::size_t i = 0; i < traj.size(); ++i) {
        CHECK(std::abs((traj.rt[i] - traj.rd[i]).norm() - e.norm()) <= 1e-12 * e.norm());
        // the shadower path is the shadowee path translated by -e
        CHECK((traj.rd[i] - (traj.rt[i] - e)).norm() <= 1e-12 * e.norm());
    }
}

TEST_CASE("infinity family: capture ends with coincident positions") {
    const ConstantVelocity cv{{-30, 150, 150}, {200, -20, 60}};
    const Vec3 e = cv.r0 - Vec3{0, 0, 0};
    const KPath kp = k_infinity(e, cv, Engagement::Mode::capture, 10.0, 10.0);
    CHECK(std::abs(kp.k(0.0) - 1.0) <= 1e-12);
    CHECK(std::abs(kp.k(10.0)) <= 1e-10);
    Engagement eng{Engagement::Frame::infinity, {}, e, TargetModel(cv),
                   1.0, 0.0, 10.0, Engagement::Mode::capture};
    const Trajectory traj = reconstruct_shadower(eng, kp, uniform_times(0.0, 10.0, 1e-2));
    CHECK((traj.rd.back() - traj.rt.back()).norm() <= 1e-6 * e.norm());
}

TEST_CASE("infinity family: orthogonal shadowee velocity keeps k at 1") {
    const ConstantVelocity cv{{10, 0, 0}, {0, 7, 0}}; // v orthogonal to e below
    const Vec3 e{10, 0, 0};
    const KPath kp = k_infinity(e, cv, Engagement::Mode::open, 0.0, 5.0);
    for (double t : {0.0, 2.5, 5.0}) CHECK(kp.k(t) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("infinity family rejects coincident agents") {
    CHECK_THROWS_AS(k_infinity({0, 0, 0}, kCv4, Engagement::Mode::track, 0.0, 1.0),
                    DomainError);
}

TEST_CASE("quasi-3d integral form") {
    SUBCASE("zero rate constant is constant k") {
        const KPath kp = k_quasi3d(0.37, 0.0, [](double) { return 55.0; }, 0.0, 4.0);
        for (double t : {0.0, 1.0, 4.0}) CHECK(kp.k(t) == doctest::Approx(0.37).epsilon(1e-12));
    }
    SUBCASE("constant range gives a linear ramp") {
        const double R = 80.0;
        const KPath kp = k_quasi3d(0.1, 32.0, [&](double) { return R; }, 0.0, 6.0);
        for (double t : {0.5, 3.0, 6.0}) {
            CHECK(kp.k(t) == doctest::Approx(0.1 + 32.0 * t / (R * R)).epsilon(1e-10));
        }
        CHECK(kp.k_dot(2.0) == doctest::Approx(32.0 / (R * R)).epsilon(1e-10));
    }
    SUBCASE("linear range matches the analytic antiderivative") {
        const double R = 100.0, v = 13.0, c2 = 500.0;
        const KPath kp = k_quasi3d(0.1, c2, [&](double t) { return R + v * t; }, 0.0, 8.0);
        for (double t = 0.25; t <= 8.0; t += 0.25) {
            const double exact = 0.1 + (c2 / v) * (1.0 / R - 1.0 / (R + v * t));
            CHECK(kp.k(t) == doctest::Approx(exact).epsilon(1e-9));
        }
    }
    SUBCASE("vanishing range is an error") {
        CHECK_THROWS_AS(k_quasi3d(0.1, 1.0, [](double t) { return 1.0 - t; }, 0.0, 2.0),
                        SingularityError);
    }
}

TEST_CASE("tpn engagement closed forms") {
    const Vec3 p{2000, -1650, 0};
    const auto polar0 = to_spherical(p, {30, 60, 0}, {200, -20, 0});

    SUBCASE("constants reproduce the initial polar rates") {
        const KPath kp = k_tpn_engagement(polar0, 3.0, 0.1, 0.08, 6.0);
        const auto* f = kp.as<KPath::TpnClosedForm>();
        REQUIRE(f != nullptr);
        const double vr0 = f->a_const * std::cos(polar0.theta + f->b_const) +
                           3.0 * f->r0_dot;
        const double vth0 = -f->a_const * std::sin(polar0.theta + f->b_const);
        CHECK(std::abs(vr0 - polar0.r_dot) <= 1e-10);
        CHECK(std::abs(vth0 - polar0.r * polar0.theta_dot) <= 1e-10);
    }
    SUBCASE("ratio rises monotonically to capture") {
        const KPath kp = k_tpn_engagement(polar0, 3.0, 0.1, 0.08, 20.0);
        const auto tc = kp.capture_time();
        REQUIRE(tc.has_value());
        CHECK(std::abs(kp.k(kp.tf()) - 1.0) <= 1e-9);
        double prev = -1.0;
        for (double t = 0.0; t < kp.tf(); t += 0.05) {
            CHECK(kp.k(t) >= prev);
            prev = kp.k(t);
        }
    }
    SUBCASE("degenerate radial engagement is rejected") {
        SphericalState s;
        s.r = 500.0;
        s.theta = 0.0;
        s.theta_dot = 0.0; // no line-of-sight rotation
        s.r_dot = 0.0;
        // k0_dot = 0 makes the closing rate zero as well, so A = 0.
        CHECK_THROWS_AS(k_tpn_engagement(s, 3.0, 0.1, 0.0, 5.0), DomainError);
    }
}

TEST_CASE("rate reported by every family matches finite differences of k") {
    const auto check = [](const KPath& kp) {
        const double h = 1e-5;
        for (double t = kp.t0() + 0.05; t < kp.tf() - 0.05; t += (kp.tf() - kp.t0()) / 23.0) {
            double fd;
            try {
                fd = (kp.k(t + h) - kp.k(t - h)) / (2.0 * h);
            } catch (const DomainError&) {
                continue; // family leaves the camouflage domain here
            }
            const double kd = kp.k_dot(t);
            CHECK(std::abs(fd - kd) <= 1e-6 * std::max(1.0, std::abs(kd)));
        }
    };
    check(k_el_capture(kP4, kCv4, 0.1, 12.0));
    check(k_el_const_velocity(kP8, kCv8, 0.1, 0.2, 4.9));
    check(k_finite_horizon(kP4, kCv4, 0.1, 4.0));
    check(k_const_velocity(kP8, kCv8, 0.1, 0.2, 6.0));
    check(k_infinity({-30, 150, 150}, ConstantVelocity{{-30, 150, 150}, {200, -20, 60}},
                     Engagement::Mode::capture, 10.0, 10.0));
    check(k_quasi3d(0.1, 500.0, [](double t) { return 100.0 + 13.0 * t; }, 0.0, 8.0));
    check(k_tpn_engagement(to_spherical({2000, -1650, 0}, {30, 60, 0}, {200, -20, 0}),
                           3.0, 0.1, 0.08, 6.0));
}

TEST_CASE("reconstruction: capture ratio of one rides the shadowee") {
    KPath::Sampled s;
    for (int i = 0; i <= 100; ++i) {
        s.times.push_back(0.1 * i);
        s.k.push_back(1.0);
        s.k_dot.push_back(0.0);
        s.k_ddot.push_back(0.0);
    }
    const KPath kp(std::move(s), 0.0, 10.0);
    Engagement eng{Engagement::Frame::static_point, kP4, {}, TargetModel(kCv4),
                   1.0, 0.0, 10.0, Engagement::Mode::open};
    const Trajectory traj = reconstruct_shadower(eng, kp, uniform_times(0.0, 10.0, 0.1));
    for (std::size_t i = 0; i < traj.size(); ++i) {
        CHECK((traj.rd[i] - traj.rt[i]).norm() <= 1e-9);
    }
}

TEST_CASE("reconstruction hits the capture rendezvous exactly") {
    const KPath kp = k_el_capture(kP4, kCv4, 0.1, 12.0);
    Engagement eng{Engagement::Frame::static_point, kP4, {}, TargetModel(kCv4),
                   0.1, kp.k_dot(0.0), 12.0, Engagement::Mode::capture};
    const Trajectory traj = reconstruct_shadower(eng, kp, uniform_times(0.0, 12.0, 1e-3));
    CHECK((traj.rd.back() - Vec3{2430, -180, 870}).norm() <= 1e-6);
    CHECK(traj.max_constraint_residual <= 1e-8);
    CHECK(traj.captured);
    CHECK(*traj.capture_time == doctest::Approx(12.0).epsilon(1e-9));
}

TEST_CASE("reconstructed acceleration is orthogonal to the sight line") {
    // Second finite differences of the stationary path against the
    // line of sight toward the static point.
    const KPath kp = k_el_capture(kP4, kCv4, 0.1, 12.0);
    Engagement eng{Engagement::Frame::static_point, kP4, {}, TargetModel(kCv4),
                   0.1, kp.k_dot(0.0), 12.0, Engagement::Mode::capture};
    const auto times = uniform_times(0.0, 12.0, 1e-3);
    const Trajectory traj = reconstruct_shadower(eng, kp, times);
    const double h = 1e-3;
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < traj.size(); ++i) {
        const Vec3 a = (traj.rd[i + 1] - 2.0 * traj.rd[i] + traj.rd[i - 1]) / (h * h);
        if (a.norm() < 1e-6) continue;
        const Vec3 los = (kP4 - traj.rd[i]).normalized();
        worst = std::max(worst, std::abs(a.dot(los)) / a.norm());
    }
    CHECK(worst <= 1e-6);
}
