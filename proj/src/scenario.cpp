#include "mocam/scenario.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "mocam/elode.hpp"
#include "mocam/energy.hpp"
#include "mocam/errors.hpp"
#include "mocam/geometry.hpp"
#include "mocam/guidance.hpp"
#include "mocam/kpath.hpp"

namespace mocam {

namespace {

using nlohmann::ordered_json;

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

Vec3 parse_vec(const ordered_json& j, const std::string& field,
               std::vector<std::string>& errors) {
    if (!j.is_array() || j.size() < 2 || j.size() > 3) {
        errors.push_back(field + ": expected an array of 2 or 3 numbers");
        return {};
    }
    for (const auto& v : j) {
        if (!v.is_number()) {
            errors.push_back(field + ": expected numeric components");
            return {};
        }
    }
    return {j[0].get<double>(), j[1].get<double>(), j.size() == 3 ? j[2].get<double>() : 0.0};
}

ScenarioConfig parse_json(const ordered_json& j) {
    std::vector<std::string> errors;
    ScenarioConfig c;

    if (!j.contains("name") || !j["name"].is_string()) {
        errors.push_back("name: required string");
    } else {
        c.name = j["name"].get<std::string>();
    }

    const std::string mode = j.value("mode", std::string{});
    if (mode == "analytic") c.mode = ScenarioConfig::Mode::analytic;
    else if (mode == "ode") c.mode = ScenarioConfig::Mode::ode;
    else if (mode == "guidance") c.mode = ScenarioConfig::Mode::guidance;
    else if (mode == "energy-compare") c.mode = ScenarioConfig::Mode::energy_compare;
    else if (mode == "infinity") c.mode = ScenarioConfig::Mode::infinity;
    else errors.push_back("mode: must be one of analytic|ode|guidance|energy-compare|infinity");

    if (j.contains("static_point")) c.static_point = parse_vec(j["static_point"], "static_point", errors);

    if (j.contains("target")) {
        const auto& t = j["target"];
        const std::string kind = t.value("type", std::string{});
        if (kind == "constant_velocity") c.target_kind = ScenarioConfig::TargetKind::constant_velocity;
        else if (kind == "tpn") c.target_kind = ScenarioConfig::TargetKind::tpn;
        else if (kind == "sampled") c.target_kind = ScenarioConfig::TargetKind::sampled_file;
        else errors.push_back("target.type: must be constant_velocity|tpn|sampled");
        if (c.target_kind == ScenarioConfig::TargetKind::sampled_file) {
            if (!t.contains("file") || !t["file"].is_string()) {
                errors.push_back("target.file: required for sampled targets");
            } else {
                c.target_file = t["file"].get<std::string>();
            }
        } else {
            if (t.contains("r0")) c.target_r0 = parse_vec(t["r0"], "target.r0", errors);
            else errors.push_back("target.r0: required");
            if (t.contains("v")) c.target_v = parse_vec(t["v"], "target.v", errors);
            else errors.push_back("target.v: required");
        }
    } else {
        errors.push_back("target: required");
    }

    if (j.contains("k0")) c.k0 = j["k0"].get<double>();
    if (j.contains("k0_dot")) c.k0_dot = j["k0_dot"].get<double>();
    if (j.contains("cartesian")) {
        const auto& q = j["cartesian"];
        ScenarioConfig::Cartesian cart;
        cart.xt0 = parse_vec(q.value("xt0", ordered_json::array()), "cartesian.xt0", errors);
        cart.vt0 = parse_vec(q.value("vt0", ordered_json::array()), "cartesian.vt0", errors);
        cart.xd0 = parse_vec(q.value("xd0", ordered_json::array()), "cartesian.xd0", errors);
        cart.vd0 = parse_vec(q.value("vd0", ordered_json::array()), "cartesian.vd0", errors);
        c.cartesian = cart;
    }

    const std::string boundary = j.value("boundary", std::string{"open"});
    if (boundary == "open") c.boundary = ScenarioConfig::Boundary::open;
    else if (boundary == "capture") c.boundary = ScenarioConfig::Boundary::capture;
    else errors.push_back("boundary: must be open|capture");

    if (j.contains("infinity_mode")) {
        const std::string im = j["infinity_mode"].get<std::string>();
        if (im == "open") c.infinity_mode = ScenarioConfig::InfinityMode::open;
        else if (im == "capture") c.infinity_mode = ScenarioConfig::InfinityMode::capture;
        else if (im == "track") c.infinity_mode = ScenarioConfig::InfinityMode::track;
        else errors.push_back("infinity_mode: must be open|capture|track");
    }
    if (j.contains("shadower0")) c.shadower0 = parse_vec(j["shadower0"], "shadower0", errors);
    if (j.contains("lambda")) c.lambda = j["lambda"].get<double>();

    if (j.contains("tf") && j["tf"].is_number()) c.tf = j["tf"].get<double>();
    else errors.push_back("tf: required number");
    if (j.contains("dt") && j["dt"].is_number()) c.dt = j["dt"].get<double>();
    if (j.contains("ccl_interval")) c.ccl_interval = j["ccl_interval"].get<double>();
    if (j.contains("output_stride")) c.output_stride = j["output_stride"].get<int>();

    if (j.contains("outputs")) {
        const auto& o = j["outputs"];
        c.outputs.trajectory = o.value("trajectory", std::string{});
        c.outputs.accel = o.value("accel", std::string{});
        c.outputs.ccl = o.value("ccl", std::string{});
        c.outputs.summary = o.value("summary", std::string{});
        c.outputs.baseline = o.value("baseline", std::string{});
    }
    if (c.outputs.trajectory.empty()) c.outputs.trajectory = c.name + "_trajectory.csv";
    if (c.outputs.accel.empty()) c.outputs.accel = c.name + "_accel.csv";
    if (c.outputs.ccl.empty()) c.outputs.ccl = c.name + "_ccls.csv";
    if (c.outputs.summary.empty()) c.outputs.summary = c.name + "_summary.json";
    if (c.outputs.baseline.empty()) c.outputs.baseline = c.name + "_baseline.csv";

    auto later = validate_config(c);
    errors.insert(errors.end(), later.begin(), later.end());
    if (!errors.empty()) {
        std::ostringstream os;
        os << "scenario config invalid:";
        for (const auto& e : errors) os << "\n  - " << e;
        throw ValidationError(os.str());
    }
    return c;
}

TargetModel make_target(const ScenarioConfig& c) {
    switch (c.target_kind) {
        case ScenarioConfig::TargetKind::constant_velocity:
            return TargetModel(ConstantVelocity{c.target_r0, c.target_v});
        case ScenarioConfig::TargetKind::tpn:
            return TargetModel(ReactiveTarget{"tpn", c.target_r0, c.target_v});
        case ScenarioConfig::TargetKind::sampled_file:
            return load_sampled_target(c.target_file);
    }
    throw ValidationError("unknown target kind");
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path, int stride) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << "t,dx,dy,dz,tx,ty,tz,k,k_dot,vdx,vdy,vdz,a_r,a_theta,J_cum\n";
    const std::size_t n = traj.size();
    for (std::size_t i = 0; i < n; i += static_cast<std::size_t>(stride)) {
        // Line-of-sight frame for the acceleration split.
        Vec3 e_r;
        if (traj.infinity_frame) {
            e_r = traj.infinity_direction.normalized();
        } else {
            Vec3 axis = traj.rd[i] - traj.static_point;
            if (axis.squared_norm() < 1e-24) axis = traj.rt[i] - traj.static_point;
            e_r = axis.normalized();
        }
        const double a_r = traj.ad[i].dot(e_r);
        const Vec3 tangential = traj.ad[i] - a_r * e_r;
        // Planar runs carry a sign (left-handed normal), 3-D runs a magnitude.
        double a_theta = tangential.norm();
        if (traj.ad[i].z == 0.0 && e_r.z == 0.0) {
            const Vec3 e_theta{-e_r.y, e_r.x, 0.0};
            a_theta = traj.ad[i].dot(e_theta);
        }
        out << fmt(traj.times[i]) << ',' << fmt(traj.rd[i].x) << ',' << fmt(traj.rd[i].y) << ','
            << fmt(traj.rd[i].z) << ',' << fmt(traj.rt[i].x) << ',' << fmt(traj.rt[i].y) << ','
            << fmt(traj.rt[i].z) << ',' << fmt(traj.k[i]) << ',' << fmt(traj.k_dot[i]) << ','
            << fmt(traj.vd[i].x) << ',' << fmt(traj.vd[i].y) << ',' << fmt(traj.vd[i].z) << ','
            << fmt(a_r) << ',' << fmt(a_theta) << ',' << fmt(traj.cumulative_energy[i]) << '\n';
    }
}

void write_accel_csv(const std::vector<AccelRecord>& records, const std::string& path,
                     int stride) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << "t,shadower_a_r,shadower_a_theta,target_a_r,target_a_theta\n";
    for (std::size_t i = 0; i < records.size(); i += static_cast<std::size_t>(stride)) {
        const auto& r = records[i];
        out << fmt(r.t) << ',' << fmt(r.shadower_a_r) << ',' << fmt(r.shadower_a_theta) << ','
            << fmt(r.target_a_r) << ',' << fmt(r.target_a_theta) << '\n';
    }
}

ordered_json summary_json(const ScenarioConfig& c, const Trajectory& traj,
                          const ResidualReport& residual,
                          std::optional<double> ratio = std::nullopt) {
    ordered_json s;
    s["scenario"] = c.name;
    switch (c.mode) {
        case ScenarioConfig::Mode::analytic: s["mode"] = "analytic"; break;
        case ScenarioConfig::Mode::ode: s["mode"] = "ode"; break;
        case ScenarioConfig::Mode::guidance: s["mode"] = "guidance"; break;
        case ScenarioConfig::Mode::energy_compare: s["mode"] = "energy-compare"; break;
        case ScenarioConfig::Mode::infinity: s["mode"] = "infinity"; break;
    }
    if (traj.captured && traj.capture_time) s["capture_time"] = *traj.capture_time;
    else s["capture_time"] = nullptr;
    s["final_speed_shadower"] = traj.vd.back().norm();
    s["energy_J"] = traj.total_energy();
    s["max_orthogonality_cos"] = residual.max_orthogonality_cos;
    const double coll = traj.infinity_frame ? traj.max_constraint_residual
                                            : std::max(residual.max_collinearity_dev,
                                                       traj.max_constraint_residual);
    s["max_collinearity_dev"] = coll;
    if (ratio) s["ratio"] = *ratio;
    return s;
}

std::string write_summary(const ordered_json& s, const std::string& path) {
    std::string text = s.dump(2);
    text.push_back('\n');
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << text;
    return text;
}

} // namespace

ScenarioConfig parse_scenario_config(const std::string& json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const std::exception& e) {
        throw ValidationError(std::string("scenario config is not valid JSON: ") + e.what());
    }
    return parse_json(j);
}

ScenarioConfig load_scenario_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open scenario config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario_config(ss.str());
}

std::vector<std::string> validate_config(const ScenarioConfig& c) {
    std::vector<std::string> errors;
    const bool has_ratio_ic = c.k0.has_value();
    const bool has_cartesian = c.cartesian.has_value();

    if (!(c.tf > 0.0)) errors.push_back("tf: must be positive");
    if (!(c.dt > 0.0)) errors.push_back("dt: must be positive");
    if (c.ccl_interval && *c.ccl_interval < c.dt) {
        errors.push_back("ccl_interval: must be >= dt when present");
    }
    if (c.output_stride < 1) errors.push_back("output_stride: must be >= 1");

    switch (c.mode) {
        case ScenarioConfig::Mode::analytic:
        case ScenarioConfig::Mode::ode:
            if (has_ratio_ic == has_cartesian) {
                errors.push_back("initial conditions: supply exactly one of k0[/k0_dot] or cartesian");
            }
            if (has_ratio_ic && c.boundary == ScenarioConfig::Boundary::open && !c.k0_dot) {
                errors.push_back("k0_dot: required for open-boundary runs");
            }
            if (!c.static_point && !has_cartesian) {
                errors.push_back("static_point: required (or derivable from cartesian)");
            }
            if (c.target_kind == ScenarioConfig::TargetKind::tpn) {
                errors.push_back("target.type: reactive targets need mode=guidance");
            }
            if (c.boundary == ScenarioConfig::Boundary::capture &&
                c.target_kind != ScenarioConfig::TargetKind::constant_velocity) {
                errors.push_back("boundary: capture needs a constant_velocity target");
            }
            break;
        case ScenarioConfig::Mode::guidance:
            if (has_ratio_ic == has_cartesian) {
                errors.push_back("initial conditions: supply exactly one of k0/k0_dot or cartesian");
            }
            if (has_ratio_ic && !c.k0_dot) errors.push_back("k0_dot: required for guidance runs");
            if (!c.static_point && !has_cartesian) errors.push_back("static_point: required");
            if (c.target_kind == ScenarioConfig::TargetKind::tpn && !c.lambda) {
                errors.push_back("lambda: required for a tpn shadowee");
            }
            if (c.target_kind == ScenarioConfig::TargetKind::sampled_file) {
                errors.push_back("target.type: guidance needs constant_velocity or tpn");
            }
            break;
        case ScenarioConfig::Mode::energy_compare:
            if (!has_cartesian && !(has_ratio_ic && c.k0_dot && c.static_point)) {
                errors.push_back("energy-compare: needs cartesian ICs (or k0/k0_dot with static_point)");
            }
            if (has_cartesian && has_ratio_ic) {
                errors.push_back("initial conditions: supply exactly one of k0/k0_dot or cartesian");
            }
            if (c.target_kind != ScenarioConfig::TargetKind::constant_velocity) {
                errors.push_back("target.type: energy-compare needs a constant_velocity shadowee");
            }
            break;
        case ScenarioConfig::Mode::infinity:
            if (!c.shadower0) errors.push_back("shadower0: required for infinity mode");
            if (c.infinity_mode == ScenarioConfig::InfinityMode::open && !c.k0_dot) {
                errors.push_back("k0_dot: required for open infinity runs");
            }
            if (c.target_kind != ScenarioConfig::TargetKind::constant_velocity) {
                errors.push_back("target.type: infinity mode needs a constant_velocity shadowee");
            }
            break;
    }
    return errors;
}

void export_ccls(const Vec3& p, const TargetModel& target,
                 const std::vector<double>& times, const std::string& path) {
    if (target.is_reactive()) {
        throw DomainError("export_ccls: reactive shadowees have no standalone trajectory");
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << "t,px,py,pz,tx,ty,tz\n";
    for (double t : times) {
        const TargetState ts = target.eval(t);
        out << fmt(t) << ',' << fmt(p.x) << ',' << fmt(p.y) << ',' << fmt(p.z) << ','
            << fmt(ts.r.x) << ',' << fmt(ts.r.y) << ',' << fmt(ts.r.z) << '\n';
    }
}

std::string run_scenario(const ScenarioConfig& config, const std::string& out_dir,
                         std::optional<double> dt_override) {
    ScenarioConfig c = config;
    if (dt_override) c.dt = *dt_override;
    const auto violations = validate_config(c);
    if (!violations.empty()) {
        std::ostringstream os;
        os << "scenario '" << c.name << "' invalid:";
        for (const auto& v : violations) os << "\n  - " << v;
        throw ValidationError(os.str());
    }

    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const auto path_of = [&](const std::string& leaf) {
        return (fs::path(out_dir) / leaf).string();
    };

    try {
        // Cartesian initial conditions pin the static point and the ratio ICs.
        Vec3 p = c.static_point.value_or(Vec3{});
        double k0 = c.k0.value_or(0.0);
        double k0_dot = c.k0_dot.value_or(0.0);
        if (c.cartesian) {
            const auto inf = infer_engagement(c.cartesian->xt0, c.cartesian->vt0,
                                              c.cartesian->xd0, c.cartesian->vd0);
            p = inf.p;
            k0 = inf.k0;
            k0_dot = inf.k0_dot;
            c.target_r0 = c.cartesian->xt0;
            c.target_v = c.cartesian->vt0;
        }

        const TargetModel target = make_target(c);
        std::string summary_text;

        if (c.mode == ScenarioConfig::Mode::guidance) {
            Engagement eng{Engagement::Frame::static_point, p, Vec3{}, target,
                           k0, k0_dot, c.tf, Engagement::Mode::open};
            GuidanceConfig gc;
            gc.dt = c.dt;
            gc.tf = c.tf;
            const SimResult sim = simulate_mcpn(eng, c.lambda, gc);
            const ResidualReport residual = orthogonality_residual(sim.trajectory);
            write_trajectory_csv(sim.trajectory, path_of(c.outputs.trajectory), c.output_stride);
            write_accel_csv(sim.accel, path_of(c.outputs.accel), c.output_stride);
            if (c.ccl_interval) {
                TargetModel overlay = c.target_kind == ScenarioConfig::TargetKind::tpn
                                          ? TargetModel(SampledPath(sim.trajectory.times,
                                                                    sim.trajectory.rt))
                                          : target;
                export_ccls(p, overlay,
                            uniform_times(0.0, sim.trajectory.times.back(), *c.ccl_interval),
                            path_of(c.outputs.ccl));
            }
            summary_text = write_summary(summary_json(c, sim.trajectory, residual),
                                         path_of(c.outputs.summary));
        } else if (c.mode == ScenarioConfig::Mode::energy_compare) {
            const ConstantVelocity cv{c.target_r0, c.target_v};
            const KPath kpath = k_el_const_velocity(p, cv, k0, k0_dot, c.tf);
            const auto capture = kpath.capture_time();
            const double t_end = capture ? *capture : c.tf;
            Engagement eng{Engagement::Frame::static_point, p, Vec3{}, target,
                           k0, k0_dot, t_end, Engagement::Mode::open};
            const auto times = uniform_times(0.0, t_end, c.dt);
            const Trajectory optimal = reconstruct_shadower(eng, kpath, times);
            const Trajectory baseline = straight_line_baseline(
                p, cv, optimal.rd.front(), times.back(), optimal.rd.back(), c.dt);
            const EnergyReport report = compare_energy(optimal, baseline);
            const ResidualReport residual = orthogonality_residual(optimal);
            write_trajectory_csv(optimal, path_of(c.outputs.trajectory), c.output_stride);
            write_trajectory_csv(baseline, path_of(c.outputs.baseline), c.output_stride);
            if (c.ccl_interval) {
                export_ccls(p, target, uniform_times(0.0, t_end, *c.ccl_interval),
                            path_of(c.outputs.ccl));
            }
            summary_text = write_summary(summary_json(c, optimal, residual, report.ratio),
                                         path_of(c.outputs.summary));
        } else if (c.mode == ScenarioConfig::Mode::infinity) {
            const ConstantVelocity cv{c.target_r0, c.target_v};
            const Vec3 e = cv.r0 - *c.shadower0;
            Engagement::Mode mode = Engagement::Mode::capture;
            double arg = c.tf;
            if (c.infinity_mode == ScenarioConfig::InfinityMode::open) {
                mode = Engagement::Mode::open;
                arg = *c.k0_dot;
            } else if (c.infinity_mode == ScenarioConfig::InfinityMode::track) {
                mode = Engagement::Mode::track;
            }
            const KPath kpath = k_infinity(e, cv, mode, arg, c.tf);
            Engagement eng{Engagement::Frame::infinity, Vec3{}, e, target,
                           1.0, 0.0, c.tf, mode};
            const Trajectory traj =
                reconstruct_shadower(eng, kpath, uniform_times(0.0, c.tf, c.dt));
            const ResidualReport residual = orthogonality_residual(traj);
            write_trajectory_csv(traj, path_of(c.outputs.trajectory), c.output_stride);
            if (c.ccl_interval) {
                throw DomainError("export_ccls: infinity-mode constraint lines are parallel; "
                                  "plot the offset direction instead (ccl_interval not supported)");
            }
            ordered_json s = summary_json(c, traj, residual);
            // Coincidence at tf is the capture condition for this frame.
            if (c.infinity_mode == ScenarioConfig::InfinityMode::capture) {
                s["capture_time"] = c.tf;
            }
            summary_text = write_summary(s, path_of(c.outputs.summary));
        } else {
            // analytic | ode
            const ConstantVelocity* cv = target.constant_velocity();
            std::optional<KPath> kpath;
            if (c.mode == ScenarioConfig::Mode::analytic) {
                if (!cv) {
                    throw ValidationError("analytic mode needs a constant_velocity shadowee");
                }
                kpath = (c.boundary == ScenarioConfig::Boundary::capture)
                            ? k_el_capture(p, *cv, k0, c.tf)
                            : k_el_const_velocity(p, *cv, k0, k0_dot, c.tf);
            } else {
                OdeConfig oc{0.0, c.tf, c.dt};
                kpath = solve_el_ode(p, target, k0,
                                     c.boundary == ScenarioConfig::Boundary::capture
                                         ? k_el_capture(p, *cv, k0, c.tf).k_dot(0.0)
                                         : k0_dot,
                                     oc);
            }
            const auto capture = kpath->capture_time();
            double t_end = std::min(c.tf, kpath->tf());
            if (capture) t_end = std::min(t_end, *capture);
            const auto times = uniform_times(0.0, t_end, c.dt);
            Engagement eng{Engagement::Frame::static_point, p, Vec3{}, target,
                           k0, k0_dot, t_end, Engagement::Mode::open};
            const Trajectory traj = reconstruct_shadower(eng, *kpath, times);
            const ResidualReport residual = orthogonality_residual(traj);
            write_trajectory_csv(traj, path_of(c.outputs.trajectory), c.output_stride);
            if (c.ccl_interval) {
                export_ccls(p, target, uniform_times(0.0, t_end, *c.ccl_interval),
                            path_of(c.outputs.ccl));
            }
            summary_text = write_summary(summary_json(c, traj, residual),
                                         path_of(c.outputs.summary));
        }
        return summary_text;
    } catch (const Error& e) {
        throw Error("scenario '" + c.name + "': " + e.what());
    }
}

} // namespace mocam
