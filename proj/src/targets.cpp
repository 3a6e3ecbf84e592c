#include "mocam/targets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mocam/errors.hpp"

namespace mocam {

namespace {

// Natural cubic spline second derivatives for one axis: tridiagonal solve
// with M[0] = M[n-1] = 0.
std::vector<double> spline_second_derivs(const std::vector<double>& t,
                                         const std::vector<double>& y) {
    const std::size_t n = t.size();
    std::vector<double> m(n, 0.0);
    if (n < 3) return m;

    std::vector<double> diag(n, 0.0), rhs(n, 0.0), upper(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = t[i] - t[i - 1];
        const double h1 = t[i + 1] - t[i];
        diag[i] = 2.0 * (h0 + h1);
        upper[i] = h1;
        rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
    }
    // Forward elimination (lower coefficient of row i is h0 = t[i]-t[i-1]).
    for (std::size_t i = 2; i + 1 < n; ++i) {
        const double h0 = t[i] - t[i - 1];
        const double w = h0 / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
        m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
        if (i == 1) break;
    }
    return m;
}

} // namespace

SampledPath::SampledPath(std::vector<double> times, std::vector<Vec3> positions)
    : times_(std::move(times)), positions_(std::move(positions)) {
    if (times_.size() != positions_.size()) {
        throw ValidationError("SampledPath: times and positions differ in length");
    }
    if (times_.size() < 4) {
        throw ValidationError("SampledPath: need at least 4 samples for a C2 interpolant");
    }
    for (std::size_t i = 1; i < times_.size(); ++i) {
        if (!(times_[i] > times_[i - 1])) {
            throw ValidationError("SampledPath: sample times must be strictly increasing");
        }
    }
    std::vector<double> x(times_.size()), y(times_.size()), z(times_.size());
    for (std::size_t i = 0; i < times_.size(); ++i) {
        x[i] = positions_[i].x;
        y[i] = positions_[i].y;
        z[i] = positions_[i].z;
    }
    const auto mx = spline_second_derivs(times_, x);
    const auto my = spline_second_derivs(times_, y);
    const auto mz = spline_second_derivs(times_, z);
    second_derivs_.resize(times_.size());
    for (std::size_t i = 0; i < times_.size(); ++i) {
        second_derivs_[i] = {mx[i], my[i], mz[i]};
    }
}

TargetState SampledPath::eval(double t) const {
    // Allow a hair of roundoff slack at the window edges.
    const double slack = 1e-12 * std::max(1.0, std::abs(times_.back()));
    if (t < times_.front() - slack || t > times_.back() + slack) {
        std::ostringstream os;
        os << "SampledPath: t = " << t << " outside sampled window ["
           << times_.front() << ", " << times_.back() << "]";
        throw DomainError(os.str());
    }
    t = std::clamp(t, times_.front(), times_.back());

    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t i = (it == times_.begin()) ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
    if (i + 1 >= times_.size()) i = times_.size() - 2;

    const double h = times_[i + 1] - times_[i];
    const double a = (times_[i + 1] - t) / h;
    const double b = (t - times_[i]) / h;
    const Vec3& y0 = positions_[i];
    const Vec3& y1 = positions_[i + 1];
    const Vec3& m0 = second_derivs_[i];
    const Vec3& m1 = second_derivs_[i + 1];

    TargetState s;
    s.r = a * y0 + b * y1 +
          ((a * a * a - a) * m0 + (b * b * b - b) * m1) * (h * h / 6.0);
    s.v = (y1 - y0) / h +
          (-(3.0 * a * a - 1.0) * m0 + (3.0 * b * b - 1.0) * m1) * (h / 6.0);
    s.a = a * m0 + b * m1;
    return s;
}

TargetState TargetModel::eval(double t) const {
    if (const auto* cv = std::get_if<ConstantVelocity>(&model_)) {
        return {cv->r0 + cv->v * t, cv->v, Vec3{}};
    }
    if (const auto* sp = std::get_if<SampledPath>(&model_)) {
        return sp->eval(t);
    }
    throw DomainError("TargetModel: reactive targets have no standalone trajectory; "
                      "integrate them with the guidance module");
}

TargetState eval_target(const TargetModel& model, double t) { return model.eval(t); }

TargetModel sampled_from_function(const std::function<Vec3(double)>& f,
                                  double t0, double tf, int n) {
    if (n < 4) {
        throw ValidationError("sampled_from_function: need n >= 4 samples");
    }
    if (!(tf > t0)) {
        throw ValidationError("sampled_from_function: tf must exceed t0");
    }
    std::vector<double> times(static_cast<std::size_t>(n));
    std::vector<Vec3> pos(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double t = t0 + (tf - t0) * static_cast<double>(i) / (n - 1);
        times[static_cast<std::size_t>(i)] = t;
        pos[static_cast<std::size_t>(i)] = f(t);
    }
    return TargetModel(SampledPath(std::move(times), std::move(pos)));
}

TargetModel load_sampled_target(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("load_sampled_target: cannot open '" + path + "'");
    }
    std::vector<double> times;
    std::vector<Vec3> pos;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double t, x, y, z;
        if (!(row >> t >> x >> y >> z)) {
            throw ValidationError("load_sampled_target: malformed row '" + line + "'");
        }
        times.push_back(t);
        pos.push_back({x, y, z});
    }
    return TargetModel(SampledPath(std::move(times), std::move(pos)));
}

} // namespace mocam
