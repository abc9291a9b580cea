#include "mwtrap/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mwtrap/errors.hpp"
#include "mwtrap/txline.hpp"

namespace mwtrap::fields {

using constants::mu0;
using constants::pi;

namespace {

constexpr double kSingularityDistance = 1e-9;  // m
constexpr double kMinimumTolerance = 0.5e-9;   // m, golden-section termination

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

}  // namespace

double Vec3::norm() const { return std::sqrt(dot(*this)); }

void WireLayout::validate() const {
    if (segments.empty()) {
        throw DomainError("WireLayout '" + name + "': no segments");
    }
    if (!(power_watts > 0.0)) {
        throw DomainError("WireLayout '" + name + "': power normalization must be positive");
    }
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& s = segments[i];
        if ((s.end - s.start).norm() == 0.0) {
            throw DomainError("WireLayout '" + name + "': segment " + std::to_string(i) +
                              " has zero length");
        }
        if (!std::isfinite(s.current.real()) || !std::isfinite(s.current.imag())) {
            throw DomainError("WireLayout '" + name + "': segment " + std::to_string(i) +
                              " has non-finite current");
        }
    }
}

double FieldSample::b_perp() const {
    return std::sqrt(std::norm(b.y) + std::norm(b.z));
}

std::vector<FieldSample> bfield_at(const WireLayout& layout, std::span<const Vec3> points) {
    layout.validate();

    struct SegmentGeometry {
        Vec3 start;
        Vec3 direction;  // unit
        double length;
        Phasor current;
    };
    std::vector<SegmentGeometry> geom;
    geom.reserve(layout.segments.size());
    for (const auto& s : layout.segments) {
        const Vec3 d = s.end - s.start;
        const double len = d.norm();
        geom.push_back({s.start, d * (1.0 / len), len, s.current});
    }

    std::vector<FieldSample> out(points.size());
    for (std::size_t ip = 0; ip < points.size(); ++ip) {
        const Vec3 p = points[ip];
        PhasorVec3 b{};
        for (std::size_t is = 0; is < geom.size(); ++is) {
            const auto& g = geom[is];
            const Vec3 a = p - g.start;
            const double along = a.dot(g.direction);

            const double t = clamp(along, 0.0, g.length);
            const Vec3 closest = g.start + g.direction * t;
            if ((p - closest).norm() <= kSingularityDistance) {
                throw SingularityError(
                    "bfield_at: point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                        ", " + std::to_string(p.z) + ") lies on segment " + std::to_string(is),
                    is);
            }

            const Vec3 rho_vec = a - g.direction * along;
            const double rho = rho_vec.norm();
            if (rho < 1e-12) {
                continue;  // on the segment axis beyond its ends: zero field
            }

            // Finite-segment closed form: |B| = mu0*I/(4*pi*rho) * (cos t1 - cos t2)
            // written with the unit vectors to the two endpoints.
            const Vec3 bvec = p - (g.start + g.direction * g.length);
            const double cos_a = along / a.norm();
            const double cos_b = bvec.dot(g.direction) / bvec.norm();
            const double scalar = (cos_a - cos_b) / (4.0 * pi * rho);
            const Vec3 dir = g.direction.cross(rho_vec * (1.0 / rho));
            const Phasor amp = mu0 * g.current * scalar;
            b.x += amp * dir.x;
            b.y += amp * dir.y;
            b.z += amp * dir.z;
        }
        out[ip] = FieldSample{p, b};
    }
    return out;
}

void TwoWireModel::validate() const {
    if (!(half_separation > 0.0) || !(ion_height > 0.0)) {
        throw DomainError("TwoWireModel: half_separation and ion_height must be positive");
    }
    if (u1_frac < -0.25 || u1_frac > 0.0 || u2_frac < -0.25 || u2_frac > 0.0) {
        throw DomainError("TwoWireModel: u1, u2 must lie in [-0.25, 0]");
    }
    if (!(q_tot > 0.0)) {
        throw DomainError("TwoWireModel: q_tot must be positive");
    }
    if (!(wavelength > 0.0)) {
        throw DomainError("TwoWireModel: wavelength must be positive");
    }
    if (!std::isfinite(drive_current.real()) || !std::isfinite(drive_current.imag())) {
        throw DomainError("TwoWireModel: drive current must be finite");
    }
}

TwoWireModel TwoWireModel::paper_defaults() {
    TwoWireModel m;
    m.half_separation = 15e-6;
    m.ion_height = 40e-6;
    m.u1_frac = -0.019;
    m.u2_frac = -0.056;
    m.q_tot = constants::lossless_q;
    m.wavelength = txline::guided_wavelength(3.12e9, 5.5);
    m.drive_current = {1.0, 0.0};
    return m;
}

Phasor TwoWireModel::current_1() const {
    const Phasor gamma = txline::propagation_constant(wavelength, q_tot);
    return txline::shorted_stub_current(u1_frac * wavelength, drive_current, gamma);
}

Phasor TwoWireModel::current_2() const {
    const Phasor gamma = txline::propagation_constant(wavelength, q_tot);
    return txline::shorted_stub_current(u2_frac * wavelength, drive_current, gamma);
}

Phasor two_wire_field(const TwoWireModel& model, double x) {
    model.validate();
    const double d = model.ion_height;
    const double l = model.half_separation;
    const double cos2_1 = d * d / (d * d + (l + x) * (l + x));
    const double cos2_2 = d * d / (d * d + (l - x) * (l - x));
    return mu0 / (2.0 * pi * d) * (model.current_1() * cos2_1 - model.current_2() * cos2_2);
}

std::function<double(double)> two_wire_magnitude(const TwoWireModel& model) {
    model.validate();
    return [model](double x) { return std::abs(two_wire_field(model, x)); };
}

MinimumResult find_field_minimum(const std::function<double(double)>& field_magnitude,
                                 double lo, double hi) {
    if (!(hi > lo)) {
        throw DomainError("find_field_minimum: interval is degenerate");
    }
    const double f_lo = field_magnitude(lo);
    const double f_hi = field_magnitude(hi);

    constexpr double invphi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = field_magnitude(c);
    double fd = field_magnitude(d);
    while (b - a > kMinimumTolerance) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = field_magnitude(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = field_magnitude(d);
        }
    }
    MinimumResult r;
    r.x0 = 0.5 * (a + b);
    r.b_min = field_magnitude(r.x0);
    // If the converged interior value still exceeds both interval endpoints the
    // profile was not unimodal on [lo, hi].
    r.unimodal_warning = (r.b_min > f_lo && r.b_min > f_hi);
    return r;
}

Phasor field_gradient(const std::function<Phasor(double)>& field, double x) {
    const double h = std::max(1e-9, 1e-6 * std::abs(x));
    const auto central = [&](double step) {
        return (field(x + step) - field(x - step)) / (2.0 * step);
    };
    const Phasor d1 = central(h);
    const Phasor d2 = central(0.5 * h);
    return (4.0 * d2 - d1) / 3.0;
}

double lamb_dicke(double gradient_t_per_m, double b_amplitude_t, double ion_mass_kg,
                  double mode_frequency_hz) {
    if (!(gradient_t_per_m > 0.0) || !(b_amplitude_t > 0.0) || !(ion_mass_kg > 0.0) ||
        !(mode_frequency_hz > 0.0)) {
        throw DomainError("lamb_dicke: all inputs must be positive");
    }
    const double omega = 2.0 * pi * mode_frequency_hz;
    const double q0 = std::sqrt(constants::hbar / (2.0 * ion_mass_kg * omega));
    return q0 * gradient_t_per_m / b_amplitude_t;
}

std::vector<Vec3> grid_points(double x0, double x1, std::size_t nx, double y0, double y1,
                              std::size_t ny, double z) {
    if (nx < 1 || ny < 1) {
        throw DomainError("grid_points: grid must have at least one point per axis");
    }
    std::vector<Vec3> pts;
    pts.reserve(nx * ny);
    for (std::size_t iy = 0; iy < ny; ++iy) {
        const double y = ny == 1 ? y0 : y0 + (y1 - y0) * double(iy) / double(ny - 1);
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const double x = nx == 1 ? x0 : x0 + (x1 - x0) * double(ix) / double(nx - 1);
            pts.push_back({x, y, z});
        }
    }
    return pts;
}

// ---------------------------------------------------------------------------
// Geometry optimization

namespace {

struct Evaluator {
    const FieldFactory& factory;
    GeometryObjective objective;
    double evaluation_x;
    std::span<const ParameterBounds> bounds;
    std::vector<ObjectiveSample>* trace;

    bool in_bounds(std::span<const double> p) const {
        for (std::size_t i = 0; i < bounds.size(); ++i) {
            if (p[i] < bounds[i].lo || p[i] > bounds[i].hi) return false;
        }
        return true;
    }

    // Objective in the caller's sense (larger is better unless minimizing amplitude).
    double raw(std::span<const double> p) const {
        auto field = factory(p);
        switch (objective) {
            case GeometryObjective::MaximizeGradient:
                return std::abs(field_gradient(field, evaluation_x));
            case GeometryObjective::MinimizeAmplitude:
                return std::abs(field(evaluation_x));
            case GeometryObjective::MaximizeGradientToAmplitude:
                return std::abs(field_gradient(field, evaluation_x)) /
                       std::abs(field(evaluation_x));
        }
        return 0.0;
    }

    bool maximizing() const { return objective != GeometryObjective::MinimizeAmplitude; }

    // Internal minimization value; +inf outside bounds.
    double cost(std::span<const double> p, bool* diverged) const {
        if (!in_bounds(p)) {
            return std::numeric_limits<double>::infinity();
        }
        const double v = raw(p);
        trace->push_back({{p.begin(), p.end()}, v});
        if (!std::isfinite(v)) {
            const bool improvement = maximizing() ? v > 0.0 : v < 0.0;
            if (std::isinf(v) && improvement) {
                *diverged = true;
                return maximizing() ? -std::numeric_limits<double>::infinity() : v;
            }
            std::string where;
            for (double x : p) where += (where.empty() ? "" : ", ") + std::to_string(x);
            throw DomainError("optimize_geometry: objective is non-finite at (" + where + ")");
        }
        return maximizing() ? -v : v;
    }
};

struct NmRun {
    std::vector<double> best;
    double cost;
    bool diverged = false;
};

NmRun nelder_mead(const Evaluator& eval, std::vector<double> seed,
                  std::span<const ParameterBounds> bounds) {
    const std::size_t n = seed.size();
    std::vector<std::vector<double>> simplex;
    simplex.push_back(seed);
    for (std::size_t i = 0; i < n; ++i) {
        auto v = seed;
        const double range = bounds[i].hi - bounds[i].lo;
        double step = 0.25 * range;
        if (step == 0.0) step = 1e-8;
        if (v[i] + step > bounds[i].hi) step = -step;  // step toward the interior
        v[i] = clamp(v[i] + step, bounds[i].lo, bounds[i].hi);
        simplex.push_back(v);
    }

    bool diverged = false;
    std::vector<double> costs(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        costs[i] = eval.cost(simplex[i], &diverged);
        if (diverged) return {simplex[i], costs[i], true};
    }

    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
    const int max_iterations = 400 * static_cast<int>(n);
    for (int it = 0; it < max_iterations; ++it) {
        std::vector<std::size_t> order(n + 1);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return costs[a] < costs[b]; });
        std::vector<std::vector<double>> sorted_pts(n + 1);
        std::vector<double> sorted_costs(n + 1);
        for (std::size_t i = 0; i <= n; ++i) {
            sorted_pts[i] = simplex[order[i]];
            sorted_costs[i] = costs[order[i]];
        }
        simplex = std::move(sorted_pts);
        costs = std::move(sorted_costs);

        // Convergence: simplex collapsed in parameter space or in cost.
        double diam = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double spread = 0.0;
            for (std::size_t v = 1; v <= n; ++v) {
                spread = std::max(spread, std::abs(simplex[v][i] - simplex[0][i]));
            }
            diam = std::max(diam, spread / std::max(bounds[i].hi - bounds[i].lo, 1e-300));
        }
        if (diam < 1e-10 ||
            std::abs(costs[n] - costs[0]) < 1e-14 * (1.0 + std::abs(costs[0]))) {
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t v = 0; v < n; ++v) {
            for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[v][i] / double(n);
        }
        auto blend = [&](const std::vector<double>& from, double coeff) {
            std::vector<double> p(n);
            for (std::size_t i = 0; i < n; ++i) p[i] = centroid[i] + coeff * (centroid[i] - from[i]);
            return p;
        };

        auto reflected = blend(simplex[n], alpha);
        const double f_r = eval.cost(reflected, &diverged);
        if (diverged) return {reflected, f_r, true};

        if (f_r < costs[0]) {
            auto expanded = blend(simplex[n], gamma);
            const double f_e = eval.cost(expanded, &diverged);
            if (diverged) return {expanded, f_e, true};
            if (f_e < f_r) {
                simplex[n] = expanded;
                costs[n] = f_e;
            } else {
                simplex[n] = reflected;
                costs[n] = f_r;
            }
        } else if (f_r < costs[n - 1]) {
            simplex[n] = reflected;
            costs[n] = f_r;
        } else {
            auto contracted = blend(simplex[n], -rho);
            const double f_c = eval.cost(contracted, &diverged);
            if (diverged) return {contracted, f_c, true};
            if (f_c < costs[n]) {
                simplex[n] = contracted;
                costs[n] = f_c;
            } else {
                for (std::size_t v = 1; v <= n; ++v) {
                    for (std::size_t i = 0; i < n; ++i) {
                        simplex[v][i] = simplex[0][i] + sigma * (simplex[v][i] - simplex[0][i]);
                    }
                    costs[v] = eval.cost(simplex[v], &diverged);
                    if (diverged) return {simplex[v], costs[v], true};
                }
            }
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        if (costs[i] < costs[best]) best = i;
    }
    return {simplex[best], costs[best], false};
}

}  // namespace

OptimizeResult optimize_geometry(const FieldFactory& factory, GeometryObjective objective,
                                 std::span<const ParameterBounds> bounds,
                                 double evaluation_x) {
    if (bounds.empty() || bounds.size() > 8) {
        throw DomainError("optimize_geometry: between 1 and 8 free parameters are supported");
    }
    for (const auto& b : bounds) {
        if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || !(b.hi >= b.lo)) {
            throw DomainError("optimize_geometry: bounds for '" + b.name + "' are invalid");
        }
    }

    OptimizeResult result;
    Evaluator eval{factory, objective, evaluation_x, bounds, &result.trace};

    const std::size_t n = bounds.size();
    std::vector<std::vector<double>> seeds;
    std::vector<double> center(n), low(n), high(n), alt_lh(n), alt_hl(n);
    for (std::size_t i = 0; i < n; ++i) {
        center[i] = 0.5 * (bounds[i].lo + bounds[i].hi);
        low[i] = bounds[i].lo;
        high[i] = bounds[i].hi;
        alt_lh[i] = (i % 2 == 0) ? bounds[i].lo : bounds[i].hi;
        alt_hl[i] = (i % 2 == 0) ? bounds[i].hi : bounds[i].lo;
    }
    seeds = {center, low, high, alt_lh, alt_hl};

    NmRun best;
    best.cost = std::numeric_limits<double>::infinity();
    for (const auto& seed : seeds) {
        NmRun run = nelder_mead(eval, seed, bounds);
        if (run.diverged) {
            result.params = run.best;
            result.value = std::numeric_limits<double>::infinity();
            result.unbounded = true;
            result.bound_limited = true;
            result.has_nonfinite = true;
            result.nonfinite_params = run.best;
            return result;
        }
        if (run.cost < best.cost) best = run;
    }

    result.params = best.best;
    result.value = eval.maximizing() ? -best.cost : best.cost;
    for (std::size_t i = 0; i < n; ++i) {
        const double range = std::max(bounds[i].hi - bounds[i].lo, 1e-300);
        if (std::abs(result.params[i] - bounds[i].lo) < 1e-6 * range ||
            std::abs(result.params[i] - bounds[i].hi) < 1e-6 * range) {
            result.bound_limited = true;
        }
    }
    return result;
}

FieldFactory two_wire_parameter_factory(const TwoWireModel& base,
                                        std::vector<std::string> parameter_names) {
    enum class Field { HalfSeparation, IonHeight, U1, U2, QTot };
    std::vector<Field> mapping;
    for (const auto& name : parameter_names) {
        if (name == "half_separation") mapping.push_back(Field::HalfSeparation);
        else if (name == "ion_height") mapping.push_back(Field::IonHeight);
        else if (name == "u1") mapping.push_back(Field::U1);
        else if (name == "u2") mapping.push_back(Field::U2);
        else if (name == "q_tot") mapping.push_back(Field::QTot);
        else throw DomainError("two_wire_parameter_factory: unknown parameter '" + name + "'");
    }
    return [base, mapping](std::span<const double> params) {
        if (params.size() != mapping.size()) {
            throw DomainError("two_wire_parameter_factory: parameter count mismatch");
        }
        TwoWireModel m = base;
        for (std::size_t i = 0; i < mapping.size(); ++i) {
            switch (mapping[i]) {
                case Field::HalfSeparation: m.half_separation = params[i]; break;
                case Field::IonHeight: m.ion_height = params[i]; break;
                case Field::U1: m.u1_frac = params[i]; break;
                case Field::U2: m.u2_frac = params[i]; break;
                case Field::QTot: m.q_tot = params[i]; break;
            }
        }
        m.validate();
        return std::function<Phasor(double)>(
            [m](double x) { return two_wire_field(m, x); });
    };
}

}  // namespace mwtrap::fields
