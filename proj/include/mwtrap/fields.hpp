#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mwtrap/constants.hpp"
#include "mwtrap/phasor.hpp"

namespace mwtrap::fields {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const;
};

/// Straight wire segment carrying a complex current phasor from start to end.
struct WireSegment {
    Vec3 start;
    Vec3 end;
    Phasor current;  // A
};

/// Field-source model: an ordered set of wire segments plus metadata. The
/// power normalization records the input power the currents correspond to.
struct WireLayout {
    std::string name;
    double power_watts = 1.0;
    std::vector<WireSegment> segments;

    void validate() const;
};

struct PhasorVec3 {
    Phasor x, y, z;
};

/// Magnetic field phasor at one point, with accessors for the components
/// parallel (along x, the static-field axis) and perpendicular to it.
struct FieldSample {
    Vec3 position;
    PhasorVec3 b;  // T

    Phasor b_par() const { return b.x; }
    double b_perp() const;
};

/// Exact finite-segment Biot-Savart phasor sum over the layout. Points are
/// evaluated independently in input order with a fixed summation order over
/// segments, so results are deterministic and safe to compute concurrently.
/// Throws SingularityError when a point lies within 1 nm of a segment.
std::vector<FieldSample> bfield_at(const WireLayout& layout, std::span<const Vec3> points);

/// Two counter-propagating stub currents at x = -L and x = +L, a height d
/// below the ion, fed from a shorted line at electrode positions u1 and u2
/// (fractions of the wavelength, <= 0, short at 0).
struct TwoWireModel {
    double half_separation;  // L (m)
    double ion_height;       // d (m)
    double u1_frac;          // electrode position of wire 1, in units of lambda
    double u2_frac;          // electrode position of wire 2, in units of lambda
    double q_tot = constants::lossless_q;
    double wavelength;       // m
    Phasor drive_current{1.0, 0.0};  // i(0), A

    void validate() const;

    /// Paper-default geometry: 2L = 30 um, d = 40 um, u1 = -0.019, u2 = -0.056,
    /// wavelength at 3.12 GHz on the eps_eff = 5.5 line, lossless, 1 A drive.
    static TwoWireModel paper_defaults();

    /// Currents at the two electrode positions.
    Phasor current_1() const;
    Phasor current_2() const;
};

/// Parallel field component B_par(x) of the two-wire model:
/// mu0/(2*pi*d) * (i1*cos^2(theta1) - i2*cos^2(theta2)) with
/// theta1 = atan((L+x)/d), theta2 = atan((L-x)/d).
Phasor two_wire_field(const TwoWireModel& model, double x);

/// Convenience callable |B_par(x)| for minimum searches.
std::function<double(double)> two_wire_magnitude(const TwoWireModel& model);

struct MinimumResult {
    double x0;     // location of the minimum (m)
    double b_min;  // field magnitude at the minimum (T)
    bool unimodal_warning = false;  // interior samples suggest the profile is not unimodal
};

/// Golden-section search for the minimum of a unimodal field magnitude on
/// [lo, hi], to |dx| < 0.5 nm. Unimodality is the caller's responsibility; a
/// violation detected at termination sets the warning flag instead of failing.
MinimumResult find_field_minimum(const std::function<double(double)>& field_magnitude,
                                 double lo, double hi);

/// Complex field gradient by Richardson-extrapolated central differences with
/// step h = max(1 nm, 1e-6*|x|).
Phasor field_gradient(const std::function<Phasor(double)>& field, double x);

/// Lamb-Dicke parameter eta = q0 * gradient / amplitude with
/// q0 = sqrt(hbar / (2 * m * 2*pi*f)), the r.m.s. ground-state extent.
double lamb_dicke(double gradient_t_per_m, double b_amplitude_t, double ion_mass_kg,
                  double mode_frequency_hz);

/// Rectangular evaluation grid: nx x ny points spanning [x0,x1] x [y0,y1] at
/// fixed z, row-major in y then x. ny = 1 produces a transect.
std::vector<Vec3> grid_points(double x0, double x1, std::size_t nx, double y0, double y1,
                              std::size_t ny, double z);

// ---------------------------------------------------------------------------
// Geometry optimization

enum class GeometryObjective {
    MaximizeGradient,
    MinimizeAmplitude,
    MaximizeGradientToAmplitude,
};

struct ParameterBounds {
    std::string name;
    double lo;
    double hi;
};

struct ObjectiveSample {
    std::vector<double> params;
    double value;  // objective in the caller's sense (larger is better for maximize)
};

struct OptimizeResult {
    std::vector<double> params;
    double value;
    std::vector<ObjectiveSample> trace;  // every objective evaluation, in order
    bool bound_limited = false;   // optimum lies on a parameter bound
    bool unbounded = false;       // objective diverges (improvement is bound-limited only)
    bool has_nonfinite = false;   // an evaluation produced NaN/inf
    std::vector<double> nonfinite_params;  // where that happened
};

/// Maps a parameter vector to a field profile x -> B_par(x).
using FieldFactory =
    std::function<std::function<Phasor(double)>(std::span<const double>)>;

/// Deterministic Nelder-Mead over at most 8 parameters, run from the bound-box
/// center and four fixed corner seeds; returns the best run with the full
/// evaluation trace. The objective (gradient magnitude, field amplitude, or
/// their ratio) is evaluated at evaluation_x.
OptimizeResult optimize_geometry(const FieldFactory& factory, GeometryObjective objective,
                                 std::span<const ParameterBounds> bounds,
                                 double evaluation_x = 0.0);

/// FieldFactory over a TwoWireModel with the named fields free. Recognized
/// names: half_separation, ion_height, u1, u2, q_tot (SI units).
FieldFactory two_wire_parameter_factory(const TwoWireModel& base,
                                        std::vector<std::string> parameter_names);

}  // namespace mwtrap::fields
