#pragma once

#include <functional>
#include <span>
#include <vector>

namespace mwtrap::levmar {

/// Residual vector at a parameter point. The fit minimizes the sum of squares.
using ResidualFn = std::function<std::vector<double>(std::span<const double>)>;

struct Options {
    int max_iterations = 500;
    double step_tolerance = 1e-10;  // relative proposed-step size that counts as converged
    double lambda0 = 1e-3;          // initial Marquardt damping
};

struct Result {
    std::vector<double> params;
    double rms = 0.0;                   // sqrt(SSR / m)
    std::vector<double> stderrs;        // per-parameter, from the Jacobian at the solution
    int iterations = 0;
    std::vector<std::vector<double>> trace;  // accepted iterates: params..., ssr
};

/// Dense Levenberg-Marquardt with a forward-difference Jacobian. `scales`
/// sets the differentiation step (1e-7 * scale) and the step-size metric per
/// parameter; every entry must be positive. Deterministic. Throws
/// ConvergenceError carrying the iterate trace when max_iterations is reached.
Result fit(const ResidualFn& residuals, std::vector<double> initial,
           std::vector<double> scales, const Options& options = {});

}  // namespace mwtrap::levmar
