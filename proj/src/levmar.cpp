#include "mwtrap/levmar.hpp"

#include <cmath>
#include <string>

#include "mwtrap/errors.hpp"

namespace mwtrap::levmar {

namespace {

double sum_of_squares(const std::vector<double>& r) {
    double s = 0.0;
    for (double v : r) s += v * v;
    return s;
}

// Solve A x = b for symmetric positive-ish A by Gaussian elimination with
// partial pivoting. A and b are overwritten. Returns false when singular.
bool solve_inplace(std::vector<std::vector<double>>& a, std::vector<double>& b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < n; ++row) {
            if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
        }
        if (a[pivot][col] == 0.0) return false;
        std::swap(a[pivot], a[col]);
        std::swap(b[pivot], b[col]);
        for (std::size_t row = col + 1; row < n; ++row) {
            const double f = a[row][col] / a[col][col];
            for (std::size_t k = col; k < n; ++k) a[row][k] -= f * a[col][k];
            b[row] -= f * b[col];
        }
    }
    for (std::size_t col = n; col-- > 0;) {
        for (std::size_t k = col + 1; k < n; ++k) b[col] -= a[col][k] * b[k];
        b[col] /= a[col][col];
    }
    return true;
}

}  // namespace

Result fit(const ResidualFn& residuals, std::vector<double> params,
           std::vector<double> scales, const Options& opt) {
    const std::size_t n = params.size();
    if (n == 0 || scales.size() != n) {
        throw DomainError("levmar: parameter and scale vectors must be non-empty and match");
    }
    for (double s : scales) {
        if (!(s > 0.0)) throw DomainError("levmar: scales must be positive");
    }

    std::vector<double> r = residuals(params);
    const std::size_t m = r.size();
    if (m == 0) throw DomainError("levmar: residual vector is empty");
    double ssr = sum_of_squares(r);

    std::vector<std::vector<double>> jac(m, std::vector<double>(n));
    auto compute_jacobian = [&](const std::vector<double>& p, const std::vector<double>& r0) {
        std::vector<double> probe = p;
        for (std::size_t j = 0; j < n; ++j) {
            const double h = 1e-7 * scales[j];
            probe[j] = p[j] + h;
            const std::vector<double> rj = residuals(probe);
            probe[j] = p[j];
            for (std::size_t i = 0; i < m; ++i) jac[i][j] = (rj[i] - r0[i]) / h;
        }
    };

    Result result;
    auto record = [&](const std::vector<double>& p, double s) {
        std::vector<double> row = p;
        row.push_back(s);
        result.trace.push_back(std::move(row));
    };
    record(params, ssr);

    double lambda = opt.lambda0;
    bool converged = (ssr == 0.0);
    int iterations = 0;
    bool jacobian_fresh = false;

    while (!converged && iterations < opt.max_iterations) {
        ++iterations;
        if (!jacobian_fresh) {
            compute_jacobian(params, r);
            jacobian_fresh = true;
        }

        // Normal equations with Marquardt damping on the diagonal.
        std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
        std::vector<double> g(n, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                g[j] += jac[i][j] * r[i];
                for (std::size_t k = j; k < n; ++k) a[j][k] += jac[i][j] * jac[i][k];
            }
        }
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < j; ++k) a[j][k] = a[k][j];
        }
        double diag_floor = 0.0;
        for (std::size_t j = 0; j < n; ++j) diag_floor = std::max(diag_floor, a[j][j]);
        diag_floor = std::max(diag_floor * 1e-14, 1e-300);
        for (std::size_t j = 0; j < n; ++j) {
            a[j][j] += lambda * std::max(a[j][j], diag_floor);
        }
        std::vector<double> delta = g;
        if (!solve_inplace(a, delta)) {
            lambda *= 10.0;
            continue;
        }

        double step = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            step = std::max(step, std::abs(delta[j]) / std::max(std::abs(params[j]), scales[j]));
        }
        if (step < opt.step_tolerance) {
            converged = true;
            break;
        }

        std::vector<double> candidate = params;
        for (std::size_t j = 0; j < n; ++j) candidate[j] -= delta[j];
        const std::vector<double> r_new = residuals(candidate);
        const double ssr_new = sum_of_squares(r_new);

        if (ssr_new < ssr) {
            params = std::move(candidate);
            r = r_new;
            ssr = ssr_new;
            lambda = std::max(lambda * 0.1, 1e-12);
            jacobian_fresh = false;
            record(params, ssr);
            if (ssr == 0.0) converged = true;
        } else {
            lambda *= 10.0;
            if (lambda > 1e14) {
                // Damping saturated: no direction improves beyond round-off.
                converged = true;
            }
        }
    }

    if (!converged) {
        throw ConvergenceError("levmar: no convergence after " +
                                   std::to_string(opt.max_iterations) + " iterations",
                               params, result.trace);
    }

    result.params = params;
    result.iterations = iterations;
    result.rms = std::sqrt(ssr / double(m));

    // Standard errors from the undamped normal matrix at the solution.
    compute_jacobian(params, r);
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = j; k < n; ++k) a[j][k] += jac[i][j] * jac[i][k];
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < j; ++k) a[j][k] = a[k][j];
    }
    result.stderrs.assign(n, 0.0);
    if (m > n) {
        const double variance = ssr / double(m - n);
        for (std::size_t j = 0; j < n; ++j) {
            auto a_copy = a;
            std::vector<double> e(n, 0.0);
            e[j] = 1.0;
            if (solve_inplace(a_copy, e) && e[j] > 0.0) {
                result.stderrs[j] = std::sqrt(variance * e[j]);
            }
        }
    }
    return result;
}

}  // namespace mwtrap::levmar
