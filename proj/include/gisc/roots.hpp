#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <stdexcept>
#include <vector>

#include "gisc/polynomial.hpp"

namespace gisc {

/// All deg(p) roots via the balanced complex companion matrix, with a couple
/// of Newton polish steps. Roots are sorted by real part, then imaginary
/// part. Degree-0 polynomials return an empty list; the zero polynomial is
/// an error.
inline std::vector<Complex> poly_roots(const Polynomial& p) {
    if (p.is_zero()) throw std::invalid_argument("poly_roots: zero polynomial has no well-defined roots");
    const int n = p.degree();
    if (n == 0) return {};

    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(n, n);
    const Complex lead = p.leading();
    for (int i = 0; i < n; ++i) {
        companion(i, n - 1) = -p.coeff(i) / lead;
        if (i > 0) companion(i, i - 1) = Complex(1.0);
    }

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("poly_roots: companion eigenvalue iteration failed to converge");

    std::vector<Complex> roots(static_cast<std::size_t>(n));
    const Polynomial dp = p.derivative();
    for (int i = 0; i < n; ++i) {
        Complex r = solver.eigenvalues()(i);
        for (int it = 0; it < 2; ++it) {
            Complex d = dp.eval(r);
            if (std::abs(d) < 1e-30) break;
            Complex step = p.eval(r) / d;
            if (!std::isfinite(std::abs(step)) || std::abs(step) > 0.1 * std::max(1.0, std::abs(r))) break;
            r -= step;
        }
        roots[static_cast<std::size_t>(i)] = r;
    }
    std::sort(roots.begin(), roots.end(), [](const Complex& a, const Complex& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return roots;
}

}  // namespace gisc
