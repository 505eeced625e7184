#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace gisc {

using Complex = std::complex<double>;

/// Dense polynomial in the Laplace variable s with complex coefficients,
/// stored in ascending powers. Canonical form: no near-zero leading
/// coefficients (relative to the largest coefficient magnitude); the zero
/// polynomial is the empty coefficient list with degree() == -1.
class Polynomial {
  public:
    Polynomial() = default;

    explicit Polynomial(std::vector<Complex> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

    Polynomial(std::initializer_list<Complex> coeffs) : coeffs_(coeffs) { trim(); }

    static Polynomial zero() { return Polynomial{}; }
    static Polynomial one() { return Polynomial{{Complex(1.0, 0.0)}}; }
    static Polynomial constant(Complex c) { return Polynomial{{c}}; }

    /// Monomial s (degree 1, unit leading coefficient).
    static Polynomial s() { return Polynomial{{Complex(0.0), Complex(1.0)}}; }

    /// Monic polynomial with the given roots, optionally scaled by `lead`.
    static Polynomial from_roots(const std::vector<Complex>& roots, Complex lead = Complex(1.0)) {
        Polynomial p = constant(lead);
        for (const Complex& r : roots) {
            p = p * Polynomial{{-r, Complex(1.0)}};
        }
        return p;
    }

    [[nodiscard]] bool is_zero() const { return coeffs_.empty(); }
    [[nodiscard]] int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    [[nodiscard]] const std::vector<Complex>& coeffs() const { return coeffs_; }

    [[nodiscard]] Complex coeff(std::size_t k) const {
        return k < coeffs_.size() ? coeffs_[k] : Complex(0.0);
    }

    [[nodiscard]] Complex leading() const {
        return coeffs_.empty() ? Complex(0.0) : coeffs_.back();
    }

    [[nodiscard]] double max_coeff_magnitude() const {
        double m = 0.0;
        for (const Complex& c : coeffs_) m = std::max(m, std::abs(c));
        return m;
    }

    /// Horner evaluation.
    [[nodiscard]] Complex eval(Complex s) const {
        Complex acc(0.0);
        for (std::size_t k = coeffs_.size(); k-- > 0;) acc = acc * s + coeffs_[k];
        return acc;
    }

    /// Magnitude bound sum |c_k| |s|^k used as the evaluation scale.
    [[nodiscard]] double eval_scale(Complex s) const {
        double as = std::abs(s);
        double acc = 0.0;
        for (std::size_t k = coeffs_.size(); k-- > 0;) acc = acc * as + std::abs(coeffs_[k]);
        return acc;
    }

    [[nodiscard]] Polynomial derivative() const {
        if (coeffs_.size() <= 1) return zero();
        std::vector<Complex> d(coeffs_.size() - 1);
        for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = coeffs_[k] * double(k);
        return Polynomial(std::move(d));
    }

    /// Every coefficient conjugated: result(s) == conj(this(conj(s))).
    [[nodiscard]] Polynomial conj_coeffs() const {
        std::vector<Complex> c(coeffs_.size());
        for (std::size_t k = 0; k < coeffs_.size(); ++k) c[k] = std::conj(coeffs_[k]);
        return Polynomial(std::move(c));
    }

    [[nodiscard]] bool has_real_coeffs(double rel_tol = 1e-10) const {
        double scale = max_coeff_magnitude();
        for (const Complex& c : coeffs_)
            if (std::abs(c.imag()) > rel_tol * std::max(1e-300, scale)) return false;
        return true;
    }

    /// Drops imaginary parts. Caller checks has_real_coeffs first.
    [[nodiscard]] Polynomial real_part() const {
        std::vector<Complex> c(coeffs_.size());
        for (std::size_t k = 0; k < coeffs_.size(); ++k) c[k] = Complex(coeffs_[k].real(), 0.0);
        return Polynomial(std::move(c));
    }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        std::vector<Complex> c(std::max(a.coeffs_.size(), b.coeffs_.size()), Complex(0.0));
        for (std::size_t k = 0; k < a.coeffs_.size(); ++k) c[k] += a.coeffs_[k];
        for (std::size_t k = 0; k < b.coeffs_.size(); ++k) c[k] += b.coeffs_[k];
        return Polynomial(std::move(c));
    }

    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
        std::vector<Complex> c(std::max(a.coeffs_.size(), b.coeffs_.size()), Complex(0.0));
        for (std::size_t k = 0; k < a.coeffs_.size(); ++k) c[k] += a.coeffs_[k];
        for (std::size_t k = 0; k < b.coeffs_.size(); ++k) c[k] -= b.coeffs_[k];
        return Polynomial(std::move(c));
    }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        if (a.is_zero() || b.is_zero()) return zero();
        std::vector<Complex> c(a.coeffs_.size() + b.coeffs_.size() - 1, Complex(0.0));
        for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
            for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
        return Polynomial(std::move(c));
    }

    friend Polynomial operator*(const Polynomial& a, Complex k) {
        std::vector<Complex> c(a.coeffs_);
        for (Complex& x : c) x *= k;
        return Polynomial(std::move(c));
    }

    friend Polynomial operator*(Complex k, const Polynomial& a) { return a * k; }

    friend Polynomial operator-(const Polynomial& a) { return a * Complex(-1.0); }

  private:
    void trim() {
        double scale = 0.0;
        for (const Complex& c : coeffs_) scale = std::max(scale, std::abs(c));
        const double tol = 1e-12 * scale;
        while (!coeffs_.empty() && std::abs(coeffs_.back()) <= tol) coeffs_.pop_back();
    }

    std::vector<Complex> coeffs_;
};

}  // namespace gisc
