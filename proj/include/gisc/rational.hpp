#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gisc/polynomial.hpp"
#include "gisc/roots.hpp"

namespace gisc {

/// Thrown when a rational function is evaluated at (or numerically on top
/// of) one of its poles. Carries the offending point.
class PoleError : public std::runtime_error {
  public:
    PoleError(Complex at, const std::string& what) : std::runtime_error(what), location_(at) {}
    [[nodiscard]] Complex location() const { return location_; }

  private:
    Complex location_;
};

/// Ratio of two complex-coefficient polynomials in s.
///
/// Canonical form maintained by every operation:
///   - den is never the zero polynomial,
///   - den leading coefficient is 1,
///   - num/den root pairs within the cancellation tolerance
///     |r_num - r_den| <= 1e-9 * max(1, |r_num|) are removed,
///   - the zero function is 0/1.
class RationalFunction {
  public:
    RationalFunction() : num_(Polynomial::zero()), den_(Polynomial::one()) {}

    RationalFunction(Polynomial num, Polynomial den) : num_(std::move(num)), den_(std::move(den)) {
        canonicalize();
    }

    static RationalFunction zero() { return {}; }
    static RationalFunction one() { return constant(Complex(1.0)); }
    static RationalFunction constant(Complex c) {
        return RationalFunction(Polynomial::constant(c), Polynomial::one());
    }
    static RationalFunction s() { return RationalFunction(Polynomial::s(), Polynomial::one()); }
    static RationalFunction from_poly(Polynomial p) {
        return RationalFunction(std::move(p), Polynomial::one());
    }

    [[nodiscard]] const Polynomial& num() const { return num_; }
    [[nodiscard]] const Polynomial& den() const { return den_; }
    [[nodiscard]] bool is_zero() const { return num_.is_zero(); }

    /// deg(den) - deg(num); >= 1 means strictly proper.
    [[nodiscard]] int relative_degree() const { return den_.degree() - num_.degree(); }

    /// num(s)/den(s) in Horner form. Throws PoleError when |den(s)| is
    /// negligible against its evaluation scale.
    [[nodiscard]] Complex eval(Complex s) const {
        Complex d = den_.eval(s);
        double scale = den_.eval_scale(s);
        if (std::abs(d) <= 1e-12 * scale)
            throw PoleError(s, "rational function evaluated at a pole");
        return num_.eval(s) / d;
    }

    [[nodiscard]] RationalFunction conj_coeffs() const {
        return RationalFunction(num_.conj_coeffs(), den_.conj_coeffs());
    }

    [[nodiscard]] bool has_real_coeffs(double rel_tol = 1e-10) const {
        return num_.has_real_coeffs(rel_tol) && den_.has_real_coeffs(rel_tol);
    }

    /// Drops imaginary coefficient parts, erroring if they are not
    /// negligible (relative tolerance 1e-10).
    [[nodiscard]] RationalFunction truncated_to_real() const {
        if (!has_real_coeffs())
            throw std::invalid_argument("truncated_to_real: coefficients are not real within tolerance");
        return RationalFunction(num_.real_part(), den_.real_part());
    }

    [[nodiscard]] std::vector<Complex> zeros() const {
        if (num_.is_zero() || num_.degree() == 0) return {};
        return poly_roots(num_);
    }

    [[nodiscard]] std::vector<Complex> poles() const {
        if (den_.degree() == 0) return {};
        return poly_roots(den_);
    }

    friend RationalFunction operator+(const RationalFunction& a, const RationalFunction& b) {
        return RationalFunction(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }

    friend RationalFunction operator-(const RationalFunction& a, const RationalFunction& b) {
        return RationalFunction(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
    }

    friend RationalFunction operator*(const RationalFunction& a, const RationalFunction& b) {
        return RationalFunction(a.num_ * b.num_, a.den_ * b.den_);
    }

    friend RationalFunction operator/(const RationalFunction& a, const RationalFunction& b) {
        if (b.is_zero())
            throw std::invalid_argument("rational division by the identically-zero function");
        return RationalFunction(a.num_ * b.den_, a.den_ * b.num_);
    }

    friend RationalFunction operator*(const RationalFunction& a, Complex k) {
        return RationalFunction(a.num_ * k, a.den_);
    }
    friend RationalFunction operator*(Complex k, const RationalFunction& a) { return a * k; }
    friend RationalFunction operator-(const RationalFunction& a) { return a * Complex(-1.0); }

    [[nodiscard]] RationalFunction inverse() const {
        if (is_zero()) throw std::invalid_argument("inverse of the identically-zero rational function");
        return RationalFunction(den_, num_);
    }

  private:
    void canonicalize() {
        if (den_.is_zero()) {
            throw std::invalid_argument("rational function denominator is the zero polynomial");
        }
        if (num_.is_zero()) {
            num_ = Polynomial::zero();
            den_ = Polynomial::one();
            return;
        }
        // Cancel paired num/den roots, then rescale to a monic denominator.
        if (num_.degree() >= 1 && den_.degree() >= 1) {
            std::vector<Complex> zn = poly_roots(num_);
            std::vector<Complex> zd = poly_roots(den_);
            bool cancelled = false;
            for (auto it = zn.begin(); it != zn.end();) {
                bool hit = false;
                for (auto jt = zd.begin(); jt != zd.end(); ++jt) {
                    if (std::abs(*it - *jt) <= 1e-9 * std::max(1.0, std::abs(*it))) {
                        zd.erase(jt);
                        it = zn.erase(it);
                        hit = true;
                        cancelled = true;
                        break;
                    }
                }
                if (!hit) ++it;
            }
            if (cancelled) {
                num_ = Polynomial::from_roots(zn, num_.leading());
                den_ = Polynomial::from_roots(zd, den_.leading());
            }
        }
        Complex lead = den_.leading();
        num_ = num_ * (Complex(1.0) / lead);
        den_ = den_ * (Complex(1.0) / lead);
    }

    Polynomial num_;
    Polynomial den_;
};

/// Pointwise-equality test: |n_a d_b - n_b d_a| small relative to the
/// coefficient scale of both cross products.
inline bool approx_equal(const RationalFunction& a, const RationalFunction& b, double rel_tol = 1e-9) {
    Polynomial lhs = a.num() * b.den();
    Polynomial rhs = b.num() * a.den();
    Polynomial diff = lhs - rhs;
    double scale = std::max(lhs.max_coeff_magnitude(), rhs.max_coeff_magnitude());
    return diff.max_coeff_magnitude() <= rel_tol * std::max(1.0, scale);
}

enum class RfArithKind { add, sub, mul, div };

/// Dispatch form of the four arithmetic operations (canonical result).
inline RationalFunction rf_arith(const RationalFunction& a, const RationalFunction& b, RfArithKind kind) {
    switch (kind) {
        case RfArithKind::add: return a + b;
        case RfArithKind::sub: return a - b;
        case RfArithKind::mul: return a * b;
        case RfArithKind::div: return a / b;
    }
    throw std::logic_error("rf_arith: bad kind");
}

}  // namespace gisc
