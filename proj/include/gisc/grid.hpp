#pragma once

#include <array>
#include <cmath>
#include <complex>

#include "gisc/params.hpp"
#include "gisc/rational.hpp"

namespace gisc {

/// 2x2 rational matrix [[a, -b], [b, a]], isomorphic to the complex function
/// a(s) + j b(s). The parts a and b are kept as real-coefficient rational
/// functions; sums and products of SwingMatrix values follow complex
/// arithmetic entrywise.
struct SwingMatrix {
    RationalFunction a;
    RationalFunction b;

    static SwingMatrix zero() { return {RationalFunction::zero(), RationalFunction::zero()}; }
    static SwingMatrix identity() { return {RationalFunction::one(), RationalFunction::zero()}; }

    [[nodiscard]] bool is_zero() const { return a.is_zero() && b.is_zero(); }

    /// The equivalent complex-coefficient scalar a + j b.
    [[nodiscard]] RationalFunction complex_form() const {
        return a + Complex(0.0, 1.0) * b;
    }

    [[nodiscard]] RationalFunction m11() const { return a; }
    [[nodiscard]] RationalFunction m12() const { return -b; }
    [[nodiscard]] RationalFunction m21() const { return b; }
    [[nodiscard]] RationalFunction m22() const { return a; }

    /// Entrywise evaluation at s, row-major.
    [[nodiscard]] std::array<Complex, 4> eval(Complex s) const {
        Complex av = a.eval(s);
        Complex bv = b.eval(s);
        return {av, -bv, bv, av};
    }

    friend SwingMatrix operator+(const SwingMatrix& x, const SwingMatrix& y) {
        return {x.a + y.a, x.b + y.b};
    }

    friend SwingMatrix operator*(const SwingMatrix& x, const SwingMatrix& y) {
        return {x.a * y.a - x.b * y.b, x.a * y.b + x.b * y.a};
    }
};

namespace detail {

/// Swing parts of e^{j phi} * base where base has real coefficients times
/// (s - j w) or (s + j w) style factors already split by the caller.
inline SwingMatrix rotate_split(const RationalFunction& re_part, const RationalFunction& im_part,
                                double phi) {
    const double c = std::cos(phi);
    const double sn = std::sin(phi);
    // e^{j phi} (re + j im) = (c re - s im) + j (s re + c im)
    return {Complex(c) * re_part - Complex(sn) * im_part,
            Complex(sn) * re_part + Complex(c) * im_part};
}

}  // namespace detail

/// Line/transformer branch admittance in polar coordinates:
/// (1 / (l (s^2 + w^2))) [[s, w], [-w, s]] R(phi_line), i.e. the complex form
/// e^{j phi_line} / (l (s + j w)) with l = l_line_pu / w0 and w = w0.
inline SwingMatrix build_line_admittance(const GridParams& grid, const OperatingPoint& op) {
    const double w0 = grid.omega0();
    const double l = grid.l_line_pu / w0;
    Polynomial den({Complex(l * w0 * w0), Complex(0.0), Complex(l)});  // l (s^2 + w^2)
    RationalFunction re(Polynomial({Complex(0.0), Complex(1.0)}), den);   // s / (l(s^2+w^2))
    RationalFunction im(Polynomial({Complex(-w0)}), den);                 // -w / (l(s^2+w^2))
    return detail::rotate_split(re, im, op.phi_line);
}

/// Filter-capacitor branch admittance: c (s + j w) e^{j phi_c} with
/// c = c_f_pu / w0; the zero matrix when c_f_pu == 0.
inline SwingMatrix build_cap_admittance(const GridParams& grid, const OperatingPoint& op) {
    if (grid.c_f_pu == 0.0) return SwingMatrix::zero();
    const double w0 = grid.omega0();
    const double c = grid.c_f_pu / w0;
    RationalFunction re = RationalFunction::from_poly(Polynomial({Complex(0.0), Complex(c)}));
    RationalFunction im = RationalFunction::constant(Complex(c * w0));
    return detail::rotate_split(re, im, op.phi_c);
}

/// Y = Y_line + Y_cap, canonicalized entrywise.
inline SwingMatrix total_network_admittance(const SwingMatrix& line, const SwingMatrix& cap) {
    return line + cap;
}

}  // namespace gisc
