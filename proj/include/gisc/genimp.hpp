#pragma once

#include <array>
#include <stdexcept>

#include "gisc/grid.hpp"
#include "gisc/rational.hpp"
#include "gisc/vsc.hpp"

namespace gisc {

/// The unitary change of basis diagonalizing swing-structured matrices:
/// T [[a, -b], [b, a]] T^{-1} = diag(a + jb, a - jb).
inline std::array<Complex, 4> t_transform() {
    const double r = 1.0 / std::sqrt(2.0);
    return {Complex(r), Complex(0.0, r), Complex(r), Complex(0.0, -r)};
}

inline std::array<Complex, 4> t_transform_inverse() {
    const double r = 1.0 / std::sqrt(2.0);
    return {Complex(r), Complex(r), Complex(0.0, -r), Complex(0.0, r)};
}

/// Diagonal entries of T M T^{-1}: the positive/negative sequence
/// admittances (y_plus, y_minus) = (a + jb, a - jb).
struct SequencePair {
    RationalFunction y_plus;
    RationalFunction y_minus;
};

inline SequencePair sequence_decompose(const SwingMatrix& m) {
    const Complex j(0.0, 1.0);
    return {m.a + j * m.b, m.a - j * m.b};
}

enum class TripleOwner { vsc, grid };

/// Scalar admittances extracted from the structured polar matrix
/// [[A, -C], [C, D]]: (D - A, A + jC, A - jC). Impedances are exact
/// reciprocals of the nonzero entries.
struct GeneralizedTriple {
    RationalFunction yg1;
    RationalFunction yg2;
    RationalFunction yg3;
    TripleOwner owner = TripleOwner::grid;

    [[nodiscard]] RationalFunction zg1() const { return yg1.inverse(); }
    [[nodiscard]] RationalFunction zg2() const { return yg2.inverse(); }
    [[nodiscard]] RationalFunction zg3() const { return yg3.inverse(); }
};

inline GeneralizedTriple generalized_triple(const PolarAdmittanceMatrix& m,
                                            TripleOwner owner = TripleOwner::grid) {
    if (!m.eq4_structure_ok())
        throw std::invalid_argument(
            "generalized_triple: matrix violates the required structure, m12 + m21 != 0 "
            "(off-diagonal entries are not antisymmetric)");
    const Complex j(0.0, 1.0);
    const RationalFunction& A = m.m11;
    const RationalFunction& C = m.m21;
    const RationalFunction& D = m.m22;
    return {D - A, A + j * C, A - j * C, owner};
}

inline GeneralizedTriple generalized_triple(const SwingMatrix& m) {
    const Complex j(0.0, 1.0);
    return {RationalFunction::zero(), m.a + j * m.b, m.a - j * m.b, TripleOwner::grid};
}

/// Series equivalent-circuit impedance 2 Z_g1_vsc + Z_g2_grid + Z_g3_grid.
/// Its zeros coincide with the roots of 1 + Y_g (Z+ + Z-)/2 = 0.
inline RationalFunction series_resonance_impedance(const GeneralizedTriple& vsc_triple,
                                                   const GeneralizedTriple& grid_triple) {
    if (vsc_triple.yg1.is_zero())
        throw std::invalid_argument("series_resonance_impedance: converter admittance is identically zero "
                                    "(criterion not applicable, passive converter)");
    if (grid_triple.yg2.is_zero() || grid_triple.yg3.is_zero())
        throw std::invalid_argument("series_resonance_impedance: grid sequence admittance is identically zero");
    return Complex(2.0) * vsc_triple.zg1() + grid_triple.zg2() + grid_triple.zg3();
}

}  // namespace gisc
