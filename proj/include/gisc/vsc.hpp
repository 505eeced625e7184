#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "gisc/grid.hpp"
#include "gisc/params.hpp"
#include "gisc/rational.hpp"

namespace gisc {

/// 2x2 rational matrix mapping (dU, U*d_delta) to (dI, I*d_phi).
struct PolarAdmittanceMatrix {
    RationalFunction m11, m12, m21, m22;

    /// Antisymmetric off-diagonal (m12 + m21 == 0 within tolerance), which
    /// both the converter model (off-diagonals zero) and the network swing
    /// form satisfy.
    [[nodiscard]] bool eq4_structure_ok(double rel_tol = 1e-9) const {
        RationalFunction sum = m12 + m21;
        if (sum.is_zero()) return true;
        double scale = std::max({m12.num().max_coeff_magnitude(), m21.num().max_coeff_magnitude(), 1.0});
        return sum.num().max_coeff_magnitude() <= rel_tol * scale;
    }
};

/// Steady-state phasor solution of the single-branch LCL network with the
/// converter current held at (id_ref + j iq_ref) in a frame aligned with the
/// PCC voltage. Closed form: writing the source voltage in that frame,
///   U_g e^{-j delta0} = U0 (1 - l c) + l iq_ref - j l id_ref,
/// the real part follows from the magnitude constraint and everything else
/// unwinds from it.
inline OperatingPoint solve_operating_point(const VscParams& vsc, const GridParams& grid) {
    vsc.validate();
    grid.validate();
    const double l = grid.l_line_pu;
    const double c = grid.c_f_pu;
    const double ug = grid.u_grid_pu;

    const double beta = l * vsc.id_ref;
    const double disc = ug * ug - beta * beta;
    if (disc <= 0.0)
        throw std::runtime_error("operating point: no steady-state solution, |l_line_pu * id_ref| >= u_grid_pu (residual " +
                                 std::to_string(beta * beta - ug * ug) + ")");
    if (std::abs(1.0 - l * c) < 1e-12)
        throw std::runtime_error("operating point: network is at exact parallel resonance at the base frequency (l_line_pu * c_f_pu == 1)");

    const double alpha = std::sqrt(disc);
    OperatingPoint op;
    op.u0 = (alpha - l * vsc.iq_ref) / (1.0 - l * c);
    if (!(op.u0 > 0.0))
        throw std::runtime_error("operating point: solved PCC voltage is not positive");
    op.delta0 = std::atan2(beta, alpha);
    op.phi0 = wrap_angle(op.delta0 + std::atan2(vsc.iq_ref, vsc.id_ref));
    op.i0 = std::hypot(vsc.id_ref, vsc.iq_ref);
    // Power-factor angle at the PCC node for the grid-side current convention
    // of the admittance models (net branch current measured into the node).
    op.phi_line = wrap_angle(op.delta0 - op.phi0 + std::numbers::pi);
    op.phi_c = op.phi_line;

    // Kirchhoff residual of the reconstructed phasors.
    const Complex u = Complex(op.u0) * std::exp(Complex(0.0, op.delta0));
    const Complex i = Complex(op.i0) * std::exp(Complex(0.0, op.phi0));
    const Complex i_line = i - Complex(0.0, c) * u;
    const Complex u_src = u - Complex(0.0, l) * i_line;
    if (std::abs(u_src - Complex(ug)) > 1e-9)
        throw std::runtime_error("operating point: Kirchhoff residual " + std::to_string(std::abs(u_src - Complex(ug))));
    return op;
}

struct VscAdmittance {
    RationalFunction yg;
    PolarAdmittanceMatrix matrix;
};

/// Closed-form converter admittance
///   Y_g(s) = G_i(s) G_pll(s) I_0 / [(G_i(s) + L_f s)(1 + G_pll(s) U_0)]
/// with the 1/s powers cleared:
///   Y_g(s) = I_0 (kp_i s + ki_i)(kp_pll s + ki_pll)
///            / [(L_f s^2 + kp_i s + ki_i)(s^2 + U_0 kp_pll s + U_0 ki_pll)].
/// The polar matrix is [[0,0],[0,Y_g]].
inline VscAdmittance build_vsc_admittance(const VscParams& vsc, const OperatingPoint& op) {
    const double lf = vsc.lf_pu / vsc.omega0();
    VscAdmittance out;
    if (op.i0 == 0.0) {
        out.yg = RationalFunction::zero();
    } else {
        Polynomial num = Polynomial({Complex(vsc.ki_i), Complex(vsc.kp_i)}) *
                         Polynomial({Complex(vsc.ki_pll), Complex(vsc.kp_pll)}) * Complex(op.i0);
        Polynomial den = Polynomial({Complex(vsc.ki_i), Complex(vsc.kp_i), Complex(lf)}) *
                         Polynomial({Complex(op.u0 * vsc.ki_pll), Complex(op.u0 * vsc.kp_pll), Complex(1.0)});
        out.yg = RationalFunction(std::move(num), std::move(den));
    }
    out.matrix = {RationalFunction::zero(), RationalFunction::zero(), RationalFunction::zero(), out.yg};
    return out;
}

/// Converter states in the PLL dq frame: the PLL angle (relative to the grid
/// synchronous frame) and integrator, the current-controller integrators,
/// and the filter currents.
struct VscState {
    double theta_pll = 0.0;
    double pll_integrator = 0.0;
    double ccl_integrator_d = 0.0;
    double ccl_integrator_q = 0.0;
    double i_d = 0.0;
    double i_q = 0.0;

    static constexpr int size = 6;

    [[nodiscard]] std::array<double, size> as_array() const {
        return {theta_pll, pll_integrator, ccl_integrator_d, ccl_integrator_q, i_d, i_q};
    }
    static VscState from_array(const std::array<double, size>& x) {
        return {x[0], x[1], x[2], x[3], x[4], x[5]};
    }
};

/// Converter voltage commanded by the current controller (reference equals
/// output, zero converter delay). Decoupling terms use the nominal speed w0.
inline Complex vsc_bridge_voltage_dq(const VscState& st, Complex u_dq, const VscParams& p) {
    const double lf = p.lf_pu / p.omega0();
    const double usd = p.kp_i * (p.id_ref - st.i_d) + st.ccl_integrator_d + u_dq.real() -
                       p.omega0() * lf * st.i_q;
    const double usq = p.kp_i * (p.iq_ref - st.i_q) + st.ccl_integrator_q + u_dq.imag() +
                       p.omega0() * lf * st.i_d;
    return {usd, usq};
}

/// Nonlinear converter dynamics. The PCC voltage arrives in the grid
/// synchronous (xy) frame; the plant cross-coupling uses the instantaneous
/// PLL speed w0 + d(theta_pll)/dt.
inline VscState vsc_dynamics_rhs(const VscState& st, Complex pcc_voltage_xy, const VscParams& p) {
    const double lf = p.lf_pu / p.omega0();
    const Complex u_dq = pcc_voltage_xy * std::exp(Complex(0.0, -st.theta_pll));
    const double uq = u_dq.imag();

    VscState d;
    d.pll_integrator = uq;
    d.theta_pll = p.kp_pll * uq + p.ki_pll * st.pll_integrator;
    d.ccl_integrator_d = p.ki_i * (p.id_ref - st.i_d);
    d.ccl_integrator_q = p.ki_i * (p.iq_ref - st.i_q);

    const Complex us = vsc_bridge_voltage_dq(st, u_dq, p);
    const double w = p.omega0() + d.theta_pll;
    d.i_d = (us.real() - u_dq.real()) / lf + w * st.i_q;
    d.i_q = (us.imag() - u_dq.imag()) / lf - w * st.i_d;
    return d;
}

/// Converter current phasor in the xy frame.
inline Complex vsc_current_xy(const VscState& st) {
    return Complex(st.i_d, st.i_q) * std::exp(Complex(0.0, st.theta_pll));
}

/// Converter equilibrium for a locked PLL at the given operating point.
inline VscState vsc_equilibrium(const VscParams& p, const OperatingPoint& op) {
    VscState st;
    st.theta_pll = op.delta0;
    st.i_d = p.id_ref;
    st.i_q = p.iq_ref;
    return st;
}

namespace detail {

/// Central difference with one Richardson extrapolation level. Errors out
/// when the two step estimates disagree wildly (non-smooth target).
template <typename F>
double richardson_derivative(F&& f, double x, double scale_hint) {
    const double h = 1e-6 * std::max(1.0, std::abs(x));
    const double g1 = (f(x + h) - f(x - h)) / (2.0 * h);
    const double g2 = (f(x + 0.5 * h) - f(x - 0.5 * h)) / h;
    const double refined = (4.0 * g2 - g1) / 3.0;
    const double disagreement = std::abs(g2 - g1);
    if (disagreement > 1e-2 * std::max(scale_hint, std::abs(refined)) + 1e-6)
        throw std::runtime_error("finite-difference step failed to converge (Richardson disagreement " +
                                 std::to_string(disagreement) + ")");
    return refined;
}

}  // namespace detail

/// Finite-difference linearization of the converter-only subsystem as a
/// two-input ((dU, U d_delta), PCC polar perturbation) two-output
/// ((dI, I d_phi)) state-space model, evaluated as a frequency response at
/// the requested s points. For a consistent operating point this reproduces
/// [[0, 0], [0, Y_g(s)]].
inline std::vector<std::array<Complex, 4>> numeric_admittance_scan(const VscParams& vsc,
                                                                   const OperatingPoint& op,
                                                                   const std::vector<Complex>& s_points) {
    constexpr int n = VscState::size;
    const VscState eq = vsc_equilibrium(vsc, op);
    const std::array<double, n> x0 = eq.as_array();

    const auto input_voltage = [&](double du, double u_ddelta) {
        const double mag = op.u0 + du;
        const double ang = op.delta0 + u_ddelta / op.u0;
        return Complex(mag) * std::exp(Complex(0.0, ang));
    };

    const auto rhs_vec = [&](const std::array<double, n>& x, double du, double u_dd) {
        VscState st = VscState::from_array(x);
        VscState d = vsc_dynamics_rhs(st, input_voltage(du, u_dd), vsc);
        return d.as_array();
    };

    const auto output_vec = [&](const std::array<double, n>& x) {
        Complex i = vsc_current_xy(VscState::from_array(x));
        return std::array<double, 2>{std::abs(i) - op.i0,
                                     op.i0 == 0.0 ? 0.0 : op.i0 * wrap_angle(std::arg(i) - op.phi0)};
    };

    // Residual at the base point must be an equilibrium.
    {
        auto r = rhs_vec(x0, 0.0, 0.0);
        for (double v : r)
            if (std::abs(v) > 1e-8)
                throw std::runtime_error("numeric_admittance_scan: base point is not an equilibrium");
    }

    Eigen::MatrixXd A(n, n), B(n, 2), C(2, n), D(2, 2);
    for (int k = 0; k < n; ++k) {
        for (int row = 0; row < n; ++row) {
            A(row, k) = detail::richardson_derivative(
                [&](double v) {
                    auto x = x0;
                    x[static_cast<std::size_t>(k)] = v;
                    return rhs_vec(x, 0.0, 0.0)[static_cast<std::size_t>(row)];
                },
                x0[static_cast<std::size_t>(k)], 1e3);
        }
        for (int row = 0; row < 2; ++row) {
            C(row, k) = detail::richardson_derivative(
                [&](double v) {
                    auto x = x0;
                    x[static_cast<std::size_t>(k)] = v;
                    return output_vec(x)[static_cast<std::size_t>(row)];
                },
                x0[static_cast<std::size_t>(k)], 1.0);
        }
    }
    for (int in = 0; in < 2; ++in) {
        for (int row = 0; row < n; ++row) {
            B(row, in) = detail::richardson_derivative(
                [&](double v) {
                    double du = in == 0 ? v : 0.0;
                    double udd = in == 1 ? v : 0.0;
                    return rhs_vec(x0, du, udd)[static_cast<std::size_t>(row)];
                },
                0.0, 1e3);
        }
    }
    // The measured current depends on the states only: no direct feedthrough.
    D.setZero();

    std::vector<std::array<Complex, 4>> result;
    result.reserve(s_points.size());
    Eigen::MatrixXcd Ac = A.cast<Complex>();
    Eigen::MatrixXcd Bc = B.cast<Complex>();
    Eigen::MatrixXcd Cc = C.cast<Complex>();
    Eigen::MatrixXcd Dc = D.cast<Complex>();
    for (Complex s : s_points) {
        Eigen::MatrixXcd M = s * Eigen::MatrixXcd::Identity(n, n) - Ac;
        Eigen::MatrixXcd G = Cc * M.partialPivLu().solve(Bc) + Dc;
        result.push_back({G(0, 0), G(0, 1), G(1, 0), G(1, 1)});
    }
    return result;
}

}  // namespace gisc
