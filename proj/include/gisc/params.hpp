#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gisc {

/// Converter parameters. Reactances/susceptances are per-unit values at the
/// base frequency, so an inductance L appears in transfer functions as
/// (L_pu / w0) * s with s in rad/s.
struct VscParams {
    double lf_pu = 0.2;      ///< filter inductor reactance at base frequency
    double kp_i = 0.6;       ///< current controller proportional gain
    double ki_i = 15.0;      ///< current controller integral gain
    double kp_pll = 2.5;     ///< PLL proportional gain
    double ki_pll = 3020.0;  ///< PLL integral gain
    double id_ref = 1.0;
    double iq_ref = 0.0;
    double f0_hz = 50.0;

    [[nodiscard]] double omega0() const { return 2.0 * std::numbers::pi * f0_hz; }

    void validate() const {
        if (!(lf_pu > 0.0)) throw std::invalid_argument("lf_pu must be > 0");
        if (!(f0_hz > 0.0)) throw std::invalid_argument("f0_hz must be > 0");
        if (kp_i < 0.0 || ki_i < 0.0) throw std::invalid_argument("current controller gains must be >= 0");
        if (kp_pll < 0.0 || ki_pll < 0.0) throw std::invalid_argument("PLL gains must be >= 0");
    }
};

struct GridParams {
    double l_line_pu = 0.2;  ///< line + transformer reactance at base frequency
    double c_f_pu = 0.0;     ///< filter capacitor susceptance at base frequency (0 allowed)
    double u_grid_pu = 1.0;  ///< ideal source magnitude
    double f0_hz = 50.0;

    [[nodiscard]] double omega0() const { return 2.0 * std::numbers::pi * f0_hz; }

    void validate() const {
        if (!(l_line_pu > 0.0)) throw std::invalid_argument("l_line_pu must be > 0");
        if (c_f_pu < 0.0) throw std::invalid_argument("c_f_pu must be >= 0");
        if (!(u_grid_pu > 0.0)) throw std::invalid_argument("u_grid_pu must be > 0");
        if (!(f0_hz > 0.0)) throw std::invalid_argument("f0_hz must be > 0");
    }
};

/// Fundamental-frequency steady state. Angles are measured against the ideal
/// grid source; phi_line and phi_c are the power-factor angles at the
/// converter-side node of the network, computed for the grid-side current
/// convention of the admittance models (current measured flowing from the
/// grid into that node), so both equal delta0 - phi0 + pi wrapped to
/// (-pi, pi].
struct OperatingPoint {
    double u0 = 0.0;      ///< PCC voltage magnitude (pu)
    double i0 = 0.0;      ///< converter current magnitude (pu)
    double delta0 = 0.0;  ///< PCC voltage angle (rad)
    double phi0 = 0.0;    ///< converter current angle (rad)
    double phi_line = 0.0;
    double phi_c = 0.0;
};

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
    const double two_pi = 2.0 * std::numbers::pi;
    a = std::fmod(a, two_pi);
    if (a <= -std::numbers::pi) a += two_pi;
    if (a > std::numbers::pi) a -= two_pi;
    return a;
}

}  // namespace gisc
