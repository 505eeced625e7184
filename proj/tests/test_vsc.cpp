#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>
#include <numbers>

#include "gisc/vsc.hpp"

using namespace gisc;
using Catch::Approx;

TEST_CASE("operating point, inductive line at unity power factor") {
    VscParams vsc;
    GridParams grid;
    grid.l_line_pu = 0.2;
    grid.c_f_pu = 0.0;
    OperatingPoint op = solve_operating_point(vsc, grid);

    REQUIRE(op.u0 == Approx(std::sqrt(1.0 - 0.04)).epsilon(1e-10));  // 0.97980
    REQUIRE(op.delta0 == Approx(0.20136).margin(1e-5));
    REQUIRE(op.phi0 == Approx(op.delta0).margin(1e-12));
    // Power-factor angle under the grid-side current convention: the net
    // current into the node is the reversed converter current, so a
    // unity-power-factor export reads as pi.
    REQUIRE(op.phi_line == Approx(std::numbers::pi).margin(1e-12));
    REQUIRE(op.phi_c == Approx(op.phi_line).margin(1e-12));
}

TEST_CASE("operating point, zero current") {
    VscParams vsc;
    vsc.id_ref = 0.0;
    vsc.iq_ref = 0.0;
    GridParams grid;
    grid.l_line_pu = 0.3;
    grid.c_f_pu = 0.05;
    OperatingPoint op = solve_operating_point(vsc, grid);
    REQUIRE(op.i0 == 0.0);
    // Unloaded divider: U = U_g / (1 - l c)
    REQUIRE(op.u0 == Approx(1.0 / (1.0 - 0.3 * 0.05)).epsilon(1e-12));
    REQUIRE(op.delta0 == Approx(0.0).margin(1e-14));
}

TEST_CASE("operating point satisfies the node equations") {
    VscParams vsc;
    GridParams grid;
    grid.l_line_pu = 0.2;
    grid.c_f_pu = 0.05;
    OperatingPoint op = solve_operating_point(vsc, grid);

    const Complex j(0.0, 1.0);
    const Complex u = Complex(op.u0) * std::exp(j * op.delta0);
    const Complex i = Complex(op.i0) * std::exp(j * op.phi0);
    const Complex i_line = i - j * grid.c_f_pu * u;
    const Complex u_src = u - j * grid.l_line_pu * i_line;
    REQUIRE(std::abs(u_src - Complex(grid.u_grid_pu)) <= 1e-9);
}

TEST_CASE("operating point failure reports") {
    VscParams vsc;
    vsc.id_ref = 6.0;  // l * id exceeds the source magnitude
    GridParams grid;
    grid.l_line_pu = 0.2;
    REQUIRE_THROWS_AS(solve_operating_point(vsc, grid), std::runtime_error);
}

TEST_CASE("closed-form converter admittance") {
    VscParams vsc;
    GridParams grid;
    grid.l_line_pu = 0.2;
    grid.c_f_pu = 0.0;
    OperatingPoint op = solve_operating_point(vsc, grid);
    VscAdmittance adm = build_vsc_admittance(vsc, op);

    SECTION("zero current degenerates to the zero function") {
        OperatingPoint quiet = op;
        quiet.i0 = 0.0;
        REQUIRE(build_vsc_admittance(vsc, quiet).yg.is_zero());
    }

    SECTION("matches the cleared-fraction form") {
        const double w0 = vsc.omega0();
        Polynomial num = Polynomial({Complex(15.0), Complex(0.6)}) *
                         Polynomial({Complex(3020.0), Complex(2.5)});
        Polynomial den = Polynomial({Complex(15.0), Complex(0.6), Complex(0.2 / w0)}) *
                         Polynomial({Complex(op.u0 * 3020.0), Complex(op.u0 * 2.5), Complex(1.0)});
        REQUIRE(approx_equal(adm.yg, RationalFunction(num, den), 1e-10));
    }

    SECTION("matrix has the single nonzero entry") {
        REQUIRE(adm.matrix.m11.is_zero());
        REQUIRE(adm.matrix.m12.is_zero());
        REQUIRE(adm.matrix.m21.is_zero());
        REQUIRE(approx_equal(adm.matrix.m22, adm.yg, 1e-12));
        REQUIRE(adm.matrix.eq4_structure_ok());
    }

    SECTION("real coefficients imply conjugate symmetry") {
        REQUIRE(adm.yg.has_real_coeffs());
        for (double w : {3.0, 54.0, 313.0}) {
            Complex a = adm.yg.eval(Complex(0.0, w));
            Complex b = adm.yg.eval(Complex(0.0, -w));
            REQUIRE(std::abs(b - std::conj(a)) <= 1e-12 * std::abs(a));
        }
    }
}

TEST_CASE("converter dynamics at and near the equilibrium") {
    VscParams vsc;
    GridParams grid;
    grid.l_line_pu = 0.2;
    grid.c_f_pu = 0.0;
    OperatingPoint op = solve_operating_point(vsc, grid);
    VscState eq = vsc_equilibrium(vsc, op);
    const Complex u_xy = Complex(op.u0) * std::exp(Complex(0.0, op.delta0));

    VscState d = vsc_dynamics_rhs(eq, u_xy, vsc);
    for (double v : d.as_array()) REQUIRE(std::abs(v) <= 1e-9);

    // A +eps q-axis voltage raises the PLL speed by kp_pll * eps to first order.
    const double eps = 1e-6;
    const Complex u_pert = Complex(op.u0) * std::exp(Complex(0.0, op.delta0 + eps / op.u0));
    VscState dp = vsc_dynamics_rhs(eq, u_pert, vsc);
    REQUIRE(dp.theta_pll == Approx(vsc.kp_pll * eps).epsilon(1e-6));
}

TEST_CASE("numeric admittance scan reproduces the closed form") {
    VscParams vsc;
    GridParams grid;
    grid.l_line_pu = 0.2;
    grid.c_f_pu = 0.0;
    OperatingPoint op = solve_operating_point(vsc, grid);
    RationalFunction yg = build_vsc_admittance(vsc, op).yg;

    SECTION("single point spot check") {
        auto scan = numeric_admittance_scan(vsc, op, {Complex(0.0, 50.0)});
        const Complex expect = yg.eval(Complex(0.0, 50.0));
        REQUIRE(std::abs(scan[0][3] - expect) <= 1e-6 * std::abs(expect));
        REQUIRE(std::abs(scan[0][0]) <= 1e-6);
        REQUIRE(std::abs(scan[0][1]) <= 1e-6);
        REQUIRE(std::abs(scan[0][2]) <= 1e-6);
    }

    SECTION("20 points across the control bandwidth") {
        std::vector<Complex> pts;
        for (int k = 0; k < 20; ++k)
            pts.push_back(Complex(0.0, std::pow(10.0, 2.7 * double(k) / 19.0)));  // 1..500 rad/s
        auto scan = numeric_admittance_scan(vsc, op, pts);
        for (std::size_t k = 0; k < pts.size(); ++k) {
            const Complex expect = yg.eval(pts[k]);
            REQUIRE(std::abs(scan[k][3] - expect) <= 1e-6 * std::abs(expect));
        }
    }

    SECTION("zero current zeroes the whole response") {
        VscParams quiet = vsc;
        quiet.id_ref = 0.0;
        quiet.iq_ref = 0.0;
        OperatingPoint op0 = solve_operating_point(quiet, grid);
        auto scan = numeric_admittance_scan(quiet, op0, {Complex(0.0, 50.0)});
        for (const Complex& v : scan[0]) REQUIRE(std::abs(v) <= 1e-6);
    }
}

TEST_CASE("admittance magnitude peaks near the PLL natural frequency") {
    VscParams vsc;
    GridParams grid;
    grid.l_line_pu = 0.2;
    grid.c_f_pu = 0.0;
    OperatingPoint op = solve_operating_point(vsc, grid);
    RationalFunction yg = build_vsc_admittance(vsc, op).yg;

    double best_w = 0.0, best_mag = 0.0;
    for (int k = 0; k <= 600; ++k) {
        const double w = std::pow(10.0, 0.0 + 3.0 * double(k) / 600.0);  // 1..1000 rad/s
        const double mag = std::abs(yg.eval(Complex(0.0, w)));
        if (mag > best_mag) {
            best_mag = mag;
            best_w = w;
        }
    }
    const double expect = std::sqrt(vsc.ki_pll * op.u0);  // ~54 rad/s
    REQUIRE(best_w == Approx(expect).epsilon(0.15));
    REQUIRE(std::abs(yg.eval(Complex(0.0, 1.0))) < best_mag);
    REQUIRE(std::abs(yg.eval(Complex(0.0, 1000.0))) < best_mag);
}
