#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "gisc/criterion.hpp"
#include "gisc/genimp.hpp"
#include "gisc/grid.hpp"
#include "gisc/vsc.hpp"

using namespace gisc;
using Catch::Approx;

namespace {

struct System {
    OperatingPoint op;
    RationalFunction yg;
    SwingMatrix y;
    SequencePair seq;
};

System make_system(const VscParams& vsc, const GridParams& grid) {
    System s;
    s.op = solve_operating_point(vsc, grid);
    s.yg = build_vsc_admittance(vsc, s.op).yg;
    s.y = total_network_admittance(build_line_admittance(grid, s.op), build_cap_admittance(grid, s.op));
    s.seq = sequence_decompose(s.y);
    return s;
}

std::vector<NyquistSample> circle(double radius, Complex center, bool ccw, int n = 720) {
    std::vector<NyquistSample> out;
    for (int k = 0; k < n; ++k) {
        const double a = 2.0 * std::numbers::pi * double(k) / double(n) * (ccw ? 1.0 : -1.0);
        out.push_back({double(k), center + std::polar(radius, a)});
    }
    return out;
}

SwingMatrix random_swing(std::mt19937& rng, int max_deg = 3) {
    std::uniform_int_distribution<int> deg(0, max_deg);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    const auto poly = [&](int d) {
        std::vector<Complex> c(static_cast<std::size_t>(d) + 1);
        for (auto& x : c) x = Complex(coef(rng));
        if (std::abs(c.back()) < 0.1) c.back() += Complex(1.0);
        return Polynomial(c);
    };
    Polynomial den = poly(deg(rng));
    if (den.is_zero()) den = Polynomial::one();
    return {RationalFunction(poly(deg(rng)), den), RationalFunction(poly(deg(rng)), den)};
}

RationalFunction random_real_rational(std::mt19937& rng, int max_deg = 3) {
    SwingMatrix m = random_swing(rng, max_deg);
    return m.a;
}

}  // namespace

TEST_CASE("open-loop gain forms") {
    VscParams vsc;
    GridParams grid;
    grid.l_line_pu = 0.2;
    grid.c_f_pu = 0.0;
    System s = make_system(vsc, grid);

    SECTION("zero converter admittance gives the zero gain") {
        REQUIRE(open_loop_gain(RationalFunction::zero(), s.seq).is_zero());
    }

    SECTION("zero sequence admittance is rejected") {
        SequencePair bad{RationalFunction::zero(), RationalFunction::one()};
        REQUIRE_THROWS_AS(open_loop_gain(s.yg, bad), std::invalid_argument);
    }

    SECTION("inductor-only network with zero angle composes to yg * l * s") {
        OperatingPoint op0 = s.op;
        op0.phi_line = 0.0;
        SwingMatrix y0 = build_line_admittance(grid, op0);
        RationalFunction l = open_loop_gain(s.yg, sequence_decompose(y0));
        const double lh = grid.l_line_pu / grid.omega0();
        RationalFunction expect = s.yg * RationalFunction::from_poly(Polynomial({Complex(0.0), Complex(lh)}));
        REQUIRE(approx_equal(l, expect.truncated_to_real(), 1e-9));
    }

    SECTION("the studied systems are strictly proper and conjugate-symmetric") {
        RationalFunction l = open_loop_gain(s.yg, s.seq);
        REQUIRE(l.relative_degree() >= 1);
        REQUIRE(l.has_real_coeffs());
        for (double w : {0.7, 54.0, 313.0, 2000.0}) {
            const Complex a = l.eval(Complex(0.0, w));
            const Complex b = l.eval(Complex(0.0, -w));
            REQUIRE(std::abs(b - std::conj(a)) <= 1e-12 * std::max(1.0, std::abs(a)));
        }
    }
}

TEST_CASE("nyquist curve sampling") {
    SECTION("the zero gain stays at the origin") {
        auto curve = nyquist_curve(RationalFunction::zero());
        REQUIRE(!curve.empty());
        for (const auto& p : curve) REQUIRE(std::abs(p.value) == 0.0);
    }

    SECTION("first-order lag with gain one-half keeps its distance") {
        RationalFunction l(Polynomial::constant(Complex(0.5)), Polynomial({Complex(1.0), Complex(1.0)}));
        auto curve = nyquist_curve(l);
        double margin = 1e300;
        for (const auto& p : curve) margin = std::min(margin, std::abs(p.value - Complex(-1.0, 0.0)));
        REQUIRE(margin == Approx(0.5).epsilon(1e-3));
        REQUIRE(winding_number(curve, Complex(-1.0, 0.0)) == 0);
    }

    SECTION("imaginary-axis pole requires explicit indentation") {
        // 1 / (s^2 + 100) has poles at +/- j10
        RationalFunction l(Polynomial::one(), Polynomial({Complex(100.0), Complex(0.0), Complex(1.0)}));
        REQUIRE_THROWS_AS(nyquist_curve(l), std::domain_error);
        FrequencyGridSpec spec;
        spec.allow_indentation = true;
        auto curve = nyquist_curve(l, spec);
        REQUIRE(curve.size() > 100);
        REQUIRE(winding_number(curve, Complex(-1.0, 0.0)) == 0);
    }
}

TEST_CASE("winding numbers of synthetic curves") {
    REQUIRE(winding_number(circle(2.0, Complex(0.0), true), Complex(-1.0, 0.0)) == 1);
    REQUIRE(winding_number(circle(2.0, Complex(0.0), false), Complex(-1.0, 0.0)) == -1);
    REQUIRE(winding_number(circle(0.5, Complex(0.0), true), Complex(-1.0, 0.0)) == 0);
    REQUIRE_THROWS_AS(winding_number(circle(1.0, Complex(0.0), true), Complex(-1.0, 0.0)),
                      std::domain_error);
}

TEST_CASE("stability assessment on the studied system") {
    VscParams vsc;
    GridParams grid;
    grid.c_f_pu = 0.05;

    SECTION("short line is stable") {
        grid.l_line_pu = 0.20;
        System s = make_system(vsc, grid);
        NyquistReport rep = assess_stability(s.yg, s.seq);
        REQUIRE(rep.verdict == Verdict::stable);
        REQUIRE(rep.winding_number == 0);
        REQUIRE(rep.rhp_open_loop_poles == 0);
        REQUIRE(rep.margin > 0.0);
    }

    SECTION("long line is unstable with two right-half-plane poles") {
        grid.l_line_pu = 0.26;
        System s = make_system(vsc, grid);
        NyquistReport rep = assess_stability(s.yg, s.seq);
        REQUIRE(rep.verdict == Verdict::unstable);
        REQUIRE(rep.rhp_pole_count == 2);
        REQUIRE(std::abs(rep.winding_number) == 2);
    }

    SECTION("passive converter is not applicable") {
        NyquistReport rep = assess_stability(RationalFunction::zero(), make_system(vsc, grid).seq);
        REQUIRE(rep.verdict == Verdict::not_applicable);
    }
}

TEST_CASE("closed-loop roots") {
    SECTION("first-order textbook case") {
        RationalFunction l(Polynomial::one(), Polynomial({Complex(1.0), Complex(1.0)}));
        ClosedLoopRoots r = closed_loop_roots(l, 50.0);
        REQUIRE(r.roots.size() == 1);
        REQUIRE(r.roots[0].real() == Approx(-2.0).margin(1e-10));
        REQUIRE(r.rhp_roots.empty());
    }

    SECTION("right-half-plane pair maps to the stationary mirror frequencies") {
        VscParams vsc;
        GridParams grid;
        grid.l_line_pu = 0.26;
        grid.c_f_pu = 0.05;
        System s = make_system(vsc, grid);
        ClosedLoopRoots r = closed_loop_roots(open_loop_gain(s.yg, s.seq), 50.0);
        REQUIRE(r.rhp_roots.size() == 2);
        REQUIRE(r.rhp_pairs.size() == 1);
        const double f_mode = 50.0 - r.rhp_pairs[0].f_sub_hz;
        REQUIRE(f_mode == Approx(8.65).margin(0.5));
        REQUIRE(r.rhp_pairs[0].f_sub_hz + r.rhp_pairs[0].f_super_hz == 100.0);
    }

    SECTION("nyquist count equals the root count on randomized systems") {
        std::mt19937 rng(2718);
        std::uniform_real_distribution<double> lu(0.08, 0.34), cu(0.0, 0.12), ku(0.8, 1.2),
            iqu(-0.3, 0.3);
        int done = 0;
        while (done < 20) {
            VscParams vsc;
            vsc.kp_pll *= ku(rng);
            vsc.ki_pll *= ku(rng);
            vsc.kp_i *= ku(rng);
            vsc.ki_i *= ku(rng);
            vsc.iq_ref = iqu(rng);
            GridParams grid;
            grid.l_line_pu = lu(rng);
            grid.c_f_pu = cu(rng);
            System s;
            try {
                s = make_system(vsc, grid);
            } catch (const std::exception&) {
                continue;
            }
            NyquistReport rep = assess_stability(s.yg, s.seq);
            ClosedLoopRoots r = closed_loop_roots(open_loop_gain(s.yg, s.seq), 50.0);
            REQUIRE(rep.rhp_pole_count == static_cast<int>(r.rhp_roots.size()));
            ++done;
        }
    }
}

TEST_CASE("determinant identity") {
    std::mt19937 rng(111);
    std::uniform_real_distribution<double> mag(0.0, 1000.0), ang(0.0, 2.0 * std::numbers::pi);

    SECTION("zero converter admittance reduces to det(Y)") {
        VscParams vsc;
        GridParams grid;
        grid.l_line_pu = 0.2;
        grid.c_f_pu = 0.05;
        System s = make_system(vsc, grid);
        const Complex pt = std::polar(77.0, 0.3);
        MimoCharResult r = mimo_char_eval(RationalFunction::zero(), s.y, pt);
        const Complex det_y =
            s.seq.y_plus.eval(pt) * s.seq.y_minus.eval(pt);
        REQUIRE(std::abs(r.det - det_y) <= 1e-10 * std::abs(det_y));
        REQUIRE(r.identity_residual <= 1e-10);
    }

    SECTION("table system at random points") {
        VscParams vsc;
        GridParams grid;
        grid.l_line_pu = 0.26;
        grid.c_f_pu = 0.05;
        System s = make_system(vsc, grid);
        int done = 0;
        while (done < 100) {
            const Complex pt = std::polar(mag(rng), ang(rng));
            try {
                REQUIRE(mimo_char_eval(s.yg, s.y, pt).identity_residual <= 1e-9);
                ++done;
            } catch (const PoleError&) {
            }
        }
    }

    SECTION("random swing matrices with random converter admittances") {
        int done = 0;
        while (done < 20) {
            SwingMatrix y = random_swing(rng);
            RationalFunction yg = random_real_rational(rng);
            SequencePair seq = sequence_decompose(y);
            if (seq.y_plus.is_zero() || seq.y_minus.is_zero()) continue;
            int pts = 0;
            while (pts < 10) {
                const Complex pt = std::polar(mag(rng) / 10.0, ang(rng));
                try {
                    REQUIRE(mimo_char_eval(yg, y, pt).identity_residual <= 1e-9);
                    ++pts;
                } catch (const PoleError&) {
                } catch (const std::invalid_argument&) {
                    break;  // degenerate sequence admittance
                }
            }
            ++done;
        }
    }
}

TEST_CASE("characteristic factorization as rational functions") {
    // det(diag(0, yg) + Y) == y+ y- (1 + L) — compared at the level of
    // coefficients, then as root multisets.
    std::mt19937 rng(222);
    VscParams vsc;
    GridParams grid;
    grid.l_line_pu = 0.26;
    grid.c_f_pu = 0.05;
    System s = make_system(vsc, grid);

    const auto check = [&](const RationalFunction& yg, const SwingMatrix& y) {
        SequencePair seq = sequence_decompose(y);
        if (seq.y_plus.is_zero() || seq.y_minus.is_zero()) return;
        RationalFunction det = y.a * (y.a + yg) + y.b * y.b;
        RationalFunction l = yg * Complex(0.5) * (seq.y_plus.inverse() + seq.y_minus.inverse());
        RationalFunction factored = seq.y_plus * seq.y_minus * (RationalFunction::one() + l);
        REQUIRE(approx_equal(det, factored, 1e-8));

        // Every zero of the canonical determinant appears among the union of
        // factor zeros (cancellation may shrink, never grow, the root set).
        if (det.is_zero()) return;
        std::vector<Complex> union_zeros;
        for (const auto& f : {seq.y_plus, seq.y_minus, RationalFunction::one() + l})
            for (const Complex& z : f.zeros()) union_zeros.push_back(z);
        for (const Complex& z : det.zeros()) {
            double best = 1e300;
            for (const Complex& u : union_zeros) best = std::min(best, std::abs(z - u));
            REQUIRE(best <= 1e-5 * std::max(1.0, std::abs(z)));
        }
    };

    check(s.yg, s.y);
    for (int trial = 0; trial < 20; ++trial) check(random_real_rational(rng), random_swing(rng));
}

TEST_CASE("margin responds to the PLL gains") {
    VscParams vsc;
    GridParams grid;
    grid.l_line_pu = 0.14;  // stable study point where the margin ordering is meaningful
    grid.c_f_pu = 0.05;

    const auto margin_at = [&](double kp, double ki) {
        VscParams v = vsc;
        v.kp_pll = kp;
        v.ki_pll = ki;
        System s = make_system(v, grid);
        return assess_stability(s.yg, s.seq).margin;
    };

    REQUIRE(margin_at(3.0, 3020.0) > margin_at(2.5, 3020.0));
    REQUIRE(margin_at(2.5, 3500.0) < margin_at(2.5, 3020.0));
}
