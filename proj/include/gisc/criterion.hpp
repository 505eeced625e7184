#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gisc/genimp.hpp"
#include "gisc/grid.hpp"
#include "gisc/rational.hpp"
#include "gisc/roots.hpp"

namespace gisc {

/// Equivalent SISO open-loop gain L(s) = Y_g (Z+ + Z-)/2, canonicalized and
/// truncated to real coefficients (which it has by conjugate symmetry of the
/// sequence pair).
inline RationalFunction open_loop_gain(const RationalFunction& yg, const SequencePair& seq) {
    if (yg.is_zero()) return RationalFunction::zero();
    if (seq.y_plus.is_zero() || seq.y_minus.is_zero())
        throw std::invalid_argument("open_loop_gain: sequence admittance is identically zero");
    RationalFunction l = yg * Complex(0.5) * (seq.y_plus.inverse() + seq.y_minus.inverse());
    return l.truncated_to_real();
}

/// Sampling policy for the Nyquist contour.
struct FrequencyGridSpec {
    double omega_min = 1e-2;       ///< rad/s, smallest positive sample
    double omega_max = 1e5;        ///< rad/s
    int points_per_decade = 400;
    double indent_radius = 1e-6;   ///< rad/s, right-half detour around imaginary-axis poles
    bool allow_indentation = false;
    std::size_t max_points = 2'000'000;
};

struct NyquistSample {
    double omega = 0.0;  ///< Im(s) of the contour point
    Complex value;
};

namespace detail {

/// Contour point on the positive-omega half: either on the axis or on an
/// indentation arc s = j omega_pole + r e^{j alpha}.
struct ContourPoint {
    bool on_arc = false;
    double omega = 0.0;       // axis position, or the pole frequency for arcs
    double alpha = 0.0;       // arc parameter in [-pi/2, pi/2]
    Complex s;
    Complex value;
};

inline ContourPoint make_axis_point(const RationalFunction& l, double w) {
    ContourPoint p;
    p.omega = w;
    p.s = Complex(0.0, w);
    p.value = l.eval(p.s);
    return p;
}

inline ContourPoint make_arc_point(const RationalFunction& l, double w_pole, double r, double alpha) {
    ContourPoint p;
    p.on_arc = true;
    p.omega = w_pole;
    p.alpha = alpha;
    p.s = Complex(0.0, w_pole) + Complex(r) * std::exp(Complex(0.0, alpha));
    p.value = l.eval(p.s);
    return p;
}

inline double phase_step_about(Complex v0, Complex v1, Complex about) {
    return std::arg((v1 - about) / (v0 - about));
}

}  // namespace detail

/// Imaginary parts of den(L) roots lying on the imaginary axis within
/// tolerance (these are the open-loop resonances requiring indentation).
inline std::vector<double> imaginary_axis_poles(const RationalFunction& l) {
    std::vector<double> out;
    for (const Complex& r : l.poles())
        if (std::abs(r.real()) <= 1e-6 * std::max(1.0, std::abs(r))) out.push_back(r.imag());
    std::sort(out.begin(), out.end());
    return out;
}

/// Count of genuinely right-half-plane poles of the open loop (axis poles
/// excluded by the same tolerance used for indentation).
inline int open_loop_rhp_pole_count(const RationalFunction& l) {
    int n = 0;
    for (const Complex& r : l.poles())
        if (r.real() > 1e-6 * std::max(1.0, std::abs(r))) ++n;
    return n;
}

/// Samples L along s = j omega for omega in [-omega_max, omega_max]
/// (log-spaced, mirrored by conjugate symmetry, densified adaptively so that
/// consecutive points subtend at most pi/36 as seen from (-1, 0) whenever the
/// curve is within distance 2 of it, and at most pi/4 anywhere).
///
/// Imaginary-axis poles of L abort with an error unless
/// grid.allow_indentation is set, in which case the contour takes a
/// right-half semicircular detour of radius grid.indent_radius around each.
inline std::vector<NyquistSample> nyquist_curve(const RationalFunction& l,
                                                const FrequencyGridSpec& grid = {}) {
    using detail::ContourPoint;
    const Complex about(-1.0, 0.0);

    std::vector<double> axis_poles = imaginary_axis_poles(l);
    if (!axis_poles.empty() && !grid.allow_indentation) {
        throw std::domain_error("nyquist_curve: open-loop pole on the imaginary axis at omega = " +
                                std::to_string(axis_poles.front()) +
                                " rad/s; enable indentation to detour around it");
    }

    // Positive-frequency half (omega >= 0), poles at negative omega are
    // covered by the mirrored half.
    std::vector<double> pos_poles;
    for (double wp : axis_poles)
        if (wp >= 0.0) pos_poles.push_back(wp);

    const double r = grid.indent_radius;
    const auto near_pole = [&](double w) {
        for (double wp : pos_poles)
            if (std::abs(w - wp) < r) return true;
        return false;
    };

    std::vector<ContourPoint> half;
    const bool zero_is_pole = !pos_poles.empty() && pos_poles.front() < r;
    if (!zero_is_pole) half.push_back(detail::make_axis_point(l, 0.0));

    const int decades_points = static_cast<int>(std::ceil(
        grid.points_per_decade * std::log10(grid.omega_max / grid.omega_min)));
    std::vector<double> ws;
    ws.reserve(static_cast<std::size_t>(decades_points) + 8 * pos_poles.size());
    for (int k = 0; k <= decades_points; ++k) {
        double w = grid.omega_min *
                   std::pow(10.0, double(k) / grid.points_per_decade);
        if (w > grid.omega_max) w = grid.omega_max;
        if (!near_pole(w)) ws.push_back(w);
    }
    for (double wp : pos_poles) {
        if (wp - r > 0.0 && wp - r < grid.omega_max) ws.push_back(wp - r);
        if (wp + r < grid.omega_max) ws.push_back(wp + r);
    }
    std::sort(ws.begin(), ws.end());
    ws.erase(std::unique(ws.begin(), ws.end()), ws.end());

    std::size_t next_pole = 0;
    for (double w : ws) {
        while (next_pole < pos_poles.size() && pos_poles[next_pole] + r <= w + 1e-300 &&
               pos_poles[next_pole] < w) {
            const double wp = pos_poles[next_pole];
            for (int k = 0; k <= 16; ++k) {
                double alpha = -std::numbers::pi / 2 + std::numbers::pi * double(k) / 16.0;
                half.push_back(detail::make_arc_point(l, wp, r, alpha));
            }
            ++next_pole;
        }
        half.push_back(detail::make_axis_point(l, w));
    }

    // Adaptive bisection on the contour parameter.
    bool changed = true;
    while (changed && half.size() < grid.max_points) {
        changed = false;
        std::vector<ContourPoint> out;
        out.reserve(half.size() * 2);
        out.push_back(half.front());
        for (std::size_t i = 1; i < half.size(); ++i) {
            const ContourPoint& p0 = half[i - 1];
            const ContourPoint& p1 = half[i];
            const double dphi = std::abs(detail::phase_step_about(p0.value, p1.value, about));
            const bool near = std::abs(p0.value - about) < 2.0 || std::abs(p1.value - about) < 2.0;
            const bool want = (near && dphi > std::numbers::pi / 36) || dphi > std::numbers::pi / 4;
            if (want && out.size() < grid.max_points) {
                std::optional<ContourPoint> mid;
                if (!p0.on_arc && !p1.on_arc && p1.omega - p0.omega > 1e-12 * std::max(1.0, p1.omega)) {
                    mid = detail::make_axis_point(l, 0.5 * (p0.omega + p1.omega));
                } else if (p0.on_arc && p1.on_arc && p0.omega == p1.omega) {
                    mid = detail::make_arc_point(l, p0.omega, r, 0.5 * (p0.alpha + p1.alpha));
                }
                if (mid) {
                    out.push_back(*mid);
                    changed = true;
                }
            }
            out.push_back(p1);
        }
        half.swap(out);
    }

    // Mirror: L has real coefficients on this code path, so
    // L(conj(s)) == conj(L(s)).
    std::vector<NyquistSample> curve;
    curve.reserve(2 * half.size() + 1);
    for (std::size_t i = half.size(); i-- > 0;) {
        const ContourPoint& p = half[i];
        if (!p.on_arc && p.omega == 0.0) continue;
        curve.push_back({-std::imag(p.s), std::conj(p.value)});
    }
    for (const ContourPoint& p : half) curve.push_back({std::imag(p.s), p.value});
    return curve;
}

/// Accumulated phase of (sample - about) over the closed curve divided by
/// 2 pi, counterclockwise positive. The closure edge from the last back to
/// the first sample is included.
inline int winding_number(const std::vector<NyquistSample>& curve, Complex about) {
    if (curve.size() < 2) return 0;
    double total = 0.0;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        const Complex v0 = curve[i].value;
        const Complex v1 = curve[(i + 1) % curve.size()].value;
        if (std::abs(v0 - about) < 1e-9 || std::abs(v1 - about) < 1e-9)
            throw std::domain_error("winding_number: curve passes through the reference point (marginal case)");
        const double step = detail::phase_step_about(v0, v1, about);
        if (std::abs(step) >= std::numbers::pi / 2)
            throw std::runtime_error("winding_number: phase step >= pi/2 between samples; curve too coarse");
        total += step;
    }
    return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

enum class Verdict { stable, unstable, not_applicable };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::stable: return "stable";
        case Verdict::unstable: return "unstable";
        case Verdict::not_applicable: return "not_applicable";
    }
    return "?";
}

/// Stationary-frame mirror pair f0 -/+ Omega/(2 pi) of a synchronous-frame
/// mode at +/- j Omega.
struct StationaryFrequencyPair {
    double f_sub_hz = 0.0;
    double f_super_hz = 0.0;
};

struct NyquistReport {
    std::vector<NyquistSample> samples;
    int winding_number = 0;           ///< encirclements of (-1, 0), CCW positive
    Verdict verdict = Verdict::not_applicable;
    double margin = 0.0;              ///< min distance from curve to (-1, 0)
    int rhp_pole_count = 0;           ///< closed loop
    int rhp_open_loop_poles = 0;
};

/// Full criterion evaluation: Nyquist curve of L = Y_g (Z+ + Z-)/2, winding
/// number about (-1, 0), verdict, margin, and the closed-loop
/// right-half-plane root count. The contour runs omega: -inf -> +inf, so
/// closed-loop RHP roots show up as clockwise (negative) encirclements on
/// top of the open-loop RHP pole count.
inline NyquistReport assess_stability(const RationalFunction& yg, const SequencePair& seq,
                                      FrequencyGridSpec grid = {}) {
    NyquistReport rep;
    if (yg.is_zero()) {
        rep.samples = {{-grid.omega_max, Complex(0.0)}, {0.0, Complex(0.0)}, {grid.omega_max, Complex(0.0)}};
        rep.verdict = Verdict::not_applicable;
        rep.margin = 1.0;
        return rep;
    }
    RationalFunction l = open_loop_gain(yg, seq);
    if (l.relative_degree() < 1)
        throw std::runtime_error("assess_stability: open-loop gain is not strictly proper");
    grid.allow_indentation = true;
    rep.samples = nyquist_curve(l, grid);
    rep.winding_number = winding_number(rep.samples, Complex(-1.0, 0.0));
    rep.rhp_open_loop_poles = open_loop_rhp_pole_count(l);
    rep.rhp_pole_count = rep.rhp_open_loop_poles - rep.winding_number;
    if (rep.rhp_pole_count < 0)
        throw std::runtime_error("assess_stability: negative closed-loop RHP count (orientation inconsistency)");
    rep.verdict = (rep.winding_number == 0 && rep.rhp_open_loop_poles == 0) ? Verdict::stable
                                                                            : Verdict::unstable;
    double m = std::numeric_limits<double>::infinity();
    for (const NyquistSample& p : rep.samples) m = std::min(m, std::abs(p.value - Complex(-1.0, 0.0)));
    rep.margin = m;
    return rep;
}

struct ClosedLoopRoots {
    std::vector<Complex> roots;                          ///< all roots of num(1 + L)
    std::vector<Complex> rhp_roots;
    std::vector<StationaryFrequencyPair> rhp_pairs;      ///< one per RHP conjugate pair
};

/// Roots of 1 + L == 0 with the stationary-frame frequency mapping of each
/// right-half-plane conjugate pair.
inline ClosedLoopRoots closed_loop_roots(const RationalFunction& l, double f0_hz) {
    if (l.relative_degree() < 0)
        throw std::invalid_argument("closed_loop_roots: loop gain must be proper");
    RationalFunction one_plus = RationalFunction::one() + l;
    ClosedLoopRoots out;
    out.roots = poly_roots(one_plus.num());
    for (const Complex& z : out.roots)
        if (z.real() > 1e-6 * std::max(1.0, std::abs(z))) out.rhp_roots.push_back(z);
    for (const Complex& z : out.rhp_roots) {
        if (z.imag() <= 0.0) continue;  // one entry per conjugate pair
        const double f_mode = z.imag() / (2.0 * std::numbers::pi);
        const double f_sub = f0_hz - f_mode;
        // Anchored so that f_sub + f_super == 2 f0 holds exactly.
        out.rhp_pairs.push_back({f_sub, 2.0 * f0_hz - f_sub});
    }
    return out;
}

struct MimoCharResult {
    Complex det;                ///< det(diag(0, yg) + Y) evaluated directly
    Complex factored;           ///< y_plus * y_minus * (1 + L) at the same s
    double identity_residual;   ///< relative difference of the two routes
};

/// Determinant identity check at a point: evaluates the 2x2 characteristic
/// matrix determinant directly and through the sequence-decomposed
/// factorization. Both routes agree identically in exact arithmetic.
inline MimoCharResult mimo_char_eval(const RationalFunction& yg, const SwingMatrix& y, Complex s) {
    const std::array<Complex, 4> m = y.eval(s);
    const Complex ygv = yg.eval(s);
    MimoCharResult r{};
    r.det = m[0] * (m[3] + ygv) - m[1] * m[2];

    SequencePair seq = sequence_decompose(y);
    const Complex yp = seq.y_plus.eval(s);
    const Complex ym = seq.y_minus.eval(s);
    const Complex lv = ygv * 0.5 * (Complex(1.0) / yp + Complex(1.0) / ym);
    r.factored = yp * ym * (Complex(1.0) + lv);
    r.identity_residual = std::abs(r.det - r.factored) /
                          std::max({std::abs(r.det), std::abs(r.factored), 1e-300});
    return r;
}

}  // namespace gisc
