#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gisc/params.hpp"
#include "gisc/vsc.hpp"

namespace gisc {

/// Nonlinear model of the complete circuit: converter states in the PLL dq
/// frame, network states in the grid synchronous xy frame.
///
/// State ordering:
///   [theta_pll, pll_integrator, ccl_integrator_d, ccl_integrator_q,
///    i_d, i_q, u_cx, u_cy, i_line_x, i_line_y]
/// The capacitor states u_cx/u_cy exist only when c_f_pu > 0 (10 states);
/// with c_f_pu == 0 the PCC voltage is algebraic and the model has 8 states.
struct SystemModel {
    VscParams vsc;
    GridParams grid;
    OperatingPoint op;
    Eigen::VectorXd equilibrium;

    [[nodiscard]] int n_states() const { return grid.c_f_pu > 0.0 ? 10 : 8; }

    [[nodiscard]] std::vector<std::string> state_names() const {
        std::vector<std::string> names = {"theta_pll", "pll_integrator", "ccl_integrator_d",
                                          "ccl_integrator_q", "i_d", "i_q"};
        if (grid.c_f_pu > 0.0) {
            names.push_back("u_cx");
            names.push_back("u_cy");
        }
        names.push_back("i_line_x");
        names.push_back("i_line_y");
        return names;
    }
};

namespace detail {

inline VscState vsc_part(const Eigen::VectorXd& x) {
    return {x[0], x[1], x[2], x[3], x[4], x[5]};
}

/// PCC voltage in the xy frame. With a capacitor it is a pair of states;
/// without one the node is eliminated:
/// the converter and line inductors share the current, so
/// U_c = (l U_s + L_f U_g) / (l + L_f) expressed via the dq-frame identity
/// U_dq = U_g,dq + (l / L_f)(controller output + j w0 L_f I_dq).
inline Complex pcc_voltage_xy(const SystemModel& m, const Eigen::VectorXd& x) {
    if (m.grid.c_f_pu > 0.0) return {x[6], x[7]};
    const VscState st = vsc_part(x);
    const double w0 = m.vsc.omega0();
    const double lf = m.vsc.lf_pu / w0;
    const double ll = m.grid.l_line_pu / w0;
    const Complex ug_dq = Complex(m.grid.u_grid_pu) * std::exp(Complex(0.0, -st.theta_pll));
    const Complex cc(m.vsc.kp_i * (m.vsc.id_ref - st.i_d) + st.ccl_integrator_d,
                     m.vsc.kp_i * (m.vsc.iq_ref - st.i_q) + st.ccl_integrator_q);
    const Complex decouple = Complex(0.0, w0 * lf) * Complex(st.i_d, st.i_q);
    const Complex u_dq = ug_dq + (ll / lf) * (cc + decouple);
    return u_dq * std::exp(Complex(0.0, st.theta_pll));
}

}  // namespace detail

/// Full-system dynamics. Line and capacitor in the xy frame rotate at the
/// fixed grid speed w0; the converter block sees the PCC voltage through
/// vsc_dynamics_rhs.
inline Eigen::VectorXd system_rhs(const SystemModel& m, const Eigen::VectorXd& x) {
    const double w0 = m.vsc.omega0();
    const double ll = m.grid.l_line_pu / w0;
    const Complex u_c = detail::pcc_voltage_xy(m, x);

    const VscState st = detail::vsc_part(x);
    const VscState d = vsc_dynamics_rhs(st, u_c, m.vsc);

    Eigen::VectorXd dx(m.n_states());
    dx[0] = d.theta_pll;
    dx[1] = d.pll_integrator;
    dx[2] = d.ccl_integrator_d;
    dx[3] = d.ccl_integrator_q;
    dx[4] = d.i_d;
    dx[5] = d.i_q;

    if (m.grid.c_f_pu > 0.0) {
        const double c = m.grid.c_f_pu / w0;
        const Complex i_vsc = vsc_current_xy(st);
        const Complex i_line(x[8], x[9]);
        dx[6] = (i_vsc.real() - i_line.real()) / c + w0 * x[7];
        dx[7] = (i_vsc.imag() - i_line.imag()) / c - w0 * x[6];
        dx[8] = (x[6] - m.grid.u_grid_pu) / ll + w0 * x[9];
        dx[9] = x[7] / ll - w0 * x[8];
    } else {
        dx[6] = (u_c.real() - m.grid.u_grid_pu) / ll + w0 * x[7];
        dx[7] = u_c.imag() / ll - w0 * x[6];
    }
    return dx;
}

/// Derived observables at a state.
struct Observables {
    double u_mag;
    double delta;
    double i_mag;
};

inline Observables observe(const SystemModel& m, const Eigen::VectorXd& x) {
    const Complex u = detail::pcc_voltage_xy(m, x);
    const Complex i = vsc_current_xy(detail::vsc_part(x));
    return {std::abs(u), std::arg(u), std::abs(i)};
}

/// Solves the operating point and packs the equilibrium state vector.
/// A no-event simulation started there stays there.
inline SystemModel assemble_model(const VscParams& vsc, const GridParams& grid) {
    if (vsc.f0_hz != grid.f0_hz)
        throw std::invalid_argument("assemble_model: converter and grid base frequencies differ");
    SystemModel m;
    m.vsc = vsc;
    m.grid = grid;
    m.op = solve_operating_point(vsc, grid);

    const Complex u_c = Complex(m.op.u0) * std::exp(Complex(0.0, m.op.delta0));
    const Complex i = Complex(m.op.i0) * std::exp(Complex(0.0, m.op.phi0));
    const Complex i_line = i - Complex(0.0, grid.c_f_pu) * u_c;

    m.equilibrium.resize(m.n_states());
    m.equilibrium[0] = m.op.delta0;
    m.equilibrium[1] = 0.0;
    m.equilibrium[2] = 0.0;
    m.equilibrium[3] = 0.0;
    m.equilibrium[4] = vsc.id_ref;
    m.equilibrium[5] = vsc.iq_ref;
    if (grid.c_f_pu > 0.0) {
        m.equilibrium[6] = u_c.real();
        m.equilibrium[7] = u_c.imag();
        m.equilibrium[8] = i_line.real();
        m.equilibrium[9] = i_line.imag();
    } else {
        m.equilibrium[6] = i_line.real();
        m.equilibrium[7] = i_line.imag();
    }

    const Eigen::VectorXd r = system_rhs(m, m.equilibrium);
    if (r.cwiseAbs().maxCoeff() > 1e-9)
        throw std::runtime_error("assemble_model: equilibrium residual " + std::to_string(r.cwiseAbs().maxCoeff()));
    return m;
}

/// Line-reactance step applied at a given time; inductor currents are held
/// continuous across the swap (flux continuity).
struct LineStepEvent {
    double time = 0.0;
    double l_line_pu = 0.0;
};

struct Scenario {
    double t_end = 5.0;
    double dt = 2e-5;
    std::vector<LineStepEvent> events;
    Eigen::VectorXd initial_offset;  ///< added to the equilibrium; empty = none
    int store_every = 1;
};

struct SimEvent {
    double time;
    std::string description;
};

/// Uniform-step trace of states plus derived signals.
struct SimTrace {
    double dt = 0.0;                           ///< time spacing of stored rows
    std::vector<std::string> columns;          ///< excludes the leading time column
    std::vector<std::vector<double>> rows;     ///< row k corresponds to t = k * dt
    std::vector<SimEvent> events;
    bool diverged = false;
    double diverged_at = 0.0;

    [[nodiscard]] double time_of(std::size_t row) const { return double(row) * dt; }

    [[nodiscard]] std::size_t column_index(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        throw std::invalid_argument("SimTrace: no column named '" + name + "'");
    }

    [[nodiscard]] std::vector<double> column(const std::string& name) const {
        const std::size_t k = column_index(name);
        std::vector<double> v(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) v[i] = rows[i][k];
        return v;
    }
};

/// Fixed-step classic Runge-Kutta integration. Deterministic for a given
/// (model, scenario); numerical overflow truncates the trace and sets the
/// diverged flag.
inline SimTrace simulate(const SystemModel& model, const Scenario& scenario) {
    if (scenario.dt > 1e-4)
        throw std::invalid_argument("simulate: dt must be <= 1e-4 s");
    if (scenario.store_every < 1)
        throw std::invalid_argument("simulate: store_every must be >= 1");

    SystemModel m = model;  // events mutate the local copy
    Eigen::VectorXd x = m.equilibrium;
    if (scenario.initial_offset.size() > 0) {
        if (scenario.initial_offset.size() != x.size())
            throw std::invalid_argument("simulate: initial offset dimension mismatch");
        x += scenario.initial_offset;
    }

    std::vector<LineStepEvent> pending = scenario.events;
    std::sort(pending.begin(), pending.end(),
              [](const LineStepEvent& a, const LineStepEvent& b) { return a.time < b.time; });
    std::size_t next_event = 0;

    SimTrace trace;
    trace.dt = scenario.dt * scenario.store_every;
    trace.columns = m.state_names();
    trace.columns.insert(trace.columns.end(), {"u_mag", "delta", "i_mag"});

    const auto store = [&](const Eigen::VectorXd& xi) {
        std::vector<double> row(static_cast<std::size_t>(xi.size()) + 3);
        for (int k = 0; k < xi.size(); ++k) row[static_cast<std::size_t>(k)] = xi[k];
        const Observables obs = observe(m, xi);
        row[row.size() - 3] = obs.u_mag;
        row[row.size() - 2] = obs.delta;
        row[row.size() - 1] = obs.i_mag;
        trace.rows.push_back(std::move(row));
    };

    const long n_steps = std::lround(scenario.t_end / scenario.dt);
    store(x);
    for (long step = 0; step < n_steps; ++step) {
        const double t = double(step) * scenario.dt;
        while (next_event < pending.size() && pending[next_event].time <= t + 0.5 * scenario.dt) {
            const LineStepEvent& ev = pending[next_event];
            trace.events.push_back({t, "l_line_pu: " + std::to_string(m.grid.l_line_pu) + " -> " +
                                           std::to_string(ev.l_line_pu)});
            m.grid.l_line_pu = ev.l_line_pu;
            ++next_event;
        }
        const double h = scenario.dt;
        const Eigen::VectorXd k1 = system_rhs(m, x);
        const Eigen::VectorXd k2 = system_rhs(m, x + 0.5 * h * k1);
        const Eigen::VectorXd k3 = system_rhs(m, x + 0.5 * h * k2);
        const Eigen::VectorXd k4 = system_rhs(m, x + h * k3);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        if (!x.allFinite() || x.cwiseAbs().maxCoeff() > 1e6) {
            trace.diverged = true;
            trace.diverged_at = t + h;
            break;
        }
        if ((step + 1) % scenario.store_every == 0) store(x);
    }
    return trace;
}

/// Central finite-difference Jacobian of the full system at its equilibrium,
/// with one Richardson extrapolation level per entry.
inline Eigen::MatrixXd linearize_numeric(const SystemModel& model) {
    const Eigen::VectorXd& x0 = model.equilibrium;
    const Eigen::VectorXd r0 = system_rhs(model, x0);
    const double res = r0.cwiseAbs().maxCoeff();
    if (res > 1e-9)
        throw std::runtime_error("linearize_numeric: base point is not an equilibrium (residual " +
                                 std::to_string(res) + ")");
    const int n = model.n_states();
    Eigen::MatrixXd a(n, n);
    for (int k = 0; k < n; ++k) {
        for (int row = 0; row < n; ++row) {
            a(row, k) = detail::richardson_derivative(
                [&](double v) {
                    Eigen::VectorXd x = x0;
                    x[k] = v;
                    return system_rhs(model, x)[row];
                },
                x0[k], 1e4);
        }
    }
    return a;
}

/// Full spectrum sorted by real part descending. Each pair is validated
/// against the residual ||A v - lambda v|| <= 1e-8 ||A||.
inline std::vector<Complex> eigenvalues(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("eigenvalues: matrix must be square");
    if (!a.allFinite()) throw std::invalid_argument("eigenvalues: matrix has non-finite entries");
    Eigen::EigenSolver<Eigen::MatrixXd> solver(a);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigenvalues: QR iteration failed to converge");
    const double norm = a.norm();
    std::vector<Complex> out;
    out.reserve(static_cast<std::size_t>(a.rows()));
    for (int i = 0; i < a.rows(); ++i) {
        const Complex lambda = solver.eigenvalues()(i);
        const Eigen::VectorXcd v = solver.eigenvectors().col(i);
        const double resid = (a.cast<Complex>() * v - lambda * v).norm();
        if (resid > 1e-8 * std::max(norm, 1.0))
            throw std::runtime_error("eigenvalues: residual " + std::to_string(resid) + " exceeds tolerance");
        out.push_back(lambda);
    }
    std::sort(out.begin(), out.end(), [](const Complex& x, const Complex& y) {
        if (x.real() != y.real()) return x.real() > y.real();
        return x.imag() > y.imag();
    });
    return out;
}

namespace detail {

/// In-place iterative radix-2 FFT (input zero-padded to a power of two by
/// the caller).
inline void fft_radix2(std::vector<Complex>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j |= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * std::numbers::pi / double(len);
        const Complex wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            Complex w(1.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                Complex u = a[i + k];
                Complex v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

}  // namespace detail

struct DominantMode {
    double f_hz = 0.0;
    double amplitude = 0.0;
    double growth_rate = 0.0;  ///< 1/s, from a log-envelope linear fit
};

/// Dominant oscillatory component of a trace signal over [t0, t1]:
/// linear-detrended, Hann-windowed spectrum with parabolic peak
/// interpolation, refined by complex demodulation (one-cycle boxcar), which
/// also yields the exponential growth rate. A signal with no oscillatory
/// content reports f = 0 with zero amplitude.
inline DominantMode dominant_frequency(const SimTrace& trace, const std::string& signal,
                                       double t0, double t1) {
    if (trace.rows.size() < 4) throw std::invalid_argument("dominant_frequency: trace too short");
    const std::size_t i0 = static_cast<std::size_t>(std::ceil(t0 / trace.dt));
    const std::size_t i1 = static_cast<std::size_t>(std::floor(t1 / trace.dt));
    if (i1 >= trace.rows.size() || i0 >= i1)
        throw std::invalid_argument("dominant_frequency: window outside trace");
    const std::size_t n = i1 - i0 + 1;
    const double fs = 1.0 / trace.dt;

    const std::size_t col = trace.column_index(signal);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = trace.rows[i0 + i][col];

    // Linear detrend (least squares on t).
    {
        double sw = double(n), st = 0, stt = 0, sx = 0, stx = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = double(i);
            st += t; stt += t * t; sx += x[i]; stx += t * x[i];
        }
        const double det = sw * stt - st * st;
        const double slope = (sw * stx - st * sx) / det;
        const double icept = (sx - slope * st) / sw;
        for (std::size_t i = 0; i < n; ++i) x[i] -= icept + slope * double(i);
    }

    std::size_t nfft = 1;
    while (nfft < n) nfft <<= 1;
    std::vector<Complex> spec(nfft, Complex(0.0));
    for (std::size_t i = 0; i < n; ++i) {
        const double hann = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * double(i) / double(n - 1));
        spec[i] = Complex(x[i] * hann);
    }
    detail::fft_radix2(spec);

    std::size_t peak = 0;
    double peak_mag = 0.0;
    for (std::size_t k = 1; k < nfft / 2; ++k) {
        const double mag = std::abs(spec[k]);
        if (mag > peak_mag) {
            peak_mag = mag;
            peak = k;
        }
    }
    const double rms = [&] {
        double acc = 0.0;
        for (double v : x) acc += v * v;
        return std::sqrt(acc / double(n));
    }();
    if (peak == 0 || peak_mag < 1e-12 * std::max(1.0, rms) || rms < 1e-14) {
        return {0.0, 0.0, 0.0};  // pure trend / DC
    }

    // Parabolic interpolation on log magnitude around the peak bin.
    double delta = 0.0;
    if (peak + 1 < nfft / 2 && peak >= 1) {
        const double m0 = std::log(std::abs(spec[peak - 1]) + 1e-300);
        const double m1 = std::log(std::abs(spec[peak]) + 1e-300);
        const double m2 = std::log(std::abs(spec[peak + 1]) + 1e-300);
        const double denom = m0 - 2.0 * m1 + m2;
        if (std::abs(denom) > 1e-12) delta = std::clamp(0.5 * (m0 - m2) / denom, -0.5, 0.5);
    }
    double f_est = (double(peak) + delta) * fs / double(nfft);

    const double window_s = double(n - 1) / fs;
    if (f_est > 0.0 && window_s * f_est < 20.0)
        throw std::invalid_argument("dominant_frequency: window shorter than 20 cycles of the dominant mode");

    // Complex demodulation at f_est; boxcar over one estimated cycle removes
    // the double-frequency image, leaving a slowly varying envelope/phase.
    const std::size_t cycle = std::max<std::size_t>(2, std::size_t(std::lround(fs / f_est)));
    if (n < 4 * cycle) return {f_est, 2.0 * peak_mag / double(n), 0.0};
    std::vector<Complex> z(n);
    for (std::size_t i = 0; i < n; ++i)
        z[i] = x[i] * std::exp(Complex(0.0, -2.0 * std::numbers::pi * f_est * double(i) / fs));
    const std::size_t m = n - cycle + 1;
    std::vector<Complex> env(m);
    Complex acc(0.0);
    for (std::size_t i = 0; i < cycle; ++i) acc += z[i];
    env[0] = acc / double(cycle);
    for (std::size_t i = 1; i < m; ++i) {
        acc += z[i + cycle - 1] - z[i - 1];
        env[i] = acc / double(cycle);
    }

    // Least-squares lines through log|env| (growth) and unwrapped arg(env)
    // (residual frequency). Trim the ends where the boxcar is transient.
    const std::size_t lo = m / 10, hi = m - m / 10;
    double sw = 0, st = 0, stt = 0, sl = 0, stl = 0, sp = 0, stp = 0;
    double prev_phase = std::arg(env[lo]);
    double unwrapped = prev_phase;
    for (std::size_t i = lo; i < hi; ++i) {
        const double t = double(i) / fs;
        const double mag = std::abs(env[i]);
        if (mag < 1e-300) continue;
        double ph = std::arg(env[i]);
        double dph = ph - prev_phase;
        while (dph > std::numbers::pi) dph -= 2.0 * std::numbers::pi;
        while (dph < -std::numbers::pi) dph += 2.0 * std::numbers::pi;
        unwrapped += dph;
        prev_phase = ph;
        sw += 1.0; st += t; stt += t * t;
        sl += std::log(mag); stl += t * std::log(mag);
        sp += unwrapped; stp += t * unwrapped;
    }
    const double det = sw * stt - st * st;
    DominantMode mode;
    mode.growth_rate = (sw * stl - st * sl) / det;
    const double dfreq = ((sw * stp - st * sp) / det) / (2.0 * std::numbers::pi);
    mode.f_hz = f_est + dfreq;
    // Envelope magnitude at the window midpoint, doubled to peak amplitude.
    mode.amplitude = 2.0 * std::abs(env[m / 2]);
    return mode;
}

}  // namespace gisc
