#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>

namespace hv::ode {

enum class Method { RK45_adaptive, RK4_fixed };

struct StepperConfig {
    Method method = Method::RK45_adaptive;
    double rel_tol = 1e-12;
    double abs_tol = 1e-14;
    double h_init = 1e-3;
    double h_max = 1.0;
    long max_steps = 2000000;
};

enum class Status { ok, step_budget_exhausted, stopped_by_callback };

template <std::size_t N>
using State = std::array<double, N>;

namespace detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous-extension coefficients (Hairer-Norsett-Wanner).
inline constexpr double d1 = -12715105075.0 / 11282082432.0;
inline constexpr double d3 = 87487479700.0 / 32700410799.0;
inline constexpr double d4 = -10690763975.0 / 1880347072.0;
inline constexpr double d5 = 701980252875.0 / 199316789632.0;
inline constexpr double d6 = -1453857185.0 / 822651844.0;
inline constexpr double d7 = 69997945.0 / 29380423.0;

}  // namespace detail

// Dense interpolant over one accepted Dormand-Prince step [t, t+h].
template <std::size_t N>
struct DenseSegment {
    double t0 = 0, h = 0;
    std::array<State<N>, 5> rcont{};

    State<N> eval(double t) const {
        const double s = (t - t0) / h, s1 = 1.0 - s;
        State<N> y;
        for (std::size_t i = 0; i < N; ++i)
            y[i] = rcont[0][i] +
                   s * (rcont[1][i] +
                        s1 * (rcont[2][i] + s * (rcont[3][i] + s1 * rcont[4][i])));
        return y;
    }
};

// Integrates y' = f(t, y) from t0 to t1 (t1 may be < t0).
// on_step(t, y, segment) is called after every accepted step and may mutate y
// (state rescaling); returning false stops the integration.
template <std::size_t N, typename RHS, typename OnStep>
Status integrate(RHS&& f, State<N>& y, double t0, double t1, const StepperConfig& cfg,
                 OnStep&& on_step) {
    if (t1 == t0) return Status::ok;
    const double dir = t1 > t0 ? 1.0 : -1.0;
    double t = t0;

    if (cfg.method == Method::RK4_fixed) {
        const double h0 = std::min(std::fabs(cfg.h_init), std::fabs(t1 - t0));
        long nsteps = static_cast<long>(std::ceil(std::fabs(t1 - t0) / h0));
        if (nsteps > cfg.max_steps) return Status::step_budget_exhausted;
        const double h = (t1 - t0) / static_cast<double>(nsteps);
        State<N> k1, k2, k3, k4, ytmp;
        for (long s = 0; s < nsteps; ++s) {
            f(t, y, k1);
            for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + 0.5 * h * k1[i];
            f(t + 0.5 * h, ytmp, k2);
            for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + 0.5 * h * k2[i];
            f(t + 0.5 * h, ytmp, k3);
            for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * k3[i];
            f(t + h, ytmp, k4);
            DenseSegment<N> seg;  // linear fallback interpolant endpoints
            seg.t0 = t;
            seg.h = h;
            State<N> y_old = y;
            for (std::size_t i = 0; i < N; ++i)
                y[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
            t = t0 + (s + 1) * h;
            seg.rcont[0] = y_old;
            for (std::size_t i = 0; i < N; ++i) seg.rcont[1][i] = y[i] - y_old[i];
            seg.rcont[2].fill(0.0);
            seg.rcont[3].fill(0.0);
            seg.rcont[4].fill(0.0);
            if (!on_step(t, y, seg)) return Status::stopped_by_callback;
        }
        return Status::ok;
    }

    using namespace detail;
    double h = dir * std::min(std::fabs(cfg.h_init), std::fabs(t1 - t0));
    State<N> k1, k2, k3, k4, k5, k6, k7, ytmp, ynew;
    f(t, y, k1);
    bool first = true;
    double err_prev = 1.0;

    for (long step = 0; step < cfg.max_steps;) {
        if (dir * (t + h - t1) > 0) h = t1 - t;
        for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
        f(t + c2 * h, ytmp, k2);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        f(t + c3 * h, ytmp, k3);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        f(t + c4 * h, ytmp, k4);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        f(t + c5 * h, ytmp, k5);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                  a65 * k5[i]);
        f(t + h, ytmp, k6);
        for (std::size_t i = 0; i < N; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                                  b6 * k6[i]);
        f(t + h, ynew, k7);

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                   e6 * k6[i] + e7 * k7[i]);
            const double sc =
                cfg.abs_tol + cfg.rel_tol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
            const double q = ei / sc;
            err += q * q;
        }
        err = std::sqrt(err / N);
        ++step;

        if (err <= 1.0 || std::fabs(h) <= 1e-14 * std::fabs(t)) {
            DenseSegment<N> seg;
            seg.t0 = t;
            seg.h = h;
            for (std::size_t i = 0; i < N; ++i) {
                const double dy = ynew[i] - y[i];
                const double bspl = h * k1[i] - dy;
                seg.rcont[0][i] = y[i];
                seg.rcont[1][i] = dy;
                seg.rcont[2][i] = bspl;
                seg.rcont[3][i] = dy - h * k7[i] - bspl;
                seg.rcont[4][i] =
                    h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                         d7 * k7[i]);
            }
            t += h;
            y = ynew;
            k1 = k7;  // FSAL
            if (!on_step(t, y, seg)) return Status::stopped_by_callback;
            if (y != ynew) f(t, y, k1);  // state rescaled by the callback
            if (dir * (t - t1) >= 0) return Status::ok;
            // PI controller
            const double fac =
                0.9 * std::pow(err > 0 ? err : 1e-10, -0.7 / 5.0) *
                std::pow(err_prev > 0 ? err_prev : 1e-10, 0.4 / 5.0);
            err_prev = std::max(err, 1e-10);
            h *= std::min(5.0, std::max(0.2, fac));
            first = false;
        } else {
            const double fac = std::max(0.1, 0.9 * std::pow(err, -0.2));
            h *= fac;
            if (first) h *= 0.5;
        }
        if (std::fabs(h) > cfg.h_max) h = dir * cfg.h_max;
        if (!(std::fabs(h) > 0) || !std::isfinite(h)) return Status::step_budget_exhausted;
    }
    return Status::step_budget_exhausted;
}

template <std::size_t N, typename RHS>
Status integrate(RHS&& f, State<N>& y, double t0, double t1, const StepperConfig& cfg) {
    return integrate<N>(std::forward<RHS>(f), y, t0, t1, cfg,
                        [](double, const State<N>&, const DenseSegment<N>&) { return true; });
}

}  // namespace hv::ode
