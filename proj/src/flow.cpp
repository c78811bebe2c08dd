#include "hypervlasov/flow.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hv {

ode::StepperConfig IntegratorConfig::stepper() const {
    ode::StepperConfig s;
    s.method = method;
    s.rel_tol = rel_tol;
    s.abs_tol = abs_tol;
    s.h_init = h_init;
    s.h_max = h_max;
    s.max_steps = max_steps;
    return s;
}

void IntegratorConfig::validate() const {
    if (!(rel_tol > 0) || !(abs_tol > 0))
        throw std::invalid_argument("integrator: tolerances must be positive");
    if (!(h_init > 0) || !(h_max > 0) || h_init > h_max)
        throw std::invalid_argument("integrator: requires 0 < h_init <= h_max");
    if (max_steps <= 0) throw std::invalid_argument("integrator: max_steps must be positive");
}

RadialChannels radial_channels(const SurfaceMetric& m, const PhasePoint& p) {
    const double E = m.energy(p);
    if (!(E > 0)) throw std::domain_error("radial_channels: degenerate state (E = 0)");
    const double ch = std::cosh(p.r), sh = std::sinh(p.r);
    return {ch + sh * p.v_r / E, ch - sh * p.v_r / E};
}

double predict_cosh_r(const RadialChannels& ch, double E, double t) {
    return 0.5 * (ch.c_plus * std::exp(E * t) + ch.c_minus * std::exp(-E * t));
}

RawFlowResult exact_flow_h2_unchecked(const PhasePoint& p, double t) {
    const double sh = std::sinh(p.r), chh = std::cosh(p.r);
    const double E = std::hypot(p.v_r, sh * p.v_theta);
    if (E == 0.0 || t == 0.0) return {p, p.r > kChartRMin};

    const double ct = std::cos(p.theta), st = std::sin(p.theta);
    // Minkowski embedding X and velocity V.
    const double X[3] = {chh, sh * ct, sh * st};
    const double V[3] = {p.v_r * sh, p.v_r * chh * ct - p.v_theta * sh * st,
                         p.v_r * chh * st + p.v_theta * sh * ct};
    // gamma(t) = e^{E|t|}/2 (lead + e^{-2E|t|} sub), scaled to avoid overflow.
    double lead[3], sub[3];
    const double sgn = t > 0 ? 1.0 : -1.0;
    for (int i = 0; i < 3; ++i) {
        lead[i] = X[i] + sgn * V[i] / E;
        sub[i] = X[i] - sgn * V[i] / E;
    }
    const double tau = E * std::fabs(t);
    const double q2 = std::exp(-2.0 * tau);
    double W[3], U[3];
    for (int i = 0; i < 3; ++i) {
        W[i] = lead[i] + q2 * sub[i];
        U[i] = sgn * (lead[i] - q2 * sub[i]);
    }
    // cosh r(t) = e^{tau} W0/2, sinh r(t) = e^{tau} S; 1/cosh r(t) = 2 e^{-tau}/W0.
    const double inv_cosh_scaled = std::min(1.0, 2.0 * std::exp(-tau) / W[0]);
    const double S = 0.5 * W[0] * std::sqrt(std::max(0.0, 1.0 - inv_cosh_scaled * inv_cosh_scaled));

    PhasePoint out;
    out.theta = wrap_angle(std::atan2(W[2], W[1]));
    if (S <= 0.0) {
        // Endpoint at the pole itself.
        out.r = 0.0;
        out.v_r = E;
        out.v_theta = 0.0;
        return {out, false};
    }
    out.r = tau + std::log(0.5 * W[0]) +
            std::log1p(std::sqrt(std::max(0.0, 1.0 - inv_cosh_scaled * inv_cosh_scaled)));
    out.v_r = 0.5 * E * U[0] / S;
    const double l0 = sh * sh * p.v_theta;
    const double sinh_rt_scaled = S;  // sinh r(t) = e^{tau} S
    out.v_theta = l0 * std::exp(-2.0 * tau) / (sinh_rt_scaled * sinh_rt_scaled);
    return {out, out.r > kChartRMin};
}

PhasePoint exact_flow_h2(const PhasePoint& p, double t) {
    RawFlowResult res = exact_flow_h2_unchecked(p, t);
    if (!res.in_chart)
        throw std::domain_error("exact_flow_h2: endpoint left the chart (r <= r_min)");
    return res.state;
}

namespace {

struct GeoState {
    // (r, theta, v_r, l)
    ode::State<4> y{};
};

inline ode::State<4> to_internal(const SurfaceMetric& m, const PhasePoint& p) {
    const double ps = m.psi(p.r);
    return {p.r, p.theta, p.v_r, ps * ps * p.v_theta};
}

inline PhasePoint to_phase(const SurfaceMetric& m, const ode::State<4>& y) {
    PhasePoint p;
    p.r = y[0];
    p.theta = wrap_angle(y[1]);
    p.v_r = y[2];
    const double ps = m.psi(y[0]);
    p.v_theta = y[3] / (ps * ps);
    return p;
}

struct GeoRHS {
    const SurfaceMetric* m;
    double sign;  // +1 forward, -1 backward
    void operator()(double, const ode::State<4>& y, ode::State<4>& dy) const {
        const double ps = m->psi(y[0]), dp = m->dpsi(y[0]);
        const double inv2 = 1.0 / (ps * ps);
        dy[0] = sign * y[2];
        dy[1] = sign * y[3] * inv2;
        dy[2] = sign * dp * y[3] * y[3] * inv2 / ps;
        dy[3] = 0.0;
    }
};

inline TrajectoryMonitor make_monitor(const SurfaceMetric& m, double t,
                                      const ode::State<4>& y) {
    TrajectoryMonitor mon;
    mon.t = t;
    mon.r = y[0];
    const double ps = m.psi(y[0]);
    mon.energy = std::hypot(y[2], y[3] / ps);
    mon.angular_momentum = y[3];
    if (mon.energy > 0) {
        const double ch = std::cosh(y[0]), sh = std::sinh(y[0]);
        const double cp = ch + sh * y[2] / mon.energy;
        mon.log_c_plus = cp > 0 ? std::log(cp) : -std::numeric_limits<double>::infinity();
        mon.c_minus = ch - sh * y[2] / mon.energy;
    }
    return mon;
}

}  // namespace

Trajectory integrate_geodesic(const SurfaceMetric& m, const PhasePoint& p, double t,
                              const IntegratorConfig& cfg) {
    cfg.validate();
    m.require_in_chart(p.r);
    Trajectory traj;
    ode::State<4> y = to_internal(m, p);
    traj.samples.push_back({0.0, p});
    traj.monitors.push_back(make_monitor(m, 0.0, y));
    if (t == 0.0 || (p.v_r == 0.0 && p.v_theta == 0.0)) {
        if (t != 0.0) {
            traj.samples.push_back({t, p});
            traj.monitors.push_back(make_monitor(m, t, y));
        }
        return traj;
    }

    const double sign = t > 0 ? 1.0 : -1.0;
    GeoRHS rhs{&m, sign};
    const double E0 = m.energy(p);
    double exit_time = 0.0;
    bool exited = false;
    auto status = ode::integrate<4>(
        rhs, y, 0.0, std::fabs(t), cfg.stepper(),
        [&](double s, ode::State<4>& yy, const ode::DenseSegment<4>& seg) {
            if (yy[0] <= kChartRMin) {
                // bisect the segment for the exit time
                double lo = seg.t0, hi = s;
                for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
                    const double mid = 0.5 * (lo + hi);
                    if (seg.eval(mid)[0] <= kChartRMin)
                        hi = mid;
                    else
                        lo = mid;
                }
                exit_time = sign * hi;
                exited = true;
                return false;
            }
            if (cfg.project_energy_shell) {
                const double ps = m.psi(yy[0]);
                const double E = std::hypot(yy[2], yy[3] / ps);
                if (E > 0) {
                    const double f = E0 / E;
                    yy[2] *= f;
                    yy[3] *= f;
                }
            }
            traj.samples.push_back({sign * s, to_phase(m, yy)});
            traj.monitors.push_back(make_monitor(m, sign * s, yy));
            return true;
        });

    if (exited) {
        traj.status = FlowStatus::chart_exit;
        traj.exit_time = exit_time;
    } else if (status == ode::Status::step_budget_exhausted) {
        traj.status = FlowStatus::step_budget_exhausted;
    }
    return traj;
}

FlowResult flow_state(const SurfaceMetric& m, const PhasePoint& p, double t,
                      const IntegratorConfig& cfg) {
    m.require_in_chart(p.r);
    ode::State<4> y = to_internal(m, p);
    if (t == 0.0 || (p.v_r == 0.0 && p.v_theta == 0.0)) return {p, FlowStatus::ok, 0.0};
    const double sign = t > 0 ? 1.0 : -1.0;
    GeoRHS rhs{&m, sign};
    double exit_time = 0.0;
    bool exited = false;
    auto status = ode::integrate<4>(
        rhs, y, 0.0, std::fabs(t), cfg.stepper(),
        [&](double s, ode::State<4>& yy, const ode::DenseSegment<4>& seg) {
            if (yy[0] <= kChartRMin) {
                double lo = seg.t0, hi = s;
                for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
                    const double mid = 0.5 * (lo + hi);
                    if (seg.eval(mid)[0] <= kChartRMin)
                        hi = mid;
                    else
                        lo = mid;
                }
                exit_time = sign * hi;
                exited = true;
                return false;
            }
            return true;
        });
    FlowResult res;
    res.state = to_phase(m, y);
    if (exited) {
        res.status = FlowStatus::chart_exit;
        res.exit_time = exit_time;
    } else if (status == ode::Status::step_budget_exhausted) {
        res.status = FlowStatus::step_budget_exhausted;
    }
    return res;
}

EscapeResult escape_time(const SurfaceMetric& m, const PhasePoint& p, double R,
                         const IntegratorConfig& cfg, double t_max) {
    m.require_in_chart(p.r);
    if (!(m.energy(p) > 0)) throw std::domain_error("escape_time: degenerate state (E = 0)");
    if (p.r > R) return {EscapeOutcome::already_outside, 0.0, true};

    ode::State<4> y = to_internal(m, p);
    GeoRHS rhs{&m, 1.0};
    EscapeResult res;
    bool found = false;
    double prev_r = p.r;
    auto status = ode::integrate<4>(
        rhs, y, 0.0, t_max, cfg.stepper(),
        [&](double s, ode::State<4>& yy, const ode::DenseSegment<4>& seg) {
            if (!found && yy[0] > R) {
                double lo = seg.t0, hi = s;
                while (hi - lo > 1e-9) {
                    const double mid = 0.5 * (lo + hi);
                    if (seg.eval(mid)[0] > R)
                        hi = mid;
                    else
                        lo = mid;
                }
                res.t = hi;
                found = true;
            } else if (found && yy[0] < prev_r) {
                res.monotone_after = false;
            }
            prev_r = yy[0];
            // run a short grace interval past the crossing to check monotonicity
            return !(found && s > res.t + 1.0);
        });
    if (!found) {
        res.outcome = EscapeOutcome::budget_exhausted;
        res.t = t_max;
        (void)status;
        return res;
    }
    res.outcome = EscapeOutcome::escaped;
    return res;
}

double chart_distance(const PhasePoint& a, const PhasePoint& b) {
    const double dth = std::remainder(a.theta - b.theta, 2 * M_PI);
    return std::sqrt((a.r - b.r) * (a.r - b.r) + dth * dth + (a.v_r - b.v_r) * (a.v_r - b.v_r) +
                     (a.v_theta - b.v_theta) * (a.v_theta - b.v_theta));
}

}  // namespace hv
