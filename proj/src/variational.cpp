#include "hypervlasov/variational.hpp"

#include <cmath>
#include <stdexcept>

namespace hv {

namespace {

constexpr double kRenormThreshold = 1e100;

// Joint geodesic + one normal Jacobi pair: (r, theta, v_r, l, jn, jn_dot).
struct GeoJacobiRHS {
    const SurfaceMetric* m;
    double sign;
    void operator()(double, const ode::State<6>& y, ode::State<6>& dy) const {
        const double ps = m->psi(y[0]), dp = m->dpsi(y[0]), d2p = m->d2psi(y[0]);
        const double inv2 = 1.0 / (ps * ps);
        const double E2 = y[2] * y[2] + y[3] * y[3] * inv2;
        const double K = -d2p / ps;
        dy[0] = sign * y[2];
        dy[1] = sign * y[3] * inv2;
        dy[2] = sign * dp * y[3] * y[3] * inv2 / ps;
        dy[3] = 0.0;
        dy[4] = sign * y[5];
        dy[5] = sign * (-E2 * K) * y[4];
    }
};

// Joint geodesic + two normal Jacobi pairs (for the flow differential).
struct GeoJacobi2RHS {
    const SurfaceMetric* m;
    void operator()(double, const ode::State<8>& y, ode::State<8>& dy) const {
        const double ps = m->psi(y[0]), dp = m->dpsi(y[0]), d2p = m->d2psi(y[0]);
        const double inv2 = 1.0 / (ps * ps);
        const double E2 = y[2] * y[2] + y[3] * y[3] * inv2;
        const double mKE2 = E2 * d2p / ps;  // -E^2 K
        dy[0] = y[2];
        dy[1] = y[3] * inv2;
        dy[2] = dp * y[3] * y[3] * inv2 / ps;
        dy[3] = 0.0;
        dy[4] = y[5];
        dy[5] = mKE2 * y[4];
        dy[6] = y[7];
        dy[7] = mKE2 * y[6];
    }
};

ode::State<4> geo_internal(const SurfaceMetric& m, const PhasePoint& p) {
    const double ps = m.psi(p.r);
    return {p.r, p.theta, p.v_r, ps * ps * p.v_theta};
}

PhasePoint geo_phase(const SurfaceMetric& m, const ode::State<4>& y) {
    PhasePoint p;
    p.r = y[0];
    p.theta = wrap_angle(y[1]);
    p.v_r = y[2];
    const double ps = m.psi(y[0]);
    p.v_theta = y[3] / (ps * ps);
    return p;
}

// Propagate (jn, jn_dot) with the geodesic over [0, t] (t may be negative);
// returns accumulated log scale; state updated in place.
double run_joint(const SurfaceMetric& m, ode::State<6>& y, double t,
                 const IntegratorConfig& cfg) {
    if (t == 0.0) return 0.0;
    const double sign = t > 0 ? 1.0 : -1.0;
    GeoJacobiRHS rhs{&m, sign};
    double log_scale = 0.0;
    auto status = ode::integrate<6>(
        rhs, y, 0.0, std::fabs(t), cfg.stepper(),
        [&](double, ode::State<6>& yy, const ode::DenseSegment<6>&) {
            if (yy[0] <= kChartRMin)
                throw std::domain_error("jacobi propagation: trajectory left the chart");
            const double mag = std::max(std::fabs(yy[4]), std::fabs(yy[5]));
            if (mag > kRenormThreshold) {
                yy[4] /= mag;
                yy[5] /= mag;
                log_scale += std::log(mag);
            }
            return true;
        });
    if (status == ode::Status::step_budget_exhausted)
        throw std::runtime_error("jacobi propagation: step budget exhausted");
    return log_scale;
}

}  // namespace

double FlowDifferential::det() const {
    // Expansion by the (0,2)-block structure is not assumed; plain long double LU.
    long double b[4][4];
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) b[i][j] = a[i][j];
    long double det = 1.0L;
    for (int c = 0; c < 4; ++c) {
        int piv = c;
        for (int rr = c + 1; rr < 4; ++rr)
            if (std::fabs((double)b[rr][c]) > std::fabs((double)b[piv][c])) piv = rr;
        if (b[piv][c] == 0.0L) return 0.0;
        if (piv != c) {
            for (int j = 0; j < 4; ++j) std::swap(b[piv][j], b[c][j]);
            det = -det;
        }
        det *= b[c][c];
        for (int rr = c + 1; rr < 4; ++rr) {
            const long double f = b[rr][c] / b[c][c];
            for (int j = c; j < 4; ++j) b[rr][j] -= f * b[c][j];
        }
    }
    return static_cast<double>(det);
}

JacobiState propagate_jacobi(const SurfaceMetric& m, const PhasePoint& p,
                             const JacobiState& j0, double t, const IntegratorConfig& cfg) {
    cfg.validate();
    JacobiState out = j0;
    out.j0 = j0.j0 + t * j0.j0_dot;  // tangential block is free motion
    ode::State<6> y{};
    auto g = geo_internal(m, p);
    for (int i = 0; i < 4; ++i) y[i] = g[i];
    y[4] = j0.jn;
    y[5] = j0.jn_dot;
    out.log_scale = j0.log_scale + run_joint(m, y, t, cfg);
    out.jn = y[4];
    out.jn_dot = y[5];
    return out;
}

FlowDifferential flow_differential(const SurfaceMetric& m, const PhasePoint& p, double t,
                                   const IntegratorConfig& cfg) {
    cfg.validate();
    if (!(m.energy(p) > 0))
        throw std::domain_error("flow_differential: frame undefined at E = 0");

    ode::State<8> y{};
    auto g = geo_internal(m, p);
    for (int i = 0; i < 4; ++i) y[i] = g[i];
    y[4] = 1.0;  // (J, J') = (1, 0): image of Hor(N)
    y[5] = 0.0;
    y[6] = 0.0;  // (J, J') = (0, 1): image of Ver(N)
    y[7] = 1.0;

    if (t != 0.0) {
        GeoJacobi2RHS rhs{&m};
        // backward: flip velocities, run forward, flip back; Jacobi eq is even in time
        // reversal of the base point only through K(r(t)), so integrate directly.
        const double sign = t > 0 ? 1.0 : -1.0;
        auto f = [&](double s, const ode::State<8>& yy, ode::State<8>& dy) {
            rhs(s, yy, dy);
            if (sign < 0)
                for (auto& v : dy) v = -v;
        };
        auto status = ode::integrate<8>(
            f, y, 0.0, std::fabs(t), cfg.stepper(),
            [&](double, ode::State<8>& yy, const ode::DenseSegment<8>&) {
                if (yy[0] <= kChartRMin)
                    throw std::domain_error("flow_differential: trajectory left the chart");
                return true;
            });
        if (status == ode::Status::step_budget_exhausted)
            throw std::runtime_error("flow_differential: step budget exhausted");
    }

    FlowDifferential d;
    d.source = p;
    ode::State<4> yg{y[0], y[1], y[2], y[3]};
    d.target = geo_phase(m, yg);
    // Basis order: (Hor gd, Hor N, Ver gd, Ver N).
    d.a = {{{1.0, 0.0, t, 0.0},
            {0.0, y[4], 0.0, y[6]},
            {0.0, 0.0, 1.0, 0.0},
            {0.0, y[5], 0.0, y[7]}}};
    return d;
}

namespace {

// q at local time T of the solution with (jn, jn_dot) = (0, 1) at the shifted
// endpoint; branch decides the direction of the shift.
double hopf_q_raw(const SurfaceMetric& m, const PhasePoint& p, double T, RiccatiBranch branch,
                  const IntegratorConfig& cfg, ode::State<6>* end_state = nullptr) {
    const double shift = branch == RiccatiBranch::unstable ? -T : T;
    FlowResult fr = flow_state(m, p, shift, cfg);
    if (fr.status != FlowStatus::ok)
        throw std::domain_error("riccati_hopf: shifted endpoint left the chart");
    PhasePoint pe = fr.state;
    if (branch == RiccatiBranch::stable) {
        pe.v_r = -pe.v_r;  // reversed geodesic
        pe.v_theta = -pe.v_theta;
    }
    ode::State<6> y{};
    auto g = geo_internal(m, pe);
    for (int i = 0; i < 4; ++i) y[i] = g[i];
    y[4] = 0.0;
    y[5] = 1.0;
    run_joint(m, y, T, cfg);
    if (y[4] == 0.0) throw std::runtime_error("riccati_hopf: normal Jacobi component vanished");
    if (end_state) *end_state = y;
    const double q = y[5] / y[4];
    return branch == RiccatiBranch::stable ? -q : q;
}

}  // namespace

RiccatiSample riccati_hopf(const SurfaceMetric& m, const PhasePoint& p, double T,
                           RiccatiBranch branch, const IntegratorConfig& cfg) {
    cfg.validate();
    if (!(T > 0)) throw std::invalid_argument("riccati_hopf: horizon must be positive");
    const double E = m.energy(p);
    if (!(E > 0)) throw std::domain_error("riccati_hopf: degenerate state (E = 0)");

    RiccatiSample s;
    s.horizon = T;
    ode::State<6> end{};
    s.q = hopf_q_raw(m, p, T, branch, cfg, &end);
    // The Hopf error decays like e^{-2ET}, so the T/2-vs-T difference times
    // e^{-ET}/(1 - e^{-ET}) estimates the remaining error at T.
    const double q_half = hopf_q_raw(m, p, 0.5 * T, branch, cfg);
    const double x = std::exp(-E * T);
    const double est_err = std::fabs(s.q - q_half) * x / std::max(1.0 - x, 1e-6);
    s.converged = est_err <= 1e-8;
    if (branch == RiccatiBranch::unstable && !(s.q > 0)) s.converged = false;
    if (branch == RiccatiBranch::stable && !(s.q < 0)) s.converged = false;

    // Residual of Xq + q^2 + E^2 K by a centered difference along the arc.
    const double h = 1e-3;
    ode::State<6> ym = end, yp = end;
    const double sgn = branch == RiccatiBranch::stable ? -1.0 : 1.0;
    run_joint(m, yp, h, cfg);
    run_joint(m, ym, -h, cfg);
    const double qp = sgn * yp[5] / yp[4];
    const double qm = sgn * ym[5] / ym[4];
    // local time of the reversed system runs against t for the stable branch
    const double dq = branch == RiccatiBranch::stable ? (qm - qp) / (2 * h) : (qp - qm) / (2 * h);
    const double K = m.gaussian_curvature(p);
    s.residual = std::fabs(dq + s.q * s.q + E * E * K);
    return s;
}

RiccatiSample riccati_field(const SurfaceMetric& m, const PhasePoint& p, RiccatiBranch branch,
                            const IntegratorConfig& cfg) {
    const double E = m.energy(p);
    if (!(E > 0)) throw std::domain_error("riccati_field: degenerate state (E = 0)");
    double T = std::max(5.0, 10.0 / E);
    double q_prev = hopf_q_raw(m, p, T, branch, cfg);
    for (int i = 0; i < 7; ++i) {
        const double T2 = 2.0 * T;
        const double q2 = hopf_q_raw(m, p, T2, branch, cfg);
        if (std::fabs(q2 - q_prev) <= 1e-8) {
            RiccatiSample s;
            s.q = q2;
            s.horizon = T2;
            s.converged = true;
            s.residual = std::fabs(q2 - q_prev);
            return s;
        }
        T = T2;
        q_prev = q2;
    }
    RiccatiSample s;
    s.q = q_prev;
    s.horizon = T;
    s.converged = false;
    return s;
}

double lyapunov_rate(const SurfaceMetric& m, const PhasePoint& p, double T,
                     const IntegratorConfig& cfg) {
    if (!(T >= 1.0)) throw std::invalid_argument("lyapunov_rate: requires T >= 1");
    const double E = m.energy(p);
    if (!(E > 0)) throw std::domain_error("lyapunov_rate: degenerate state (E = 0)");
    const double qu = m.is_hyperbolic() ? E : riccati_field(m, p, RiccatiBranch::unstable, cfg).q;
    ode::State<6> y{};
    auto g = geo_internal(m, p);
    for (int i = 0; i < 4; ++i) y[i] = g[i];
    y[4] = 1.0;
    y[5] = qu;
    const double n0 = std::hypot(y[4], y[5]);
    const double log_scale = run_joint(m, y, T, cfg);
    return (std::log(std::hypot(y[4], y[5])) + log_scale - std::log(n0)) / T;
}

std::array<std::array<double, 4>, 4> frame_basis_matrix(const SurfaceMetric& m,
                                                        const PhasePoint& p) {
    const FramePair f = m.normal_frame(p);
    const PhaseTangent hg = m.lift_horizontal(p, f.gamma_dot[0], f.gamma_dot[1]);
    const PhaseTangent hn = m.lift_horizontal(p, f.normal[0], f.normal[1]);
    const PhaseTangent vg = SurfaceMetric::lift_vertical(f.gamma_dot[0], f.gamma_dot[1]);
    const PhaseTangent vn = SurfaceMetric::lift_vertical(f.normal[0], f.normal[1]);
    auto col = [](const PhaseTangent& t) {
        return std::array<double, 4>{t.dr, t.dtheta, t.dv_r, t.dv_theta};
    };
    const auto c0 = col(hg), c1 = col(hn), c2 = col(vg), c3 = col(vn);
    std::array<std::array<double, 4>, 4> b{};
    for (int i = 0; i < 4; ++i) {
        b[i] = {c0[i], c1[i], c2[i], c3[i]};
    }
    return b;
}

std::array<double, 4> decompose_in_frame(const SurfaceMetric& m, const PhasePoint& p,
                                         const PhaseTangent& w) {
    const FramePair f = m.normal_frame(p);
    const ChristoffelSymbols c = m.christoffel(p);
    const double E2 = m.energy(p) * m.energy(p);
    // split w = Hor(Yh) + Ver(Yv)
    const double Yh_r = w.dr, Yh_th = w.dtheta;
    const double Yv_r = w.dv_r + Yh_th * p.v_theta * c.r_thth;
    const double Yv_th = w.dv_theta + c.th_rth * (Yh_r * p.v_theta + Yh_th * p.v_r);
    auto project = [&](double Yr, double Yth, double& z0, double& zN) {
        z0 = m.inner(p.r, Yr, Yth, f.gamma_dot[0], f.gamma_dot[1]) / E2;
        zN = m.inner(p.r, Yr, Yth, f.normal[0], f.normal[1]) / E2;
    };
    std::array<double, 4> z{};
    project(Yh_r, Yh_th, z[0], z[1]);
    project(Yv_r, Yv_th, z[2], z[3]);
    return z;
}

PhaseTangent compose_from_frame(const SurfaceMetric& m, const PhasePoint& p,
                                const std::array<double, 4>& z) {
    const FramePair f = m.normal_frame(p);
    const double Yh_r = z[0] * f.gamma_dot[0] + z[1] * f.normal[0];
    const double Yh_th = z[0] * f.gamma_dot[1] + z[1] * f.normal[1];
    const double Yv_r = z[2] * f.gamma_dot[0] + z[3] * f.normal[0];
    const double Yv_th = z[2] * f.gamma_dot[1] + z[3] * f.normal[1];
    PhaseTangent t = m.lift_horizontal(p, Yh_r, Yh_th);
    const PhaseTangent v = SurfaceMetric::lift_vertical(Yv_r, Yv_th);
    return t + v;
}

}  // namespace hv
