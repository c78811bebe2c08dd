#include "hypervlasov/kinetic.hpp"

#include <cmath>
#include <stdexcept>

#include "hypervlasov/quadrature.hpp"
#include "hypervlasov/threading.hpp"

namespace hv {

namespace {

constexpr double kPi = 3.141592653589793238462643;

double smoothstep(double u) {
    if (u <= 0) return 0.0;
    if (u >= 1) return 1.0;
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double smoothstep1(double u) {
    if (u <= 0 || u >= 1) return 0.0;
    const double um = 1.0 - u;
    return 30.0 * u * u * um * um;
}

double wrap_pm_pi(double x) {
    return std::remainder(x, 2.0 * kPi);
}

}  // namespace

double BumpProfile::value(double x) const {
    if (x < lo || x > hi) return 0.0;
    double v = 1.0;
    if (w_lo > 0) v *= smoothstep((x - lo) / w_lo);
    v *= smoothstep((hi - x) / w_hi);
    return v;
}

double BumpProfile::derivative(double x) const {
    if (x < lo || x > hi) return 0.0;
    const double su = w_lo > 0 ? smoothstep((x - lo) / w_lo) : 1.0;
    const double sd = smoothstep((hi - x) / w_hi);
    double d = 0.0;
    if (w_lo > 0) d += smoothstep1((x - lo) / w_lo) / w_lo * sd;
    d -= su * smoothstep1((hi - x) / w_hi) / w_hi;
    return d;
}

DistributionSpec DistributionSpec::make(const SurfaceMetric& m, BumpProfile r_bump,
                                        BumpProfile theta_bump, BumpProfile e_bump,
                                        BumpProfile phi_bump, double amplitude) {
    DistributionSpec s;
    s.r_bump = r_bump;
    s.theta_bump = theta_bump;
    s.e_bump = e_bump;
    s.phi_bump = phi_bump;
    s.amplitude = amplitude;
    s.alpha = e_bump.lo > 0 ? e_bump.lo : 0.0;
    if (s.alpha == 0.0 && !s.phi_is_full())
        throw std::invalid_argument(
            "distribution: data reaching E = 0 must have no fiber-angle dependence "
            "(f0 would not be C^1 at v = 0)");
    if (r_bump.lo <= kChartRMin)
        throw std::invalid_argument("distribution: spatial support must satisfy r > r_min");
    // L = sup |l| = sup psi(r) E |sin phi| over the support box; psi increasing.
    double s_max = 1.0;
    if (!s.phi_is_full()) {
        const double lo = phi_bump.lo, hi = phi_bump.hi;
        if ((lo <= kPi / 2 && kPi / 2 <= hi) || (lo <= -kPi / 2 && -kPi / 2 <= hi))
            s_max = 1.0;
        else
            s_max = std::max(std::fabs(std::sin(lo)), std::fabs(std::sin(hi)));
    }
    s.angular_bound = m.psi(r_bump.hi) * e_bump.hi * s_max;
    return s;
}

double DistributionSpec::value(const SurfaceMetric& m, const PhasePoint& p) const {
    const double ps = m.psi(p.r);
    const double b = ps * p.v_theta;
    const double E = std::hypot(p.v_r, b);
    double v = amplitude * r_bump.value(p.r) * theta_bump.value(wrap_pm_pi(p.theta));
    if (v == 0.0) return 0.0;
    v *= e_bump.value(E);
    if (v == 0.0) return 0.0;
    if (!phi_is_full()) {
        if (E <= 0.0) return 0.0;
        v *= phi_bump.value(std::atan2(b, p.v_r));
    }
    return v;
}

DistributionSpec::ValueGrad DistributionSpec::value_grad_rtl(const SurfaceMetric& m, double r,
                                                             double theta, double v_r,
                                                             double l) const {
    ValueGrad g;
    const double ps = m.psi(r), dps = m.dpsi(r);
    const double b = l / ps;
    const double E = std::hypot(v_r, b);
    const double thw = wrap_pm_pi(theta);

    const double br = r_bump.value(r), bth = theta_bump.value(thw), be = e_bump.value(E);
    const double bphi = phi_is_full() ? 1.0 : (E > 0 ? phi_bump.value(std::atan2(b, v_r)) : 0.0);
    g.f = amplitude * br * bth * be * bphi;

    const double dbr = r_bump.derivative(r);
    const double dbth = theta_bump.derivative(thw);
    const double dbe = e_bump.derivative(E);
    const double dbphi = phi_is_full() ? 0.0
                                       : (E > 0 ? phi_bump.derivative(std::atan2(b, v_r)) : 0.0);

    // partials of E and phi in (r, v_r, l) at fixed l
    double dE_dr = 0.0, dE_dvr = 0.0, dE_dl = 0.0;
    double dphi_dr = 0.0, dphi_dvr = 0.0, dphi_dl = 0.0;
    if (E > 1e-12) {
        dE_dr = -l * l * dps / (ps * ps * ps * E);
        dE_dvr = v_r / E;
        dE_dl = l / (ps * ps * E);
        dphi_dr = -v_r * l * dps / (ps * ps * E * E);
        dphi_dvr = -b / (E * E);
        dphi_dl = v_r / (ps * E * E);
    }

    const double A = amplitude;
    g.d_r = A * (dbr * bth * be * bphi + br * bth * (dbe * dE_dr * bphi + be * dbphi * dphi_dr));
    g.d_theta = A * br * dbth * be * bphi;
    g.d_vr = A * br * bth * (dbe * dE_dvr * bphi + be * dbphi * dphi_dvr);
    g.d_l = A * br * bth * (dbe * dE_dl * bphi + be * dbphi * dphi_dl);
    return g;
}

double evaluate_f(const DistributionSpec& spec, const SurfaceMetric& m, double t,
                  const PhasePoint& p, const IntegratorConfig& cfg) {
    if (t == 0.0) return spec.value(m, p);
    if (m.is_hyperbolic()) {
        const RawFlowResult res = exact_flow_h2_unchecked(p, -t);
        return spec.value(m, res.state);
    }
    const FlowResult res = flow_state(m, p, -t, cfg);
    if (res.status == FlowStatus::chart_exit) return 0.0;
    if (res.status == FlowStatus::step_budget_exhausted)
        throw std::runtime_error("evaluate_f: backward integration exhausted its budget");
    return spec.value(m, res.state);
}

double paper_vtheta_bound(double L, double c, double alpha, double t) {
    return L / (c * std::exp(alpha * t));
}

SupportBox support_box(const DistributionSpec& spec, const SurfaceMetric& m, double t,
                       double r, std::optional<double> channel_floor) {
    SupportBox box;
    box.e_lo = spec.e_bump.lo;
    box.e_hi = spec.e_bump.hi;
    // Reachability in E: the backward endpoint sits at distance E t from the
    // probe, and |d(x, O) - d(y, O)| <= d(x, y) with d(., O) = r on warped
    // products; landing requires r_land in [r0, r1].
    if (t > 0) {
        if (r > spec.r_bump.hi) box.e_lo = std::max(box.e_lo, (r - spec.r_bump.hi) / t);
        box.e_hi = std::min(box.e_hi, (r + spec.r_bump.hi) / t);
    }
    // |v^theta psi(r)| = |l| / psi(r) <= L / psi(r): exact on warped products.
    box.vtheta_psi_bound = spec.angular_bound / m.psi(r);
    if (channel_floor && spec.alpha > 0) {
        box.paper_bound =
            1.5 * paper_vtheta_bound(spec.angular_bound, *channel_floor, spec.alpha, t);
        box.vtheta_psi_bound = std::min(box.vtheta_psi_bound, box.paper_bound);
    }
    const double e_floor = std::max(box.e_lo, 1e-6);
    const double s = std::min(1.0, box.vtheta_psi_bound / e_floor);
    box.phi_halfwidth = (box.e_lo <= 0.0 || s >= 1.0) ? kPi : std::asin(s);
    // Ingoing velocities at probes beyond the spatial support flow backward to
    // even larger radii: empty.
    box.outgoing_only = r > spec.r_bump.hi && box.phi_halfwidth < kPi / 2;
    return box;
}

bool scan_support(const DistributionSpec& spec, const SurfaceMetric& m, double t, double r,
                  double theta, const IntegratorConfig& cfg, SupportBox& box, int n_e,
                  int n_phi) {
    const double e0 = 0.0, e1 = box.e_hi;
    double e_min = 1e300, e_max = -1e300, phi_min = 1e300, phi_max = -1e300;
    bool found = false;
    for (int i = 0; i <= n_e; ++i) {
        const double E = e0 + (e1 - e0) * (i + 0.5) / (n_e + 1);
        for (int j = 0; j < n_phi; ++j) {
            const double phi = -kPi + 2 * kPi * (j + 0.5) / n_phi;
            const PhasePoint p = phase_point_polar(m, r, theta, E, phi);
            if (evaluate_f(spec, m, t, p, cfg) > 0) {
                found = true;
                e_min = std::min(e_min, E);
                e_max = std::max(e_max, E);
                phi_min = std::min(phi_min, phi);
                phi_max = std::max(phi_max, phi);
            }
        }
    }
    if (!found) return false;
    const double de = 2.0 * (e1 - e0) / (n_e + 1);
    box.e_lo = std::max(0.0, e_min - de);
    box.e_hi = std::min(e1, e_max + de);
    // islands stay centered at 0 and pi: take the covering half-width
    const double dphi = 2.0 * 2 * kPi / n_phi;
    double hw = std::max(std::fabs(phi_min), std::fabs(phi_max)) + dphi;
    if (hw >= kPi / 2) hw = kPi;
    box.phi_halfwidth = std::min(kPi, hw);
    box.analytic = false;
    return true;
}

namespace {

// phi intervals of the box: outgoing island around 0 and (unless pruned or the
// box is the full circle) the ingoing island around pi.
std::vector<std::pair<double, double>> phi_islands(const SupportBox& box) {
    if (box.phi_halfwidth >= kPi / 2) return {{-kPi, kPi}};
    std::vector<std::pair<double, double>> v;
    v.push_back({-box.phi_halfwidth, box.phi_halfwidth});
    if (!box.outgoing_only) v.push_back({kPi - box.phi_halfwidth, kPi + box.phi_halfwidth});
    return v;
}

SupportBox density_box(const DistributionSpec& spec, const SurfaceMetric& m, double t,
                       double r, double theta, const IntegratorConfig& cfg, bool& empty) {
    SupportBox box = support_box(spec, m, t, r);
    empty = box.e_lo >= box.e_hi;
    if (!empty && spec.alpha <= 0.0) {
        if (!scan_support(spec, m, t, r, theta, cfg, box)) empty = true;
    }
    return box;
}

}  // namespace

DensityResult spatial_density(const DistributionSpec& spec, const SurfaceMetric& m, double t,
                              double r, double theta, double tol, const IntegratorConfig& cfg,
                              long max_nodes, double abs_floor) {
    if (!(tol > 0)) throw std::invalid_argument("spatial_density: tol must be positive");
    m.require_in_chart(r);
    DensityResult out;
    if (spec.amplitude == 0.0) return out;
    bool empty = false;
    const SupportBox box = density_box(spec, m, t, r, theta, cfg, empty);
    if (empty) return out;

    auto integrand = [&](double E, double phi) {
        const PhasePoint p = phase_point_polar(m, r, theta, E, phi);
        return E * evaluate_f(spec, m, t, p, cfg);
    };
    for (auto [p0, p1] : phi_islands(box)) {
        auto res = quad::adaptive_tensor(integrand, box.e_lo, box.e_hi, p0, p1, tol,
                                         max_nodes, 16, 8, abs_floor);
        out.rho += res.value;
        out.error += res.error;
        out.nodes += res.nodes;
        out.converged = out.converged && res.converged;
    }
    out.rho = std::max(out.rho, 0.0);
    return out;
}

namespace {

// d(phi_{-t}) applied to a chart tangent at (r, theta, v_r, l)-coordinates,
// evaluated by centered differences of the exact H2 flow.
std::array<double, 4> push_backward_h2(const PhasePoint& p, const PhaseTangent& w, double t) {
    const double eps = 1e-6 / std::max(1.0, two_norm(w));
    PhasePoint pp = p, pm = p;
    pp.r += eps * w.dr;
    pp.theta += eps * w.dtheta;
    pp.v_r += eps * w.dv_r;
    pp.v_theta += eps * w.dv_theta;
    pm.r -= eps * w.dr;
    pm.theta -= eps * w.dtheta;
    pm.v_r -= eps * w.dv_r;
    pm.v_theta -= eps * w.dv_theta;
    const PhasePoint a = exact_flow_h2_unchecked(pp, -t).state;
    const PhasePoint b = exact_flow_h2_unchecked(pm, -t).state;
    const double inv = 1.0 / (2 * eps);
    const double dth = std::remainder(a.theta - b.theta, 2 * kPi) * inv;
    return {(a.r - b.r) * inv, dth, (a.v_r - b.v_r) * inv, (a.v_theta - b.v_theta) * inv};
}

}  // namespace

GradientResult density_gradient(const DistributionSpec& spec, const SurfaceMetric& m, double t,
                                double r, double theta, double tol, const IntegratorConfig& cfg,
                                long max_nodes) {
    m.require_in_chart(r);
    GradientResult out;
    if (spec.amplitude == 0.0) return out;
    bool empty = false;
    const SupportBox box = density_box(spec, m, t, r, theta, cfg, empty);
    if (empty) return out;

    const double psir = m.psi(r);

    // integrand pair: <grad f0(landing), dphi_{-t}(W_i)> for W_r = Hor(d_r),
    // W_th = Hor(d_theta / psi)
    auto integrand = [&](double E, double phi, double& g_r, double& g_th) {
        const PhasePoint p = phase_point_polar(m, r, theta, E, phi);
        const PhaseTangent wr = m.lift_horizontal(p, 1.0, 0.0);
        const PhaseTangent wth = m.lift_horizontal(p, 0.0, 1.0 / psir);
        g_r = 0.0;
        g_th = 0.0;
        if (m.is_hyperbolic()) {
            const RawFlowResult land = exact_flow_h2_unchecked(p, -t);
            const double psb = m.psi(land.state.r);
            const auto vg = spec.value_grad_rtl(m, land.state.r, land.state.theta,
                                                land.state.v_r, psb * psb * land.state.v_theta);
            if (vg.d_r == 0 && vg.d_theta == 0 && vg.d_vr == 0 && vg.d_l == 0) return;
            for (const PhaseTangent* w : {&wr, &wth}) {
                const auto d = push_backward_h2(p, *w, t);
                // convert (dr, dth, dvr, dvth) to (dr, dth, dvr, dl) at the landing point
                const double dl = 2 * psb * m.dpsi(land.state.r) * land.state.v_theta * d[0] +
                                  psb * psb * d[3];
                const double val = vg.d_r * d[0] + vg.d_theta * d[1] + vg.d_vr * d[2] + vg.d_l * dl;
                (w == &wr ? g_r : g_th) = val;
            }
            return;
        }
        // joint backward variational integration in (r, theta, v_r, l)
        ode::State<12> y{};
        const double ps = m.psi(p.r);
        y[0] = p.r;
        y[1] = p.theta;
        y[2] = p.v_r;
        y[3] = ps * ps * p.v_theta;
        auto to_rtl = [&](const PhaseTangent& w, int off) {
            y[off + 0] = w.dr;
            y[off + 1] = w.dtheta;
            y[off + 2] = w.dv_r;
            y[off + 3] = 2 * ps * m.dpsi(p.r) * p.v_theta * w.dr + ps * ps * w.dv_theta;
        };
        to_rtl(wr, 4);
        to_rtl(wth, 8);
        auto rhs = [&](double, const ode::State<12>& yy, ode::State<12>& dy) {
            const double pr = m.psi(yy[0]), dp = m.dpsi(yy[0]), d2p = m.d2psi(yy[0]);
            const double inv2 = 1.0 / (pr * pr);
            const double l = yy[3];
            // backward flow: negated vector field
            dy[0] = -yy[2];
            dy[1] = -l * inv2;
            dy[2] = -dp * l * l * inv2 / pr;
            dy[3] = 0.0;
            const double dvr_dr = (d2p * pr - 3 * dp * dp) * l * l / (pr * pr * pr * pr);
            for (int off : {4, 8}) {
                dy[off + 0] = -yy[off + 2];
                dy[off + 1] = -(yy[off + 3] * inv2 - 2 * l * dp * inv2 / pr * yy[off + 0]);
                dy[off + 2] = -(dvr_dr * yy[off + 0] + 2 * dp * l * inv2 / pr * yy[off + 3]);
                dy[off + 3] = 0.0;
            }
        };
        bool exited = false;
        auto status = ode::integrate<12>(
            rhs, y, 0.0, t, cfg.stepper(),
            [&](double, ode::State<12>& yy, const ode::DenseSegment<12>&) {
                if (yy[0] <= kChartRMin) {
                    exited = true;
                    return false;
                }
                return true;
            });
        if (exited) return;  // outside the support: gradient vanishes
        if (status == ode::Status::step_budget_exhausted)
            throw std::runtime_error("density_gradient: backward integration budget exhausted");
        const auto vg = spec.value_grad_rtl(m, y[0], y[1], y[2], y[3]);
        g_r = vg.d_r * y[4] + vg.d_theta * y[5] + vg.d_vr * y[6] + vg.d_l * y[7];
        g_th = vg.d_r * y[8] + vg.d_theta * y[9] + vg.d_vr * y[10] + vg.d_l * y[11];
    };

    // two scalar quadratures sharing the box
    for (int comp = 0; comp < 2; ++comp) {
        auto f = [&](double E, double phi) {
            double gr, gth;
            integrand(E, phi, gr, gth);
            return E * (comp == 0 ? gr : gth);
        };
        double total = 0.0, err = 0.0;
        long nodes = 0;
        for (auto [p0, p1] : phi_islands(box)) {
            auto res =
                quad::adaptive_tensor(f, box.e_lo, box.e_hi, p0, p1, tol, max_nodes, 16, 8);
            total += res.value;
            err += res.error;
            nodes += res.nodes;
        }
        (comp == 0 ? out.d_r : out.d_theta_n) = total;
        out.error += err;
        out.nodes += nodes;
    }
    return out;
}

GradientResult density_gradient_fd(const DistributionSpec& spec, const SurfaceMetric& m,
                                   double t, double r, double theta, double tol,
                                   const IntegratorConfig& cfg, double step) {
    GradientResult out;
    const DensityResult rp = spatial_density(spec, m, t, r + step, theta, tol, cfg);
    const DensityResult rm = spatial_density(spec, m, t, r - step, theta, tol, cfg);
    const DensityResult tp = spatial_density(spec, m, t, r, theta + step, tol, cfg);
    const DensityResult tm = spatial_density(spec, m, t, r, theta - step, tol, cfg);
    out.d_r = (rp.rho - rm.rho) / (2 * step);
    out.d_theta_n = (tp.rho - tm.rho) / (2 * step) / m.psi(r);
    out.error = (rp.error + rm.error + tp.error + tm.error) / (2 * step);
    out.nodes = rp.nodes + rm.nodes + tp.nodes + tm.nodes;
    return out;
}

SupportGeometry support_geometry(const DistributionSpec& spec, const SurfaceMetric& m,
                                 double t, double r, double theta, const IntegratorConfig& cfg,
                                 int n) {
    m.require_in_chart(r);
    SupportGeometry out;
    if (spec.amplitude == 0.0) return out;
    bool empty = false;
    const SupportBox box = density_box(spec, m, t, r, theta, cfg, empty);
    if (empty) return out;

    std::vector<double> phis;
    for (auto [p0, p1] : phi_islands(box)) {
        const double de = (box.e_hi - box.e_lo) / n, dp = (p1 - p0) / n;
        for (int i = 0; i < n; ++i) {
            const double E = box.e_lo + (i + 0.5) * de;
            for (int j = 0; j < n; ++j) {
                const double phi = p0 + (j + 0.5) * dp;
                const PhasePoint p = phase_point_polar(m, r, theta, E, phi);
                if (evaluate_f(spec, m, t, p, cfg) > 0) {
                    out.volume += E * de * dp;
                    phis.push_back(std::remainder(phi, 2 * kPi));
                }
            }
        }
    }
    if (phis.size() >= 2) {
        std::sort(phis.begin(), phis.end());
        double max_gap = 2 * kPi - (phis.back() - phis.front());
        for (std::size_t i = 1; i < phis.size(); ++i)
            max_gap = std::max(max_gap, phis[i] - phis[i - 1]);
        const double arc = 2 * kPi - max_gap;
        out.angular_diameter = std::min(arc, kPi);
    }
    return out;
}

MassResult total_mass(const DistributionSpec& spec, const SurfaceMetric& m, double t, int n_r,
                      int n_theta, double fiber_tol, const IntegratorConfig& cfg) {
    const double reach = spec.e_bump.hi * std::fabs(t) + 1.0;
    const double r_lo = std::max(5 * kChartRMin, spec.r_bump.lo - reach);
    const double r_hi = spec.r_bump.hi + reach;
    // sup of rho anywhere: amplitude times the fiber box measure
    const double rho_cap = spec.amplitude * kPi *
                           (spec.e_bump.hi * spec.e_bump.hi - spec.alpha * spec.alpha);
    const double floor = 0.1 * fiber_tol * rho_cap;

    MassResult out;
    // tensor midpoint in theta (periodic) x Gauss panels in r, parallel over
    // radial nodes with a deterministic index-ordered reduction
    const double dth = 2 * kPi / n_theta;
    const double dr = (r_hi - r_lo) / n_r;
    const long n_tasks = static_cast<long>(n_r) * 8;
    std::vector<double> partial(n_tasks, 0.0), row_max(n_tasks, 0.0), row_bnd(n_tasks, 0.0);
    parallel_for(n_tasks, resolve_threads(0), [&](long task) {
        const int i = static_cast<int>(task / 8), g = static_cast<int>(task % 8);
        const double a = r_lo + i * dr;
        const double r = a + 0.5 * dr + 0.5 * dr * quad::detail::gx[g];
        const double wr = 0.5 * dr * quad::detail::gw[g];
        for (int j = 0; j < n_theta; ++j) {
            const double th = -kPi + (j + 0.5) * dth;
            const double rho =
                spatial_density(spec, m, t, r, th, fiber_tol, cfg, 400000, floor).rho;
            partial[task] += rho * m.psi(r) * wr * dth;
            row_max[task] = std::max(row_max[task], rho);
            if (i == n_r - 1 || i == 0) row_bnd[task] = std::max(row_bnd[task], rho);
        }
    });
    double max_rho = 0.0, boundary_rho = 0.0;
    for (long k = 0; k < n_tasks; ++k) {
        out.mass += partial[k];
        max_rho = std::max(max_rho, row_max[k]);
        boundary_rho = std::max(boundary_rho, row_bnd[k]);
    }
    out.coverage_ok = boundary_rho <= 1e-10 * std::max(max_rho, 1e-300);
    return out;
}

}  // namespace hv
