#include <doctest.h>

#include <cmath>
#include <random>

#include "hypervlasov/kinetic.hpp"
#include "hypervlasov/scenario.hpp"

using namespace hv;

namespace {

DistributionSpec baseline_spec(const SurfaceMetric& m, double amplitude = 1.0) {
    // alpha = 0.5 exponential scenario data
    return DistributionSpec::make(m, BumpProfile{1.0, 2.0, 0.25, 0.25},
                                  BumpProfile{-0.5, 0.5, 0.15, 0.15},
                                  BumpProfile{0.5, 1.0, 0.04, 0.15},
                                  BumpProfile{-0.5, 0.5, 0.15, 0.15}, amplitude);
}

DistributionSpec polynomial_spec(const SurfaceMetric& m) {
    // alpha = 0 (support reaches E = 0), full fiber circle
    return DistributionSpec::make(m, BumpProfile{1.0, 2.0, 0.25, 0.25},
                                  BumpProfile{-0.5, 0.5, 0.15, 0.15},
                                  BumpProfile{0.0, 1.0, -1.0, 0.2},
                                  BumpProfile{-4.0, 4.0, 0.15, 0.15}, 1.0);
}

// dense midpoint-rule reference for rho at t = 0
double midpoint_rho0(const DistributionSpec& spec, const SurfaceMetric& m, double r,
                     double theta, int n) {
    const double ps = m.psi(r);
    const double vmax = spec.e_bump.hi * 1.05;
    const double a = 2 * vmax / n, b = 2 * vmax / ps / n;
    double sum = 0.0;
    PhasePoint p;
    p.r = r;
    p.theta = theta;
    for (int i = 0; i < n; ++i) {
        p.v_r = -vmax + (i + 0.5) * a;
        for (int j = 0; j < n; ++j) {
            p.v_theta = -vmax / ps + (j + 0.5) * b;
            sum += spec.value(m, p);
        }
    }
    return sum * a * b * ps;  // volume element psi dv_r dv_theta
}

}  // namespace

TEST_CASE("bump profiles are C1 plateaus") {
    BumpProfile b{1.0, 2.0, 0.25, 0.25};
    CHECK(b.value(0.99) == 0.0);
    CHECK(b.value(1.5) == 1.0);
    CHECK(b.value(2.01) == 0.0);
    // centered difference matches the analytic derivative
    for (double x : {1.1, 1.2, 1.9, 1.97}) {
        const double fd = (b.value(x + 1e-6) - b.value(x - 1e-6)) / 2e-6;
        CHECK(b.derivative(x) == doctest::Approx(fd).epsilon(1e-6));
    }
    // one-sided plateau
    BumpProfile one{0.0, 1.0, -1.0, 0.2};
    CHECK(one.value(0.0) == 1.0);
    CHECK(one.value(0.5) == 1.0);
}

TEST_CASE("distribution invariants") {
    const auto m = SurfaceMetric::hyperbolic();
    const auto spec = baseline_spec(m);
    CHECK(spec.alpha == 0.5);
    // support inside D_alpha: f > 0 implies E >= alpha
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> ur(0.8, 2.2), ue(0.0, 1.2), uphi(-3.14, 3.14);
    for (int i = 0; i < 3000; ++i) {
        const PhasePoint p = phase_point_polar(m, ur(rng), 0.1, ue(rng), uphi(rng));
        const double f = spec.value(m, p);
        CHECK(f >= 0.0);
        if (f > 0) CHECK(m.energy(p) >= spec.alpha);
    }
    // data reaching E=0 with phi dependence is rejected
    CHECK_THROWS_AS((void)DistributionSpec::make(m, BumpProfile{1, 2, 0.2, 0.2},
                                                 BumpProfile{-0.5, 0.5, 0.1, 0.1},
                                                 BumpProfile{0.0, 1.0, -1.0, 0.2},
                                                 BumpProfile{-0.5, 0.5, 0.1, 0.1}, 1.0),
                    std::invalid_argument);
}

TEST_CASE("transport preserves values along characteristics") {
    const auto m = SurfaceMetric::hyperbolic();
    IntegratorConfig cfg;
    const auto spec = baseline_spec(m);

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> ur(1.0, 2.0), uth(-0.4, 0.4), ue(0.55, 0.95),
        uphi(-0.4, 0.4);
    double sup_t = 0.0, sup_0 = 0.0;
    for (int i = 0; i < 50; ++i) {
        const PhasePoint p0 = phase_point_polar(m, ur(rng), uth(rng), ue(rng), uphi(rng));
        const double t = 4.0;
        const PhasePoint pt = exact_flow_h2(p0, t);
        CHECK(std::fabs(evaluate_f(spec, m, t, pt, cfg) - spec.value(m, p0)) <= 1e-10);
        sup_t = std::max(sup_t, evaluate_f(spec, m, t, pt, cfg));
        sup_0 = std::max(sup_0, spec.value(m, p0));
    }
    // maximum principle: the sup over transported samples matches the initial sup
    CHECK(std::fabs(sup_t - sup_0) <= 1e-12);
    CHECK(evaluate_f(spec, m, 0.0, phase_point_polar(m, 1.5, 0, 0.75, 0.1), cfg) ==
          spec.value(m, phase_point_polar(m, 1.5, 0, 0.75, 0.1)));

    const auto zero = baseline_spec(m, 0.0);
    CHECK(evaluate_f(zero, m, 3.0, phase_point_polar(m, 2.5, 0, 0.7, 0.0), cfg) == 0.0);
}

TEST_CASE("through-pole and chart-exit handling") {
    IntegratorConfig cfg;
    const auto h2 = SurfaceMetric::hyperbolic();
    const auto spec_h2 = polynomial_spec(h2);
    // ingoing node whose backward characteristic passes the pole: handled by the
    // global embedding, value is an honest f0 evaluation (here 0 by the theta bump)
    const PhasePoint node = phase_point_polar(h2, 1.5, 0.0, 0.6, 3.14159);
    CHECK_NOTHROW((void)evaluate_f(spec_h2, h2, 10.0, node, cfg));
    CHECK(evaluate_f(spec_h2, h2, 10.0, node, cfg) == 0.0);

    const auto ah = SurfaceMetric::warped_ah(0.1, 3.0);
    const auto spec_ah = baseline_spec(ah);
    // outgoing node at a far probe, backward flow overshoots the pole
    const PhasePoint far = phase_point_polar(ah, 4.0, 0.0, 1.0, 0.0);
    CHECK(evaluate_f(spec_ah, ah, 12.0, far, cfg) == 0.0);
}

TEST_CASE("support box: paper bound and containment audit") {
    CHECK(paper_vtheta_bound(1.0, 0.5, 0.5, 4.0) ==
          doctest::Approx(0.2706705664732254).epsilon(1e-12));

    const auto m = SurfaceMetric::hyperbolic();
    IntegratorConfig cfg;
    const auto spec = baseline_spec(m);

    // t = 0 box: exact E range, phi box contains the declared one
    const SupportBox b0 = support_box(spec, m, 0.0, 1.5);
    CHECK(b0.e_lo == 0.5);
    CHECK(b0.e_hi == 1.0);
    CHECK(b0.phi_halfwidth >= 0.5);

    // rejection-sampling containment: f > 0 implies the box holds the sample
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> uphi(-3.141592653589793, 3.141592653589793),
        ue(0.0, 1.05);
    for (double t : {2.0, 6.0, 10.0}) {
        for (double lead : {0.5, 1.5}) {
            const double rp = tracked_radius(m, 0.5, 2.0 + lead, t);
            const SupportBox box = support_box(spec, m, t, rp);
            for (int i = 0; i < 10000; ++i) {
                const double E = ue(rng), phi = uphi(rng);
                const PhasePoint p = phase_point_polar(m, rp, 0.0, E, phi);
                if (evaluate_f(spec, m, t, p, cfg) > 0) {
                    CHECK(E >= box.e_lo - 1e-12);
                    CHECK(E <= box.e_hi + 1e-12);
                    CHECK(std::fabs(m.psi(rp) * p.v_theta) <= box.vtheta_psi_bound + 1e-12);
                    const double w = std::remainder(phi, 2 * 3.141592653589793);
                    const bool in_out = std::fabs(w) <= box.phi_halfwidth + 1e-12;
                    const bool in_in =
                        std::fabs(std::remainder(w - 3.141592653589793, 2 * 3.141592653589793)) <=
                        box.phi_halfwidth + 1e-12;
                    CHECK((in_out || (!box.outgoing_only && in_in)));
                }
            }
        }
    }
}

TEST_CASE("spatial density against the dense midpoint oracle at t = 0") {
    const auto m = SurfaceMetric::hyperbolic();
    IntegratorConfig cfg;
    const auto spec = baseline_spec(m);
    for (double r : {1.3, 1.7}) {
        const DensityResult d = spatial_density(spec, m, 0.0, r, 0.1, 1e-9, cfg);
        const double ref = midpoint_rho0(spec, m, r, 0.1, 2000);
        CHECK(d.rho == doctest::Approx(ref).epsilon(1e-6));
    }
    const auto zero = baseline_spec(m, 0.0);
    CHECK(spatial_density(zero, m, 0.0, 1.5, 0.0, 1e-9, cfg).rho == 0.0);
}

TEST_CASE("rotational equivariance of the density") {
    const auto m = SurfaceMetric::hyperbolic();
    IntegratorConfig cfg;
    const auto spec = baseline_spec(m);
    const double dth = 0.8;
    const auto spec_rot = DistributionSpec::make(
        m, spec.r_bump, BumpProfile{-0.5 + dth, 0.5 + dth, 0.15, 0.15}, spec.e_bump,
        spec.phi_bump, 1.0);
    const double t = 4.0;
    const double rp = tracked_radius(m, 0.5, 3.0, t);
    const double a = spatial_density(spec, m, t, rp, 0.1, 1e-8, cfg).rho;
    const double b = spatial_density(spec_rot, m, t, rp, 0.1 + dth, 1e-8, cfg).rho;
    CHECK(std::fabs(a - b) <= 1e-10 * std::max(1.0, std::fabs(a)));
}

TEST_CASE("gradient routes agree and respect symmetry") {
    const auto m = SurfaceMetric::hyperbolic();
    IntegratorConfig cfg;
    const auto spec = baseline_spec(m);
    for (double t : {3.0, 6.0}) {
        for (double th : {0.0, 0.45}) {
            const double rp = tracked_radius(m, 0.5, 2.5, t);
            const GradientResult a = density_gradient(spec, m, t, rp, th, 1e-10, cfg);
            const GradientResult b = density_gradient_fd(spec, m, t, rp, th, 1e-10, cfg);
            const double scale =
                std::max({std::fabs(a.d_r), std::fabs(a.d_theta_n), 1e-12});
            const double slack = 3.0 * (a.error + b.error);
            CHECK(std::fabs(a.d_r - b.d_r) <= 1e-4 * scale + slack);
            CHECK(std::fabs(a.d_theta_n - b.d_theta_n) <= 1e-4 * scale + slack);
        }
    }

    // rotationally symmetric data: normalized theta derivative vanishes
    const auto sym = DistributionSpec::make(m, spec.r_bump, BumpProfile{-9.0, 9.0, -1.0, 0.05},
                                            spec.e_bump, spec.phi_bump, 1.0);
    const GradientResult g = density_gradient(sym, m, 3.0, tracked_radius(m, 0.5, 2.5, 3.0),
                                              0.3, 1e-9, cfg);
    CHECK(std::fabs(g.d_theta_n) <= 1e-8);

    const auto zero = baseline_spec(m, 0.0);
    const GradientResult z = density_gradient(zero, m, 3.0, 3.0, 0.0, 1e-9, cfg);
    CHECK(z.d_r == 0.0);
    CHECK(z.d_theta_n == 0.0);
}

TEST_CASE("gradient routes agree on WarpedAH") {
    const auto m = SurfaceMetric::warped_ah(0.1, 3.0);
    IntegratorConfig cfg;
    const auto spec = baseline_spec(m);
    const double t = 3.0;
    const double rp = tracked_radius(m, 0.5, 2.5, t);
    const GradientResult a = density_gradient(spec, m, t, rp, 0.0, 1e-8, cfg);
    const GradientResult b = density_gradient_fd(spec, m, t, rp, 0.0, 1e-8, cfg);
    const double scale = std::max({std::fabs(a.d_r), std::fabs(a.d_theta_n), 1e-12});
    const double slack = 3.0 * (a.error + b.error);
    CHECK(std::fabs(a.d_r - b.d_r) <= 1e-4 * scale + slack);
    CHECK(std::fabs(a.d_theta_n - b.d_theta_n) <= 1e-4 * scale + slack);
}

TEST_CASE("support geometry") {
    const auto m = SurfaceMetric::hyperbolic();
    IntegratorConfig cfg;
    const auto spec = baseline_spec(m);

    // t = 0 at a support center: volume matches the analytic box area to 2%.
    // area = int E dE dphi over the exact support box (E and phi bumps).
    const SupportGeometry g0 = support_geometry(spec, m, 0.0, 1.5, 0.0, cfg, 220);
    const double area = 0.5 * (1.0 * 1.0 - 0.5 * 0.5) * (2 * 0.5);
    CHECK(g0.volume == doctest::Approx(area).epsilon(0.02));
    CHECK(g0.angular_diameter == doctest::Approx(1.0).epsilon(0.02));

    const auto zero = baseline_spec(m, 0.0);
    const SupportGeometry gz = support_geometry(zero, m, 2.0, 3.0, 0.0, cfg);
    CHECK(gz.volume == 0.0);
    CHECK(gz.angular_diameter == 0.0);
}

TEST_CASE("mass conservation snapshot") {
    const auto m = SurfaceMetric::hyperbolic();
    IntegratorConfig cfg;
    const auto spec = baseline_spec(m);
    const MassResult m0 = total_mass(spec, m, 0.0, 24, 96, 1e-5, cfg);
    const MassResult m5 = total_mass(spec, m, 5.0, 32, 96, 1e-5, cfg);
    CHECK(m0.coverage_ok);
    CHECK(m5.coverage_ok);
    CHECK(std::fabs(m5.mass - m0.mass) <= 1e-3 * m0.mass);

    const auto zero = baseline_spec(m, 0.0);
    CHECK(total_mass(zero, m, 0.0, 8, 8, 1e-5, cfg).mass == 0.0);
}
