#include <doctest.h>

#include <cmath>
#include <random>

#include "hypervlasov/geometry.hpp"

using namespace hv;

TEST_CASE("christoffel symbols on H2 match the closed forms") {
    const auto m = SurfaceMetric::hyperbolic();
    PhasePoint p;
    p.r = 1.0;
    const auto c = m.christoffel(p);
    CHECK(c.r_thth == doctest::Approx(-1.8134302039235094).epsilon(1e-14));
    CHECK(c.th_rth == doctest::Approx(std::cosh(1.0) / std::sinh(1.0)).epsilon(1e-14));

    // flat radial direction: Gamma^r_{rr} = 0 identically (not represented);
    // the lifted generator of a radial state must have no v-drift.
    PhasePoint radial;
    radial.r = 1.7;
    radial.v_r = 1.0;
    const PhaseTangent x = m.geodesic_generator(radial);
    CHECK(x.dv_r == 0.0);
    CHECK(x.dv_theta == 0.0);
}

TEST_CASE("warped AH christoffel converge to H2 values") {
    const auto m = SurfaceMetric::warped_ah(0.1, 3.0);
    PhasePoint p;
    p.r = 5.0;
    const auto c = m.christoffel(p);
    const double coth5 = std::cosh(5.0) / std::sinh(5.0);
    CHECK(std::fabs(c.th_rth - coth5) <= 1e-6);  // perturbation is O(e^{-beta r})
    CHECK(std::fabs(c.th_rth - coth5) ==
          doctest::Approx(1.6490351955e-9).epsilon(1e-3));  // oracle value

    // |Delta Gamma| ~ C e^{-kappa r} with kappa >= beta - 0.3
    double lx = 0, ly = 0, lxx = 0, lxy = 0;
    int n = 0;
    for (int r = 3; r <= 10; ++r) {
        PhasePoint q;
        q.r = r;
        const double d = std::fabs(m.christoffel(q).th_rth -
                                   std::cosh((double)r) / std::sinh((double)r));
        if (d <= 0) continue;
        lx += r;
        ly += std::log(d);
        lxx += r * r;
        lxy += r * std::log(d);
        ++n;
    }
    const double slope = (n * lxy - lx * ly) / (n * lxx - lx * lx);
    CHECK(-slope >= 3.0 - 0.3);
}

TEST_CASE("gaussian curvature") {
    const auto h2 = SurfaceMetric::hyperbolic();
    PhasePoint p;
    p.r = 2.0;
    CHECK(h2.gaussian_curvature(p) == doctest::Approx(-1.0).epsilon(1e-15));

    const auto ah = SurfaceMetric::warped_ah(0.1, 3.0);
    p.r = 1.0;
    CHECK(ah.gaussian_curvature(p) == doctest::Approx(-1.0337487993805621).epsilon(1e-12));
    p.r = 5.0;
    CHECK(std::fabs(ah.gaussian_curvature(p) + 1.0) <= 5e-9);

    p.r = 5e-4;
    CHECK_THROWS_AS((void)h2.gaussian_curvature(p), std::domain_error);
}

TEST_CASE("metric construction validates parameters") {
    CHECK_THROWS_AS((void)SurfaceMetric::warped_ah(0.1, 1.5), std::invalid_argument);
    CHECK_THROWS_AS((void)SurfaceMetric::warped_ah(50.0, 2.5), std::invalid_argument);
    CHECK_NOTHROW((void)SurfaceMetric::warped_ah(0.1, 3.0));
    CHECK_NOTHROW((void)SurfaceMetric::warped_ah(-0.05, 2.5));
}

TEST_CASE("energy and angular momentum") {
    const auto m = SurfaceMetric::hyperbolic();
    PhasePoint p;
    p.r = 1.0;
    p.v_r = 3.0;
    CHECK(m.energy(p) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(m.angular_momentum(p) == 0.0);

    p.v_r = 0.0;
    p.v_theta = 1.0;
    CHECK(m.energy(p) == doctest::Approx(1.1752011936438014).epsilon(1e-14));
    CHECK(m.angular_momentum(p) == doctest::Approx(1.3810978455418157).epsilon(1e-14));

    p.v_theta = 0.0;
    CHECK(m.energy(p) == 0.0);
    CHECK(m.angular_momentum(p) == 0.0);
}

TEST_CASE("normal frame") {
    const auto m = SurfaceMetric::hyperbolic();
    PhasePoint p;
    p.r = 1.0;
    p.v_r = 1.0;
    auto f = m.normal_frame(p);
    CHECK(f.normal[0] == 0.0);
    CHECK(m.psi(p.r) * f.normal[1] == doctest::Approx(1.0).epsilon(1e-15));

    p.v_r = 0.0;
    p.v_theta = 1.0 / std::sinh(1.0);
    f = m.normal_frame(p);
    CHECK(f.normal[0] == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(f.normal[1] == 0.0);

    PhasePoint zero;
    CHECK_THROWS_AS((void)m.normal_frame(zero), std::domain_error);
}

TEST_CASE("frame invariants at random phase points") {
    std::mt19937_64 rng(20240811);
    std::uniform_real_distribution<double> ur(0.2, 6.0), uth(0.0, 6.28), ue(0.05, 3.0),
        uphi(0.0, 6.28);
    for (const auto& m :
         {SurfaceMetric::hyperbolic(), SurfaceMetric::warped_ah(0.1, 3.0)}) {
        for (int i = 0; i < 1000; ++i) {
            const PhasePoint p = phase_point_polar(m, ur(rng), uth(rng), ue(rng), uphi(rng));
            const auto f = m.normal_frame(p);
            const double gnn =
                m.inner(p.r, f.normal[0], f.normal[1], f.normal[0], f.normal[1]);
            const double ggg = m.inner(p.r, f.gamma_dot[0], f.gamma_dot[1], f.gamma_dot[0],
                                       f.gamma_dot[1]);
            const double gng =
                m.inner(p.r, f.normal[0], f.normal[1], f.gamma_dot[0], f.gamma_dot[1]);
            CHECK(std::fabs(gnn - ggg) <= 1e-12 * std::max(1.0, ggg));
            CHECK(std::fabs(gng) <= 1e-12 * std::max(1.0, ggg));
            // positively oriented
            CHECK(f.gamma_dot[0] * f.normal[1] - f.gamma_dot[1] * f.normal[0] > 0.0);
        }
    }
}

TEST_CASE("horizontal and vertical lifts") {
    const auto m = SurfaceMetric::hyperbolic();
    PhasePoint p;
    p.r = 1.3;
    p.v_r = 0.4;
    p.v_theta = 0.7;

    const auto v = SurfaceMetric::lift_vertical(1.0, 0.0);
    CHECK(v.dr == 0.0);
    CHECK(v.dtheta == 0.0);
    CHECK(v.dv_r == 1.0);
    CHECK(v.dv_theta == 0.0);

    // Hor(d_r) = d_r - coth(r) v^theta d_{v^theta}
    const auto h = m.lift_horizontal(p, 1.0, 0.0);
    CHECK(h.dr == 1.0);
    CHECK(h.dtheta == 0.0);
    CHECK(h.dv_r == 0.0);
    CHECK(h.dv_theta ==
          doctest::Approx(-std::cosh(p.r) / std::sinh(p.r) * p.v_theta).epsilon(1e-14));

    PhasePoint radial;
    radial.r = 1.0;
    radial.v_r = 1.0;
    const auto g = m.geodesic_generator(radial);
    CHECK(g.dr == 1.0);
    CHECK(g.dtheta == 0.0);
    CHECK(g.dv_r == 0.0);
    CHECK(g.dv_theta == 0.0);
}
