#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "hypervlasov/flow.hpp"

using namespace hv;

namespace {
PhasePoint mk(double r, double th, double vr, double vth) {
    PhasePoint p;
    p.r = r;
    p.theta = th;
    p.v_r = vr;
    p.v_theta = vth;
    return p;
}
}  // namespace

TEST_CASE("exact flow: radial geodesic and identity") {
    const PhasePoint p = mk(1, 0, 1, 0);
    const PhasePoint q = exact_flow_h2(p, 2.0);
    CHECK(q.r == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(q.theta == doctest::Approx(0.0));
    CHECK(q.v_r == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(q.v_theta == doctest::Approx(0.0));

    const PhasePoint id = exact_flow_h2(mk(1.2, 0.3, 0.5, -0.2), 0.0);
    CHECK(id.r == 1.2);
    CHECK(id.v_theta == -0.2);

    const PhasePoint zero = exact_flow_h2(mk(2, 1, 0, 0), 5.0);
    CHECK(zero.r == 2.0);
    CHECK(zero.v_r == 0.0);
}

TEST_CASE("exact flow: circular-start geodesic oracle values") {
    const auto m = SurfaceMetric::hyperbolic();
    const PhasePoint p = mk(1, 0, 0, 1.0 / std::sinh(1.0));
    CHECK(m.energy(p) == doctest::Approx(1.0).epsilon(1e-14));
    const PhasePoint q = exact_flow_h2(p, 1.0);
    // cosh r(1) = cosh^2(1); r(1) = acosh(cosh^2 1)
    CHECK(q.r == doctest::Approx(1.5133740065965040).epsilon(1e-12));
    CHECK(m.energy(q) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.angular_momentum(q) ==
          doctest::Approx(std::sinh(1.0)).epsilon(1e-12));
}

TEST_CASE("radial channels and the cosh prediction") {
    const auto m = SurfaceMetric::hyperbolic();
    const PhasePoint p = mk(1, 0, 0, 1.0 / std::sinh(1.0));
    const RadialChannels ch = radial_channels(m, p);
    CHECK(ch.c_plus == doctest::Approx(1.5430806348152437).epsilon(1e-14));
    CHECK(ch.c_minus == doctest::Approx(1.5430806348152437).epsilon(1e-14));
    CHECK(predict_cosh_r(ch, 1.0, 1.0) ==
          doctest::Approx(2.3810978455418157).epsilon(1e-14));

    // radial: c_minus = e^{-r}
    const RadialChannels chr = radial_channels(m, mk(1.5, 0, 2.0, 0));
    CHECK(chr.c_minus == doctest::Approx(std::exp(-1.5)).epsilon(1e-13));

    // invariant: c_plus c_minus = 1 + l^2/E^2
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ur(0.5, 4.0), ue(0.1, 2.0), uphi(0.0, 6.28);
    for (int i = 0; i < 200; ++i) {
        const PhasePoint q = phase_point_polar(m, ur(rng), 0.0, ue(rng), uphi(rng));
        const RadialChannels c = radial_channels(m, q);
        const double E = m.energy(q), l = m.angular_momentum(q);
        CHECK(std::fabs(c.c_plus * c.c_minus - (1.0 + l * l / (E * E))) <= 1e-10);
    }
}

TEST_CASE("numeric integration reproduces the exact flow") {
    const auto m = SurfaceMetric::hyperbolic();
    IntegratorConfig cfg;
    for (const PhasePoint p : {mk(1, 0, 1, 0), mk(1, 0, 0, 1.0 / std::sinh(1.0))}) {
        for (double t : {2.0, 1.0}) {
            const Trajectory tr = integrate_geodesic(m, p, t, cfg);
            REQUIRE(tr.status == FlowStatus::ok);
            const PhasePoint exact = exact_flow_h2(p, t);
            CHECK(chart_distance(tr.final_state(), exact) <= 1e-8);
        }
    }
}

TEST_CASE("angular momentum is carried exactly on warped products") {
    const auto m = SurfaceMetric::warped_ah(0.1, 3.0);
    IntegratorConfig cfg;
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> ur(1.0, 3.0), uphi(0.3, 2.8);
    for (int i = 0; i < 10; ++i) {
        const PhasePoint p = phase_point_polar(m, ur(rng), 0.4, 1.0, uphi(rng));
        const Trajectory tr = integrate_geodesic(m, p, 20.0, cfg);
        REQUIRE(tr.status == FlowStatus::ok);
        const double l0 = tr.monitors.front().angular_momentum;
        for (const auto& mon : tr.monitors)
            CHECK(std::fabs(mon.angular_momentum - l0) <= 1e-10 * std::max(1.0, std::fabs(l0)));
    }
}

TEST_CASE("zero velocity is a fixed point; backward flow supported") {
    const auto m = SurfaceMetric::warped_ah(0.1, 3.0);
    IntegratorConfig cfg;
    const Trajectory tr = integrate_geodesic(m, mk(2, 1, 0, 0), 7.0, cfg);
    CHECK(tr.final_state().r == 2.0);

    const PhasePoint p = phase_point_polar(m, 2.0, 0.5, 1.2, 0.9);
    const Trajectory fwd = integrate_geodesic(m, p, 3.0, cfg);
    const Trajectory back = integrate_geodesic(m, fwd.final_state(), -3.0, cfg);
    CHECK(chart_distance(back.final_state(), p) <= 1e-7);
}

TEST_CASE("escape times") {
    const auto m = SurfaceMetric::hyperbolic();
    IntegratorConfig cfg;

    // radial unit speed from r=1: r(t) = 1 + t
    const EscapeResult e1 = escape_time(m, mk(1, 0, 1, 0), 5.0, cfg);
    CHECK(e1.outcome == EscapeOutcome::escaped);
    CHECK(e1.t == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(e1.monotone_after);

    // circular start: cosh r(t) = cosh(1) cosh(t); escape at acosh(cosh2/cosh1)
    const EscapeResult e2 = escape_time(m, mk(1, 0, 0, 1.0 / std::sinh(1.0)), 2.0, cfg);
    CHECK(e2.outcome == EscapeOutcome::escaped);
    CHECK(e2.t == doctest::Approx(1.5393801825068164).epsilon(1e-8));

    const EscapeResult e3 = escape_time(m, mk(6, 0, 1, 0), 5.0, cfg);
    CHECK(e3.outcome == EscapeOutcome::already_outside);
}

TEST_CASE("chart exit is reported with the exit time") {
    const auto m = SurfaceMetric::warped_ah(0.1, 3.0);
    IntegratorConfig cfg;
    // purely ingoing radial state crosses the pole
    const Trajectory tr = integrate_geodesic(m, mk(1.0, 0, -1.0, 0), 3.0, cfg);
    CHECK(tr.status == FlowStatus::chart_exit);
    CHECK(tr.exit_time == doctest::Approx(1.0 - kChartRMin).epsilon(1e-6));
}

TEST_CASE("group law and reversibility on both metrics") {
    IntegratorConfig cfg;
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> ur(1.0, 2.5), ue(0.4, 1.8), uphi(0.3, 2.8),
        uth(0.0, 6.28);
    for (const auto& m :
         {SurfaceMetric::hyperbolic(), SurfaceMetric::warped_ah(0.1, 3.0)}) {
        for (int i = 0; i < 5; ++i) {
            const PhasePoint p = phase_point_polar(m, ur(rng), uth(rng), ue(rng), uphi(rng));
            const double s = 2.5, t = 4.0;
            const PhasePoint a =
                integrate_geodesic(m, integrate_geodesic(m, p, t, cfg).final_state(), s, cfg)
                    .final_state();
            const PhasePoint b = integrate_geodesic(m, p, s + t, cfg).final_state();
            CHECK(chart_distance(a, b) <= 1e-7);

            const PhasePoint c =
                integrate_geodesic(m, integrate_geodesic(m, p, t, cfg).final_state(), -t, cfg)
                    .final_state();
            CHECK(chart_distance(c, p) <= 1e-7);
        }
    }
}

namespace {
// least-squares slope of log(y) against t
double log_slope(const std::vector<std::pair<double, double>>& pts) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(pts.size());
    for (const auto& [t, y] : pts) {
        sx += t;
        sy += std::log(y);
        sxx += t * t;
        sxy += t * std::log(y);
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}
}  // namespace

TEST_CASE("velocity support estimates along a trajectory family") {
    // |v^theta psi(r)| decays with rate >= 0.9 alpha; E^2 - v_r^2 with >= 1.8 alpha
    const auto m = SurfaceMetric::hyperbolic();
    IntegratorConfig cfg;
    const double alpha = 0.5;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ur(1.0, 2.0), ue(alpha, 1.0), uphi(0.1, 0.6);
    for (int i = 0; i < 5; ++i) {
        const PhasePoint p = phase_point_polar(m, ur(rng), 0.0, ue(rng), uphi(rng));
        const Trajectory tr = integrate_geodesic(m, p, 12.0, cfg);
        std::vector<std::pair<double, double>> vth_pts, gap_pts;
        for (std::size_t k = 0; k < tr.samples.size(); ++k) {
            const double t = tr.samples[k].t;
            if (t < 2.0) continue;
            const auto& s = tr.samples[k].state;
            const double vth_psi = std::fabs(m.psi(s.r) * s.v_theta);
            const double E = tr.monitors[k].energy;
            const double gap = E * E - s.v_r * s.v_r;
            if (vth_psi > 0) vth_pts.push_back({t, vth_psi});
            if (gap > 1e-280) gap_pts.push_back({t, gap});
        }
        REQUIRE(vth_pts.size() >= 5);
        CHECK(-log_slope(vth_pts) >= 0.9 * alpha);
        if (gap_pts.size() >= 5) CHECK(-log_slope(gap_pts) >= 1.8 * alpha);
    }
}

TEST_CASE("radial growth stays in a bounded band around E t") {
    const auto m = SurfaceMetric::hyperbolic();
    IntegratorConfig cfg;
    const PhasePoint p = phase_point_polar(m, 1.5, 0.0, 0.8, 0.4);
    const Trajectory tr = integrate_geodesic(m, p, 30.0, cfg);
    const double E = m.energy(p);
    double lo = 1e300, hi = -1e300;
    for (const auto& s : tr.samples) {
        if (s.t < 1.0) continue;
        const double band = std::log(std::sinh(s.state.r)) - E * s.t;
        lo = std::min(lo, band);
        hi = std::max(hi, band);
    }
    CHECK(hi - lo <= 0.5);  // paper: c e^{Et} <= sinh r(t) <= C e^{Et}
}
