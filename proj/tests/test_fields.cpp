#include <doctest.h>

#include <cmath>
#include <random>

#include "hypervlasov/fields.hpp"
#include "hypervlasov/kinetic.hpp"

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

TEST_CASE("coordinate field values") {
    const auto m = SurfaceMetric::hyperbolic();
    IntegratorConfig cfg;

    const PhaseTangent y = eval_field(m, FieldName::Y, mk(1, 0, 0.3, 0.2), 0.0, cfg);
    CHECK(y.dr == 0.0);
    CHECK(y.dtheta == 0.0);
    CHECK(y.dv_r == 0.3);
    CHECK(y.dv_theta == 0.2);

    const PhaseTangent x = eval_field(m, FieldName::X, mk(1, 0, 1, 0), 0.0, cfg);
    CHECK(x.dr == 1.0);
    CHECK(x.dtheta == 0.0);
    CHECK(x.dv_r == 0.0);
    CHECK(x.dv_theta == 0.0);

    // U on H2 at t=0 with E=1 equals H + V componentwise
    const PhasePoint p = mk(1.0, 0.0, 0.0, 1.0 / std::sinh(1.0));
    const PhaseTangent u = eval_field(m, FieldName::Unstable, p, 0.0, cfg);
    const PhaseTangent hv = eval_field(m, FieldName::H, p, 0.0, cfg) +
                            eval_field(m, FieldName::V, p, 0.0, cfg);
    CHECK(sup_norm(u - hv) <= 1e-14);
}

TEST_CASE("finite-difference brackets match the structure equations") {
    const auto m = SurfaceMetric::hyperbolic();
    IntegratorConfig cfg;
    const double h = 1e-3;

    const PhasePoint p1 = mk(1.4, 0.7, 0.6, 0.25);
    const PhaseTangent xy = lie_bracket_fd(m, FieldName::X, FieldName::Y, p1, h, cfg);
    const PhaseTangent x1 = eval_field(m, FieldName::X, p1, 0.0, cfg);
    CHECK(sup_norm(xy + x1) <= 1e-5);

    const PhasePoint p2 = mk(1.0, 0.0, 0.5, 0.1);
    const PhaseTangent xv = lie_bracket_fd(m, FieldName::X, FieldName::V, p2, h, cfg);
    const PhaseTangent h2 = eval_field(m, FieldName::H, p2, 0.0, cfg);
    CHECK(sup_norm(xv + h2) <= 1e-5);

    // antisymmetry: [A, A] = 0 to stencil accuracy
    const PhaseTangent xx = lie_bracket_fd(m, FieldName::X, FieldName::X, p1, h, cfg);
    CHECK(sup_norm(xx) <= 1e-12);
}

TEST_CASE("commutation report: residuals small, order ~ 2, both metrics") {
    IntegratorConfig cfg;
    for (const auto& m : {SurfaceMetric::hyperbolic(), SurfaceMetric::warped_ah(0.1, 3.0)}) {
        std::mt19937_64 rng(2025);
        std::uniform_real_distribution<double> ur(1.0, 2.5), uth(0.0, 6.28), ue(0.3, 2.0),
            uphi(0.35, 2.79);
        double worst_h = 0.0, worst_h2 = 0.0;
        for (int i = 0; i < 12; ++i) {
            const PhasePoint p = phase_point_polar(m, ur(rng), uth(rng), ue(rng), uphi(rng));
            worst_h = std::max(worst_h, commutation_report(m, p, 1e-3, cfg).max_residual);
            worst_h2 = std::max(worst_h2, commutation_report(m, p, 5e-4, cfg).max_residual);
        }
        CHECK(worst_h <= 1e-5);
        const double order = std::log2(worst_h / worst_h2);
        CHECK(order >= 1.8);
        CHECK(order <= 2.2);
    }
}

TEST_CASE("warped AH far-region [X,H] residual") {
    const auto m = SurfaceMetric::warped_ah(0.1, 3.0);
    IntegratorConfig cfg;
    const PhasePoint p = phase_point_polar(m, 6.0, 0.2, 1.0, 1.0);
    const auto rep = commutation_report(m, p, 1e-3, cfg);
    for (const auto& row : rep.rows)
        if (row.identity == "[X,H]-KE2V") CHECK(row.residual <= 1e-4);
}

TEST_CASE("transport identity for commuting fields") {
    const auto m = SurfaceMetric::hyperbolic();
    IntegratorConfig cfg;

    const auto spec = DistributionSpec::make(
        m, BumpProfile{1.0, 2.0, 0.25, 0.25}, BumpProfile{-0.5, 0.5, 0.15, 0.15},
        BumpProfile{0.5, 1.0, 0.1, 0.15}, BumpProfile{-0.5, 0.5, 0.15, 0.15}, 1.0);
    auto f = [&](double t, const PhasePoint& q) { return evaluate_f(spec, m, t, q, cfg); };

    // probe on the image of the support bulk at t = 1
    const PhasePoint p0 = phase_point_polar(m, 1.5, 0.0, 0.75, 0.2);
    const PhasePoint p = exact_flow_h2(p0, 1.0);
    REQUIRE(f(1.0, p) > 0.0);

    const double r1 = transport_check(m, FieldName::X, f, p, 1.0, 1e-3, cfg);
    CHECK(r1 <= 1e-4);
    const double r_um = transport_check(m, FieldName::UniformMotion, f, p, 1.0, 1e-3, cfg);
    CHECK(r_um <= 1e-4);

    // centered-difference order in h
    const double rh = transport_check(m, FieldName::Unstable, f, p, 1.0, 2e-3, cfg);
    const double rh2 = transport_check(m, FieldName::Unstable, f, p, 1.0, 1e-3, cfg);
    if (rh > 1e-9 && rh2 > 1e-10) {
        const double order = std::log2(rh / rh2);
        CHECK(order >= 1.8);
        CHECK(order <= 2.2);
    }

    // constant f on a neighborhood: Zf vanishes identically for vertical/frame fields
    auto fconst = [](double, const PhasePoint&) { return 0.7; };
    CHECK(transport_check(m, FieldName::Y, fconst, p, 1.0, 1e-3, cfg) <= 1e-12);
    CHECK(transport_check(m, FieldName::H, fconst, p, 1.0, 1e-3, cfg) <= 1e-12);
    CHECK(transport_check(m, FieldName::V, fconst, p, 1.0, 1e-3, cfg) <= 1e-12);
}

TEST_CASE("pushforward carries U(0) to U(t)") {
    IntegratorConfig cfg;
    for (const auto& m : {SurfaceMetric::hyperbolic(), SurfaceMetric::warped_ah(0.1, 3.0)}) {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> ur(1.2, 2.2), ue(0.5, 1.5), uphi(0.5, 2.6);
        for (int i = 0; i < 4; ++i) {
            const PhasePoint p = phase_point_polar(m, ur(rng), 0.3, ue(rng), uphi(rng));
            const double t = 2.0;
            const FlowDifferential d = flow_differential(m, p, t, cfg);

            const PhaseTangent u0 = eval_field(m, FieldName::Unstable, p, 0.0, cfg);
            const auto z = decompose_in_frame(m, p, u0);
            std::array<double, 4> zt{};
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) zt[a] += d.a[a][b] * z[b];
            const PhaseTangent pushed = compose_from_frame(m, d.target, zt);

            const PhaseTangent ut = eval_field(m, FieldName::Unstable, d.target, t, cfg);
            CHECK(sup_norm(pushed - ut) <= 1e-4 * std::max(1.0, sup_norm(ut)));
        }
    }
}
