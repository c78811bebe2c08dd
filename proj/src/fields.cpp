#include "hypervlasov/fields.hpp"

#include <cmath>
#include <stdexcept>

namespace hv {

std::string field_name_str(FieldName n) {
    switch (n) {
        case FieldName::X: return "X";
        case FieldName::Y: return "Y";
        case FieldName::H: return "H";
        case FieldName::V: return "V";
        case FieldName::UniformMotion: return "tX+Y";
        case FieldName::Unstable: return "U";
        case FieldName::Stable: return "S";
    }
    return "?";
}

DirectionData unstable_data(const SurfaceMetric& m, const PhasePoint& p, double t,
                            RiccatiBranch branch, const IntegratorConfig& cfg) {
    const double E = m.energy(p);
    if (!(E > 0)) throw std::domain_error("unstable_data: degenerate state (E = 0)");
    DirectionData d;
    if (m.is_hyperbolic()) {
        d.q = branch == RiccatiBranch::unstable ? E : -E;
        d.log_weight = d.q * t;
        return d;
    }
    if (t == 0.0) {
        RiccatiSample s = riccati_field(m, p, branch, cfg);
        if (!s.converged)
            throw std::runtime_error("unstable_data: Hopf limit did not converge");
        d.q = s.q;
        d.log_weight = 0.0;
        return d;
    }
    // Base point of the trajectory reaching p at time t.
    FlowResult fr = flow_state(m, p, -t, cfg);
    if (fr.status != FlowStatus::ok)
        throw std::domain_error("unstable_data: base point left the chart");
    RiccatiSample s0 = riccati_field(m, fr.state, branch, cfg);
    if (!s0.converged) throw std::runtime_error("unstable_data: Hopf limit did not converge");
    // The invariant solution propagated from the base point; the weight is the
    // ratio J(t)/J(0) since d(log J)/dtau = q.
    JacobiState j;
    j.jn = 1.0;
    j.jn_dot = s0.q;
    JacobiState jt = propagate_jacobi(m, fr.state, j, t, cfg);
    if (!(jt.jn > 0)) throw std::runtime_error("unstable_data: weight became non-positive");
    d.log_weight = std::log(jt.jn) + jt.log_scale;
    d.q = jt.jn_dot / jt.jn;
    return d;
}

PhaseTangent eval_field(const SurfaceMetric& m, FieldName name, const PhasePoint& p,
                        double t, const IntegratorConfig& cfg) {
    switch (name) {
        case FieldName::X:
            return m.geodesic_generator(p);
        case FieldName::Y:
            return SurfaceMetric::lift_vertical(p.v_r, p.v_theta);
        case FieldName::H: {
            const FramePair f = m.normal_frame(p);
            return m.lift_horizontal(p, f.normal[0], f.normal[1]);
        }
        case FieldName::V: {
            const FramePair f = m.normal_frame(p);
            return SurfaceMetric::lift_vertical(f.normal[0], f.normal[1]);
        }
        case FieldName::UniformMotion: {
            PhaseTangent x = m.geodesic_generator(p);
            const PhaseTangent y = SurfaceMetric::lift_vertical(p.v_r, p.v_theta);
            return t * x + y;
        }
        case FieldName::Unstable:
        case FieldName::Stable: {
            const RiccatiBranch br =
                name == FieldName::Unstable ? RiccatiBranch::unstable : RiccatiBranch::stable;
            const DirectionData d = unstable_data(m, p, t, br, cfg);
            const FramePair f = m.normal_frame(p);
            const PhaseTangent h = m.lift_horizontal(p, f.normal[0], f.normal[1]);
            const PhaseTangent v = SurfaceMetric::lift_vertical(f.normal[0], f.normal[1]);
            return std::exp(d.log_weight) * (h + d.q * v);
        }
    }
    throw std::logic_error("eval_field: unknown field");
}

namespace {

PhasePoint displaced(const PhasePoint& p, const PhaseTangent& u, double s) {
    PhasePoint q = p;
    q.r += s * u.dr;
    q.theta += s * u.dtheta;
    q.v_r += s * u.dv_r;
    q.v_theta += s * u.dv_theta;
    return q;
}

}  // namespace

PhaseTangent lie_bracket_fd(const SurfaceMetric& m, FieldName A, FieldName B,
                            const PhasePoint& p, double h, const IntegratorConfig& cfg) {
    auto ev = [&](FieldName n, const PhasePoint& q) { return eval_field(m, n, q, 0.0, cfg); };
    const PhaseTangent a0 = ev(A, p);
    const PhaseTangent b0 = ev(B, p);
    const double na = two_norm(a0), nb = two_norm(b0);
    PhaseTangent dB{}, dA{};
    if (na > 0) {
        const PhaseTangent ua = (1.0 / na) * a0;
        dB = (na / (2 * h)) * (ev(B, displaced(p, ua, h)) - ev(B, displaced(p, ua, -h)));
    }
    if (nb > 0) {
        const PhaseTangent ub = (1.0 / nb) * b0;
        dA = (nb / (2 * h)) * (ev(A, displaced(p, ub, h)) - ev(A, displaced(p, ub, -h)));
    }
    return dB - dA;
}

CommutationReport commutation_report(const SurfaceMetric& m, const PhasePoint& p, double h,
                                     const IntegratorConfig& cfg) {
    const double E = m.energy(p);
    if (!(E > 0)) throw std::domain_error("commutation_report: degenerate state (E = 0)");
    const double K = m.gaussian_curvature(p);
    const PhaseTangent X = eval_field(m, FieldName::X, p, 0.0, cfg);
    const PhaseTangent H = eval_field(m, FieldName::H, p, 0.0, cfg);
    const PhaseTangent V = eval_field(m, FieldName::V, p, 0.0, cfg);

    CommutationReport rep;
    auto add = [&rep](const std::string& id, const PhaseTangent& defect) {
        rep.rows.push_back({id, sup_norm(defect)});
        rep.max_residual = std::max(rep.max_residual, rep.rows.back().residual);
    };

    add("[X,Y]+X", lie_bracket_fd(m, FieldName::X, FieldName::Y, p, h, cfg) + X);
    add("[X,H]-KE2V",
        lie_bracket_fd(m, FieldName::X, FieldName::H, p, h, cfg) - (K * E * E) * V);
    add("[X,V]+H", lie_bracket_fd(m, FieldName::X, FieldName::V, p, h, cfg) + H);

    const double qu = unstable_data(m, p, 0.0, RiccatiBranch::unstable, cfg).q;
    const double qs = unstable_data(m, p, 0.0, RiccatiBranch::stable, cfg).q;
    const PhaseTangent U0 = H + qu * V;
    const PhaseTangent S0 = H + qs * V;
    add("[X,U]+quU", lie_bracket_fd(m, FieldName::X, FieldName::Unstable, p, h, cfg) + qu * U0);
    add("[X,S]+qsS", lie_bracket_fd(m, FieldName::X, FieldName::Stable, p, h, cfg) + qs * S0);
    return rep;
}

double transport_check(const SurfaceMetric& m, FieldName Z,
                       const std::function<double(double, const PhasePoint&)>& f,
                       const PhasePoint& p, double t, double h, const IntegratorConfig& cfg) {
    auto Zf = [&](double tt, const PhasePoint& q) {
        const PhaseTangent z = eval_field(m, Z, q, tt, cfg);
        const double nz = two_norm(z);
        if (nz == 0.0) return 0.0;
        const PhaseTangent u = (1.0 / nz) * z;
        return nz * (f(tt, displaced(q, u, h)) - f(tt, displaced(q, u, -h))) / (2 * h);
    };
    const PhasePoint fwd = m.is_hyperbolic() ? exact_flow_h2(p, h) : flow_state(m, p, h, cfg).state;
    const PhasePoint bwd =
        m.is_hyperbolic() ? exact_flow_h2(p, -h) : flow_state(m, p, -h, cfg).state;
    return std::fabs((Zf(t + h, fwd) - Zf(t - h, bwd)) / (2 * h));
}

}  // namespace hv
