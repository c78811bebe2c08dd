#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hv {

// Polar chart degenerates at r = 0; everything below this radius is a chart error.
inline constexpr double kChartRMin = 1e-3;

// Point of the tangent bundle in the hyperboloidal chart (r, theta, v^r, v^theta).
struct PhasePoint {
    double r = 1.0;
    double theta = 0.0;
    double v_r = 0.0;
    double v_theta = 0.0;
};

// Tangent vector to the tangent bundle at a PhasePoint, chart components.
struct PhaseTangent {
    double dr = 0.0;
    double dtheta = 0.0;
    double dv_r = 0.0;
    double dv_theta = 0.0;

    PhaseTangent& operator+=(const PhaseTangent& o) {
        dr += o.dr; dtheta += o.dtheta; dv_r += o.dv_r; dv_theta += o.dv_theta;
        return *this;
    }
};

inline PhaseTangent operator+(PhaseTangent a, const PhaseTangent& b) { return a += b; }
inline PhaseTangent operator-(const PhaseTangent& a, const PhaseTangent& b) {
    return {a.dr - b.dr, a.dtheta - b.dtheta, a.dv_r - b.dv_r, a.dv_theta - b.dv_theta};
}
inline PhaseTangent operator*(double s, const PhaseTangent& a) {
    return {s * a.dr, s * a.dtheta, s * a.dv_r, s * a.dv_theta};
}

inline double sup_norm(const PhaseTangent& a) {
    return std::max(std::max(std::fabs(a.dr), std::fabs(a.dtheta)),
                    std::max(std::fabs(a.dv_r), std::fabs(a.dv_theta)));
}

inline double two_norm(const PhaseTangent& a) {
    return std::sqrt(a.dr * a.dr + a.dtheta * a.dtheta + a.dv_r * a.dv_r +
                     a.dv_theta * a.dv_theta);
}

inline double wrap_angle(double theta) {
    constexpr double two_pi = 6.283185307179586476925287;
    double t = std::fmod(theta, two_pi);
    if (t < 0) t += two_pi;
    return t;
}

// Nonzero Christoffel symbols of a warped product dr^2 + psi(r)^2 dtheta^2.
struct ChristoffelSymbols {
    double r_thth = 0.0;   // Gamma^r_{theta theta} = -psi' psi
    double th_rth = 0.0;   // Gamma^theta_{r theta} = psi'/psi (symmetric in lower indices)
};

// Parallel orthogonal frame {gamma_dot, N} at a phase point, chart components.
// g(N,N) = g(gamma_dot,gamma_dot), g(N,gamma_dot) = 0, positively oriented.
struct FramePair {
    std::array<double, 2> gamma_dot{};  // (v^r, v^theta)
    std::array<double, 2> normal{};     // (N^r, N^theta)
};

enum class MetricKind { Hyperbolic, WarpedAH };

// Rotationally symmetric surface metric dr^2 + psi(r)^2 dtheta^2.
// Hyperbolic: psi = sinh r. WarpedAH: psi = sinh r + a eta(r) e^{-beta r},
// with eta a quintic cutoff vanishing below r_cut/2 so the pole stays smooth.
class SurfaceMetric {
public:
    static SurfaceMetric hyperbolic() { return SurfaceMetric(); }

    static SurfaceMetric warped_ah(double a, double beta, double r_cut = 1.0) {
        if (!(beta > 2.0))
            throw std::invalid_argument("warped_ah: requires beta > 2 (got beta = " +
                                        std::to_string(beta) + ")");
        if (!(r_cut > 0.0))
            throw std::invalid_argument("warped_ah: requires r_cut > 0");
        SurfaceMetric m;
        m.kind_ = MetricKind::WarpedAH;
        m.a_ = a;
        m.beta_ = beta;
        m.r_cut_ = r_cut;
        m.validate_pinching();
        return m;
    }

    MetricKind kind() const { return kind_; }
    bool is_hyperbolic() const { return kind_ == MetricKind::Hyperbolic; }
    double perturbation_amplitude() const { return a_; }
    double decay_exponent() const { return beta_; }
    double cutoff_radius() const { return r_cut_; }

    double psi(double r) const {
        if (kind_ == MetricKind::Hyperbolic) return std::sinh(r);
        return std::sinh(r) + a_ * eta(r) * std::exp(-beta_ * r);
    }

    double dpsi(double r) const {
        if (kind_ == MetricKind::Hyperbolic) return std::cosh(r);
        const double eb = std::exp(-beta_ * r);
        return std::cosh(r) + a_ * eb * (eta1(r) - beta_ * eta(r));
    }

    double d2psi(double r) const {
        if (kind_ == MetricKind::Hyperbolic) return std::sinh(r);
        const double eb = std::exp(-beta_ * r);
        return std::sinh(r) +
               a_ * eb * (eta2(r) - 2.0 * beta_ * eta1(r) + beta_ * beta_ * eta(r));
    }

    ChristoffelSymbols christoffel(const PhasePoint& p) const {
        require_in_chart(p.r);
        const double ps = psi(p.r), dp = dpsi(p.r);
        return {-dp * ps, dp / ps};
    }

    double gaussian_curvature(const PhasePoint& p) const {
        require_in_chart(p.r);
        return curvature_at(p.r);
    }

    // Particle energy E = |v|_g = sqrt((v^r)^2 + psi^2 (v^theta)^2), conserved by the flow.
    double energy(const PhasePoint& p) const {
        const double pv = psi(p.r) * p.v_theta;
        return std::hypot(p.v_r, pv);
    }

    // Angular velocity l = g(d_theta, v) = psi^2 v^theta, the Killing momentum.
    double angular_momentum(const PhasePoint& p) const {
        const double ps = psi(p.r);
        return ps * ps * p.v_theta;
    }

    // The unique N with g(N,N)=g(v,v), g(N,v)=0, (v,N) positively oriented.
    FramePair normal_frame(const PhasePoint& p) const {
        require_in_chart(p.r);
        if (energy(p) <= 0.0)
            throw std::domain_error("normal_frame: degenerate vector (E = 0)");
        const double ps = psi(p.r);
        FramePair f;
        f.gamma_dot = {p.v_r, p.v_theta};
        f.normal = {-ps * p.v_theta, p.v_r / ps};
        return f;
    }

    // Hor(Y) = Y^i d_i - Y^i v^j Gamma^k_{ij} d_{v^k} for Y = (Y^r, Y^theta).
    PhaseTangent lift_horizontal(const PhasePoint& p, double Yr, double Yth) const {
        const ChristoffelSymbols c = christoffel(p);
        PhaseTangent t;
        t.dr = Yr;
        t.dtheta = Yth;
        t.dv_r = -Yth * p.v_theta * c.r_thth;
        t.dv_theta = -c.th_rth * (Yr * p.v_theta + Yth * p.v_r);
        return t;
    }

    static PhaseTangent lift_vertical(double Yr, double Yth) {
        return {0.0, 0.0, Yr, Yth};
    }

    // Generator of the geodesic flow X = Hor(v); equals the geodesic equations RHS.
    PhaseTangent geodesic_generator(const PhasePoint& p) const {
        return lift_horizontal(p, p.v_r, p.v_theta);
    }

    double metric_g_thth(double r) const {
        const double ps = psi(r);
        return ps * ps;
    }

    // g(A, B) for base tangent vectors in chart components.
    double inner(double r, double Ar, double Ath, double Br, double Bth) const {
        return Ar * Br + metric_g_thth(r) * Ath * Bth;
    }

    void require_in_chart(double r) const {
        if (!(r > kChartRMin))
            throw std::domain_error("chart error: r <= r_min (r = " + std::to_string(r) + ")");
    }

private:
    SurfaceMetric() = default;

    double curvature_at(double r) const { return -d2psi(r) / psi(r); }

    // Quintic smoothstep cutoff on [r_cut/2, r_cut].
    double eta(double r) const {
        const double lo = r_cut_ / 2, w = r_cut_ - lo;
        double u = (r - lo) / w;
        if (u <= 0.0) return 0.0;
        if (u >= 1.0) return 1.0;
        return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
    }

    double eta1(double r) const {
        const double lo = r_cut_ / 2, w = r_cut_ - lo;
        double u = (r - lo) / w;
        if (u <= 0.0 || u >= 1.0) return 0.0;
        const double um = 1.0 - u;
        return 30.0 * u * u * um * um / w;
    }

    double eta2(double r) const {
        const double lo = r_cut_ / 2, w = r_cut_ - lo;
        double u = (r - lo) / w;
        if (u <= 0.0 || u >= 1.0) return 0.0;
        return 60.0 * u * (1.0 + u * (-3.0 + 2.0 * u)) / (w * w);
    }

    // Pinching -kappa1 <= K <= -kappa2 < 0 sampled on a log-spaced grid.
    void validate_pinching() const {
        constexpr double kappa_floor = -0.05;
        const double lo = std::log(kChartRMin), hi = std::log(40.0);
        for (int i = 0; i <= 400; ++i) {
            const double r = std::exp(lo + (hi - lo) * i / 400.0);
            const double K = curvature_at(r);
            if (!(K < kappa_floor) || !std::isfinite(K))
                throw std::invalid_argument(
                    "warped_ah: curvature pinching violated at r = " + std::to_string(r) +
                    " (K = " + std::to_string(K) + ", requires K < " +
                    std::to_string(kappa_floor) + ")");
        }
    }

    MetricKind kind_ = MetricKind::Hyperbolic;
    double a_ = 0.0;
    double beta_ = 0.0;
    double r_cut_ = 1.0;
};

// Fiber polar coordinates: v^r = E cos(phi), psi(r) v^theta = E sin(phi).
// phi = 0 is the outgoing radial direction.
inline PhasePoint phase_point_polar(const SurfaceMetric& m, double r, double theta,
                                    double E, double phi) {
    PhasePoint p;
    p.r = r;
    p.theta = theta;
    p.v_r = E * std::cos(phi);
    p.v_theta = E * std::sin(phi) / m.psi(r);
    return p;
}

inline double fiber_angle(const SurfaceMetric& m, const PhasePoint& p) {
    return std::atan2(m.psi(p.r) * p.v_theta, p.v_r);
}

}  // namespace hv
