#pragma once

#include <array>
#include <optional>
#include <vector>

#include "hypervlasov/flow.hpp"
#include "hypervlasov/geometry.hpp"

namespace hv {

// C^2 plateau bump: 0 outside [lo, hi], quintic-smoothstep edges of widths
// w_lo / w_hi. w_lo <= 0 disables the rising edge (one-sided plateau at lo).
struct BumpProfile {
    double lo = 0.0, hi = 1.0;
    double w_lo = 0.25, w_hi = 0.25;

    double value(double x) const;
    double derivative(double x) const;
};

// Parametric initial datum: product of bumps in r, theta, E and fiber angle phi.
// E and phi are metric-dependent fiber polar coordinates.
struct DistributionSpec {
    BumpProfile r_bump;
    BumpProfile theta_bump;  // on the wrapped angle, centered at 0
    BumpProfile e_bump;
    BumpProfile phi_bump;    // half-width >= pi means no phi dependence
    double amplitude = 1.0;
    double alpha = 0.0;        // support floor in E (= e_bump.lo when positive)
    double angular_bound = 0.0;  // L = sup |l| over the support, set at construction

    static DistributionSpec make(const SurfaceMetric& m, BumpProfile r_bump,
                                 BumpProfile theta_bump, BumpProfile e_bump,
                                 BumpProfile phi_bump, double amplitude);

    bool phi_is_full() const { return phi_bump.hi >= 3.14159265358979; }

    double value(const SurfaceMetric& m, const PhasePoint& p) const;

    // f and gradient in (r, theta, v_r, l) variables (used by the transported-
    // gradient route; l = psi^2 v_theta).
    struct ValueGrad {
        double f = 0.0;
        double d_r = 0.0, d_theta = 0.0, d_vr = 0.0, d_l = 0.0;
    };
    ValueGrad value_grad_rtl(const SurfaceMetric& m, double r, double theta, double v_r,
                             double l) const;
};

// f(t, x, v) = f0(phi_{-t}(x, v)). Exact backward flow on H2 (pole-safe through
// the embedding); numerical backward flow otherwise, with chart exits mapping
// to 0 (through-pole characteristics land outside the theta support).
double evaluate_f(const DistributionSpec& spec, const SurfaceMetric& m, double t,
                  const PhasePoint& p, const IntegratorConfig& cfg);

struct SupportBox {
    double e_lo = 0.0, e_hi = 1.0;
    double vtheta_psi_bound = 0.0;  // bound on |v^theta psi(r)| actually used
    double paper_bound = -1.0;      // 1.5 * L/(c e^{alpha t}) when computed
    double phi_halfwidth = 0.0;     // arcsin-converted, per island
    bool outgoing_only = false;
    bool analytic = true;           // false when tightened by a support scan
};

// The paper-form angular-velocity bound L / (c e^{alpha t}).
double paper_vtheta_bound(double L, double c, double alpha, double t);

// Velocity support box at (t, x): exact conservation bounds |l| <= L and
// E in [e_lo, e_hi]; optionally intersected with the inflated paper bound when
// a channel floor c is supplied.
SupportBox support_box(const DistributionSpec& spec, const SurfaceMetric& m, double t,
                       double r, std::optional<double> channel_floor = std::nullopt);

// Coarse-grid support scan refining the box (used when alpha = 0, where the
// analytic box is the full fiber). Returns false if no support was detected.
bool scan_support(const DistributionSpec& spec, const SurfaceMetric& m, double t, double r,
                  double theta, const IntegratorConfig& cfg, SupportBox& box, int n_e = 128,
                  int n_phi = 96);

struct DensityResult {
    double rho = 0.0;
    double error = 0.0;
    long nodes = 0;
    bool converged = true;
};

// rho(f)(t,x) by adaptive tensor Gauss-Legendre in fiber polar coordinates
// (measure E dE dphi) over the support box. abs_floor, when positive, is an
// absolute error target applied alongside the relative one.
DensityResult spatial_density(const DistributionSpec& spec, const SurfaceMetric& m, double t,
                              double r, double theta, double tol, const IntegratorConfig& cfg,
                              long max_nodes = 400000, double abs_floor = 0.0);

struct GradientResult {
    double d_r = 0.0;        // d_r rho
    double d_theta_n = 0.0;  // (1/psi) d_theta rho
    double error = 0.0;
    long nodes = 0;
};

// Transported-gradient route: integrand Hor(.)f = <grad f0 at the landing
// point, d(phi_{-t}) W> fiber-quadratured (exact-flow differential on H2,
// joint variational integration otherwise).
GradientResult density_gradient(const DistributionSpec& spec, const SurfaceMetric& m, double t,
                                double r, double theta, double tol, const IntegratorConfig& cfg,
                                long max_nodes = 400000);

// Cross-check route: centered finite differences of spatial_density, step 1e-4.
GradientResult density_gradient_fd(const DistributionSpec& spec, const SurfaceMetric& m,
                                   double t, double r, double theta, double tol,
                                   const IntegratorConfig& cfg, double step = 1e-4);

struct SupportGeometry {
    double volume = 0.0;            // vol of Omega(t,x) in the fiber metric
    double angular_diameter = 0.0;  // max pairwise fiber angle, capped at pi
};

// Indicator quadrature of {f > 0} over the support box (midpoint grid).
SupportGeometry support_geometry(const DistributionSpec& spec, const SurfaceMetric& m,
                                 double t, double r, double theta, const IntegratorConfig& cfg,
                                 int n = 160);

struct MassResult {
    double mass = 0.0;
    bool coverage_ok = true;  // density at the grid boundary is negligible
};

// Quadrature of rho psi(r) dr dtheta over a grid covering the reachable support.
MassResult total_mass(const DistributionSpec& spec, const SurfaceMetric& m, double t,
                      int n_r, int n_theta, double fiber_tol, const IntegratorConfig& cfg);

}  // namespace hv
