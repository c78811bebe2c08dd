#pragma once

#include <array>

#include "hypervlasov/flow.hpp"
#include "hypervlasov/geometry.hpp"

namespace hv {

// Components of a Jacobi field J = J0 gamma_dot + JN N along a geodesic.
// Renormalized propagation stores (jn, jn_dot) scaled by e^{log_scale}.
struct JacobiState {
    double j0 = 0.0;
    double j0_dot = 0.0;
    double jn = 0.0;
    double jn_dot = 0.0;
    double log_scale = 0.0;  // true JN = jn * e^{log_scale}, same for jn_dot
};

// d(phi_t) in the frame basis (Hor gamma_dot, Hor N, Ver gamma_dot, Ver N) at
// source and target. Volume preservation: det == 1.
struct FlowDifferential {
    std::array<std::array<double, 4>, 4> a{};
    PhasePoint source;
    PhasePoint target;

    double det() const;
};

enum class RiccatiBranch { unstable, stable };

struct RiccatiSample {
    double q = 0.0;
    double horizon = 0.0;
    bool converged = false;
    double residual = 0.0;  // |Xq + q^2 + E^2 K| estimated along a short arc
};

// J0(t) = J0 + t J0_dot exactly; (JN, JN_dot) integrated jointly with the
// geodesic, rescaled whenever components exceed 1e100.
JacobiState propagate_jacobi(const SurfaceMetric& m, const PhasePoint& p,
                             const JacobiState& j0, double t, const IntegratorConfig& cfg);

// Columns are the images of the frame basis vectors, obtained from the Jacobi
// initial data Hor(Y) <-> (J,J') = (Y,0), Ver(Y) <-> (J,J') = (0,Y).
FlowDifferential flow_differential(const SurfaceMetric& m, const PhasePoint& p, double t,
                                   const IntegratorConfig& cfg);

// Hopf construction: q at p from the Jacobi solution vanishing at the shifted
// endpoint phi_{-T}(p) (unstable) or phi_{+T}(p) (stable).
RiccatiSample riccati_hopf(const SurfaceMetric& m, const PhasePoint& p, double T,
                           RiccatiBranch branch, const IntegratorConfig& cfg);

// Converged Hopf limit by horizon doubling from T = max(5, 10/E) until
// |q(T) - q(2T)| <= 1e-8.
RiccatiSample riccati_field(const SurfaceMetric& m, const PhasePoint& p, RiccatiBranch branch,
                            const IntegratorConfig& cfg);

// (1/T) log of the norm growth of the unstable Jacobi solution (1, q_u).
double lyapunov_rate(const SurfaceMetric& m, const PhasePoint& p, double T,
                     const IntegratorConfig& cfg);

// Frame basis <-> chart components at a point (columns: Hor gd, Hor N, Ver gd, Ver N).
std::array<std::array<double, 4>, 4> frame_basis_matrix(const SurfaceMetric& m,
                                                        const PhasePoint& p);

// Decompose a chart tangent into the frame basis at p.
std::array<double, 4> decompose_in_frame(const SurfaceMetric& m, const PhasePoint& p,
                                         const PhaseTangent& w);

PhaseTangent compose_from_frame(const SurfaceMetric& m, const PhasePoint& p,
                                const std::array<double, 4>& coeffs);

}  // namespace hv
