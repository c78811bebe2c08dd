#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hypervlasov/flow.hpp"
#include "hypervlasov/geometry.hpp"
#include "hypervlasov/variational.hpp"

namespace hv {

enum class FieldName { X, Y, H, V, UniformMotion, Unstable, Stable };

std::string field_name_str(FieldName n);

// Integrating-factor data for the unstable/stable fields at (p, t): the weight
// e^{int_0^t q dtau} along the trajectory through p and the q value at p.
struct DirectionData {
    double q = 0.0;
    double log_weight = 0.0;
};

DirectionData unstable_data(const SurfaceMetric& m, const PhasePoint& p, double t,
                            RiccatiBranch branch, const IntegratorConfig& cfg);

// Coordinate evaluation. X is the geodesic generator, Y = Ver(v), H = Hor(N),
// V = Ver(N); UniformMotion = tX + Y; Unstable/Stable carry their weights.
PhaseTangent eval_field(const SurfaceMetric& m, FieldName name, const PhasePoint& p,
                        double t, const IntegratorConfig& cfg);

// Centered-difference Lie bracket [A, B] with unit-normalized stencil
// directions; O(h^2) in the step.
PhaseTangent lie_bracket_fd(const SurfaceMetric& m, FieldName A, FieldName B,
                            const PhasePoint& p, double h, const IntegratorConfig& cfg);

struct CommutationRow {
    std::string identity;
    double residual = 0.0;  // sup norm of the identity defect
};

struct CommutationReport {
    std::vector<CommutationRow> rows;
    double max_residual = 0.0;
};

// Residuals of [X,Y]=-X, [X,H]=K E^2 V, [X,V]=-H and the unstable/stable
// identities [X, H+qV] = -q (H+qV) with converged q samples.
CommutationReport commutation_report(const SurfaceMetric& m, const PhasePoint& p, double h,
                                     const IntegratorConfig& cfg);

// |(d_t + X)(Zf)| at (t, p) by centered differences of Zf along the flow.
// f is the transported solution f(t, .); typically kinetic::evaluate_f.
double transport_check(const SurfaceMetric& m, FieldName Z,
                       const std::function<double(double, const PhasePoint&)>& f,
                       const PhasePoint& p, double t, double h, const IntegratorConfig& cfg);

}  // namespace hv
