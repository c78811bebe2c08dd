#pragma once

#include <optional>
#include <vector>

#include "hypervlasov/geometry.hpp"
#include "hypervlasov/ode.hpp"

namespace hv {

struct IntegratorConfig {
    ode::Method method = ode::Method::RK45_adaptive;
    double rel_tol = 1e-12;
    double abs_tol = 1e-14;
    double h_init = 1e-3;
    double h_max = 1.0;
    long max_steps = 2000000;
    bool project_energy_shell = false;  // renormalize |v| to its initial value each step

    ode::StepperConfig stepper() const;
    void validate() const;
};

enum class FlowStatus { ok, step_budget_exhausted, chart_exit };

struct TrajectorySample {
    double t = 0.0;
    PhasePoint state;
};

// Conserved/almost-conserved monitors per accepted step. The channels are kept
// in overflow-safe form: u = log c_plus and w = c_minus.
struct TrajectoryMonitor {
    double t = 0.0;
    double energy = 0.0;
    double angular_momentum = 0.0;
    double r = 0.0;
    double log_c_plus = 0.0;
    double c_minus = 0.0;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    std::vector<TrajectoryMonitor> monitors;
    FlowStatus status = FlowStatus::ok;
    double exit_time = 0.0;  // set when status == chart_exit

    const PhasePoint& final_state() const { return samples.back().state; }
};

struct RadialChannels {
    double c_plus = 0.0;
    double c_minus = 0.0;
};

// c_pm = cosh r +- (1/E) sinh r v^r. Exact linear evolution on H2; on WarpedAH an
// O(e^{-(beta-1)r})-accurate predictor used for support boxing.
RadialChannels radial_channels(const SurfaceMetric& m, const PhasePoint& p);

double predict_cosh_r(const RadialChannels& ch, double E, double t);

// Closed-form geodesic flow of H2 through the Minkowski embedding, overflow-safe.
// Throws std::domain_error if the endpoint leaves the chart (r <= r_min).
PhasePoint exact_flow_h2(const PhasePoint& p, double t);

// Unchecked variant: returns the endpoint even below the chart guard (the
// embedding itself is global); in_chart reports the guard.
struct RawFlowResult {
    PhasePoint state;
    bool in_chart = true;
};
RawFlowResult exact_flow_h2_unchecked(const PhasePoint& p, double t);

// Numerical geodesic flow in (r, theta, v_r, l) variables; l is carried exactly.
// Supports negative t. On chart exit the trajectory stops with the exit time.
Trajectory integrate_geodesic(const SurfaceMetric& m, const PhasePoint& p, double t,
                              const IntegratorConfig& cfg);

// Final state only (no sample storage).
struct FlowResult {
    PhasePoint state;
    FlowStatus status = FlowStatus::ok;
    double exit_time = 0.0;
};
FlowResult flow_state(const SurfaceMetric& m, const PhasePoint& p, double t,
                      const IntegratorConfig& cfg);

enum class EscapeOutcome { already_outside, escaped, budget_exhausted };

struct EscapeResult {
    EscapeOutcome outcome = EscapeOutcome::escaped;
    double t = 0.0;
    bool monotone_after = true;  // r non-decreasing on the trajectory past the crossing
};

// First t >= 0 with r(t) > R, located by bisection on the dense output of the
// crossing step (tolerance 1e-9 in t).
EscapeResult escape_time(const SurfaceMetric& m, const PhasePoint& p, double R,
                         const IntegratorConfig& cfg, double t_max = 1000.0);

// Chart distance used by the oracle/group-law tests.
double chart_distance(const PhasePoint& a, const PhasePoint& b);

}  // namespace hv
