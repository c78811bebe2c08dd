#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hypervlasov/analysis.hpp"
#include "hypervlasov/flow.hpp"
#include "hypervlasov/kinetic.hpp"

namespace hv {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScenarioConfig {
    // [metric]
    std::string metric_kind = "hyperbolic";
    double a = 0.0;
    double beta = 3.0;
    double r_cut = 1.0;

    // [initial_data]
    double r_min = 1.0, r_max = 2.0, r_edge = 0.25;
    double theta_halfwidth = 0.5, theta_edge = 0.15;
    double e_min = 0.5, e_max = 1.0, e_edge_lo = 0.04, e_edge_hi = 0.15;
    double phi_halfwidth = 0.5, phi_edge = 0.15;
    double amplitude = 1.0;
    double alpha = 0.5;

    // [simulation]
    double t_start = 2.0, t_end = 12.0, t_step = 0.5;
    std::string probe_strategy = "azimuth-ray";
    std::vector<double> probe_leads = {1.0, 1.5, 2.0};
    double probe_flank_lead = 0.5;
    double probe_theta_offset = 0.5;
    std::vector<double> probe_radii = {1.5, 2.5, 3.5};
    double quad_tol = 1e-7;
    long quad_max_nodes = 400000;
    std::string fit_model = "exponential";
    double fit_rho_a = 2.0, fit_rho_b = 12.0;
    double fit_deriv_a = 5.0, fit_deriv_b = 12.0;
    IntegratorConfig integrator;
    unsigned long seed = 1234;
    int threads = 0;
    int trajectory_samples = 4;

    // [output]
    std::string directory = "out";
    std::vector<std::string> formats = {"csv", "json"};

    // [verdicts] label -> (expected, lo, hi)
    std::vector<std::tuple<std::string, double, double, double>> verdict_bands;

    void validate() const;

    SurfaceMetric make_metric() const;
    DistributionSpec make_spec(const SurfaceMetric& m) const;
};

ScenarioConfig parse_scenario_file(const std::string& path);
ScenarioConfig parse_scenario_text(const std::string& text);

struct ProbeValue {
    double t = 0.0;
    double r = 0.0, theta = 0.0;
    std::string group;  // bulk | flank | edge | fixed
    double rho = 0.0;
    double drho_r = std::numeric_limits<double>::quiet_NaN();
    double drho_theta_n = std::numeric_limits<double>::quiet_NaN();
    double omega_volume = std::numeric_limits<double>::quiet_NaN();
    double omega_angle = std::numeric_limits<double>::quiet_NaN();
    long quad_nodes = 0;
    double quad_err = 0.0;
};

struct ScenarioResult {
    std::vector<ProbeValue> grid;
    std::map<std::string, DecaySeries> series;
    std::vector<std::pair<std::string, std::optional<FitResult>>> fits;
    std::vector<RateVerdict> verdicts;
    bool all_pass = true;  // no-data series do not fail
    std::string output_directory;
};

// Runs the full pipeline: probe evaluation, decay series, fits, verdicts, and
// (if an output directory is configured) CSV/JSON artifacts.
ScenarioResult run_scenario(const ScenarioConfig& cfg, bool write_outputs = true);

// Probe placement helper (azimuth-ray): radius of the alpha-shell prediction
// with the given lead at time t.
double tracked_radius(const SurfaceMetric& m, double e_ref, double r_ref, double t);

}  // namespace hv
