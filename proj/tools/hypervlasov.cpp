// Command-line driver: scenario runs and direct access to the module
// operations (flow, density, decay-fit, riccati, commutator-check, jacobi).
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "hypervlasov/fields.hpp"
#include "hypervlasov/scenario.hpp"
#include "hypervlasov/threading.hpp"
#include "hypervlasov/variational.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

hv::SurfaceMetric metric_from_flags(const std::string& kind, double a, double beta,
                                    double r_cut) {
    if (kind == "h2" || kind == "hyperbolic") return hv::SurfaceMetric::hyperbolic();
    if (kind == "ah" || kind == "warped_ah") return hv::SurfaceMetric::warped_ah(a, beta, r_cut);
    throw hv::ConfigError("unknown metric kind '" + kind + "' (h2 | warped_ah)");
}

hv::PhasePoint state_from_csv(const std::string& s) {
    std::istringstream in(s);
    std::string tok;
    std::vector<double> v;
    while (std::getline(in, tok, ',')) v.push_back(std::stod(tok));
    if (v.size() != 4)
        throw hv::ConfigError("--state needs 'r,theta,v_r,v_theta'");
    hv::PhasePoint p;
    p.r = v[0];
    p.theta = v[1];
    p.v_r = v[2];
    p.v_theta = v[3];
    return p;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Vlasov transport on hyperbolic and asymptotically hyperbolic surfaces"};
    app.require_subcommand(1);

    unsigned long seed = 1234;
    int threads = 0;
    std::string format = "csv";
    app.add_option("--seed", seed, "seed for stochastic sampling");
    app.add_option("--threads", threads, "worker threads (0 = auto)");
    app.add_option("--format", format, "output format: csv | jsonl")
        ->check(CLI::IsMember({"csv", "jsonl"}));

    std::string metric_kind = "h2";
    double m_a = 0.1, m_beta = 3.0, m_rcut = 1.0;
    auto add_metric_flags = [&](CLI::App* cmd) {
        cmd->add_option("--metric", metric_kind, "h2 | warped_ah");
        cmd->add_option("--a", m_a, "warped_ah perturbation amplitude");
        cmd->add_option("--beta", m_beta, "warped_ah decay exponent (> 2)");
        cmd->add_option("--r-cut", m_rcut, "warped_ah cutoff radius");
    };

    auto* run = app.add_subcommand("run", "run a scenario config");
    std::string config_path;
    run->add_option("config", config_path, "scenario config file")->required();

    auto* flow_cmd = app.add_subcommand("flow", "integrate the geodesic flow");
    std::string state_csv = "1,0,1,0";
    double flow_t = 2.0;
    std::string flow_out;
    add_metric_flags(flow_cmd);
    flow_cmd->add_option("--state", state_csv, "initial r,theta,v_r,v_theta");
    flow_cmd->add_option("--t", flow_t, "integration time (may be negative)");
    flow_cmd->add_option("--out", flow_out, "write the trajectory CSV here");

    auto* dens = app.add_subcommand("density", "spatial density and derivatives at a probe");
    std::string dens_config;
    double dens_t = 2.0, dens_r = 3.0, dens_theta = 0.0, dens_tol = 1e-7;
    dens->add_option("--config", dens_config, "scenario config supplying the data")->required();
    dens->add_option("--time", dens_t, "evaluation time");
    dens->add_option("--r", dens_r, "probe radius");
    dens->add_option("--theta", dens_theta, "probe azimuth");
    dens->add_option("--tol", dens_tol, "quadrature relative tolerance");

    auto* fitc = app.add_subcommand("decay-fit", "fit a decay series from CSV (t,y)");
    std::string fit_input, fit_model = "exponential";
    double fit_a = 0.0, fit_b = 1e300;
    fitc->add_option("--input", fit_input, "CSV with header and t,y rows")->required();
    fitc->add_option("--model", fit_model, "exponential | power")
        ->check(CLI::IsMember({"exponential", "power"}));
    fitc->add_option("--window-a", fit_a, "fit window start");
    fitc->add_option("--window-b", fit_b, "fit window end");

    auto* ric = app.add_subcommand("riccati", "Hopf-limit Riccati solution at a state");
    double ric_energy = 1.0, ric_T = 10.0, ric_r = 1.5, ric_pitch = 1.5707963267948966;
    std::string ric_branch = "unstable";
    add_metric_flags(ric);
    ric->add_option("--energy", ric_energy, "particle energy of the state");
    ric->add_option("--horizon", ric_T, "Hopf horizon T");
    ric->add_option("--branch", ric_branch, "unstable | stable")
        ->check(CLI::IsMember({"unstable", "stable"}));
    ric->add_option("--r", ric_r, "state radius");
    ric->add_option("--pitch", ric_pitch, "fiber angle of the state");

    auto* comm = app.add_subcommand("commutator-check", "residuals of the bracket identities");
    int comm_points = 50;
    double comm_h = 1e-3;
    add_metric_flags(comm);
    comm->add_option("--points", comm_points, "number of random phase points");
    comm->add_option("--h", comm_h, "finite-difference step");

    auto* jac = app.add_subcommand("jacobi", "propagate a Jacobi field along a geodesic");
    std::string jac_state = "1,0,0,0.8509181282393216";  // unit-energy circular start
    double jac_jn = 1.0, jac_jndot = 0.0, jac_t = 1.0;
    add_metric_flags(jac);
    jac->add_option("--state", jac_state, "base r,theta,v_r,v_theta");
    jac->add_option("--jn", jac_jn, "initial normal component");
    jac->add_option("--jn-dot", jac_jndot, "initial normal derivative");
    jac->add_option("--t", jac_t, "propagation time");

    CLI11_PARSE(app, argc, argv);

    try {
        hv::IntegratorConfig icfg;

        if (*run) {
            hv::ScenarioConfig cfg = hv::parse_scenario_file(config_path);
            if (threads > 0) cfg.threads = threads;
            cfg.seed = seed;
            const hv::ScenarioResult res = hv::run_scenario(cfg);
            for (const auto& v : res.verdicts)
                std::printf("%-12s fitted=%.4f expected=%.3f band=[%.3f, %.3f]  %s\n",
                            v.label.c_str(), v.fitted, v.expected, v.band_lo, v.band_hi,
                            v.verdict_str().c_str());
            std::printf("artifacts: %s\n", res.output_directory.c_str());
            return res.all_pass ? 0 : kExitNumerical;
        }

        if (*flow_cmd) {
            const auto m = metric_from_flags(metric_kind, m_a, m_beta, m_rcut);
            const hv::PhasePoint p = state_from_csv(state_csv);
            const hv::Trajectory tr = hv::integrate_geodesic(m, p, flow_t, icfg);
            if (tr.status == hv::FlowStatus::chart_exit) {
                std::fprintf(stderr, "chart exit at t = %.9f\n", tr.exit_time);
                return kExitNumerical;
            }
            if (!flow_out.empty()) {
                std::ofstream out(flow_out);
                out << "t,r,theta,v_r,v_theta,E,l\n";
                for (std::size_t i = 0; i < tr.samples.size(); ++i) {
                    const auto& s = tr.samples[i];
                    const auto& mon = tr.monitors[i];
                    char line[256];
                    std::snprintf(line, sizeof line,
                                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.t, s.state.r,
                                  s.state.theta, s.state.v_r, s.state.v_theta, mon.energy,
                                  mon.angular_momentum);
                    out << line;
                }
            }
            const auto& f = tr.final_state();
            std::printf("%.12g,%.12g,%.12g,%.12g\n", f.r, f.theta, f.v_r, f.v_theta);
            return 0;
        }

        if (*dens) {
            hv::ScenarioConfig cfg = hv::parse_scenario_file(dens_config);
            const auto m = cfg.make_metric();
            const auto spec = cfg.make_spec(m);
            const hv::DensityResult d = hv::spatial_density(spec, m, dens_t, dens_r,
                                                            dens_theta, dens_tol,
                                                            cfg.integrator);
            const hv::GradientResult g = hv::density_gradient(spec, m, dens_t, dens_r,
                                                              dens_theta, dens_tol,
                                                              cfg.integrator);
            if (format == "jsonl")
                std::printf("{\"t\":%.17g,\"r\":%.17g,\"theta\":%.17g,\"rho\":%.17g,"
                            "\"drho_dr\":%.17g,\"drho_dtheta_norm\":%.17g,\"quad_nodes\":%ld,"
                            "\"quad_err\":%.3e}\n",
                            dens_t, dens_r, dens_theta, d.rho, g.d_r, g.d_theta_n, d.nodes,
                            d.error);
            else
                std::printf("t,r,theta,rho,drho_dr,drho_dtheta_norm,quad_nodes,quad_err\n"
                            "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%ld,%.3e\n",
                            dens_t, dens_r, dens_theta, d.rho, g.d_r, g.d_theta_n, d.nodes,
                            d.error);
            return d.converged ? 0 : kExitNumerical;
        }

        if (*fitc) {
            std::ifstream in(fit_input);
            if (!in) throw hv::ConfigError("decay-fit: cannot read '" + fit_input + "'");
            hv::DecaySeries s{"series", {}, {}};
            std::string line;
            while (std::getline(in, line)) {
                double t, y;
                if (std::sscanf(line.c_str(), "%lf,%lf", &t, &y) == 2) s.push(t, y);
            }
            const auto model = fit_model == "exponential" ? hv::FitModel::exponential
                                                          : hv::FitModel::power;
            const auto fit = hv::try_fit(s, model, fit_a, fit_b);
            if (!fit) {
                std::fprintf(stderr, "decay-fit: insufficient data\n");
                return kExitNumerical;
            }
            if (format == "jsonl")
                std::printf("{\"model\":\"%s\",\"rate\":%.17g,\"amplitude\":%.17g,"
                            "\"r2\":%.17g,\"n\":%d,\"zeros_dropped\":%d}\n",
                            fit_model.c_str(), fit->rate, fit->amplitude, fit->r_squared,
                            fit->n_points, fit->zeros_dropped);
            else
                std::printf("label,model,rate,amplitude,r2,t_a,t_b,n\nseries,%s,%.17g,%.17g,"
                            "%.17g,%.17g,%.17g,%d\n",
                            fit_model.c_str(), fit->rate, fit->amplitude, fit->r_squared,
                            fit->t_a, fit->t_b, fit->n_points);
            return 0;
        }

        if (*ric) {
            const auto m = metric_from_flags(metric_kind, m_a, m_beta, m_rcut);
            const hv::PhasePoint p =
                hv::phase_point_polar(m, ric_r, 0.0, ric_energy, ric_pitch);
            const auto branch = ric_branch == "unstable" ? hv::RiccatiBranch::unstable
                                                         : hv::RiccatiBranch::stable;
            const hv::RiccatiSample s = hv::riccati_hopf(m, p, ric_T, branch, icfg);
            std::printf("q = %.12g  (horizon %.6g, converged %s, residual %.3e)\n", s.q,
                        s.horizon, s.converged ? "yes" : "no", s.residual);
            return 0;
        }

        if (*comm) {
            const auto m = metric_from_flags(metric_kind, m_a, m_beta, m_rcut);
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> ur(1.0, 2.5), uth(0.0, 6.28),
                ue(0.3, 2.0), uphi(0.35, 2.79);
            double worst = 0.0;
            std::printf("identity,point,h,residual\n");
            for (int i = 0; i < comm_points; ++i) {
                const hv::PhasePoint p =
                    hv::phase_point_polar(m, ur(rng), uth(rng), ue(rng), uphi(rng));
                const auto rep = hv::commutation_report(m, p, comm_h, icfg);
                for (const auto& row : rep.rows)
                    std::printf("%s,%d,%.3e,%.6e\n", row.identity.c_str(), i, comm_h,
                                row.residual);
                worst = std::max(worst, rep.max_residual);
            }
            std::printf("# max residual = %.6e\n", worst);
            return 0;
        }

        if (*jac) {
            const auto m = metric_from_flags(metric_kind, m_a, m_beta, m_rcut);
            const hv::PhasePoint p = state_from_csv(jac_state);
            hv::JacobiState j;
            j.jn = jac_jn;
            j.jn_dot = jac_jndot;
            const hv::JacobiState jt = hv::propagate_jacobi(m, p, j, jac_t, icfg);
            std::printf("J0 = %.12g  J0_dot = %.12g  JN = %.12g  JN_dot = %.12g"
                        "  log_scale = %.6g\n",
                        jt.j0, jt.j0_dot, jt.jn, jt.jn_dot, jt.log_scale);
            return 0;
        }
    } catch (const hv::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumerical;
    }
    return 0;
}
