#include "hypervlasov/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "hypervlasov/threading.hpp"

namespace hv {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    const auto b = s.find_last_not_of(" \t\r\n");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

struct IniData {
    std::map<std::string, std::map<std::string, std::string>> sections;
};

IniData parse_ini(const std::string& text) {
    IniData ini;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            ini.sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        if (section.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": key outside a section");
        ini.sections[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return ini;
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (...) {
        throw ConfigError("config: key '" + key + "' is not a number: '" + v + "'");
    }
}

long to_long(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long d = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (...) {
        throw ConfigError("config: key '" + key + "' is not an integer: '" + v + "'");
    }
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::istringstream in(v);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> to_double_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& item : split_list(v)) out.push_back(to_double(key, item));
    return out;
}

}  // namespace

void ScenarioConfig::validate() const {
    if (metric_kind != "hyperbolic" && metric_kind != "warped_ah")
        throw ConfigError("config: metric kind must be 'hyperbolic' or 'warped_ah'");
    if (metric_kind == "warped_ah" && !(beta > 2.0))
        throw ConfigError("config: violated constraint 'beta > 2' (beta = " +
                          std::to_string(beta) + ")");
    if (!(r_min > kChartRMin) || !(r_max > r_min))
        throw ConfigError("config: requires r_min > chart guard and r_max > r_min");
    if (!(e_max > e_min) || e_min < 0)
        throw ConfigError("config: requires 0 <= e_min < e_max");
    if (alpha > 0 && std::fabs(alpha - e_min) > 1e-12)
        throw ConfigError("config: violated constraint 'e_min >= alpha' (the energy range "
                          "must respect alpha; set e_min = alpha)");
    if (alpha == 0 && phi_halfwidth < 3.14159)
        throw ConfigError("config: alpha = 0 data must use the full fiber circle "
                          "(phi_halfwidth >= pi)");
    if (!(t_end > t_start) || !(t_step > 0))
        throw ConfigError("config: requires t_start < t_end and t_step > 0");
    if (probe_strategy != "azimuth-ray" && probe_strategy != "fixed")
        throw ConfigError("config: probe_strategy must be 'azimuth-ray' or 'fixed'");
    if (!(quad_tol > 0)) throw ConfigError("config: quad_tol must be positive");
    if (fit_model != "exponential" && fit_model != "power")
        throw ConfigError("config: fit_model must be 'exponential' or 'power'");
    if (metric_kind == "warped_ah" && theta_halfwidth + theta_edge > 1.0)
        throw ConfigError("config: warped_ah runs require theta_halfwidth + theta_edge <= 1 "
                          "(through-pole characteristics must land outside the data)");
    integrator.validate();
}

SurfaceMetric ScenarioConfig::make_metric() const {
    if (metric_kind == "hyperbolic") return SurfaceMetric::hyperbolic();
    return SurfaceMetric::warped_ah(a, beta, r_cut);
}

DistributionSpec ScenarioConfig::make_spec(const SurfaceMetric& m) const {
    BumpProfile br{r_min, r_max, r_edge, r_edge};
    BumpProfile bth{-theta_halfwidth, theta_halfwidth, theta_edge, theta_edge};
    BumpProfile be{e_min, e_max, e_min > 0 ? e_edge_lo : -1.0, e_edge_hi};
    BumpProfile bphi{-phi_halfwidth, phi_halfwidth, phi_edge, phi_edge};
    return DistributionSpec::make(m, br, bth, be, bphi, amplitude);
}

ScenarioConfig parse_scenario_text(const std::string& text) {
    const IniData ini = parse_ini(text);
    ScenarioConfig c;
    for (const auto& [sec, kv] : ini.sections) {
        if (sec == "metric") {
            for (const auto& [k, v] : kv) {
                if (k == "kind") c.metric_kind = v;
                else if (k == "a") c.a = to_double(k, v);
                else if (k == "beta") c.beta = to_double(k, v);
                else if (k == "r_cut") c.r_cut = to_double(k, v);
                else throw ConfigError("config: unknown key 'metric." + k + "'");
            }
        } else if (sec == "initial_data") {
            for (const auto& [k, v] : kv) {
                if (k == "r_min") c.r_min = to_double(k, v);
                else if (k == "r_max") c.r_max = to_double(k, v);
                else if (k == "r_edge") c.r_edge = to_double(k, v);
                else if (k == "theta_halfwidth") c.theta_halfwidth = to_double(k, v);
                else if (k == "theta_edge") c.theta_edge = to_double(k, v);
                else if (k == "e_min") c.e_min = to_double(k, v);
                else if (k == "e_max") c.e_max = to_double(k, v);
                else if (k == "e_edge_lo") c.e_edge_lo = to_double(k, v);
                else if (k == "e_edge_hi") c.e_edge_hi = to_double(k, v);
                else if (k == "phi_halfwidth") c.phi_halfwidth = to_double(k, v);
                else if (k == "phi_edge") c.phi_edge = to_double(k, v);
                else if (k == "amplitude") c.amplitude = to_double(k, v);
                else if (k == "alpha") c.alpha = to_double(k, v);
                else throw ConfigError("config: unknown key 'initial_data." + k + "'");
            }
        } else if (sec == "simulation") {
            for (const auto& [k, v] : kv) {
                if (k == "t_start") c.t_start = to_double(k, v);
                else if (k == "t_end") c.t_end = to_double(k, v);
                else if (k == "t_step") c.t_step = to_double(k, v);
                else if (k == "probe_strategy") c.probe_strategy = v;
                else if (k == "probe_leads") c.probe_leads = to_double_list(k, v);
                else if (k == "probe_flank_lead") c.probe_flank_lead = to_double(k, v);
                else if (k == "probe_theta_offset") c.probe_theta_offset = to_double(k, v);
                else if (k == "probe_radii") c.probe_radii = to_double_list(k, v);
                else if (k == "quad_tol") c.quad_tol = to_double(k, v);
                else if (k == "quad_max_nodes") c.quad_max_nodes = to_long(k, v);
                else if (k == "fit_model") c.fit_model = v;
                else if (k == "fit_window_rho") {
                    auto w = to_double_list(k, v);
                    if (w.size() != 2) throw ConfigError("config: fit_window_rho needs 'a,b'");
                    c.fit_rho_a = w[0];
                    c.fit_rho_b = w[1];
                } else if (k == "fit_window_deriv") {
                    auto w = to_double_list(k, v);
                    if (w.size() != 2) throw ConfigError("config: fit_window_deriv needs 'a,b'");
                    c.fit_deriv_a = w[0];
                    c.fit_deriv_b = w[1];
                } else if (k == "integrator_method") {
                    if (v == "rk45")
                        c.integrator.method = ode::Method::RK45_adaptive;
                    else if (v == "rk4")
                        c.integrator.method = ode::Method::RK4_fixed;
                    else
                        throw ConfigError("config: integrator_method must be rk45 or rk4");
                } else if (k == "integrator_rel_tol") c.integrator.rel_tol = to_double(k, v);
                else if (k == "integrator_abs_tol") c.integrator.abs_tol = to_double(k, v);
                else if (k == "integrator_h_init") c.integrator.h_init = to_double(k, v);
                else if (k == "integrator_h_max") c.integrator.h_max = to_double(k, v);
                else if (k == "integrator_max_steps") c.integrator.max_steps = to_long(k, v);
                else if (k == "seed") c.seed = static_cast<unsigned long>(to_long(k, v));
                else if (k == "threads") c.threads = static_cast<int>(to_long(k, v));
                else if (k == "trajectory_samples")
                    c.trajectory_samples = static_cast<int>(to_long(k, v));
                else throw ConfigError("config: unknown key 'simulation." + k + "'");
            }
        } else if (sec == "output") {
            for (const auto& [k, v] : kv) {
                if (k == "directory") c.directory = v;
                else if (k == "formats") c.formats = split_list(v);
                else throw ConfigError("config: unknown key 'output." + k + "'");
            }
        } else if (sec == "verdicts") {
            for (const auto& [k, v] : kv) {
                auto nums = to_double_list(k, v);
                if (nums.size() != 3)
                    throw ConfigError("config: verdict '" + k + "' needs 'expected,lo,hi'");
                c.verdict_bands.emplace_back(k, nums[0], nums[1], nums[2]);
            }
        } else {
            throw ConfigError("config: unknown section '" + sec + "'");
        }
    }
    c.validate();
    return c;
}

ScenarioConfig parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario_text(ss.str());
}

double tracked_radius(const SurfaceMetric& m, double e_ref, double r_ref, double t) {
    PhasePoint ref;
    ref.r = r_ref;
    ref.v_r = e_ref;
    ref.v_theta = 0.0;
    const RadialChannels ch = radial_channels(m, ref);
    const double c = predict_cosh_r(ch, e_ref, t);
    return std::acosh(std::max(1.0 + 1e-15, c));
}

namespace {

struct TimeSlice {
    std::vector<ProbeValue> probes;
};

void eval_time_slice(const ScenarioConfig& cfg, const SurfaceMetric& m,
                     const DistributionSpec& spec, double t, TimeSlice& out) {
    const auto add_bulk = [&](double r, double theta, const std::string& group) {
        ProbeValue pv;
        pv.t = t;
        pv.r = r;
        pv.theta = theta;
        pv.group = group;
        const DensityResult d =
            spatial_density(spec, m, t, r, theta, cfg.quad_tol, cfg.integrator,
                            cfg.quad_max_nodes);
        pv.rho = d.rho;
        pv.quad_nodes = d.nodes;
        pv.quad_err = d.error;
        const SupportGeometry g = support_geometry(spec, m, t, r, theta, cfg.integrator);
        pv.omega_volume = g.volume;
        pv.omega_angle = g.angular_diameter;
        out.probes.push_back(pv);
    };
    const auto add_grad = [&](double r, double theta, const std::string& group) {
        ProbeValue pv;
        pv.t = t;
        pv.r = r;
        pv.theta = theta;
        pv.group = group;
        const GradientResult g = density_gradient(spec, m, t, r, theta, cfg.quad_tol,
                                                  cfg.integrator, cfg.quad_max_nodes);
        const DensityResult d =
            spatial_density(spec, m, t, r, theta, cfg.quad_tol, cfg.integrator,
                            cfg.quad_max_nodes);
        pv.rho = d.rho;
        pv.drho_r = g.d_r;
        pv.drho_theta_n = g.d_theta_n;
        pv.quad_nodes = d.nodes + g.nodes;
        pv.quad_err = d.error + g.error;
        out.probes.push_back(pv);
    };

    if (cfg.probe_strategy == "azimuth-ray") {
        const double e_ref = spec.alpha > 0 ? spec.alpha : 0.5 * (cfg.e_min + cfg.e_max);
        for (double lead : cfg.probe_leads)
            add_bulk(tracked_radius(m, e_ref, cfg.r_max + lead, t), 0.0, "bulk");
        add_grad(tracked_radius(m, e_ref, cfg.r_max + cfg.probe_flank_lead, t), 0.0, "flank");
        for (double lead : {cfg.probe_flank_lead, cfg.probe_leads.empty()
                                                      ? cfg.probe_flank_lead
                                                      : cfg.probe_leads.front()})
            add_grad(tracked_radius(m, e_ref, cfg.r_max + lead, t), cfg.probe_theta_offset,
                     "edge");
    } else {
        for (double r : cfg.probe_radii) {
            add_bulk(r, 0.0, "fixed");
            add_grad(r, 0.0, "fixed");
            add_grad(r, cfg.probe_theta_offset, "fixed");
        }
    }
}

std::string timestamp_line() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[64];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    return std::string("# generated ") + buf + "\n";
}

void write_trajectories(const ScenarioConfig& cfg, const SurfaceMetric& m,
                        const std::filesystem::path& dir) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> ur(cfg.r_min, cfg.r_max);
    std::uniform_real_distribution<double> uth(-cfg.theta_halfwidth, cfg.theta_halfwidth);
    std::uniform_real_distribution<double> ue(std::max(cfg.e_min, 0.05 * (cfg.e_min + cfg.e_max)),
                                              cfg.e_max);
    std::uniform_real_distribution<double> uphi(-std::min(cfg.phi_halfwidth, 1.2),
                                                std::min(cfg.phi_halfwidth, 1.2));
    for (int k = 0; k < cfg.trajectory_samples; ++k) {
        const PhasePoint p = phase_point_polar(m, ur(rng), uth(rng), ue(rng), uphi(rng));
        const Trajectory traj = integrate_geodesic(m, p, cfg.t_end, cfg.integrator);
        std::ofstream out(dir / ("trajectory_" + std::to_string(k) + ".csv"));
        out << timestamp_line();
        out << "t,r,theta,v_r,v_theta,E,l\n";
        char line[256];
        for (std::size_t i = 0; i < traj.samples.size(); ++i) {
            const auto& s = traj.samples[i];
            const auto& mon = traj.monitors[i];
            std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                          s.t, s.state.r, s.state.theta, s.state.v_r, s.state.v_theta,
                          mon.energy, mon.angular_momentum);
            out << line;
        }
    }
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg, bool write_outputs) {
    cfg.validate();
    const SurfaceMetric m = cfg.make_metric();
    const DistributionSpec spec = cfg.make_spec(m);

    std::vector<double> times;
    for (double t = cfg.t_start; t <= cfg.t_end + 1e-9; t += cfg.t_step) times.push_back(t);

    std::vector<TimeSlice> slices(times.size());
    const int threads = resolve_threads(cfg.threads);
    parallel_for(static_cast<long>(times.size()), threads,
                 [&](long i) { eval_time_slice(cfg, m, spec, times[i], slices[i]); });

    ScenarioResult res;
    DecaySeries rho_s{"rho_sup", {}, {}}, dr_s{"drho_r", {}, {}}, dth_s{"drho_theta", {}, {}},
        vol_s{"omega_vol", {}, {}}, ang_s{"omega_angle", {}, {}};
    for (std::size_t i = 0; i < times.size(); ++i) {
        double rho = 0, dr = 0, dth = 0, vol = 0, ang = 0;
        for (const auto& pv : slices[i].probes) {
            res.grid.push_back(pv);
            if (pv.group == "bulk" || pv.group == "fixed") {
                rho = std::max(rho, pv.rho);
                if (std::isfinite(pv.omega_volume)) vol = std::max(vol, pv.omega_volume);
                if (std::isfinite(pv.omega_angle)) ang = std::max(ang, pv.omega_angle);
            }
            if ((pv.group == "flank" || pv.group == "fixed") && pv.theta == 0.0 &&
                std::isfinite(pv.drho_r))
                dr = std::max(dr, std::fabs(pv.drho_r));
            if ((pv.group == "edge" || pv.group == "fixed") && pv.theta != 0.0 &&
                std::isfinite(pv.drho_theta_n))
                dth = std::max(dth, std::fabs(pv.drho_theta_n));
        }
        rho_s.push(times[i], rho);
        dr_s.push(times[i], dr);
        dth_s.push(times[i], dth);
        vol_s.push(times[i], vol);
        ang_s.push(times[i], ang);
    }
    for (auto* s : {&rho_s, &dr_s, &dth_s, &vol_s, &ang_s}) res.series[s->label] = *s;

    const FitModel model =
        cfg.fit_model == "exponential" ? FitModel::exponential : FitModel::power;
    res.fits.emplace_back("rho_sup", try_fit(rho_s, model, cfg.fit_rho_a, cfg.fit_rho_b));
    res.fits.emplace_back("drho_r", try_fit(dr_s, model, cfg.fit_deriv_a, cfg.fit_deriv_b));
    res.fits.emplace_back("drho_theta", try_fit(dth_s, model, cfg.fit_deriv_a, cfg.fit_deriv_b));
    res.fits.emplace_back("omega_vol", try_fit(vol_s, model, cfg.fit_rho_a, cfg.fit_rho_b));
    res.fits.emplace_back("omega_angle", try_fit(ang_s, model, cfg.fit_rho_a, cfg.fit_rho_b));

    if (!cfg.verdict_bands.empty()) {
        res.verdicts = rate_report(res.fits, cfg.verdict_bands);
        for (const auto& v : res.verdicts)
            if (v.has_data && !v.pass) res.all_pass = false;
        // verdicts configured for statistics that produced no data do not fail the run
    }

    if (write_outputs) {
        namespace fs = std::filesystem;
        const fs::path dir(cfg.directory);
        fs::create_directories(dir);
        res.output_directory = dir.string();

        if (std::find(cfg.formats.begin(), cfg.formats.end(), "csv") != cfg.formats.end()) {
            {
                std::ofstream out(dir / "density_grid.csv");
                out << timestamp_line();
                out << "t,r,theta,rho,drho_dr,drho_dtheta_norm,omega_volume,"
                       "omega_angular_diameter,quad_nodes,quad_err\n";
                char line[512];
                for (const auto& pv : res.grid) {
                    std::snprintf(line, sizeof line,
                                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%ld,%.17g\n",
                                  pv.t, pv.r, pv.theta, pv.rho, pv.drho_r, pv.drho_theta_n,
                                  pv.omega_volume, pv.omega_angle, pv.quad_nodes, pv.quad_err);
                    out << line;
                }
            }
            {
                std::ofstream out(dir / "fits.csv");
                out << timestamp_line();
                out << "label,model,rate,amplitude,r2,t_a,t_b,n\n";
                char line[512];
                for (const auto& [label, fit] : res.fits) {
                    if (!fit) continue;
                    std::snprintf(line, sizeof line, "%s,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n",
                                  label.c_str(),
                                  fit->model == FitModel::exponential ? "exponential" : "power",
                                  fit->rate, fit->amplitude, fit->r_squared, fit->t_a, fit->t_b,
                                  fit->n_points);
                    out << line;
                }
            }
            write_trajectories(cfg, m, dir);
        }

        if (std::find(cfg.formats.begin(), cfg.formats.end(), "json") != cfg.formats.end()) {
            nlohmann::json j;
            j["metric"] = cfg.metric_kind;
            j["alpha"] = cfg.alpha;
            j["fit_model"] = cfg.fit_model;
            for (const auto& [label, fit] : res.fits) {
                if (!fit) {
                    j["fits"][label] = nullptr;
                    continue;
                }
                j["fits"][label] = {{"rate", fit->rate},
                                    {"amplitude", fit->amplitude},
                                    {"r2", fit->r_squared},
                                    {"window", {fit->t_a, fit->t_b}},
                                    {"n", fit->n_points},
                                    {"zeros_dropped", fit->zeros_dropped}};
            }
            for (const auto& v : res.verdicts) {
                j["verdicts"].push_back({{"label", v.label},
                                         {"fitted", v.fitted},
                                         {"expected", v.expected},
                                         {"band", {v.band_lo, v.band_hi}},
                                         {"verdict", v.verdict_str()}});
            }
            j["all_pass"] = res.all_pass;
            std::ofstream out(dir / "summary.json");
            out << j.dump(2) << "\n";
        }
    }
    return res;
}

}  // namespace hv
