#pragma once

#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace hv {

struct DecaySeries {
    std::string label;  // rho_sup, drho_r, drho_theta, omega_vol, omega_angle, qu_gap
    std::vector<double> t;
    std::vector<double> y;

    void push(double tt, double yy) {
        t.push_back(tt);
        y.push_back(yy);
    }
};

enum class FitModel { exponential, power };

struct FitResult {
    FitModel model = FitModel::exponential;
    double rate = 0.0;       // positive means decay
    double amplitude = 0.0;  // value of the fitted model at t = 0 (resp. t = 1)
    double r_squared = 0.0;
    double t_a = 0.0, t_b = 0.0;
    int n_points = 0;
    int zeros_dropped = 0;
};

// Least squares on (t, log y) resp. (log t, log y); zeros dropped before the
// fit. Throws std::runtime_error with "insufficient data" if fewer than 5
// positive points lie in the window.
FitResult fit_exponential(const DecaySeries& s, double t_a, double t_b);
FitResult fit_power(const DecaySeries& s, double t_a, double t_b);

std::optional<FitResult> try_fit(const DecaySeries& s, FitModel model, double t_a, double t_b);

struct RateVerdict {
    std::string label;
    bool has_data = false;
    double fitted = 0.0;
    double expected = 0.0;
    double band_lo = 0.0, band_hi = 0.0;
    bool pass = false;

    std::string verdict_str() const { return !has_data ? "no data" : (pass ? "pass" : "fail"); }
};

// Per-statistic pass/fail against configured bands.
std::vector<RateVerdict> rate_report(
    const std::vector<std::pair<std::string, std::optional<FitResult>>>& fits,
    const std::vector<std::tuple<std::string, double, double, double>>& bands);

}  // namespace hv
