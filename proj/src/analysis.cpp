#include "hypervlasov/analysis.hpp"

#include <cmath>
#include <stdexcept>

namespace hv {

namespace {

FitResult fit_loglinear(const DecaySeries& s, double t_a, double t_b, FitModel model) {
    if (s.t.size() != s.y.size()) throw std::invalid_argument("fit: ragged series");
    std::vector<double> xs, ys;
    int zeros = 0;
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        if (s.t[i] < t_a || s.t[i] > t_b) continue;
        if (!(s.y[i] > 0)) {
            ++zeros;
            continue;
        }
        xs.push_back(model == FitModel::exponential ? s.t[i] : std::log(s.t[i]));
        ys.push_back(std::log(s.y[i]));
    }
    if (xs.size() < 5)
        throw std::runtime_error("fit: insufficient data (need >= 5 positive points in window)");

    const std::size_t n = xs.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double ss_res = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = ys[i] - (intercept + slope * xs[i]);
        ss_res += e * e;
    }
    FitResult f;
    f.model = model;
    f.rate = -slope;
    f.amplitude = std::exp(intercept);
    f.r_squared = syy > 0 ? std::max(0.0, 1.0 - ss_res / syy) : 1.0;
    f.t_a = t_a;
    f.t_b = t_b;
    f.n_points = static_cast<int>(n);
    f.zeros_dropped = zeros;
    return f;
}

}  // namespace

FitResult fit_exponential(const DecaySeries& s, double t_a, double t_b) {
    return fit_loglinear(s, t_a, t_b, FitModel::exponential);
}

FitResult fit_power(const DecaySeries& s, double t_a, double t_b) {
    return fit_loglinear(s, t_a, t_b, FitModel::power);
}

std::optional<FitResult> try_fit(const DecaySeries& s, FitModel model, double t_a, double t_b) {
    try {
        return fit_loglinear(s, t_a, t_b, model);
    } catch (const std::runtime_error&) {
        return std::nullopt;
    }
}

std::vector<RateVerdict> rate_report(
    const std::vector<std::pair<std::string, std::optional<FitResult>>>& fits,
    const std::vector<std::tuple<std::string, double, double, double>>& bands) {
    if (fits.empty()) throw std::invalid_argument("rate_report: no fits supplied");
    std::vector<RateVerdict> out;
    for (const auto& [label, fit] : fits) {
        RateVerdict v;
        v.label = label;
        for (const auto& [blabel, expected, lo, hi] : bands) {
            if (blabel == label) {
                v.expected = expected;
                v.band_lo = lo;
                v.band_hi = hi;
            }
        }
        if (fit) {
            v.has_data = true;
            v.fitted = fit->rate;
            v.pass = v.fitted >= v.band_lo && v.fitted <= v.band_hi;
        }
        out.push_back(v);
    }
    return out;
}

}  // namespace hv
