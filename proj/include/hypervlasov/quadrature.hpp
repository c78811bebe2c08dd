#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <queue>
#include <vector>

namespace hv::quad {

struct Result {
    double value = 0.0;
    double error = 0.0;
    long nodes = 0;
    bool converged = true;
};

namespace detail {
// 8-point Gauss-Legendre on [-1, 1].
inline constexpr double gx[8] = {-0.9602898564975363, -0.7966664774136267,
                                 -0.5255324099163290, -0.1834346424956498,
                                 0.1834346424956498,  0.5255324099163290,
                                 0.7966664774136267,  0.9602898564975363};
inline constexpr double gw[8] = {0.1012285362903763, 0.2223810344533745,
                                 0.3137066458778873, 0.3626837833783620,
                                 0.3626837833783620, 0.3137066458778873,
                                 0.2223810344533745, 0.1012285362903763};
// 4-point rule used for the embedded error estimate.
inline constexpr double gx4[4] = {-0.8611363115940526, -0.3399810435848563,
                                  0.3399810435848563, 0.8611363115940526};
inline constexpr double gw4[4] = {0.3478548451374538, 0.6521451548625461,
                                  0.6521451548625461, 0.3478548451374538};
}  // namespace detail

// Adaptive tensor-product Gauss-Legendre quadrature of f(x, y) over
// [x0,x1]x[y0,y1]: dyadic refinement of the panels with the largest embedded
// error until the estimated error meets max(tol * |value|, abs_floor) or the
// node budget is hit.
template <typename F>
Result adaptive_tensor(F&& f, double x0, double x1, double y0, double y1, double tol,
                       long max_nodes, int nx0 = 8, int ny0 = 8, double abs_floor = 0.0) {
    using namespace detail;
    struct Panel {
        double x0, x1, y0, y1, val, err;
        bool operator<(const Panel& o) const { return err < o.err; }
    };

    long nodes = 0;
    auto eval_panel = [&](double a, double b, double c, double d) {
        const double xm = 0.5 * (a + b), xh = 0.5 * (b - a);
        const double ym = 0.5 * (c + d), yh = 0.5 * (d - c);
        double fine = 0.0;
        double fv[8][8];
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) {
                fv[i][j] = f(xm + xh * gx[i], ym + yh * gx[j]);
                fine += gw[i] * gw[j] * fv[i][j];
            }
        fine *= xh * yh;
        double coarse = 0.0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                coarse += gw4[i] * gw4[j] * f(xm + xh * gx4[i], ym + yh * gx4[j]);
        coarse *= xh * yh;
        nodes += 64 + 16;
        return Panel{a, b, c, d, fine, std::fabs(fine - coarse)};
    };

    std::priority_queue<Panel> pq;
    double total = 0.0, err = 0.0;
    const double wx0 = (x1 - x0) / nx0, wy0 = (y1 - y0) / ny0;
    for (int i = 0; i < nx0; ++i)
        for (int j = 0; j < ny0; ++j) {
            Panel p = eval_panel(x0 + i * wx0, x0 + (i + 1) * wx0, y0 + j * wy0,
                                 y0 + (j + 1) * wy0);
            total += p.val;
            err += p.err;
            pq.push(p);
        }

    auto target = [&] {
        return std::max(tol * std::max(std::fabs(total), 1e-300), abs_floor);
    };
    while (err > target() && nodes < max_nodes) {
        Panel p = pq.top();
        if (p.err <= 0.0) break;
        pq.pop();
        total -= p.val;
        err -= p.err;
        // split along the longer side relative to the initial panel aspect
        const bool split_x = (p.x1 - p.x0) / wx0 >= (p.y1 - p.y0) / wy0;
        Panel c1 = split_x ? eval_panel(p.x0, 0.5 * (p.x0 + p.x1), p.y0, p.y1)
                           : eval_panel(p.x0, p.x1, p.y0, 0.5 * (p.y0 + p.y1));
        Panel c2 = split_x ? eval_panel(0.5 * (p.x0 + p.x1), p.x1, p.y0, p.y1)
                           : eval_panel(p.x0, p.x1, 0.5 * (p.y0 + p.y1), p.y1);
        total += c1.val + c2.val;
        err += c1.err + c2.err;
        pq.push(c1);
        pq.push(c2);
    }

    Result res;
    res.value = total;
    res.error = err;
    res.nodes = nodes;
    res.converged = err <= target();
    return res;
}

}  // namespace hv::quad
