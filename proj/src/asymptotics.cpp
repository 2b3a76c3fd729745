// SPDX-License-Identifier: Apache-2.0
#include "quenchloc/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

#include "quenchloc/numerics.hpp"

namespace quench::asymptotics {

namespace {

struct Cell {
    double s0, s1, t0, t1;
    double coarse = 0.0;   // 4x4 tensor Gauss estimate of the rescaled integrand
    double fine = 0.0;     // sum over the 2x2 split
    double err = 0.0;      // |fine - coarse|
    long seq = 0;          // insertion order; deterministic tie-break
};

struct CellOrder {
    bool operator()(const Cell& a, const Cell& b) const {
        if (a.err != b.err) return a.err < b.err;
        return a.seq > b.seq;  // older cell first on ties
    }
};

}  // namespace

LaplaceResult laplace_integral(const LaplaceProblem& prob, double tau, double tol,
                               int max_cells) {
    if (!(tau > 0.0)) throw std::invalid_argument("laplace_integral: tau must be > 0");
    if (!(tol > 0.0)) throw std::invalid_argument("laplace_integral: tol must be > 0");
    if (!prob.h || !prob.k) throw std::invalid_argument("laplace_integral: missing h or k");

    const auto q = num::gauss_legendre(4, 0.0, 1.0);
    // Integrand rescaled by e^{tau h_min} so cell sums stay representable
    // for arbitrarily large tau * h_min; undone at the end.
    const auto eval_cell = [&](double s0, double s1, double t0, double t1) {
        double sum = 0.0;
        const double ds = s1 - s0, dt = t1 - t0;
        for (std::size_t i = 0; i < q.nodes.size(); ++i) {
            for (std::size_t j = 0; j < q.nodes.size(); ++j) {
                const double s = s0 + ds * q.nodes[i];
                const double t = t0 + dt * q.nodes[j];
                sum += q.weights[i] * q.weights[j] *
                       std::exp(-tau * (prob.h(s, t) - prob.h_min)) * prob.k(s, t);
            }
        }
        return sum * ds * dt;
    };
    const auto min_offset = [&](double s0, double s1, double t0, double t1) {
        double m = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= 2; ++i)
            for (int j = 0; j <= 2; ++j)
                m = std::min(m, prob.h(s0 + (s1 - s0) * i / 2.0, t0 + (t1 - t0) * j / 2.0) -
                                    prob.h_min);
        return tau * m;
    };

    long seq = 0;
    const auto make_cell = [&](double s0, double s1, double t0, double t1) {
        Cell c{s0, s1, t0, t1};
        c.coarse = eval_cell(s0, s1, t0, t1);
        const double sm = 0.5 * (s0 + s1), tm = 0.5 * (t0 + t1);
        c.fine = eval_cell(s0, sm, t0, tm) + eval_cell(sm, s1, t0, tm) +
                 eval_cell(s0, sm, tm, t1) + eval_cell(sm, s1, tm, t1);
        c.err = std::abs(c.fine - c.coarse);
        // Cells entirely in the exponentially dead zone need no refinement.
        if (min_offset(s0, s1, t0, t1) > 30.0) c.err = 0.0;
        c.seq = seq++;
        return c;
    };

    std::priority_queue<Cell, std::vector<Cell>, CellOrder> heap;
    {
        Cell root = make_cell(prob.s_a, prob.s_b, prob.t_a, prob.t_b);
        heap.push(root);
    }
    double total = heap.top().fine;
    double err = heap.top().err;
    int cells = 1;
    bool converged = true;

    while (err > tol * std::abs(total) && heap.top().err > 0.0) {
        if (cells >= max_cells) {
            converged = false;
            break;
        }
        const Cell c = heap.top();
        heap.pop();
        total -= c.fine;
        err -= c.err;
        const double sm = 0.5 * (c.s0 + c.s1), tm = 0.5 * (c.t0 + c.t1);
        for (const Cell& child : {make_cell(c.s0, sm, c.t0, tm), make_cell(sm, c.s1, c.t0, tm),
                                  make_cell(c.s0, sm, tm, c.t1), make_cell(sm, c.s1, tm, c.t1)}) {
            total += child.fine;
            err += child.err;
            heap.push(child);
        }
        cells += 3;
        err = std::max(err, 0.0);
    }

    LaplaceResult out;
    const double unscale = std::exp(-tau * prob.h_min);
    out.log_value = total > 0.0 ? std::log(total) - tau * prob.h_min
                                : -std::numeric_limits<double>::infinity();
    out.value = total * unscale;
    out.error_estimate = err * unscale;
    out.converged = converged;
    out.cells_used = cells;
    return out;
}

double rate_estimate(const std::vector<std::pair<double, double>>& tau_J, double h_min) {
    if (tau_J.size() < 3) throw std::invalid_argument("rate_estimate: need >= 3 points");
    std::vector<double> x, y;
    x.reserve(tau_J.size());
    y.reserve(tau_J.size());
    for (const auto& [tau, J] : tau_J) {
        if (!(J > 0.0)) throw std::invalid_argument("rate_estimate: J values must be positive");
        x.push_back(std::log(tau));
        y.push_back(std::log(J) + tau * h_min);
    }
    return num::ols_slope(x, y);
}

}  // namespace quench::asymptotics
