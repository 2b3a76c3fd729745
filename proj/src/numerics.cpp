// SPDX-License-Identifier: Apache-2.0
#include "quenchloc/numerics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace quench::num {

Quadrature1D gauss_legendre(int n, double a, double b) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    Quadrature1D q;
    q.nodes.resize(n);
    q.weights.resize(n);
    // Newton iteration on P_n with the Chebyshev-angle initial guess.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        q.nodes[i] = -x;
        q.nodes[n - 1 - i] = x;
        q.weights[i] = w;
        q.weights[n - 1 - i] = w;
    }
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < n; ++i) {
        q.nodes[i] = mid + half * q.nodes[i];
        q.weights[i] *= half;
    }
    return q;
}

double pairwise_sum(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(values.first(h)) + pairwise_sum(values.subspan(h));
}

double expm1_ratio(double a) {
    if (a == 0.0) return 1.0;
    return -std::expm1(-a) / a;
}

double exp_linear_weight(double a) {
    if (a < 1e-4) {
        // (1 - (1+a)e^{-a})/a^2 = 1/2 - a/3 + a^2/8 - a^3/30 + a^4/144 - ...
        return 0.5 + a * (-1.0 / 3.0 + a * (1.0 / 8.0 + a * (-1.0 / 30.0 + a / 144.0)));
    }
    return (expm1_ratio(a) - std::exp(-a)) / a;
}

double log_ball_kernel(double z) {
    if (z <= 0.0) throw std::domain_error("log_ball_kernel: z must be positive");
    if (z < 1e-2) {
        // z cosh z - sinh z = z^3/3 + z^5/30 + z^7/840 + ...
        const double z2 = z * z;
        const double s = (z2 * z / 3.0) * (1.0 + z2 / 10.0 * (1.0 + z2 / 28.0));
        return std::log(s);
    }
    if (z < 30.0) return std::log(z * std::cosh(z) - std::sinh(z));
    // z cosh z - sinh z = e^z (z-1)/2 + e^{-z} (z+1)/2
    return z + std::log(0.5 * (z - 1.0) + 0.5 * (z + 1.0) * std::exp(-2.0 * z));
}

double log_add_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = a > b ? a : b;
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

LinearFit least_squares(const std::vector<std::vector<double>>& columns,
                        const std::vector<double>& y) {
    const std::size_t p = columns.size();
    const std::size_t n = y.size();
    if (p == 0 || n < p) throw std::invalid_argument("least_squares: underdetermined system");
    for (const auto& c : columns)
        if (c.size() != n) throw std::invalid_argument("least_squares: ragged columns");

    // Normal equations A^T A x = A^T y, solved by Gaussian elimination with
    // partial pivoting (p <= 4 in this project).
    std::vector<std::vector<double>> m(p, std::vector<double>(p + 1, 0.0));
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j)
            for (std::size_t k = 0; k < n; ++k) m[i][j] += columns[i][k] * columns[j][k];
        for (std::size_t k = 0; k < n; ++k) m[i][p] += columns[i][k] * y[k];
    }
    for (std::size_t c = 0; c < p; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < p; ++r)
            if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
        std::swap(m[c], m[piv]);
        if (m[c][c] == 0.0) throw std::runtime_error("least_squares: singular normal equations");
        for (std::size_t r = 0; r < p; ++r) {
            if (r == c) continue;
            const double f = m[r][c] / m[c][c];
            for (std::size_t j = c; j <= p; ++j) m[r][j] -= f * m[c][j];
        }
    }
    LinearFit fit;
    fit.coef.resize(p);
    for (std::size_t i = 0; i < p; ++i) fit.coef[i] = m[i][p] / m[i][i];

    double ss = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double pred = 0.0;
        for (std::size_t i = 0; i < p; ++i) pred += fit.coef[i] * columns[i][k];
        const double r = y[k] - pred;
        ss += r * r;
    }
    fit.rms = std::sqrt(ss / static_cast<double>(n));
    return fit;
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("ols_slope: need >= 2 paired samples");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

struct SimpsonFrame {
    double a, b, fa, fm, fb, whole;
};

double simpson(double fa, double fm, double fb, double h) {
    return h / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson_rec(const std::function<double(double)>& f, const SimpsonFrame& fr,
                            double tol_abs, int depth, int max_depth, double& err_acc,
                            bool& capped) {
    const double m = 0.5 * (fr.a + fr.b);
    const double lm = 0.5 * (fr.a + m), rm = 0.5 * (m + fr.b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(fr.fa, flm, fr.fm, m - fr.a);
    const double right = simpson(fr.fm, frm, fr.fb, fr.b - m);
    const double delta = left + right - fr.whole;
    if (depth >= max_depth) {
        capped = true;
        err_acc += std::abs(delta);
        return left + right + delta / 15.0;
    }
    if (std::abs(delta) <= 15.0 * tol_abs) {
        err_acc += std::abs(delta) / 15.0;
        return left + right + delta / 15.0;
    }
    SimpsonFrame lf{fr.a, m, fr.fa, flm, fr.fm, left};
    SimpsonFrame rf{m, fr.b, fr.fm, frm, fr.fb, right};
    return adaptive_simpson_rec(f, lf, tol_abs / 2.0, depth + 1, max_depth, err_acc, capped) +
           adaptive_simpson_rec(f, rf, tol_abs / 2.0, depth + 1, max_depth, err_acc, capped);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth, double* achieved) {
    // Anchor the absolute tolerance on a composite panel scan rather than a
    // single whole-interval estimate: sharply concentrated integrands can
    // make the one-shot estimate arbitrarily small, which would drive the
    // recursion to its depth cap everywhere.
    constexpr int kPanels = 32;
    const double w = (b - a) / kPanels;
    std::vector<SimpsonFrame> frames(kPanels);
    double anchor = 0.0;
    double f_right = f(a);
    for (int i = 0; i < kPanels; ++i) {
        const double x0 = a + i * w, x1 = (i + 1 == kPanels) ? b : x0 + w;
        SimpsonFrame& fr = frames[i];
        fr.a = x0;
        fr.b = x1;
        fr.fa = f_right;
        fr.fb = f(x1);
        fr.fm = f(0.5 * (x0 + x1));
        fr.whole = simpson(fr.fa, fr.fm, fr.fb, x1 - x0);
        anchor += fr.whole;
        f_right = fr.fb;
    }
    const double tol_abs = std::abs(anchor) > 0.0 ? tol * std::abs(anchor) : tol;

    double err = 0.0;
    bool capped = false;
    double result = 0.0;
    for (const auto& fr : frames)
        result += adaptive_simpson_rec(f, fr, tol_abs / kPanels, 0, max_depth, err, capped);
    if (achieved) *achieved = err;
    if (capped && !achieved)
        throw std::runtime_error("adaptive_simpson: subdivision cap reached");
    return result;
}

}  // namespace quench::num
