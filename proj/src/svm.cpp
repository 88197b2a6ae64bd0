// RBF-kernel C-SVM trained by sequential pairwise dual optimization.
//
// Minimizes f(a) = 1/2 a'Qa - e'a with Q_ij = y_i y_j K_ij subject to
// 0 <= a_i <= C and y'a = 0. Each iteration picks the maximal violating pair
// (first index by gradient, second by the second-order gain) and solves the
// two-variable subproblem exactly, so f never increases.

#include <cmath>
#include <limits>
#include <stdexcept>

#include "micmac/learners.hpp"

namespace micmac {

namespace {

constexpr double kTau = 1e-12;

double sq_distance(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        acc += d * d;
    }
    return acc;
}

}  // namespace

double default_svm_gamma(const Matrix& x) {
    const auto v = x.data();
    if (v.empty()) return 1.0;
    double mean = 0.0;
    for (double e : v) mean += e;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double e : v) var += (e - mean) * (e - mean);
    var /= static_cast<double>(v.size());
    if (!(var > 0.0)) return 1.0;
    return 1.0 / (static_cast<double>(x.cols()) * var);
}

Matrix rbf_kernel_matrix(const Matrix& x, double gamma) {
    const std::size_t n = x.rows();
    Matrix k(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        k(i, i) = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = std::exp(-gamma * sq_distance(x.row(i), x.row(j)));
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

double svm_dual_objective(std::span<const double> alpha, std::span<const int> y_pm, const Matrix& kernel) {
    double linear = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        linear += alpha[i];
        if (alpha[i] == 0.0) continue;
        for (std::size_t j = 0; j < alpha.size(); ++j) {
            quad += alpha[i] * alpha[j] * y_pm[i] * y_pm[j] * kernel(i, j);
        }
    }
    return linear - 0.5 * quad;
}

SvmState train_svm(const LearnerConfig& cfg, const Matrix& x, std::span<const int> labels) {
    const std::size_t n = x.rows();
    const double c = cfg.svm_c;
    SvmState s;
    s.gamma = cfg.svm_gamma.value_or(default_svm_gamma(x));
    const Matrix k = rbf_kernel_matrix(x, s.gamma);

    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = labels[i] == 1 ? 1 : -1;

    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);  // Q a - e at a = 0

    auto in_up = [&](std::size_t t) { return (y[t] == 1 && alpha[t] < c) || (y[t] == -1 && alpha[t] > 0.0); };
    auto in_low = [&](std::size_t t) { return (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < c); };

    const std::size_t max_iter = cfg.svm_max_sweeps * std::max<std::size_t>(n, 1);
    std::size_t iter = 0;
    double gap = 0.0;
    for (;; ++iter) {
        // Maximal violating pair.
        double g_max = -std::numeric_limits<double>::infinity();
        double g_min = std::numeric_limits<double>::infinity();
        std::size_t i = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (in_up(t) && -y[t] * grad[t] > g_max) {
                g_max = -y[t] * grad[t];
                i = t;
            }
        }
        std::size_t j = n;
        double best_gain = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            if (!in_low(t)) continue;
            const double v = -y[t] * grad[t];
            g_min = std::min(g_min, v);
            if (i == n) continue;
            const double b = g_max - v;
            if (b > 0.0) {
                double a = k(i, i) + k(t, t) - 2.0 * k(i, t);
                if (a <= 0.0) a = kTau;
                const double gain = -(b * b) / a;
                if (gain < best_gain) {
                    best_gain = gain;
                    j = t;
                }
            }
        }
        gap = g_max - g_min;
        if (i == n || j == n || gap < cfg.svm_tol || iter >= max_iter) break;

        const double old_i = alpha[i];
        const double old_j = alpha[j];
        const double qij = y[i] * y[j] * k(i, j);
        if (y[i] != y[j]) {
            double quad = k(i, i) + k(j, j) + 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = diff; }
            } else {
                if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = -diff; }
            }
            if (diff > 0.0) {
                if (alpha[i] > c) { alpha[i] = c; alpha[j] = c - diff; }
            } else {
                if (alpha[j] > c) { alpha[j] = c; alpha[i] = c + diff; }
            }
        } else {
            double quad = k(i, i) + k(j, j) - 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) { alpha[i] = c; alpha[j] = sum - c; }
            } else {
                if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = sum; }
            }
            if (sum > c) {
                if (alpha[j] > c) { alpha[j] = c; alpha[i] = sum - c; }
            } else {
                if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = sum; }
            }
        }
        const double di = alpha[i] - old_i;
        const double dj = alpha[j] - old_j;
        for (std::size_t t = 0; t < n; ++t) {
            grad[t] += y[t] * (y[i] * k(i, t) * di + y[j] * k(j, t) * dj);
        }
        if ((iter + 1) % n == 0) s.objective_per_sweep.push_back(svm_dual_objective(alpha, y, k));
    }

    // Bias from free vectors, or the midpoint of the feasible interval.
    double sum_free = 0.0;
    std::size_t n_free = 0;
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (alpha[t] > 0.0 && alpha[t] < c) {
            sum_free += yg;
            ++n_free;
        } else if ((alpha[t] >= c && y[t] == -1) || (alpha[t] <= 0.0 && y[t] == 1)) {
            ub = std::min(ub, yg);
        } else {
            lb = std::max(lb, yg);
        }
    }
    double rho = 0.0;
    if (n_free > 0) rho = sum_free / static_cast<double>(n_free);
    else if (std::isfinite(ub) && std::isfinite(lb)) rho = 0.5 * (ub + lb);
    else if (std::isfinite(ub)) rho = ub;
    else if (std::isfinite(lb)) rho = lb;
    s.bias = -rho;

    std::vector<std::size_t> sv;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > 0.0) sv.push_back(t);
    }
    s.support = x.select_rows(sv);
    for (auto t : sv) s.coef.push_back(alpha[t] * y[t]);
    s.dual_objective = svm_dual_objective(alpha, y, k);
    s.objective_per_sweep.push_back(s.dual_objective);
    s.kkt_gap = gap;
    s.iterations = iter;
    s.alpha = std::move(alpha);
    return s;
}

std::vector<int> predict_svm(const SvmState& s, const Matrix& x) {
    std::vector<int> out(x.rows());
    for (std::size_t q = 0; q < x.rows(); ++q) {
        double f = s.bias;
        for (std::size_t i = 0; i < s.support.rows(); ++i) {
            f += s.coef[i] * std::exp(-s.gamma * sq_distance(x.row(q), s.support.row(i)));
        }
        out[q] = f > 0.0 ? 1 : 0;
    }
    return out;
}

}  // namespace micmac
