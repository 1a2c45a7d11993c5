#pragma once

// Independent dense reference computations used by the unit and acceptance tests.

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "phishguard/label.hpp"
#include "phishguard/models.hpp"
#include "support.hpp"

namespace pgtest {

using Dense = std::vector<std::vector<double>>;

// Multinomial NB posterior from scratch: smoothed class totals, log-space
// joint likelihood, log-sum-exp normalisation.
inline std::array<double, 2> nb_dense_posterior(const Dense& X, const std::vector<int>& y, double alpha,
                                                const std::vector<double>& x)
{
    const std::size_t dim = x.size();
    std::array<double, 2> joint{};
    for (int c = 0; c < 2; ++c) {
        double n_c = 0;
        std::vector<double> s(dim, 0.0);
        for (std::size_t d = 0; d < X.size(); ++d) {
            if (y[d] != c) continue;
            n_c += 1;
            for (std::size_t i = 0; i < dim; ++i) s[i] += X[d][i];
        }
        double total = 0;
        for (double v : s) total += v;
        double score = std::log(n_c / static_cast<double>(X.size()));
        for (std::size_t i = 0; i < dim; ++i) {
            score += x[i] * std::log((s[i] + alpha) / (total + alpha * static_cast<double>(dim)));
        }
        joint[static_cast<std::size_t>(c)] = score;
    }
    const double m = std::max(joint[0], joint[1]);
    const double z = m + std::log(std::exp(joint[0] - m) + std::exp(joint[1] - m));
    return {std::exp(joint[0] - z), std::exp(joint[1] - z)};
}

struct GradientCheck {
    double relative_error = 0.0;  // ||analytic - numeric||_2 / max(||analytic||_2, ||numeric||_2)
};

// Central differences of the LR objective in every coordinate of (w, b).
inline GradientCheck lr_gradient_check(const std::vector<phishguard::SparseVector>& X,
                                       const std::vector<phishguard::ClassLabel>& y, double C, std::vector<double> w,
                                       double b, double h)
{
    std::vector<double> grad(w.size());
    double grad_b = 0.0;
    phishguard::logistic_objective(X, y, C, w, b, grad, &grad_b);
    grad.push_back(grad_b);

    std::vector<double> numeric(w.size() + 1);
    for (std::size_t i = 0; i <= w.size(); ++i) {
        const auto at = [&](double delta) {
            if (i < w.size()) {
                auto v = w;
                v[i] += delta;
                return phishguard::logistic_objective(X, y, C, v, b);
            }
            return phishguard::logistic_objective(X, y, C, w, b + delta);
        };
        numeric[i] = (at(h) - at(-h)) / (2 * h);
    }
    double diff = 0, na = 0, nn = 0;
    for (std::size_t i = 0; i < grad.size(); ++i) {
        diff += (grad[i] - numeric[i]) * (grad[i] - numeric[i]);
        na += grad[i] * grad[i];
        nn += numeric[i] * numeric[i];
    }
    const double scale = std::max({std::sqrt(na), std::sqrt(nn), 1e-300});
    return {std::sqrt(diff) / scale};
}

struct DenseProblem {
    std::vector<phishguard::SparseVector> X;
    std::vector<phishguard::ClassLabel> y;
    std::vector<double> w;
    double b = 0.0;
};

inline DenseProblem random_dense_problem(std::mt19937_64& rng, std::size_t rows, std::size_t cols)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    DenseProblem p;
    for (std::size_t r = 0; r < rows; ++r) {
        std::vector<double> row(cols);
        for (auto& v : row) v = normal(rng);
        p.X.push_back(dense_to_sparse(row));
        p.y.push_back(r % 2 ? phishguard::ClassLabel::Phishing : phishguard::ClassLabel::Legitimate);
    }
    std::shuffle(p.y.begin(), p.y.end(), rng);
    p.w.resize(cols);
    for (auto& v : p.w) v = normal(rng);
    p.b = normal(rng);
    return p;
}

}  // namespace pgtest
