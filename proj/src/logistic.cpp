#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "phishguard/error.hpp"
#include "phishguard/models.hpp"

namespace phishguard {
namespace {

constexpr std::size_t kHistory = 10;
constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;

// ln(1 + exp(-m)) without overflow.
double log1p_exp_neg(double m) noexcept
{
    return m > 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
}

// 1 / (1 + exp(m)).
double sigmoid_neg(double m) noexcept
{
    if (m > 0.0) {
        const double e = std::exp(-m);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(m));
}

double label_sign(ClassLabel y) noexcept { return y == ClassLabel::Phishing ? 1.0 : -1.0; }

// theta = [w..., b]; grad has the same layout and is overwritten.
double evaluate(std::span<const SparseVector> X, std::span<const ClassLabel> y, double C,
                std::span<const double> theta, std::span<double> grad)
{
    const std::size_t dim = theta.size() - 1;
    const auto weights = theta.first(dim);
    const double intercept = theta[dim];
    const bool want_grad = !grad.empty();
    if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);

    double loss = 0.0;
    double grad_b = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double s = label_sign(y[i]);
        const double margin = s * (X[i].dot(weights) + intercept);
        loss += log1p_exp_neg(margin);
        if (want_grad) {
            const double coef = -s * C * sigmoid_neg(margin);
            const auto& x = X[i];
            for (std::size_t k = 0; k < x.nnz(); ++k) grad[x.indices[k]] += coef * x.values[k];
            grad_b += coef;
        }
    }

    double penalty = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
        penalty += weights[j] * weights[j];
        if (want_grad) grad[j] += weights[j];
    }
    if (want_grad) grad[dim] = grad_b;
    return 0.5 * penalty + C * loss;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept
{
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum;
}

double inf_norm(std::span<const double> v) noexcept
{
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

struct Correction {
    std::vector<double> s;
    std::vector<double> y;
    double rho;
};

// Two-loop recursion: returns -H g.
std::vector<double> lbfgs_direction(const std::deque<Correction>& history, std::span<const double> g)
{
    std::vector<double> q(g.begin(), g.end());
    std::vector<double> alpha(history.size());
    for (std::size_t k = history.size(); k-- > 0;) {
        const auto& h = history[k];
        alpha[k] = h.rho * dot(h.s, q);
        for (std::size_t i = 0; i < q.size(); ++i) q[i] -= alpha[k] * h.y[i];
    }
    if (!history.empty()) {
        const auto& last = history.back();
        const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
        for (double& v : q) v *= gamma;
    }
    for (std::size_t k = 0; k < history.size(); ++k) {
        const auto& h = history[k];
        const double beta = h.rho * dot(h.y, q);
        for (std::size_t i = 0; i < q.size(); ++i) q[i] += (alpha[k] - beta) * h.s[i];
    }
    for (double& v : q) v = -v;
    return q;
}

void check_training_inputs(std::span<const SparseVector> X, std::span<const ClassLabel> y)
{
    if (X.size() != y.size()) throw ArgumentError("lr_fit: X and y differ in length");
    if (X.size() < 2) throw TrainingError("lr_fit: need at least two training documents");
    bool has[2] = {false, false};
    for (auto label : y) has[encode(label)] = true;
    if (!has[0] || !has[1]) throw TrainingError("lr_fit: both classes must be present");
    const std::size_t dim = X.front().dim;
    for (const auto& x : X) {
        if (x.dim != dim) throw ArgumentError("lr_fit: inconsistent feature dimensions");
        for (double v : x.values) {
            if (!std::isfinite(v)) throw TrainingError("lr_fit: non-finite feature value");
        }
    }
}

}  // namespace

void LogisticConfig::validate() const
{
    if (!(C > 0.0) || !std::isfinite(C)) throw ArgumentError("logistic regression: C must be positive");
    if (max_iter < 0) throw ArgumentError("logistic regression: max_iter must be non-negative");
    if (!(tol >= 0.0)) throw ArgumentError("logistic regression: tol must be non-negative");
}

void LogisticModel::validate() const
{
    if (!std::isfinite(intercept)) throw FormatError("logistic regression: non-finite intercept");
    for (double w : weights) {
        if (!std::isfinite(w)) throw FormatError("logistic regression: non-finite weight");
    }
    try {
        config.validate();
    } catch (const ArgumentError& e) {
        throw FormatError(e.what());
    }
}

double logistic_objective(std::span<const SparseVector> X, std::span<const ClassLabel> y, double C,
                          std::span<const double> weights, double intercept, std::span<double> grad_w, double* grad_b)
{
    if (X.size() != y.size()) throw ArgumentError("logistic_objective: X and y differ in length");
    if (!grad_w.empty() && grad_w.size() != weights.size()) throw ArgumentError("logistic_objective: gradient size mismatch");
    for (const auto& x : X) {
        if (x.dim != weights.size()) throw ArgumentError("logistic_objective: feature dimension mismatch");
    }
    std::vector<double> theta(weights.begin(), weights.end());
    theta.push_back(intercept);
    std::vector<double> grad;
    if (!grad_w.empty() || grad_b != nullptr) grad.resize(theta.size());
    const double f = evaluate(X, y, C, theta, grad);
    if (!grad_w.empty()) std::copy(grad.begin(), grad.end() - 1, grad_w.begin());
    if (grad_b != nullptr) *grad_b = grad.back();
    return f;
}

LogisticModel lr_fit(std::span<const SparseVector> X, std::span<const ClassLabel> y, const LogisticConfig& config,
                     OptimizerTrace* trace)
{
    config.validate();
    check_training_inputs(X, y);

    const std::size_t dim = X.front().dim;
    std::vector<double> theta(dim + 1, 0.0);
    std::vector<double> grad(dim + 1);
    double f = evaluate(X, y, config.C, theta, grad);
    if (trace) trace->objective.assign(1, f);

    std::deque<Correction> history;
    std::vector<double> candidate(dim + 1);
    std::vector<double> candidate_grad(dim + 1);

    LogisticModel model;
    model.config = config;

    int iter = 0;
    while (iter < config.max_iter && inf_norm(grad) > config.tol) {
        auto direction = lbfgs_direction(history, grad);
        double slope = dot(grad, direction);
        if (!(slope < 0.0)) {
            history.clear();
            direction = lbfgs_direction(history, grad);
            slope = dot(grad, direction);
        }
        double step = 1.0;
        if (history.empty()) step = std::min(1.0, 1.0 / std::sqrt(dot(grad, grad)));

        bool accepted = false;
        double f_new = f;
        for (int b = 0; b < kMaxBacktracks; ++b) {
            for (std::size_t i = 0; i < theta.size(); ++i) candidate[i] = theta[i] + step * direction[i];
            f_new = evaluate(X, y, config.C, candidate, candidate_grad);
            if (std::isfinite(f_new) && f_new <= f + kArmijo * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (history.empty()) break;  // steepest descent cannot make progress either
            history.clear();
            continue;
        }

        Correction c{std::vector<double>(dim + 1), std::vector<double>(dim + 1), 0.0};
        for (std::size_t i = 0; i < theta.size(); ++i) {
            c.s[i] = candidate[i] - theta[i];
            c.y[i] = candidate_grad[i] - grad[i];
        }
        const double sy = dot(c.s, c.y);
        if (sy > 1e-12 * dot(c.y, c.y)) {
            c.rho = 1.0 / sy;
            history.push_back(std::move(c));
            if (history.size() > kHistory) history.pop_front();
        }

        theta.swap(candidate);
        grad.swap(candidate_grad);
        f = f_new;
        ++iter;
        if (trace) trace->objective.push_back(f);
    }

    model.weights.assign(theta.begin(), theta.end() - 1);
    model.intercept = theta.back();
    model.n_iter = iter;
    model.converged = inf_norm(grad) <= config.tol;
    return model;
}

double sigmoid(double z) noexcept
{
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double lr_decision_function(const LogisticModel& model, const SparseVector& x)
{
    if (x.dim != model.dim()) throw ArgumentError("logistic regression: feature dimension mismatch");
    return model.intercept + x.dot(model.weights);
}

double lr_predict_proba(const LogisticModel& model, const SparseVector& x)
{
    return sigmoid(lr_decision_function(model, x));
}

}  // namespace phishguard
