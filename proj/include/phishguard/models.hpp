#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "phishguard/label.hpp"
#include "phishguard/sparse.hpp"
#include "phishguard/vectorize.hpp"

namespace phishguard {

// ---------------------------------------------------------------------------
// Multinomial Naive Bayes

struct NaiveBayesModel {
    std::array<double, 2> class_log_prior{};                 // ln P(c), indexed by ClassLabel encoding
    std::array<std::vector<double>, 2> feature_log_prob{};  // ln P(x_i | c)
    double alpha = 1.0;
    std::size_t dim = 0;

    /// exp(class_log_prior) sums to 1 within 1e-12 and every
    /// exp(feature_log_prob[c]) row sums to 1 within 1e-9.
    void validate() const;
};

/// Smoothed per-class feature totals:
///   ln P(x_i|c) = ln((S_ci + alpha) / (S_c + alpha * dim)).
/// Fractional (TF-IDF) feature values are accepted as-is.
NaiveBayesModel nb_fit(std::span<const SparseVector> X, std::span<const ClassLabel> y, double alpha = 1.0);

/// ln P(c) + sum_i x_i ln P(x_i|c) for both classes.
std::array<double, 2> nb_joint_log_likelihood(const NaiveBayesModel& model, const SparseVector& x);

/// Posterior (legitimate, phishing) via a log-sum-exp stabilized softmax.
std::array<double, 2> nb_predict_proba(const NaiveBayesModel& model, const SparseVector& x);

// ---------------------------------------------------------------------------
// Logistic regression

struct LogisticConfig {
    double C = 1.0;         // inverse regularization strength
    int max_iter = 1000;
    double tol = 1e-4;      // on the gradient infinity-norm
    std::uint64_t seed = 42;  // recorded; weights start at zero so training is deterministic regardless

    void validate() const;

    friend bool operator==(const LogisticConfig&, const LogisticConfig&) = default;
};

struct LogisticModel {
    std::vector<double> weights;
    double intercept = 0.0;
    LogisticConfig config;
    bool converged = false;
    int n_iter = 0;

    std::size_t dim() const noexcept { return weights.size(); }
    void validate() const;
};

/// J(w, b) = 0.5 ||w||^2 + C * sum_i ln(1 + exp(-s_i (w.x_i + b))), s_i = +-1.
/// The intercept is not regularized. When `grad_w` is non-empty it receives
/// dJ/dw (and must have the weights' size); `grad_b` receives dJ/db if set.
double logistic_objective(std::span<const SparseVector> X, std::span<const ClassLabel> y, double C,
                          std::span<const double> weights, double intercept, std::span<double> grad_w = {},
                          double* grad_b = nullptr);

/// Objective value at the start and after every accepted step.
struct OptimizerTrace {
    std::vector<double> objective;
};

/// Full-batch L-BFGS (history 10) with Armijo backtracking from w = 0, b = 0.
/// Stops when the gradient infinity-norm is <= tol or after max_iter steps.
LogisticModel lr_fit(std::span<const SparseVector> X, std::span<const ClassLabel> y, const LogisticConfig& config = {},
                     OptimizerTrace* trace = nullptr);

double sigmoid(double z) noexcept;
double lr_decision_function(const LogisticModel& model, const SparseVector& x);
double lr_predict_proba(const LogisticModel& model, const SparseVector& x);

// ---------------------------------------------------------------------------
// Interpretation

struct TermWeight {
    std::string term;
    double weight = 0.0;

    friend bool operator==(const TermWeight&, const TermWeight&) = default;
};

struct FeatureRanking {
    std::vector<TermWeight> phishing;    // positive coefficients, largest first
    std::vector<TermWeight> legitimate;  // negative coefficients, most negative first
};

/// Up to k strictly positive and k strictly negative coefficients, each list
/// sorted by |coefficient| descending, ties broken by term. Throws
/// ArgumentError for k < 1.
FeatureRanking top_features(const LogisticModel& model, const Vocabulary& vocab, std::size_t k);

/// Per active feature, weight_i * value_i; the k largest by magnitude, signed.
std::vector<TermWeight> explain(const LogisticModel& model, const SparseVector& x, const Vocabulary& vocab,
                                std::size_t k);

/// NB analogue of `explain`: x_i * (ln P(x_i|phishing) - ln P(x_i|legitimate)).
std::vector<TermWeight> explain(const NaiveBayesModel& model, const SparseVector& x, const Vocabulary& vocab,
                                std::size_t k);

// ---------------------------------------------------------------------------

using TrainedModel = std::variant<NaiveBayesModel, LogisticModel>;

std::string_view model_kind(const TrainedModel& model) noexcept;  // "naive_bayes" | "logistic_regression"
std::size_t model_dim(const TrainedModel& model) noexcept;

/// Decision rule: phishing iff p_phishing >= 0.5.
constexpr ClassLabel decide(double p_phishing) noexcept
{
    return p_phishing >= 0.5 ? ClassLabel::Phishing : ClassLabel::Legitimate;
}

struct Prediction {
    ClassLabel label = ClassLabel::Legitimate;
    double p_phishing = 0.0;
    std::vector<TermWeight> contributions;  // sorted by |weight| descending
};

double predict_proba(const TrainedModel& model, const SparseVector& x);
Prediction predict(const TrainedModel& model, const SparseVector& x, const Vocabulary& vocab, std::size_t top_k);

}  // namespace phishguard
