#include <algorithm>
#include <cmath>

#include "phishguard/error.hpp"
#include "phishguard/models.hpp"

namespace phishguard {

void NaiveBayesModel::validate() const
{
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw FormatError("naive bayes: alpha must be positive");
    const double prior_sum = std::exp(class_log_prior[0]) + std::exp(class_log_prior[1]);
    if (!(std::abs(prior_sum - 1.0) <= 1e-12)) throw FormatError("naive bayes: class priors do not sum to 1");
    for (const auto& row : feature_log_prob) {
        if (row.size() != dim) throw FormatError("naive bayes: feature_log_prob row has wrong length");
        double sum = 0.0;
        for (double v : row) {
            if (!std::isfinite(v)) throw FormatError("naive bayes: non-finite feature_log_prob");
            sum += std::exp(v);
        }
        if (dim > 0 && !(std::abs(sum - 1.0) <= 1e-9)) throw FormatError("naive bayes: feature_log_prob row not normalized");
    }
}

NaiveBayesModel nb_fit(std::span<const SparseVector> X, std::span<const ClassLabel> y, double alpha)
{
    if (X.size() != y.size()) throw ArgumentError("nb_fit: X and y differ in length");
    if (X.empty()) throw TrainingError("nb_fit: no training documents");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ArgumentError("nb_fit: alpha must be positive");

    const std::size_t dim = X.front().dim;
    std::array<std::size_t, 2> class_count{};
    std::array<std::vector<double>, 2> feature_sum{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};

    for (std::size_t i = 0; i < X.size(); ++i) {
        const auto& x = X[i];
        if (x.dim != dim) throw ArgumentError("nb_fit: inconsistent feature dimensions");
        const auto c = static_cast<std::size_t>(encode(y[i]));
        ++class_count[c];
        for (std::size_t k = 0; k < x.nnz(); ++k) {
            if (!(x.values[k] >= 0.0) || !std::isfinite(x.values[k])) {
                throw TrainingError("nb_fit: feature values must be finite and non-negative");
            }
            feature_sum[c][x.indices[k]] += x.values[k];
        }
    }
    if (class_count[0] == 0 || class_count[1] == 0) throw TrainingError("nb_fit: both classes must be present");

    NaiveBayesModel model;
    model.alpha = alpha;
    model.dim = dim;
    const auto n = static_cast<double>(X.size());
    for (std::size_t c = 0; c < 2; ++c) {
        model.class_log_prior[c] = std::log(static_cast<double>(class_count[c]) / n);
        double class_total = 0.0;
        for (double s : feature_sum[c]) class_total += s;
        const double log_denominator = std::log(class_total + alpha * static_cast<double>(dim));
        auto& row = model.feature_log_prob[c];
        row.resize(dim);
        for (std::size_t i = 0; i < dim; ++i) row[i] = std::log(feature_sum[c][i] + alpha) - log_denominator;
    }
    return model;
}

std::array<double, 2> nb_joint_log_likelihood(const NaiveBayesModel& model, const SparseVector& x)
{
    if (x.dim != model.dim) throw ArgumentError("naive bayes: feature dimension mismatch");
    std::array<double, 2> score = model.class_log_prior;
    for (std::size_t c = 0; c < 2; ++c) score[c] += x.dot(model.feature_log_prob[c]);
    return score;
}

std::array<double, 2> nb_predict_proba(const NaiveBayesModel& model, const SparseVector& x)
{
    const auto score = nb_joint_log_likelihood(model, x);
    const double top = std::max(score[0], score[1]);
    const double e0 = std::exp(score[0] - top);
    const double e1 = std::exp(score[1] - top);
    const double z = e0 + e1;
    return {e0 / z, e1 / z};
}

}  // namespace phishguard
