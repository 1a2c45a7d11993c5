#include <algorithm>
#include <cmath>

#include "phishguard/error.hpp"
#include "phishguard/models.hpp"

namespace phishguard {
namespace {

bool by_magnitude(const TermWeight& a, const TermWeight& b)
{
    const double ma = std::abs(a.weight);
    const double mb = std::abs(b.weight);
    if (ma != mb) return ma > mb;
    return a.term < b.term;
}

void keep_top(std::vector<TermWeight>& items, std::size_t k)
{
    std::sort(items.begin(), items.end(), by_magnitude);
    if (items.size() > k) items.resize(k);
}

void check_dims(std::size_t model_dim, const Vocabulary& vocab)
{
    if (model_dim != vocab.size()) throw ArgumentError("model dimension does not match vocabulary size");
}

}  // namespace

FeatureRanking top_features(const LogisticModel& model, const Vocabulary& vocab, std::size_t k)
{
    if (k < 1) throw ArgumentError("top_features: k must be >= 1");
    check_dims(model.dim(), vocab);
    FeatureRanking ranking;
    for (std::size_t i = 0; i < model.dim(); ++i) {
        const double w = model.weights[i];
        if (w > 0.0) ranking.phishing.push_back({vocab.terms()[i], w});
        if (w < 0.0) ranking.legitimate.push_back({vocab.terms()[i], w});
    }
    keep_top(ranking.phishing, k);
    keep_top(ranking.legitimate, k);
    return ranking;
}

std::vector<TermWeight> explain(const LogisticModel& model, const SparseVector& x, const Vocabulary& vocab,
                                std::size_t k)
{
    check_dims(model.dim(), vocab);
    if (x.dim != model.dim()) throw ArgumentError("explain: feature dimension mismatch");
    std::vector<TermWeight> out;
    out.reserve(x.nnz());
    for (std::size_t n = 0; n < x.nnz(); ++n) {
        out.push_back({vocab.terms()[x.indices[n]], model.weights[x.indices[n]] * x.values[n]});
    }
    keep_top(out, k);
    return out;
}

std::vector<TermWeight> explain(const NaiveBayesModel& model, const SparseVector& x, const Vocabulary& vocab,
                                std::size_t k)
{
    check_dims(model.dim, vocab);
    if (x.dim != model.dim) throw ArgumentError("explain: feature dimension mismatch");
    std::vector<TermWeight> out;
    out.reserve(x.nnz());
    for (std::size_t n = 0; n < x.nnz(); ++n) {
        const auto i = x.indices[n];
        const double log_odds = model.feature_log_prob[1][i] - model.feature_log_prob[0][i];
        out.push_back({vocab.terms()[i], x.values[n] * log_odds});
    }
    keep_top(out, k);
    return out;
}

std::string_view model_kind(const TrainedModel& model) noexcept
{
    return std::holds_alternative<LogisticModel>(model) ? "logistic_regression" : "naive_bayes";
}

std::size_t model_dim(const TrainedModel& model) noexcept
{
    return std::visit(
        [](const auto& m) -> std::size_t {
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>, LogisticModel>) return m.dim();
            else return m.dim;
        },
        model);
}

double predict_proba(const TrainedModel& model, const SparseVector& x)
{
    if (const auto* lr = std::get_if<LogisticModel>(&model)) return lr_predict_proba(*lr, x);
    return nb_predict_proba(std::get<NaiveBayesModel>(model), x)[1];
}

Prediction predict(const TrainedModel& model, const SparseVector& x, const Vocabulary& vocab, std::size_t top_k)
{
    Prediction p;
    p.p_phishing = predict_proba(model, x);
    p.label = decide(p.p_phishing);
    p.contributions = std::visit([&](const auto& m) { return explain(m, x, vocab, top_k); }, model);
    return p;
}

}  // namespace phishguard
