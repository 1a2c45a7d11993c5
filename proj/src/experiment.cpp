#include "phishguard/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <future>

#include "parallel.hpp"

namespace phishguard {
namespace {

std::vector<TokenSeq> preprocess_all(std::span<const RawEmail> records, const Preprocessor& pre)
{
    std::vector<TokenSeq> tokens(records.size());
    detail::parallel_for(records.size(), [&](std::size_t i) { tokens[i] = pre(records[i].text); });
    return tokens;
}

ClassCounts count_classes(std::span<const RawEmail> records)
{
    ClassCounts c;
    for (const auto& r : records) (r.label == ClassLabel::Phishing ? c.phishing : c.legitimate) += 1;
    return c;
}

template <typename Fn>
auto timed(bool record, Fn&& fn)
{
    const auto start = std::chrono::steady_clock::now();
    auto result = fn();
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    return std::pair{std::move(result), record ? elapsed.count() : 0.0};
}

nlohmann::json ranking_json(const std::vector<TermWeight>& items)
{
    auto out = nlohmann::json::array();
    for (const auto& t : items) out.push_back({{"term", t.term}, {"coefficient", t.weight}});
    return out;
}

nlohmann::json counts_json(const ClassCounts& c)
{
    return {{"legitimate", c.legitimate}, {"phishing", c.phishing}, {"total", c.total()}};
}

}  // namespace

FittedVectorizer fit_vectorizer(const TrainPartition& train, const Preprocessor& pre, const TfidfConfig& config)
{
    const auto tokens = preprocess_all(train.records(), pre);
    auto vocab = fit_vocabulary(tokens, config);
    std::vector<SparseVector> matrix(tokens.size());
    detail::parallel_for(tokens.size(), [&](std::size_t i) { matrix[i] = transform(tokens[i], vocab); });
    return {std::move(vocab), std::move(matrix)};
}

std::vector<SparseVector> transform_records(std::span<const RawEmail> records, const Preprocessor& pre,
                                            const Vocabulary& vocab)
{
    std::vector<SparseVector> matrix(records.size());
    detail::parallel_for(records.size(), [&](std::size_t i) { matrix[i] = transform(pre(records[i].text), vocab); });
    return matrix;
}

std::vector<ClassLabel> labels_of(std::span<const RawEmail> records)
{
    std::vector<ClassLabel> y;
    y.reserve(records.size());
    for (const auto& r : records) y.push_back(r.label);
    return y;
}

ExperimentOutcome run_experiment(std::span<const RawEmail> corpus, const ExperimentConfig& config,
                                 const Preprocessor& pre)
{
    config.tfidf.validate();
    config.lr.validate();
    const auto split = stratified_split(corpus, config.split);

    auto fitted = fit_vectorizer(split.train, pre, config.tfidf);
    const auto test_matrix = transform_records(split.test.records(), pre, fitted.vocab);
    const auto y_train = labels_of(split.train.records());
    const auto y_test = labels_of(split.test.records());

    const auto& X = fitted.train_matrix;
    auto nb_job = std::async(std::launch::async, [&] {
        return timed(config.record_timing, [&] { return nb_fit(X, y_train, config.nb_alpha); });
    });
    auto [lr, lr_seconds] = timed(config.record_timing, [&] { return lr_fit(X, y_train, config.lr); });
    auto [nb, nb_seconds] = nb_job.get();

    std::vector<ClassLabel> nb_pred;
    std::vector<ClassLabel> lr_pred;
    nb_pred.reserve(test_matrix.size());
    lr_pred.reserve(test_matrix.size());
    for (const auto& x : test_matrix) {
        nb_pred.push_back(decide(nb_predict_proba(nb, x)[1]));
        lr_pred.push_back(decide(lr_predict_proba(lr, x)));
    }

    ExperimentOutcome out{.vocab = std::move(fitted.vocab)};
    auto& report = out.report;
    report.models.push_back({"naive_bayes", metrics(confusion(y_test, nb_pred)), nb_seconds});
    report.models.push_back({"logistic_regression", metrics(confusion(y_test, lr_pred)), lr_seconds});
    report.vocab_size = out.vocab.size();
    report.sparsity = sparsity(X, out.vocab.size());
    report.train = count_classes(split.train.records());
    report.test = count_classes(split.test.records());
    report.split = config.split;
    report.tfidf = config.tfidf;
    report.lr_config = config.lr;
    report.lr_converged = lr.converged;
    report.lr_iterations = lr.n_iter;
    report.top_features = top_features(lr, out.vocab, config.top_k);
    out.nb = std::move(nb);
    out.lr = std::move(lr);
    return out;
}

nlohmann::json to_json(const MetricsReport& m)
{
    return {{"accuracy", m.accuracy},
            {"precision", m.precision},
            {"recall", m.recall},
            {"f1", m.f1},
            {"confusion", to_json(m.confusion)}};
}

nlohmann::json to_json(const ModelResult& result, std::size_t vocab_size, double sparsity)
{
    auto j = to_json(result.metrics);
    j["model"] = result.model;
    j["vocab_size"] = vocab_size;
    j["sparsity"] = sparsity;
    j["train_seconds"] = result.train_seconds;
    return j;
}

nlohmann::json to_json(const ExperimentReport& report)
{
    auto models = nlohmann::json::array();
    for (const auto& m : report.models) models.push_back(to_json(m, report.vocab_size, report.sparsity));
    return {
        {"models", models},
        {"split",
         {{"train_fraction", report.split.train_fraction},
          {"seed", report.split.seed},
          {"train", counts_json(report.train)},
          {"test", counts_json(report.test)}}},
        {"tfidf",
         {{"max_features", report.tfidf.max_features},
          {"ngram_min", report.tfidf.ngram_min},
          {"ngram_max", report.tfidf.ngram_max},
          {"min_df", report.tfidf.min_df},
          {"max_df", report.tfidf.max_df},
          {"idf_mode", to_string(report.tfidf.idf_mode)}}},
        {"logistic_regression",
         {{"C", report.lr_config.C},
          {"max_iter", report.lr_config.max_iter},
          {"tol", report.lr_config.tol},
          {"seed", report.lr_config.seed},
          {"converged", report.lr_converged},
          {"n_iter", report.lr_iterations}}},
        {"top_features",
         {{"phishing", ranking_json(report.top_features.phishing)},
          {"legitimate", ranking_json(report.top_features.legitimate)}}},
    };
}

std::string render_metrics_table(std::span<const ModelResult> models)
{
    std::string out;
    char line[160];
    std::snprintf(line, sizeof line, "%-22s %9s %10s %8s %9s\n", "Model", "Accuracy", "Precision", "Recall", "F1-Score");
    out += line;
    for (const auto& m : models) {
        const char* name = m.model == "naive_bayes" ? "Naive Bayes" : "Logistic Regression";
        std::snprintf(line, sizeof line, "%-22s %8.2f%% %10.4f %8.4f %9.4f\n", name, 100.0 * m.metrics.accuracy,
                      m.metrics.precision, m.metrics.recall, m.metrics.f1);
        out += line;
    }
    return out;
}

}  // namespace phishguard
