#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "phishguard/eval.hpp"
#include "phishguard/models.hpp"
#include "phishguard/preprocess.hpp"
#include "phishguard/vectorize.hpp"

namespace phishguard {

struct ExperimentConfig {
    SplitSpec split;
    TfidfConfig tfidf;
    double nb_alpha = 1.0;
    LogisticConfig lr;
    std::size_t top_k = 10;
    /// When false, train_seconds is reported as 0 so reports are byte-stable.
    bool record_timing = true;
};

struct FittedVectorizer {
    Vocabulary vocab;
    std::vector<SparseVector> train_matrix;
};

/// Preprocesses the training partition and fits the vocabulary on it alone.
/// There is deliberately no overload taking a TestPartition.
FittedVectorizer fit_vectorizer(const TrainPartition& train, const Preprocessor& pre, const TfidfConfig& config);

/// Preprocess + transform, parallel over documents; row order follows input.
std::vector<SparseVector> transform_records(std::span<const RawEmail> records, const Preprocessor& pre,
                                            const Vocabulary& vocab);

std::vector<ClassLabel> labels_of(std::span<const RawEmail> records);

struct ModelResult {
    std::string model;  // "naive_bayes" | "logistic_regression"
    MetricsReport metrics;
    double train_seconds = 0.0;
};

struct ClassCounts {
    std::size_t legitimate = 0;
    std::size_t phishing = 0;
    std::size_t total() const noexcept { return legitimate + phishing; }
};

struct ExperimentReport {
    std::vector<ModelResult> models;
    std::size_t vocab_size = 0;
    double sparsity = 0.0;  // of the training feature matrix
    ClassCounts train;
    ClassCounts test;
    SplitSpec split;
    TfidfConfig tfidf;
    LogisticConfig lr_config;
    bool lr_converged = false;
    int lr_iterations = 0;
    FeatureRanking top_features;
};

struct ExperimentOutcome {
    ExperimentReport report;
    Vocabulary vocab;
    NaiveBayesModel nb;
    LogisticModel lr;
};

/// Split, fit the vectorizer on train only, transform both partitions, train
/// both classifiers (concurrently) and score them on the test partition.
ExperimentOutcome run_experiment(std::span<const RawEmail> corpus, const ExperimentConfig& config,
                                 const Preprocessor& pre = Preprocessor::bundled());

/// One record per model in the documented report schema.
nlohmann::json to_json(const ModelResult& result, std::size_t vocab_size, double sparsity);
nlohmann::json to_json(const ExperimentReport& report);
nlohmann::json to_json(const MetricsReport& metrics);

/// Accuracy as a percentage, the other columns to four decimals.
std::string render_metrics_table(std::span<const ModelResult> models);

}  // namespace phishguard
