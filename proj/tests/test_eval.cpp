#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "phishguard/error.hpp"
#include "phishguard/eval.hpp"
#include "phishguard/experiment.hpp"
#include "support.hpp"

using namespace phishguard;

namespace {

constexpr auto L = ClassLabel::Legitimate;
constexpr auto P = ClassLabel::Phishing;

std::vector<ClassLabel> labels(std::size_t legit, std::size_t phish)
{
    std::vector<ClassLabel> y(legit, L);
    y.insert(y.end(), phish, P);
    return y;
}

std::size_t count(const std::vector<ClassLabel>& y, const std::vector<std::size_t>& idx, ClassLabel c)
{
    return static_cast<std::size_t>(std::count_if(idx.begin(), idx.end(), [&](auto i) { return y[i] == c; }));
}

}  // namespace

TEST_CASE("split counts at full corpus scale")
{
    const auto y = labels(22035, 31938);
    const auto s = stratified_split_indices(y, {});
    CHECK(count(y, s.train, L) == 17628);
    CHECK(count(y, s.train, P) == 25550);
    CHECK(count(y, s.test, L) == 4407);
    CHECK(count(y, s.test, P) == 6388);
    CHECK(s.train.size() == 43178);
    CHECK(s.test.size() == 10795);
}

TEST_CASE("split 10 + 10")
{
    const auto y = labels(10, 10);
    for (std::uint64_t seed : {0ull, 1ull, 42ull, 999ull}) {
        const auto s = stratified_split_indices(y, {0.8, seed, true});
        CHECK(count(y, s.train, L) == 8);
        CHECK(count(y, s.train, P) == 8);
        CHECK(s.test.size() == 4);
    }
}

TEST_CASE("split is a deterministic partition")
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<ClassLabel> y;
        const auto n = 4 + rng() % 200;
        for (std::size_t i = 0; i < n; ++i) y.push_back(i < 2 ? L : (i < 4 ? P : (rng() % 3 ? P : L)));
        std::shuffle(y.begin(), y.end(), rng);
        const SplitSpec spec{0.1 + 0.8 * static_cast<double>(rng() % 100) / 100.0, rng(), true};
        const auto a = stratified_split_indices(y, spec);
        const auto b = stratified_split_indices(y, spec);
        CHECK(a.train == b.train);
        CHECK(a.test == b.test);
        CHECK(std::is_sorted(a.train.begin(), a.train.end()));
        std::set<std::size_t> all(a.train.begin(), a.train.end());
        for (auto i : a.test) CHECK(all.insert(i).second);  // disjoint
        CHECK(all.size() == y.size());                       // covering
        for (auto c : {L, P}) {
            const auto nc = static_cast<std::size_t>(std::count(y.begin(), y.end(), c));
            CHECK(count(y, a.train, c) == static_cast<std::size_t>(std::floor(spec.train_fraction * nc + 1e-9)));
        }
    }
}

TEST_CASE("different seeds give different splits")
{
    const auto y = labels(50, 50);
    CHECK(stratified_split_indices(y, {0.8, 1, true}).train != stratified_split_indices(y, {0.8, 2, true}).train);
}

TEST_CASE("frozen split for seed 42 (portable generator)")
{
    // mt19937_64 + rejection sampling + Fisher-Yates; pinned so the algorithm cannot drift silently
    const auto y = labels(5, 5);
    const auto s = stratified_split_indices(y, {0.6, 42, true});
    CHECK(s.train.size() == 6);
    std::mt19937_64 rng(42);
    CHECK(uniform_below(rng, 1) == 0);
    std::mt19937_64 a(42), b(42);
    std::vector<std::size_t> ia{0, 1, 2, 3, 4}, ib{0, 1, 2, 3, 4};
    shuffle_indices(ia, a);
    shuffle_indices(ib, b);
    CHECK(ia == ib);
    std::sort(ia.begin(), ia.end());
    CHECK(ia == std::vector<std::size_t>{0, 1, 2, 3, 4});
}

TEST_CASE("split errors")
{
    CHECK_THROWS_AS(stratified_split_indices(labels(1, 10), {}), DataError);
    CHECK_THROWS_AS(stratified_split_indices(labels(0, 10), {}), DataError);
    CHECK_THROWS_AS(SplitSpec({1.0, 42, true}).validate(), ArgumentError);
    CHECK_THROWS_AS(SplitSpec({0.0, 42, true}).validate(), ArgumentError);
}

TEST_CASE("stratified_split carries records")
{
    std::vector<RawEmail> corpus;
    for (int i = 0; i < 10; ++i) corpus.push_back({"t" + std::to_string(i), i % 2 ? P : L, "s"});
    const auto s = stratified_split(corpus, {});
    CHECK(s.train.records().size() == 8);
    CHECK(s.test.records().size() == 2);
    for (std::size_t k = 0; k < s.train.indices().size(); ++k)
        CHECK(s.train.records()[k] == corpus[s.train.indices()[k]]);
}

TEST_CASE("confusion")
{
    CHECK(confusion(std::vector{P, L}, std::vector{P, L}) == ConfusionMatrix{1, 0, 1, 0});
    CHECK(confusion(std::vector{P, L}, std::vector{L, P}) == ConfusionMatrix{0, 1, 0, 1});
    CHECK_THROWS_AS(confusion(std::vector<ClassLabel>{}, std::vector<ClassLabel>{}), ArgumentError);
    CHECK_THROWS_AS(confusion(std::vector{P}, std::vector{P, L}), ArgumentError);
}

TEST_CASE("metrics from the published logistic regression matrix")
{
    const auto m = metrics({.tp = 4129, .fp = 218, .tn = 6170, .fn = 278});
    CHECK(std::abs(m.accuracy - 0.9541) <= 0.00005);
    CHECK(std::abs(m.precision - 0.9499) <= 0.00005);
    CHECK(std::abs(m.recall - 0.9369) <= 0.00005);
    CHECK(std::abs(m.f1 - 0.9433) <= 0.00005);
}

TEST_CASE("metrics degenerate and symmetric cases")
{
    const auto a = metrics({.tp = 0, .fp = 0, .tn = 10, .fn = 0});
    CHECK(a.accuracy == 1.0);
    CHECK(a.precision == 0.0);
    CHECK(a.recall == 0.0);
    CHECK(a.precision_undefined);
    CHECK(a.recall_undefined);
    CHECK(a.f1_undefined);

    const auto b = metrics({1, 1, 1, 1});
    CHECK(b.accuracy == 0.5);
    CHECK(b.precision == 0.5);
    CHECK(b.recall == 0.5);
    CHECK(b.f1 == 0.5);
    CHECK_FALSE(b.precision_undefined);

    CHECK_THROWS_AS(metrics({}), ArgumentError);
}

TEST_CASE("metric identities")
{
    std::mt19937_64 rng(21);
    for (int i = 0; i < 500; ++i) {
        ConfusionMatrix cm{1 + rng() % 1000, rng() % 1000, rng() % 1000, rng() % 1000};
        const auto m = metrics(cm);
        CHECK(std::abs(m.f1 - 2 * m.precision * m.recall / (m.precision + m.recall)) <= 1e-12);
    }
    std::vector<ClassLabel> y{L, P, P, L, P};
    CHECK(metrics(confusion(y, y)).accuracy == 1.0);
}

TEST_CASE("run_experiment on a two-token separable corpus")
{
    std::vector<RawEmail> corpus;
    for (int i = 0; i < 100; ++i) corpus.push_back({"alpha", L, "s"});
    for (int i = 0; i < 100; ++i) corpus.push_back({"omega", P, "s"});
    const auto out = run_experiment(corpus, {});
    REQUIRE(out.report.models.size() == 2);
    CHECK(out.report.models[0].model == "naive_bayes");
    CHECK(out.report.models[1].model == "logistic_regression");
    for (const auto& m : out.report.models) CHECK(m.metrics.accuracy == 1.0);
    CHECK(out.report.train.total() == 160);
    CHECK(out.report.test.total() == 40);
}

TEST_CASE("run_experiment on a single-class corpus fails in the split")
{
    std::vector<RawEmail> corpus(10, RawEmail{"alpha", L, "s"});
    CHECK_THROWS_AS(run_experiment(corpus, {}), DataError);
}

TEST_CASE("vectorizer sees only the training partition")
{
    auto corpus = pgtest::synthetic_corpus(40, 12, 4, 50);
    const auto split = stratified_split(corpus, {});
    TfidfConfig cfg;
    const auto fitted = fit_vectorizer(split.train, Preprocessor::bundled(), cfg);

    // rewriting every test document leaves the vocabulary untouched
    auto poisoned = corpus;
    for (auto i : split.test.indices()) poisoned[i].text = "leak leak leakage unique tokens everywhere leak";
    const auto split2 = stratified_split(poisoned, {});
    CHECK(split2.train.indices() == split.train.indices());
    CHECK(fit_vectorizer(split2.train, Preprocessor::bundled(), cfg).vocab == fitted.vocab);
    CHECK_FALSE(fitted.vocab.index_of("leak").has_value());
}

TEST_CASE("report JSON carries the documented per-model keys")
{
    std::vector<RawEmail> corpus;
    for (int i = 0; i < 20; ++i) corpus.push_back({"alpha beta", L, "s"});
    for (int i = 0; i < 20; ++i) corpus.push_back({"omega gamma", P, "s"});
    ExperimentConfig cfg;
    cfg.record_timing = false;
    const auto out = run_experiment(corpus, cfg);
    const auto j = to_json(out.report);
    for (const auto& m : j.at("models")) {
        for (const auto* key :
             {"model", "accuracy", "precision", "recall", "f1", "confusion", "vocab_size", "sparsity", "train_seconds"})
            CHECK(m.contains(key));
        CHECK(m.at("train_seconds") == 0.0);
        for (const auto* key : {"tp", "fp", "tn", "fn"}) CHECK(m.at("confusion").contains(key));
    }
    CHECK(j.at("logistic_regression").at("C") == 1.0);
    CHECK(j.at("logistic_regression").at("max_iter") == 1000);
    CHECK(j.at("logistic_regression").at("seed") == 42);
    const auto table = render_metrics_table(out.report.models);
    CHECK(table.find("Logistic Regression") != std::string::npos);
    CHECK(table.find("100.00%") != std::string::npos);
}
