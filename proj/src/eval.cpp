#include "phishguard/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "phishguard/error.hpp"

namespace phishguard {

void SplitSpec::validate() const
{
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ArgumentError("split: train_fraction must lie in (0, 1)");
    if (!stratified) throw ArgumentError("split: only stratified splitting is supported");
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound)
{
    // Reject the top partial bucket so every residue is equally likely.
    const std::uint64_t threshold = (std::numeric_limits<std::uint64_t>::max() - bound + 1) % bound;
    while (true) {
        const std::uint64_t draw = rng();
        if (draw >= threshold) return draw % bound;
    }
}

void shuffle_indices(std::vector<std::size_t>& indices, std::mt19937_64& rng)
{
    for (std::size_t i = indices.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_below(rng, i));
        std::swap(indices[i - 1], indices[j]);
    }
}

SplitIndices stratified_split_indices(std::span<const ClassLabel> labels, const SplitSpec& spec)
{
    spec.validate();
    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[encode(labels[i])].push_back(i);
    for (const auto& members : by_class) {
        if (members.size() < 2) throw DataError("split: each class needs at least 2 records");
    }

    std::mt19937_64 rng(spec.seed);
    SplitIndices out;
    for (auto& members : by_class) {
        shuffle_indices(members, rng);
        // The epsilon absorbs representation error in products such as
        // 0.8 * 22035 so the floor lands on the exact count.
        const auto n_train = static_cast<std::size_t>(
            std::floor(spec.train_fraction * static_cast<double>(members.size()) + 1e-9));
        out.train.insert(out.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_train));
        out.test.insert(out.test.end(), members.begin() + static_cast<std::ptrdiff_t>(n_train), members.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

Split stratified_split(std::span<const RawEmail> corpus, const SplitSpec& spec)
{
    std::vector<ClassLabel> labels;
    labels.reserve(corpus.size());
    for (const auto& r : corpus) labels.push_back(r.label);
    auto idx = stratified_split_indices(labels, spec);

    const auto gather = [&](const std::vector<std::size_t>& positions) {
        std::vector<RawEmail> out;
        out.reserve(positions.size());
        for (auto p : positions) out.push_back(corpus[p]);
        return out;
    };
    auto train_records = gather(idx.train);
    auto test_records = gather(idx.test);
    return Split{TrainPartition(std::move(train_records), std::move(idx.train)),
                 TestPartition(std::move(test_records), std::move(idx.test))};
}

ConfusionMatrix confusion(std::span<const ClassLabel> y_true, std::span<const ClassLabel> y_pred)
{
    if (y_true.size() != y_pred.size()) throw ArgumentError("confusion: length mismatch");
    if (y_true.empty()) throw ArgumentError("confusion: empty inputs");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const bool actual = y_true[i] == ClassLabel::Phishing;
        const bool predicted = y_pred[i] == ClassLabel::Phishing;
        if (actual && predicted) ++cm.tp;
        else if (!actual && predicted) ++cm.fp;
        else if (!actual) ++cm.tn;
        else ++cm.fn;
    }
    return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm)
{
    if (cm.total() == 0) throw ArgumentError("metrics: empty confusion matrix");
    MetricsReport r;
    r.confusion = cm;
    const auto d = [](std::size_t v) { return static_cast<double>(v); };
    r.accuracy = d(cm.tp + cm.tn) / d(cm.total());
    if (cm.tp + cm.fp == 0) r.precision_undefined = true;
    else r.precision = d(cm.tp) / d(cm.tp + cm.fp);
    if (cm.tp + cm.fn == 0) r.recall_undefined = true;
    else r.recall = d(cm.tp) / d(cm.tp + cm.fn);
    if (r.precision + r.recall > 0.0) r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    else r.f1_undefined = true;
    return r;
}

nlohmann::json to_json(const ConfusionMatrix& cm)
{
    return {{"tp", cm.tp}, {"fp", cm.fp}, {"tn", cm.tn}, {"fn", cm.fn}};
}

}  // namespace phishguard
