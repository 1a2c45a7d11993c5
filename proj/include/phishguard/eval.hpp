#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "phishguard/ingest.hpp"
#include "phishguard/label.hpp"

namespace phishguard {

struct SplitSpec {
    double train_fraction = 0.8;
    std::uint64_t seed = 42;
    bool stratified = true;

    void validate() const;
};

/// Uniform draw in [0, bound) from a 64-bit Mersenne Twister using rejection
/// sampling, so the sequence is identical on every conforming platform.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

/// Fisher-Yates: for i from n-1 down to 1, swap i with uniform_below(i + 1).
void shuffle_indices(std::vector<std::size_t>& indices, std::mt19937_64& rng);

struct SplitIndices {
    std::vector<std::size_t> train;  // ascending corpus positions
    std::vector<std::size_t> test;
};

/// Per class, in ascending class encoding: shuffle that class's positions
/// with the shared generator, then the first floor(fraction * N_c) go to
/// train. Throws DataError when a class has fewer than 2 members.
SplitIndices stratified_split_indices(std::span<const ClassLabel> labels, const SplitSpec& spec);

/// Training side of a split. Only this type can be fed to vectorizer
/// fitting; the test side has no such path.
class TrainPartition {
public:
    TrainPartition(std::vector<RawEmail> records, std::vector<std::size_t> indices)
        : records_(std::move(records)), indices_(std::move(indices))
    {}
    const std::vector<RawEmail>& records() const noexcept { return records_; }
    const std::vector<std::size_t>& indices() const noexcept { return indices_; }

private:
    std::vector<RawEmail> records_;
    std::vector<std::size_t> indices_;
};

class TestPartition {
public:
    TestPartition(std::vector<RawEmail> records, std::vector<std::size_t> indices)
        : records_(std::move(records)), indices_(std::move(indices))
    {}
    const std::vector<RawEmail>& records() const noexcept { return records_; }
    const std::vector<std::size_t>& indices() const noexcept { return indices_; }

private:
    std::vector<RawEmail> records_;
    std::vector<std::size_t> indices_;
};

struct Split {
    TrainPartition train;
    TestPartition test;
};

Split stratified_split(std::span<const RawEmail> corpus, const SplitSpec& spec);

/// Phishing is the positive class.
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const noexcept { return tp + fp + tn + fn; }
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion(std::span<const ClassLabel> y_true, std::span<const ClassLabel> y_pred);

struct MetricsReport {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    // Set when the corresponding denominator was zero; the value is then 0.
    bool precision_undefined = false;
    bool recall_undefined = false;
    bool f1_undefined = false;
    ConfusionMatrix confusion;
};

/// Throws ArgumentError on an empty matrix.
MetricsReport metrics(const ConfusionMatrix& cm);

nlohmann::json to_json(const ConfusionMatrix& cm);

}  // namespace phishguard
