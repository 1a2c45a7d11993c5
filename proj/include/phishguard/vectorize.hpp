#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "phishguard/preprocess.hpp"
#include "phishguard/sparse.hpp"

namespace phishguard {

enum class IdfMode : std::uint8_t {
    /// idf = ln(|D| / (1 + df)); may be zero or negative for common terms.
    PaperEq1,
    /// idf = ln((1 + |D|) / (1 + df)) + 1, rows scaled to unit L2 norm.
    SmoothedNormalized,
};

std::string_view to_string(IdfMode mode) noexcept;
IdfMode parse_idf_mode(std::string_view name);

struct TfidfConfig {
    std::size_t max_features = 5000;
    int ngram_min = 1;
    int ngram_max = 2;
    std::size_t min_df = 2;
    double max_df = 0.95;  // fraction of training documents
    IdfMode idf_mode = IdfMode::SmoothedNormalized;

    void validate() const;

    friend bool operator==(const TfidfConfig&, const TfidfConfig&) = default;
};

/// idf for one term under `mode`.
double idf_weight(IdfMode mode, std::size_t n_docs, std::size_t df);

/// Fitted vectorizer state. Terms are stored in index order, which is
/// lexicographic.
class Vocabulary {
public:
    Vocabulary() = default;

    /// Checks every invariant: sorted unique terms, df bounds, size bound,
    /// idf consistent with the mode. Throws FormatError on violation.
    Vocabulary(TfidfConfig config, std::size_t n_docs, std::vector<std::string> terms, std::vector<std::size_t> df,
               std::vector<double> idf);

    std::size_t size() const noexcept { return terms_.size(); }
    std::size_t n_docs() const noexcept { return n_docs_; }
    const TfidfConfig& config() const noexcept { return config_; }
    const std::vector<std::string>& terms() const noexcept { return terms_; }
    const std::vector<std::size_t>& df() const noexcept { return df_; }
    const std::vector<double>& idf() const noexcept { return idf_; }

    std::optional<std::uint32_t> index_of(const std::string& term) const;

    nlohmann::json to_json() const;
    static Vocabulary from_json(const nlohmann::json& doc);

    friend bool operator==(const Vocabulary& a, const Vocabulary& b)
    {
        return a.config_ == b.config_ && a.n_docs_ == b.n_docs_ && a.terms_ == b.terms_ && a.df_ == b.df_
            && a.idf_ == b.idf_;
    }

private:
    TfidfConfig config_;
    std::size_t n_docs_ = 0;
    std::vector<std::string> terms_;
    std::vector<std::size_t> df_;
    std::vector<double> idf_;
    std::unordered_map<std::string, std::uint32_t> lookup_;
};

/// Every contiguous n-token window for n in [ngram_min, ngram_max], joined
/// by single spaces: all n=ngram_min windows in token order, then the next n.
std::vector<std::string> extract_ngrams(const TokenSeq& tokens, const TfidfConfig& config);

/// df filtering (min_df <= df, df <= max_df * |D|), then truncation to the
/// max_features terms with the highest total corpus frequency (ties:
/// lexicographically smaller term wins), then lexicographic indexing.
/// Throws TrainingError for an empty corpus or when no term survives.
Vocabulary fit_vocabulary(std::span<const TokenSeq> corpus, const TfidfConfig& config);

/// Raw in-document n-gram count times idf; unit-normalized in
/// SmoothedNormalized mode. Out-of-vocabulary n-grams are ignored.
SparseVector transform(const TokenSeq& tokens, const Vocabulary& vocab);

/// 1 - stored entries / (rows * dim). Throws ArgumentError on zero rows or dim.
double sparsity(std::span<const SparseVector> matrix, std::size_t dim);

}  // namespace phishguard
