#include "phishguard/vectorize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "phishguard/error.hpp"

namespace phishguard {

void SparseVector::validate() const
{
    if (indices.size() != values.size()) throw ArgumentError("sparse vector: indices/values length mismatch");
    for (std::size_t k = 0; k < indices.size(); ++k) {
        if (indices[k] >= dim) throw ArgumentError("sparse vector: index out of range");
        if (k > 0 && indices[k] <= indices[k - 1]) throw ArgumentError("sparse vector: indices not strictly increasing");
        if (!std::isfinite(values[k])) throw ArgumentError("sparse vector: non-finite value");
    }
}

std::string_view to_string(IdfMode mode) noexcept
{
    return mode == IdfMode::PaperEq1 ? "paper_eq1" : "smoothed_normalized";
}

IdfMode parse_idf_mode(std::string_view name)
{
    if (name == "paper_eq1") return IdfMode::PaperEq1;
    if (name == "smoothed_normalized") return IdfMode::SmoothedNormalized;
    throw ArgumentError("unknown idf mode '" + std::string(name) + "' (expected paper_eq1 or smoothed_normalized)");
}

void TfidfConfig::validate() const
{
    if (max_features < 1) throw ArgumentError("tfidf: max_features must be >= 1");
    if (ngram_min < 1 || ngram_max < ngram_min) throw ArgumentError("tfidf: require 1 <= ngram_min <= ngram_max");
    if (!(max_df > 0.0 && max_df <= 1.0)) throw ArgumentError("tfidf: max_df must lie in (0, 1]");
    if (min_df < 1) throw ArgumentError("tfidf: min_df must be >= 1");
}

double idf_weight(IdfMode mode, std::size_t n_docs, std::size_t df)
{
    const auto n = static_cast<double>(n_docs);
    const auto d = static_cast<double>(df);
    if (mode == IdfMode::PaperEq1) return std::log(n / (1.0 + d));
    return std::log((1.0 + n) / (1.0 + d)) + 1.0;
}

namespace {

bool df_within_bounds(const TfidfConfig& config, std::size_t n_docs, std::size_t df)
{
    return df >= config.min_df && static_cast<double>(df) <= config.max_df * static_cast<double>(n_docs);
}

}  // namespace

Vocabulary::Vocabulary(TfidfConfig config, std::size_t n_docs, std::vector<std::string> terms,
                       std::vector<std::size_t> df, std::vector<double> idf)
    : config_(config), n_docs_(n_docs), terms_(std::move(terms)), df_(std::move(df)), idf_(std::move(idf))
{
    try {
        config_.validate();
    } catch (const ArgumentError& e) {
        throw FormatError(std::string("vocabulary: ") + e.what());
    }
    if (n_docs_ == 0) throw FormatError("vocabulary: n_docs must be positive");
    if (terms_.size() != df_.size() || terms_.size() != idf_.size()) {
        throw FormatError("vocabulary: terms/df/idf length mismatch");
    }
    if (terms_.size() > config_.max_features) throw FormatError("vocabulary: more terms than max_features");
    lookup_.reserve(terms_.size());
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (i > 0 && !(terms_[i - 1] < terms_[i])) throw FormatError("vocabulary: terms not in strict lexicographic order");
        if (!df_within_bounds(config_, n_docs_, df_[i])) throw FormatError("vocabulary: df out of bounds for '" + terms_[i] + "'");
        const double expected = idf_weight(config_.idf_mode, n_docs_, df_[i]);
        if (!std::isfinite(idf_[i]) || std::abs(idf_[i] - expected) > 1e-12 * std::max(1.0, std::abs(expected))) {
            throw FormatError("vocabulary: idf inconsistent with df for '" + terms_[i] + "'");
        }
        lookup_.emplace(terms_[i], static_cast<std::uint32_t>(i));
    }
}

std::optional<std::uint32_t> Vocabulary::index_of(const std::string& term) const
{
    const auto it = lookup_.find(term);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

nlohmann::json Vocabulary::to_json() const
{
    return {
        {"config",
         {{"max_features", config_.max_features},
          {"ngram_min", config_.ngram_min},
          {"ngram_max", config_.ngram_max},
          {"min_df", config_.min_df},
          {"max_df", config_.max_df},
          {"idf_mode", to_string(config_.idf_mode)}}},
        {"n_docs", n_docs_},
        {"terms", terms_},
        {"df", df_},
        {"idf", idf_},
    };
}

Vocabulary Vocabulary::from_json(const nlohmann::json& doc)
{
    try {
        const auto& c = doc.at("config");
        TfidfConfig config{
            .max_features = c.at("max_features").get<std::size_t>(),
            .ngram_min = c.at("ngram_min").get<int>(),
            .ngram_max = c.at("ngram_max").get<int>(),
            .min_df = c.at("min_df").get<std::size_t>(),
            .max_df = c.at("max_df").get<double>(),
            .idf_mode = parse_idf_mode(c.at("idf_mode").get<std::string>()),
        };
        return Vocabulary(config, doc.at("n_docs").get<std::size_t>(), doc.at("terms").get<std::vector<std::string>>(),
                          doc.at("df").get<std::vector<std::size_t>>(), doc.at("idf").get<std::vector<double>>());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("vocabulary: ") + e.what());
    } catch (const ArgumentError& e) {
        throw FormatError(std::string("vocabulary: ") + e.what());
    }
}

std::vector<std::string> extract_ngrams(const TokenSeq& tokens, const TfidfConfig& config)
{
    std::vector<std::string> grams;
    for (int n = config.ngram_min; n <= config.ngram_max; ++n) {
        const auto width = static_cast<std::size_t>(n);
        if (tokens.size() < width) break;
        for (std::size_t start = 0; start + width <= tokens.size(); ++start) {
            std::string gram = tokens[start];
            for (std::size_t k = 1; k < width; ++k) {
                gram.push_back(' ');
                gram.append(tokens[start + k]);
            }
            grams.push_back(std::move(gram));
        }
    }
    return grams;
}

Vocabulary fit_vocabulary(std::span<const TokenSeq> corpus, const TfidfConfig& config)
{
    config.validate();
    if (corpus.empty()) throw TrainingError("tfidf fit: empty corpus");

    // Intern every candidate n-gram; df and total frequency are order
    // independent, so corpus order cannot affect the result.
    std::unordered_map<std::string, std::uint32_t> ids;
    std::vector<std::string> names;
    std::vector<std::size_t> df;
    std::vector<std::uint64_t> total;
    std::vector<std::uint32_t> doc_ids;

    for (const auto& doc : corpus) {
        doc_ids.clear();
        for (auto& gram : extract_ngrams(doc, config)) {
            auto [it, inserted] = ids.try_emplace(gram, static_cast<std::uint32_t>(names.size()));
            if (inserted) {
                names.push_back(std::move(gram));
                df.push_back(0);
                total.push_back(0);
            }
            ++total[it->second];
            doc_ids.push_back(it->second);
        }
        std::sort(doc_ids.begin(), doc_ids.end());
        doc_ids.erase(std::unique(doc_ids.begin(), doc_ids.end()), doc_ids.end());
        for (auto id : doc_ids) ++df[id];
    }

    const std::size_t n_docs = corpus.size();
    std::vector<std::uint32_t> kept;
    for (std::uint32_t id = 0; id < names.size(); ++id) {
        if (df_within_bounds(config, n_docs, df[id])) kept.push_back(id);
    }
    if (kept.empty()) throw TrainingError("tfidf fit: no term survives the min_df/max_df filters");

    if (kept.size() > config.max_features) {
        std::sort(kept.begin(), kept.end(), [&](std::uint32_t a, std::uint32_t b) {
            if (total[a] != total[b]) return total[a] > total[b];
            return names[a] < names[b];
        });
        kept.resize(config.max_features);
    }
    std::sort(kept.begin(), kept.end(), [&](std::uint32_t a, std::uint32_t b) { return names[a] < names[b]; });

    std::vector<std::string> terms;
    std::vector<std::size_t> term_df;
    std::vector<double> idf;
    terms.reserve(kept.size());
    term_df.reserve(kept.size());
    idf.reserve(kept.size());
    for (auto id : kept) {
        terms.push_back(std::move(names[id]));
        term_df.push_back(df[id]);
        idf.push_back(idf_weight(config.idf_mode, n_docs, df[id]));
    }
    return Vocabulary(config, n_docs, std::move(terms), std::move(term_df), std::move(idf));
}

SparseVector transform(const TokenSeq& tokens, const Vocabulary& vocab)
{
    SparseVector out;
    out.dim = vocab.size();

    std::vector<std::uint32_t> hits;
    for (const auto& gram : extract_ngrams(tokens, vocab.config())) {
        if (auto idx = vocab.index_of(gram)) hits.push_back(*idx);
    }
    std::sort(hits.begin(), hits.end());

    const auto& idf = vocab.idf();
    for (std::size_t k = 0; k < hits.size();) {
        std::size_t run = k;
        while (run < hits.size() && hits[run] == hits[k]) ++run;
        const double value = static_cast<double>(run - k) * idf[hits[k]];
        if (value != 0.0) {
            out.indices.push_back(hits[k]);
            out.values.push_back(value);
        }
        k = run;
    }

    if (vocab.config().idf_mode == IdfMode::SmoothedNormalized && !out.values.empty()) {
        double sq = 0.0;
        for (double v : out.values) sq += v * v;
        const double norm = std::sqrt(sq);
        for (double& v : out.values) v /= norm;
    }
    return out;
}

double sparsity(std::span<const SparseVector> matrix, std::size_t dim)
{
    if (matrix.empty()) throw ArgumentError("sparsity: zero rows");
    if (dim == 0) throw ArgumentError("sparsity: dim must be positive");
    std::size_t stored = 0;
    for (const auto& row : matrix) stored += row.nnz();
    return 1.0 - static_cast<double>(stored) / (static_cast<double>(matrix.size()) * static_cast<double>(dim));
}

}  // namespace phishguard
