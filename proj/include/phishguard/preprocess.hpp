#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace phishguard {

/// Ordered lowercase lemmatized tokens.
using TokenSeq = std::vector<std::string>;

inline constexpr int kPipelineVersion = 1;

/// Applies, in order: HTML tag removal (`<[^>]+>`), http/https URL removal
/// (`https?://\S+`, scheme matched case-insensitively), email-address removal
/// (`\S+@\S+`), digit-run removal, replacement of every byte outside
/// [A-Za-z0-9] with a space, whitespace collapsing with trim, lowercasing.
/// Each match is replaced by a single space. `\S` is "not ASCII whitespace".
std::string normalize_text(std::string_view raw);

/// Splits normalized text on spaces; never yields empty tokens.
std::vector<std::string> tokenize(std::string_view normalized);

class StopWords {
public:
    /// One word per line, LF separated. Blank lines are ignored.
    static StopWords parse(std::string_view content);

    bool contains(const std::string& word) const { return words_.contains(word); }
    std::size_t size() const noexcept { return words_.size(); }
    const std::string& fingerprint() const noexcept { return fingerprint_; }

    std::vector<std::string> remove(std::vector<std::string> tokens) const;

private:
    std::unordered_set<std::string> words_;
    std::string fingerprint_;
};

enum class PartOfSpeech : std::uint8_t { Noun = 1, Verb = 2 };

/// WordNet morphy lookup driven by a lemma index and per-POS exception lists.
class Lemmatizer {
public:
    /// `index_tsv` rows are `word<TAB>n|v`; exception rows are
    /// `inflected<TAB>lemma[<TAB>lemma...]`.
    static Lemmatizer parse(std::string_view index_tsv, std::string_view noun_exceptions_tsv,
                            std::string_view verb_exceptions_tsv);

    /// All lemmas for `form` under `pos`, in discovery order, deduplicated.
    /// An exception-list hit replaces suffix detachment; either way the form
    /// itself is checked first.
    std::vector<std::string> morphy(const std::string& form, PartOfSpeech pos) const;

    /// Shortest lemma (first one on ties), or `word` unchanged when WordNet
    /// does not know it.
    std::string lemmatize(const std::string& word, PartOfSpeech pos) const;

    /// Noun pass, then a verb pass over tokens the noun pass left unchanged.
    std::string lemmatize_token(const std::string& word) const;

    bool in_index(const std::string& word, PartOfSpeech pos) const;
    const std::string& fingerprint() const noexcept { return fingerprint_; }

private:
    using ExceptionMap = std::unordered_map<std::string, std::vector<std::string>>;
    const ExceptionMap& exceptions(PartOfSpeech pos) const;

    std::unordered_map<std::string, std::uint8_t> index_;  // word -> PartOfSpeech bitmask
    ExceptionMap noun_exceptions_;
    ExceptionMap verb_exceptions_;
    std::string fingerprint_;
};

/// Binds a trained model to the exact assets that produced its features.
struct PreprocessConfig {
    int pipeline_version = kPipelineVersion;
    std::string stopwords_sha256;
    std::string lemmatizer_sha256;

    friend bool operator==(const PreprocessConfig&, const PreprocessConfig&) = default;
};

class Preprocessor {
public:
    Preprocessor(StopWords stopwords, Lemmatizer lemmatizer);

    /// Built from the assets compiled into the library. Constructed once,
    /// immutable afterwards.
    static const Preprocessor& bundled();

    /// Reads stopwords.txt, lemma_index.tsv, lemma_exceptions_noun.tsv and
    /// lemma_exceptions_verb.tsv from `dir`.
    static Preprocessor from_directory(const std::filesystem::path& dir);

    std::vector<std::string> remove_stopwords(std::vector<std::string> tokens) const;
    TokenSeq lemmatize(std::vector<std::string> tokens) const;

    /// normalize_text -> tokenize -> remove_stopwords -> lemmatize.
    TokenSeq operator()(std::string_view raw) const;

    const PreprocessConfig& config() const noexcept { return config_; }
    const StopWords& stopwords() const noexcept { return stopwords_; }
    const Lemmatizer& lemmatizer() const noexcept { return lemmatizer_; }

private:
    StopWords stopwords_;
    Lemmatizer lemmatizer_;
    PreprocessConfig config_;
};

/// Free-function forms over the bundled assets.
std::vector<std::string> remove_stopwords(std::vector<std::string> tokens);
TokenSeq lemmatize(std::vector<std::string> tokens);
TokenSeq preprocess(std::string_view raw);

}  // namespace phishguard
