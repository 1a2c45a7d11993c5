#include "phishguard/preprocess.hpp"

#include <algorithm>
#include <fstream>
#include <span>
#include <sstream>

#include "phishguard/assets.hpp"
#include "phishguard/error.hpp"
#include "phishguard/hash.hpp"

namespace phishguard {
namespace {

constexpr bool is_space(char c) noexcept
{
    return c == ' ' || c == '\t' || c == '\n' || c == '\v' || c == '\f' || c == '\r';
}

constexpr bool is_alnum(char c) noexcept
{
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

constexpr char ascii_lower(char c) noexcept { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

bool iequals_at(std::string_view s, std::size_t pos, std::string_view lowered)
{
    if (pos + lowered.size() > s.size()) return false;
    for (std::size_t k = 0; k < lowered.size(); ++k) {
        if (ascii_lower(s[pos + k]) != lowered[k]) return false;
    }
    return true;
}

// <[^>]+>
std::string strip_html_tags(std::string_view s)
{
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '<') {
            out.push_back(s[i++]);
            continue;
        }
        const auto close = s.find('>', i + 1);
        if (close == std::string_view::npos) {
            out.append(s.substr(i));
            break;
        }
        if (close == i + 1) {
            out.push_back('<');
            ++i;
            continue;
        }
        out.push_back(' ');
        i = close + 1;
    }
    return out;
}

// https?://\S+
std::string strip_urls(std::string_view s)
{
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (iequals_at(s, i, "http")) {
            std::size_t j = i + 4;
            if (j < s.size() && ascii_lower(s[j]) == 's') ++j;
            if (s.compare(j, 3, "://") == 0 && j + 3 < s.size() && !is_space(s[j + 3])) {
                j += 3;
                while (j < s.size() && !is_space(s[j])) ++j;
                out.push_back(' ');
                i = j;
                continue;
            }
        }
        out.push_back(s[i++]);
    }
    return out;
}

// \S+@\S+ : the leftmost match always spans a whole non-space run, provided
// the run holds an '@' with at least one byte on each side.
std::string strip_email_addresses(std::string_view s)
{
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (is_space(s[i])) {
            out.push_back(s[i++]);
            continue;
        }
        std::size_t j = i;
        while (j < s.size() && !is_space(s[j])) ++j;
        const auto run = s.substr(i, j - i);
        const auto at = run.find('@', 1);
        if (at != std::string_view::npos && at + 1 < run.size()) {
            out.push_back(' ');
        } else {
            out.append(run);
        }
        i = j;
    }
    return out;
}

// [0-9]+
std::string strip_digit_runs(std::string_view s)
{
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] >= '0' && s[i] <= '9') {
            while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
            out.push_back(' ');
        } else {
            out.push_back(s[i++]);
        }
    }
    return out;
}

std::string replace_non_alnum(std::string_view s)
{
    std::string out(s);
    for (char& c : out) {
        if (!is_alnum(c)) c = ' ';
    }
    return out;
}

std::string collapse_whitespace(std::string_view s)
{
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

std::string lowercase(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), ascii_lower);
    return s;
}

template <typename Fn>
void for_each_line(std::string_view content, Fn&& fn)
{
    std::size_t start = 0;
    while (start < content.size()) {
        auto end = content.find('\n', start);
        if (end == std::string_view::npos) end = content.size();
        auto line = content.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) fn(line);
        start = end + 1;
    }
}

std::vector<std::string_view> split_tabs(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
        if (tab == std::string_view::npos) break;
        start = tab + 1;
    }
    return fields;
}

struct Substitution {
    std::string_view suffix;
    std::string_view replacement;
};

// WordNet morphy detachment rules, tried in this order.
constexpr Substitution kNounRules[] = {
    {"s", ""},     {"ses", "s"},   {"ves", "f"}, {"xes", "x"}, {"zes", "z"},
    {"ches", "ch"}, {"shes", "sh"}, {"men", "man"}, {"ies", "y"},
};
constexpr Substitution kVerbRules[] = {
    {"s", ""}, {"ies", "y"}, {"es", "e"}, {"es", ""}, {"ed", "e"}, {"ed", ""}, {"ing", "e"}, {"ing", ""},
};

std::string read_asset(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open preprocessing asset " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace

std::string normalize_text(std::string_view raw)
{
    auto s = strip_html_tags(raw);
    s = strip_urls(s);
    s = strip_email_addresses(s);
    s = strip_digit_runs(s);
    s = replace_non_alnum(s);
    s = collapse_whitespace(s);
    return lowercase(std::move(s));
}

std::vector<std::string> tokenize(std::string_view normalized)
{
    std::vector<std::string> tokens;
    std::size_t start = 0;
    while (start <= normalized.size()) {
        auto end = normalized.find(' ', start);
        if (end == std::string_view::npos) end = normalized.size();
        if (end > start) tokens.emplace_back(normalized.substr(start, end - start));
        start = end + 1;
    }
    return tokens;
}

StopWords StopWords::parse(std::string_view content)
{
    StopWords sw;
    for_each_line(content, [&](std::string_view line) { sw.words_.emplace(line); });
    sw.fingerprint_ = sha256_hex(content);
    return sw;
}

std::vector<std::string> StopWords::remove(std::vector<std::string> tokens) const
{
    std::erase_if(tokens, [&](const std::string& t) { return contains(t); });
    return tokens;
}

Lemmatizer Lemmatizer::parse(std::string_view index_tsv, std::string_view noun_exceptions_tsv,
                             std::string_view verb_exceptions_tsv)
{
    Lemmatizer lem;
    lem.index_.reserve(70'000);
    for_each_line(index_tsv, [&](std::string_view line) {
        const auto fields = split_tabs(line);
        if (fields.size() != 2 || fields[0].empty()) throw DataError("lemma index: malformed row '" + std::string(line) + "'");
        std::uint8_t bit = 0;
        if (fields[1] == "n") bit = static_cast<std::uint8_t>(PartOfSpeech::Noun);
        else if (fields[1] == "v") bit = static_cast<std::uint8_t>(PartOfSpeech::Verb);
        else throw DataError("lemma index: unknown part of speech '" + std::string(fields[1]) + "'");
        lem.index_[std::string(fields[0])] |= bit;
    });

    const auto load_exceptions = [](std::string_view tsv, ExceptionMap& into) {
        for_each_line(tsv, [&](std::string_view line) {
            const auto fields = split_tabs(line);
            if (fields.size() < 2 || fields[0].empty()) throw DataError("lemma exceptions: malformed row '" + std::string(line) + "'");
            auto& lemmas = into[std::string(fields[0])];
            for (std::size_t i = 1; i < fields.size(); ++i) lemmas.emplace_back(fields[i]);
        });
    };
    load_exceptions(noun_exceptions_tsv, lem.noun_exceptions_);
    load_exceptions(verb_exceptions_tsv, lem.verb_exceptions_);

    lem.fingerprint_ = sha256_hex("lemma_index.tsv:" + sha256_hex(index_tsv) + "\nlemma_exceptions_noun.tsv:"
                                  + sha256_hex(noun_exceptions_tsv) + "\nlemma_exceptions_verb.tsv:"
                                  + sha256_hex(verb_exceptions_tsv) + "\n");
    return lem;
}

const Lemmatizer::ExceptionMap& Lemmatizer::exceptions(PartOfSpeech pos) const
{
    return pos == PartOfSpeech::Noun ? noun_exceptions_ : verb_exceptions_;
}

bool Lemmatizer::in_index(const std::string& word, PartOfSpeech pos) const
{
    const auto it = index_.find(word);
    return it != index_.end() && (it->second & static_cast<std::uint8_t>(pos)) != 0;
}

std::vector<std::string> Lemmatizer::morphy(const std::string& form, PartOfSpeech pos) const
{
    std::vector<std::string> candidates{form};
    const auto& exc = exceptions(pos);
    if (const auto it = exc.find(form); it != exc.end()) {
        candidates.insert(candidates.end(), it->second.begin(), it->second.end());
    } else {
        const auto rules = pos == PartOfSpeech::Noun ? std::span<const Substitution>(kNounRules)
                                                     : std::span<const Substitution>(kVerbRules);
        for (const auto& rule : rules) {
            if (form.ends_with(rule.suffix)) {
                candidates.push_back(form.substr(0, form.size() - rule.suffix.size()) + std::string(rule.replacement));
            }
        }
    }

    std::vector<std::string> lemmas;
    for (auto& c : candidates) {
        if (in_index(c, pos) && std::find(lemmas.begin(), lemmas.end(), c) == lemmas.end()) {
            lemmas.push_back(std::move(c));
        }
    }
    return lemmas;
}

std::string Lemmatizer::lemmatize(const std::string& word, PartOfSpeech pos) const
{
    const auto lemmas = morphy(word, pos);
    if (lemmas.empty()) return word;
    return *std::min_element(lemmas.begin(), lemmas.end(),
                             [](const std::string& a, const std::string& b) { return a.size() < b.size(); });
}

std::string Lemmatizer::lemmatize_token(const std::string& word) const
{
    auto noun = lemmatize(word, PartOfSpeech::Noun);
    if (noun != word) return noun;
    return lemmatize(word, PartOfSpeech::Verb);
}

Preprocessor::Preprocessor(StopWords stopwords, Lemmatizer lemmatizer)
    : stopwords_(std::move(stopwords)),
      lemmatizer_(std::move(lemmatizer)),
      config_{kPipelineVersion, stopwords_.fingerprint(), lemmatizer_.fingerprint()}
{}

const Preprocessor& Preprocessor::bundled()
{
    static const Preprocessor instance(
        StopWords::parse(assets::stopwords_txt()),
        Lemmatizer::parse(assets::lemma_index_tsv(), assets::lemma_exceptions_noun_tsv(),
                          assets::lemma_exceptions_verb_tsv()));
    return instance;
}

Preprocessor Preprocessor::from_directory(const std::filesystem::path& dir)
{
    return Preprocessor(StopWords::parse(read_asset(dir / "stopwords.txt")),
                        Lemmatizer::parse(read_asset(dir / "lemma_index.tsv"),
                                          read_asset(dir / "lemma_exceptions_noun.tsv"),
                                          read_asset(dir / "lemma_exceptions_verb.tsv")));
}

std::vector<std::string> Preprocessor::remove_stopwords(std::vector<std::string> tokens) const
{
    return stopwords_.remove(std::move(tokens));
}

TokenSeq Preprocessor::lemmatize(std::vector<std::string> tokens) const
{
    for (auto& t : tokens) t = lemmatizer_.lemmatize_token(t);
    return tokens;
}

TokenSeq Preprocessor::operator()(std::string_view raw) const
{
    // A lemma can itself be a stop word ("hes" -> "he"); those are dropped too.
    return remove_stopwords(lemmatize(remove_stopwords(tokenize(normalize_text(raw)))));
}

std::vector<std::string> remove_stopwords(std::vector<std::string> tokens)
{
    return Preprocessor::bundled().remove_stopwords(std::move(tokens));
}

TokenSeq lemmatize(std::vector<std::string> tokens)
{
    return Preprocessor::bundled().lemmatize(std::move(tokens));
}

TokenSeq preprocess(std::string_view raw)
{
    return Preprocessor::bundled()(raw);
}

}  // namespace phishguard
