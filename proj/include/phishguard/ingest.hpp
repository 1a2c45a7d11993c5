#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "phishguard/label.hpp"

namespace phishguard {

/// One labeled email body, the ingestion unit.
struct RawEmail {
    std::string text;
    ClassLabel label = ClassLabel::Legitimate;
    std::string source;

    friend bool operator==(const RawEmail&, const RawEmail&) = default;
};

/// Column mapping for one dataset file. Label values are matched after
/// trimming surrounding whitespace; an exact match wins over a
/// case-insensitive one.
struct CsvSchema {
    std::string name;  // optional source identifier; empty means "use the file stem"
    std::string text_column;
    std::string label_column;
    std::map<std::string, ClassLabel> label_map;
    std::optional<std::string> source_column;

    std::optional<ClassLabel> map_label(std::string_view raw) const;
};

CsvSchema parse_schema(const nlohmann::json& doc);
CsvSchema load_schema(const std::filesystem::path& path);

struct LoadDiagnostics {
    std::size_t rows_read = 0;
    std::size_t empty_text = 0;
    std::size_t unmapped_label = 0;
    std::size_t malformed = 0;  // rows too short to contain both declared columns

    std::size_t dropped() const noexcept { return empty_text + unmapped_label + malformed; }
};

struct LoadOptions {
    /// When false, a file with zero valid rows is a DataError.
    bool allow_empty = false;
};

struct LoadResult {
    std::vector<RawEmail> records;
    LoadDiagnostics diagnostics;
};

/// Replaces every invalid UTF-8 sequence with U+FFFD.
std::string sanitize_utf8(std::string_view bytes);

/// RFC-4180 record splitter: quoted fields may contain separators, CR/LF and
/// doubled quotes. Accepts LF or CRLF line endings and a leading BOM.
std::vector<std::vector<std::string>> parse_csv_rows(std::string_view content);

LoadResult parse_csv(std::string_view content, const CsvSchema& schema, const std::string& source,
                     const LoadOptions& options = {});

/// Records come back in file order.
LoadResult load_csv(const std::filesystem::path& path, const CsvSchema& schema, const std::string& source,
                    const LoadOptions& options = {});

/// Writes `text,label,source` with RFC-4180 quoting; labels as 0/1.
std::string to_csv(std::span<const RawEmail> records);
void write_csv(std::span<const RawEmail> records, const std::filesystem::path& path);

/// Schema matching the `to_csv` export layout.
CsvSchema export_schema();

struct Corpus {
    std::string source;
    std::vector<RawEmail> records;
    std::size_t dropped = 0;
};

struct SourceStats {
    std::string source;
    std::size_t legitimate = 0;
    std::size_t phishing = 0;
    std::size_t dropped = 0;

    std::size_t total() const noexcept { return legitimate + phishing; }
};

struct CorpusStats {
    std::vector<SourceStats> sources;
    std::size_t legitimate = 0;
    std::size_t phishing = 0;
    std::size_t dropped = 0;

    std::size_t total() const noexcept { return legitimate + phishing; }
};

struct MergeResult {
    std::vector<RawEmail> records;
    CorpusStats stats;
};

/// Concatenates corpora in argument order without deduplication.
/// Throws ArgumentError on duplicate source identifiers.
MergeResult merge(std::vector<Corpus> corpora);

/// Number of records whose text exactly repeats an earlier record's text.
/// Diagnostic only; merge never removes them.
std::size_t count_duplicate_texts(std::span<const RawEmail> records);

nlohmann::json to_json(const CorpusStats& stats);

/// A `--dataset <csv>:<schema>` argument.
struct DatasetSpec {
    std::filesystem::path csv;
    std::filesystem::path schema;
};

/// Splits on the last ':'; throws ArgumentError when either side is empty.
DatasetSpec parse_dataset_spec(std::string_view arg);

/// Loads every dataset, tagging records with the schema name or the CSV stem.
std::vector<Corpus> load_datasets(std::span<const DatasetSpec> datasets, const LoadOptions& options = {});

}  // namespace phishguard
