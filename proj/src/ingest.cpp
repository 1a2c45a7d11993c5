#include "phishguard/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "phishguard/error.hpp"

namespace phishguard {
namespace {

std::string_view trim(std::string_view s)
{
    const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && is_space(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && is_space(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

ClassLabel label_from_json(const nlohmann::json& value, const std::string& key)
{
    int code = -1;
    if (value.is_number_integer()) {
        code = value.get<int>();
    } else if (value.is_string()) {
        const auto s = value.get<std::string>();
        if (s == "0") code = 0;
        if (s == "1") code = 1;
    }
    if (code != 0 && code != 1) {
        throw DataError("schema: label_map[\"" + key + "\"] must be 0 or 1");
    }
    return static_cast<ClassLabel>(code);
}

void append_csv_field(std::string& out, std::string_view field)
{
    const bool needs_quotes = field.find_first_of(",\"\r\n") != std::string_view::npos;
    if (!needs_quotes) {
        out.append(field);
        return;
    }
    out.push_back('"');
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
}

}  // namespace

std::optional<ClassLabel> CsvSchema::map_label(std::string_view raw) const
{
    const auto key = std::string(trim(raw));
    if (auto it = label_map.find(key); it != label_map.end()) return it->second;
    const auto folded = lower(key);
    for (const auto& [k, v] : label_map) {
        if (lower(k) == folded) return v;
    }
    return std::nullopt;
}

CsvSchema parse_schema(const nlohmann::json& doc)
{
    if (!doc.is_object()) throw DataError("schema: expected a JSON object");
    CsvSchema schema;
    try {
        schema.text_column = doc.at("text_column").get<std::string>();
        schema.label_column = doc.at("label_column").get<std::string>();
        for (const auto& [key, value] : doc.at("label_map").items()) {
            schema.label_map.emplace(std::string(trim(key)), label_from_json(value, key));
        }
        if (doc.contains("source_column")) schema.source_column = doc.at("source_column").get<std::string>();
        if (doc.contains("name")) schema.name = doc.at("name").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("schema: ") + e.what());
    }
    if (schema.text_column.empty() || schema.label_column.empty()) {
        throw DataError("schema: text_column and label_column must be non-empty");
    }
    if (schema.label_map.empty()) throw DataError("schema: label_map is empty");
    return schema;
}

CsvSchema load_schema(const std::filesystem::path& path)
{
    const auto content = read_file(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(content);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    return parse_schema(doc);
}

std::string sanitize_utf8(std::string_view bytes)
{
    static constexpr std::string_view kReplacement = "\xEF\xBF\xBD";
    std::string out;
    out.reserve(bytes.size());
    std::size_t i = 0;
    const std::size_t n = bytes.size();
    while (i < n) {
        const auto b0 = static_cast<unsigned char>(bytes[i]);
        if (b0 < 0x80) {
            out.push_back(static_cast<char>(b0));
            ++i;
            continue;
        }
        std::size_t len = 0;
        unsigned char lo = 0x80;
        unsigned char hi = 0xBF;
        if (b0 >= 0xC2 && b0 <= 0xDF) {
            len = 2;
        } else if (b0 >= 0xE0 && b0 <= 0xEF) {
            len = 3;
            if (b0 == 0xE0) lo = 0xA0;
            if (b0 == 0xED) hi = 0x9F;
        } else if (b0 >= 0xF0 && b0 <= 0xF4) {
            len = 4;
            if (b0 == 0xF0) lo = 0x90;
            if (b0 == 0xF4) hi = 0x8F;
        }
        // Maximal-subpart replacement: consume the longest valid prefix of
        // the sequence and emit one U+FFFD for it.
        std::size_t consumed = 1;
        bool ok = len != 0;
        for (std::size_t k = 1; ok && k < len; ++k) {
            if (i + k >= n) {
                ok = false;
                break;
            }
            const auto b = static_cast<unsigned char>(bytes[i + k]);
            const unsigned char min = k == 1 ? lo : 0x80;
            const unsigned char max = k == 1 ? hi : 0xBF;
            if (b < min || b > max) {
                ok = false;
                break;
            }
            ++consumed;
        }
        if (ok) {
            out.append(bytes.substr(i, len));
            i += len;
        } else {
            out.append(kReplacement);
            i += consumed;
        }
    }
    return out;
}

std::vector<std::vector<std::string>> parse_csv_rows(std::string_view content)
{
    if (content.starts_with("\xEF\xBB\xBF")) content.remove_prefix(3);

    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;

    const auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    const auto end_row = [&] {
        end_field();
        // A blank line is not a record.
        if (!(row.size() == 1 && row.front().empty())) rows.push_back(std::move(row));
        row.clear();
    };

    for (std::size_t i = 0; i < content.size(); ++i) {
        const char c = content[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            if (!field_started && field.empty()) {
                in_quotes = true;
                field_started = true;
            } else {
                field.push_back(c);  // stray quote inside an unquoted field
            }
            break;
        case ',':
            end_field();
            break;
        case '\r':
            if (i + 1 < content.size() && content[i + 1] == '\n') ++i;
            end_row();
            break;
        case '\n':
            end_row();
            break;
        default:
            field.push_back(c);
            field_started = true;
        }
    }
    if (in_quotes) throw DataError("csv: unterminated quoted field");
    if (field_started || !field.empty() || !row.empty()) end_row();
    return rows;
}

LoadResult parse_csv(std::string_view content, const CsvSchema& schema, const std::string& source,
                     const LoadOptions& options)
{
    const auto rows = parse_csv_rows(content);
    if (rows.empty()) {
        if (options.allow_empty) return {};
        throw DataError("csv: missing header row");
    }

    const auto& header = rows.front();
    const auto column = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (trim(header[i]) == name) return i;
        }
        throw DataError("csv: missing declared column '" + name + "'");
    };
    const std::size_t text_col = column(schema.text_column);
    const std::size_t label_col = column(schema.label_column);
    const std::optional<std::size_t> source_col =
        schema.source_column ? std::optional(column(*schema.source_column)) : std::nullopt;
    const std::size_t needed = std::max({text_col, label_col, source_col.value_or(0)}) + 1;

    LoadResult result;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        ++result.diagnostics.rows_read;
        if (row.size() < needed) {
            ++result.diagnostics.malformed;
            continue;
        }
        auto text = sanitize_utf8(row[text_col]);
        if (trim(text).empty()) {
            ++result.diagnostics.empty_text;
            continue;
        }
        const auto label = schema.map_label(row[label_col]);
        if (!label) {
            ++result.diagnostics.unmapped_label;
            continue;
        }
        result.records.push_back(RawEmail{
            .text = std::move(text),
            .label = *label,
            .source = source_col ? sanitize_utf8(row[*source_col]) : source,
        });
    }
    if (result.records.empty() && !options.allow_empty) {
        throw DataError("csv: zero valid rows (" + std::to_string(result.diagnostics.dropped()) + " dropped)");
    }
    return result;
}

LoadResult load_csv(const std::filesystem::path& path, const CsvSchema& schema, const std::string& source,
                    const LoadOptions& options)
{
    if (!std::filesystem::exists(path)) throw DataError("missing file " + path.string());
    try {
        return parse_csv(read_file(path), schema, source, options);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::string to_csv(std::span<const RawEmail> records)
{
    std::string out = "text,label,source\n";
    for (const auto& r : records) {
        append_csv_field(out, r.text);
        out.push_back(',');
        out.push_back(r.label == ClassLabel::Phishing ? '1' : '0');
        out.push_back(',');
        append_csv_field(out, r.source);
        out.push_back('\n');
    }
    return out;
}

void write_csv(std::span<const RawEmail> records, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    const auto content = to_csv(records);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("write failed: " + path.string());
}

CsvSchema export_schema()
{
    CsvSchema schema;
    schema.text_column = "text";
    schema.label_column = "label";
    schema.label_map = {{"0", ClassLabel::Legitimate}, {"1", ClassLabel::Phishing}};
    schema.source_column = "source";
    return schema;
}

MergeResult merge(std::vector<Corpus> corpora)
{
    std::unordered_set<std::string> seen;
    for (const auto& c : corpora) {
        if (!seen.insert(c.source).second) throw ArgumentError("merge: duplicate source identifier '" + c.source + "'");
    }

    MergeResult result;
    std::size_t total = 0;
    for (const auto& c : corpora) total += c.records.size();
    result.records.reserve(total);

    for (auto& c : corpora) {
        SourceStats s{.source = c.source, .dropped = c.dropped};
        for (auto& r : c.records) {
            (r.label == ClassLabel::Phishing ? s.phishing : s.legitimate) += 1;
            result.records.push_back(std::move(r));
        }
        result.stats.legitimate += s.legitimate;
        result.stats.phishing += s.phishing;
        result.stats.dropped += s.dropped;
        result.stats.sources.push_back(std::move(s));
    }
    return result;
}

std::size_t count_duplicate_texts(std::span<const RawEmail> records)
{
    std::unordered_set<std::string_view> seen;
    std::size_t duplicates = 0;
    for (const auto& r : records) {
        if (!seen.insert(r.text).second) ++duplicates;
    }
    return duplicates;
}

nlohmann::json to_json(const CorpusStats& stats)
{
    auto sources = nlohmann::json::array();
    for (const auto& s : stats.sources) {
        sources.push_back({{"source", s.source},
                           {"legitimate", s.legitimate},
                           {"phishing", s.phishing},
                           {"total", s.total()},
                           {"dropped", s.dropped}});
    }
    return {{"sources", sources},
            {"legitimate", stats.legitimate},
            {"phishing", stats.phishing},
            {"total", stats.total()},
            {"dropped", stats.dropped}};
}

DatasetSpec parse_dataset_spec(std::string_view arg)
{
    const auto colon = arg.rfind(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 == arg.size()) {
        throw ArgumentError("--dataset expects <csv-path>:<schema-path>, got '" + std::string(arg) + "'");
    }
    return {std::filesystem::path(arg.substr(0, colon)), std::filesystem::path(arg.substr(colon + 1))};
}

std::vector<Corpus> load_datasets(std::span<const DatasetSpec> datasets, const LoadOptions& options)
{
    std::vector<Corpus> corpora;
    corpora.reserve(datasets.size());
    for (const auto& d : datasets) {
        const auto schema = load_schema(d.schema);
        auto source = schema.name.empty() ? d.csv.stem().string() : schema.name;
        auto loaded = load_csv(d.csv, schema, source, options);
        corpora.push_back(Corpus{
            .source = std::move(source),
            .records = std::move(loaded.records),
            .dropped = loaded.diagnostics.dropped(),
        });
    }
    return corpora;
}

}  // namespace phishguard
