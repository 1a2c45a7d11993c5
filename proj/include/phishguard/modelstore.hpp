#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "phishguard/models.hpp"
#include "phishguard/preprocess.hpp"
#include "phishguard/vectorize.hpp"

namespace phishguard {

inline constexpr int kBundleFormatVersion = 1;

/// The deployable unit: pipeline fingerprint, vocabulary and classifier.
struct ModelBundle {
    int format_version = kBundleFormatVersion;
    PreprocessConfig preprocess;
    Vocabulary vocab;
    TrainedModel model;
    std::string created_at;  // UTC, ISO-8601 with trailing Z
    /// Test-set metrics from the training run; serialized under
    /// model.training_metrics when present.
    std::optional<nlohmann::json> training_metrics;
};

/// Formats a Unix timestamp as YYYY-MM-DDTHH:MM:SSZ.
std::string format_utc(long long unix_seconds);
std::string utc_now();

/// Everything but content_hash, as a JSON object.
nlohmann::json bundle_body(const ModelBundle& bundle);

/// "sha256:<hex>" over the compact dump of bundle_body.
std::string content_hash(const ModelBundle& bundle);

/// Compact JSON with sorted keys and shortest round-trip floats.
/// Throws ArgumentError when the model dimension differs from the vocabulary.
std::string serialize(const ModelBundle& bundle);

/// Parses and validates: version, hash, and every contained invariant.
/// Accepts gzip-compressed input (sniffed by magic bytes).
ModelBundle deserialize(std::string_view bytes);

struct SaveOptions {
    bool gzip = false;
};

/// Writes atomically (temporary file + rename).
void save(const ModelBundle& bundle, const std::filesystem::path& path, const SaveOptions& options = {});
ModelBundle load(const std::filesystem::path& path);

/// Throws FormatError when the bundle was produced by different
/// preprocessing assets than `current`.
void ensure_compatible(const ModelBundle& bundle, const PreprocessConfig& current);

}  // namespace phishguard
