#include "phishguard/modelstore.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include <zlib.h>

#include "phishguard/error.hpp"
#include "phishguard/hash.hpp"

namespace phishguard {
namespace {

nlohmann::json model_json(const TrainedModel& model)
{
    if (const auto* lr = std::get_if<LogisticModel>(&model)) {
        return {{"kind", "logistic_regression"},
                {"weights", lr->weights},
                {"intercept", lr->intercept},
                {"C", lr->config.C},
                {"max_iter", lr->config.max_iter},
                {"tol", lr->config.tol},
                {"seed", lr->config.seed},
                {"converged", lr->converged},
                {"n_iter", lr->n_iter}};
    }
    const auto& nb = std::get<NaiveBayesModel>(model);
    return {{"kind", "naive_bayes"},
            {"alpha", nb.alpha},
            {"dim", nb.dim},
            {"class_log_prior", nb.class_log_prior},
            {"feature_log_prob", nb.feature_log_prob}};
}

TrainedModel model_from_json(const nlohmann::json& j)
{
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "logistic_regression") {
        LogisticModel lr;
        lr.weights = j.at("weights").get<std::vector<double>>();
        lr.intercept = j.at("intercept").get<double>();
        lr.config.C = j.at("C").get<double>();
        lr.config.max_iter = j.at("max_iter").get<int>();
        lr.config.tol = j.at("tol").get<double>();
        lr.config.seed = j.at("seed").get<std::uint64_t>();
        lr.converged = j.at("converged").get<bool>();
        lr.n_iter = j.at("n_iter").get<int>();
        lr.validate();
        return lr;
    }
    if (kind == "naive_bayes") {
        NaiveBayesModel nb;
        nb.alpha = j.at("alpha").get<double>();
        nb.dim = j.at("dim").get<std::size_t>();
        nb.class_log_prior = j.at("class_log_prior").get<std::array<double, 2>>();
        nb.feature_log_prob = j.at("feature_log_prob").get<std::array<std::vector<double>, 2>>();
        nb.validate();
        return nb;
    }
    throw FormatError("bundle: unknown model kind '" + kind + "'");
}

bool is_gzip(std::string_view bytes) noexcept
{
    return bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0x1f
        && static_cast<unsigned char>(bytes[1]) == 0x8b;
}

std::string gzip_compress(std::string_view input)
{
    z_stream zs{};
    // windowBits 15 + 16 selects the gzip wrapper; zlib writes mtime 0.
    if (deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
        throw Error("gzip: deflateInit2 failed");
    }
    std::string out(deflateBound(&zs, static_cast<uLong>(input.size())), '\0');
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(input.data()));
    zs.avail_in = static_cast<uInt>(input.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&zs, Z_FINISH);
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) throw Error("gzip: compression failed");
    out.resize(zs.total_out);
    return out;
}

std::string gzip_decompress(std::string_view input)
{
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 16) != Z_OK) throw FormatError("gzip: inflateInit2 failed");
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(input.data()));
    zs.avail_in = static_cast<uInt>(input.size());
    std::string out;
    char buffer[1 << 16];
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        zs.next_out = reinterpret_cast<Bytef*>(buffer);
        zs.avail_out = sizeof buffer;
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw FormatError("bundle: corrupt gzip stream");
        }
        out.append(buffer, sizeof buffer - zs.avail_out);
        if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
            inflateEnd(&zs);
            throw FormatError("bundle: truncated gzip stream");
        }
    }
    inflateEnd(&zs);
    return out;
}

void check_consistent(const ModelBundle& bundle)
{
    if (model_dim(bundle.model) != bundle.vocab.size()) {
        throw ArgumentError("bundle: model dimension " + std::to_string(model_dim(bundle.model))
                            + " differs from vocabulary size " + std::to_string(bundle.vocab.size()));
    }
}

}  // namespace

std::string format_utc(long long unix_seconds)
{
    const auto t = static_cast<std::time_t>(unix_seconds);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string utc_now()
{
    const auto now = std::chrono::system_clock::now();
    return format_utc(std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count());
}

nlohmann::json bundle_body(const ModelBundle& bundle)
{
    auto model = model_json(bundle.model);
    if (bundle.training_metrics) model["training_metrics"] = *bundle.training_metrics;
    return {
        {"format_version", bundle.format_version},
        {"preprocess",
         {{"pipeline_version", bundle.preprocess.pipeline_version},
          {"stopwords_sha256", bundle.preprocess.stopwords_sha256},
          {"lemmatizer_sha256", bundle.preprocess.lemmatizer_sha256}}},
        {"vocab", bundle.vocab.to_json()},
        {"model", model},
        {"created_at", bundle.created_at},
    };
}

std::string content_hash(const ModelBundle& bundle)
{
    return "sha256:" + sha256_hex(bundle_body(bundle).dump());
}

std::string serialize(const ModelBundle& bundle)
{
    check_consistent(bundle);
    auto doc = bundle_body(bundle);
    doc["content_hash"] = "sha256:" + sha256_hex(doc.dump());
    return doc.dump() + "\n";
}

ModelBundle deserialize(std::string_view bytes)
{
    std::string inflated;
    if (is_gzip(bytes)) {
        inflated = gzip_decompress(bytes);
        bytes = inflated;
    }

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("bundle: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw FormatError("bundle: top level must be an object");
    // Every byte is covered: a file that does not re-serialize to itself has
    // been edited, even if only in insignificant whitespace.
    if (doc.dump() + "\n" != bytes) throw FormatError("bundle: file is not in canonical form (modified after save)");

    try {
        const int version = doc.at("format_version").get<int>();
        if (version != kBundleFormatVersion) {
            throw FormatError("bundle: format_version " + std::to_string(version) + " is not supported (expected "
                              + std::to_string(kBundleFormatVersion) + ")");
        }
        const auto stored_hash = doc.at("content_hash").get<std::string>();
        auto body = doc;
        body.erase("content_hash");
        if (stored_hash != "sha256:" + sha256_hex(body.dump())) throw FormatError("bundle: content hash mismatch");

        const auto& pre = body.at("preprocess");
        const auto& model = body.at("model");
        ModelBundle bundle{
            .format_version = version,
            .preprocess = {pre.at("pipeline_version").get<int>(), pre.at("stopwords_sha256").get<std::string>(),
                           pre.at("lemmatizer_sha256").get<std::string>()},
            .vocab = Vocabulary::from_json(body.at("vocab")),
            .model = model_from_json(model),
            .created_at = body.at("created_at").get<std::string>(),
            .training_metrics = std::nullopt,
        };
        if (model.contains("training_metrics")) bundle.training_metrics = model.at("training_metrics");
        if (model_dim(bundle.model) != bundle.vocab.size()) {
            throw FormatError("bundle: model dimension differs from vocabulary size");
        }
        return bundle;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bundle: ") + e.what());
    }
}

void save(const ModelBundle& bundle, const std::filesystem::path& path, const SaveOptions& options)
{
    auto bytes = serialize(bundle);
    if (options.gzip) bytes = gzip_compress(bytes);

    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw DataError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw DataError("cannot move bundle into place at " + path.string());
    }
}

ModelBundle load(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model bundle " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return deserialize(buffer.str());
}

void ensure_compatible(const ModelBundle& bundle, const PreprocessConfig& current)
{
    if (bundle.preprocess != current) {
        throw FormatError("bundle was built with different preprocessing assets (pipeline v"
                          + std::to_string(bundle.preprocess.pipeline_version) + ", stopwords "
                          + bundle.preprocess.stopwords_sha256.substr(0, 12) + ", lemmatizer "
                          + bundle.preprocess.lemmatizer_sha256.substr(0, 12) + ")");
    }
}

}  // namespace phishguard
