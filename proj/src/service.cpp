#include "phishguard/service.hpp"

#include <cctype>

#include <httplib.h>

#include "phishguard/error.hpp"

namespace phishguard {
namespace {

HttpReply error_reply(int status, std::string message)
{
    return {status, {{"error", std::move(message)}}};
}

bool blank(std::string_view s)
{
    for (char c : s) {
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

nlohmann::json weights_json(const std::vector<TermWeight>& items, std::string_view value_key)
{
    auto out = nlohmann::json::array();
    for (const auto& t : items) out.push_back({{"term", t.term}, {std::string(value_key), t.weight}});
    return out;
}

}  // namespace

void ServiceConfig::validate() const
{
    if (top_k < 1) throw ArgumentError("service: top_k must be >= 1");
    if (!(suspicious_threshold >= 0.0 && suspicious_threshold <= high_risk_threshold && high_risk_threshold <= 1.0)) {
        throw ArgumentError("service: require 0 <= suspicious threshold <= high-risk threshold <= 1");
    }
    if (max_body_bytes == 0) throw ArgumentError("service: max_body_bytes must be positive");
}

struct PredictionService::Loaded {
    ModelBundle bundle;
    std::string hash;
};

PredictionService::PredictionService(ServiceConfig config, const Preprocessor& pre)
    : config_(std::move(config)), pre_(pre), started_(std::chrono::steady_clock::now())
{
    config_.validate();
}

void PredictionService::install(ModelBundle bundle)
{
    ensure_compatible(bundle, pre_.config());
    auto hash = content_hash(bundle);
    auto loaded = std::make_shared<const Loaded>(Loaded{std::move(bundle), std::move(hash)});
    std::lock_guard lock(mutex_);
    if (loaded_) throw ArgumentError("service: a model bundle is already installed");
    loaded_ = std::move(loaded);
}

std::shared_ptr<const PredictionService::Loaded> PredictionService::current() const
{
    std::lock_guard lock(mutex_);
    return loaded_;
}

bool PredictionService::model_loaded() const { return current() != nullptr; }

std::string_view PredictionService::risk_band(double p_phishing) const noexcept
{
    if (p_phishing >= config_.high_risk_threshold) return "high";
    if (p_phishing >= config_.suspicious_threshold) return "suspicious";
    return "low";
}

HttpReply PredictionService::predict(std::string_view request_body) const
{
    const auto start = std::chrono::steady_clock::now();
    const auto loaded = current();
    if (!loaded) return error_reply(503, "model not loaded");
    if (request_body.size() > config_.max_body_bytes) return error_reply(400, "request body exceeds 1 MiB limit");

    nlohmann::json request;
    try {
        request = nlohmann::json::parse(request_body);
    } catch (const nlohmann::json::parse_error&) {
        return error_reply(400, "body must be a JSON object with a \"text\" string");
    }
    if (!request.is_object() || !request.contains("text") || !request["text"].is_string()) {
        return error_reply(400, "body must be a JSON object with a \"text\" string");
    }
    const auto& text = request["text"].get_ref<const std::string&>();
    if (blank(text)) return error_reply(400, "text is empty");

    const auto& bundle = loaded->bundle;
    const auto x = transform(pre_(text), bundle.vocab);
    const auto prediction = phishguard::predict(bundle.model, x, bundle.vocab, config_.top_k);
    const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - start;

    return {200,
            {{"label", label_name(prediction.label)},
             {"confidence", std::max(prediction.p_phishing, 1.0 - prediction.p_phishing)},
             {"p_phishing", prediction.p_phishing},
             {"risk", risk_band(prediction.p_phishing)},
             {"indicators", weights_json(prediction.contributions, "weight")},
             {"latency_ms", elapsed.count()}}};
}

HttpReply PredictionService::health() const
{
    const auto loaded = current();
    const std::chrono::duration<double> uptime = std::chrono::steady_clock::now() - started_;
    return {200,
            {{"status", "ok"},
             {"model_loaded", loaded != nullptr},
             {"model_hash", loaded ? nlohmann::json(loaded->hash) : nlohmann::json(nullptr)},
             {"uptime_s", uptime.count()}}};
}

HttpReply PredictionService::model_info() const
{
    const auto loaded = current();
    if (!loaded) return error_reply(503, "model not loaded");
    const auto& bundle = loaded->bundle;

    nlohmann::json info{
        {"kind", model_kind(bundle.model)},
        {"vocab_size", bundle.vocab.size()},
        {"model_hash", loaded->hash},
        {"created_at", bundle.created_at},
        {"idf_mode", to_string(bundle.vocab.config().idf_mode)},
        {"training_metrics", bundle.training_metrics.value_or(nullptr)},
        {"risk_thresholds", {{"high", config_.high_risk_threshold}, {"suspicious", config_.suspicious_threshold}}},
    };
    if (const auto* lr = std::get_if<LogisticModel>(&bundle.model)) {
        const auto ranking = top_features(*lr, bundle.vocab, 10);
        info["top_features"] = {{"phishing", weights_json(ranking.phishing, "coefficient")},
                                {"legitimate", weights_json(ranking.legitimate, "coefficient")}};
    } else {
        info["top_features"] = nullptr;
    }
    return {200, info};
}

HttpServer::HttpServer(const PredictionService& service)
    : service_(service), server_(std::make_unique<httplib::Server>())
{
    auto& srv = *server_;
    // SO_REUSEADDR only: the default also sets SO_REUSEPORT, which lets a
    // second server bind a port that is already taken.
    srv.set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof yes);
    });
    // Oversized bodies are rejected by the handler with a JSON 400; the
    // transport limit only guards against unbounded reads.
    srv.set_payload_max_length(service_.config().max_body_bytes * 4);

    const auto send = [this](httplib::Response& res, const HttpReply& reply) {
        res.status = reply.status;
        res.set_content(reply.body.dump(), "application/json");
        if (!service_.config().cors_origin.empty()) {
            res.set_header("Access-Control-Allow-Origin", service_.config().cors_origin);
        }
    };

    srv.Post("/predict", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service_.predict(req.body));
    });
    srv.Get("/health", [this, send](const httplib::Request&, httplib::Response& res) { send(res, service_.health()); });
    srv.Get("/model/info",
            [this, send](const httplib::Request&, httplib::Response& res) { send(res, service_.model_info()); });
    srv.Options(R"(/.*)", [this](const httplib::Request&, httplib::Response& res) {
        res.status = 204;
        if (!service_.config().cors_origin.empty()) {
            res.set_header("Access-Control-Allow-Origin", service_.config().cors_origin);
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
        }
    });
    srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty()) {
            res.set_content(nlohmann::json{{"error", httplib::status_message(res.status)}}.dump(), "application/json");
        }
    });
}

HttpServer::~HttpServer()
{
    if (server_->is_running()) server_->stop();
}

int HttpServer::bind(const std::string& host, int port)
{
    const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw DataError("cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void HttpServer::serve() { server_->listen_after_bind(); }

void HttpServer::stop() { server_->stop(); }

bool HttpServer::running() const { return server_->is_running(); }

}  // namespace phishguard
