#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include <json.hpp>

#include "phishguard/modelstore.hpp"
#include "phishguard/preprocess.hpp"

namespace httplib {
class Server;
}

namespace phishguard {

struct ServiceConfig {
    std::size_t top_k = 10;
    std::string cors_origin = "*";  // empty disables CORS headers
    double high_risk_threshold = 0.8;
    double suspicious_threshold = 0.5;
    std::size_t max_body_bytes = 1 << 20;

    void validate() const;
};

struct HttpReply {
    int status = 200;
    nlohmann::json body;
};

/// Request handling independent of any transport. The bundle is installed
/// once and never mutated; handlers are safe to call concurrently.
class PredictionService {
public:
    explicit PredictionService(ServiceConfig config = {}, const Preprocessor& pre = Preprocessor::bundled());

    /// Throws FormatError when the bundle's preprocessing fingerprint differs
    /// from this process's assets, ArgumentError if a bundle is already installed.
    void install(ModelBundle bundle);
    bool model_loaded() const;

    HttpReply predict(std::string_view request_body) const;
    HttpReply health() const;
    HttpReply model_info() const;

    /// Risk band for a phishing probability: "high", "suspicious" or "low".
    std::string_view risk_band(double p_phishing) const noexcept;

    const ServiceConfig& config() const noexcept { return config_; }

private:
    struct Loaded;
    std::shared_ptr<const Loaded> current() const;

    ServiceConfig config_;
    const Preprocessor& pre_;
    std::chrono::steady_clock::time_point started_;
    mutable std::mutex mutex_;
    std::shared_ptr<const Loaded> loaded_;
};

/// cpp-httplib front end: POST /predict, GET /health, GET /model/info.
class HttpServer {
public:
    explicit HttpServer(const PredictionService& service);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds to `host:port`; port 0 picks a free port. Returns the bound port.
    /// Throws DataError when binding fails.
    int bind(const std::string& host, int port);

    /// Serves until stop(); in-flight requests complete before it returns.
    void serve();
    void stop();
    bool running() const;

private:
    const PredictionService& service_;
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace phishguard
