#include <doctest.h>

#include <future>
#include <thread>

#include <httplib.h>

#include "phishguard/error.hpp"
#include "phishguard/experiment.hpp"
#include "phishguard/service.hpp"
#include "support.hpp"

using namespace phishguard;

namespace {

const ExperimentOutcome& outcome()
{
    static const ExperimentOutcome o = [] {
        std::vector<RawEmail> corpus;
        const std::vector<std::string> phish{
            "urgent your account has been suspended click here immediately to verify your password",
            "verify your bank account now or it will be suspended click the link",
            "you won a prize claim your reward click here urgent",
            "security alert confirm your password immediately account locked"};
        const std::vector<std::string> legit{
            "please find attached the q4 project timeline for review before the meeting",
            "the team meeting is moved to thursday agenda attached",
            "thanks for the notes from the project review lunch tomorrow",
            "draft budget report for the quarterly review is ready"};
        for (int i = 0; i < 30; ++i) {
            corpus.push_back({phish[static_cast<std::size_t>(i) % phish.size()] + " ref", ClassLabel::Phishing, "s"});
            corpus.push_back({legit[static_cast<std::size_t>(i) % legit.size()] + " ref", ClassLabel::Legitimate, "s"});
        }
        ExperimentConfig cfg;
        cfg.record_timing = false;
        return run_experiment(corpus, cfg);
    }();
    return o;
}

ModelBundle bundle(bool lr)
{
    const auto& o = outcome();
    return {.preprocess = Preprocessor::bundled().config(),
            .vocab = o.vocab,
            .model = lr ? TrainedModel(o.lr) : TrainedModel(o.nb),
            .created_at = format_utc(0),
            .training_metrics = to_json(o.report.models[lr ? 1 : 0], o.report.vocab_size, o.report.sparsity)};
}

std::string body(const std::string& text) { return nlohmann::json{{"text", text}}.dump(); }

const std::string kHighRisk =
    "URGENT! Your account has been suspended! Click here immediately to verify your password.";
const std::string kBusiness = "Hi team, please find attached the Q4 project timeline for review before Thursday's meeting.";

}  // namespace

TEST_CASE("no bundle: predict and model/info are 503, health reports not loaded")
{
    PredictionService s;
    CHECK(s.predict(body("hello")).status == 503);
    CHECK(s.model_info().status == 503);
    const auto h = s.health();
    CHECK(h.status == 200);
    CHECK(h.body.at("status") == "ok");
    CHECK(h.body.at("model_loaded") == false);
}

TEST_CASE("health after install and uptime monotone")
{
    PredictionService s;
    const auto b = bundle(true);
    s.install(b);
    const auto h1 = s.health();
    CHECK(h1.body.at("model_loaded") == true);
    CHECK(h1.body.at("model_hash") == content_hash(b));
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    const auto h2 = s.health();
    CHECK(h2.body.at("uptime_s").get<double>() >= h1.body.at("uptime_s").get<double>());
    CHECK_THROWS_AS(s.install(b), ArgumentError);
}

TEST_CASE("predict response schema and samples")
{
    PredictionService s;
    s.install(bundle(true));
    const auto r = s.predict(body(kHighRisk));
    REQUIRE(r.status == 200);
    CHECK(r.body.at("label") == "phishing");
    const double p = r.body.at("p_phishing");
    CHECK(r.body.at("confidence") == std::max(p, 1.0 - p));
    CHECK(r.body.at("indicators").size() <= 10);
    CHECK(r.body.at("latency_ms").get<double>() >= 0.0);
    CHECK(r.body.at("risk") == s.risk_band(p));
    for (const auto& ind : r.body.at("indicators")) {
        CHECK(ind.contains("term"));
        CHECK(ind.contains("weight"));
    }

    const auto b = s.predict(body(kBusiness));
    REQUIRE(b.status == 200);
    CHECK(b.body.at("label") == "legitimate");
    CHECK(b.body.at("risk") == "low");
}

TEST_CASE("bad requests are 400")
{
    PredictionService s;
    s.install(bundle(true));
    CHECK(s.predict(body("")).status == 400);
    CHECK(s.predict(body("   \n\t")).status == 400);
    CHECK(s.predict("{not json").status == 400);
    CHECK(s.predict(R"({"txt":"x"})").status == 400);
    CHECK(s.predict(R"({"text":5})").status == 400);
    CHECK(s.predict(R"(["text"])").status == 400);
    CHECK(s.predict(body(std::string((1 << 20) + 1, 'a'))).status == 400);
    CHECK(s.predict(std::string(1 << 20, ' ')).status == 400);
}

TEST_CASE("indicator count follows top_k")
{
    PredictionService s({.top_k = 2});
    s.install(bundle(true));
    CHECK(s.predict(body(kHighRisk)).body.at("indicators").size() <= 2);
    CHECK_THROWS_AS(PredictionService({.top_k = 0}), ArgumentError);
}

TEST_CASE("risk bands")
{
    PredictionService s;
    CHECK(s.risk_band(0.8) == "high");
    CHECK(s.risk_band(0.79) == "suspicious");
    CHECK(s.risk_band(0.5) == "suspicious");
    CHECK(s.risk_band(0.49) == "low");
    PredictionService t({.high_risk_threshold = 0.9, .suspicious_threshold = 0.6});
    CHECK(t.risk_band(0.85) == "suspicious");
    CHECK(t.risk_band(0.55) == "low");
}

TEST_CASE("model/info for both kinds")
{
    PredictionService lr;
    lr.install(bundle(true));
    const auto i = lr.model_info();
    REQUIRE(i.status == 200);
    CHECK(i.body.at("kind") == "logistic_regression");
    CHECK(i.body.at("vocab_size") == outcome().vocab.size());
    CHECK(i.body.at("training_metrics").at("model") == "logistic_regression");
    CHECK(i.body.at("top_features").at("phishing").size() <= 10);
    CHECK(!i.body.at("top_features").at("phishing").empty());

    PredictionService nb;
    nb.install(bundle(false));
    CHECK(nb.model_info().body.at("kind") == "naive_bayes");
    CHECK(nb.model_info().body.at("top_features").is_null());
}

TEST_CASE("bundle from other preprocessing assets is refused")
{
    PredictionService s;
    auto b = bundle(true);
    b.preprocess.pipeline_version = 99;
    CHECK_THROWS_AS(s.install(b), FormatError);
    CHECK_FALSE(s.model_loaded());
}

TEST_CASE("concurrent identical requests are identical")
{
    PredictionService s;
    s.install(bundle(false));
    const auto ref = s.predict(body(kHighRisk)).body;
    std::vector<std::future<nlohmann::json>> futures;
    for (int i = 0; i < 64; ++i) {
        futures.push_back(std::async(std::launch::async, [&] { return s.predict(body(kHighRisk)).body; }));
    }
    for (auto& f : futures) {
        auto r = f.get();
        CHECK(r.at("p_phishing") == ref.at("p_phishing"));
        CHECK(r.at("label") == ref.at("label"));
        CHECK(r.at("indicators") == ref.at("indicators"));
    }
}

TEST_CASE("live HTTP server")
{
    PredictionService s;
    s.install(bundle(true));
    HttpServer server(s);
    const int port = server.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    std::thread t([&] { server.serve(); });
    while (!server.running()) std::this_thread::sleep_for(std::chrono::milliseconds(1));

    httplib::Client c("127.0.0.1", port);
    auto h = c.Get("/health");
    REQUIRE(h);
    CHECK(h->status == 200);
    CHECK(h->get_header_value("Access-Control-Allow-Origin") == "*");
    CHECK(nlohmann::json::parse(h->body).at("model_loaded") == true);

    auto p = c.Post("/predict", body(kHighRisk), "application/json");
    REQUIRE(p);
    CHECK(p->status == 200);
    CHECK(nlohmann::json::parse(p->body).at("label") == "phishing");

    auto bad = c.Post("/predict", "{}", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);
    CHECK(nlohmann::json::parse(bad->body).contains("error"));

    auto info = c.Get("/model/info");
    REQUIRE(info);
    CHECK(nlohmann::json::parse(info->body).at("kind") == "logistic_regression");

    auto missing = c.Get("/nope");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    CHECK(nlohmann::json::parse(missing->body).contains("error"));

    auto pre = c.Options("/predict");
    REQUIRE(pre);
    CHECK(pre->status == 204);
    CHECK(pre->get_header_value("Access-Control-Allow-Methods").find("POST") != std::string::npos);

    server.stop();
    t.join();
    CHECK_FALSE(server.running());
}

TEST_CASE("CORS can be disabled; busy port is a data error")
{
    PredictionService s({.cors_origin = ""});
    s.install(bundle(true));
    HttpServer a(s);
    const int port = a.bind("127.0.0.1", 0);
    std::thread t([&] { a.serve(); });
    while (!a.running()) std::this_thread::sleep_for(std::chrono::milliseconds(1));
    httplib::Client c("127.0.0.1", port);
    auto h = c.Get("/health");
    REQUIRE(h);
    CHECK_FALSE(h->has_header("Access-Control-Allow-Origin"));

    HttpServer b(s);
    CHECK_THROWS_AS(b.bind("127.0.0.1", port), DataError);
    a.stop();
    t.join();
}
