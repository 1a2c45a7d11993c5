#include "phishguard/cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <thread>
#include <pthread.h>

#include <CLI11.hpp>

#include "phishguard/error.hpp"
#include "phishguard/experiment.hpp"
#include "phishguard/ingest.hpp"
#include "phishguard/modelstore.hpp"
#include "phishguard/service.hpp"

namespace phishguard {
namespace {

/// `--config` reader: top-level keys are global flags, nested objects are
/// per-subcommand flags, e.g. {"seed": 7, "train": {"C": 0.5}}.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override
    {
        nlohmann::json doc;
        try {
            input >> doc;
        } catch (const nlohmann::json::exception& e) {
            throw CLI::ConversionError(std::string("--config: ") + e.what());
        }
        if (!doc.is_object()) throw CLI::ConversionError("--config: expected a JSON object");
        std::vector<CLI::ConfigItem> items;
        collect(doc, {}, items);
        return items;
    }

private:
    static std::string scalar(const nlohmann::json& v)
    {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        if (v.is_number()) return v.dump();
        throw CLI::ConversionError("--config: unsupported value " + v.dump());
    }

    static void collect(const nlohmann::json& obj, const std::vector<std::string>& parents,
                        std::vector<CLI::ConfigItem>& items)
    {
        for (const auto& [key, value] : obj.items()) {
            if (value.is_object()) {
                auto nested = parents;
                nested.push_back(key);
                collect(value, nested, items);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (value.is_array()) {
                for (const auto& v : value) item.inputs.push_back(scalar(v));
            } else {
                item.inputs.push_back(scalar(value));
            }
            items.push_back(std::move(item));
        }
    }
};

struct GlobalOptions {
    bool json = false;
    std::uint64_t seed = 42;
};

struct TrainingOptions {
    std::vector<std::string> datasets;
    double train_fraction = 0.8;
    TfidfConfig tfidf;
    std::string idf_mode = "smoothed_normalized";
    double C = 1.0;
    int max_iter = 1000;
    double tol = 1e-4;
    double alpha = 1.0;
    std::size_t top_k = 10;
    bool reproducible = false;

    ExperimentConfig experiment(const GlobalOptions& global) const
    {
        ExperimentConfig c;
        c.split = {train_fraction, global.seed, true};
        c.tfidf = tfidf;
        c.tfidf.idf_mode = parse_idf_mode(idf_mode);
        c.nb_alpha = alpha;
        c.lr = {C, max_iter, tol, global.seed};
        c.top_k = top_k;
        c.record_timing = !reproducible_mode();
        return c;
    }

    bool reproducible_mode() const { return reproducible || std::getenv("SOURCE_DATE_EPOCH") != nullptr; }

    void validate(const GlobalOptions& global) const
    {
        const auto c = experiment(global);
        c.split.validate();
        c.tfidf.validate();
        c.lr.validate();
        if (!(alpha > 0.0)) throw ArgumentError("--alpha must be positive");
        if (top_k < 1) throw ArgumentError("--top-k must be >= 1");
    }
};

void add_training_flags(CLI::App& cmd, TrainingOptions& t)
{
    cmd.add_option("--dataset", t.datasets, "Labeled CSV and its schema, as <csv>:<schema.json> (repeatable)")
        ->required();
    cmd.add_option("--train-fraction", t.train_fraction, "Fraction of each class used for training")
        ->capture_default_str();
    cmd.add_option("--max-features", t.tfidf.max_features, "Vocabulary size cap")->capture_default_str();
    cmd.add_option("--ngram-min", t.tfidf.ngram_min, "Smallest n-gram length")->capture_default_str();
    cmd.add_option("--ngram-max", t.tfidf.ngram_max, "Largest n-gram length")->capture_default_str();
    cmd.add_option("--min-df", t.tfidf.min_df, "Minimum document count per term")->capture_default_str();
    cmd.add_option("--max-df", t.tfidf.max_df, "Maximum document fraction per term")->capture_default_str();
    cmd.add_option("--idf-mode", t.idf_mode, "IDF formula")
        ->check(CLI::IsMember({"smoothed_normalized", "paper_eq1"}))
        ->capture_default_str();
    cmd.add_option("--C", t.C, "Inverse L2 regularization strength for logistic regression")->capture_default_str();
    cmd.add_option("--max-iter", t.max_iter, "Logistic regression iteration cap")->capture_default_str();
    cmd.add_option("--tol", t.tol, "Gradient infinity-norm stopping tolerance")->capture_default_str();
    cmd.add_option("--alpha", t.alpha, "Naive Bayes additive smoothing")->capture_default_str();
    cmd.add_option("--top-k", t.top_k, "Number of top features per class in the report")->capture_default_str();
    cmd.add_flag("--reproducible", t.reproducible,
                 "Pin created_at to SOURCE_DATE_EPOCH (or the epoch) and report train_seconds as 0");
}

std::vector<RawEmail> load_merged(const std::vector<std::string>& datasets, CorpusStats* stats = nullptr,
                                  const LoadOptions& options = {})
{
    std::vector<DatasetSpec> specs;
    for (const auto& d : datasets) specs.push_back(parse_dataset_spec(d));
    auto merged = merge(load_datasets(specs, options));
    if (stats) *stats = merged.stats;
    return std::move(merged.records);
}

std::string reproducible_timestamp()
{
    long long epoch = 0;
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
        try {
            epoch = std::stoll(env);
        } catch (const std::exception&) {
            throw ArgumentError("SOURCE_DATE_EPOCH must be an integer");
        }
    }
    return format_utc(epoch);
}

void write_text_file(const std::string& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path);
    out << content;
    if (!out) throw DataError("write failed: " + path);
}

bool want_json(const GlobalOptions& g, const CliStreams& io) { return g.json || !io.stdout_is_tty; }

std::string percent(std::size_t part, std::size_t whole)
{
    if (whole == 0) return "-";
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * static_cast<double>(part) / static_cast<double>(whole));
    return buf;
}

// ----------------------------------------------------------------------------

int cmd_train(const GlobalOptions& g, const TrainingOptions& t, const std::string& kind, const std::string& bundle_path,
              const std::string& report_path, bool gzip, CliStreams& io)
{
    const auto config = t.experiment(g);
    const auto corpus = load_merged(t.datasets);
    auto outcome = run_experiment(corpus, config);
    const auto& report = outcome.report;

    const bool lr = kind == "lr";
    const auto& result = report.models[lr ? 1 : 0];
    ModelBundle bundle{
        .preprocess = Preprocessor::bundled().config(),
        .vocab = outcome.vocab,
        .model = lr ? TrainedModel(outcome.lr) : TrainedModel(outcome.nb),
        .created_at = t.reproducible_mode() ? reproducible_timestamp() : utc_now(),
        .training_metrics = to_json(result, report.vocab_size, report.sparsity),
    };
    save(bundle, bundle_path, {.gzip = gzip});

    const auto report_json = to_json(report);
    if (!report_path.empty()) write_text_file(report_path, report_json.dump(2) + "\n");

    if (want_json(g, io)) {
        io.out << report_json.dump() << "\n";
    } else {
        io.out << render_metrics_table(report.models);
        io.out << "train " << report.train.total() << " (" << report.train.legitimate << " legitimate, "
               << report.train.phishing << " phishing), test " << report.test.total() << " ("
               << report.test.legitimate << " legitimate, " << report.test.phishing << " phishing)\n";
        io.out << "vocabulary " << report.vocab_size << " terms, sparsity ";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * report.sparsity);
        io.out << buf << "\n";
        io.out << "saved " << model_kind(bundle.model) << " bundle to " << bundle_path << "\n";
    }
    return kExitOk;
}

int cmd_evaluate(const GlobalOptions& g, const TrainingOptions& t, const std::string& model_path,
                 const std::string& report_path, CliStreams& io)
{
    nlohmann::json report_json;
    std::vector<ModelResult> rows;
    if (!model_path.empty()) {
        const auto bundle = load(model_path);
        ensure_compatible(bundle, Preprocessor::bundled().config());
        const auto corpus = load_merged(t.datasets);
        const auto X = transform_records(corpus, Preprocessor::bundled(), bundle.vocab);
        std::vector<ClassLabel> predicted;
        predicted.reserve(X.size());
        for (const auto& x : X) predicted.push_back(decide(predict_proba(bundle.model, x)));
        const auto y = labels_of(corpus);
        ModelResult result{std::string(model_kind(bundle.model)), metrics(confusion(y, predicted)), 0.0};
        rows.push_back(result);
        report_json = {{"models", {to_json(result, bundle.vocab.size(), sparsity(X, bundle.vocab.size()))}},
                       {"n_records", corpus.size()}};
    } else {
        const auto corpus = load_merged(t.datasets);
        const auto outcome = run_experiment(corpus, t.experiment(g));
        rows = outcome.report.models;
        report_json = to_json(outcome.report);
    }
    if (!report_path.empty()) write_text_file(report_path, report_json.dump(2) + "\n");
    if (want_json(g, io)) io.out << report_json.dump() << "\n";
    else io.out << render_metrics_table(rows);
    return kExitOk;
}

std::string read_stream(std::istream& in)
{
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

int cmd_predict(const GlobalOptions& g, const std::string& model_path, const std::vector<std::string>& texts,
                const std::vector<std::string>& files, std::size_t top_k, CliStreams& io)
{
    const auto bundle = load(model_path);
    const auto& pre = Preprocessor::bundled();
    ensure_compatible(bundle, pre.config());

    std::vector<std::string> inputs = texts;
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        if (!in) throw DataError("cannot read " + f);
        inputs.push_back(read_stream(in));
    }
    if (texts.empty() && files.empty()) inputs.push_back(read_stream(io.in));
    for (const auto& text : inputs) {
        if (text.find_first_not_of(" \t\r\n\v\f") == std::string::npos) throw DataError("empty input text");
    }

    for (const auto& text : inputs) {
        const auto p = predict(bundle.model, transform(pre(text), bundle.vocab), bundle.vocab, top_k);
        if (want_json(g, io)) {
            auto indicators = nlohmann::json::array();
            for (const auto& c : p.contributions) indicators.push_back({{"term", c.term}, {"weight", c.weight}});
            io.out << nlohmann::json{{"label", label_name(p.label)},
                                     {"p_phishing", p.p_phishing},
                                     {"confidence", std::max(p.p_phishing, 1.0 - p.p_phishing)},
                                     {"indicators", indicators}}
                          .dump()
                   << "\n";
        } else {
            char buf[96];
            std::snprintf(buf, sizeof buf, "%-10s p_phishing=%.4f", std::string(label_name(p.label)).c_str(),
                          p.p_phishing);
            io.out << buf;
            for (std::size_t i = 0; i < p.contributions.size() && i < 5; ++i) {
                std::snprintf(buf, sizeof buf, "%s %s(%+.3f)", i == 0 ? "  indicators:" : ",",
                              p.contributions[i].term.c_str(), p.contributions[i].weight);
                io.out << buf;
            }
            io.out << "\n";
        }
    }
    return kExitOk;
}

int cmd_features(const GlobalOptions& g, const std::string& model_path, int k, CliStreams& io)
{
    if (k < 1) throw ArgumentError("-k must be >= 1");
    const auto bundle = load(model_path);
    const auto* lr = std::get_if<LogisticModel>(&bundle.model);
    if (!lr) throw ArgumentError("features requires a logistic regression bundle (naive Bayes has no signed coefficients)");
    const auto ranking = top_features(*lr, bundle.vocab, static_cast<std::size_t>(k));

    if (want_json(g, io)) {
        const auto list = [](const std::vector<TermWeight>& items) {
            auto out = nlohmann::json::array();
            for (const auto& t : items) out.push_back({{"term", t.term}, {"coefficient", t.weight}});
            return out;
        };
        io.out << nlohmann::json{{"phishing", list(ranking.phishing)}, {"legitimate", list(ranking.legitimate)}}.dump()
               << "\n";
        return kExitOk;
    }
    char line[160];
    std::snprintf(line, sizeof line, "%-24s %8s   %-24s %8s\n", "Phishing indicator", "Coef.", "Legitimate indicator",
                  "Coef.");
    io.out << line;
    const std::size_t rows = std::max(ranking.phishing.size(), ranking.legitimate.size());
    for (std::size_t i = 0; i < rows; ++i) {
        std::string left_term, right_term, left_coef, right_coef;
        char buf[32];
        if (i < ranking.phishing.size()) {
            left_term = ranking.phishing[i].term;
            std::snprintf(buf, sizeof buf, "%.2f", ranking.phishing[i].weight);
            left_coef = buf;
        }
        if (i < ranking.legitimate.size()) {
            right_term = ranking.legitimate[i].term;
            std::snprintf(buf, sizeof buf, "%.2f", ranking.legitimate[i].weight);
            right_coef = buf;
        }
        std::snprintf(line, sizeof line, "%-24s %8s   %-24s %8s\n", left_term.c_str(), left_coef.c_str(),
                      right_term.c_str(), right_coef.c_str());
        io.out << line;
    }
    return kExitOk;
}

int cmd_stats(const GlobalOptions& g, const std::vector<std::string>& datasets, CliStreams& io)
{
    std::vector<DatasetSpec> specs;
    for (const auto& d : datasets) specs.push_back(parse_dataset_spec(d));
    const auto merged = merge(load_datasets(specs, {.allow_empty = true}));
    const auto& stats = merged.stats;
    const auto duplicates = count_duplicate_texts(merged.records);

    if (want_json(g, io)) {
        auto j = to_json(stats);
        j["duplicate_texts"] = duplicates;
        io.out << j.dump() << "\n";
        return kExitOk;
    }
    char line[200];
    const auto row = [&](const std::string& name, std::size_t legit, std::size_t phish) {
        const std::size_t total = legit + phish;
        std::snprintf(line, sizeof line, "%-16s %10zu %7s %10zu %7s %10zu\n", name.c_str(), legit,
                      percent(legit, total).c_str(), phish, percent(phish, total).c_str(), total);
        io.out << line;
    };
    std::snprintf(line, sizeof line, "%-16s %18s %18s %10s\n", "Source", "Legitimate", "Phishing", "Total");
    io.out << line;
    for (const auto& s : stats.sources) row(s.source, s.legitimate, s.phishing);
    row("Total", stats.legitimate, stats.phishing);
    io.out << "dropped rows: " << stats.dropped << ", exact-duplicate texts (kept): " << duplicates << "\n";
    return kExitOk;
}

struct ServeOptions {
    std::string model;
    int port = 8000;
    std::string bind = "127.0.0.1";
    std::size_t top_k = 10;
    std::string cors_origin = "*";
};

int cmd_serve(const ServeOptions& s, CliStreams& io)
{
    PredictionService service(ServiceConfig{.top_k = s.top_k, .cors_origin = s.cors_origin});
    const auto bundle = load(s.model);
    service.install(bundle);

    // Route SIGINT/SIGTERM to a dedicated thread; every other thread
    // (including the server's workers) inherits the blocked mask.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    sigaddset(&signals, SIGUSR1);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    HttpServer server(service);
    const int port = server.bind(s.bind, s.port);
    io.err << "phishguard: serving on http://" << s.bind << ":" << port << "\n"
           << std::flush;

    std::atomic<bool> done{false};
    std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        // a signal can land before the accept loop starts; stop() is a no-op until then
        while (!done) {
            if (server.running()) {
                server.stop();
                break;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(1));
        }
    });
    server.serve();
    done = true;
    pthread_kill(waiter.native_handle(), SIGUSR1);  // wakes the waiter if no signal arrived
    waiter.join();
    io.err << "phishguard: shut down\n";
    return kExitOk;
}

}  // namespace

int run_cli(std::span<const std::string> args, CliStreams io)
{
    CLI::App app{"Phishing email classifier: TF-IDF features with naive Bayes and logistic regression"};
    app.name("phishguard");
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "Optional JSON file with flag values ({\"flag\": v, \"<subcommand>\": {...}})");

    GlobalOptions g;
    app.add_flag("--json", g.json, "Force JSON output even on a terminal");
    app.add_option("--seed", g.seed, "Seed for the split shuffle and recorded in the model")->capture_default_str();

    TrainingOptions train_opts;
    std::string kind = "lr";
    std::string bundle_path;
    std::string report_path;
    bool gzip = false;
    auto* train = app.add_subcommand("train", "Split, fit, evaluate, and save a model bundle");
    add_training_flags(*train, train_opts);
    train->add_option("--model", kind, "Classifier to persist")->check(CLI::IsMember({"lr", "nb"}))->capture_default_str();
    train->add_option("--bundle", bundle_path, "Output .pgmodel path")->required();
    train->add_option("--out", report_path, "Write the JSON report here");
    train->add_flag("--gzip", gzip, "Gzip-compress the bundle");

    TrainingOptions eval_opts;
    std::string eval_model;
    std::string eval_report;
    auto* evaluate = app.add_subcommand("evaluate", "Score a saved bundle, or run the split experiment without saving");
    add_training_flags(*evaluate, eval_opts);
    evaluate->add_option("--model", eval_model, "Bundle to score on every record of the datasets");
    evaluate->add_option("--out", eval_report, "Write the JSON report here");

    std::string predict_model;
    std::vector<std::string> texts;
    std::vector<std::string> files;
    std::size_t predict_k = 10;
    auto* predict_cmd = app.add_subcommand("predict", "Classify email text from --text, --file or stdin");
    predict_cmd->add_option("--model", predict_model, "Model bundle")->required()->envname("PHISHGUARD_MODEL");
    predict_cmd->add_option("--text", texts, "Email body (repeatable)");
    predict_cmd->add_option("--file", files, "File holding one email body (repeatable)");
    predict_cmd->add_option("--top-k", predict_k, "Indicators per prediction")->capture_default_str();

    std::string features_model;
    int features_k = 10;
    auto* features = app.add_subcommand("features", "List the strongest coefficients per class");
    features->add_option("--model", features_model, "Logistic regression bundle")->required();
    features->add_option("-k,--top-k", features_k, "Rows per class")->capture_default_str();

    std::vector<std::string> stats_datasets;
    auto* stats = app.add_subcommand("stats", "Per-source class distribution");
    stats->add_option("--dataset", stats_datasets, "<csv>:<schema.json> (repeatable)")->required();

    ServeOptions serve_opts;
    auto* serve = app.add_subcommand("serve", "Run the HTTP prediction service");
    serve->add_option("--model", serve_opts.model, "Model bundle")->required()->envname("PHISHGUARD_MODEL");
    serve->add_option("--port", serve_opts.port, "TCP port")->envname("PHISHGUARD_PORT")->capture_default_str();
    serve->add_option("--bind", serve_opts.bind, "Listen address")->envname("PHISHGUARD_BIND")->capture_default_str();
    serve->add_option("--top-k", serve_opts.top_k, "Indicators per response")
        ->envname("PHISHGUARD_TOP_K")
        ->capture_default_str();
    serve->add_option("--cors-origin", serve_opts.cors_origin, "Access-Control-Allow-Origin value; empty disables")
        ->envname("PHISHGUARD_CORS_ORIGIN")
        ->capture_default_str();

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, io.out, io.err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, io.out, io.err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, io.out, io.err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, io.out, io.err);
        return kExitBadArgs;
    }

    try {
        if (*train) {
            train_opts.validate(g);
            return cmd_train(g, train_opts, kind, bundle_path, report_path, gzip, io);
        }
        if (*evaluate) {
            eval_opts.validate(g);
            return cmd_evaluate(g, eval_opts, eval_model, eval_report, io);
        }
        if (*predict_cmd) {
            if (predict_k < 1) throw ArgumentError("--top-k must be >= 1");
            return cmd_predict(g, predict_model, texts, files, predict_k, io);
        }
        if (*features) return cmd_features(g, features_model, features_k, io);
        if (*stats) return cmd_stats(g, stats_datasets, io);
        if (*serve) {
            if (serve_opts.top_k < 1) throw ArgumentError("--top-k must be >= 1");
            return cmd_serve(serve_opts, io);
        }
    } catch (const ArgumentError& e) {
        io.err << "error: " << e.what() << "\n";
        return kExitBadArgs;
    } catch (const TrainingError& e) {
        io.err << "training error: " << e.what() << "\n";
        return kExitTrainingError;
    } catch (const Error& e) {
        io.err << "error: " << e.what() << "\n";
        return kExitDataError;
    } catch (const std::filesystem::filesystem_error& e) {
        io.err << "error: " << e.what() << "\n";
        return kExitDataError;
    }
    return kExitBadArgs;
}

}  // namespace phishguard
