// vizrec command-line entry point: build, eval, triplets, serve, search.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "vizrec/api.hpp"
#include "vizrec/config.hpp"
#include "vizrec/error.hpp"
#include "vizrec/eval_pipeline.hpp"
#include "vizrec/index.hpp"
#include "vizrec/model_io.hpp"

namespace {

namespace fs = std::filesystem;
using vizrec::Error;
using vizrec::ErrorCode;
using vizrec::config::RunConfig;

constexpr int kOk = 0;
constexpr int kRuntimeFailure = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonFlags {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<unsigned> workers;
};

struct Flags {
    CommonFlags common;
    std::string repo, bundle, report, judgements, gold, triplets_file, out, host, cors_origin, query, models;
    std::optional<std::uint64_t> seed;
    std::optional<int> port, n;
    std::size_t limit = 10;
    bool json = false;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("-c,--config", f.common.config_path, "Config file (key = value lines)");
    cmd->add_option("--set", f.common.overrides, "Override a config key, e.g. --set lda_iterations=200");
    cmd->add_option("--workers", f.common.workers, "Worker threads");
}

RunConfig assemble(const Flags& f) {
    RunConfig cfg;
    if (!f.common.config_path.empty()) cfg = vizrec::config::load(f.common.config_path);
    for (const auto& kv : f.common.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
        vizrec::config::set_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (f.common.workers) cfg.workers = *f.common.workers;
    if (!f.repo.empty()) cfg.repo = f.repo;
    if (!f.bundle.empty()) cfg.bundle = f.bundle;
    if (!f.report.empty()) cfg.report = f.report;
    if (!f.judgements.empty()) cfg.judgements = f.judgements;
    if (!f.gold.empty()) cfg.gold = f.gold;
    if (!f.triplets_file.empty()) cfg.triplets_path = f.triplets_file;
    if (!f.host.empty()) cfg.host = f.host;
    if (!f.cors_origin.empty()) cfg.cors_origin = f.cors_origin;
    if (!f.models.empty()) vizrec::config::set_value(cfg, "models", f.models);
    if (f.seed) cfg.seed = *f.seed;
    if (f.port) cfg.port = *f.port;
    if (f.n) cfg.triplets = *f.n;
    return cfg;
}

void require_repo(const RunConfig& cfg) {
    if (cfg.repo.empty()) throw UsageError("no repository given; pass --repo or set `repo` in the config");
    if (!fs::is_directory(cfg.repo)) throw UsageError("repository path '" + cfg.repo + "' is not a directory");
}

void require_bundle(const RunConfig& cfg) {
    if (cfg.bundle.empty()) throw UsageError("no bundle given; pass --bundle or set `bundle` in the config");
    if (!fs::exists(fs::path(cfg.bundle) / "manifest.json")) {
        throw UsageError("no bundle at '" + cfg.bundle + "'; run `vizrec build` first");
    }
}

int cmd_build(const Flags& f) {
    const auto cfg = assemble(f);
    require_repo(cfg);
    if (cfg.bundle.empty()) throw UsageError("no output bundle given; pass --bundle or set `bundle` in the config");
    vizrec::config::validate(cfg, true);
    const auto report = vizrec::service::build_index(cfg, cfg.bundle);
    const auto report_path = cfg.report.empty() ? fs::path(cfg.bundle + ".report.json") : fs::path(cfg.report);
    vizrec::io::write_file_bytes(report_path, report.to_json().dump(1) + "\n");
    fmt::print("parsed {} of {} files, {} eligible", report.parsed, report.files_seen, report.eligible);
    for (const auto& [rule, count] : report.excluded) fmt::print(", {} {}", count, rule);
    fmt::print("\n{} duplicate groups; report at {}\n", report.groups, report_path.string());
    if (!report.success) {
        spdlog::error("build failed: {}", report.failure);
        return kRuntimeFailure;
    }
    return kOk;
}

int cmd_triplets(const Flags& f) {
    auto cfg = assemble(f);
    require_repo(cfg);
    vizrec::config::validate(cfg, true);
    cfg.triplets_path.clear();
    const auto corpus = vizrec::eval::prepare_corpus(cfg);
    const auto triplets = vizrec::eval::obtain_triplets(cfg, corpus);
    const auto csv = vizrec::eval::triplets_csv(triplets);
    if (f.out.empty()) {
        std::cout << csv;
    } else {
        vizrec::io::write_file_bytes(f.out, csv);
        spdlog::info("{} triplets written to {}", triplets.size(), f.out);
    }
    return kOk;
}

int cmd_eval(const Flags& f) {
    const auto cfg = assemble(f);
    vizrec::config::validate(cfg, true);
    require_repo(cfg);
    if (cfg.judgements.empty()) throw UsageError("no judgements given; pass --judgements or set `judgements`");
    const auto judgements = vizrec::eval::read_judgements_csv(cfg.judgements);
    const auto gold = cfg.gold.empty() ? vizrec::eval::GoldLabels{} : vizrec::eval::read_gold_csv(cfg.gold);
    const auto corpus = vizrec::eval::prepare_corpus(cfg);
    const auto triplets = vizrec::eval::obtain_triplets(cfg, corpus);
    const auto report = vizrec::eval::run_agreement(cfg, corpus, triplets, judgements, gold);
    const auto body = report.to_json().dump(1) + "\n";
    if (cfg.report.empty()) {
        std::cout << body;
        std::cerr << report.console_table();
    } else {
        vizrec::io::write_file_bytes(cfg.report, body);
        std::cout << report.console_table();
    }
    return kOk;
}

int cmd_serve(const Flags& f) {
    const auto cfg = assemble(f);
    require_bundle(cfg);
    vizrec::config::validate(cfg, false);
    const auto bundle = vizrec::service::Bundle::load(cfg.bundle);
    vizrec::service::ServerOptions so;
    so.host = cfg.host;
    so.port = cfg.port;
    so.cors_origin = cfg.cors_origin;
    vizrec::service::Server server(bundle, so);
    const int port = server.bind();
    fmt::print("listening on http://{}:{}\n", cfg.host, port);
    std::fflush(stdout);
    server.listen();
    return kOk;
}

int cmd_search(const Flags& f) {
    const auto cfg = assemble(f);
    require_bundle(cfg);
    const auto bundle = vizrec::service::Bundle::load(cfg.bundle);
    if (f.json) {
        std::cout << vizrec::service::Api(bundle).search(f.query, f.limit).dump(1) << "\n";
        return kOk;
    }
    const auto hits = vizrec::service::search(bundle, f.query, f.limit);
    if (hits.empty()) {
        fmt::print("no matches for '{}'\n", f.query);
        return kOk;
    }
    fmt::print("{:>4}  {:>7}  {:<16}  {}\n", "rank", "score", "id", "title");
    for (std::size_t i = 0; i < hits.size(); ++i) {
        const auto& m = bundle.at(hits[i].id);
        fmt::print("{:>4}  {:>7.4f}  {:<16}  {}{}\n", i + 1, hits[i].score, m.id, m.title,
                   hits[i].author_match ? fmt::format("  (author: {})", m.author) : "");
    }
    return kOk;
}

void init_logging() {
    auto logger = spdlog::stderr_color_mt("vizrec");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::info);
    if (const char* level = std::getenv("VIZREC_LOG_LEVEL")) spdlog::set_level(spdlog::level::from_str(level));
}

}  // namespace

int main(int argc, char** argv) {
    init_logging();
    CLI::App app{"Content-based recommendations for visualization workbook repositories"};
    app.require_subcommand(1);
    Flags f;

    auto* build = app.add_subcommand("build", "Build an index bundle from a workbook repository");
    add_common(build, f);
    build->add_option("--repo", f.repo, "Repository root");
    build->add_option("--bundle,-o", f.bundle, "Output bundle directory");
    build->add_option("--seed", f.seed, "Random seed (required)");
    build->add_option("--report", f.report, "Build report path (default <bundle>.report.json)");

    auto* triplets = app.add_subcommand("triplets", "Sample evaluation triplets and write them as CSV");
    add_common(triplets, f);
    triplets->add_option("--repo", f.repo, "Repository root");
    triplets->add_option("--seed", f.seed, "Random seed (required)");
    triplets->add_option("-n,--count", f.n, "Number of triplets");
    triplets->add_option("--out", f.out, "Output CSV (default stdout)");

    auto* eval = app.add_subcommand("eval", "Score models against judgements and write an agreement report");
    add_common(eval, f);
    eval->add_option("--repo", f.repo, "Repository root");
    eval->add_option("--seed", f.seed, "Random seed (required)");
    eval->add_option("--judgements", f.judgements, "Judgement CSV (triplet_id,rater_id,choice)");
    eval->add_option("--gold", f.gold, "Gold label CSV (triplet_id,choice)");
    eval->add_option("--triplets-file", f.triplets_file, "Use these triplets instead of sampling");
    eval->add_option("--models", f.models, "Comma-separated model tags, e.g. tfidf,lsi-150,lda-15");
    eval->add_option("--report", f.report, "Report JSON path (default stdout)");

    auto* serve = app.add_subcommand("serve", "Serve a bundle over HTTP");
    add_common(serve, f);
    serve->add_option("--bundle", f.bundle, "Bundle directory");
    serve->add_option("--host", f.host, "Bind address");
    serve->add_option("--port", f.port, "Port (0 picks a free one)");
    serve->add_option("--cors-origin", f.cors_origin, "Access-Control-Allow-Origin value");

    auto* search = app.add_subcommand("search", "Search a bundle by keywords or author");
    add_common(search, f);
    search->add_option("--bundle", f.bundle, "Bundle directory");
    search->add_option("query", f.query, "Query text")->required();
    search->add_option("--limit", f.limit, "Maximum results");
    search->add_flag("--json", f.json, "Print the HTTP-equivalent JSON body");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*build) return cmd_build(f);
        if (*triplets) return cmd_triplets(f);
        if (*eval) return cmd_eval(f);
        if (*serve) return cmd_serve(f);
        if (*search) return cmd_search(f);
    } catch (const UsageError& e) {
        spdlog::error("{}", e.what());
        std::cerr << "run `vizrec <command> --help` for usage\n";
        return kUsage;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InsufficientCorpus) {
            spdlog::error("{} (lower `triplets`, loosen the exclusion list or add documents)", e.what());
            return kRuntimeFailure;
        }
        spdlog::error("{}", e.what());
        return e.code() == ErrorCode::InvalidConfig ? kUsage : kRuntimeFailure;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kRuntimeFailure;
    }
    return kUsage;
}
