#include <catch_amalgamated.hpp>

#include <csignal>
#include <cstdio>
#include <sys/wait.h>
#include <unistd.h>

#include <fmt/format.h>
#include <httplib.h>

#include "fixtures.hpp"
#include "synthetic.hpp"
#include "vizrec/api.hpp"

using namespace vizrec;
using nlohmann::json;
using vizrec::testing::fixture_path;
using vizrec::testing::read_text;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

std::string quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
}

Run cli(const std::vector<std::string>& args) {
    static int n = 0;
    const auto dir = fs::temp_directory_path() / fmt::format("vizrec-cli-out-{}-{}", ::getpid(), n++);
    fs::create_directories(dir);
    std::string cmd = quote(VIZREC_CLI);
    for (const auto& a : args) cmd += " " + quote(a);
    cmd += " >" + quote((dir / "out").string()) + " 2>" + quote((dir / "err").string());
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_text(dir / "out");
    r.err = read_text(dir / "err");
    fs::remove_all(dir);
    return r;
}

const fs::path& sample_bundle() {
    static const fs::path dir = [] {
        const auto d = testing::temp_dir("cli-bundle") / "bundle";
        const auto r = cli({"build", "-c", fixture_path("sample.toml").string(), "--repo",
                            fixture_path("sample_repo").string(), "--bundle", d.string()});
        if (r.code != 0) throw std::runtime_error("sample build failed: " + r.err);
        return d;
    }();
    return dir;
}

// Child process running `vizrec serve`; stdout is a pipe so the bound port
// can be read from the first line.
class ServeProcess {
public:
    explicit ServeProcess(const std::vector<std::string>& args) {
        int fds[2];
        REQUIRE(::pipe(fds) == 0);
        pid_ = ::fork();
        REQUIRE(pid_ >= 0);
        if (pid_ == 0) {
            ::dup2(fds[1], STDOUT_FILENO);
            ::close(fds[0]);
            ::close(fds[1]);
            std::vector<std::string> all{VIZREC_CLI, "serve"};
            all.insert(all.end(), args.begin(), args.end());
            std::vector<char*> argv;
            for (auto& a : all) argv.push_back(a.data());
            argv.push_back(nullptr);
            ::execv(VIZREC_CLI, argv.data());
            ::_exit(127);
        }
        ::close(fds[1]);
        out_ = ::fdopen(fds[0], "r");
    }

    std::string first_line() {
        char buf[512] = {};
        if (!std::fgets(buf, sizeof buf, out_)) return {};
        return buf;
    }

    ~ServeProcess() {
        ::kill(pid_, SIGTERM);
        int status = 0;
        ::waitpid(pid_, &status, 0);
        std::fclose(out_);
    }

private:
    pid_t pid_ = -1;
    FILE* out_ = nullptr;
};

// Numbers within tolerance, everything else exactly.
bool json_close(const json& a, const json& b) {
    if (a.is_number() && b.is_number()) return std::abs(a.get<double>() - b.get<double>()) <= 1e-12;
    if (a.type() != b.type() || a.size() != b.size()) return false;
    if (a.is_object()) {
        for (const auto& [k, v] : b.items()) {
            if (!a.contains(k) || !json_close(a[k], v)) return false;
        }
        return true;
    }
    if (a.is_array()) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (!json_close(a[i], b[i])) return false;
        }
        return true;
    }
    return a == b;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
    CHECK(cli({}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
    CHECK(cli({"build", "--no-such-flag"}).code == 2);
    CHECK(cli({"--help"}).code == 0);

    const auto missing = cli({"build", "--repo", "/nonexistent/repo", "--bundle", "/tmp/x", "--seed", "1"});
    CHECK(missing.code == 2);
    CHECK_THAT(missing.err, Catch::Matchers::ContainsSubstring("/nonexistent/repo"));

    const auto no_seed = cli({"build", "--repo", fixture_path("sample_repo").string(), "--bundle",
                              (testing::temp_dir("noseed") / "b").string()});
    CHECK(no_seed.code == 2);
    CHECK_THAT(no_seed.err, Catch::Matchers::ContainsSubstring("seed"));

    CHECK(cli({"build", "-c", "/nonexistent.toml"}).code == 2);
    CHECK(cli({"build", "--set", "nonsense"}).code == 2);
    CHECK(cli({"serve", "--bundle", "/nonexistent/bundle"}).code == 2);
    CHECK(cli({"search", "--bundle", "/nonexistent/bundle", "olympic"}).code == 2);
}

TEST_CASE("build reports exclusions and is repeatable") {
    const auto dir = testing::temp_dir("cli-build");
    const auto r = cli({"build", "-c", fixture_path("sample.toml").string(), "--repo", fixture_path("sample_repo").string(),
                        "--bundle", (dir / "a").string()});
    REQUIRE(r.code == 0);
    CHECK_THAT(r.out, Catch::Matchers::ContainsSubstring("9 eligible"));
    CHECK_THAT(r.out, Catch::Matchers::ContainsSubstring("1 no_marks"));
    CHECK_THAT(r.out, Catch::Matchers::ContainsSubstring("1 non_english"));
    CHECK_THAT(r.out, Catch::Matchers::ContainsSubstring("1 too_few_words"));
    const auto report = json::parse(read_text(dir / "a.report.json"));
    CHECK(report["excluded"]["too_few_words"] == 1);

    const auto again = cli({"build", "-c", fixture_path("sample.toml").string(), "--repo",
                            fixture_path("sample_repo").string(), "--bundle", (dir / "b").string(), "--workers", "2"});
    REQUIRE(again.code == 0);
    CHECK(read_text(dir / "a/manifest.json") == read_text(dir / "b/manifest.json"));
}

TEST_CASE("build with nothing eligible exits with 1") {
    const auto repo = testing::temp_dir("cli-empty");
    fs::copy(fixture_path("sample_repo/misc/tiny.twb"), repo / "tiny.twb");
    const auto r = cli({"build", "--repo", repo.string(), "--bundle", (repo.parent_path() / "cli-empty-b").string(),
                        "--seed", "1"});
    CHECK(r.code == 1);
    CHECK_THAT(r.err, Catch::Matchers::ContainsSubstring("EmptyCorpus"));
}

TEST_CASE("search output follows the library order") {
    const auto bundle = service::Bundle::load(sample_bundle());
    const auto r = cli({"search", "--bundle", sample_bundle().string(), "--json", "--limit", "10", "olympic medals"});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out) == service::Api(bundle).search("olympic medals", 10));

    const auto text = cli({"search", "--bundle", sample_bundle().string(), "olympic medals"});
    REQUIRE(text.code == 0);
    std::size_t pos = 0;
    for (const auto& hit : service::search(bundle, "olympic medals", 10)) {
        const auto at = text.out.find(hit.id, pos);
        CHECK(at != std::string::npos);
        pos = at;
    }
    CHECK_THAT(cli({"search", "--bundle", sample_bundle().string(), "zzzyzx"}).out,
               Catch::Matchers::ContainsSubstring("no matches"));
}

TEST_CASE("serve answers health checks") {
    ServeProcess serve({"--bundle", sample_bundle().string(), "--port", "0"});
    const auto line = serve.first_line();
    REQUIRE_THAT(line, Catch::Matchers::StartsWith("listening on http://127.0.0.1:"));
    const int port = std::stoi(line.substr(line.rfind(':') + 1));
    httplib::Client client("127.0.0.1", port);
    const auto res = client.Get("/healthz");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(json::parse(res->body)["status"] == "ok");
}

TEST_CASE("serve on a busy port exits with 1") {
    const auto bundle = service::Bundle::load(sample_bundle());
    service::Server holder(bundle, service::ServerOptions{.host = "127.0.0.1", .port = 0});
    const int port = holder.start_background();
    const auto r = cli({"serve", "--bundle", sample_bundle().string(), "--port", std::to_string(port)});
    CHECK(r.code == 1);
    CHECK_THAT(r.err, Catch::Matchers::ContainsSubstring("BindFailure"));
    holder.stop();
}

TEST_CASE("eval reproduces the pinned fixture report") {
    const auto out = testing::temp_dir("cli-eval") / "report.json";
    const auto r = cli({"eval", "-c", fixture_path("eval/eval.toml").string(), "--repo",
                        fixture_path("eval/repo").string(), "--triplets-file", fixture_path("eval/triplets.csv").string(),
                        "--judgements", fixture_path("eval/judgements.csv").string(), "--gold",
                        fixture_path("eval/gold.csv").string(), "--report", out.string()});
    REQUIRE(r.code == 0);
    CHECK_THAT(r.out, Catch::Matchers::ContainsSubstring("lda-8"));
    CHECK(json_close(json::parse(read_text(out)), testing::load_fixture_json("eval/report.json")));
}

TEST_CASE("eval over an LDA grid gives one column per k") {
    const auto r = cli({"eval", "-c", fixture_path("eval/eval.toml").string(), "--repo",
                        fixture_path("eval/repo").string(), "--triplets-file", fixture_path("eval/triplets.csv").string(),
                        "--judgements", fixture_path("eval/judgements.csv").string(), "--models",
                        "[\"lda-15\", \"lda-30\", \"lda-75\", \"lda-150\"]", "--set", "lda_iterations=50"});
    REQUIRE(r.code == 0);
    const auto report = json::parse(r.out);
    CHECK(report["model_matrix"]["tags"] == json{"lda-15", "lda-30", "lda-75", "lda-150"});
    REQUIRE(report["models"].size() == 4);
    for (const auto& m : report["models"]) CHECK(m["predictions"].size() == 30);
}

TEST_CASE("eval with an unknown model tag exits with 2 naming it") {
    const auto r = cli({"eval", "-c", fixture_path("eval/eval.toml").string(), "--repo",
                        fixture_path("eval/repo").string(), "--judgements", fixture_path("eval/judgements.csv").string(),
                        "--models", "[\"tfidf\", \"lda-forty\"]"});
    CHECK(r.code == 2);
    CHECK_THAT(r.err, Catch::Matchers::ContainsSubstring("lda-forty"));
}

TEST_CASE("triplets command writes the sampled set") {
    const auto r = cli({"triplets", "-c", fixture_path("eval/eval.toml").string(), "--repo",
                        fixture_path("eval/repo").string()});
    REQUIRE(r.code == 0);
    CHECK(r.out == read_text(fixture_path("eval/triplets.csv")));
    const auto too_many = cli({"triplets", "-c", fixture_path("eval/eval.toml").string(), "--repo",
                               fixture_path("eval/repo").string(), "-n", "500"});
    CHECK(too_many.code == 1);
    CHECK_THAT(too_many.err, Catch::Matchers::ContainsSubstring("InsufficientCorpus"));
}
