#include "vizrec/api.hpp"

#include <charconv>

#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include "vizrec/error.hpp"

namespace vizrec::service {

using nlohmann::json;

Api::Api(const Bundle& bundle, ApiOptions options) : bundle_(bundle), options_(options) {}

namespace {

json page_json(std::size_t total, std::size_t offset, std::size_t limit, json items) {
    return {{"total", total}, {"offset", offset}, {"limit", limit}, {"items", std::move(items)}};
}

}  // namespace

json Api::list_workbooks(std::size_t offset, std::size_t limit) const {
    const auto& all = bundle_.workbooks();
    json items = json::array();
    for (std::size_t i = offset; i < all.size() && i < offset + limit; ++i) items.push_back(all[i].to_json());
    return page_json(all.size(), offset, limit, std::move(items));
}

json Api::workbook(const std::string& id) const {
    const auto& meta = bundle_.at(id);
    json recs = json::object();
    for (auto f : similarity::kAllFacets) {
        json items = json::array();
        for (const auto& r : recommend(bundle_, id, f, options_.quick_view).items) {
            items.push_back({{"workbook", r.workbook->to_json()}, {"score", r.score}});
        }
        recs[std::string(similarity::to_string(f))] = std::move(items);
    }
    const auto* g = bundle_.group_of(id);
    return {{"workbook", meta.to_json()},
            {"recommendations", std::move(recs)},
            {"group_id", g ? json(g->group_id) : json(nullptr)}};
}

json Api::recommendations(const std::string& id, similarity::Facet facet, std::size_t limit,
                          std::size_t offset) const {
    const auto page = recommend(bundle_, id, facet, limit, offset);
    json items = json::array();
    for (const auto& r : page.items) items.push_back({{"workbook", r.workbook->to_json()}, {"score", r.score}});
    auto out = page_json(page.total, offset, limit, std::move(items));
    out["workbook_id"] = id;
    out["facet"] = similarity::to_string(facet);
    return out;
}

json Api::group(const std::string& id) const {
    bundle_.at(id);
    const auto* g = bundle_.group_of(id);
    if (!g) return {{"workbook_id", id}, {"group", nullptr}};
    json members = json::array();
    for (const auto& m : g->member_ids) members.push_back(bundle_.at(m).to_json());
    return {{"workbook_id", id},
            {"group",
             {{"group_id", g->group_id}, {"representative_id", g->representative_id}, {"members", std::move(members)}}}};
}

json Api::search(const std::string& query, std::size_t limit) const {
    json items = json::array();
    for (const auto& h : service::search(bundle_, query, limit)) {
        items.push_back({{"workbook", bundle_.at(h.id).to_json()}, {"score", h.score}, {"author_match", h.author_match}});
    }
    return {{"query", query}, {"items", std::move(items)}};
}

json Api::tags() const {
    json items = json::array();
    for (const auto& t : bundle_.tags()) {
        items.push_back({{"tag", t.tag}, {"weight", t.weight}, {"count", t.workbook_ids.size()}});
    }
    return {{"tags", std::move(items)}};
}

json Api::tag_workbooks(const std::string& tag, std::size_t offset, std::size_t limit) const {
    const auto ids = bundle_.workbooks_with_token(tag);
    json items = json::array();
    for (std::size_t i = offset; i < ids.size() && i < offset + limit; ++i) items.push_back(bundle_.at(ids[i]).to_json());
    auto out = page_json(ids.size(), offset, limit, std::move(items));
    out["tag"] = tag;
    return out;
}

json Api::healthz() const {
    return {{"status", "ok"}, {"format_version", kBundleFormatVersion}, {"workbooks", bundle_.workbooks().size()}};
}

namespace {

std::optional<std::string> param(const std::multimap<std::string, std::string>& params, const std::string& key) {
    const auto it = params.find(key);
    if (it == params.end()) return std::nullopt;
    return it->second;
}

std::size_t parse_count(const std::string& key, const std::string& value) {
    std::size_t v = 0;
    auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (value.empty() || ec != std::errc() || end != value.data() + value.size()) {
        throw Error(ErrorCode::InvalidArgument, fmt::format("{} must be a non-negative integer", key));
    }
    return v;
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= path.size()) {
        const auto slash = path.find('/', start);
        auto part = path.substr(start, slash == std::string::npos ? std::string::npos : slash - start);
        if (!part.empty()) parts.push_back(std::move(part));
        if (slash == std::string::npos) break;
        start = slash + 1;
    }
    return parts;
}

int status_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::UnknownWorkbook: return 404;
    case ErrorCode::UnknownFacet:
    case ErrorCode::InvalidArgument: return 400;
    default: return 500;
    }
}

json error_body(std::string_view code, const std::string& message) { return {{"code", code}, {"message", message}}; }

}  // namespace

ApiResponse Api::route(const std::string& path, const std::multimap<std::string, std::string>& params) const {
    try {
        auto limit = [&] {
            const auto v = param(params, "limit");
            return std::min(v ? parse_count("limit", *v) : options_.default_limit, options_.max_limit);
        };
        auto offset = [&](std::size_t lim) -> std::size_t {
            if (const auto v = param(params, "offset")) return parse_count("offset", *v);
            if (const auto p = param(params, "page")) {
                const auto page = parse_count("page", *p);
                if (page < 1) throw Error(ErrorCode::InvalidArgument, "page starts at 1");
                return (page - 1) * lim;
            }
            return 0;
        };
        const auto parts = split_path(path);
        if (parts.size() == 1 && parts[0] == "healthz") return {200, healthz()};
        if (parts.size() == 1 && parts[0] == "workbooks") {
            const auto lim = limit();
            return {200, list_workbooks(offset(lim), lim)};
        }
        if (parts.size() == 2 && parts[0] == "workbooks") return {200, workbook(parts[1])};
        if (parts.size() == 3 && parts[0] == "workbooks" && parts[2] == "recommendations") {
            const auto name = param(params, "facet");
            if (!name) throw Error(ErrorCode::UnknownFacet, "facet parameter is required (related, versions, similar-data)");
            const auto facet = similarity::facet_from_string(*name);
            if (!facet) throw Error(ErrorCode::UnknownFacet, fmt::format("unknown facet '{}'", *name));
            const auto lim = limit();
            return {200, recommendations(parts[1], *facet, lim, offset(lim))};
        }
        if (parts.size() == 3 && parts[0] == "workbooks" && parts[2] == "group") return {200, group(parts[1])};
        if (parts.size() == 1 && parts[0] == "search") return {200, search(param(params, "q").value_or(""), limit())};
        if (parts.size() == 1 && parts[0] == "tags") return {200, tags()};
        if (parts.size() == 3 && parts[0] == "tags" && parts[2] == "workbooks") {
            const auto lim = limit();
            return {200, tag_workbooks(parts[1], offset(lim), lim)};
        }
        return {404, error_body("NotFound", "no route for " + path)};
    } catch (const Error& e) {
        return {status_for(e.code()), error_body(to_string(e.code()), e.what())};
    }
}

Server::Server(const Bundle& bundle, ServerOptions options)
    : api_(bundle, options.api), options_(std::move(options)), http_(std::make_unique<httplib::Server>()) {
    // SO_REUSEADDR only: httplib's default also sets SO_REUSEPORT, which would
    // let a second server share a busy port instead of failing to bind.
    http_->set_socket_options([](socket_t sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
    });
    const auto origin = options_.cors_origin;
    auto handler = [this, origin](const httplib::Request& req, httplib::Response& res) {
        std::multimap<std::string, std::string> params(req.params.begin(), req.params.end());
        const auto r = api_.route(req.path, params);
        res.status = r.status;
        if (!origin.empty()) res.set_header("Access-Control-Allow-Origin", origin);
        res.set_content(r.body.dump(), "application/json");
    };
    http_->Get(R"(/.*)", handler);
    http_->Options(R"(/.*)", [origin](const httplib::Request&, httplib::Response& res) {
        if (!origin.empty()) {
            res.set_header("Access-Control-Allow-Origin", origin);
            res.set_header("Access-Control-Allow-Methods", "GET, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
        }
        res.status = 204;
    });
}

Server::~Server() { stop(); }

int Server::bind() {
    if (options_.port == 0) {
        port_ = http_->bind_to_any_port(options_.host);
    } else {
        port_ = http_->bind_to_port(options_.host, options_.port) ? options_.port : -1;
    }
    if (port_ < 0) {
        throw Error(ErrorCode::BindFailure, fmt::format("cannot bind {}:{}", options_.host, options_.port));
    }
    return port_;
}

void Server::listen() {
    spdlog::info("serving on http://{}:{}", options_.host, port_);
    http_->listen_after_bind();
}

int Server::start_background() {
    const int port = bind();
    thread_ = std::thread([this] { http_->listen_after_bind(); });
    http_->wait_until_ready();
    return port;
}

void Server::stop() {
    if (http_) http_->stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace vizrec::service
