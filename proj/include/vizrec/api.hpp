#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "vizrec/index.hpp"

namespace httplib {
class Server;
}

namespace vizrec::service {

struct ApiOptions {
    std::size_t default_limit = 24;
    std::size_t max_limit = 100;
    std::size_t quick_view = 5;  // recommendations per facet in the detail payload
};

struct ApiResponse {
    int status = 200;
    nlohmann::json body;
};

/// JSON views over a loaded bundle, one per endpoint. Each method is a thin
/// shell around the library call it names.
class Api {
public:
    explicit Api(const Bundle& bundle, ApiOptions options = {});

    nlohmann::json list_workbooks(std::size_t offset, std::size_t limit) const;
    nlohmann::json workbook(const std::string& id) const;
    nlohmann::json recommendations(const std::string& id, similarity::Facet facet, std::size_t limit,
                                   std::size_t offset) const;
    nlohmann::json group(const std::string& id) const;
    nlohmann::json search(const std::string& query, std::size_t limit) const;
    nlohmann::json tags() const;
    nlohmann::json tag_workbooks(const std::string& tag, std::size_t offset, std::size_t limit) const;
    nlohmann::json healthz() const;

    /// Dispatches a GET by path and decoded query parameters. Errors become
    /// {code, message} bodies: 404 for unknown workbooks and routes, 400 for
    /// bad parameters and facets.
    ApiResponse route(const std::string& path, const std::multimap<std::string, std::string>& params) const;

    const ApiOptions& options() const { return options_; }

private:
    const Bundle& bundle_;
    ApiOptions options_;
};

struct ServerOptions {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    std::string cors_origin = "*";
    ApiOptions api;
};

/// Read-only HTTP front end for an Api.
class Server {
public:
    Server(const Bundle& bundle, ServerOptions options);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds the socket; throws BindFailure. Returns the bound port.
    int bind();
    /// Serves until stop(); bind() first.
    void listen();
    /// bind() + listen() on a background thread.
    int start_background();
    void stop();

private:
    Api api_;
    ServerOptions options_;
    std::unique_ptr<httplib::Server> http_;
    std::thread thread_;
    int port_ = -1;
};

}  // namespace vizrec::service
