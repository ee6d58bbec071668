#pragma once

#include <atomic>
#include <filesystem>
#include <memory>

#include "linevox/service.hpp"

namespace linevox {

struct ServerOptions {
    std::string host = "127.0.0.1";
    unsigned short port = 9870;       // WebSocket; 0 picks a free port
    unsigned short http_port = 9871;  // static viewer bundle; 0 picks a free port
    bool serve_http = true;
    std::filesystem::path web_root;   // viewer bundle directory; built-in index page when empty/missing
    SessionOptions session;
};

/// WebSocket render service (one Session per connection) plus a static file server.
class Server {
public:
    explicit Server(ServerOptions options);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds both listeners and starts serving on background threads.
    void start();
    /// Blocks until stop() is called (from another thread or a signal handler).
    void wait();
    void stop();

    unsigned short port() const;
    unsigned short http_port() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace linevox
