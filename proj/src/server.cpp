#include "linevox/server.hpp"

#include <deque>
#include <functional>
#include <iostream>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <httplib.h>

namespace linevox {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

namespace {

constexpr const char* kIndexPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>linevox</title></head>
<body>
<h1>linevox render service</h1>
<p>No viewer bundle configured (start with <code>--web-root DIR</code>).</p>
<p>Protocol: WebSocket on the service port. Text messages are JSON
(<code>loadScene</code>, <code>camera</code>, <code>params</code>, <code>requestFrame</code>);
frames arrive as binary messages (u32 frame id, u16 width, u16 height, u8 format, payload).</p>
</body></html>
)";

// One WebSocket connection. All socket operations run on the connection's strand; the session's
// render worker hands messages over through post().
class Connection : public std::enable_shared_from_this<Connection> {
public:
    using Retire = std::function<void(std::unique_ptr<Session>)>;

    Connection(tcp::socket socket, const SessionOptions& options, Retire retire)
        : ws_(std::move(socket)), options_(options), retire_(std::move(retire)) {}

    void run() {
        ws_.binary(false);
        ws_.async_accept(net::bind_executor(ws_.get_executor(), [self = shared_from_this()](beast::error_code ec) {
            if (ec) return;
            std::weak_ptr<Connection> weak = self;
            self->session_ = std::make_unique<Session>(self->options_, [weak](OutMessage m) {
                if (auto c = weak.lock()) c->send(std::move(m));
            });
            self->read();
        }));
    }

    void close() {
        net::post(ws_.get_executor(), [self = shared_from_this()] {
            beast::error_code ec;
            beast::get_lowest_layer(self->ws_).socket().shutdown(tcp::socket::shutdown_both, ec);
            beast::get_lowest_layer(self->ws_).close();
        });
    }

private:
    void read() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->shutdown();
                return;
            }
            if (self->ws_.got_text()) {
                self->session_->handle_message(beast::buffers_to_string(self->buffer_.data()));
            } else {
                self->send(OutMessage{false, R"({"type":"error","message":"binary client messages are not supported"})", {}});
            }
            self->buffer_.consume(self->buffer_.size());
            self->read();
        });
    }

    void send(OutMessage m) {
        net::post(ws_.get_executor(), [self = shared_from_this(), m = std::move(m)]() mutable {
            self->queue_.push_back(std::move(m));
            if (self->queue_.size() == 1) self->write();
        });
    }

    void write() {
        OutMessage& m = queue_.front();
        ws_.binary(m.binary);
        const auto done = [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) return;
            self->queue_.pop_front();
            if (!self->queue_.empty()) self->write();
        };
        if (m.binary) ws_.async_write(net::buffer(m.data), done);
        else ws_.async_write(net::buffer(m.text), done);
    }

    void shutdown() {
        if (session_) retire_(std::move(session_));
    }

public:
    /// Called once the I/O loop has stopped.
    std::unique_ptr<Session> take_session() { return std::move(session_); }

private:

    websocket::stream<beast::tcp_stream> ws_;
    SessionOptions options_;
    beast::flat_buffer buffer_;
    std::deque<OutMessage> queue_;
    Retire retire_;
    std::unique_ptr<Session> session_;
};

}  // namespace

struct Server::Impl {
    ServerOptions options;
    net::io_context io;
    tcp::acceptor acceptor{io};
    httplib::Server http;
    std::thread io_thread, http_thread;
    int http_bound = 0;
    std::mutex mutex;
    std::condition_variable stopped_cv;
    bool stopped = false;
    std::vector<std::weak_ptr<Connection>> connections;
    std::vector<std::thread> retiring;

    // destroying a session joins its render worker; keep that off the I/O thread
    void retire(std::unique_ptr<Session> s) {
        std::lock_guard lk(mutex);
        retiring.emplace_back([s = std::move(s)]() mutable { s.reset(); });
    }

    void accept() {
        acceptor.async_accept(net::make_strand(io), [this](beast::error_code ec, tcp::socket socket) {
            if (ec) return;
            auto c = std::make_shared<Connection>(std::move(socket), options.session,
                                                  [this](std::unique_ptr<Session> s) { retire(std::move(s)); });
            {
                std::lock_guard lk(mutex);
                connections.push_back(c);
            }
            c->run();
            accept();
        });
    }
};

Server::Server(ServerOptions options) : impl_(std::make_unique<Impl>()) { impl_->options = std::move(options); }

Server::~Server() { stop(); }

void Server::start() {
    auto& d = *impl_;
    const auto address = net::ip::make_address(d.options.host);
    const tcp::endpoint ep{address, d.options.port};
    d.acceptor.open(ep.protocol());
    d.acceptor.set_option(net::socket_base::reuse_address(true));
    d.acceptor.bind(ep);
    d.acceptor.listen();
    d.accept();
    d.io_thread = std::thread([&d] { d.io.run(); });

    if (d.options.serve_http) {
        const auto root = d.options.web_root;
        if (!root.empty() && std::filesystem::is_directory(root)) d.http.set_mount_point("/", root.string());
        else
            d.http.Get("/", [](const httplib::Request&, httplib::Response& res) {
                res.set_content(kIndexPage, "text/html");
            });
        d.http_bound = d.options.http_port == 0 ? d.http.bind_to_any_port(d.options.host)
                                                : (d.http.bind_to_port(d.options.host, d.options.http_port)
                                                       ? d.options.http_port
                                                       : -1);
        if (d.http_bound < 0) {
            stop();
            throw std::runtime_error("cannot bind HTTP port " + std::to_string(d.options.http_port));
        }
        d.http_thread = std::thread([&d] { d.http.listen_after_bind(); });
    }
}

void Server::wait() {
    std::unique_lock lk(impl_->mutex);
    impl_->stopped_cv.wait(lk, [this] { return impl_->stopped; });
}

void Server::stop() {
    auto& d = *impl_;
    {
        std::lock_guard lk(d.mutex);
        if (d.stopped) return;
        d.stopped = true;
        for (auto& w : d.connections)
            if (auto c = w.lock()) c->close();
    }
    d.stopped_cv.notify_all();
    net::post(d.io, [&d] {
        beast::error_code ec;
        d.acceptor.close(ec);
    });
    d.http.stop();
    if (d.http_thread.joinable()) d.http_thread.join();
    // let pending closes finish, then end the loop
    net::post(d.io, [&d] { d.io.stop(); });
    if (d.io_thread.joinable()) d.io_thread.join();
    std::vector<std::shared_ptr<Connection>> live;
    std::vector<std::thread> retiring;
    {
        std::lock_guard lk(d.mutex);
        for (auto& w : d.connections)
            if (auto c = w.lock()) live.push_back(std::move(c));
        retiring.swap(d.retiring);
    }
    for (auto& c : live) c->take_session().reset();
    for (auto& t : retiring) t.join();
}

unsigned short Server::port() const { return impl_->acceptor.local_endpoint().port(); }
unsigned short Server::http_port() const { return static_cast<unsigned short>(impl_->http_bound); }

}  // namespace linevox
