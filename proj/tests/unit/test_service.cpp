#include <doctest.h>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <fstream>
#include <httplib.h>
#include <json.hpp>

#include "helpers.hpp"
#include "linevox/server.hpp"
#include "linevox/service.hpp"

using namespace linevox;
using nlohmann::json;
using namespace std::chrono_literals;

namespace {

struct Collector {
    std::mutex mutex;
    std::vector<OutMessage> messages;

    Session::Sink sink() {
        return [this](OutMessage m) {
            std::lock_guard lk(mutex);
            messages.push_back(std::move(m));
        };
    }
    std::vector<OutMessage> take() {
        std::lock_guard lk(mutex);
        return std::exchange(messages, {});
    }
};

std::vector<json> texts(const std::vector<OutMessage>& ms) {
    std::vector<json> out;
    for (const auto& m : ms)
        if (!m.binary) out.push_back(json::parse(m.text));
    return out;
}

std::vector<FrameHeader> frames(const std::vector<OutMessage>& ms) {
    std::vector<FrameHeader> out;
    for (const auto& m : ms)
        if (m.binary) out.push_back(decode_frame_header(m.data));
    return out;
}

std::filesystem::path small_obj() {
    const auto path = testing::temp_path("service_scene.obj");
    std::ofstream f(path);
    f << "v 0 0 0\nv 1 0.2 0.1\nv 2 1 0.5\nv 3 1.5 1\nl 1 2 3 4\n"
         "v 0 1 1\nv 1 1.2 0.4\nv 2 0.3 0\nl 5 6 7\n";
    return path;
}

SessionOptions small_options() {
    SessionOptions o;
    o.width = 48;
    o.height = 32;
    o.threads = 1;
    o.voxelize.grid = 16;
    return o;
}

std::string camera_msg(double x, int w, int h) {
    return json{{"type", "camera"}, {"pos", {x, -20, 10}}, {"target", {8, 4, 4}}, {"width", w}, {"height", h}}.dump();
}

}  // namespace

TEST_CASE("frame header round trip") {
    Image img(3, 2);
    img.set(1, 1, {1, 0, 0, 1});
    const auto bytes = encode_frame_message(77, img, FrameFormat::rgba8);
    REQUIRE(bytes.size() == 9 + 3 * 2 * 4);
    const auto h = decode_frame_header(bytes);
    CHECK(h.frame_id == 77);
    CHECK(h.width == 3);
    CHECK(h.height == 2);
    CHECK(h.format == FrameFormat::rgba8);
    CHECK(std::equal(img.rgba.begin(), img.rgba.end(), bytes.begin() + long(h.payload_offset)));
    // little-endian id
    CHECK(bytes[0] == 77);
    CHECK(bytes[1] == 0);

    CHECK_THROWS_AS(decode_frame_header({1, 2, 3}), std::invalid_argument);
    auto bad = bytes;
    bad[8] = 9;
    CHECK_THROWS_AS(decode_frame_header(bad), std::invalid_argument);
}

TEST_CASE("session: loadScene then requestFrame") {
    Collector c;
    Session s(small_options(), c.sink());
    s.handle_message(json{{"type", "loadScene"}, {"path", small_obj().string()}}.dump());
    REQUIRE(s.wait_idle(20s));
    auto loaded = texts(c.take());
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0]["type"] == "sceneLoaded");
    CHECK(loaded[0]["segments"].get<int>() > 0);

    s.handle_message(R"({"type":"requestFrame"})");
    REQUIRE(s.wait_idle(20s));
    const auto out = c.take();
    const auto fs = frames(out);
    REQUIRE(fs.size() == 1);
    CHECK(fs[0].frame_id == 1);
    CHECK(fs[0].width == 48);
    CHECK(fs[0].height == 32);
    const auto st = texts(out);
    REQUIRE(st.size() == 1);
    CHECK(st[0]["type"] == "stats");
    CHECK(st[0]["frameId"] == 1);
    CHECK(st[0]["quality"] == "still");
}

TEST_CASE("session: camera bursts coalesce and a still frame follows") {
    Collector c;
    auto opts = small_options();
    Session s(opts, c.sink());
    s.handle_message(json{{"type", "loadScene"}, {"path", small_obj().string()}}.dump());
    REQUIRE(s.wait_idle(20s));
    c.take();

    const auto t0 = std::chrono::steady_clock::now();
    s.handle_message(camera_msg(-10, 64, 48));
    s.handle_message(camera_msg(-12, 40, 24));
    REQUIRE(s.wait_idle(20s));
    const auto elapsed = std::chrono::steady_clock::now() - t0;
    const auto out = c.take();
    const auto st = texts(out);
    REQUIRE(st.size() == frames(out).size());
    int moving = 0, still = 0;
    for (const auto& j : st) {
        REQUIRE(j["type"] == "stats");
        if (j["quality"] == "moving") {
            ++moving;
            CHECK(j["width"] == 20);
            CHECK(j["height"] == 12);
        } else {
            ++still;
            CHECK(j["width"] == 40);
            CHECK(j["height"] == 24);
        }
    }
    // the first camera's frame, if it started, was superseded and dropped
    CHECK(moving == 1);
    CHECK(still == 1);
    CHECK(st.back()["quality"] == "still");
    CHECK(elapsed >= opts.still_delay);
    // ids keep increasing across emitted frames
    const auto fs = frames(out);
    for (std::size_t i = 0; i + 1 < fs.size(); ++i) CHECK(fs[i].frame_id < fs[i + 1].frame_id);
}

TEST_CASE("session: bad input yields errors and the session keeps working") {
    Collector c;
    Session s(small_options(), c.sink());
    s.handle_message(R"({"type":"teleport"})");
    s.handle_message("{not json");
    s.handle_message(R"({"type":"params","tau":7})");
    s.handle_message(R"({"type":"params","colour":1})");
    s.handle_message(R"({"type":"requestFrame"})");
    REQUIRE(s.wait_idle(20s));
    auto errs = texts(c.take());
    REQUIRE(errs.size() == 5);
    for (const auto& e : errs) CHECK(e["type"] == "error");
    CHECK(errs[0]["message"].get<std::string>().find("teleport") != std::string::npos);
    CHECK(errs[4]["message"] == "no scene loaded");

    s.handle_message(R"({"type":"loadScene","path":"/nonexistent/file.obj"})");
    REQUIRE(s.wait_idle(20s));
    auto failed = texts(c.take());
    REQUIRE(failed.size() == 1);
    CHECK(failed[0]["type"] == "error");

    s.handle_message(json{{"type", "loadScene"}, {"path", small_obj().string()}}.dump());
    s.handle_message(R"({"type":"requestFrame"})");
    REQUIRE(s.wait_idle(20s));
    CHECK(frames(c.take()).size() == 1);
}

TEST_CASE("server: websocket protocol and static http") {
    ServerOptions o;
    o.port = 0;
    o.http_port = 0;
    o.session = small_options();
    Server server(o);
    server.start();
    REQUIRE(server.port() != 0);
    REQUIRE(server.http_port() != 0);

    namespace beast = boost::beast;
    namespace ws = beast::websocket;
    boost::asio::io_context ioc;
    boost::asio::ip::tcp::resolver resolver(ioc);
    ws::stream<boost::asio::ip::tcp::socket> sock(ioc);
    boost::asio::connect(sock.next_layer(), resolver.resolve("127.0.0.1", std::to_string(server.port())));
    sock.handshake("127.0.0.1", "/");

    auto read = [&](bool& binary) {
        beast::flat_buffer buf;
        sock.read(buf);
        binary = sock.got_binary();
        const auto bytes = static_cast<const std::uint8_t*>(buf.data().data());
        return std::vector<std::uint8_t>(bytes, bytes + buf.size());
    };

    sock.text(true);
    sock.write(boost::asio::buffer(json{{"type", "loadScene"}, {"path", small_obj().string()}}.dump()));
    bool binary = false;
    auto msg = read(binary);
    REQUIRE_FALSE(binary);
    const auto loaded = json::parse(msg.begin(), msg.end());
    CHECK(loaded["type"] == "sceneLoaded");

    sock.write(boost::asio::buffer(std::string(R"({"type":"requestFrame"})")));
    msg = read(binary);
    REQUIRE(binary);
    const auto h = decode_frame_header(msg);
    CHECK(h.frame_id == 1);
    CHECK(h.width == 48);
    msg = read(binary);
    REQUIRE_FALSE(binary);
    CHECK(json::parse(msg.begin(), msg.end())["type"] == "stats");
    sock.close(ws::close_code::normal);

    httplib::Client http("127.0.0.1", server.http_port());
    const auto res = http.Get("/");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->body.find("<html") != std::string::npos);
    CHECK(http.Get("/missing.js")->status == 404);

    server.stop();
}
