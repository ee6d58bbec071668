#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "linevox/pipeline.hpp"
#include "linevox/render.hpp"

namespace linevox {

/// Outbound message: JSON text or a binary frame.
struct OutMessage {
    bool binary = false;
    std::string text;
    std::vector<std::uint8_t> data;
};

enum class FrameFormat : std::uint8_t { rgba8 = 0, png = 1 };

/// u32 frame id, u16 width, u16 height, u8 format, payload (all little-endian).
std::vector<std::uint8_t> encode_frame_message(std::uint32_t frame_id, const Image& image, FrameFormat format);

struct FrameHeader {
    std::uint32_t frame_id = 0;
    std::uint16_t width = 0, height = 0;
    FrameFormat format = FrameFormat::rgba8;
    std::size_t payload_offset = 9;
};
/// Throws std::invalid_argument on a short buffer or unknown format.
FrameHeader decode_frame_header(const std::vector<std::uint8_t>& data);

struct SessionOptions {
    int width = 640, height = 360;
    int moving_divisor = 2;                          // resolution divisor while the camera moves
    std::chrono::milliseconds still_delay{300};      // camera silence before the refined frame
    int threads = 0;
    VoxelizeOptions voxelize;                        // for curve files and built-in scenes
    std::filesystem::path scene_root;                // relative scene paths resolve here
};

/// One client's state. Intake (handle_message) only records state and wakes the render worker,
/// so it never waits for a frame. Frames for superseded camera/params epochs are dropped.
class Session {
public:
    using Sink = std::function<void(OutMessage)>;

    Session(SessionOptions options, Sink sink);
    ~Session();
    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;

    void handle_message(const std::string& text);
    /// Installs a scene directly (as loadScene would) and resets the camera to the default orbit view.
    void set_scene(std::shared_ptr<const Scene> scene);

    /// Blocks until the worker has nothing scheduled (tests and shutdown).
    bool wait_idle(std::chrono::milliseconds timeout);

private:
    enum class Quality { moving, still };
    struct Job {
        std::shared_ptr<const Scene> scene;
        Camera camera;
        RenderParams params;
        Quality quality;
        std::uint64_t epoch;
    };

    void worker_loop();
    void error(const std::string& message, std::optional<std::uint32_t> frame_id = std::nullopt);
    void mark_motion_locked();
    void render_job(const Job& job);

    SessionOptions options_;
    Sink sink_;

    std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable idle_;
    bool stop_ = false;
    bool busy_ = false;
    std::shared_ptr<const Scene> scene_;
    std::optional<std::string> pending_load_;
    Camera camera_;
    RenderParams params_;
    std::uint64_t epoch_ = 0;          // bumped by every camera/params/scene change
    bool moving_frame_due_ = false;
    bool still_due_ = false;           // set on motion, cleared when the refined frame is emitted
    bool frame_requested_ = false;
    std::chrono::steady_clock::time_point last_input_{};
    std::uint32_t next_frame_id_ = 1;
    std::thread worker_;
};

}  // namespace linevox
