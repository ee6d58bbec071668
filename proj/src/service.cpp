#include "linevox/service.hpp"

#include <json.hpp>

#include "linevox/config.hpp"

namespace linevox {

using nlohmann::json;

std::vector<std::uint8_t> encode_frame_message(std::uint32_t frame_id, const Image& image, FrameFormat format) {
    std::vector<std::uint8_t> out;
    const auto put = [&out](std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
    };
    put(frame_id, 4);
    put(std::uint16_t(image.width), 2);
    put(std::uint16_t(image.height), 2);
    out.push_back(std::uint8_t(format));
    if (format == FrameFormat::png) {
        const auto png = encode_png(image);
        out.insert(out.end(), png.begin(), png.end());
    } else {
        out.insert(out.end(), image.rgba.begin(), image.rgba.end());
    }
    return out;
}

FrameHeader decode_frame_header(const std::vector<std::uint8_t>& d) {
    if (d.size() < 9) throw std::invalid_argument("frame message shorter than its header");
    FrameHeader h;
    h.frame_id = std::uint32_t(d[0]) | std::uint32_t(d[1]) << 8 | std::uint32_t(d[2]) << 16 | std::uint32_t(d[3]) << 24;
    h.width = std::uint16_t(d[4] | d[5] << 8);
    h.height = std::uint16_t(d[6] | d[7] << 8);
    if (d[8] > 1) throw std::invalid_argument("unknown frame format " + std::to_string(d[8]));
    h.format = FrameFormat(d[8]);
    return h;
}

namespace {

Vec3 vec3_of(const json& j, const char* key) {
    const auto v = j.at(key).get<std::vector<double>>();
    if (v.size() != 3) throw std::invalid_argument(std::string("'") + key + "' needs 3 numbers");
    return {v[0], v[1], v[2]};
}

json camera_json(const Camera& c) {
    return {{"pos", {c.position.x, c.position.y, c.position.z}},
            {"target", {c.target.x, c.target.y, c.target.z}},
            {"up", {c.up.x, c.up.y, c.up.z}},
            {"fov", c.fov_deg}};
}

}  // namespace

Session::Session(SessionOptions options, Sink sink) : options_(std::move(options)), sink_(std::move(sink)) {
    camera_.width = options_.width;
    camera_.height = options_.height;
    params_.neighbor_mode = NeighborMode::automatic;
    worker_ = std::thread([this] { worker_loop(); });
}

Session::~Session() {
    {
        std::lock_guard lk(mutex_);
        stop_ = true;
    }
    wake_.notify_all();
    worker_.join();
}

void Session::error(const std::string& message, std::optional<std::uint32_t> frame_id) {
    json j{{"type", "error"}, {"message", message}};
    if (frame_id) j["frameId"] = *frame_id;
    sink_(OutMessage{false, j.dump(), {}});
}

void Session::mark_motion_locked() {
    ++epoch_;
    last_input_ = std::chrono::steady_clock::now();
    moving_frame_due_ = true;
    still_due_ = true;
}

void Session::set_scene(std::shared_ptr<const Scene> scene) {
    {
        std::lock_guard lk(mutex_);
        const Camera view = orbit_camera(scene->model.spec, -35.0, options_.width, options_.height);
        scene_ = std::move(scene);
        camera_ = view;
        ++epoch_;
    }
    wake_.notify_all();
}

void Session::handle_message(const std::string& text) {
    json msg;
    try {
        msg = json::parse(text);
    } catch (const json::parse_error& e) {
        error(std::string("malformed message: ") + e.what());
        return;
    }
    const std::string type = msg.is_object() && msg.contains("type") && msg["type"].is_string() ? msg["type"] : "";
    try {
        if (type == "loadScene") {
            std::string target;
            if (msg.contains("path")) target = msg["path"].get<std::string>();
            else if (msg.contains("name")) target = msg["name"].get<std::string>();
            else throw std::invalid_argument("loadScene needs 'name' or 'path'");
            if (msg.contains("path") && !options_.scene_root.empty() && std::filesystem::path(target).is_relative())
                target = (options_.scene_root / target).string();
            std::lock_guard lk(mutex_);
            pending_load_ = target;
        } else if (type == "camera") {
            std::lock_guard lk(mutex_);
            Camera c = camera_;
            c.position = vec3_of(msg, "pos");
            c.target = vec3_of(msg, "target");
            if (msg.contains("up")) c.up = vec3_of(msg, "up");
            if (msg.contains("fov")) c.fov_deg = msg["fov"].get<double>();
            if (msg.contains("width")) c.width = msg["width"].get<int>();
            if (msg.contains("height")) c.height = msg["height"].get<int>();
            c.validate();
            camera_ = c;
            mark_motion_locked();
        } else if (type == "params") {
            json fields = msg.contains("params") ? msg["params"] : msg;
            fields.erase("type");
            std::lock_guard lk(mutex_);
            apply_params_json(params_, fields);
            mark_motion_locked();
        } else if (type == "requestFrame") {
            std::lock_guard lk(mutex_);
            frame_requested_ = true;
        } else {
            throw std::invalid_argument("unknown message type '" + type + "'");
        }
    } catch (const std::exception& e) {
        error(e.what());
        return;
    }
    wake_.notify_all();
}

bool Session::wait_idle(std::chrono::milliseconds timeout) {
    std::unique_lock lk(mutex_);
    return idle_.wait_for(lk, timeout, [this] {
        return !busy_ && !pending_load_ && !frame_requested_ && !moving_frame_due_ && !(still_due_ && scene_);
    });
}

void Session::render_job(const Job& job) {
    RenderParams p = job.params;
    RenderOptions ro;
    ro.threads = options_.threads;
    Camera cam = job.camera;
    if (job.quality == Quality::moving) {
        ro.camera_moving = true;
        cam.width = std::max(1, cam.width / std::max(1, options_.moving_divisor));
        cam.height = std::max(1, cam.height / std::max(1, options_.moving_divisor));
        p.shadow_mode = ShadowMode::none;
        p.ao_mode = AoMode::none;
    } else {
        p.neighbor_mode = NeighborMode::on;
    }
    Frame frame = render_frame(cam, *job.scene, p, ro);
    const FrameFormat format =
        job.quality == Quality::still && png_supported() ? FrameFormat::png : FrameFormat::rgba8;

    std::uint32_t id = 0;
    {
        std::lock_guard lk(mutex_);
        if (job.epoch != epoch_) return;  // superseded while rendering
        id = next_frame_id_++;
        if (job.quality == Quality::still) still_due_ = false;
    }
    sink_(OutMessage{true, {}, encode_frame_message(id, frame.image, format)});
    const json stats{{"type", "stats"},
                     {"frameId", id},
                     {"renderMs", frame.stats.ms},
                     {"voxelSteps", frame.stats.voxel_steps},
                     {"tests", frame.stats.intersection_tests},
                     {"quality", job.quality == Quality::still ? "still" : "moving"},
                     {"width", cam.width},
                     {"height", cam.height},
                     {"epoch", job.epoch}};
    sink_(OutMessage{false, stats.dump(), {}});
}

void Session::worker_loop() {
    std::unique_lock lk(mutex_);
    for (;;) {
        const auto still_at = last_input_ + options_.still_delay;
        const auto ready = [&] {
            return stop_ || pending_load_ || ((frame_requested_ || moving_frame_due_) && scene_) ||
                   (frame_requested_ && !scene_) ||
                   (still_due_ && scene_ && std::chrono::steady_clock::now() >= still_at);
        };
        if (!ready()) {
            busy_ = false;
            idle_.notify_all();
            if (still_due_ && scene_) wake_.wait_until(lk, still_at, ready);
            else wake_.wait(lk, ready);
            if (!ready()) continue;
        }
        if (stop_) return;
        busy_ = true;

        if (pending_load_) {
            const std::string target = *pending_load_;
            pending_load_.reset();
            lk.unlock();
            try {
                auto scene = std::make_shared<const Scene>(open_scene(target, options_.voxelize));
                set_scene(scene);
                const auto& spec = scene->model.spec;
                lk.lock();
                const json done{{"type", "sceneLoaded"},
                                {"name", target},
                                {"dims", {spec.dims.x, spec.dims.y, spec.dims.z}},
                                {"bins", spec.bins},
                                {"segments", scene->model.segment_count()},
                                {"camera", camera_json(camera_)}};
                lk.unlock();
                sink_(OutMessage{false, done.dump(), {}});
            } catch (const std::exception& e) {
                error("loadScene failed: " + std::string(e.what()));
            }
            lk.lock();
            continue;
        }
        if (!scene_) {
            frame_requested_ = false;
            lk.unlock();
            error("no scene loaded");
            lk.lock();
            continue;
        }

        Job job{scene_, camera_, params_, Quality::still, epoch_};
        if (moving_frame_due_) {
            job.quality = Quality::moving;
            moving_frame_due_ = false;
            frame_requested_ = false;
        } else if (frame_requested_) {
            job.quality = still_due_ ? Quality::moving : Quality::still;
            frame_requested_ = false;
        }
        lk.unlock();
        try {
            render_job(job);
        } catch (const std::exception& e) {
            std::uint32_t id;
            {
                std::lock_guard g(mutex_);
                id = next_frame_id_++;
                if (job.quality == Quality::still) still_due_ = false;
            }
            error(std::string("render failed: ") + e.what(), id);
        }
        lk.lock();
    }
}

}  // namespace linevox
