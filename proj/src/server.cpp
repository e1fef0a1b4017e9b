#include "arc/server.hpp"

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <stdexcept>

#include "arc/protocol.hpp"

namespace arc::net {

namespace {

/// Reads exactly n bytes; false on orderly EOF at offset 0, throws on
/// mid-buffer EOF or socket errors.
bool read_exact(int fd, uint8_t* buf, size_t n) {
    size_t got = 0;
    while (got < n) {
        const ssize_t r = ::recv(fd, buf + got, n - got, 0);
        if (r == 0) {
            if (got == 0) return false;
            throw ProtocolError("connection closed mid-frame");
        }
        if (r < 0) {
            if (errno == EINTR) continue;
            throw ProtocolError("socket read failed");
        }
        got += static_cast<size_t>(r);
    }
    return true;
}

void write_all(int fd, const std::vector<uint8_t>& bytes) {
    size_t sent = 0;
    while (sent < bytes.size()) {
        const ssize_t w = ::send(fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
        if (w < 0) {
            if (errno == EINTR) continue;
            throw ProtocolError("socket write failed");
        }
        sent += static_cast<size_t>(w);
    }
}

}  // namespace

Server::Server(ServerConfig cfg, uint16_t port) : cfg_(std::move(cfg)) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw std::runtime_error("server: cannot create socket");
    const int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    addr.sin_port = htons(port);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 ||
        ::listen(listen_fd_, 64) < 0) {
        const std::string why = std::strerror(errno);
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw std::runtime_error("server: cannot listen on port " + std::to_string(port) + ": " + why);
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

Server::~Server() { stop(); }

void Server::run() {
    for (;;) {
        const int fd = ::accept(listen_fd_, nullptr, nullptr);

        // Reap handlers of connections that already ended.
        std::list<std::thread> done;
        {
            std::lock_guard<std::mutex> lock(mu_);
            done.swap(finished_);
        }
        for (std::thread& t : done) t.join();

        if (fd < 0) {
            if (errno == EINTR) continue;
            break;  // Listener shut down.
        }
        std::lock_guard<std::mutex> lock(mu_);
        if (stopping_) {
            ::close(fd);
            break;
        }
        open_fds_.push_back(fd);
        workers_.emplace_back();
        const auto self = std::prev(workers_.end());
        *self = std::thread([this, fd, self] {
            handle_connection(fd);
            std::lock_guard<std::mutex> lock(mu_);
            std::erase(open_fds_, fd);
            // After stop the lists are being torn down elsewhere; the
            // stopping path joins this thread through workers_ instead.
            if (!stopping_) finished_.splice(finished_.end(), workers_, self);
        });
    }
    // Unblock workers still waiting on their clients, then collect them.
    std::list<std::thread> workers;
    {
        std::lock_guard<std::mutex> lock(mu_);
        stopping_ = true;
        for (const int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
        workers.splice(workers.end(), workers_);
        workers.splice(workers.end(), finished_);
    }
    for (std::thread& t : workers) t.join();
}

void Server::start() {
    accept_thread_ = std::thread([this] { run(); });
}

void Server::request_stop() {
    if (listen_fd_ >= 0) ::shutdown(listen_fd_, SHUT_RDWR);
}

void Server::stop() {
    request_stop();
    if (accept_thread_.joinable()) accept_thread_.join();
    // When run() executed it has already collected its workers; this covers
    // whatever remains (e.g. a server stopped before run was called).
    std::list<std::thread> workers;
    {
        std::lock_guard<std::mutex> lock(mu_);
        stopping_ = true;
        for (const int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
        workers.splice(workers.end(), workers_);
        workers.splice(workers.end(), finished_);
    }
    for (std::thread& t : workers) t.join();
    if (listen_fd_ >= 0) {
        ::close(listen_fd_);
        listen_fd_ = -1;
    }
}

void Server::handle_connection(int fd) {
    try {
        for (;;) {
            uint8_t header[kHeaderSize];
            if (!read_exact(fd, header, sizeof header)) break;
            try {
                if (std::memcmp(header, kMagic, 4) != 0) throw ProtocolError("bad magic");
                const uint32_t len = (static_cast<uint32_t>(header[5]) << 24) |
                                     (static_cast<uint32_t>(header[6]) << 16) |
                                     (static_cast<uint32_t>(header[7]) << 8) | header[8];
                if (len > kMaxPayload) throw ProtocolError("payload exceeds 16 MiB cap");
                std::vector<uint8_t> payload(len);
                if (len > 0 && !read_exact(fd, payload.data(), len))
                    throw ProtocolError("connection closed mid-frame");
                write_all(fd, dispatch(header[4], payload));
            } catch (const ProtocolError& e) {
                // Framing violation: report once, then drop the connection.
                try {
                    write_all(fd, encode_frame(kTypeError,
                                               encode_error_payload(kErrMalformed, e.what())));
                } catch (const ProtocolError&) {
                }
                break;
            }
        }
    } catch (...) {
        // Worker threads must never unwind out; drop the connection instead.
    }
    ::close(fd);
}

std::vector<uint8_t> Server::dispatch(uint8_t type, const std::vector<uint8_t>& payload) {
    auto error = [](uint8_t code, const std::string& message) {
        return encode_frame(kTypeError, encode_error_payload(code, message));
    };
    try {
        switch (type) {
            case kTypePing: {
                if (!payload.empty()) return error(kErrMalformed, "ping carries no payload");
                return encode_frame(kTypePing | kResponseBit, {});
            }
            case kTypeDetectMarkers: {
                GrayImage img;
                try {
                    img = decode_image_payload(payload);
                } catch (const ProtocolError& e) {
                    return error(kErrMalformed, e.what());
                }
                const std::vector<MarkerDetection> dets = detect_markers(img, cfg_.detect);
                return encode_frame(kTypeDetectMarkers | kResponseBit, encode_detect_response(dets));
            }
            case kTypeClassifyVector: {
                if (!cfg_.model) return error(kErrModelMissing, "no model loaded");
                std::vector<double> v;
                try {
                    v = decode_vector_payload(payload);
                } catch (const ProtocolError& e) {
                    return error(kErrMalformed, e.what());
                }
                if (static_cast<int>(v.size()) != cfg_.model->input_dim())
                    return error(kErrMalformed, "vector dimension does not match model");
                const Classification cls = mlp_classify(*cfg_.model, v);
                return encode_frame(kTypeClassifyVector | kResponseBit,
                                    encode_classify_response(cls.label,
                                                             static_cast<float>(cls.confidence)));
            }
            case kTypeClassifyImage: {
                if (!cfg_.model) return error(kErrModelMissing, "no model loaded");
                GrayImage img;
                try {
                    img = decode_image_payload(payload);
                } catch (const ProtocolError& e) {
                    return error(kErrMalformed, e.what());
                }
                // Classification must binarize the way training masks are cut
                // (global threshold; adaptive hollows out large solid regions)
                // and the ray count is dictated by the model, so those two
                // fields never come from the detection config.
                DetectConfig shape_cfg = cfg_.detect;
                shape_cfg.adaptive = false;
                shape_cfg.rays = cfg_.model->input_dim();
                const std::vector<ShapeDetection> dets =
                    recognize_shapes(img, shape_cfg, *cfg_.model);
                if (dets.empty())
                    return encode_frame(kTypeClassifyImage | kResponseBit,
                                        encode_classify_response("", 0.0f));
                return encode_frame(kTypeClassifyImage | kResponseBit,
                                    encode_classify_response(dets.front().label,
                                                             static_cast<float>(dets.front().confidence)));
            }
            default:
                return error(kErrUnsupported, "unsupported request type");
        }
    } catch (const std::exception& e) {
        return error(kErrInternal, e.what());
    }
}

}  // namespace arc::net
