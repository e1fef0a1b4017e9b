#include "arc/client.hpp"

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>

namespace arc::net {

namespace {

timeval to_timeval(double seconds) {
    timeval tv{};
    tv.tv_sec = static_cast<time_t>(seconds);
    tv.tv_usec = static_cast<suseconds_t>((seconds - std::floor(seconds)) * 1e6);
    return tv;
}

Frame expect_response(Frame frame, uint8_t request_type) {
    if (frame.type == kTypeError) {
        const ErrorReply err = decode_error_payload(frame.payload);
        throw RemoteError(err.code, "server error " + std::to_string(err.code) + ": " + err.message);
    }
    if (frame.type != (request_type | kResponseBit))
        throw ProtocolError("unexpected response type");
    return frame;
}

}  // namespace

Client::Client(const std::string& host, uint16_t port, double timeout_s) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const std::string service = std::to_string(port);
    if (::getaddrinfo(host.c_str(), service.c_str(), &hints, &res) != 0 || res == nullptr)
        throw TransportError("cannot resolve host " + host);

    fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd_ < 0) {
        ::freeaddrinfo(res);
        throw TransportError("cannot create socket");
    }

    // Connect with a deadline: non-blocking connect, poll, then back to
    // blocking with per-operation timeouts.
    const int flags = ::fcntl(fd_, F_GETFL, 0);
    ::fcntl(fd_, F_SETFL, flags | O_NONBLOCK);
    int rc = ::connect(fd_, res->ai_addr, res->ai_addrlen);
    ::freeaddrinfo(res);
    if (rc < 0 && errno != EINPROGRESS) {
        const std::string why = std::strerror(errno);
        ::close(fd_);
        fd_ = -1;
        throw TransportError("cannot connect to " + host + ":" + service + ": " + why);
    }
    if (rc < 0) {
        pollfd pfd{fd_, POLLOUT, 0};
        rc = ::poll(&pfd, 1, static_cast<int>(timeout_s * 1000));
        int err = 0;
        socklen_t len = sizeof err;
        if (rc > 0) ::getsockopt(fd_, SOL_SOCKET, SO_ERROR, &err, &len);
        if (rc <= 0 || err != 0) {
            const std::string why = rc <= 0 ? "timeout" : std::strerror(err);
            ::close(fd_);
            fd_ = -1;
            throw TransportError("cannot connect to " + host + ":" + service + ": " + why);
        }
    }
    ::fcntl(fd_, F_SETFL, flags);

    const timeval tv = to_timeval(timeout_s);
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    ::setsockopt(fd_, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
}

Client::~Client() {
    if (fd_ >= 0) ::close(fd_);
}

Frame Client::request(uint8_t type, std::span<const uint8_t> payload) {
    const std::vector<uint8_t> wire = encode_frame(type, payload);
    size_t sent = 0;
    while (sent < wire.size()) {
        const ssize_t w = ::send(fd_, wire.data() + sent, wire.size() - sent, MSG_NOSIGNAL);
        if (w < 0) {
            if (errno == EINTR) continue;
            if (errno == EAGAIN || errno == EWOULDBLOCK) throw TransportError("send timeout");
            throw TransportError(std::string("send failed: ") + std::strerror(errno));
        }
        sent += static_cast<size_t>(w);
    }

    auto read_exact = [this](uint8_t* buf, size_t n) {
        size_t got = 0;
        while (got < n) {
            const ssize_t r = ::recv(fd_, buf + got, n - got, 0);
            if (r == 0) throw TransportError("connection closed by server");
            if (r < 0) {
                if (errno == EINTR) continue;
                if (errno == EAGAIN || errno == EWOULDBLOCK)
                    throw TransportError("receive timeout");
                throw TransportError(std::string("receive failed: ") + std::strerror(errno));
            }
            got += static_cast<size_t>(r);
        }
    };

    uint8_t header[kHeaderSize];
    read_exact(header, sizeof header);
    if (std::memcmp(header, kMagic, 4) != 0) throw ProtocolError("bad magic in response");
    const uint32_t len = (static_cast<uint32_t>(header[5]) << 24) |
                         (static_cast<uint32_t>(header[6]) << 16) |
                         (static_cast<uint32_t>(header[7]) << 8) | header[8];
    if (len > kMaxPayload) throw ProtocolError("response exceeds 16 MiB cap");
    Frame f;
    f.type = header[4];
    f.payload.resize(len);
    if (len > 0) read_exact(f.payload.data(), len);
    return f;
}

void ping(Client& client) {
    const Frame f = expect_response(client.request(kTypePing, {}), kTypePing);
    if (!f.payload.empty()) throw ProtocolError("ping response carries payload");
}

std::vector<MarkerDetection> detect_remote(Client& client, const GrayImage& img) {
    const std::vector<uint8_t> payload = encode_image_payload(img);
    const Frame f = expect_response(client.request(kTypeDetectMarkers, payload), kTypeDetectMarkers);
    return decode_detect_response(f.payload);
}

ClassifyReply classify_image_remote(Client& client, const GrayImage& img) {
    const std::vector<uint8_t> payload = encode_image_payload(img);
    const Frame f = expect_response(client.request(kTypeClassifyImage, payload), kTypeClassifyImage);
    return decode_classify_response(f.payload);
}

ClassifyReply classify_vector_remote(Client& client, const std::vector<double>& v) {
    const std::vector<uint8_t> payload = encode_vector_payload(v);
    const Frame f =
        expect_response(client.request(kTypeClassifyVector, payload), kTypeClassifyVector);
    return decode_classify_response(f.payload);
}

}  // namespace arc::net
