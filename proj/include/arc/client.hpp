#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "arc/protocol.hpp"

namespace arc::net {

/// Connection-level failure: unreachable host, timeout, dropped socket.
struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The server answered with an ERROR frame.
struct RemoteError : std::runtime_error {
    uint8_t code;
    RemoteError(uint8_t code_, const std::string& message)
        : std::runtime_error(message), code(code_) {}
};

/// Blocking request/response client over one TCP connection.
class Client {
  public:
    /// Connects immediately; throws TransportError on failure.  The timeout
    /// applies to connect, send, and receive individually.
    Client(const std::string& host, uint16_t port, double timeout_s = 10.0);
    ~Client();

    Client(const Client&) = delete;
    Client& operator=(const Client&) = delete;

    /// Sends one frame and reads one response frame.
    Frame request(uint8_t type, std::span<const uint8_t> payload);

  private:
    int fd_ = -1;
};

/// Typed wrappers; each raises RemoteError when the server reports one.
void ping(Client& client);
std::vector<MarkerDetection> detect_remote(Client& client, const GrayImage& img);
ClassifyReply classify_image_remote(Client& client, const GrayImage& img);
ClassifyReply classify_vector_remote(Client& client, const std::vector<double>& v);

}  // namespace arc::net
