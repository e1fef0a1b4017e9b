#pragma once

#include <cstdint>
#include <list>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "arc/pipeline.hpp"
#include "arc/shape_mlp.hpp"
#include "arc/template_match.hpp"

namespace arc::net {

/// Everything the server needs at startup; immutable afterwards.
struct ServerConfig {
    /// Used as-is for detect requests.  Classify-image requests reuse it too,
    /// except that binarization is always the global threshold and the ray
    /// count always comes from the model.
    DetectConfig detect;
    std::optional<MlpModel> model;            ///< Required by the classify requests.
    std::optional<TemplateLibrary> templates;  ///< Loaded and validated at startup.
};

/// Thread-per-connection recognition server.
///
/// Requests on one connection are handled strictly in order; connections are
/// independent.  A framing violation is answered with an ERROR frame and the
/// connection closed; request-level problems get an ERROR frame and the
/// connection stays open.  Responses are produced by the same serialization
/// used locally, so they are byte-identical to a local computation.
class Server {
  public:
    /// Binds and listens on the port (0 picks an ephemeral port).  Throws
    /// std::runtime_error when the socket cannot be bound.
    Server(ServerConfig cfg, uint16_t port);
    ~Server();

    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Port actually bound (useful with port 0).
    [[nodiscard]] uint16_t port() const { return port_; }

    /// Accept loop; returns after request_stop() once all workers finished.
    void run();

    /// Runs the accept loop on a background thread.
    void start();

    /// Unblocks the accept loop.  Async-signal-safe.
    void request_stop();

    /// Stops and joins everything (also called by the destructor).
    void stop();

  private:
    void handle_connection(int fd);
    std::vector<uint8_t> dispatch(uint8_t type, const std::vector<uint8_t>& payload);

    ServerConfig cfg_;
    int listen_fd_ = -1;
    uint16_t port_ = 0;
    std::thread accept_thread_;
    std::mutex mu_;
    std::list<std::thread> workers_;   ///< Live connection handlers.
    std::list<std::thread> finished_;  ///< Done handlers awaiting a join.
    std::vector<int> open_fds_;
    bool stopping_ = false;
};

}  // namespace arc::net
