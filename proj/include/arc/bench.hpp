#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "arc/image.hpp"
#include "arc/pipeline.hpp"

namespace arc::net {

struct RemoteEndpoint {
    std::string host;
    uint16_t port = 0;
};

/// Latency summary for one execution mode.
struct ModeStats {
    std::string mode;  ///< "local" or "remote".
    int iters = 0;
    double mean_ms = 0;
    double p50_ms = 0;  ///< Nearest-rank percentiles.
    double p95_ms = 0;
    double min_ms = 0;
    double max_ms = 0;
};

/// Times marker detection on the image `iters` times locally and, when a
/// remote endpoint is given, over the wire.  Detection results are
/// discarded, but every remote response must match the local result byte
/// for byte.  Throws std::invalid_argument for iters < 1.
std::vector<ModeStats> bench_detect(const GrayImage& img, int iters,
                                    const std::optional<RemoteEndpoint>& remote,
                                    const DetectConfig& cfg = {});

/// Tab-separated rendering: a header line, then one row per mode with
/// millisecond figures at 3 decimal places.
std::string bench_tsv(const std::vector<ModeStats>& stats);

}  // namespace arc::net
