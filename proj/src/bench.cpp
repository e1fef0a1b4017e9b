#include "arc/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "arc/client.hpp"
#include "arc/protocol.hpp"

namespace arc::net {

namespace {

double percentile(const std::vector<double>& sorted, double q) {
    const auto n = static_cast<double>(sorted.size());
    auto rank = static_cast<size_t>(std::ceil(q * n));
    rank = std::max<size_t>(rank, 1);
    return sorted[rank - 1];
}

ModeStats summarize(std::string mode, const std::vector<double>& times_ms) {
    ModeStats s;
    s.mode = std::move(mode);
    s.iters = static_cast<int>(times_ms.size());
    double sum = 0;
    for (const double t : times_ms) sum += t;
    s.mean_ms = sum / static_cast<double>(times_ms.size());
    std::vector<double> sorted = times_ms;
    std::sort(sorted.begin(), sorted.end());
    s.min_ms = sorted.front();
    s.max_ms = sorted.back();
    s.p50_ms = percentile(sorted, 0.50);
    s.p95_ms = percentile(sorted, 0.95);
    return s;
}

}  // namespace

std::vector<ModeStats> bench_detect(const GrayImage& img, int iters,
                                    const std::optional<RemoteEndpoint>& remote,
                                    const DetectConfig& cfg) {
    if (iters < 1) throw std::invalid_argument("bench: iteration count must be at least 1");
    using Clock = std::chrono::steady_clock;

    std::vector<uint8_t> local_payload;
    std::vector<double> local_ms;
    local_ms.reserve(static_cast<size_t>(iters));
    for (int i = 0; i < iters; ++i) {
        const auto t0 = Clock::now();
        const std::vector<MarkerDetection> dets = detect_markers(img, cfg);
        const auto t1 = Clock::now();
        local_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        if (i == 0) local_payload = encode_detect_response(dets);
    }

    std::vector<ModeStats> out;
    out.push_back(summarize("local", local_ms));
    if (!remote) return out;

    Client client(remote->host, remote->port);
    const std::vector<uint8_t> request = encode_image_payload(img);
    std::vector<double> remote_ms;
    remote_ms.reserve(static_cast<size_t>(iters));
    for (int i = 0; i < iters; ++i) {
        const auto t0 = Clock::now();
        const Frame f = client.request(kTypeDetectMarkers, request);
        const auto t1 = Clock::now();
        if (f.type == kTypeError) {
            const ErrorReply err = decode_error_payload(f.payload);
            throw RemoteError(err.code, "server error: " + err.message);
        }
        if (f.type != (kTypeDetectMarkers | kResponseBit))
            throw ProtocolError("unexpected response type");
        if (f.payload != local_payload)
            throw std::runtime_error("bench: remote detections differ from local");
        remote_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    out.push_back(summarize("remote", remote_ms));
    return out;
}

std::string bench_tsv(const std::vector<ModeStats>& stats) {
    std::string out = "mode\titers\tmean_ms\tp50_ms\tp95_ms\tmin_ms\tmax_ms\n";
    char line[256];
    for (const ModeStats& s : stats) {
        std::snprintf(line, sizeof line, "%s\t%d\t%.3f\t%.3f\t%.3f\t%.3f\t%.3f\n", s.mode.c_str(),
                      s.iters, s.mean_ms, s.p50_ms, s.p95_ms, s.min_ms, s.max_ms);
        out += line;
    }
    return out;
}

}  // namespace arc::net
