#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "snips/scenario.hpp"

namespace snips {

/// Outcome of one simulated synchronization run.
///
/// Everything except `timing` is a deterministic function of the
/// configuration and goes into the CSV row.
struct MetricsReport {
    ScenarioConfig config;
    bool converged = false;
    /// Beacon rounds started before the stores matched.
    std::uint64_t rounds = 0;

    /// Encoded bytes of every message except chunk uploads.
    std::uint64_t metadata_bytes = 0;
    /// Metadata sent by each peer, in peer order.
    std::vector<std::uint64_t> metadata_per_peer;
    /// Encoded bytes of chunk-upload messages (Upload, Delivery), envelope included.
    std::uint64_t upload_bytes = 0;
    std::uint64_t messages = 0;
    std::uint64_t proof_messages = 0;
    std::uint64_t new_proof_messages = 0;
    std::uint64_t select_messages = 0;
    /// Largest number of Select messages any single peer sent.
    std::uint64_t select_rounds = 0;
    std::uint64_t uploads = 0;
    std::uint64_t events = 0;

    std::uint64_t checksum_mismatches = 0;
    std::uint64_t rejected_uploads = 0;

    /// Micro-averaged proof accuracy of the k-th proof each peer evaluated
    /// from each sender, k = 1, 2, ...
    std::vector<double> accuracy_per_round;
    /// size_bits / n over every proof created with n > 0.
    double bits_per_chunk = 0;

    struct Timing {
        double create_seconds = 0;
        std::uint64_t create_chunks = 0;
        double verify_seconds = 0;
        std::uint64_t verify_chunks = 0;
        double wall_seconds = 0;

        [[nodiscard]] double create_us_per_chunk() const;
        [[nodiscard]] double verify_us_per_chunk() const;
    } timing;
};

/// Column names, comma separated, no trailing newline.
std::string csv_header();
/// One row matching csv_header(). accuracy_per_round is ';'-joined.
std::string csv_row(const MetricsReport& report);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace snips
