#include "snips/metrics.hpp"

#include <charconv>

namespace snips {

double MetricsReport::Timing::create_us_per_chunk() const {
    return create_chunks == 0 ? 0.0 : 1e6 * create_seconds / static_cast<double>(create_chunks);
}

double MetricsReport::Timing::verify_us_per_chunk() const {
    return verify_chunks == 0 ? 0.0 : 1e6 * verify_seconds / static_cast<double>(verify_chunks);
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::string csv_header() {
    return "protocol,peers,storage_bytes,chunk_size,chunks_per_peer,scenario,seed,converged,rounds,"
           "metadata_bytes,metadata_per_peer_max,upload_bytes,messages,proof_messages,new_proof_messages,"
           "select_messages,select_rounds,uploads,events,checksum_mismatches,rejected_uploads,bits_per_chunk,"
           "accuracy_per_round";
}

std::string csv_row(const MetricsReport& r) {
    const ScenarioConfig& c = r.config;
    std::uint64_t per_peer_max = 0;
    for (std::uint64_t m : r.metadata_per_peer) per_peer_max = std::max(per_peer_max, m);
    std::string accuracy;
    for (std::size_t i = 0; i < r.accuracy_per_round.size(); ++i) {
        if (i != 0) accuracy += ';';
        accuracy += format_double(r.accuracy_per_round[i]);
    }

    std::string out;
    auto col = [&out](const std::string& v) {
        if (!out.empty()) out += ',';
        out += v;
    };
    col(std::string(protocol_name(c.protocol)));
    col(std::to_string(c.peers));
    col(std::to_string(c.total_storage_bytes));
    col(std::to_string(c.chunk_size));
    col(std::to_string(c.chunks_per_peer()));
    col(scenario_label(c.scenario));
    col(std::to_string(c.seed));
    col(r.converged ? "1" : "0");
    col(std::to_string(r.rounds));
    col(std::to_string(r.metadata_bytes));
    col(std::to_string(per_peer_max));
    col(std::to_string(r.upload_bytes));
    col(std::to_string(r.messages));
    col(std::to_string(r.proof_messages));
    col(std::to_string(r.new_proof_messages));
    col(std::to_string(r.select_messages));
    col(std::to_string(r.select_rounds));
    col(std::to_string(r.uploads));
    col(std::to_string(r.events));
    col(std::to_string(r.checksum_mismatches));
    col(std::to_string(r.rejected_uploads));
    col(format_double(r.bits_per_chunk));
    col(accuracy);
    return out;
}

}  // namespace snips
