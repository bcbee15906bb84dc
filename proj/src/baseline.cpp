#include "snips/baseline.hpp"

#include <chrono>
#include <ostream>

#include <nlohmann/json.hpp>

namespace snips {
namespace {

struct Ledger {
    MetricsReport& report;
    std::ostream* trace;

    void note(std::size_t from, std::size_t to, std::string_view type, std::size_t bytes, bool upload = false) {
        if (upload) {
            report.upload_bytes += bytes;
        } else {
            report.metadata_bytes += bytes;
            report.metadata_per_peer[from] += bytes;
        }
        ++report.messages;
        ++report.events;
        if (trace != nullptr) {
            nlohmann::json j;
            j["t"] = report.events;
            j["from"] = from;
            j["to"] = to;
            j["type"] = type;
            j["bytes"] = bytes;
            *trace << j.dump() << '\n';
        }
    }
};

bool all_equal(const std::vector<ChunkStore>& stores, const IdSet& target) {
    for (const auto& s : stores) {
        if (s.size() != target.size()) return false;
        auto it = target.begin();
        for (const auto& [id, chunk] : s.chunks()) {
            if (id != *it) return false;
            ++it;
        }
    }
    return true;
}

}  // namespace

MetricsReport run_baseline(const ScenarioConfig& config, std::ostream* trace) {
    return run_baseline(config, initial_stores(config), trace);
}

MetricsReport run_baseline(const ScenarioConfig& config, std::vector<ChunkStore> stores, std::ostream* trace) {
    config.validate();
    const auto t0 = std::chrono::steady_clock::now();
    MetricsReport r;
    r.config = config;
    r.metadata_per_peer.assign(stores.size(), 0);
    Ledger ledger{r, trace};

    IdSet target;
    for (const auto& s : stores)
        for (const auto& [id, chunk] : s.chunks()) target.insert(id);

    const Address start = min_address();
    const Address end = max_address();
    for (std::uint64_t round = 1; round <= config.max_rounds; ++round) {
        r.rounds = round;
        for (std::size_t req = 0; req < stores.size(); ++req) {
            for (std::size_t resp = 0; resp < stores.size(); ++resp) {
                if (resp == req) continue;
                ledger.note(req, resp, "RangeRequest", baseline_wire::kRangeRequest);
                const std::vector<const Chunk*> offered = stores[resp].range(start, end);
                ledger.note(resp, req, "Offer", baseline_wire::offer(offered.size()));
                std::vector<const Chunk*> wanted;
                for (const Chunk* c : offered)
                    if (!stores[req].contains(c->id())) wanted.push_back(c);
                ledger.note(req, resp, "Want", baseline_wire::want(offered.size()));
                for (const Chunk* c : wanted) {
                    ledger.note(resp, req, "Delivery", baseline_wire::delivery_envelope + c->size(), true);
                    ++r.uploads;
                    stores[req].put(*c);
                }
            }
        }
        if (all_equal(stores, target)) break;
    }
    r.converged = all_equal(stores, target);
    r.accuracy_per_round.clear();
    r.timing.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

}  // namespace snips
