#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <queue>
#include <set>
#include <unordered_map>
#include <vector>

#include "snips/message.hpp"
#include "snips/metrics.hpp"
#include "snips/peer.hpp"
#include "snips/scenario.hpp"

namespace snips {

/// A message in flight. Payloads travel encoded so every hop pays the real
/// codec cost and byte counts come straight from the wire form.
struct Envelope {
    std::uint64_t time = 0;
    std::uint64_t seq = 0;
    std::size_t from = 0;
    std::size_t to = 0;
    Bytes wire;
};

/// Deterministic discrete-event run of a SNIPS neighborhood. Every peer is a
/// neighbor of every other; links have fixed latency, and ties in delivery
/// time are broken by send order, so links are FIFO.
class Simulation {
public:
    using VerificationObserver = std::function<void(std::size_t verifier, const VerificationRecord&)>;

    Simulation(const ScenarioConfig& config, std::vector<ChunkStore> stores);
    // Peers hold callbacks into this object.
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    [[nodiscard]] std::size_t size() const noexcept { return peers_.size(); }
    [[nodiscard]] Peer& peer(std::size_t i) { return *peers_.at(i); }
    [[nodiscard]] const Peer& peer(std::size_t i) const { return *peers_.at(i); }
    [[nodiscard]] std::size_t index_of(const Address& address) const;

    /// One JSON object per delivered message.
    void set_trace(std::ostream* out) { trace_ = out; }
    void set_observer(VerificationObserver observer) { observer_ = std::move(observer); }
    /// Keep a copy of every delivered envelope (for replay tests).
    void record_deliveries(bool on) { record_ = on; }
    [[nodiscard]] const std::vector<Envelope>& deliveries() const noexcept { return delivered_; }

    /// Queue a message from peer `from` to peer `to` after one link latency.
    void send(std::size_t from, std::size_t to, const Message& message);
    /// Queue raw bytes, bypassing accounting (replays, fuzzing).
    void inject(std::size_t from, std::size_t to, Bytes wire);

    /// Beacon tick for round max(latest_round) + 1 on every peer.
    std::uint64_t start_round();
    /// Deliver messages until the queue drains or `max_events` were delivered.
    /// Returns the number delivered.
    std::uint64_t run_until_idle(std::uint64_t max_events);
    [[nodiscard]] bool idle() const noexcept { return queue_.empty(); }

    /// Every store equals the union of the initial stores.
    [[nodiscard]] bool converged() const;
    [[nodiscard]] const IdSet& target() const noexcept { return union_; }
    /// Ids each peer accepted through Upload, in peer order.
    [[nodiscard]] const std::vector<IdSet>& received() const noexcept { return received_; }
    [[nodiscard]] std::uint64_t now() const noexcept { return now_; }
    [[nodiscard]] std::uint64_t decode_errors() const noexcept { return decode_errors_; }

    /// Drive rounds until convergence or max_rounds and fill a report.
    MetricsReport run();
    /// Counters accumulated so far.
    [[nodiscard]] MetricsReport report() const;

private:
    struct Later {
        bool operator()(const Envelope& a, const Envelope& b) const noexcept {
            return a.time != b.time ? a.time > b.time : a.seq > b.seq;
        }
    };

    void deliver(Envelope env);
    void dispatch(std::size_t from, std::vector<Outgoing> out);
    void note_evaluation(std::size_t verifier, const VerificationRecord& record);
    void trace(const Envelope& env, const Message& message);

    ScenarioConfig config_;
    std::vector<std::unique_ptr<Peer>> peers_;
    std::vector<Address> addresses_;
    std::unordered_map<Address, std::size_t> index_;
    IdSet union_;

    std::priority_queue<Envelope, std::vector<Envelope>, Later> queue_;
    std::uint64_t now_ = 0;
    std::uint64_t next_seq_ = 0;

    std::ostream* trace_ = nullptr;
    VerificationObserver observer_;
    bool record_ = false;
    std::vector<Envelope> delivered_;
    std::vector<IdSet> received_;
    std::uint64_t decode_errors_ = 0;

    MetricsReport counts_;
    std::vector<std::uint64_t> found_per_round_;
    std::vector<std::uint64_t> missing_per_round_;
    std::set<std::pair<Address, Nonce>> proofs_seen_;
    std::uint64_t proof_bits_ = 0;
    std::uint64_t proof_chunks_ = 0;
};

/// Run one configuration with the configured protocol.
MetricsReport run_scenario(const ScenarioConfig& config, std::ostream* trace = nullptr);

}  // namespace snips
