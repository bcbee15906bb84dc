#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <unordered_map>
#include <vector>

#include "snips/chunkstore.hpp"
#include "snips/message.hpp"
#include "snips/proof.hpp"
#include "snips/signature.hpp"

namespace snips {

struct PeerConfig {
    /// Range proven on beacon rounds and on range-less NewProof requests.
    Address range_start = min_address();
    Address range_end = max_address();
    /// Shared address prefix required of uploaded chunks.
    int neighborhood_bits = 0;
    /// Check the proof checksum once all chunk proofs of a proof are known.
    bool verify_checksum = true;
    /// Proofs and reverse maps are kept for this many most recent nonces.
    std::size_t nonce_retention = 2;
    /// Replay keys and accepted proof nonces span this many rounds back.
    std::uint64_t replay_window = 2;
    double gamma = 2.0;
    int threads = 0;
};

struct PeerCounters {
    std::uint64_t proofs_created = 0;
    std::uint64_t proofs_served_from_cache = 0;
    std::uint64_t proofs_verified = 0;
    std::uint64_t bad_signature = 0;
    std::uint64_t unknown_nonce = 0;
    std::uint64_t replays_dropped = 0;
    std::uint64_t select_unknown_nonce = 0;
    std::uint64_t select_out_of_range = 0;
    std::uint64_t selects_sent = 0;
    std::uint64_t new_proofs_sent = 0;
    std::uint64_t uploads_sent = 0;
    std::uint64_t uploads_accepted = 0;
    std::uint64_t uploads_rejected = 0;
    std::uint64_t unsolicited_upload_done = 0;
    std::uint64_t new_proofs_deferred = 0;
    std::uint64_t checksum_mismatch = 0;
    std::uint64_t incomplete_pipelines = 0;
    std::uint64_t rolled_back = 0;
};

/// Wall-clock spent in proof creation and verification.
struct PeerTimings {
    double create_seconds = 0;
    std::uint64_t create_chunks = 0;
    double verify_seconds = 0;
    std::uint64_t verify_chunks = 0;
};

struct Outgoing {
    Address to;
    Message message;
};

/// Emitted each time a peer evaluates a proof from another peer.
struct VerificationRecord {
    Address verifier;
    Address sender;
    std::shared_ptr<const StorageProof> proof;
    MissingReport report;
    /// 1 for the first proof evaluated from this sender, 2 for the next, ...
    std::uint64_t sequence = 0;
};

/// Single-threaded protocol state of one storage peer. Every handler takes one
/// message and returns the messages to send; nothing blocks. Waiting for an
/// UploadDone is represented by the in-flight pipeline.
class Peer {
public:
    Peer(std::shared_ptr<const Signer> identity, PeerConfig config, ChunkStore store = {});

    [[nodiscard]] const Address& address() const noexcept { return identity_->address(); }
    [[nodiscard]] const PeerConfig& config() const noexcept { return config_; }
    [[nodiscard]] ChunkStore& store() noexcept { return store_; }
    [[nodiscard]] const ChunkStore& store() const noexcept { return store_; }
    [[nodiscard]] ChunkProofCache& cache() noexcept { return cache_; }

    /// Beacon round tick: prove the configured range under the round's nonce
    /// and send the proof to every neighbor.
    std::vector<Outgoing> on_beacon(std::uint64_t round, std::span<const Address> neighbors);

    /// Decoded message dispatch.
    std::vector<Outgoing> handle(const Address& from, const Message& message);

    /// Deferred while this peer has a Select/Upload pipeline open.
    std::vector<Outgoing> on_new_proof(const Address& from, const NewProof& message);
    std::vector<Outgoing> on_prove(const Address& from, const Prove& message);
    std::vector<Outgoing> on_select(const Address& from, const Select& message);
    /// Returns true when the chunk was accepted.
    bool on_upload(const Address& from, const Upload& message);
    std::vector<Outgoing> on_upload_done(const Address& from);

    [[nodiscard]] const ReverseMap* reverse_map(const Nonce& nonce) const;
    [[nodiscard]] std::shared_ptr<const StorageProof> proof_for_nonce(const Nonce& nonce) const;
    [[nodiscard]] std::uint64_t latest_round() const noexcept { return latest_round_; }
    [[nodiscard]] const PeerCounters& counters() const noexcept { return counters_; }
    [[nodiscard]] const PeerTimings& timings() const noexcept { return timings_; }
    [[nodiscard]] std::uint64_t misbehavior(const Address& peer) const;
    [[nodiscard]] std::optional<Address> in_flight_sender() const;
    [[nodiscard]] std::size_t queued_proofs() const noexcept { return queue_.size(); }

    void set_observer(std::function<void(const VerificationRecord&)> observer) { observer_ = std::move(observer); }

private:
    struct Pipeline {
        Address sender;
        std::shared_ptr<const StorageProof> proof;
        std::set<std::uint64_t> requested;
        bool collision = false;
        ProofAssessment assessment;
        std::map<std::uint64_t, Hash256> uploaded;
        std::vector<ChunkId> added;
    };

    struct QueuedProof {
        Address sender;
        std::shared_ptr<const StorageProof> proof;
    };

    using ReplayKey = std::pair<Nonce, Address>;

    const ProofBundle& bundle_for(const Nonce& nonce, const Address& start, const Address& end);
    std::optional<std::uint64_t> round_of(const Nonce& nonce) const;
    void note_round(std::uint64_t round);
    Outgoing recovery_request(const Address& to);
    Outgoing answer_new_proof(const Address& from, const NewProof& message);
    std::vector<Outgoing> pump();
    void evaluate(const QueuedProof& item, std::vector<Outgoing>& out);

    std::shared_ptr<const Signer> identity_;
    PeerConfig config_;
    ChunkStore store_;
    ChunkProofCache cache_;

    std::deque<std::pair<Nonce, std::shared_ptr<const ProofBundle>>> bundles_;
    std::uint64_t latest_round_ = 0;
    std::map<ReplayKey, std::uint64_t> seen_proofs_;
    std::set<ReplayKey> seen_selects_;
    std::deque<ReplayKey> seen_select_order_;

    std::deque<QueuedProof> queue_;
    std::optional<Pipeline> pipeline_;
    /// NewProof requests that arrived while a pipeline was open; answered
    /// when it closes so the proof reflects the chunks just received.
    std::vector<std::pair<Address, NewProof>> deferred_;
    std::map<Address, std::uint64_t> evaluated_from_;

    PeerCounters counters_;
    PeerTimings timings_;
    std::map<Address, std::uint64_t> misbehavior_;
    std::function<void(const VerificationRecord&)> observer_;
};

}  // namespace snips
