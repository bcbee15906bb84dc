#include "snips/peer.hpp"

#include <chrono>

#include "snips/beacon.hpp"

namespace snips {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Rounds ahead of the latest known round that are still accepted as fresh.
constexpr std::uint64_t kLookahead = 4;
constexpr std::size_t kSelectReplayMemory = 4096;

}  // namespace

Peer::Peer(std::shared_ptr<const Signer> identity, PeerConfig config, ChunkStore store)
    : identity_(std::move(identity)),
      config_(config),
      store_(std::move(store)),
      cache_(config.nonce_retention + 1, config.threads) {
    if (!identity_) throw std::invalid_argument("peer requires an identity");
}

std::vector<Outgoing> Peer::handle(const Address& from, const Message& message) {
    if (const auto* m = std::get_if<NewProof>(&message)) return on_new_proof(from, *m);
    if (const auto* m = std::get_if<Prove>(&message)) return on_prove(from, *m);
    if (const auto* m = std::get_if<Select>(&message)) return on_select(from, *m);
    if (const auto* m = std::get_if<Upload>(&message)) {
        on_upload(from, *m);
        return {};
    }
    return on_upload_done(from);
}

std::vector<Outgoing> Peer::on_beacon(std::uint64_t round, std::span<const Address> neighbors) {
    note_round(round);
    const ProofBundle& bundle = bundle_for(beacon_nonce(round), config_.range_start, config_.range_end);
    auto proof = std::shared_ptr<const StorageProof>(bundles_.back().second, &bundle.proof);
    std::vector<Outgoing> out;
    for (const Address& to : neighbors)
        if (to != address()) out.push_back({to, Prove{proof}});
    return out;
}

std::vector<Outgoing> Peer::on_new_proof(const Address& from, const NewProof& message) {
    if (auto r = round_of(message.nonce)) note_round(*r);
    if (message.range && message.range->second < message.range->first) return {};
    if (pipeline_) {
        ++counters_.new_proofs_deferred;
        deferred_.emplace_back(from, message);
        return {};
    }
    return {answer_new_proof(from, message)};
}

Outgoing Peer::answer_new_proof(const Address& from, const NewProof& message) {
    const Address start = message.range ? message.range->first : config_.range_start;
    const Address end = message.range ? message.range->second : config_.range_end;
    bundle_for(message.nonce, start, end);
    return Outgoing{from, Prove{proof_for_nonce(message.nonce)}};
}

const ProofBundle& Peer::bundle_for(const Nonce& nonce, const Address& start, const Address& end) {
    for (auto it = bundles_.begin(); it != bundles_.end(); ++it) {
        if (it->first != nonce) continue;
        if (it->second->proof.start == start && it->second->proof.end == end) {
            ++counters_.proofs_served_from_cache;
            return *it->second;
        }
        bundles_.erase(it);
        break;
    }
    const auto t0 = Clock::now();
    auto bundle = std::make_shared<ProofBundle>(
        create_proof(store_, nonce, start, end, cache_, *identity_, ProofOptions{config_.gamma, config_.threads}));
    timings_.create_seconds += seconds_since(t0);
    timings_.create_chunks += bundle->proof.size();
    ++counters_.proofs_created;
    bundles_.emplace_back(nonce, std::move(bundle));
    while (bundles_.size() > config_.nonce_retention) bundles_.pop_front();
    return *bundles_.back().second;
}

const ReverseMap* Peer::reverse_map(const Nonce& nonce) const {
    for (const auto& [n, bundle] : bundles_)
        if (n == nonce) return &bundle->reverse;
    return nullptr;
}

std::shared_ptr<const StorageProof> Peer::proof_for_nonce(const Nonce& nonce) const {
    for (const auto& [n, bundle] : bundles_)
        if (n == nonce) return std::shared_ptr<const StorageProof>(bundle, &bundle->proof);
    return nullptr;
}

std::optional<std::uint64_t> Peer::round_of(const Nonce& nonce) const {
    const std::uint64_t lo = latest_round_ > config_.replay_window ? latest_round_ - config_.replay_window : 0;
    for (std::uint64_t r = latest_round_ + kLookahead + 1; r-- > lo;)
        if (beacon_nonce(r) == nonce) return r;
    return std::nullopt;
}

void Peer::note_round(std::uint64_t round) {
    if (round <= latest_round_) return;
    latest_round_ = round;
    for (auto it = seen_proofs_.begin(); it != seen_proofs_.end();) {
        if (it->second + config_.replay_window < latest_round_) {
            it = seen_proofs_.erase(it);
        } else {
            ++it;
        }
    }
}

Outgoing Peer::recovery_request(const Address& to) {
    note_round(latest_round_ + 1);
    ++counters_.new_proofs_sent;
    return Outgoing{to, NewProof{beacon_nonce(latest_round_), std::nullopt}};
}

std::vector<Outgoing> Peer::on_prove(const Address& from, const Prove& message) {
    const std::shared_ptr<const StorageProof>& proof = message.proof;
    if (!proof || proof->signer != from || !proof->verify()) {
        ++counters_.bad_signature;
        return {};
    }
    const auto round = round_of(proof->nonce);
    if (!round) {
        ++counters_.unknown_nonce;
        return {};
    }
    const ReplayKey key{proof->nonce, from};
    if (seen_proofs_.contains(key)) {
        ++counters_.replays_dropped;
        return {};
    }
    seen_proofs_.emplace(key, *round);
    note_round(*round);
    queue_.push_back({from, proof});
    return pump();
}

std::vector<Outgoing> Peer::pump() {
    std::vector<Outgoing> out;
    while (!pipeline_ && !queue_.empty()) {
        QueuedProof item = std::move(queue_.front());
        queue_.pop_front();
        evaluate(item, out);
    }
    return out;
}

void Peer::evaluate(const QueuedProof& item, std::vector<Outgoing>& out) {
    const StorageProof& proof = *item.proof;
    const auto t0 = Clock::now();
    ProofAssessment assessment = assess_proof(store_, proof, cache_);
    timings_.verify_seconds += seconds_since(t0);
    timings_.verify_chunks += assessment.queried;
    ++counters_.proofs_verified;

    if (observer_) {
        observer_(VerificationRecord{address(), item.sender, item.proof, assessment.report, ++evaluated_from_[item.sender]});
    }

    const MissingReport& report = assessment.report;
    if (report.missing.empty()) {
        if (report.collision) {
            out.push_back(recovery_request(item.sender));
        } else if (config_.verify_checksum && proof.checksum && proof.size() > 0 &&
                   proof_checksum(assessment.matched) != *proof.checksum) {
            // Every index was matched exactly once, yet the chunk proofs
            // disagree with the prover's: a false positive hid a difference.
            ++counters_.checksum_mismatch;
            out.push_back(recovery_request(item.sender));
        }
        return;
    }

    const auto length = static_cast<std::uint32_t>(proof.size());
    out.push_back({item.sender, Select{proof.nonce, IndexBitVector::from_indices(length, report.missing)}});
    ++counters_.selects_sent;

    Pipeline p;
    p.sender = item.sender;
    p.proof = item.proof;
    p.requested.insert(report.missing.begin(), report.missing.end());
    p.collision = report.collision;
    p.assessment = std::move(assessment);
    pipeline_ = std::move(p);
}

std::vector<Outgoing> Peer::on_select(const Address& from, const Select& message) {
    const ReplayKey key{message.nonce, from};
    if (seen_selects_.contains(key)) {
        ++counters_.replays_dropped;
        return {};
    }
    seen_selects_.insert(key);
    seen_select_order_.push_back(key);
    if (seen_select_order_.size() > kSelectReplayMemory) {
        seen_selects_.erase(seen_select_order_.front());
        seen_select_order_.pop_front();
    }

    std::vector<Outgoing> out;
    const ReverseMap* reverse = reverse_map(message.nonce);
    if (reverse == nullptr) {
        ++counters_.select_unknown_nonce;
        out.push_back({from, UploadDone{}});
        return out;
    }
    for (std::uint64_t idx : message.missing.indices()) {
        const ChunkId* id = reverse->at(idx);
        if (id == nullptr) {
            ++counters_.select_out_of_range;
            continue;
        }
        if (const Chunk* chunk = store_.find(*id)) {
            out.push_back({from, Upload{*chunk}});
            ++counters_.uploads_sent;
        }
    }
    out.push_back({from, UploadDone{}});
    return out;
}

bool Peer::on_upload(const Address& from, const Upload& message) {
    if (!pipeline_ || pipeline_->sender != from) {
        ++counters_.uploads_rejected;
        ++misbehavior_[from];
        return false;
    }
    Pipeline& p = *pipeline_;
    const Chunk& chunk = message.chunk;
    const Hash256 cp = cache_.proof(p.proof->nonce, chunk);
    const std::uint64_t idx = p.proof->mphf.find(cp);
    const bool accepted = p.requested.contains(idx) &&
                          verify_upload(*p.proof, idx, chunk, address(), config_.neighborhood_bits);
    if (!accepted) {
        ++counters_.uploads_rejected;
        ++misbehavior_[from];
        return false;
    }
    p.requested.erase(idx);
    p.uploaded.emplace(idx, cp);
    if (store_.put(chunk)) p.added.push_back(chunk.id());
    ++counters_.uploads_accepted;
    return true;
}

std::vector<Outgoing> Peer::on_upload_done(const Address& from) {
    if (!pipeline_ || pipeline_->sender != from) {
        ++counters_.unsolicited_upload_done;
        return {};
    }
    Pipeline p = std::move(*pipeline_);
    pipeline_.reset();

    std::vector<Outgoing> out;
    bool recover = p.collision;
    const StorageProof& proof = *p.proof;
    if (config_.verify_checksum && proof.checksum && !p.collision) {
        bool keep = false;
        if (p.requested.empty()) {
            std::vector<Hash256> ordered = p.assessment.matched;
            for (const auto& [idx, cp] : p.uploaded) ordered[idx - 1] = cp;
            keep = proof_checksum(ordered) == *proof.checksum;
            if (!keep) ++counters_.checksum_mismatch;
        } else {
            // Without every requested chunk the checksum cannot vouch for
            // the ones that did arrive.
            ++counters_.incomplete_pipelines;
        }
        if (!keep) {
            for (const ChunkId& id : p.added) store_.erase(id);
            counters_.rolled_back += p.added.size();
            recover = true;
        }
    }
    if (recover) out.push_back(recovery_request(from));
    std::vector<std::pair<Address, NewProof>> deferred;
    deferred.swap(deferred_);
    for (const auto& [to, request] : deferred) out.push_back(answer_new_proof(to, request));
    auto more = pump();
    out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
    return out;
}

std::uint64_t Peer::misbehavior(const Address& peer) const {
    auto it = misbehavior_.find(peer);
    return it == misbehavior_.end() ? 0 : it->second;
}

std::optional<Address> Peer::in_flight_sender() const {
    if (!pipeline_) return std::nullopt;
    return pipeline_->sender;
}

}  // namespace snips
