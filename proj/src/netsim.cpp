#include "snips/netsim.hpp"

#include <chrono>
#include <ostream>

#include <nlohmann/json.hpp>

#include "snips/baseline.hpp"
#include "snips/hash.hpp"

namespace snips {
namespace {

constexpr std::uint64_t kIdentitySalt = 0x1D3A7E5F00000000ULL;

std::string short_hex(const Address& a) { return a.hex().substr(0, 16); }

}  // namespace

Simulation::Simulation(const ScenarioConfig& config, std::vector<ChunkStore> stores) : config_(config) {
    config_.validate();
    if (stores.size() != config_.peers) throw std::invalid_argument("one initial store per peer required");
    PeerConfig pc;
    pc.neighborhood_bits = config_.neighborhood_bits;
    pc.verify_checksum = config_.verify_checksum;
    pc.gamma = config_.gamma;
    pc.threads = config_.threads;

    for (std::size_t i = 0; i < stores.size(); ++i) {
        for (const auto& [id, chunk] : stores[i].chunks()) union_.insert(id);
        auto identity = std::make_shared<Ed25519Signer>(
            Ed25519Signer::from_u64(derive_seed(config_.seed, kIdentitySalt + i)));
        peers_.push_back(std::make_unique<Peer>(std::move(identity), pc, std::move(stores[i])));
        addresses_.push_back(peers_.back()->address());
        if (!index_.emplace(addresses_.back(), i).second) throw std::logic_error("peer address collision");
        peers_.back()->set_observer([this, i](const VerificationRecord& r) { note_evaluation(i, r); });
    }
    received_.resize(peers_.size());
    counts_.config = config_;
    counts_.metadata_per_peer.assign(peers_.size(), 0);
}

std::size_t Simulation::index_of(const Address& address) const {
    auto it = index_.find(address);
    if (it == index_.end()) throw std::out_of_range("unknown peer address");
    return it->second;
}

void Simulation::send(std::size_t from, std::size_t to, const Message& message) {
    Bytes wire = encode(message);
    if (std::holds_alternative<Upload>(message)) {
        counts_.upload_bytes += wire.size();
    } else {
        counts_.metadata_bytes += wire.size();
        counts_.metadata_per_peer[from] += wire.size();
    }
    ++counts_.messages;
    if (const auto* prove = std::get_if<Prove>(&message)) {
        ++counts_.proof_messages;
        const StorageProof& p = *prove->proof;
        if (p.size() > 0 && proofs_seen_.emplace(p.signer, p.nonce).second) {
            proof_bits_ += p.mphf.size_bits();
            proof_chunks_ += p.size();
        }
    } else if (std::holds_alternative<NewProof>(message)) {
        ++counts_.new_proof_messages;
    } else if (std::holds_alternative<Select>(message)) {
        ++counts_.select_messages;
    } else if (std::holds_alternative<Upload>(message)) {
        ++counts_.uploads;
    }
    inject(from, to, std::move(wire));
}

void Simulation::inject(std::size_t from, std::size_t to, Bytes wire) {
    if (from >= peers_.size() || to >= peers_.size()) throw std::out_of_range("peer index out of range");
    queue_.push(Envelope{now_ + config_.latency, next_seq_++, from, to, std::move(wire)});
}

void Simulation::dispatch(std::size_t from, std::vector<Outgoing> out) {
    for (const Outgoing& o : out) send(from, index_of(o.to), o.message);
}

std::uint64_t Simulation::start_round() {
    std::uint64_t round = 0;
    for (const auto& p : peers_) round = std::max(round, p->latest_round());
    ++round;
    for (std::size_t i = 0; i < peers_.size(); ++i) dispatch(i, peers_[i]->on_beacon(round, addresses_));
    return round;
}

std::uint64_t Simulation::run_until_idle(std::uint64_t max_events) {
    std::uint64_t n = 0;
    while (!queue_.empty() && n < max_events) {
        Envelope env = queue_.top();
        queue_.pop();
        deliver(std::move(env));
        ++n;
    }
    counts_.events += n;
    return n;
}

void Simulation::deliver(Envelope env) {
    now_ = env.time;
    Message message;
    try {
        message = decode(env.wire);
    } catch (const std::exception&) {
        ++decode_errors_;
        return;
    }
    if (trace_ != nullptr) trace(env, message);
    Peer& to = *peers_[env.to];
    const Address& from = addresses_[env.from];
    if (const auto* up = std::get_if<Upload>(&message)) {
        if (to.on_upload(from, *up)) received_[env.to].insert(up->chunk.id());
    } else {
        dispatch(env.to, to.handle(from, message));
    }
    if (record_) delivered_.push_back(std::move(env));
}

void Simulation::note_evaluation(std::size_t verifier, const VerificationRecord& record) {
    if (observer_) observer_(verifier, record);
    const Peer& prover = *peers_[index_of(record.sender)];
    const ReverseMap* reverse = prover.reverse_map(record.proof->nonce);
    if (reverse == nullptr) return;
    const ChunkStore& store = peers_[verifier]->store();
    std::uint64_t truly = 0;
    for (const ChunkId& id : reverse->ids) truly += store.contains(id) ? 0 : 1;
    // Every reported index names a prover chunk with no local counterpart,
    // so the identified set is a subset of the truly missing one.
    std::uint64_t found = 0;
    for (std::uint64_t idx : record.report.missing) {
        const ChunkId* id = reverse->at(idx);
        found += (id != nullptr && !store.contains(*id)) ? 1 : 0;
    }
    const std::size_t k = record.sequence - 1;
    if (found_per_round_.size() <= k) {
        found_per_round_.resize(k + 1, 0);
        missing_per_round_.resize(k + 1, 0);
    }
    found_per_round_[k] += found;
    missing_per_round_[k] += truly;
}

void Simulation::trace(const Envelope& env, const Message& message) {
    nlohmann::json j;
    j["t"] = env.time;
    j["seq"] = env.seq;
    j["from"] = short_hex(addresses_[env.from]);
    j["to"] = short_hex(addresses_[env.to]);
    j["type"] = message_name(message);
    j["bytes"] = env.wire.size();
    if (const auto* p = std::get_if<Prove>(&message)) {
        j["nonce"] = p->proof->nonce.hex();
        j["n"] = p->proof->size();
    } else if (const auto* s = std::get_if<Select>(&message)) {
        j["nonce"] = s->nonce.hex();
        j["missing"] = s->missing.count();
    } else if (const auto* np = std::get_if<NewProof>(&message)) {
        j["nonce"] = np->nonce.hex();
    } else if (const auto* up = std::get_if<Upload>(&message)) {
        j["chunk"] = short_hex(up->chunk.id());
    }
    *trace_ << j.dump() << '\n';
}

bool Simulation::converged() const {
    for (const auto& p : peers_) {
        const ChunkStore& store = p->store();
        if (store.size() != union_.size()) return false;
        auto it = union_.begin();
        for (const auto& [id, chunk] : store.chunks()) {
            if (id != *it) return false;
            ++it;
        }
    }
    return true;
}

MetricsReport Simulation::report() const {
    MetricsReport r = counts_;
    r.converged = converged();
    for (const auto& p : peers_) {
        const PeerCounters& c = p->counters();
        r.select_rounds = std::max(r.select_rounds, c.selects_sent);
        r.checksum_mismatches += c.checksum_mismatch;
        r.rejected_uploads += c.uploads_rejected;
        const PeerTimings& t = p->timings();
        r.timing.create_seconds += t.create_seconds;
        r.timing.create_chunks += t.create_chunks;
        r.timing.verify_seconds += t.verify_seconds;
        r.timing.verify_chunks += t.verify_chunks;
    }
    r.accuracy_per_round.clear();
    for (std::size_t k = 0; k < found_per_round_.size(); ++k) {
        r.accuracy_per_round.push_back(missing_per_round_[k] == 0 ? 1.0
                                                                  : static_cast<double>(found_per_round_[k]) /
                                                                        static_cast<double>(missing_per_round_[k]));
    }
    r.bits_per_chunk = proof_chunks_ == 0 ? 0.0 : static_cast<double>(proof_bits_) / static_cast<double>(proof_chunks_);
    return r;
}

MetricsReport Simulation::run() {
    const auto t0 = std::chrono::steady_clock::now();
    for (std::uint64_t round = 1; round <= config_.max_rounds; ++round) {
        start_round();
        counts_.rounds = round;
        run_until_idle(config_.max_events_per_round);
        if (!idle()) break;
        if (converged()) break;
    }
    MetricsReport r = report();
    r.timing.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

MetricsReport run_scenario(const ScenarioConfig& config, std::ostream* trace) {
    if (config.protocol == Protocol::baseline) return run_baseline(config, trace);
    Simulation sim(config, initial_stores(config));
    sim.set_trace(trace);
    return sim.run();
}

}  // namespace snips
