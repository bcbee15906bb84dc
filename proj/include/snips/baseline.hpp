#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "snips/chunkstore.hpp"
#include "snips/metrics.hpp"
#include "snips/scenario.hpp"

namespace snips {

// List-exchange reference protocol. A requester pulls from a responder:
//
//   RangeRequest  tag | start[32] | end[32]
//   Offer         tag | count:u32 | id[32] * count     (every id in range)
//   Want          tag | bits:u32 | bitvector            (same layout as Select)
//   Delivery      tag | len:u16 | data[len]             (one per wanted id)
//
// There are no cursors: every offer lists the whole range, which keeps the
// exchange consistent after chunk loss.
namespace baseline_wire {
inline constexpr std::size_t kRangeRequest = 1 + 32 + 32;
inline constexpr std::size_t offer(std::uint64_t count) { return 1 + 4 + 32 * count; }
inline constexpr std::size_t want(std::uint64_t count) { return 1 + 4 + (count + 7) / 8; }
inline constexpr std::size_t delivery_envelope = 1 + 2;
}  // namespace baseline_wire

/// Every peer pulls from every other peer, in index order, until the stores
/// match. Offers from different responders are handled one after another so
/// later offers see chunks delivered by earlier ones.
MetricsReport run_baseline(const ScenarioConfig& config, std::ostream* trace = nullptr);
MetricsReport run_baseline(const ScenarioConfig& config, std::vector<ChunkStore> stores, std::ostream* trace = nullptr);

}  // namespace snips
