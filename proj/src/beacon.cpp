#include "snips/beacon.hpp"

#include "snips/hash.hpp"

namespace snips {

Nonce beacon_nonce(std::uint64_t round) {
    Byte be[8];
    for (int i = 0; i < 8; ++i) be[i] = static_cast<Byte>(round >> (56 - 8 * i));
    const Hash256 h = sha256(ByteView(be, 8));
    return Nonce::from_span(h.view().first(8));
}

}  // namespace snips
