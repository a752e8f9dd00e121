#include "leakscan/rng.hpp"

namespace leakscan {

uint64_t derive_seed(uint64_t base, std::string_view stream) {
    uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a over the tag
    for (unsigned char c : stream) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    Rng mixer(base ^ h);
    return mixer.next_u64();
}

} // namespace leakscan
