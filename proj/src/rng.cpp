#include "navlab/rng.hpp"

namespace navlab {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

}

Philox4x32::Philox4x32(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

Philox4x32::Block Philox4x32::generate(Block ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

void Philox4x32::refill() {
    Block counter = {static_cast<std::uint32_t>(block_index_),
                     static_cast<std::uint32_t>(block_index_ >> 32),
                     static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    Key key = {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
    buffer_ = generate(counter, key);
    ++block_index_;
    used_ = 0;
}

Philox4x32::result_type Philox4x32::operator()() {
    if (used_ > 2) {
        refill();
    }
    std::uint64_t lo = buffer_[used_];
    std::uint64_t hi = buffer_[used_ + 1];
    used_ += 2;
    return lo | (hi << 32);
}

double Philox4x32::uniform() {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

std::uint64_t uniform_below(Philox4x32& rng, std::uint64_t bound) {
    // drop the incomplete top bucket so that x % bound is unbiased
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

}
