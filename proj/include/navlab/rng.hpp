#ifndef navlab_rng_hpp
#define navlab_rng_hpp

#include <array>
#include <cstdint>
#include <limits>

namespace navlab {

/*
 * Philox4x32-10 counter-based generator (Salmon et al., Random123).
 *
 * The 64-bit seed is the key. The 128-bit counter is split into a 64-bit
 * stream id (high words) and a 64-bit block index (low words), so each
 * (seed, stream) pair names an independent sequence of 2^64 blocks. Every
 * parallel unit of work (one scale class, one vertex, one routing trial)
 * draws from its own stream, which makes results independent of the
 * schedule.
 */
class Philox4x32 {
public:
    using result_type = std::uint64_t;
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    Philox4x32(std::uint64_t seed, std::uint64_t stream);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();

    /// Uniform double in [0, 1).
    double uniform();

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    static Block generate(Block counter, Key key);

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_index_ = 0;
    Block buffer_{};
    int used_ = 4;
};

/// Stream namespaces; the tag occupies the top byte of the stream id.
enum class StreamTag : std::uint64_t {
    ProductClass = 1,
    RbaVertex = 2,
    RouteTrial = 3,
    ExactProfile = 4,
    ExactPairs = 5,
    CoherencePairs = 6,
    ProbePairs = 7,
    SandwichProduct = 8,
    Experiment = 9,
    ProductCount = 10,
};

inline std::uint64_t stream_id(StreamTag tag, std::uint64_t index) {
    return (static_cast<std::uint64_t>(tag) << 56) ^ (index & ((std::uint64_t{1} << 56) - 1));
}

inline Philox4x32 make_stream(std::uint64_t seed, StreamTag tag, std::uint64_t index) {
    return Philox4x32(seed, stream_id(tag, index));
}

/// Uniform integer in [0, bound) by rejection; bound > 0.
std::uint64_t uniform_below(Philox4x32& rng, std::uint64_t bound);

}

#endif /* navlab_rng_hpp */
