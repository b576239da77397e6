#pragma once

#include <array>
#include <cstdint>

namespace scb {

/// Philox4x32-10 counter-based block cipher (Salmon et al., Random123).
/// Pure function of (counter, key); no internal state.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key) noexcept;
};

/// Tags that keep streams for different purposes apart under one user seed.
enum class StreamTag : std::uint64_t {
    SupPaths = 0x5u,
    Bootstrap = 0xB0u,
    Split = 0x5B1u,
    Replication = 0x4E9u,
    Data = 0xDA7Au,
};

/// SplitMix64 finalizer; used to derive independent seeds from (seed, tag, index).
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives a child seed. Distinct (tag, index) pairs give unrelated streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) noexcept;

inline std::uint64_t derive_seed(std::uint64_t seed, StreamTag tag, std::uint64_t index) noexcept {
    return derive_seed(seed, static_cast<std::uint64_t>(tag), index);
}

/// Sequential view over the Philox keystream for one (seed, stream) pair.
///
/// Two streams with the same (seed, stream_id) yield identical draws regardless of
/// which thread consumes them, which is what makes parallel and serial runs agree.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

    std::uint64_t next_u64() noexcept;
    /// Uniform on [0,1) with 53 random bits.
    double uniform() noexcept;
    /// Uniform on the open interval (0,1).
    double uniform_open() noexcept;
    /// Standard normal via the Marsaglia polar method.
    double normal() noexcept;
    /// Exponential(1) by inversion.
    double exponential() noexcept;
    /// Uniform integer in [0, bound), bound > 0 (Lemire's nearly-divisionless method).
    std::uint64_t below(std::uint64_t bound) noexcept;

private:
    void refill() noexcept;

    Philox4x32::Key key_{};
    std::uint64_t stream_id_ = 0;
    std::uint64_t block_index_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int buffered_ = 0;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace scb
