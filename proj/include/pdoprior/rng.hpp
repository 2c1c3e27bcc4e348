#ifndef PDOPRIOR_RNG_HPP
#define PDOPRIOR_RNG_HPP

#include <cstdint>
#include <random>

namespace pdoprior {

/// (seed, stream_id) pair; equal pairs reproduce identical draws.
struct RngSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  bool operator==(const RngSeed&) const = default;
};

using Engine = std::mt19937_64;

/// Name recorded in output metadata.
inline constexpr const char* kRngAlgorithm = "mt19937_64/splitmix64-seed_seq";

/// splitmix64 finalizer step.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Engine whose full state is derived from splitmix64 of (seed, stream_id).
Engine make_engine(const RngSeed& seed);

/// Seed for a derived sub-stream, e.g. one per chain or per Monte Carlo replicate.
RngSeed substream(const RngSeed& base, std::uint64_t index) noexcept;

}  // namespace pdoprior

#endif  // PDOPRIOR_RNG_HPP
