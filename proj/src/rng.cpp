#include "pdoprior/rng.hpp"

#include <array>

namespace pdoprior {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Engine make_engine(const RngSeed& seed) {
  std::uint64_t state = seed.seed;
  std::uint64_t mixed_stream = seed.stream_id;
  state ^= splitmix64(mixed_stream);
  std::array<std::uint32_t, 16> words{};
  for (std::size_t k = 0; k < words.size(); k += 2) {
    const std::uint64_t v = splitmix64(state);
    words[k] = static_cast<std::uint32_t>(v);
    words[k + 1] = static_cast<std::uint32_t>(v >> 32);
  }
  std::seed_seq seq(words.begin(), words.end());
  return Engine(seq);
}

RngSeed substream(const RngSeed& base, std::uint64_t index) noexcept {
  std::uint64_t state = base.stream_id ^ (index * 0xD1B54A32D192ED03ULL);
  return {base.seed, splitmix64(state)};
}

}  // namespace pdoprior
