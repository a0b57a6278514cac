#include "ssdeconv/rng.hpp"

namespace ssdeconv {

Engine make_engine(Seed seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(mix64(seed)), static_cast<std::uint32_t>(mix64(seed) >> 32)};
  return Engine(seq);
}

}  // namespace ssdeconv
