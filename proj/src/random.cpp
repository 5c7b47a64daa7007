#include "irsbf/random.hpp"

namespace irsbf {

RandomStream RandomStream::child(std::uint64_t index) const noexcept {
  // Two rounds of the SplitMix finalizer over (seed, index).
  SplitMix64 mix(seed_ ^ (index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
  mix();
  return RandomStream(mix() ^ index);
}

}  // namespace irsbf
