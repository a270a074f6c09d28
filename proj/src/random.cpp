#include "xosp/random.hpp"

namespace xosp {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Profile sample_profile(const Instance& inst, Rng& rng) {
  Profile p(inst.num_buyers());
  for (int i = 0; i < inst.num_buyers(); ++i) p[i] = inst.buyer(i).locate(uniform01(rng));
  return p;
}

}  // namespace xosp
