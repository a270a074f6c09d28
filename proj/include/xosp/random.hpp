#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "xosp/core_model.hpp"

namespace xosp {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; gives independent per-run seeds from (seed, index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Profile sample_profile(const Instance& inst, Rng& rng);

// Calls fn(profile, weight) for every joint atom choice of `buyers`, other
// entries of `base` held fixed. Weights are products of atom probabilities.
template <class F>
void enumerate_atoms(const Instance& inst, const std::vector<int>& buyers, Profile base, F&& fn) {
  std::vector<int> idx(buyers.size(), 0);
  while (true) {
    double w = 1.0;
    for (size_t t = 0; t < buyers.size(); ++t) {
      base[buyers[t]] = idx[t];
      w *= inst.buyer(buyers[t]).atom(idx[t]).prob;
    }
    fn(static_cast<const Profile&>(base), w);
    size_t t = 0;
    for (; t < buyers.size(); ++t) {
      if (++idx[t] < inst.buyer(buyers[t]).num_atoms()) break;
      idx[t] = 0;
    }
    if (t == buyers.size()) return;
  }
}

}  // namespace xosp
