#pragma once

#include <cstdint>
#include <random>

#include "mmreach/geometry.hpp"

namespace mmreach::detail {

// splitmix64 step; used to derive independent per-sample seeds so results
// do not depend on thread scheduling.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index + 1));
}

inline ExtVec uniform_in_rect(std::mt19937_64& gen, const HyperRect& box) {
  std::vector<double> p(box.dim());
  for (std::size_t i = 0; i < box.dim(); ++i) {
    std::uniform_real_distribution<double> dist(box.lo[i], box.hi[i]);
    p[i] = box.lo[i] == box.hi[i] ? box.lo[i] : dist(gen);
  }
  return ExtVec::unchecked(std::move(p));
}

// Clips an unbounded rectangle to [-fallback, fallback] per coordinate so it
// can be sampled.
inline HyperRect sampling_box(const HyperRect& r, double fallback = 10.0) {
  std::vector<double> lo(r.dim()), hi(r.dim());
  for (std::size_t i = 0; i < r.dim(); ++i) {
    lo[i] = std::isfinite(r.lo[i]) ? r.lo[i] : -fallback;
    hi[i] = std::isfinite(r.hi[i]) ? r.hi[i] : fallback;
    if (lo[i] > hi[i]) lo[i] = hi[i];
  }
  return HyperRect::of(ExtVec(std::move(lo)), ExtVec(std::move(hi)));
}

}  // namespace mmreach::detail
