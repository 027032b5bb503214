#pragma once

#include <cstdint>
#include <random>

#include "gst/linalg.hpp"

namespace gst {

/// Uniform double in [0,1) from the raw engine stream; bypasses
/// std::uniform_real_distribution so sequences are identical across
/// standard libraries.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline Vector random_vector(int n, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * uniform01(rng);
  return v;
}

}  // namespace gst
