#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "polyurn/error.hpp"

namespace polyurn {

// Integer power with overflow detection; tensors here are small but sizes
// such as d^(m+1) come straight from user input.
inline std::size_t checked_pow(std::size_t base, std::size_t exponent) {
  std::size_t result = 1;
  for (std::size_t e = 0; e < exponent; ++e) {
    if (base != 0 && result > std::numeric_limits<std::size_t>::max() / base) {
      throw TooLarge("index space overflows size_t");
    }
    result *= base;
  }
  return result;
}

/// Row-major flattening of a tuple (t_1, ..., t_k) over {0..base-1}^k,
/// first component slowest.
inline std::size_t flatten(std::span<const std::size_t> tuple, std::size_t base) {
  std::size_t flat = 0;
  for (std::size_t t : tuple) flat = flat * base + t;
  return flat;
}

inline std::vector<std::size_t> unflatten(std::size_t flat, std::size_t base, std::size_t arity) {
  std::vector<std::size_t> tuple(arity);
  for (std::size_t s = arity; s-- > 0;) {
    tuple[s] = flat % base;
    flat /= base;
  }
  return tuple;
}

// Odometer increment; returns false once the tuple wraps back to all zeros.
inline bool next_tuple(std::span<std::size_t> tuple, std::size_t base) {
  for (std::size_t s = tuple.size(); s-- > 0;) {
    if (++tuple[s] < base) return true;
    tuple[s] = 0;
  }
  return false;
}

}  // namespace polyurn
