#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "polyurn/error.hpp"
#include "polyurn/multi_index.hpp"

namespace polyurn {

inline constexpr double kSimplexTolerance = 1e-12;

/// Which index set a simplex vector lives on: colours {0..base-1} (arity 1)
/// or ordered tuples {0..base-1}^arity.
struct IndexSet {
  std::size_t base = 1;
  std::size_t arity = 1;

  std::size_t size() const { return checked_pow(base, arity); }
  bool operator==(const IndexSet&) const = default;
};

inline double l1_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

inline double l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("l1_distance: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

/// A probability vector: non-negative coordinates summing to one.
class SimplexVector {
 public:
  SimplexVector() = default;

  /// Validates coordinates; throws StructuralError when outside the simplex.
  SimplexVector(std::vector<double> coords, IndexSet index_set)
      : coords_(std::move(coords)), index_set_(index_set) {
    if (coords_.size() != index_set_.size()) {
      throw DimensionMismatch("simplex vector length " + std::to_string(coords_.size()) +
                              " does not match index set size " +
                              std::to_string(index_set_.size()));
    }
    double total = 0.0;
    for (double c : coords_) {
      if (!(c >= 0.0)) throw StructuralError("simplex vector has a negative or NaN coordinate");
      total += c;
    }
    if (std::abs(total - 1.0) > kSimplexTolerance) {
      throw StructuralError("simplex vector coordinates sum to " + std::to_string(total));
    }
  }

  explicit SimplexVector(std::vector<double> coords)
      : SimplexVector(coords, IndexSet{coords.size(), 1}) {}

  /// Scales a non-negative vector of positive mass onto the simplex.
  static SimplexVector normalized(std::span<const double> mass, IndexSet index_set) {
    double total = 0.0;
    for (double c : mass) {
      if (!(c >= 0.0)) throw StructuralError("cannot normalise a vector with negative entries");
      total += c;
    }
    if (!(total > 0.0)) throw StructuralError("cannot normalise a vector of zero mass");
    std::vector<double> coords(mass.begin(), mass.end());
    for (double& c : coords) c /= total;
    return SimplexVector(std::move(coords), index_set);
  }

  static SimplexVector normalized(std::span<const double> mass) {
    return normalized(mass, IndexSet{mass.size(), 1});
  }

  static SimplexVector uniform(IndexSet index_set) {
    const std::size_t n = index_set.size();
    return SimplexVector(std::vector<double>(n, 1.0 / static_cast<double>(n)), index_set);
  }

  static SimplexVector vertex(std::size_t k, IndexSet index_set) {
    std::vector<double> coords(index_set.size(), 0.0);
    coords.at(k) = 1.0;
    return SimplexVector(std::move(coords), index_set);
  }

  std::span<const double> coords() const { return coords_; }
  const std::vector<double>& vector() const { return coords_; }
  const IndexSet& index_set() const { return index_set_; }
  std::size_t size() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }

 private:
  std::vector<double> coords_;
  IndexSet index_set_;
};

inline double l1_distance(const SimplexVector& a, const SimplexVector& b) {
  return l1_distance(a.coords(), b.coords());
}

/// nu ⊗ ... ⊗ nu (arity copies), flattened with the first factor slowest.
inline SimplexVector tensor_power(const SimplexVector& nu, std::size_t arity) {
  const std::size_t d = nu.size();
  const IndexSet product{d, arity};
  std::vector<double> coords(product.size());
  std::vector<std::size_t> tuple(arity, 0);
  std::size_t flat = 0;
  do {
    double p = 1.0;
    for (std::size_t t : tuple) p *= nu[t];
    coords[flat++] = p;
  } while (next_tuple(tuple, d));
  // Products of floats may drift from unit mass by a few ulps.
  return SimplexVector::normalized(coords, product);
}

}  // namespace polyurn
