#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "polyurn/error.hpp"
#include "polyurn/simplex.hpp"
#include "polyurn/tensor.hpp"

namespace polyurn {

struct CatalogEntry {
  std::string name;
  std::string description;
  ReplacementTensor tensor;
  double expected_sigma = 0.0;
  double expected_lhs = 0.0;  // max column L1 distance
  bool expected_e_holds = false;
  // Closed forms where known; for (E)-failing tensors, every fixed point.
  std::vector<SimplexVector> expected_fixed_points;
};

/// Two-colour, two-draw tensor from the conventional 2x4 display
///   row k: R(1,1,k) R(2,1,k) | R(1,2,k) R(2,2,k)
/// so that display[k][2 j + i] = R(i, j, k) with 0-based i, j, k.
inline ReplacementTensor from_display(const std::array<std::array<double, 4>, 2>& display,
                                      std::string name = {}) {
  std::vector<double> e(8);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      for (std::size_t k = 0; k < 2; ++k) e[(i * 2 + j) * 2 + k] = display[k][2 * j + i];
    }
  }
  return ReplacementTensor(2, 2, std::move(e), std::move(name));
}

/// Two-colour affine urn a_i = a0 + i h, i = 0, 1, 2 (number of colour-2
/// balls drawn), with R(1, j, k) = a_{#colour-2 in (j,k)}.
inline ReplacementTensor affine_tensor(double a0, double h, double sigma) {
  const double a1 = a0 + h;
  const double a2 = a0 + 2 * h;
  return from_display({{{a0, sigma - a0, a1, sigma - a1}, {a1, sigma - a1, a2, sigma - a2}}},
                      "affine");
}

/// m-draw urn whose replacement depends only on the first draw:
/// R(i, j_1, ..., j_m) = a(i, j_1) for a d x d matrix a (row-major).
inline ReplacementTensor first_draw_tensor(std::size_t d, std::size_t m,
                                           const std::vector<double>& a) {
  if (a.size() != d * d) throw DimensionMismatch("first_draw_tensor: matrix must be d x d");
  const std::size_t tuples = checked_pow(d, m);
  const std::size_t stride = tuples / d;
  std::vector<double> e(d * tuples);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t t = 0; t < tuples; ++t) e[i * tuples + t] = a[i * d + t / stride];
  }
  return ReplacementTensor(d, m, std::move(e), "first_draw");
}

inline ReplacementTensor chang_zhang_tensor() {
  // R(i, j1, j2, j3) for the 3-draw, 2-colour example.
  const std::vector<double> e{
      0.872,       2.416 / 3, 2.416 / 3, 0.616 / 3,  // i=1, j1=1
      2.416 / 3,   0.616 / 3, 0.616 / 3, 0.072,      // i=1, j1=2
      0.128,       0.584 / 3, 0.584 / 3, 2.384 / 3,  // i=2, j1=1
      0.584 / 3,   2.384 / 3, 2.384 / 3, 0.928,      // i=2, j1=2
  };
  return ReplacementTensor(2, 3, e, "chang_zhang");
}

namespace detail {

inline SimplexVector two(double p) { return SimplexVector(std::vector<double>{p, 1.0 - p}); }

inline CatalogEntry make_entry(std::string name, std::string description, ReplacementTensor t,
                               double sigma, double lhs, bool holds,
                               std::vector<SimplexVector> fps) {
  t = ReplacementTensor(t.colours(), t.draws(),
                        std::vector<double>(t.entries().begin(), t.entries().end()), name);
  return CatalogEntry{std::move(name), std::move(description), std::move(t), sigma, lhs, holds,
                      std::move(fps)};
}

}  // namespace detail

inline CatalogEntry affine_entry(double a0, double h, double sigma) {
  const double p = (a0 + 2 * h) / (sigma + 2 * h);
  const double lhs = 2.0 * std::max({std::abs(h), std::abs(2 * h)});
  return detail::make_entry("affine", "affine urn a_i = a0 + i h", affine_tensor(a0, h, sigma),
                            sigma, lhs, lhs < sigma, {detail::two(p)});
}

/// Every worked example, in presentation order.
inline std::vector<CatalogEntry> catalog() {
  using detail::make_entry;
  using detail::two;
  std::vector<CatalogEntry> out;
  out.push_back(make_entry("polya_identity", "R_ijk = 1{i=j} + 1{i=k}; random limit",
                           from_display({{{2, 0, 1, 1}, {1, 1, 0, 2}}}), 2, 4, false, {}));
  out.push_back(make_entry("all_ones", "R_ijk = 1: one ball of each colour per step",
                           from_display({{{1, 1, 1, 1}, {1, 1, 1, 1}}}), 2, 0, true, {two(0.5)}));
  out.push_back(affine_entry(1, 1, 5));
  out.push_back(make_entry("asym_sqrt2", "order-dependent replacement, sigma = 3",
                           from_display({{{1, 2, 1, 2}, {2, 1, 1, 2}}}), 3, 2, true,
                           {two(std::sqrt(2.0) - 1.0)}));
  out.push_back(make_entry("asym_sqrt11", "order-dependent replacement, sigma = 5",
                           from_display({{{0, 5, 1, 4}, {2, 3, 2, 3}}}), 5, 4, true,
                           {two(std::sqrt(11.0) - 3.0)}));
  out.push_back(make_entry("lms_ex1", "non-affine symmetric urn, sigma = 3",
                           from_display({{{1, 2, 2, 1}, {2, 1, 1, 2}}}), 3, 2, true, {two(0.5)}));
  out.push_back(make_entry("lms_ex2", "two fixed points, (E) fails",
                           from_display({{{4, 0, 1, 3}, {1, 3, 1, 3}}}), 4, 6, false,
                           {two(1.0 / 3.0), two(1.0)}));
  out.push_back(make_entry("lms_ex3", "unique fixed point although (E) fails",
                           from_display({{{7, 1, 3, 5}, {3, 5, 1, 7}}}), 8, 12, false,
                           {two(1.0 - 1.0 / std::sqrt(2.0))}));
  out.push_back(make_entry("li_ng", "Picard iteration oscillates; unique fixed point (1/2, 1/2)",
                           from_display({{{0, 1, 0, 1}, {1, 0, 1, 0}}}), 1, 2, false, {two(0.5)}));
  out.push_back(make_entry("chang_zhang", "positive 3-draw tensor with two fixed points",
                           chang_zhang_tensor(), 1, 1.6, false, {two(0.2), two(0.6)}));
  return out;
}

inline std::optional<CatalogEntry> find_catalog_entry(std::string_view name) {
  for (auto& e : catalog()) {
    if (e.name == name) return e;
  }
  return std::nullopt;
}

}  // namespace polyurn
