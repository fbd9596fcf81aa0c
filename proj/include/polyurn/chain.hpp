#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polyurn/error.hpp"
#include "polyurn/fixed_point.hpp"
#include "polyurn/random.hpp"
#include "polyurn/simplex.hpp"
#include "polyurn/tensor.hpp"

namespace polyurn {

/// Initial laws pi_i^(0) on the leaves of the complete m-ary tree of the
/// given depth, in left-to-right order. Node i (0-based) on level k combines
/// nodes m*i + r, r = 0..m-1, of level k-1.
struct LeafProfile {
  std::size_t depth = 0;
  std::vector<SimplexVector> distributions;

  static LeafProfile constant(std::size_t depth, std::size_t m, const SimplexVector& leaf) {
    return LeafProfile{depth, std::vector<SimplexVector>(checked_pow(m, depth), leaf)};
  }

  /// Missing positions past the given leaves are filled with the uniform law.
  static LeafProfile padded(std::size_t depth, std::size_t m, std::vector<SimplexVector> leaves) {
    const std::size_t needed = checked_pow(m, depth);
    if (leaves.empty()) throw DepthMismatch("padded leaf profile needs at least one leaf");
    if (leaves.size() > needed) throw DepthMismatch("more leaves than the tree has positions");
    const SimplexVector u = SimplexVector::uniform(leaves.front().index_set());
    leaves.resize(needed, u);
    return LeafProfile{depth, std::move(leaves)};
  }
};

struct StationaryResult {
  SimplexVector pi;
  bool certified = false;  // q < 1, so pi is the unique invariant law
  double q = 0.0;
  long iterations = 0;
  double residual = 0.0;
};

/// Invariant law pi = T(pi, ..., pi) by Picard iteration from the uniform
/// law, with the same stopping rule as the colour-level solver. Attempts the
/// iteration even when q >= 1 but then reports certified = false.
inline StationaryResult stationary(const StochasticTensor& t, double tol = 1e-12,
                                   long max_iter = 10'000) {
  StationaryResult res;
  res.q = ergodicity_coefficients(t).q;
  res.certified = res.q < 1.0;
  const std::size_t n = t.state_size();
  auto map = [&](std::span<const double> x) {
    std::vector<double> y = apply_diagonal(t, x);
    double total = 0.0;
    for (double v : y) total += v;
    for (double& v : y) v /= total;
    return y;
  };
  const std::optional<double> q = res.certified ? std::optional<double>(res.q) : std::nullopt;
  PicardOutcome run =
      picard_iterate(map, std::vector<double>(n, 1.0 / static_cast<double>(n)), q, tol, max_iter);
  if (!run.converged) throw MaxIterExceeded(run.x, run.residual, run.iterations);
  res.pi = SimplexVector::normalized(run.x);
  res.iterations = run.iterations;
  res.residual = run.residual;
  return res;
}

namespace detail {

inline void check_leaves(const StochasticTensor& t, const LeafProfile& leaves) {
  const std::size_t needed = checked_pow(t.arity(), leaves.depth);
  if (leaves.distributions.size() != needed) {
    throw DepthMismatch("depth " + std::to_string(leaves.depth) + " needs " +
                        std::to_string(needed) + " leaves, got " +
                        std::to_string(leaves.distributions.size()));
  }
  for (const auto& l : leaves.distributions) {
    if (l.size() != t.state_size()) throw DimensionMismatch("leaf law has the wrong length");
  }
}

}  // namespace detail

/// Every level of the recursion pi^(k)_i = T(pi^(k-1)_{m i}, ..., pi^(k-1)_{m i + m - 1});
/// levels[0] are the leaves and levels[depth] holds the single root law.
inline std::vector<std::vector<std::vector<double>>> evolve_levels(const StochasticTensor& t,
                                                                   const LeafProfile& leaves) {
  detail::check_leaves(t, leaves);
  const std::size_t m = t.arity();
  std::vector<std::vector<std::vector<double>>> levels(leaves.depth + 1);
  for (const auto& l : leaves.distributions) levels[0].push_back(l.vector());
  for (std::size_t k = 1; k <= leaves.depth; ++k) {
    const auto& below = levels[k - 1];
    auto& here = levels[k];
    here.resize(below.size() / m);
    parallel_for(here.size(), [&](std::size_t i) {
      std::vector<std::span<const double>> args(m);
      for (std::size_t r = 0; r < m; ++r) args[r] = below[m * i + r];
      here[i] = polyurn::apply(t, args);
    });
  }
  return levels;
}

struct ChainResult {
  SimplexVector pi_1_n;                    // root law pi_1^(n)
  std::vector<double> per_level_max_error;  // max_i ||pi_i^(k) - pi||_1, k = 0..n
  double q = 0.0;
  std::optional<SimplexVector> stationary;  // absent when the invariant law was not found
};

inline ChainResult evolve(const StochasticTensor& t, const LeafProfile& leaves) {
  const auto levels = evolve_levels(t, leaves);
  ChainResult res;
  res.pi_1_n = SimplexVector::normalized(levels.back().front(),
                                         leaves.distributions.front().index_set());
  res.q = ergodicity_coefficients(t).q;
  try {
    res.stationary = stationary(t).pi;
  } catch (const MaxIterExceeded&) {
    return res;
  }
  for (const auto& level : levels) {
    double worst = 0.0;
    for (const auto& law : level) worst = std::max(worst, l1_distance(law, res.stationary->coords()));
    res.per_level_max_error.push_back(worst);
  }
  return res;
}

struct ProductFormCheck {
  bool holds = false;
  double defect = 0.0;  // ||T(pi', ..., pi') - pi'||_1 with pi' = nu^{⊗m}
};

inline ProductFormCheck verify_product_form(const StochasticTensor& t, const SimplexVector& nu) {
  if (checked_pow(nu.size(), t.arity()) != t.state_size()) {
    throw DimensionMismatch("nu^{⊗m} does not live on the tensor's state space");
  }
  const SimplexVector prod = tensor_power(nu, t.arity());
  const std::vector<double> image = apply_diagonal(t, prod.coords());
  ProductFormCheck out;
  out.defect = l1_distance(image, prod.coords());
  out.holds = out.defect <= 1e-10;
  return out;
}

struct CertificateLevel {
  std::size_t level = 0;
  double max_error = 0.0;
  double bound = 0.0;  // q^k max_i ||pi_i^(0) - pi||_1
  bool holds = false;
};

inline constexpr double kCertificateSlack = 1e-10;

/// Checks max_i ||pi_i^(k) - pi||_1 <= q^k max_i ||pi_i^(0) - pi||_1 at
/// every level. A failure means a bug, not a mathematical counterexample.
inline std::vector<CertificateLevel> geometric_certificate(const StochasticTensor& t,
                                                           const LeafProfile& leaves) {
  const double q = ergodicity_coefficients(t).q;
  if (!(q < 1.0)) throw NotContractive("q = " + std::to_string(q) + " >= 1");
  const ChainResult res = evolve(t, leaves);
  if (!res.stationary) throw NotContractive("invariant law not found");
  std::vector<CertificateLevel> out;
  const double start = res.per_level_max_error.front();
  for (std::size_t k = 0; k < res.per_level_max_error.size(); ++k) {
    CertificateLevel row;
    row.level = k;
    row.max_error = res.per_level_max_error[k];
    row.bound = std::pow(q, static_cast<double>(k)) * start;
    row.holds = row.max_error <= row.bound + kCertificateSlack;
    out.push_back(row);
  }
  for (const auto& row : out) {
    if (!row.holds) {
      throw CertificateViolated("level " + std::to_string(row.level) + ": error " +
                                std::to_string(row.max_error) + " exceeds bound " +
                                std::to_string(row.bound));
    }
  }
  return out;
}

/// Forward simulation of the chain: samples every leaf, then each level from
/// its parents' labels. Returns the root label W_1^(n) as a state index.
inline std::size_t sample_root(const StochasticTensor& t, const LeafProfile& leaves, Rng& rng) {
  detail::check_leaves(t, leaves);
  const std::size_t n = t.state_size();
  const std::size_t m = t.arity();
  const std::size_t cond = t.conditionings();
  std::vector<std::size_t> level;
  level.reserve(leaves.distributions.size());
  for (const auto& l : leaves.distributions) level.push_back(rng.categorical(l.coords()));
  std::vector<double> slice(n);
  while (level.size() > 1) {
    std::vector<std::size_t> next(level.size() / m);
    for (std::size_t i = 0; i < next.size(); ++i) {
      std::size_t flat = 0;
      for (std::size_t r = 0; r < m; ++r) flat = flat * n + level[m * i + r];
      for (std::size_t w = 0; w < n; ++w) slice[w] = t.entries()[w * cond + flat];
      next[i] = rng.categorical(slice);
    }
    level = std::move(next);
  }
  return level.front();
}

}  // namespace polyurn
