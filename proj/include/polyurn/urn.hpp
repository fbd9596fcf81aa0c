#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "polyurn/error.hpp"
#include "polyurn/fixed_point.hpp"
#include "polyurn/random.hpp"
#include "polyurn/simplex.hpp"
#include "polyurn/tensor.hpp"

namespace polyurn {

/// Colour counts U(n) of the urn after `step` draws.
struct UrnState {
  std::vector<double> counts;
  long step = 0;
  double sigma = 0.0;
  double initial_mass = 0.0;

  static UrnState initial(std::vector<double> counts, double sigma) {
    UrnState s;
    for (double c : counts) {
      if (!(c >= 0.0)) throw StructuralError("initial urn counts must be non-negative");
    }
    s.initial_mass = 0.0;
    for (double c : counts) s.initial_mass += c;
    s.counts = std::move(counts);
    s.sigma = sigma;
    return s;
  }

  double total() const {
    double t = 0.0;
    for (double c : counts) t += c;
    return t;
  }

  /// Û(n) = U(n)/||U(n)||_1.
  SimplexVector proportions() const { return SimplexVector::normalized(counts); }

  /// ||U(n)||_1 - (||U(0)||_1 + σn); zero up to rounding for balanced urns.
  double balance_defect() const {
    return total() - (initial_mass + sigma * static_cast<double>(step));
  }
};

/// Ordered draw (C_1(n), ..., C_m(n)), colours 0-based.
struct DrawOutcome {
  std::vector<std::size_t> colours;
};

/// m independent draws with replacement, each colour k with probability
/// U_k(n)/||U(n)||_1.
inline DrawOutcome draw(const UrnState& state, std::size_t m, Rng& rng) {
  const double total = state.total();
  if (!(total > 0.0)) throw EmptyUrn();
  DrawOutcome out;
  out.colours.resize(m);
  for (auto& c : out.colours) c = rng.categorical(state.counts, total);
  return out;
}

namespace detail {

inline void check_urn_tensor(const UrnState& state, const ReplacementTensor& r) {
  if (state.counts.size() != r.colours()) {
    throw DimensionMismatch("urn has " + std::to_string(state.counts.size()) +
                            " colours but the tensor has " + std::to_string(r.colours()));
  }
}

// Advances counts in place by one draw; `total` tracks ||U||_1.
inline void advance(std::vector<double>& counts, double& total, const ReplacementTensor& r,
                    Rng& rng) {
  if (!(total > 0.0)) throw EmptyUrn();
  const std::size_t d = r.colours();
  std::size_t flat = 0;
  for (std::size_t s = 0; s < r.draws(); ++s) flat = flat * d + rng.categorical(counts, total);
  const std::size_t tuples = r.draw_tuples();
  const auto entries = r.entries();
  for (std::size_t i = 0; i < d; ++i) {
    const double add = entries[i * tuples + flat];
    counts[i] += add;
    total += add;
  }
}

}  // namespace detail

/// U(n+1) = U(n) + R(., C_1(n), ..., C_m(n)).
inline UrnState step(const UrnState& state, const ReplacementTensor& r, Rng& rng) {
  detail::check_urn_tensor(state, r);
  UrnState next = state;
  const DrawOutcome d = draw(state, r.draws(), rng);
  const std::vector<double> col = r.column(d.colours);
  for (std::size_t i = 0; i < col.size(); ++i) next.counts[i] += col[i];
  ++next.step;
  return next;
}

/// Checkpoints {0} ∪ {floor(10^(k/4))} ∪ {n}, ascending, capped at n.
inline std::vector<long> checkpoint_schedule(long n) {
  std::vector<long> out{0};
  for (int k = 0;; ++k) {
    const long c = static_cast<long>(std::floor(std::pow(10.0, k / 4.0) + 1e-9));
    if (c > n) break;
    if (c != out.back()) out.push_back(c);
  }
  if (out.back() != n) out.push_back(n);
  return out;
}

struct RunResult {
  UrnState final_state;
  std::vector<long> checkpoints;
  std::vector<SimplexVector> proportions;  // Û at each checkpoint
};

namespace detail {

inline void require_urn_assumptions(const ReplacementTensor& r) {
  require_tenable(r);
  require_balanced(r);
}

}  // namespace detail

inline RunResult run(const ReplacementTensor& r, const UrnState& initial, long n,
                     std::uint64_t seed) {
  if (n < 0) throw Error("run: n must be non-negative");
  detail::require_urn_assumptions(r);
  detail::check_urn_tensor(initial, r);
  const double sigma = require_balanced(r);
  Rng rng(seed);
  RunResult out;
  out.checkpoints = checkpoint_schedule(n);
  std::vector<double> counts = initial.counts;
  double total = initial.total();
  long t = 0;
  for (long c : out.checkpoints) {
    for (; t < c; ++t) detail::advance(counts, total, r, rng);
    if (!(total > 0.0)) throw EmptyUrn();
    out.proportions.push_back(SimplexVector::normalized(counts));
  }
  out.final_state = initial;
  out.final_state.counts = std::move(counts);
  out.final_state.step = initial.step + n;
  out.final_state.sigma = sigma;
  return out;
}

struct WeightedState {
  UrnState state;
  double probability = 0.0;
};

inline constexpr double kMaxEnumeration = 1e6;

namespace detail {

// Float sums of the same columns in different orders differ in the last
// bits; states are merged on counts quantised to 1e-9.
inline std::vector<long long> state_key(std::span<const double> counts) {
  std::vector<long long> key(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) key[i] = std::llround(counts[i] * 1e9);
  return key;
}

}  // namespace detail

/// Exact law of U(n): every ordered draw sequence weighted by its product of
/// categorical probabilities, merged over coinciding states. Requires
/// d^(m n) <= 10^6.
inline std::vector<WeightedState> exact_distribution(const ReplacementTensor& r,
                                                     const UrnState& initial, long n) {
  if (n < 0) throw Error("exact_distribution: n must be non-negative");
  detail::require_urn_assumptions(r);
  detail::check_urn_tensor(initial, r);
  const double leaves =
      std::pow(static_cast<double>(r.colours()), static_cast<double>(r.draws() * n));
  if (leaves > kMaxEnumeration) {
    throw TooLarge("exact_distribution: d^(m n) = " + std::to_string(leaves) + " exceeds 1e6");
  }
  const std::size_t d = r.colours();
  const std::size_t m = r.draws();
  UrnState start = initial;
  start.sigma = require_balanced(r);
  std::map<std::vector<long long>, WeightedState> layer;
  layer.emplace(detail::state_key(start.counts), WeightedState{start, 1.0});
  std::vector<std::size_t> tuple(m);
  for (long t = 0; t < n; ++t) {
    std::map<std::vector<long long>, WeightedState> next;
    for (const auto& [key, ws] : layer) {
      const double total = ws.state.total();
      if (!(total > 0.0)) throw EmptyUrn();
      std::fill(tuple.begin(), tuple.end(), 0);
      do {
        double p = ws.probability;
        for (std::size_t c : tuple) p *= ws.state.counts[c] / total;
        if (p == 0.0) continue;
        UrnState s = ws.state;
        const std::size_t flat = flatten(tuple, d);
        for (std::size_t i = 0; i < d; ++i) s.counts[i] += r(i, flat);
        ++s.step;
        auto k = detail::state_key(s.counts);
        auto it = next.find(k);
        if (it == next.end()) {
          next.emplace(std::move(k), WeightedState{std::move(s), p});
        } else {
          it->second.probability += p;
        }
      } while (next_tuple(tuple, d));
    }
    layer = std::move(next);
  }
  std::vector<WeightedState> out;
  out.reserve(layer.size());
  for (auto& [key, ws] : layer) out.push_back(std::move(ws));
  return out;
}

/// Total-variation distance between two finite laws on urn states.
inline double total_variation(std::span<const WeightedState> a, std::span<const WeightedState> b) {
  std::map<std::vector<long long>, std::pair<double, double>> joint;
  for (const auto& w : a) joint[detail::state_key(w.state.counts)].first += w.probability;
  for (const auto& w : b) joint[detail::state_key(w.state.counts)].second += w.probability;
  double tv = 0.0;
  for (const auto& [k, p] : joint) tv += std::abs(p.first - p.second);
  return 0.5 * tv;
}

struct TrajectoryStats {
  std::vector<long> n_values;
  std::vector<double> mean_l1_error;  // E||Û(n) - x*||_1 over replicates
  std::vector<double> standard_error;  // of that mean
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  SimplexVector target;
};

/// Independent replicates (replicate r seeded with derive_seed(seed, r)),
/// aggregated in replicate order. The target defaults to solve(R).
inline TrajectoryStats monte_carlo(const ReplacementTensor& r, const UrnState& initial, long n,
                                   std::size_t replicates, std::uint64_t seed,
                                   std::optional<SimplexVector> target = std::nullopt) {
  if (replicates < 1) throw Error("monte_carlo needs at least one replicate");
  detail::require_urn_assumptions(r);
  detail::check_urn_tensor(initial, r);
  if (!target) target = solve(r).x_star;
  if (target->size() != r.colours()) throw DimensionMismatch("target has the wrong length");

  const std::vector<long> schedule = checkpoint_schedule(n);
  std::vector<std::vector<double>> errors(replicates);
  parallel_for(replicates, [&](std::size_t rep) {
    const RunResult res = run(r, initial, n, derive_seed(seed, rep));
    errors[rep].reserve(schedule.size());
    for (const auto& p : res.proportions) errors[rep].push_back(l1_distance(p, *target));
  });

  TrajectoryStats stats;
  stats.n_values = schedule;
  stats.replicates = replicates;
  stats.seed = seed;
  stats.target = *target;
  const double count = static_cast<double>(replicates);
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    double sum = 0.0;
    for (const auto& e : errors) sum += e[k];
    const double mean = sum / count;
    double ss = 0.0;
    for (const auto& e : errors) ss += (e[k] - mean) * (e[k] - mean);
    const double var = replicates > 1 ? ss / (count - 1.0) : 0.0;
    stats.mean_l1_error.push_back(mean);
    stats.standard_error.push_back(std::sqrt(var / count));
  }
  return stats;
}

}  // namespace polyurn
