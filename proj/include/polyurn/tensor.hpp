#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polyurn/error.hpp"
#include "polyurn/multi_index.hpp"
#include "polyurn/simplex.hpp"

namespace polyurn {

namespace detail {

// Contracts the m conditioning slots of a dense (dim)^(m+1) array with the
// given vectors, last slot first. Returns the dim-long output mode.
inline std::vector<double> contract(std::span<const double> entries, std::size_t dim,
                                    std::size_t arity,
                                    std::span<const std::span<const double>> args) {
  if (args.size() != arity) {
    throw DimensionMismatch("expected " + std::to_string(arity) + " arguments, got " +
                            std::to_string(args.size()));
  }
  for (const auto& a : args) {
    if (a.size() != dim) {
      throw DimensionMismatch("argument length " + std::to_string(a.size()) +
                              " does not match dimension " + std::to_string(dim));
    }
  }
  std::vector<double> cur(entries.begin(), entries.end());
  std::vector<double> next;
  for (std::size_t s = arity; s-- > 0;) {
    const auto& x = args[s];
    const std::size_t outer = cur.size() / dim;
    next.assign(outer, 0.0);
    for (std::size_t k = 0; k < outer; ++k) {
      const double* row = cur.data() + k * dim;
      double acc = 0.0;
      for (std::size_t j = 0; j < dim; ++j) acc += row[j] * x[j];
      next[k] = acc;
    }
    cur.swap(next);
  }
  return cur;
}

inline std::vector<double> contract_diagonal(std::span<const double> entries, std::size_t dim,
                                             std::size_t arity, std::span<const double> x) {
  std::vector<std::span<const double>> args(arity, x);
  return contract(entries, dim, arity, args);
}

}  // namespace detail

/// R(i, j_1, ..., j_m): balls of colour i added when the ordered draw is
/// (j_1, ..., j_m). Entries are dense and row-major with i slowest.
/// Colours are 0-based in the API.
class ReplacementTensor {
 public:
  ReplacementTensor() = default;

  ReplacementTensor(std::size_t d, std::size_t m, std::vector<double> entries,
                    std::string name = {})
      : d_(d), m_(m), entries_(std::move(entries)), name_(std::move(name)) {
    if (d_ < 1) throw StructuralError("replacement tensor needs d >= 1");
    if (m_ < 1) throw StructuralError("replacement tensor needs m >= 1");
    const std::size_t expected = checked_pow(d_, m_ + 1);
    if (entries_.size() != expected) {
      throw StructuralError("replacement tensor with d=" + std::to_string(d_) +
                            ", m=" + std::to_string(m_) + " needs " + std::to_string(expected) +
                            " entries, got " + std::to_string(entries_.size()));
    }
    for (double e : entries_) {
      if (!std::isfinite(e)) throw StructuralError("replacement tensor has a non-finite entry");
    }
  }

  std::size_t colours() const { return d_; }
  std::size_t draws() const { return m_; }
  /// Number of ordered draw tuples, d^m.
  std::size_t draw_tuples() const { return entries_.size() / d_; }
  std::span<const double> entries() const { return entries_; }
  const std::string& name() const { return name_; }

  double operator()(std::size_t colour, std::size_t draw_flat) const {
    return entries_[colour * draw_tuples() + draw_flat];
  }
  double at(std::size_t colour, std::span<const std::size_t> draw) const {
    if (colour >= d_ || draw.size() != m_) throw DimensionMismatch("bad tensor index");
    for (std::size_t j : draw) {
      if (j >= d_) throw DimensionMismatch("bad tensor index");
    }
    return (*this)(colour, flatten(draw, d_));
  }

  /// What gets added to the urn for the draw with flat index `draw_flat`.
  std::vector<double> column(std::size_t draw_flat) const {
    std::vector<double> col(d_);
    for (std::size_t i = 0; i < d_; ++i) col[i] = (*this)(i, draw_flat);
    return col;
  }
  std::vector<double> column(std::span<const std::size_t> draw) const {
    if (draw.size() != m_) throw DimensionMismatch("draw tuple has wrong arity");
    return column(flatten(draw, d_));
  }

  ReplacementTensor scaled(double c) const {
    std::vector<double> e = entries_;
    for (double& x : e) x *= c;
    return ReplacementTensor(d_, m_, std::move(e), name_);
  }

 private:
  std::size_t d_ = 0;
  std::size_t m_ = 0;
  std::vector<double> entries_;
  std::string name_;
};

/// Transition tensor T(w, s_1, ..., s_m) of an m-dependent chain on a finite
/// state space; every conditional slice sums to one over w.
class StochasticTensor {
 public:
  StochasticTensor() = default;

  StochasticTensor(std::size_t state_size, std::size_t arity, std::vector<double> entries)
      : n_(state_size), arity_(arity), entries_(std::move(entries)) {
    if (n_ < 1 || arity_ < 1) throw StructuralError("stochastic tensor needs positive sizes");
    if (entries_.size() != checked_pow(n_, arity_ + 1)) {
      throw StructuralError("stochastic tensor has the wrong number of entries");
    }
    const std::size_t cond = conditionings();
    for (std::size_t c = 0; c < cond; ++c) {
      double total = 0.0;
      for (std::size_t w = 0; w < n_; ++w) {
        const double v = entries_[w * cond + c];
        if (!(v >= 0.0)) throw StructuralError("stochastic tensor has a negative entry");
        total += v;
      }
      if (std::abs(total - 1.0) > kSimplexTolerance) {
        throw StructuralError("stochastic tensor slice sums to " + std::to_string(total));
      }
    }
  }

  std::size_t state_size() const { return n_; }
  std::size_t arity() const { return arity_; }
  std::size_t conditionings() const { return entries_.size() / n_; }
  std::span<const double> entries() const { return entries_; }

  double operator()(std::size_t w, std::size_t cond_flat) const {
    return entries_[w * conditionings() + cond_flat];
  }

 private:
  std::size_t n_ = 0;
  std::size_t arity_ = 0;
  std::vector<double> entries_;
};

/// Outcome of the tenability / balance / ergodicity checks.
struct AssumptionReport {
  bool tenable = false;
  std::optional<double> sigma;
  double balance_deviation = 0.0;
  double ergodicity_lhs = 0.0;
  // 2σ/m; NaN when the tensor is not balanced.
  double ergodicity_bound = std::numeric_limits<double>::quiet_NaN();
  bool ergodicity_holds = false;
  // lhs equals the bound: no strict inequality, no certificate.
  bool ergodicity_boundary = false;
  std::optional<double> q_estimate;

  bool all_hold() const { return tenable && sigma.has_value() && ergodicity_holds; }
};

inline constexpr double kBalanceTolerance = 1e-12;

namespace detail {

struct ColumnSums {
  double sigma;
  double deviation;
};

inline ColumnSums column_sums(const ReplacementTensor& r) {
  const std::size_t tuples = r.draw_tuples();
  std::vector<double> sums(tuples, 0.0);
  for (std::size_t i = 0; i < r.colours(); ++i) {
    for (std::size_t t = 0; t < tuples; ++t) sums[t] += r(i, t);
  }
  double mean = 0.0;
  for (double s : sums) mean += s;
  mean /= static_cast<double>(tuples);
  double dev = 0.0;
  for (double s : sums) dev = std::max(dev, std::abs(s - mean));
  return {mean, dev};
}

// Max over ordered draw tuples j, j' of sum_i |R(i, j) - R(i, j')|.
inline double max_column_l1(const ReplacementTensor& r) {
  const std::size_t tuples = r.draw_tuples();
  double best = 0.0;
  for (std::size_t a = 0; a < tuples; ++a) {
    for (std::size_t b = a + 1; b < tuples; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < r.colours(); ++i) s += std::abs(r(i, a) - r(i, b));
      best = std::max(best, s);
    }
  }
  return best;
}

}  // namespace detail

inline std::optional<double> balance_sigma(const ReplacementTensor& r) {
  const auto sums = detail::column_sums(r);
  if (!(sums.sigma > 0.0)) return std::nullopt;
  if (sums.deviation > kBalanceTolerance * std::max(1.0, sums.sigma)) return std::nullopt;
  return sums.sigma;
}

/// σ of a balanced tensor; throws NotBalanced otherwise.
inline double require_balanced(const ReplacementTensor& r) {
  const auto sigma = balance_sigma(r);
  if (!sigma) throw NotBalanced();
  return *sigma;
}

inline std::vector<double> apply(const ReplacementTensor& r,
                                 std::span<const std::span<const double>> args) {
  return detail::contract(r.entries(), r.colours(), r.draws(), args);
}

inline std::vector<double> apply(const ReplacementTensor& r,
                                 std::initializer_list<std::span<const double>> args) {
  return polyurn::apply(r, std::span<const std::span<const double>>(args.begin(), args.size()));
}

/// R(x, ..., x).
inline std::vector<double> apply_diagonal(const ReplacementTensor& r, std::span<const double> x) {
  return detail::contract_diagonal(r.entries(), r.colours(), r.draws(), x);
}

inline std::vector<double> apply(const StochasticTensor& t,
                                 std::span<const std::span<const double>> args) {
  return detail::contract(t.entries(), t.state_size(), t.arity(), args);
}

inline std::vector<double> apply_diagonal(const StochasticTensor& t, std::span<const double> x) {
  return detail::contract_diagonal(t.entries(), t.state_size(), t.arity(), x);
}

/// R/σ viewed as a stochastic tensor on the colours.
inline StochasticTensor colour_chain_tensor(const ReplacementTensor& r) {
  const double sigma = require_balanced(r);
  std::vector<double> e(r.entries().begin(), r.entries().end());
  for (double& x : e) x /= sigma;
  return StochasticTensor(r.colours(), r.draws(), std::move(e));
}

inline constexpr std::size_t kMaxInducedEntries = std::size_t{1} << 24;

/// Transition tensor of the m-dependent chain on S = {colours}^m:
/// T(x, a^(1), ..., a^(m)) = prod_i R(x_i, a^(i)) / σ^m.
inline StochasticTensor induced_chain_tensor(const ReplacementTensor& r) {
  const double sigma = require_balanced(r);
  const std::size_t d = r.colours();
  const std::size_t m = r.draws();
  const std::size_t states = checked_pow(d, m);
  const std::size_t total = checked_pow(states, m + 1);
  if (total > kMaxInducedEntries) {
    throw TooLarge("induced chain tensor would have " + std::to_string(total) + " entries");
  }
  const double scale = std::pow(sigma, -static_cast<double>(m));
  std::vector<double> entries(total);
  std::vector<std::size_t> x(m);
  std::vector<std::size_t> cond(m);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    for (std::size_t s = m; s-- > 0;) {
      cond[s] = rest % states;
      rest /= states;
    }
    x = unflatten(rest, d, m);
    double p = scale;
    for (std::size_t i = 0; i < m && p != 0.0; ++i) p *= r(x[i], cond[i]);
    entries[flat] = p;
  }
  return StochasticTensor(states, m, std::move(entries));
}

struct ErgodicityCoefficients {
  std::vector<double> taus;  // one per conditioning slot
  double q = 0.0;            // sum of taus
};

/// τ_s = ½ max over conditioning tuples differing only in slot s of the L¹
/// distance between the two conditional distributions.
inline ErgodicityCoefficients ergodicity_coefficients(const StochasticTensor& t) {
  const std::size_t n = t.state_size();
  const std::size_t m = t.arity();
  const std::size_t cond = t.conditionings();
  ErgodicityCoefficients out;
  out.taus.assign(m, 0.0);
  std::size_t stride = cond;
  for (std::size_t s = 0; s < m; ++s) {
    stride /= n;  // slot s has stride n^(m-1-s)
    double best = 0.0;
    for (std::size_t c = 0; c < cond; ++c) {
      const std::size_t digit = (c / stride) % n;
      for (std::size_t b = digit + 1; b < n; ++b) {
        const std::size_t c2 = c + (b - digit) * stride;
        double l1 = 0.0;
        for (std::size_t w = 0; w < n; ++w) l1 += std::abs(t(w, c) - t(w, c2));
        best = std::max(best, l1);
      }
    }
    out.taus[s] = 0.5 * best;
    out.q += out.taus[s];
  }
  return out;
}

/// Checks tenability, balance and the ergodicity bound 2σ/m (strict).
inline AssumptionReport validate(const ReplacementTensor& r) {
  AssumptionReport rep;
  rep.tenable = std::all_of(r.entries().begin(), r.entries().end(),
                            [](double e) { return e >= 0.0; });
  const auto sums = detail::column_sums(r);
  rep.balance_deviation = sums.deviation;
  rep.sigma = balance_sigma(r);
  rep.ergodicity_lhs = detail::max_column_l1(r);
  if (rep.sigma) {
    const double sigma = *rep.sigma;
    const double m = static_cast<double>(r.draws());
    rep.ergodicity_bound = 2.0 * sigma / m;
    rep.ergodicity_holds = rep.ergodicity_lhs < rep.ergodicity_bound;
    rep.ergodicity_boundary = std::abs(rep.ergodicity_lhs - rep.ergodicity_bound) <=
                              kBalanceTolerance * std::max(1.0, rep.ergodicity_bound);
    if (rep.ergodicity_boundary) rep.ergodicity_holds = false;
    if (rep.ergodicity_holds && rep.tenable) {
      const std::size_t states = checked_pow(r.colours(), r.draws());
      std::optional<std::size_t> size;
      try {
        size = checked_pow(states, r.draws() + 1);
      } catch (const TooLarge&) {
      }
      if (size && *size <= (kMaxInducedEntries >> 2)) {
        rep.q_estimate = ergodicity_coefficients(induced_chain_tensor(r)).q;
      } else {
        // Each slot of the induced tensor contributes lhs/(2σ).
        rep.q_estimate = m * rep.ergodicity_lhs / (2.0 * sigma);
      }
    }
  }
  return rep;
}

}  // namespace polyurn
