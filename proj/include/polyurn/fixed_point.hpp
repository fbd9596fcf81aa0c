#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "polyurn/error.hpp"
#include "polyurn/random.hpp"
#include "polyurn/simplex.hpp"
#include "polyurn/tensor.hpp"

namespace polyurn {

struct SolveOptions {
  double tol = 1e-12;
  long max_iter = 10'000;
  // Barycentre when absent.
  std::optional<std::vector<double>> start;
};

enum class FixedPointMethod { picard, picard_newton, newton };

struct FixedPointResult {
  SimplexVector x_star;
  long iterations = 0;
  double residual = 0.0;  // ||F(x) - x||_1 at exit, F the normalised map
  bool certified = false;
  std::optional<double> q;
  FixedPointMethod method = FixedPointMethod::picard;
};

struct PicardOutcome {
  std::vector<double> x;
  long iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

/// Plain Picard iteration x <- f(x). With a contraction modulus q < 1 the
/// loop stops once ||x_{t+1} - x_t|| <= tol (1-q)/q, which bounds both the
/// distance to the fixed point and the residual by tol. Without q it stops
/// on ||x_{t+1} - x_t|| <= tol.
template <typename Map>
PicardOutcome picard_iterate(Map&& f, std::vector<double> x, std::optional<double> q, double tol,
                             long max_iter) {
  if (!(tol > 0.0)) throw Error("tolerance must be positive");
  double threshold = tol;
  if (q) threshold = *q > 0.0 ? tol * (1.0 - *q) / *q : std::numeric_limits<double>::infinity();
  PicardOutcome out;
  for (long t = 1; t <= max_iter; ++t) {
    std::vector<double> y = f(x);
    const double step = l1_distance(y, x);
    x = std::move(y);
    out.iterations = t;
    if (step <= threshold) {
      out.converged = true;
      break;
    }
  }
  out.residual = l1_distance(f(x), x);
  out.x = std::move(x);
  return out;
}

namespace detail {

inline void require_tenable(const ReplacementTensor& r) {
  for (double e : r.entries()) {
    if (e < 0.0) throw NotTenable();
  }
}

// Normalised map with the result pushed back onto unit mass; the map
// preserves mass exactly in real arithmetic.
inline std::vector<double> normalised_map(const ReplacementTensor& r, double sigma,
                                          std::span<const double> x) {
  std::vector<double> y = apply_diagonal(r, x);
  double total = 0.0;
  for (double& v : y) {
    v = std::max(0.0, v / sigma);
    total += v;
  }
  for (double& v : y) v /= total;
  return y;
}

inline std::vector<double> check_start(const ReplacementTensor& r,
                                       const std::optional<std::vector<double>>& start) {
  const std::size_t d = r.colours();
  if (!start) return std::vector<double>(d, 1.0 / static_cast<double>(d));
  if (start->size() != d) throw DimensionMismatch("start point has the wrong length");
  return SimplexVector::normalized(*start).vector();
}

}  // namespace detail

/// One step x -> R(x, ..., x)/σ.
inline SimplexVector iterate_map(const ReplacementTensor& r, const SimplexVector& x) {
  const double sigma = require_balanced(r);
  detail::require_tenable(r);
  if (x.size() != r.colours()) throw DimensionMismatch("point has the wrong length");
  return SimplexVector(detail::normalised_map(r, sigma, x.coords()));
}

/// Contraction modulus of x -> R(x,...,x)/σ on the simplex: the τ-sum of
/// R/σ viewed as a stochastic tensor on the colours.
inline double colour_contraction_modulus(const ReplacementTensor& r) {
  return ergodicity_coefficients(colour_chain_tensor(r)).q;
}

/// Solves σx = R(x, ..., x) on the simplex by Picard iteration. Certified
/// (unique, contraction-bounded) when the ergodicity bound holds.
/// Throws MaxIterExceeded when the iteration does not settle.
inline FixedPointResult solve(const ReplacementTensor& r, const SolveOptions& opts = {}) {
  const double sigma = require_balanced(r);
  detail::require_tenable(r);
  const AssumptionReport report = validate(r);
  FixedPointResult res;
  res.certified = report.ergodicity_holds;
  std::optional<double> q;
  if (res.certified) {
    q = colour_contraction_modulus(r);
    res.q = q;
  }
  auto map = [&](std::span<const double> x) { return detail::normalised_map(r, sigma, x); };
  PicardOutcome run =
      picard_iterate(map, detail::check_start(r, opts.start), q, opts.tol, opts.max_iter);
  if (!run.converged) throw MaxIterExceeded(run.x, run.residual, run.iterations);
  res.x_star = SimplexVector(std::move(run.x));
  res.iterations = run.iterations;
  res.residual = run.residual;
  return res;
}

namespace detail {

// Solves A z = b in place by Gaussian elimination with partial pivoting.
inline bool solve_linear(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t row = col + 1; row < n; ++row) {
      if (std::abs(a[row * n + col]) > std::abs(a[piv * n + col])) piv = row;
    }
    if (std::abs(a[piv * n + col]) < 1e-300) return false;
    if (piv != col) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[piv * n + k], a[col * n + k]);
      std::swap(b[piv], b[col]);
    }
    for (std::size_t row = col + 1; row < n; ++row) {
      const double f = a[row * n + col] / a[col * n + col];
      if (f == 0.0) continue;
      for (std::size_t k = col; k < n; ++k) a[row * n + k] -= f * a[col * n + k];
      b[row] -= f * b[col];
    }
  }
  for (std::size_t row = n; row-- > 0;) {
    double acc = b[row];
    for (std::size_t k = row + 1; k < n; ++k) acc -= a[row * n + k] * b[k];
    b[row] = acc / a[row * n + row];
  }
  return true;
}

// Newton's method for F(x) = x restricted to the affine hull of the simplex.
// Keeps the iterate with the smallest residual; near a tangential fixed
// point convergence is only linear and stalls at about sqrt(machine eps).
inline std::optional<FixedPointResult> newton_on_simplex(const ReplacementTensor& r, double sigma,
                                                         std::vector<double> x, double tol,
                                                         long max_iter = 200) {
  const std::size_t d = r.colours();
  const std::size_t m = r.draws();
  auto residual_vec = [&](std::span<const double> p) {
    std::vector<double> g = apply_diagonal(r, p);
    for (std::size_t i = 0; i < d; ++i) g[i] = g[i] / sigma - p[i];
    return g;
  };
  std::vector<double> best = x;
  double best_res = l1_norm(residual_vec(x));
  long iters = 0;
  for (long it = 1; it <= max_iter && best_res > 0.0; ++it) {
    iters = it;
    const std::vector<double> g = residual_vec(x);
    // Jacobian column k: sum over slots of R(x, .., e_k, .., x)/σ minus e_k.
    std::vector<double> jac(d * d, 0.0);
    std::vector<double> e(d, 0.0);
    for (std::size_t k = 0; k < d; ++k) {
      e.assign(d, 0.0);
      e[k] = 1.0;
      for (std::size_t s = 0; s < m; ++s) {
        std::vector<std::span<const double>> args(m, std::span<const double>(x));
        args[s] = e;
        const std::vector<double> col = polyurn::apply(r, args);
        for (std::size_t i = 0; i < d; ++i) jac[i * d + k] += col[i] / sigma;
      }
      jac[k * d + k] -= 1.0;
    }
    // The residual has zero total mass on the simplex, so the last equation
    // is redundant; replace it with the constraint sum(delta) = 0.
    std::vector<double> rhs(d);
    for (std::size_t i = 0; i < d; ++i) rhs[i] = -g[i];
    for (std::size_t k = 0; k < d; ++k) jac[(d - 1) * d + k] = 1.0;
    rhs[d - 1] = 0.0;
    if (!solve_linear(jac, rhs, d)) break;
    double step = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      x[i] += rhs[i];
      step += std::abs(rhs[i]);
    }
    if (!std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); })) break;
    const double res = l1_norm(residual_vec(x));
    if (res < best_res) {
      best_res = res;
      best = x;
    }
    if (step <= 1e-15) break;
  }
  for (double& v : best) {
    if (v < -1e-9) return std::nullopt;
    v = std::max(0.0, v);
  }
  double total = 0.0;
  for (double v : best) total += v;
  if (!(total > 0.0)) return std::nullopt;
  for (double& v : best) v /= total;
  std::vector<double> fx = apply_diagonal(r, best);
  for (double& v : fx) v /= sigma;
  const double res = l1_distance(fx, best);
  if (!(res <= tol)) return std::nullopt;
  FixedPointResult out;
  out.x_star = SimplexVector(std::move(best));
  out.iterations = iters;
  out.residual = res;
  out.method = FixedPointMethod::newton;
  return out;
}

}  // namespace detail

/// Every p in [0,1] with σp = R(x,...,x)_1 for x = (p, 1-p). Simple roots
/// come from sign changes of g(p) = σp - R(x,...,x)_1 on 10^5 cells refined
/// by bisection; tangential roots from sign changes of g' where |g| < 1e-12.
inline std::vector<SimplexVector> all_fixed_points_2colour(const ReplacementTensor& r) {
  if (r.colours() != 2) throw NotTwoColour();
  const double sigma = require_balanced(r);
  const std::size_t m = r.draws();
  const std::vector<double> dir{1.0, -1.0};

  auto g = [&](double p) {
    const std::vector<double> x{p, 1.0 - p};
    return sigma * p - apply_diagonal(r, x)[0];
  };
  auto dg = [&](double p) {
    const std::vector<double> x{p, 1.0 - p};
    double acc = 0.0;
    for (std::size_t s = 0; s < m; ++s) {
      std::vector<std::span<const double>> args(m, std::span<const double>(x));
      args[s] = dir;
      acc += polyurn::apply(r, args)[0];
    }
    return sigma - acc;
  };
  auto bisect = [](auto&& f, double a, double b, double fa) {
    while (b - a > 1e-13) {
      const double mid = 0.5 * (a + b);
      const double fm = f(mid);
      if (fm == 0.0) return mid;
      if ((fm < 0.0) == (fa < 0.0)) {
        a = mid;
        fa = fm;
      } else {
        b = mid;
      }
    }
    return 0.5 * (a + b);
  };

  constexpr std::size_t kCells = 100'000;
  constexpr double kTangency = 1e-12;
  std::vector<double> gv(kCells + 1), dv(kCells + 1);
  for (std::size_t k = 0; k <= kCells; ++k) {
    const double p = static_cast<double>(k) / kCells;
    gv[k] = g(p);
    dv[k] = dg(p);
  }

  if (std::all_of(gv.begin(), gv.end(), [&](double v) { return std::abs(v) < kTangency * sigma; })) {
    throw DegenerateFixedPoints();
  }

  std::vector<double> simple, tangent;
  for (std::size_t k = 0; k <= kCells; ++k) {
    const double p = static_cast<double>(k) / kCells;
    if (gv[k] == 0.0) simple.push_back(p);
    if (k == kCells) break;
    const double q = static_cast<double>(k + 1) / kCells;
    if (gv[k] != 0.0 && gv[k + 1] != 0.0 && (gv[k] < 0.0) != (gv[k + 1] < 0.0)) {
      simple.push_back(bisect(g, p, q, gv[k]));
    }
    if (dv[k] != 0.0 && dv[k + 1] != 0.0 && (dv[k] < 0.0) != (dv[k + 1] < 0.0)) {
      const double c = bisect(dg, p, q, dv[k]);
      if (std::abs(g(c)) < kTangency) tangent.push_back(c);
    } else if (dv[k] == 0.0 && std::abs(gv[k]) < kTangency) {
      tangent.push_back(p);
    }
  }

  // Rounding can split a tangential root into a pair of nearby sign changes;
  // those collapse onto the tangency point.
  constexpr double kTangentBand = 1e-6;
  std::vector<double> roots = tangent;
  for (double s : simple) {
    const bool absorbed = std::any_of(tangent.begin(), tangent.end(),
                                      [&](double t) { return std::abs(t - s) < kTangentBand; });
    if (!absorbed) roots.push_back(s);
  }
  std::sort(roots.begin(), roots.end());
  std::vector<SimplexVector> out;
  double prev = -1.0;
  for (double p : roots) {
    if (!out.empty() && std::abs(p - prev) <= 1e-10) continue;
    prev = p;
    p = std::clamp(p, 0.0, 1.0);
    out.emplace_back(std::vector<double>{p, 1.0 - p});
  }
  return out;
}

struct MultiStartResult {
  std::vector<FixedPointResult> fixed_points;  // deduplicated, discovery order
  std::vector<FixedPointResult> non_converged;  // Picard runs that hit max_iter
};

/// Uniform sample from the simplex (normalised exponentials).
inline std::vector<double> sample_simplex(std::size_t d, Rng& rng) {
  std::vector<double> x(d);
  double total = 0.0;
  for (double& v : x) {
    v = rng.exponential();
    total += v;
  }
  for (double& v : x) v /= total;
  return x;
}

/// Exploration for tensors that may have several fixed points. From each
/// seeded uniform start: a plain Picard solve, a Newton polish of its end
/// point, and a Newton search from the start itself (Newton also reaches
/// repelling fixed points Picard cannot). Distinct results within 1e-6 in
/// L1 are merged, keeping the smaller residual.
inline MultiStartResult multi_start(const ReplacementTensor& r, std::size_t starts,
                                    std::uint64_t seed, const SolveOptions& opts = {}) {
  const double sigma = require_balanced(r);
  detail::require_tenable(r);
  if (starts < 1) throw Error("multi_start needs at least one start");
  const bool certified = validate(r).ergodicity_holds;
  const std::optional<double> q =
      certified ? std::optional<double>(colour_contraction_modulus(r)) : std::nullopt;

  struct PerStart {
    std::vector<FixedPointResult> found;
    std::optional<FixedPointResult> failed;
  };
  std::vector<PerStart> per(starts);
  parallel_for(starts, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    const std::vector<double> x0 = sample_simplex(r.colours(), rng);
    SolveOptions o = opts;
    o.start = x0;
    std::vector<double> end;
    try {
      FixedPointResult pr = solve(r, o);
      end = pr.x_star.vector();
      per[i].found.push_back(pr);
    } catch (const MaxIterExceeded& e) {
      end = e.last_iterate();
      FixedPointResult bad;
      bad.x_star = SimplexVector::normalized(end);
      bad.iterations = e.iterations();
      bad.residual = e.residual();
      bad.certified = certified;
      bad.q = q;
      per[i].failed = bad;
    }
    if (auto polished = detail::newton_on_simplex(r, sigma, end, opts.tol)) {
      polished->method = FixedPointMethod::picard_newton;
      per[i].found.push_back(*polished);
    }
    if (auto direct = detail::newton_on_simplex(r, sigma, x0, opts.tol)) {
      per[i].found.push_back(*direct);
    }
    for (auto& f : per[i].found) {
      f.certified = certified;
      f.q = q;
    }
  });

  MultiStartResult out;
  constexpr double kSame = 1e-6;
  for (auto& p : per) {
    for (auto& f : p.found) {
      auto it = std::find_if(out.fixed_points.begin(), out.fixed_points.end(), [&](const auto& g) {
        return l1_distance(g.x_star, f.x_star) <= kSame;
      });
      if (it == out.fixed_points.end()) {
        out.fixed_points.push_back(f);
      } else if (f.residual < it->residual) {
        *it = f;
      }
    }
    if (p.failed) out.non_converged.push_back(*p.failed);
  }
  return out;
}

}  // namespace polyurn
