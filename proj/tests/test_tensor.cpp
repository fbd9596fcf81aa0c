#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "test_support.hpp"

using polyurn::ReplacementTensor;
using polyurn::Rng;
using polyurn::StochasticTensor;
using testing_support::brute_apply;
using testing_support::random_point;
using testing_support::random_tensor;

namespace {

// Coefficients straight from the definition: for slot s, compare every pair
// of conditioning tuples that agree outside slot s.
std::vector<double> brute_taus(const StochasticTensor& t) {
  const std::size_t n = t.state_size();
  const std::size_t m = t.arity();
  const std::size_t cond = t.conditionings();
  std::vector<double> taus(m, 0.0);
  for (std::size_t a = 0; a < cond; ++a) {
    const auto ta = polyurn::unflatten(a, n, m);
    for (std::size_t b = 0; b < cond; ++b) {
      const auto tb = polyurn::unflatten(b, n, m);
      std::size_t differing = 0, slot = 0;
      for (std::size_t s = 0; s < m; ++s) {
        if (ta[s] != tb[s]) {
          ++differing;
          slot = s;
        }
      }
      if (differing != 1) continue;
      double l1 = 0.0;
      for (std::size_t w = 0; w < n; ++w) l1 += std::abs(t(w, a) - t(w, b));
      taus[slot] = std::max(taus[slot], 0.5 * l1);
    }
  }
  return taus;
}

}  // namespace

TEST(ReplacementTensor, RejectsMalformedInput) {
  EXPECT_THROW(ReplacementTensor(0, 2, {}), polyurn::StructuralError);
  EXPECT_THROW(ReplacementTensor(2, 0, {1, 1}), polyurn::StructuralError);
  EXPECT_THROW(ReplacementTensor(2, 2, std::vector<double>(7, 1.0)), polyurn::StructuralError);
  EXPECT_THROW(ReplacementTensor(2, 1, {1, NAN, 1, 1}), polyurn::StructuralError);
  EXPECT_NO_THROW(ReplacementTensor(2, 1, {-1, 2, 3, 0}));  // negative entries are reported, not rejected
}

TEST(ReplacementTensor, IndexingIsColourSlowest) {
  std::vector<double> e(8);
  for (std::size_t k = 0; k < 8; ++k) e[k] = static_cast<double>(k);
  const ReplacementTensor r(2, 2, e);
  const std::vector<std::size_t> j{1, 0};
  EXPECT_EQ(r.at(1, j), 4.0 + 2.0);
  EXPECT_EQ(r.column(j), (std::vector<double>{2.0, 6.0}));
  EXPECT_THROW(r.at(2, j), polyurn::DimensionMismatch);
}

TEST(Apply, MatchesExplicitSummation) {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = 2 + trial % 3;
    const std::size_t m = 1 + trial % 3;
    const auto r = random_tensor(d, m, 1.0 + trial, 0.5, rng);
    std::vector<std::vector<double>> xs;
    for (std::size_t s = 0; s < m; ++s) xs.push_back(random_point(d, rng));
    std::vector<std::span<const double>> args(xs.begin(), xs.end());
    const auto got = polyurn::apply(r, args);
    const auto want = brute_apply(r, xs);
    for (std::size_t i = 0; i < d; ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
  }
}

TEST(Apply, IsMultilinearInEverySlot) {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 3;
    const std::size_t m = 2 + trial % 2;
    const auto r = random_tensor(d, m, 2.0, 1.0, rng);
    const double alpha = rng.uniform() * 3 - 1.5, beta = rng.uniform() * 3 - 1.5;
    for (std::size_t slot = 0; slot < m; ++slot) {
      std::vector<std::vector<double>> xs;
      for (std::size_t s = 0; s < m; ++s) xs.push_back(random_point(d, rng));
      const auto u = random_point(d, rng), v = random_point(d, rng);
      std::vector<double> mix(d);
      for (std::size_t i = 0; i < d; ++i) mix[i] = alpha * u[i] + beta * v[i];
      auto with = [&](const std::vector<double>& y) {
        auto copy = xs;
        copy[slot] = y;
        std::vector<std::span<const double>> args(copy.begin(), copy.end());
        return polyurn::apply(r, args);
      };
      const auto lhs = with(mix), fu = with(u), fv = with(v);
      for (std::size_t i = 0; i < d; ++i) EXPECT_NEAR(lhs[i], alpha * fu[i] + beta * fv[i], 1e-12);
    }
  }
}

TEST(Apply, BalancedImageHasMassSigma) {
  Rng rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const double sigma = 0.5 + trial;
    const auto r = random_tensor(3, 1 + trial % 4, sigma, 1.0, rng);
    const auto x = random_point(3, rng);
    double total = 0.0;
    for (double v : polyurn::apply_diagonal(r, x)) total += v;
    EXPECT_NEAR(total, sigma, 1e-12 * sigma);
  }
}

TEST(Apply, ArgumentLengthMismatchThrows) {
  const ReplacementTensor r(2, 2, std::vector<double>(8, 1.0));
  const std::vector<double> x{0.5, 0.5}, bad{1.0, 0.0, 0.0};
  EXPECT_THROW(polyurn::apply(r, {x}), polyurn::DimensionMismatch);
  EXPECT_THROW(polyurn::apply(r, {x, bad}), polyurn::DimensionMismatch);
}

TEST(StochasticTensor, RejectsBadSlices) {
  EXPECT_THROW(StochasticTensor(2, 1, {0.5, 0.5, 0.6, 0.5}), polyurn::StructuralError);
  EXPECT_THROW(StochasticTensor(2, 1, {-0.5, 0.5, 1.5, 0.5}), polyurn::StructuralError);
  EXPECT_NO_THROW(StochasticTensor(2, 1, {0.5, 0.3, 0.5, 0.7}));
}

TEST(InducedChain, EntriesAreProductsOfColumns) {
  Rng rng(14);
  const auto r = random_tensor(2, 2, 3.0, 1.0, rng);
  const auto t = polyurn::induced_chain_tensor(r);
  ASSERT_EQ(t.state_size(), 4u);
  ASSERT_EQ(t.arity(), 2u);
  for (std::size_t x = 0; x < 4; ++x) {
    const auto xt = polyurn::unflatten(x, 2, 2);
    for (std::size_t a = 0; a < 4; ++a) {
      for (std::size_t b = 0; b < 4; ++b) {
        const double want = r(xt[0], a) * r(xt[1], b) / 9.0;
        EXPECT_NEAR(t(x, a * 4 + b), want, 1e-15);
      }
    }
  }
}

TEST(InducedChain, SlicesSumToOne) {
  Rng rng(15);
  for (int trial = 0; trial < 10; ++trial) {
    const auto r = random_tensor(2 + trial % 2, 1 + trial % 3, 4.0, 1.0, rng);
    const auto t = polyurn::induced_chain_tensor(r);
    for (std::size_t c = 0; c < t.conditionings(); ++c) {
      double total = 0.0;
      for (std::size_t w = 0; w < t.state_size(); ++w) total += t(w, c);
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
}

TEST(InducedChain, UnbalancedTensorThrows) {
  EXPECT_THROW(polyurn::induced_chain_tensor(ReplacementTensor(2, 1, {1, 1, 1, 2})),
               polyurn::NotBalanced);
}

TEST(Ergodicity, CoefficientsMatchDefinition) {
  Rng rng(16);
  for (int trial = 0; trial < 15; ++trial) {
    const std::size_t d = 2 + trial % 2;
    const std::size_t m = 1 + trial % 3;
    std::vector<double> e(polyurn::checked_pow(d, m + 1));
    const std::size_t cond = polyurn::checked_pow(d, m);
    for (std::size_t c = 0; c < cond; ++c) {
      const auto p = random_point(d, rng);
      for (std::size_t w = 0; w < d; ++w) e[w * cond + c] = p[w];
    }
    const StochasticTensor t(d, m, e);
    const auto got = polyurn::ergodicity_coefficients(t);
    const auto want = brute_taus(t);
    double q = 0.0;
    for (std::size_t s = 0; s < m; ++s) {
      EXPECT_NEAR(got.taus[s], want[s], 1e-14);
      q += want[s];
    }
    EXPECT_NEAR(got.q, q, 1e-14);
  }
}

TEST(Ergodicity, InducedQEqualsScaledColumnSeparation) {
  Rng rng(17);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t m = 1 + trial % 3;
    const double sigma = 1.0 + trial;
    const auto r = random_tensor(2, m, sigma, rng.uniform(), rng);
    const auto rep = polyurn::validate(r);
    const double q = polyurn::ergodicity_coefficients(polyurn::induced_chain_tensor(r)).q;
    EXPECT_NEAR(q, static_cast<double>(m) * rep.ergodicity_lhs / (2.0 * sigma), 1e-12);
  }
}

TEST(Ergodicity, ConditionEImpliesContraction) {
  Rng rng(18);
  int holding = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t m = 1 + trial % 3;
    const std::size_t d = 2 + trial % 2;
    const auto r = random_tensor(d, m, 2.5, std::min(1.0, rng.uniform() * 1.5 / static_cast<double>(m)), rng);
    const auto rep = polyurn::validate(r);
    if (!rep.ergodicity_holds) continue;
    ++holding;
    ASSERT_TRUE(rep.q_estimate.has_value());
    EXPECT_LT(*rep.q_estimate, 1.0);
    EXPECT_LT(polyurn::ergodicity_coefficients(polyurn::colour_chain_tensor(r)).q, 1.0);
  }
  EXPECT_GT(holding, 10);
}

TEST(Validate, ReportsEachAssumption) {
  const auto ok = polyurn::validate(ReplacementTensor(2, 1, {2, 1, 1, 2}));
  EXPECT_TRUE(ok.tenable);
  ASSERT_TRUE(ok.sigma);
  EXPECT_DOUBLE_EQ(*ok.sigma, 3.0);
  EXPECT_DOUBLE_EQ(ok.ergodicity_lhs, 2.0);
  EXPECT_DOUBLE_EQ(ok.ergodicity_bound, 6.0);
  EXPECT_TRUE(ok.all_hold());

  const auto unbalanced = polyurn::validate(ReplacementTensor(2, 1, {1, 1, 1, 2}));
  EXPECT_FALSE(unbalanced.sigma);
  EXPECT_TRUE(std::isnan(unbalanced.ergodicity_bound));
  EXPECT_DOUBLE_EQ(unbalanced.balance_deviation, 0.5);
  EXPECT_FALSE(unbalanced.all_hold());

  const auto negative = polyurn::validate(ReplacementTensor(2, 1, {-1, 1, 2, 0}));
  EXPECT_FALSE(negative.tenable);
  EXPECT_FALSE(negative.all_hold());
}

TEST(Validate, BoundaryEqualityIsFlaggedAndFails) {
  // affine a_i = 0.5 + 0.5 i with sigma 2: lhs = 4h = 2 = 2 sigma / m.
  const auto rep = polyurn::validate(polyurn::affine_tensor(0.5, 0.5, 2.0));
  EXPECT_DOUBLE_EQ(rep.ergodicity_lhs, 2.0);
  EXPECT_TRUE(rep.ergodicity_boundary);
  EXPECT_FALSE(rep.ergodicity_holds);
  EXPECT_FALSE(rep.q_estimate);
}

TEST(Validate, QEstimatePresentOnlyWhenEHolds) {
  for (const auto& e : polyurn::catalog()) {
    const auto rep = polyurn::validate(e.tensor);
    EXPECT_EQ(rep.q_estimate.has_value(), rep.ergodicity_holds) << e.name;
    if (rep.q_estimate) {
      EXPECT_GE(*rep.q_estimate, 0.0);
      EXPECT_LT(*rep.q_estimate, 1.0);
    }
  }
}
