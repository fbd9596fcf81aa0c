// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Statistical criteria use a frozen seed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "polyurn/polyurn.hpp"

namespace {

constexpr std::uint64_t kSeed = 20261016;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

polyurn::CatalogEntry entry(const std::string& name) { return *polyurn::find_catalog_entry(name); }

polyurn::SimplexVector two(double p) { return polyurn::SimplexVector(std::vector<double>{p, 1.0 - p}); }

bool contains_point(const std::vector<polyurn::SimplexVector>& pts, const polyurn::SimplexVector& p,
                    double tol) {
  for (const auto& q : pts) {
    if (polyurn::l1_distance(p, q) <= tol) return true;
  }
  return false;
}

// (E) left-hand sides of the worked examples.
void a1(Outcome& o) {
  const std::vector<std::pair<std::string, double>> expected{
      {"polya_identity", 4}, {"all_ones", 0},  {"asym_sqrt2", 2},  {"asym_sqrt11", 4},
      {"lms_ex2", 6},        {"lms_ex3", 12},  {"chang_zhang", 1.6}, {"li_ng", 2}};
  for (const auto& [name, lhs] : expected) {
    const auto e = entry(name);
    const auto rep = polyurn::validate(e.tensor);
    o.detail << ' ' << name << '=' << rep.ergodicity_lhs;
    o.require(std::abs(rep.ergodicity_lhs - lhs) <= 1e-12, name + " lhs");
    o.require(rep.sigma && std::abs(*rep.sigma - e.expected_sigma) <= 1e-12, name + " sigma");
    o.require(rep.ergodicity_holds == e.expected_e_holds, name + " verdict");
  }
}

void a2(Outcome& o) {
  auto solved = [&](const polyurn::ReplacementTensor& r, double p, const std::string& name) {
    const auto x = polyurn::solve(r).x_star;
    const double err = polyurn::l1_distance(x, two(p));
    o.detail << ' ' << name << ":err=" << err;
    o.require(err <= 1e-10, name);
  };
  solved(entry("all_ones").tensor, 0.5, "all_ones");
  solved(entry("lms_ex1").tensor, 0.5, "lms_ex1");
  solved(entry("asym_sqrt2").tensor, std::sqrt(2.0) - 1.0, "asym_sqrt2");
  solved(entry("asym_sqrt11").tensor, std::sqrt(11.0) - 3.0, "asym_sqrt11");
  solved(polyurn::affine_tensor(1, 1, 5), 3.0 / 7.0, "affine(1,1,5)");

  auto oracle = [&](const std::string& name, const std::vector<double>& ps) {
    const auto pts = polyurn::all_fixed_points_2colour(entry(name).tensor);
    o.detail << ' ' << name << ":" << pts.size() << "pts";
    o.require(pts.size() == ps.size(), name + " root count");
    for (double p : ps) o.require(contains_point(pts, two(p), 1e-10), name + " root " + std::to_string(p));
  };
  oracle("lms_ex2", {1.0 / 3.0, 1.0});
  oracle("lms_ex3", {1.0 - 1.0 / std::sqrt(2.0)});
  oracle("chang_zhang", {0.2, 0.6});
}

void a3(Outcome& o) {
  for (const auto& e : polyurn::catalog()) {
    if (!e.expected_e_holds) continue;
    const auto u0 = polyurn::UrnState::initial(std::vector<double>(e.tensor.colours(), 1.0),
                                               e.expected_sigma);
    const auto s = polyurn::monte_carlo(e.tensor, u0, 10'000, 200, kSeed);
    o.detail << ' ' << e.name << '=' << s.mean_l1_error.back();
    o.require(s.mean_l1_error.back() < 0.02, e.name + " final error");
    // Successive decades: e(10^(k+1)) - e(10^k) <= 2 combined stderr.
    std::vector<std::size_t> decades;
    for (std::size_t k = 0; k < s.n_values.size(); ++k) {
      long v = s.n_values[k];
      if (v < 1) continue;
      while (v % 10 == 0) v /= 10;
      if (v == 1) decades.push_back(k);
    }
    for (std::size_t k = 1; k < decades.size(); ++k) {
      const std::size_t a = decades[k - 1], b = decades[k];
      const double slack = 2.0 * std::hypot(s.standard_error[a], s.standard_error[b]);
      o.require(s.mean_l1_error[b] - s.mean_l1_error[a] <= slack,
                e.name + " not decreasing at n=" + std::to_string(s.n_values[b]));
    }
  }
}

void a4(Outcome& o) {
  double worst = 0.0;
  for (const auto& e : polyurn::catalog()) {
    if (e.tensor.colours() != 2 || e.tensor.draws() != 2) continue;
    const polyurn::SimplexVector pi(std::vector<double>{0.3, 0.7});
    const std::vector<double> u0{e.expected_sigma * 0.3, e.expected_sigma * 0.7};
    for (long n = 1; n <= 3; ++n) {
      const auto urn = polyurn::exact_distribution(
          e.tensor, polyurn::UrnState::initial(u0, e.expected_sigma), n);
      const auto dag = polyurn::exact_dag_distribution(e.tensor, pi, static_cast<std::size_t>(n));
      const double tv = polyurn::total_variation(urn, dag);
      worst = std::max(worst, tv);
      o.require(tv <= 1e-10, e.name + " n=" + std::to_string(n));
    }
  }
  o.detail << " max_tv=" << worst;
}

void a5(Outcome& o) {
  std::vector<polyurn::EventEstimate> est;
  for (std::size_t n : {1'000u, 10'000u, 100'000u}) {
    est.push_back(polyurn::event_probability(n, 2, 2, 2000, kSeed));
    o.detail << " n=" << n << ":" << est.back().p_ef << "+-" << est.back().se_ef;
  }
  for (std::size_t k = 1; k < est.size(); ++k) {
    const double slack = 2.0 * std::hypot(est[k].se_ef, est[k - 1].se_ef);
    o.require(est[k].p_ef - est[k - 1].p_ef > -slack, "trend at n=" + std::to_string(est[k].n));
  }
  o.require(est.back().p_ef > 0.5, "P(E and F) > 0.5 at n=1e5");
}

void a6(Outcome& o) {
  for (const auto& e : polyurn::catalog()) {
    if (!e.expected_e_holds) continue;
    const auto t = polyurn::induced_chain_tensor(e.tensor);
    const double q = polyurn::ergodicity_coefficients(t).q;
    const polyurn::IndexSet states{e.tensor.colours(), e.tensor.draws()};
    for (std::size_t leaf = 0; leaf < states.size(); ++leaf) {
      const auto profile =
          polyurn::LeafProfile::constant(10, t.arity(), polyurn::SimplexVector::vertex(leaf, states));
      try {
        polyurn::geometric_certificate(t, profile);
      } catch (const polyurn::Error& ex) {
        o.require(false, e.name + ": " + ex.what());
      }
    }
    const auto st = polyurn::stationary(t);
    const auto prod = polyurn::tensor_power(polyurn::solve(e.tensor).x_star, e.tensor.draws());
    const double gap = polyurn::l1_distance(st.pi, prod);
    o.detail << ' ' << e.name << ":q=" << q << ",gap=" << gap;
    o.require(gap <= 1e-9, e.name + " product form");
  }
}

void a7(Outcome& o) {
  const auto e = entry("polya_identity");
  const auto u0 = polyurn::UrnState::initial({1.0, 1.0}, e.expected_sigma);
  const auto s = polyurn::monte_carlo(e.tensor, u0, 10'000, 200, kSeed, two(0.5));
  o.detail << " mean_error=" << s.mean_l1_error.back() << "+-" << s.standard_error.back();
  o.require(s.mean_l1_error.back() >= 0.1, "error fell below 0.1");
}

void a8(Outcome& o) {
  const auto r = polyurn::chang_zhang_tensor();
  const auto rep = polyurn::validate(r);
  o.require(rep.sigma && std::abs(*rep.sigma - 1.0) <= 1e-12, "sigma");
  o.require(std::abs(rep.ergodicity_lhs - 1.6) <= 1e-12 && !rep.ergodicity_holds, "validate");

  const auto t = polyurn::induced_chain_tensor(r);
  o.require(t.state_size() == 8 && t.arity() == 3, "induced tensor on 8 states");
  const auto uniform = polyurn::SimplexVector::uniform(polyurn::IndexSet{2, 3});
  const auto chain = polyurn::evolve(t, polyurn::LeafProfile::constant(5, 3, uniform));
  o.require(std::abs(polyurn::l1_norm(chain.pi_1_n.coords()) - 1.0) <= 1e-12, "evolve");

  const auto ms = polyurn::multi_start(r, 50, kSeed);
  std::vector<polyurn::SimplexVector> found;
  for (const auto& f : ms.fixed_points) found.push_back(f.x_star);
  o.require(contains_point(found, two(0.2), 1e-6), "multi_start finds (0.2, 0.8)");
  o.require(contains_point(found, two(0.6), 1e-6), "multi_start finds (0.6, 0.4)");

  const auto run = polyurn::run(r, polyurn::UrnState::initial({1.0, 1.0}, 1.0), 1000, kSeed);
  o.require(std::abs(run.final_state.balance_defect()) <= 1e-9, "urn balance");
  const polyurn::SimplexVector pi(std::vector<double>{0.5, 0.5});
  for (std::size_t n = 1; n <= 2; ++n) {
    const auto urn = polyurn::exact_distribution(r, polyurn::UrnState::initial({0.5, 0.5}, 1.0),
                                                 static_cast<long>(n));
    const double tv = polyurn::total_variation(urn, polyurn::exact_dag_distribution(r, pi, n));
    o.require(tv <= 1e-10, "coupling at n=" + std::to_string(n));
  }
  o.detail << " fixed_points=" << found.size() << " q_induced=" << polyurn::ergodicity_coefficients(t).q;
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    double budget_seconds;
    std::function<void(Outcome&)> body;
  };
  const std::vector<Criterion> criteria{
      {"A1", 1, a1},   {"A2", 1, a2},  {"A3", 60, a3}, {"A4", 10, a4},
      {"A5", 120, a5}, {"A6", 5, a6}, {"A7", 60, a7}, {"A8", 60, a8},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& ex) {
      o.require(false, std::string("exception: ") + ex.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.require(secs < c.budget_seconds, "runtime budget " + std::to_string(c.budget_seconds) + " s");
    failures += !o.pass;
    std::printf("%s %s (%.2f s)%s\n", c.id, o.pass ? "PASS" : "FAIL", secs, o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
