#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "polyurn/error.hpp"
#include "polyurn/fixed_point.hpp"
#include "polyurn/random.hpp"
#include "polyurn/simplex.hpp"
#include "polyurn/tensor.hpp"
#include "polyurn/urn.hpp"

namespace polyurn {

// Uniform recursive DAG: node v >= 1 links to m parents drawn independently
// and uniformly from {0, ..., v-1}. Node 0 is the root and has no parents.
class DagStructure {
 public:
  DagStructure() = default;
  explicit DagStructure(std::size_t m) : m_(m), parents_(m, 0) {
    if (m_ < 1) throw StructuralError("DAG needs at least one parent per node");
  }

  std::size_t parents_per_node() const { return m_; }
  /// Number of nodes including node 0.
  std::size_t size() const { return m_ == 0 ? 0 : parents_.size() / m_; }
  std::size_t last() const { return size() - 1; }

  std::span<const std::size_t> parents(std::size_t v) const {
    if (v >= size()) throw NodeOutOfRange("node " + std::to_string(v) + " is not in the DAG");
    if (v == 0) return {};
    return std::span<const std::size_t>(parents_).subspan(v * m_, m_);
  }

  /// Appends a node; every parent must already exist.
  void add_node(std::span<const std::size_t> parent_tuple) {
    if (parent_tuple.size() != m_) throw DimensionMismatch("parent tuple has the wrong arity");
    const std::size_t v = size();
    for (std::size_t p : parent_tuple) {
      if (p >= v) throw StructuralError("parent index must be smaller than the new node");
    }
    parents_.insert(parents_.end(), parent_tuple.begin(), parent_tuple.end());
  }

  void reserve(std::size_t nodes) { parents_.reserve(nodes * m_); }

 private:
  std::size_t m_ = 0;
  std::vector<std::size_t> parents_;  // slot block of node 0 is unused
};

inline DagStructure grow_structure(std::size_t n, std::size_t m, Rng& rng) {
  DagStructure g(m);
  g.reserve(n + 1);
  std::vector<std::size_t> tuple(m);
  for (std::size_t v = 1; v <= n; ++v) {
    for (auto& p : tuple) p = rng.below(v);
    g.add_node(tuple);
  }
  return g;
}

/// The labelled DAG coupled to the urn: node v carries X(v) in {colours}^m.
struct LabelledDag {
  DagStructure structure;
  std::vector<std::vector<std::size_t>> labels;  // labels[0] is empty
  SimplexVector pi;
  std::size_t colours = 0;
};

/// Grows the R-labelled DAG on nodes 0..n. The s-th label component of a new
/// node is drawn from pi when its s-th parent is node 0, and otherwise from
/// R(., X(parent))/σ.
inline LabelledDag grow(const ReplacementTensor& r, const SimplexVector& pi, std::size_t n,
                        std::uint64_t seed) {
  detail::require_tenable(r);
  require_balanced(r);
  if (pi.size() != r.colours()) throw DimensionMismatch("pi has the wrong number of colours");
  const std::size_t d = r.colours();
  const std::size_t m = r.draws();
  Rng rng(seed);
  LabelledDag dag;
  dag.structure = DagStructure(m);
  dag.structure.reserve(n + 1);
  dag.labels.resize(n + 1);
  dag.pi = pi;
  dag.colours = d;
  std::vector<std::size_t> parents(m);
  std::vector<std::vector<double>> columns(n + 1);
  for (std::size_t v = 1; v <= n; ++v) {
    for (auto& p : parents) p = rng.below(v);
    dag.structure.add_node(parents);
    auto& label = dag.labels[v];
    label.resize(m);
    for (std::size_t s = 0; s < m; ++s) {
      const std::size_t p = parents[s];
      label[s] = p == 0 ? rng.categorical(pi.coords()) : rng.categorical(columns[p]);
    }
    columns[v] = r.column(label);
  }
  return dag;
}

/// Urn trajectory read off the labels: counts(0) = σ·pi and
/// counts(v) = counts(v-1) + R(., X(v)).
inline std::vector<UrnState> urn_from_labels(const LabelledDag& dag, const ReplacementTensor& r) {
  if (dag.colours != r.colours() || dag.structure.parents_per_node() != r.draws()) {
    throw DimensionMismatch("DAG and tensor disagree on colours or draws");
  }
  const double sigma = require_balanced(r);
  std::vector<double> counts(dag.pi.coords().begin(), dag.pi.coords().end());
  for (double& c : counts) c *= sigma;
  std::vector<UrnState> out;
  out.reserve(dag.structure.size());
  out.push_back(UrnState::initial(counts, sigma));
  for (std::size_t v = 1; v < dag.structure.size(); ++v) {
    UrnState s = out.back();
    const std::vector<double> col = r.column(dag.labels[v]);
    for (std::size_t i = 0; i < col.size(); ++i) s.counts[i] += col[i];
    ++s.step;
    out.push_back(std::move(s));
  }
  return out;
}

/// Exact law of counts(n) for the labelled DAG started from pi, by
/// enumerating every parent choice and every label outcome.
inline std::vector<WeightedState> exact_dag_distribution(const ReplacementTensor& r,
                                                         const SimplexVector& pi, std::size_t n) {
  detail::require_tenable(r);
  const double sigma = require_balanced(r);
  if (pi.size() != r.colours()) throw DimensionMismatch("pi has the wrong number of colours");
  const std::size_t d = r.colours();
  const std::size_t m = r.draws();
  double leaves = 1.0;
  for (std::size_t v = 1; v <= n; ++v) {
    leaves *= std::pow(static_cast<double>(v * d), static_cast<double>(m));
  }
  if (leaves > 1e7) throw TooLarge("DAG enumeration exceeds 1e7 outcomes");

  std::vector<double> base(pi.coords().begin(), pi.coords().end());
  for (double& c : base) c *= sigma;
  std::map<std::vector<long long>, WeightedState> law;
  std::vector<std::vector<std::size_t>> labels(n + 1);

  // Depth-first over nodes; `counts` is the urn after the labelled prefix.
  auto recurse = [&](auto&& self, std::size_t v, double prob, std::vector<double>& counts) -> void {
    if (v > n) {
      auto key = detail::state_key(counts);
      auto it = law.find(key);
      if (it == law.end()) {
        UrnState s = UrnState::initial(base, sigma);
        s.counts = counts;
        s.step = static_cast<long>(n);
        law.emplace(std::move(key), WeightedState{std::move(s), prob});
      } else {
        it->second.probability += prob;
      }
      return;
    }
    const double parent_prob = std::pow(static_cast<double>(v), -static_cast<double>(m));
    std::vector<std::size_t> parents(m, 0);
    do {
      // Distribution of each label component given its parent.
      std::vector<std::vector<double>> comp(m);
      for (std::size_t s = 0; s < m; ++s) {
        if (parents[s] == 0) {
          comp[s] = base;
        } else {
          comp[s] = r.column(labels[parents[s]]);
        }
        for (double& w : comp[s]) w /= sigma;
      }
      std::vector<std::size_t> label(m, 0);
      do {
        double p = prob * parent_prob;
        for (std::size_t s = 0; s < m; ++s) p *= comp[s][label[s]];
        if (p == 0.0) continue;
        labels[v] = label;
        const std::vector<double> col = r.column(label);
        for (std::size_t i = 0; i < d; ++i) counts[i] += col[i];
        self(self, v + 1, p, counts);
        for (std::size_t i = 0; i < d; ++i) counts[i] -= col[i];
      } while (next_tuple(label, d));
    } while (next_tuple(parents, v));
  };
  std::vector<double> counts = base;
  recurse(recurse, 1, 1.0, counts);

  std::vector<WeightedState> out;
  for (auto& [k, ws] : law) out.push_back(std::move(ws));
  return out;
}

/// n_1 = floor(n / ln n), and 0 when ln n <= 1.
inline std::size_t ancestry_cutoff(std::size_t n) {
  if (n <= 2) return 0;
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) / std::log(static_cast<double>(n))));
}

/// H_n: ancestors of `root` with index >= n_1, plus their parent tuples.
struct AncestrySubgraph {
  std::size_t root = 0;
  std::size_t n1 = 0;
  std::vector<std::size_t> members;  // ascending
  std::unordered_map<std::size_t, std::size_t> depth_of;
  // Full parent tuple of each member, including parents below n_1.
  std::unordered_map<std::size_t, std::vector<std::size_t>> parents_of;

  bool contains(std::size_t v) const { return depth_of.count(v) != 0; }
};

/// Breadth-first search up the parent links from `n`, dropping nodes below
/// n_1 = ancestry_cutoff(n).
inline AncestrySubgraph ancestry(const DagStructure& g, std::size_t n) {
  if (n >= g.size()) throw NodeOutOfRange("node " + std::to_string(n) + " is not in the DAG");
  AncestrySubgraph h;
  h.root = n;
  h.n1 = ancestry_cutoff(n);
  std::deque<std::size_t> queue{n};
  h.depth_of[n] = 0;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    const auto ps = g.parents(u);
    h.parents_of[u] = std::vector<std::size_t>(ps.begin(), ps.end());
    for (std::size_t p : ps) {
      if (p < h.n1 || h.depth_of.count(p)) continue;
      h.depth_of[p] = h.depth_of[u] + 1;
      queue.push_back(p);
    }
  }
  h.members.reserve(h.depth_of.size());
  for (const auto& [v, depth] : h.depth_of) h.members.push_back(v);
  std::sort(h.members.begin(), h.members.end());
  return h;
}

struct EventReport {
  bool e_n_holds = false;  // H_n is a tree (counting repeated parent links)
  bool f_n_holds = false;  // depth-<=ell genealogy is a complete m-ary tree inside H_n
  std::size_t ell = 0;
  std::size_t n1 = 0;
};

/// Evaluates E_n and F_n on an ancestry subgraph. F_n requires every
/// ancestor position up to depth ell to be a distinct node >= n_1, i.e.
/// (m^(ell+1)-1)/(m-1) distinct nodes.
inline EventReport check_events(const AncestrySubgraph& h, std::size_t ell) {
  EventReport rep;
  rep.ell = ell;
  rep.n1 = h.n1;

  std::size_t edges = 0;
  for (std::size_t u : h.members) {
    for (std::size_t p : h.parents_of.at(u)) edges += p >= h.n1 ? 1 : 0;
  }
  rep.e_n_holds = edges + 1 == h.members.size();

  bool complete = true;
  std::vector<std::size_t> level{h.root};
  std::unordered_set<std::size_t> seen{h.root};
  for (std::size_t depth = 1; depth <= ell && complete; ++depth) {
    std::vector<std::size_t> next;
    for (std::size_t u : level) {
      const auto& ps = h.parents_of.at(u);
      if (ps.empty()) {  // node 0 has no parents
        complete = false;
        break;
      }
      for (std::size_t p : ps) {
        if (p < h.n1 || !seen.insert(p).second) {
          complete = false;
          break;
        }
        next.push_back(p);
      }
      if (!complete) break;
    }
    level = std::move(next);
  }
  rep.f_n_holds = complete;
  return rep;
}

struct EventEstimate {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t ell = 0;
  std::size_t n1 = 0;
  std::size_t replicates = 0;
  double p_e = 0.0, p_f = 0.0, p_ef = 0.0;
  double se_e = 0.0, se_f = 0.0, se_ef = 0.0;
};

/// Monte Carlo frequencies of E_n, F_n and E_n ∩ F_n over independently
/// grown unlabelled DAGs on nodes 0..n (replicate r uses derive_seed(seed, r)).
inline EventEstimate event_probability(std::size_t n, std::size_t m, std::size_t ell,
                                       std::size_t replicates, std::uint64_t seed) {
  if (replicates < 1) throw Error("event_probability needs at least one replicate");
  if (n < 1) throw Error("event_probability needs n >= 1");
  std::vector<EventReport> reports(replicates);
  parallel_for(replicates, [&](std::size_t rep) {
    Rng rng(derive_seed(seed, rep));
    const DagStructure g = grow_structure(n, m, rng);
    reports[rep] = check_events(ancestry(g, n), ell);
  });
  EventEstimate est;
  est.n = n;
  est.m = m;
  est.ell = ell;
  est.n1 = ancestry_cutoff(n);
  est.replicates = replicates;
  std::size_t e = 0, f = 0, ef = 0;
  for (const auto& r : reports) {
    e += r.e_n_holds;
    f += r.f_n_holds;
    ef += r.e_n_holds && r.f_n_holds;
  }
  const double count = static_cast<double>(replicates);
  auto se = [&](double p) { return std::sqrt(p * (1.0 - p) / count); };
  est.p_e = e / count;
  est.p_f = f / count;
  est.p_ef = ef / count;
  est.se_e = se(est.p_e);
  est.se_f = se(est.p_f);
  est.se_ef = se(est.p_ef);
  return est;
}

}  // namespace polyurn
