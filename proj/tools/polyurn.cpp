// polyurn: command-line front end for the multi-drawing urn library.
//
// Exit codes: 0 ok, 1 input error, 2 assumption failure, 3 non-convergence.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "polyurn/polyurn.hpp"

namespace {

using polyurn::io::json;

enum ExitCode : int { kOk = 0, kInputError = 1, kAssumptionFailure = 2, kNonConvergence = 3 };

// Writes to --out when given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw polyurn::ParseError("cannot open output file " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

json non_convergence_json(const polyurn::MaxIterExceeded& e) {
  json j;
  j["converged"] = false;
  j["last_iterate"] = e.last_iterate();
  j["residual"] = e.residual();
  j["iterations"] = e.iterations();
  j["message"] = e.what();
  return j;
}

// --- check -----------------------------------------------------------------

struct CheckArgs {
  std::string file;
};

int cmd_check(const CheckArgs& a) {
  const auto r = polyurn::io::read_tensor(a.file);
  const auto rep = polyurn::validate(r);
  json j = polyurn::io::to_json(rep);
  if (!r.name().empty()) j["name"] = r.name();
  j["d"] = r.colours();
  j["m"] = r.draws();
  print_json(j);
  return rep.all_hold() ? kOk : kAssumptionFailure;
}

// --- solve -----------------------------------------------------------------

struct SolveArgs {
  std::string file;
  double tol = 1e-12;
  long max_iter = 10'000;
  bool all_2colour = false;
  std::vector<double> start;
  std::size_t multi_start = 0;
  std::uint64_t seed = 0;
};

int cmd_solve(const SolveArgs& a) {
  const auto r = polyurn::io::read_tensor(a.file);
  polyurn::SolveOptions opts;
  opts.tol = a.tol;
  opts.max_iter = a.max_iter;
  if (!a.start.empty()) opts.start = a.start;

  if (a.all_2colour) {
    json pts = json::array();
    for (const auto& p : polyurn::all_fixed_points_2colour(r)) pts.push_back(p.vector());
    print_json(json{{"fixed_points", pts}});
    return kOk;
  }
  if (a.multi_start > 0) {
    const auto res = polyurn::multi_start(r, a.multi_start, a.seed, opts);
    json found = json::array();
    for (const auto& f : res.fixed_points) found.push_back(polyurn::io::to_json(f));
    json failed = json::array();
    for (const auto& f : res.non_converged) failed.push_back(polyurn::io::to_json(f));
    print_json(json{{"fixed_points", found}, {"non_converged", failed}});
    return kOk;
  }
  try {
    json j = polyurn::io::to_json(polyurn::solve(r, opts));
    j["converged"] = true;
    print_json(j);
    return kOk;
  } catch (const polyurn::MaxIterExceeded& e) {
    print_json(non_convergence_json(e));
    return kNonConvergence;
  }
}

// --- simulate --------------------------------------------------------------

struct SimulateArgs {
  std::string file;
  long n = 10'000;
  std::size_t replicates = 100;
  std::uint64_t seed = 0;
  std::vector<double> initial;
  std::vector<double> target;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a) {
  const auto r = polyurn::io::read_tensor(a.file);
  const double sigma = polyurn::require_balanced(r);
  std::vector<double> counts = a.initial.empty() ? std::vector<double>(r.colours(), 1.0) : a.initial;
  const auto initial = polyurn::UrnState::initial(std::move(counts), sigma);
  std::optional<polyurn::SimplexVector> target;
  if (!a.target.empty()) target = polyurn::SimplexVector::normalized(a.target);
  const auto stats = polyurn::monte_carlo(r, initial, a.n, a.replicates, a.seed, target);
  Output out(a.out);
  polyurn::io::write_trajectory_csv(out.stream(), stats);
  return kOk;
}

// --- dag -------------------------------------------------------------------

struct DagArgs {
  std::vector<std::size_t> n{1000};
  std::size_t m = 2;
  std::size_t ell = 2;
  std::size_t replicates = 2000;
  std::uint64_t seed = 0;
  std::string tensor;
  bool coupling = false;
  bool dump = false;
  std::vector<double> pi;
  std::string out;
};

std::string counts_label(const std::vector<double>& counts) {
  std::string s;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (i) s += ';';
    s += polyurn::io::format_double(counts[i]);
  }
  return s;
}

int cmd_dag(const DagArgs& a) {
  Output out(a.out);
  std::ostream& os = out.stream();
  if (a.tensor.empty()) {
    if (a.coupling || a.dump) throw polyurn::ParseError("--coupling and --dump need --tensor");
    polyurn::io::write_event_csv_header(os);
    for (std::size_t n : a.n) {
      polyurn::io::write_event_csv_row(os,
                                       polyurn::event_probability(n, a.m, a.ell, a.replicates, a.seed));
    }
    return kOk;
  }

  const auto r = polyurn::io::read_tensor(a.tensor);
  const double sigma = polyurn::require_balanced(r);
  const polyurn::IndexSet colours{r.colours(), 1};
  const auto pi = a.pi.empty() ? polyurn::SimplexVector::uniform(colours)
                               : polyurn::SimplexVector::normalized(a.pi, colours);
  if (a.n.size() != 1) throw polyurn::ParseError("tensor modes take a single --n");
  const std::size_t n = a.n.front();

  if (a.dump) {
    os << polyurn::io::to_json(polyurn::grow(r, pi, n, a.seed)).dump(2) << '\n';
    return kOk;
  }
  if (!a.coupling) throw polyurn::ParseError("with --tensor, choose --coupling or --dump");

  std::vector<double> u0(pi.coords().begin(), pi.coords().end());
  for (double& c : u0) c *= sigma;
  const auto urn = polyurn::exact_distribution(r, polyurn::UrnState::initial(u0, sigma),
                                               static_cast<long>(n));
  const auto dag = polyurn::exact_dag_distribution(r, pi, n);

  // Rows keyed by the union of supports, in the order first seen.
  struct Row {
    std::vector<double> counts;
    double p_urn = 0.0, p_dag = 0.0;
  };
  std::vector<Row> rows;
  auto add = [&](const polyurn::WeightedState& w, bool from_urn) {
    const auto key = polyurn::detail::state_key(w.state.counts);
    for (auto& row : rows) {
      if (polyurn::detail::state_key(row.counts) == key) {
        (from_urn ? row.p_urn : row.p_dag) += w.probability;
        return;
      }
    }
    Row row{w.state.counts};
    (from_urn ? row.p_urn : row.p_dag) = w.probability;
    rows.push_back(std::move(row));
  };
  for (const auto& w : urn) add(w, true);
  for (const auto& w : dag) add(w, false);

  os << "counts,p_urn,p_dag\n";
  for (const auto& row : rows) {
    os << counts_label(row.counts) << ',' << polyurn::io::format_double(row.p_urn) << ','
       << polyurn::io::format_double(row.p_dag) << '\n';
  }
  os << "# tv_distance," << polyurn::io::format_double(polyurn::total_variation(urn, dag)) << '\n';
  return kOk;
}

// --- chain -----------------------------------------------------------------

struct ChainArgs {
  std::string file;
  std::size_t depth = 6;
  std::string leaves = "uniform";
  std::string out;
};

polyurn::SimplexVector parse_leaf(const std::string& spec, std::size_t d, std::size_t m) {
  const polyurn::IndexSet states{d, m};
  if (spec == "uniform") return polyurn::SimplexVector::uniform(states);
  const std::string prefix = "point:";
  if (spec.rfind(prefix, 0) != 0) {
    throw polyurn::ParseError("--leaves must be 'uniform' or 'point:<c1,...,cm>'");
  }
  std::vector<std::size_t> tuple;
  std::stringstream ss(spec.substr(prefix.size()));
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    long c = 0;
    try {
      c = std::stol(item, &pos);
    } catch (const std::exception&) {
      throw polyurn::ParseError("bad colour '" + item + "' in --leaves");
    }
    if (pos != item.size() || c < 1 || static_cast<std::size_t>(c) > d) {
      throw polyurn::ParseError("colours in --leaves are 1.." + std::to_string(d));
    }
    tuple.push_back(static_cast<std::size_t>(c - 1));
  }
  if (tuple.size() != m) {
    throw polyurn::ParseError("--leaves point needs " + std::to_string(m) + " colours");
  }
  return polyurn::SimplexVector::vertex(polyurn::flatten(tuple, d), states);
}

int cmd_chain(const ChainArgs& a) {
  const auto r = polyurn::io::read_tensor(a.file);
  const auto t = polyurn::induced_chain_tensor(r);
  const auto leaf = parse_leaf(a.leaves, r.colours(), r.draws());
  const auto profile = polyurn::LeafProfile::constant(a.depth, t.arity(), leaf);
  const auto rows = polyurn::geometric_certificate(t, profile);
  Output out(a.out);
  polyurn::io::write_certificate_csv(out.stream(), rows);
  return kOk;
}

// --- catalog ---------------------------------------------------------------

struct CatalogArgs {
  bool list = false;
  std::string emit;
  double a0 = 1.0, h = 1.0, sigma = 5.0;
};

int cmd_catalog(const CatalogArgs& a) {
  if (a.list) {
    json entries = json::array();
    for (const auto& e : polyurn::catalog()) {
      json j;
      j["name"] = e.name;
      j["description"] = e.description;
      j["d"] = e.tensor.colours();
      j["m"] = e.tensor.draws();
      j["sigma"] = e.expected_sigma;
      j["ergodicity_holds"] = e.expected_e_holds;
      entries.push_back(j);
    }
    print_json(entries);
    return kOk;
  }
  if (a.emit.empty()) throw polyurn::ParseError("catalog needs --list or --emit <name>");
  if (a.emit == "affine") {
    print_json(polyurn::io::to_json(polyurn::affine_entry(a.a0, a.h, a.sigma).tensor));
    return kOk;
  }
  const auto e = polyurn::find_catalog_entry(a.emit);
  if (!e) throw polyurn::ParseError("unknown catalog entry '" + a.emit + "'");
  print_json(polyurn::io::to_json(e->tensor));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-drawing Polya urn toolkit"};
  app.require_subcommand(1);

  CheckArgs check;
  auto* c = app.add_subcommand("check", "Check tenability, balance and the ergodicity condition");
  c->add_option("tensor", check.file, "Tensor JSON file, or - for stdin")->required();

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Fixed point of x -> R(x,...,x)/sigma");
  s->add_option("tensor", solve.file, "Tensor JSON file, or - for stdin")->required();
  s->add_option("--tol", solve.tol, "Stopping tolerance (L1)")->capture_default_str();
  s->add_option("--max-iter", solve.max_iter, "Iteration cap")->capture_default_str();
  s->add_flag("--all-2colour", solve.all_2colour, "Every fixed point of a two-colour tensor");
  s->add_option("--start", solve.start, "Start point, comma separated")->delimiter(',');
  s->add_option("--multi-start", solve.multi_start, "Number of random starts to explore");
  s->add_option("--seed", solve.seed, "Seed for --multi-start")->capture_default_str();

  SimulateArgs sim;
  auto* m = app.add_subcommand("simulate", "Monte Carlo error of the urn proportions");
  m->add_option("tensor", sim.file, "Tensor JSON file, or - for stdin")->required();
  m->add_option("--n", sim.n, "Number of draws")->capture_default_str();
  m->add_option("--replicates", sim.replicates, "Independent runs")->capture_default_str();
  m->add_option("--seed", sim.seed, "Master seed")->capture_default_str();
  m->add_option("--initial", sim.initial, "Initial counts (default all ones)")->delimiter(',');
  m->add_option("--target", sim.target, "Reference point (default: solve)")->delimiter(',');
  m->add_option("--out", sim.out, "CSV output file (default stdout)");

  DagArgs dag;
  auto* g = app.add_subcommand("dag", "Random DAG events, coupling check and dumps");
  g->add_option("--n", dag.n, "Number of nodes after the root (repeatable)")->delimiter(',');
  g->add_option("--m", dag.m, "Parents per node")->capture_default_str();
  g->add_option("--ell", dag.ell, "Depth for the ancestry event")->capture_default_str();
  g->add_option("--replicates", dag.replicates, "Independent DAGs")->capture_default_str();
  g->add_option("--seed", dag.seed, "Master seed")->capture_default_str();
  g->add_option("--tensor", dag.tensor, "Tensor JSON file for labelled modes");
  g->add_flag("--coupling", dag.coupling, "Compare exact urn and DAG laws (small n)");
  g->add_flag("--dump", dag.dump, "Print one labelled DAG as JSON");
  g->add_option("--pi", dag.pi, "Root label law (default uniform)")->delimiter(',');
  g->add_option("--out", dag.out, "Output file (default stdout)");

  ChainArgs chain;
  auto* h = app.add_subcommand("chain", "Exact tree recursion and geometric certificate");
  h->add_option("tensor", chain.file, "Tensor JSON file, or - for stdin")->required();
  h->add_option("--depth", chain.depth, "Tree depth")->capture_default_str();
  h->add_option("--leaves", chain.leaves, "uniform or point:<c1,...,cm> (1-based colours)")
      ->capture_default_str();
  h->add_option("--out", chain.out, "CSV output file (default stdout)");

  CatalogArgs cat;
  auto* k = app.add_subcommand("catalog", "Built-in example tensors");
  k->set_help_flag("--help", "Print this help message and exit");  // frees -h for --h
  auto* list = k->add_flag("--list", cat.list, "List entries");
  k->add_option("--emit", cat.emit, "Print the named tensor as JSON")->excludes(list);
  k->add_option("--a0", cat.a0, "affine: a0")->capture_default_str();
  k->add_option("--h", cat.h, "affine: step h")->capture_default_str();
  k->add_option("--sigma", cat.sigma, "affine: balance sigma")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInputError;
  }

  try {
    if (*c) return cmd_check(check);
    if (*s) return cmd_solve(solve);
    if (*m) return cmd_simulate(sim);
    if (*g) return cmd_dag(dag);
    if (*h) return cmd_chain(chain);
    if (*k) return cmd_catalog(cat);
  } catch (const polyurn::MaxIterExceeded& e) {
    print_json(non_convergence_json(e));
    return kNonConvergence;
  } catch (const polyurn::NotBalanced& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kAssumptionFailure;
  } catch (const polyurn::NotTenable& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kAssumptionFailure;
  } catch (const polyurn::NotContractive& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kAssumptionFailure;
  } catch (const polyurn::CertificateViolated& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kAssumptionFailure;
  } catch (const polyurn::DegenerateFixedPoints& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kAssumptionFailure;
  } catch (const polyurn::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}
