#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "polyurn/chain.hpp"
#include "polyurn/dag.hpp"
#include "polyurn/error.hpp"
#include "polyurn/fixed_point.hpp"
#include "polyurn/tensor.hpp"
#include "polyurn/urn.hpp"

namespace polyurn::io {

using nlohmann::json;

/// Tensor file: {"d": int, "m": int, "entries": [real, ...], "name"?: string}
/// with entries row-major over (i, j_1, ..., j_m), i slowest.
inline ReplacementTensor tensor_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("tensor file must be a JSON object");
  for (const char* key : {"d", "m", "entries"}) {
    if (!j.contains(key)) throw ParseError(std::string("tensor file is missing \"") + key + "\"");
  }
  if (!j["d"].is_number_integer() || !j["m"].is_number_integer()) {
    throw ParseError("\"d\" and \"m\" must be integers");
  }
  const auto d = j["d"].get<long long>();
  const auto m = j["m"].get<long long>();
  if (d < 1 || m < 1) throw ParseError("\"d\" and \"m\" must be positive");
  if (!j["entries"].is_array()) throw ParseError("\"entries\" must be an array");
  std::vector<double> entries;
  entries.reserve(j["entries"].size());
  for (const auto& e : j["entries"]) {
    if (!e.is_number()) throw ParseError("\"entries\" must contain only numbers");
    entries.push_back(e.get<double>());
  }
  std::string name;
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw ParseError("\"name\" must be a string");
    name = j["name"].get<std::string>();
  }
  return ReplacementTensor(static_cast<std::size_t>(d), static_cast<std::size_t>(m),
                           std::move(entries), std::move(name));
}

inline ReplacementTensor parse_tensor(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  return tensor_from_json(j);
}

/// Reads a tensor from a path, or from stdin when the path is "-".
inline ReplacementTensor read_tensor(const std::string& path) {
  std::string text;
  if (path == "-") {
    text.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  } else {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open tensor file " + path);
    text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  return parse_tensor(text);
}

inline json to_json(const ReplacementTensor& r) {
  json j;
  if (!r.name().empty()) j["name"] = r.name();
  j["d"] = r.colours();
  j["m"] = r.draws();
  j["entries"] = std::vector<double>(r.entries().begin(), r.entries().end());
  return j;
}

// JSON has no NaN; absent quantities serialise as null.
inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const AssumptionReport& rep) {
  json j;
  j["tenable"] = rep.tenable;
  j["balanced"] = rep.sigma.has_value();
  j["sigma"] = rep.sigma ? json(*rep.sigma) : json(nullptr);
  j["balance_deviation"] = rep.balance_deviation;
  j["ergodicity_lhs"] = rep.ergodicity_lhs;
  j["ergodicity_bound"] = number_or_null(rep.ergodicity_bound);
  j["ergodicity_holds"] = rep.ergodicity_holds;
  j["ergodicity_boundary"] = rep.ergodicity_boundary;
  j["q_estimate"] = rep.q_estimate ? json(*rep.q_estimate) : json(nullptr);
  j["all_hold"] = rep.all_hold();
  return j;
}

inline const char* method_name(FixedPointMethod m) {
  switch (m) {
    case FixedPointMethod::picard: return "picard";
    case FixedPointMethod::picard_newton: return "picard+newton";
    case FixedPointMethod::newton: return "newton";
  }
  return "unknown";
}

inline json to_json(const FixedPointResult& r) {
  json j;
  j["x_star"] = r.x_star.vector();
  j["iterations"] = r.iterations;
  j["residual"] = r.residual;
  j["certified"] = r.certified;
  j["q"] = r.q ? json(*r.q) : json(nullptr);
  j["method"] = method_name(r.method);
  return j;
}

/// {"m": int, "parents": [[...], ...], "labels": [[...], ...]} for nodes
/// 1..n; parents are node indices, labels are 1-based colours.
inline json to_json(const LabelledDag& dag) {
  json j;
  j["m"] = dag.structure.parents_per_node();
  json parents = json::array();
  json labels = json::array();
  for (std::size_t v = 1; v < dag.structure.size(); ++v) {
    const auto ps = dag.structure.parents(v);
    parents.push_back(std::vector<std::size_t>(ps.begin(), ps.end()));
    std::vector<std::size_t> lab = dag.labels[v];
    for (auto& c : lab) ++c;
    labels.push_back(lab);
  }
  j["parents"] = parents;
  j["labels"] = labels;
  return j;
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

/// n, mean_l1_error, stderr, replicates
inline void write_trajectory_csv(std::ostream& os, const TrajectoryStats& s) {
  os << "n,mean_l1_error,stderr,replicates\n";
  for (std::size_t k = 0; k < s.n_values.size(); ++k) {
    os << s.n_values[k] << ',' << format_double(s.mean_l1_error[k]) << ','
       << format_double(s.standard_error[k]) << ',' << s.replicates << '\n';
  }
}

inline void write_event_csv_header(std::ostream& os) { os << "n,ell,estimate,stderr,replicates\n"; }

inline void write_event_csv_row(std::ostream& os, const EventEstimate& e) {
  os << e.n << ',' << e.ell << ',' << format_double(e.p_ef) << ',' << format_double(e.se_ef) << ','
     << e.replicates << '\n';
}

inline void write_certificate_csv(std::ostream& os, const std::vector<CertificateLevel>& rows) {
  os << "level,max_error,bound\n";
  for (const auto& r : rows) {
    os << r.level << ',' << format_double(r.max_error) << ',' << format_double(r.bound) << '\n';
  }
}

}  // namespace polyurn::io
