#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "essnorm/lattice.hpp"
#include "essnorm/multi_index.hpp"
#include "essnorm/submodule.hpp"
#include "essnorm/weights.hpp"

namespace essnorm::io {

using nlohmann::json;

/// Malformed input; `pointer` is a JSON pointer to the offending field.
class InputError : public std::runtime_error {
public:
  InputError(std::string pointer, const std::string& what)
      : std::runtime_error(pointer.empty() ? what : pointer + ": " + what), pointer_(std::move(pointer)) {}
  const std::string& pointer() const noexcept { return pointer_; }

private:
  std::string pointer_;
};

namespace detail {

inline const json& field(const json& j, const std::string& key, const std::string& at) {
  if (!j.is_object()) throw InputError(at, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw InputError(at + "/" + key, "missing field");
  return *it;
}

inline long integer(const json& j, const std::string& at) {
  if (!j.is_number_integer()) throw InputError(at, "expected an integer");
  return j.get<long>();
}

inline double number(const json& j, const std::string& at) {
  if (!j.is_number()) throw InputError(at, "expected a number");
  return j.get<double>();
}

inline std::size_t dimension(const json& j, const std::string& at) {
  const long m = integer(field(j, "m", at), at + "/m");
  if (m < 1 || m > static_cast<long>(kMaxVars)) throw InputError(at + "/m", "dimension must be between 1 and " + std::to_string(kMaxVars));
  return static_cast<std::size_t>(m);
}

inline MultiIndex multi_index(const json& j, std::size_t m, const std::string& at) {
  if (!j.is_array()) throw InputError(at, "expected an array of nonnegative integers");
  if (j.size() != m) throw InputError(at, "expected " + std::to_string(m) + " entries, got " + std::to_string(j.size()));
  MultiIndex a(m);
  for (std::size_t t = 0; t < m; ++t) {
    const long v = integer(j[t], at + "/" + std::to_string(t));
    if (v < 0 || v > 1000000) throw InputError(at + "/" + std::to_string(t), "exponent out of range");
    a[t] = static_cast<int>(v);
  }
  return a;
}

inline Complex complex_value(const json& j, const std::string& at) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) return {j[0].get<double>(), j[1].get<double>()};
  throw InputError(at, "expected a number or a [re, im] pair");
}

inline json complex_json(const Complex& c) {
  if (c.imag() == 0.0) return c.real();
  return json::array({c.real(), c.imag()});
}

}  // namespace detail

inline json to_json(const MultiIndex& a) {
  json out = json::array();
  for (int v : a) out.push_back(v);
  return out;
}

/// Serializable description of a weight set.
struct WeightSpec {
  std::size_t m = 2;
  WeightFamily family = WeightFamily::drury_arveson;
  std::map<MultiIndex, double> table;
  ExtendPolicy extend = ExtendPolicy::error;

  WeightSet build() const {
    if (family == WeightFamily::custom) return WeightSet::custom(m, table, extend);
    return {family, m};
  }
};

inline WeightSpec parse_weights(const json& j, const std::string& at = "") {
  WeightSpec w;
  w.m = detail::dimension(j, at);
  const json& fam = detail::field(j, "family", at);
  if (!fam.is_string()) throw InputError(at + "/family", "expected a string");
  try {
    w.family = parse_family(fam.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw InputError(at + "/family", e.what());
  }
  if (w.family != WeightFamily::custom) return w;
  const json& table = detail::field(j, "table", at);
  if (!table.is_array() || table.empty()) throw InputError(at + "/table", "expected a nonempty array");
  for (std::size_t t = 0; t < table.size(); ++t) {
    const std::string here = at + "/table/" + std::to_string(t);
    const MultiIndex a = detail::multi_index(detail::field(table[t], "alpha", here), w.m, here + "/alpha");
    const double lam = detail::number(detail::field(table[t], "lambda", here), here + "/lambda");
    if (!(lam > 0.0)) throw InputError(here + "/lambda", "weight must be positive");
    if (!w.table.emplace(a, lam).second) throw InputError(here + "/alpha", "duplicate index " + a.str());
  }
  if (auto it = j.find("extend"); it != j.end()) {
    if (*it == "error") w.extend = ExtendPolicy::error;
    else if (*it == "product_extend") w.extend = ExtendPolicy::product_extend;
    else throw InputError(at + "/extend", "expected \"error\" or \"product_extend\"");
  }
  return w;
}

inline json to_json(const WeightSpec& w) {
  json out = {{"m", w.m}, {"family", std::string(to_string(w.family))}};
  if (w.family == WeightFamily::custom) {
    json table = json::array();
    for (const auto& [a, lam] : w.table) table.push_back({{"alpha", to_json(a)}, {"lambda", lam}});
    out["table"] = table;
    out["extend"] = w.extend == ExtendPolicy::error ? "error" : "product_extend";
  }
  return out;
}

/// Serializable description of a monomial submodule.  `scalar` records the
/// set form {"m", "generators": [[...], ...]}.
struct SubmoduleSpec {
  std::size_t m = 2;
  std::size_t k = 1;
  bool scalar = true;
  std::vector<Generator> generators;

  VectorSubmodule build() const { return {m, k, generators}; }
  ShiftInvariantSet set() const {
    std::vector<MultiIndex> pts;
    for (const auto& g : generators) pts.push_back(g.alpha);
    return {m, std::move(pts)};
  }
};

inline SubmoduleSpec parse_generator_list(const json& gens, std::size_t m, const std::string& at) {
  if (!gens.is_array()) throw InputError(at, "expected an array of exponent arrays");
  SubmoduleSpec s;
  s.m = m;
  for (std::size_t t = 0; t < gens.size(); ++t)
    s.generators.push_back({detail::multi_index(gens[t], m, at + "/" + std::to_string(t)), CVector::Ones(1)});
  return s;
}

inline SubmoduleSpec parse_submodule(const json& j, const std::string& at = "") {
  const std::size_t m = detail::dimension(j, at);
  const json& gens = detail::field(j, "generators", at);
  if (!gens.is_array()) throw InputError(at + "/generators", "expected an array");
  const bool objects = !gens.empty() && gens[0].is_object();
  if (!objects) {
    if (j.contains("k") && detail::integer(j["k"], at + "/k") != 1) throw InputError(at + "/k", "the set form needs k = 1");
    return parse_generator_list(gens, m, at + "/generators");
  }
  SubmoduleSpec s;
  s.m = m;
  s.scalar = false;
  const long k = detail::integer(detail::field(j, "k", at), at + "/k");
  if (k < 1 || k > 64) throw InputError(at + "/k", "multiplicity must be between 1 and 64");
  s.k = static_cast<std::size_t>(k);
  for (std::size_t t = 0; t < gens.size(); ++t) {
    const std::string here = at + "/generators/" + std::to_string(t);
    Generator g;
    g.alpha = detail::multi_index(detail::field(gens[t], "alpha", here), m, here + "/alpha");
    const json& x = detail::field(gens[t], "x", here);
    if (!x.is_array() || x.size() != s.k) throw InputError(here + "/x", "expected " + std::to_string(s.k) + " entries");
    g.x = CVector(static_cast<Eigen::Index>(s.k));
    for (std::size_t r = 0; r < s.k; ++r) g.x[static_cast<Eigen::Index>(r)] = detail::complex_value(x[r], here + "/x/" + std::to_string(r));
    if (g.x.norm() == 0.0) throw InputError(here + "/x", "generator vector is zero");
    s.generators.push_back(std::move(g));
  }
  return s;
}

inline json to_json(const SubmoduleSpec& s) {
  json gens = json::array();
  if (s.scalar) {
    for (const auto& g : s.generators) gens.push_back(to_json(g.alpha));
    return {{"m", s.m}, {"generators", gens}};
  }
  for (const auto& g : s.generators) {
    json x = json::array();
    for (Eigen::Index r = 0; r < g.x.size(); ++r) x.push_back(detail::complex_json(g.x[r]));
    gens.push_back({{"alpha", to_json(g.alpha)}, {"x", x}});
  }
  return {{"m", s.m}, {"k", s.k}, {"generators", gens}};
}

inline json to_json(const ShiftInvariantSet& b) {
  json gens = json::array();
  for (const auto& g : b.generators()) gens.push_back(to_json(g));
  return {{"m", b.dimension()}, {"generators", gens}};
}

inline json parse_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError("", what + " is not valid JSON: " + e.what());
  }
}

inline json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str(), path);
}

/// Everything needed to repeat a run.
struct RunConfig {
  std::string command;
  std::optional<WeightSpec> weights;
  std::optional<SubmoduleSpec> submodule;
  json params = json::object();
  std::string format = "json";
  std::uint64_t seed = 0;
};

inline json to_json(const RunConfig& c) {
  json out = {{"command", c.command}, {"params", c.params}, {"format", c.format}, {"seed", c.seed}};
  out["weights"] = c.weights ? to_json(*c.weights) : json(nullptr);
  out["submodule"] = c.submodule ? to_json(*c.submodule) : json(nullptr);
  return out;
}

inline RunConfig parse_run_config(const json& j) {
  RunConfig c;
  const json& cmd = detail::field(j, "command", "");
  if (!cmd.is_string()) throw InputError("/command", "expected a string");
  c.command = cmd.get<std::string>();
  if (j.contains("weights") && !j["weights"].is_null()) c.weights = parse_weights(j["weights"], "/weights");
  if (j.contains("submodule") && !j["submodule"].is_null()) c.submodule = parse_submodule(j["submodule"], "/submodule");
  if (j.contains("params")) {
    if (!j["params"].is_object()) throw InputError("/params", "expected an object");
    c.params = j["params"];
  }
  if (j.contains("format")) {
    if (!j["format"].is_string()) throw InputError("/format", "expected a string");
    c.format = j["format"].get<std::string>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw InputError("/seed", "expected a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  return c;
}

}  // namespace essnorm::io
