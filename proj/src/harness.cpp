#include "afkg/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <openssl/evp.h>

#include "afkg/ergm.hpp"
#include "afkg/fkg_lab.hpp"
#include "afkg/gcwm.hpp"
#include "afkg/glauber.hpp"
#include "afkg/graph.hpp"
#include "afkg/lattice.hpp"
#include "afkg/rng.hpp"
#include "afkg/stats.hpp"

namespace afkg::harness {

using nlohmann::json;
namespace fs = std::filesystem;

ValidationError::ValidationError(std::vector<std::string> diagnostics)
    : std::runtime_error(diagnostics.empty() ? "invalid config" : diagnostics.front()),
      diagnostics_(std::move(diagnostics)) {}

const OutputFile* OutputBundle::find(std::string_view name) const {
  for (const auto& f : files)
    if (f.name == name) return &f;
  return nullptr;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

namespace {

// ---------------------------------------------------------------- schema

enum class KeyType { kUint, kNumber, kBool, kString, kUintList, kNumberList, kObject, kGraphs, kDiameter };

struct KeySpec {
  KeyType type;
  bool required = false;
};

using Schema = std::map<std::string, KeySpec>;

enum class Family { kGcwm, kErgm, kNone, kEither };

struct KindSchema {
  std::string description;
  Family family;
  Schema run;
};

const std::map<std::string, KindSchema>& kinds() {
  static const std::map<std::string, KindSchema> table = {
      {"gcwm-analyze",
       {"rate function maximizers, classification and the stationary/fixed-point agreement", Family::kGcwm,
        {{"grid", {KeyType::kUint}}, {"tol", {KeyType::kNumber}}, {"lemma_tol", {KeyType::kNumber}}}}},
      {"gcwm-fkg",
       {"lattice condition (full and conditioned) and the local FKG witness", Family::kGcwm,
        {{"n", {KeyType::kUint, true}},
         {"m_star", {KeyType::kNumber}},
         {"eta", {KeyType::kNumber}},
         {"epsilon", {KeyType::kNumber}},
         {"mode", {KeyType::kString}},
         {"samples", {KeyType::kUint}}}}},
      {"gcwm-clt",
       {"exact normal-approximation distances of the phase magnetization", Family::kGcwm,
        {{"n_grid", {KeyType::kUintList, true}}, {"m_star", {KeyType::kNumber}}, {"eta", {KeyType::kNumber}}}}},
      {"ergm-analyze",
       {"ERGM rate maximizers and sigma_n^2", Family::kErgm,
        {{"n", {KeyType::kUint, true}}, {"grid", {KeyType::kUint}}, {"tol", {KeyType::kNumber}}}}},
      {"ergm-sample",
       {"phase-conditioned Glauber trace, optional multilinear and marginal probes", Family::kErgm,
        {{"n", {KeyType::kUint, true}},
         {"p_star", {KeyType::kNumber}},
         {"eta", {KeyType::kNumber}},
         {"exact_mode_max_n", {KeyType::kUint}},
         {"gamma_epsilon", {KeyType::kNumber}},
         {"steps", {KeyType::kUint, true}},
         {"record_every", {KeyType::kUint}},
         {"probe", {KeyType::kObject}}}}},
      {"ergm-fkg",
       {"ERGM lattice condition and the local FKG witness", Family::kErgm,
        {{"n", {KeyType::kUint, true}},
         {"p_star", {KeyType::kNumber}},
         {"eta", {KeyType::kNumber}},
         {"mode", {KeyType::kString}},
         {"samples", {KeyType::kUint}}}}},
      {"ergm-clt",
       {"MCMC normal-approximation distances of edge and subgraph counts", Family::kErgm,
        {{"n", {KeyType::kUint, true}},
         {"p_star", {KeyType::kNumber}},
         {"eta", {KeyType::kNumber}},
         {"exact_mode_max_n", {KeyType::kUint}},
         {"gamma_epsilon", {KeyType::kNumber}},
         {"effective", {KeyType::kUint, true}},
         {"subgraph", {KeyType::kString}}}}},
      {"defect",
       {"FKG defect: exact over up-sets (N <= 5) or sampled lower bound", Family::kEither,
        {{"n", {KeyType::kUint, true}},
         {"m_star", {KeyType::kNumber}},
         {"p_star", {KeyType::kNumber}},
         {"eta", {KeyType::kNumber}},
         {"epsilon", {KeyType::kNumber}},
         {"conditioned", {KeyType::kBool}},
         {"method", {KeyType::kString}},
         {"function_family", {KeyType::kString}},
         {"weighted", {KeyType::kBool}},
         {"pairs", {KeyType::kUint}}}}},
      {"coupling",
       {"four-chain monotone coupling against the analytic bounds", Family::kGcwm,
        {{"n", {KeyType::kUint, true}},
         {"m_star", {KeyType::kNumber}},
         {"eta", {KeyType::kNumber}},
         {"epsilon", {KeyType::kNumber}},
         {"T", {KeyType::kUint}},
         {"replicas", {KeyType::kUint, true}},
         {"contraction_reps", {KeyType::kUint}},
         {"g", {KeyType::kString}}}}},
      {"bound-eval",
       {"evaluate the approximate-FKG bound and the coupling right-hand sides", Family::kNone,
        {{"alpha", {KeyType::kNumber, true}},
         {"T", {KeyType::kUint, true}},
         {"alphabet_size", {KeyType::kUint}},
         {"mu_lambda_complement", {KeyType::kNumber, true}},
         {"diameter", {KeyType::kDiameter, true}},
         {"epsilon", {KeyType::kNumber}}}}},
  };
  return table;
}

const Schema& probe_schema() {
  static const Schema s = {{"n_grid", {KeyType::kUintList, true}}, {"k", {KeyType::kUint}},
                           {"adjacent", {KeyType::kBool}},         {"samples", {KeyType::kUint, true}},
                           {"record_every", {KeyType::kUint}},     {"burn_in", {KeyType::kUint}},
                           {"eta", {KeyType::kNumber}}};
  return s;
}

bool type_ok(const json& v, KeyType t) {
  switch (t) {
    case KeyType::kUint:
      return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
    case KeyType::kNumber:
      return v.is_number();
    case KeyType::kBool:
      return v.is_boolean();
    case KeyType::kString:
      return v.is_string();
    case KeyType::kUintList:
      if (!v.is_array()) return false;
      return std::all_of(v.begin(), v.end(), [](const json& e) { return type_ok(e, KeyType::kUint); });
    case KeyType::kNumberList:
      if (!v.is_array()) return false;
      return std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); });
    case KeyType::kObject:
      return v.is_object();
    case KeyType::kGraphs:
      return v.is_array();
    case KeyType::kDiameter:
      return type_ok(v, KeyType::kUint) || (v.is_string() && v.get<std::string>() == "inf");
  }
  return false;
}

const char* type_name(KeyType t) {
  switch (t) {
    case KeyType::kUint: return "a non-negative integer";
    case KeyType::kNumber: return "a number";
    case KeyType::kBool: return "a boolean";
    case KeyType::kString: return "a string";
    case KeyType::kUintList: return "a list of non-negative integers";
    case KeyType::kNumberList: return "a list of numbers";
    case KeyType::kObject: return "an object";
    case KeyType::kGraphs: return "a list of graphs";
    case KeyType::kDiameter: return "a non-negative integer or \"inf\"";
  }
  return "?";
}

void check_keys(const json& obj, const Schema& schema, const std::string& prefix, std::vector<std::string>& diags) {
  for (const auto& [key, value] : obj.items()) {
    auto it = schema.find(key);
    if (it == schema.end()) {
      diags.push_back("unknown key " + prefix + key);
      continue;
    }
    if (!type_ok(value, it->second.type)) diags.push_back(prefix + key + " must be " + type_name(it->second.type));
  }
  for (const auto& [key, spec] : schema)
    if (spec.required && !obj.contains(key)) diags.push_back("missing required key " + prefix + key);
}

// ---------------------------------------------------------------- model parsing

ergm::SmallGraph parse_graph(const json& g) {
  if (g.is_string()) {
    const auto s = g.get<std::string>();
    if (s == "edge") return ergm::single_edge();
    if (s == "triangle") return ergm::triangle();
    const auto colon = s.find(':');
    if (colon != std::string::npos) {
      const auto head = s.substr(0, colon);
      std::size_t k = 0;
      try {
        k = std::stoul(s.substr(colon + 1));
      } catch (const std::exception&) {
        throw Rejected("bad graph size in \"" + s + "\"");
      }
      if (head == "path") return ergm::path(k);
      if (head == "cycle") return ergm::cycle(k);
      if (head == "star") return ergm::star(k);
    }
    throw Rejected("unknown graph \"" + s + "\" (edge, triangle, path:k, cycle:k, star:k or an object)");
  }
  if (!g.is_object()) throw Rejected("a graph must be a name or an object");
  for (const auto& [key, value] : g.items())
    if (key != "vertices" && key != "edges" && key != "name") throw Rejected("unknown key in graph object: " + key);
  if (!g.contains("vertices") || !g.contains("edges")) throw Rejected("graph object needs vertices and edges");
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : g.at("edges")) {
    if (!e.is_array() || e.size() != 2) throw Rejected("graph edges must be [u, v] pairs");
    edges.emplace_back(e[0].get<int>(), e[1].get<int>());
  }
  return ergm::make_small_graph(g.at("vertices").get<std::size_t>(), std::move(edges),
                                g.value("name", std::string("custom")));
}

Family model_family(const std::string& kind, const json& model) {
  const auto& ks = kinds().at(kind);
  if (ks.family != Family::kEither) return ks.family;
  const auto f = model.value("family", std::string());
  if (f == "gcwm") return Family::kGcwm;
  if (f == "ergm") return Family::kErgm;
  return Family::kEither;
}

std::vector<double> beta_of(const json& model) { return model.at("beta").get<std::vector<double>>(); }

std::vector<ergm::SmallGraph> graphs_of(const json& model) {
  std::vector<ergm::SmallGraph> gs;
  for (const auto& g : model.at("graphs")) gs.push_back(parse_graph(g));
  return gs;
}

bool near_any(double x, const std::vector<double>& v, double tol) {
  return std::any_of(v.begin(), v.end(), [&](double m) { return std::abs(m - x) <= tol; });
}

std::string list_str(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
  return s + "]";
}

double half_gap(std::vector<double> ms) {
  std::sort(ms.begin(), ms.end());
  double g = 1.0;
  for (std::size_t k = 1; k < ms.size(); ++k) g = std::min(g, 0.5 * (ms[k] - ms[k - 1]) * (1.0 - 1e-9));
  return g;
}

std::uint64_t u64(const json& run, const char* key) { return run.at(key).get<std::uint64_t>(); }
double num(const json& run, const char* key) { return run.at(key).get<double>(); }

// Validates semantics and fills defaults into `run`. Returns diagnostics.
std::vector<std::string> resolve(const std::string& kind, json& model, json& run) {
  std::vector<std::string> d;
  const Family fam = model_family(kind, model);

  if (kind == "bound-eval") {
    if (!run.contains("alphabet_size")) run["alphabet_size"] = 2;
    if (num(run, "alpha") < 0.0) d.emplace_back("alpha must be >= 0");
    if (u64(run, "T") < 1) d.emplace_back("T must be >= 1");
    if (u64(run, "alphabet_size") < 2) d.emplace_back("alphabet_size must be >= 2");
    const double mu = num(run, "mu_lambda_complement");
    if (!(mu >= 0.0 && mu <= 1.0)) d.emplace_back("mu_lambda_complement must lie in [0, 1]");
    if (!run.contains("epsilon") && u64(run, "T") >= 1) run["epsilon"] = 1.0 / static_cast<double>(u64(run, "T"));
    if (!(num(run, "epsilon") > 0.0)) d.emplace_back("epsilon must be positive");
    return d;
  }

  if (fam == Family::kEither) {
    d.emplace_back("model.family must be \"gcwm\" or \"ergm\"");
    return d;
  }

  // Model block keys.
  Schema ms{{"family", {KeyType::kString}}, {"beta", {KeyType::kNumberList, true}}};
  if (fam == Family::kErgm) ms["graphs"] = {KeyType::kGraphs, true};
  check_keys(model, ms, "model.", d);
  if (!d.empty()) return d;
  if (model.contains("family") && model["family"] != (fam == Family::kGcwm ? "gcwm" : "ergm"))
    d.emplace_back("model.family does not match kind " + kind);

  const std::vector<double> beta = beta_of(model);
  const std::size_t n = run.contains("n") ? u64(run, "n") : 2;

  auto grid_checks = [&] {
    if (!run.contains("grid")) run["grid"] = 10000;
    if (!run.contains("tol")) run["tol"] = 1e-10;
    if (u64(run, "grid") < 1000) d.emplace_back("run.grid must be >= 1000");
    if (!(num(run, "tol") > 0.0 && num(run, "tol") <= 1e-8)) d.emplace_back("run.tol must lie in (0, 1e-8]");
  };

  auto check_mode = [&](std::size_t exhaustive_max) {
    if (!run.contains("mode")) run["mode"] = n <= exhaustive_max ? "exhaustive" : "sampled";
    const auto mode = run["mode"].get<std::string>();
    if (mode != "exhaustive" && mode != "sampled") d.emplace_back("run.mode must be \"exhaustive\" or \"sampled\"");
    if (mode == "exhaustive" && n > exhaustive_max)
      d.push_back("exhaustive mode supports n <= " + std::to_string(exhaustive_max));
    if (!run.contains("samples")) run["samples"] = mode == "sampled" ? 100000 : 0;
    if (mode == "sampled" && u64(run, "samples") == 0) d.emplace_back("sampled mode needs run.samples > 0");
  };

  if (fam == Family::kGcwm) {
    for (auto& s : gcwm::validate_params(beta, std::max<std::size_t>(n, 1))) d.push_back(s);
    if (run.contains("n") && n < 1) d.emplace_back("run.n must be >= 1");
    if (!d.empty()) return d;
    if (kind == "gcwm-analyze") {
      grid_checks();
      if (!run.contains("lemma_tol")) run["lemma_tol"] = 1e-8;
      return d;
    }
    const auto analysis = gcwm::find_maximizers(beta);
    if (!run.contains("m_star")) {
      if (analysis.strict_maximizers.empty()) {
        d.emplace_back("no non-critical maximizer to centre the band on; set run.m_star");
        return d;
      }
      run["m_star"] = analysis.strict_maximizers.back();
    }
    const double m_star = num(run, "m_star");
    if (!near_any(m_star, analysis.strict_maximizers, 1e-6))
      d.push_back("m_star=" + format_double(m_star) + " is not a non-critical maximizer (U = " +
                  list_str(analysis.strict_maximizers) + ")");
    if (!run.contains("eta")) run["eta"] = std::min(0.1, half_gap(analysis.maximizers));
    const double eta = num(run, "eta");
    const bool has_eps = kind == "gcwm-fkg" || kind == "coupling" || kind == "defect";
    double eps = eta / 2.0;
    if (has_eps) {
      if (!run.contains("epsilon")) run["epsilon"] = eta / 2.0;
      eps = num(run, "epsilon");
    }
    for (auto& s : gcwm::validate_bands(analysis, eta, eps)) d.push_back(s);
    if (kind == "gcwm-fkg") check_mode(12);
    if (kind == "gcwm-clt") {
      const auto grid = run.at("n_grid").get<std::vector<std::size_t>>();
      if (grid.empty()) d.emplace_back("run.n_grid must not be empty");
      for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < 2) d.emplace_back("run.n_grid entries must be >= 2");
        if (i && grid[i] <= grid[i - 1]) d.emplace_back("run.n_grid must be strictly increasing");
      }
    }
    if (kind == "coupling") {
      if (n < 2) d.emplace_back("coupling needs n >= 2");
      if (!run.contains("T")) run["T"] = n * n;
      if (!run.contains("contraction_reps")) run["contraction_reps"] = 20000;
      if (!run.contains("g")) run["g"] = "magnetization";
      const auto g = run["g"].get<std::string>();
      if (g != "magnetization" && g != "majority") d.emplace_back("run.g must be \"magnetization\" or \"majority\"");
      if (u64(run, "T") < 1) d.emplace_back("run.T must be >= 1");
      if (u64(run, "replicas") < 1) d.emplace_back("run.replicas must be >= 1");
      if (u64(run, "contraction_reps") < 100) d.emplace_back("run.contraction_reps must be >= 100");
    }
    if (kind == "defect") {
      if (run.contains("p_star")) d.emplace_back("run.p_star applies to ERGM models; use run.m_star");
      if (!run.contains("conditioned")) run["conditioned"] = true;
      if (!run.contains("method")) run["method"] = n <= 5 ? "exact" : "sampled";
      const auto method = run["method"].get<std::string>();
      if (method != "exact" && method != "sampled") d.emplace_back("run.method must be \"exact\" or \"sampled\"");
      if (method == "exact" && n > 5) d.emplace_back("exact defect supports N <= 5");
      if (method == "sampled" && n > 22) d.emplace_back("sampled defect needs an enumerable law (N <= 22)");
    }
  } else {
    std::vector<ergm::SmallGraph> graphs;
    try {
      graphs = graphs_of(model);
    } catch (const std::exception& e) {
      d.push_back(std::string("model.graphs: ") + e.what());
      return d;
    }
    for (auto& s : ergm::validate_spec(graphs, beta, n)) d.push_back(s);
    if (!d.empty()) return d;
    const auto spec = ergm::make_spec(graphs, beta, n);
    if (kind == "ergm-analyze") {
      grid_checks();
      return d;
    }
    const auto analysis = ergm::ergm_rate_analysis(spec);
    if (!run.contains("p_star")) {
      if (analysis.strict_maximizers.empty()) {
        d.emplace_back("no non-critical maximizer to centre the ball on; set run.p_star");
        return d;
      }
      run["p_star"] = analysis.strict_maximizers.back();
    }
    const double p_star = num(run, "p_star");
    if (!near_any(p_star, analysis.strict_maximizers, 1e-6))
      d.push_back("p_star=" + format_double(p_star) + " is not a non-critical maximizer (U = " +
                  list_str(analysis.strict_maximizers) + ")");
    if (!run.contains("eta")) run["eta"] = std::min(0.3, half_gap(analysis.maximizers));
    for (auto& s : ergm::validate_balls(analysis, num(run, "eta"))) d.push_back(s);
    if (kind == "ergm-sample" || kind == "ergm-clt") {
      if (!run.contains("exact_mode_max_n")) run["exact_mode_max_n"] = 12;
      if (n <= u64(run, "exact_mode_max_n") && n > 16)
        d.emplace_back("exact cut-ball conditioning supports n <= 16; lower run.exact_mode_max_n");
      if (run.contains("gamma_epsilon") && !(num(run, "gamma_epsilon") > 0.0))
        d.emplace_back("run.gamma_epsilon must be positive");
    }
    if (kind == "ergm-sample") {
      if (!run.contains("record_every")) run["record_every"] = n * (n - 1) / 2;
      if (u64(run, "record_every") < 1) d.emplace_back("run.record_every must be >= 1");
      if (run.contains("probe")) {
        json& probe = run["probe"];
        check_keys(probe, probe_schema(), "run.probe.", d);
        if (d.empty()) {
          if (!probe.contains("k")) probe["k"] = 2;
          if (!probe.contains("adjacent")) probe["adjacent"] = true;
          if (!probe.contains("burn_in")) probe["burn_in"] = 0;
          if (!probe.contains("eta")) probe["eta"] = num(run, "eta");
          const auto k = u64(probe, "k");
          if (k < 1 || k > 2) d.emplace_back("run.probe.k must be 1 or 2");
          const auto grid = probe.at("n_grid").get<std::vector<std::size_t>>();
          if (grid.size() < 2) d.emplace_back("run.probe.n_grid needs at least two sizes");
          for (std::size_t i = 0; i < grid.size(); ++i) {
            if (grid[i] < 4 || grid[i] > 64) d.emplace_back("run.probe.n_grid entries must lie in [4, 64]");
            if (i && grid[i] <= grid[i - 1]) d.emplace_back("run.probe.n_grid must be strictly increasing");
          }
          if (!probe.contains("record_every")) probe["record_every"] = grid.empty() ? 1 : grid.back() * grid.back();
          if (u64(probe, "samples") < 100) d.emplace_back("run.probe.samples must be >= 100");
          for (auto& s : ergm::validate_balls(analysis, num(probe, "eta"))) d.push_back("run.probe: " + s);
        }
      }
    }
    if (kind == "ergm-fkg") check_mode(6);
    if (kind == "ergm-clt") {
      if (!run.contains("subgraph")) run["subgraph"] = "triangle";
      try {
        parse_graph(run["subgraph"]);
      } catch (const std::exception& e) {
        d.push_back(std::string("run.subgraph: ") + e.what());
      }
      if (u64(run, "effective") < 200) d.emplace_back("run.effective must be >= 200");
    }
    if (kind == "defect") {
      if (run.contains("m_star")) d.emplace_back("run.m_star applies to GCWM models; use run.p_star");
      if (run.contains("epsilon")) d.emplace_back("run.epsilon applies to GCWM models");
      if (!run.contains("conditioned")) run["conditioned"] = true;
      const std::size_t dim = n * (n - 1) / 2;
      if (!run.contains("method")) run["method"] = dim <= 5 ? "exact" : "sampled";
      const auto method = run["method"].get<std::string>();
      if (method != "exact" && method != "sampled") d.emplace_back("run.method must be \"exact\" or \"sampled\"");
      if (method == "exact" && dim > 5) d.emplace_back("exact defect supports C(n,2) <= 5");
      if (method == "sampled" && dim > 22) d.emplace_back("sampled defect needs an enumerable law (C(n,2) <= 22)");
      if (n > 12) d.emplace_back("the cut ball is exact only for n <= 12");
    }
  }
  if (kind == "defect") {
    if (!run.contains("function_family")) run["function_family"] = "disjoint-thresholds";
    if (!run.contains("weighted")) run["weighted"] = false;
    if (!run.contains("pairs")) run["pairs"] = 20000;
    const auto ff = run["function_family"].get<std::string>();
    if (ff != "coordinate-pairs" && ff != "disjoint-thresholds")
      d.emplace_back("run.function_family must be \"coordinate-pairs\" or \"disjoint-thresholds\"");
  }
  return d;
}

std::vector<std::string> validate_impl(const json& config, ExperimentConfig* out) {
  std::vector<std::string> d;
  if (!config.is_object()) return {"config must be a JSON object"};
  const Schema top{{"kind", {KeyType::kString, true}},
                   {"seed", {KeyType::kUint, true}},
                   {"output", {KeyType::kString}},
                   {"model", {KeyType::kObject}},
                   {"run", {KeyType::kObject}}};
  check_keys(config, top, "", d);
  if (!d.empty()) return d;
  const auto kind = config["kind"].get<std::string>();
  auto it = kinds().find(kind);
  if (it == kinds().end()) return {"unknown experiment kind \"" + kind + "\""};
  json model = config.value("model", json::object());
  json run = config.value("run", json::object());
  if (it->second.family != Family::kNone && !config.contains("model")) d.emplace_back("missing required key model");
  if (it->second.family == Family::kNone && !model.empty()) d.emplace_back("kind " + kind + " takes no model block");
  check_keys(run, it->second.run, "run.", d);
  if (!d.empty()) return d;
  try {
    for (auto& s : resolve(kind, model, run)) d.push_back(s);
  } catch (const std::exception& e) {
    d.emplace_back(e.what());
  }
  if (d.empty() && out) {
    out->kind = kind;
    out->seed = config["seed"].get<std::uint64_t>();
    if (config.contains("output")) out->output = config["output"].get<std::string>();
    out->model = model;
    out->run = run;
  }
  return d;
}

// ---------------------------------------------------------------- output helpers

json jnum(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

json jdist(Distance d) { return d == kInfinite ? json("inf") : json(d); }

json jconfig(const SpinConfig& x) {
  json ones = json::array();
  for (std::size_t i = 0; i < x.dimension(); ++i)
    if (x[i]) ones.push_back(i);
  return ones;
}

class Csv {
 public:
  Csv(std::vector<std::string> header, bool approximate = false, std::string note = {})
      : width_(header.size()) {
    if (approximate) out_ << "# APPROXIMATE" << (note.empty() ? "" : ": " + note) << '\n';
    row_strings(header);
  }
  Csv& row(std::initializer_list<std::string> cells) { return row_strings(std::vector<std::string>(cells)); }
  Csv& row_strings(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw std::logic_error("CSV row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
    return *this;
  }
  [[nodiscard]] std::string str() const { return out_.str(); }

 private:
  std::size_t width_;
  std::ostringstream out_;
};

std::string f(double v) { return format_double(v); }
std::string f(std::uint64_t v) { return std::to_string(v); }
std::string f(std::size_t v, int) { return std::to_string(v); }
std::string fb(bool v) { return v ? "true" : "false"; }

std::string plot(const std::vector<std::pair<double, double>>& xy, const std::string& xlabel,
                 const std::string& ylabel) {
  std::string s = "# " + xlabel + " " + ylabel + "\n";
  for (const auto& [x, y] : xy) s += format_double(x) + " " + format_double(y) + "\n";
  return s;
}

struct Output {
  json results = json::object();
  bool approximate = false;
  std::vector<OutputFile> files;

  void add(std::string name, std::string content) { files.push_back({std::move(name), std::move(content)}); }
};

Rng stream(const ExperimentConfig& c, std::uint64_t replica = 0) {
  return Rng::derive(c.seed, tag_hash(c.kind), replica);
}

json lattice_json(const fkg::LatticeReport& r) {
  json j{{"worst_log_ratio", jnum(r.worst_log_ratio)},
         {"pairs_checked", r.pairs_checked},
         {"exhaustive", r.exhaustive},
         {"holds", r.worst_log_ratio >= -1e-10}};
  if (r.witness) j["witness"] = {jconfig(r.witness->first), jconfig(r.witness->second)};
  return j;
}

json defect_json(const fkg::DefectReport& r) {
  json j{{"delta", jnum(r.delta)},
         {"raw_max", jnum(r.raw_max)},
         {"clamped", r.clamped},
         {"method", fkg::to_string(r.method)},
         {"sample_count", r.sample_count},
         {"covariance_exact", r.covariance_exact},
         {"standard_error", jnum(r.standard_error)},
         {"witness", r.witness_description}};
  return j;
}

json clt_json(const stats::CltReport& r) {
  return json{{"statistic", r.statistic},
              {"exact", r.exact},
              {"size", r.size},
              {"mean", jnum(r.mean)},
              {"variance", jnum(r.variance)},
              {"scale", jnum(r.scale)},
              {"scale_formula", r.scale_formula},
              {"predicted_variance", jnum(r.predicted_variance)},
              {"variance_ratio", jnum(r.variance_ratio)},
              {"d_K", jnum(r.distance.kolmogorov)},
              {"d_W", jnum(r.distance.wasserstein)},
              {"sample_count", r.sample_count},
              {"autocorrelation_time", jnum(r.autocorrelation_time)},
              {"thin", r.thin},
              {"effective_samples", jnum(r.effective_samples)},
              {"approximate", r.approximate}};
}

ergm::CutBall ball_from(const json& run) {
  ergm::CutBall b;
  b.p_star = num(run, "p_star");
  b.eta = num(run, "eta");
  if (run.contains("exact_mode_max_n")) b.exact_mode_max_n = u64(run, "exact_mode_max_n");
  if (run.contains("gamma_epsilon")) b.gamma_epsilon = num(run, "gamma_epsilon");
  return b;
}

std::string ball_note(const ergm::CutBall& b) {
  return "cut-ball proxy |density - p*| <= eta/2" + std::string(b.gamma_epsilon ? " intersected with Gamma" : "");
}

// ---------------------------------------------------------------- kinds

void run_gcwm_analyze(const ExperimentConfig& c, Output& o) {
  const auto beta = beta_of(c.model);
  const auto a = gcwm::find_maximizers(beta, u64(c.run, "grid"), num(c.run, "tol"));
  Csv csv({"m", "rate", "rate_d1", "rate_d2", "fixed_point_residual", "map_derivative", "class",
           "concave_stationary", "attracting_fixed_point"});
  std::size_t agree = 0;
  json points = json::array();
  for (const auto& s : a.stationary_points) {
    const bool in_m = near_any(s.m, a.maximizers, 0.0);
    const bool in_u = near_any(s.m, a.strict_maximizers, 0.0);
    const std::string cls = in_u ? "U" : (in_m ? "critical" : "not-maximizer");
    const auto lemma = gcwm::check_lemma_equiv(beta, s.m, num(c.run, "lemma_tol"));
    agree += lemma.agree();
    csv.row({f(s.m), f(s.rate), f(s.rate_d1), f(s.rate_d2), f(s.fixed_point_residual), f(s.map_derivative), cls,
             fb(lemma.concave_stationary), fb(lemma.attracting_fixed_point)});
    points.push_back({{"m", s.m}, {"rate", jnum(s.rate)}, {"class", cls}});
  }
  o.results = {{"maximizers", a.maximizers},
               {"classification", {{"U", a.strict_maximizers}, {"critical", a.critical_excluded}}},
               {"stationary_points", points},
               {"lemma_agreement", {{"agree", agree}, {"total", a.stationary_points.size()}}},
               {"tolerance", a.tolerance}};
  o.add("stationary_points.csv", csv.str());
  std::vector<std::pair<double, double>> curve;
  for (int i = 0; i <= 1000; ++i) {
    const double m = i / 1000.0;
    curve.emplace_back(m, gcwm::rate_function(beta, m).value);
  }
  o.add("rate_function.dat", plot(curve, "m", "L(m)"));
}

void run_gcwm_fkg(const ExperimentConfig& c, Output& o) {
  const auto p = gcwm::make_params(beta_of(c.model), u64(c.run, "n"));
  const auto band = gcwm::make_band(num(c.run, "m_star"), num(c.run, "eta"), num(c.run, "epsilon"));
  const bool exhaustive = c.run["mode"] == "exhaustive";
  const auto mode = exhaustive ? fkg::Mode::kExhaustive : fkg::Mode::kSampled;
  const auto samples = u64(c.run, "samples");
  Rng rng = stream(c);
  Rng r1 = rng.split(1), r2 = rng.split(2), r3 = rng.split(3);
  const auto full = fkg::check_lattice_condition(gcwm::full_measure(p), mode, samples, &r1);
  const auto cond = fkg::check_lattice_condition(gcwm::phase_measure(p, band), mode, samples, &r2);
  const auto local = gcwm::local_fkg_witness(p, band, exhaustive ? gcwm::Mode::kExhaustive : gcwm::Mode::kSampled,
                                             samples, &r3);
  json lj{{"worst_log_ratio", jnum(local.worst_log_ratio)},
          {"pairs_checked", local.pairs_checked},
          {"superadditivity_violations", local.superadditivity_violations},
          {"holds", local.worst_log_ratio >= -1e-10}};
  if (local.witness) lj["witness"] = {jconfig(local.witness->first), jconfig(local.witness->second)};
  o.results = {{"unconditioned", lattice_json(full)}, {"conditioned", lattice_json(cond)}, {"local", lj}};
  Csv csv({"check", "worst_log_ratio", "pairs_checked", "exhaustive"});
  csv.row({"unconditioned", f(full.worst_log_ratio), f(full.pairs_checked), fb(full.exhaustive)});
  csv.row({"conditioned", f(cond.worst_log_ratio), f(cond.pairs_checked), fb(cond.exhaustive)});
  csv.row({"local", f(local.worst_log_ratio), f(local.pairs_checked), fb(exhaustive)});
  o.add("fkg.csv", csv.str());
}

void run_gcwm_clt(const ExperimentConfig& c, Output& o) {
  const auto beta = beta_of(c.model);
  const auto grid = c.run.at("n_grid").get<std::vector<std::size_t>>();
  const double m_star = num(c.run, "m_star");
  const double eta = num(c.run, "eta");
  const auto reports = stats::clt_report_gcwm(beta, m_star, eta, grid);
  Csv csv({"N", "mean", "variance", "predicted_variance", "variance_ratio", "d_K", "d_W"});
  std::vector<std::pair<double, double>> dk, ratio;
  json series = json::array();
  for (const auto& r : reports) {
    csv.row({f(r.size, 0), f(r.mean), f(r.variance), f(r.predicted_variance), f(r.variance_ratio),
             f(r.distance.kolmogorov), f(r.distance.wasserstein)});
    dk.emplace_back(static_cast<double>(r.size), r.distance.kolmogorov);
    ratio.emplace_back(static_cast<double>(r.size), r.variance_ratio);
    series.push_back(clt_json(r));
  }
  o.results = {{"series", series},
               {"variance_formula", "N m*(1-m*) / (1 - m*(1-m*) h''(m*))"},
               {"m_star", m_star},
               {"eta", eta}};
  o.add("clt.csv", csv.str());
  o.add("dk_vs_n.dat", plot(dk, "N", "d_K"));
  o.add("variance_ratio_vs_n.dat", plot(ratio, "N", "variance_ratio"));
  const std::size_t nmax = grid.back();
  const auto law = gcwm::exact_magnetization_law(gcwm::make_params(beta, nmax), gcwm::make_band(m_star, eta, eta / 2));
  Csv dist({"value", "exact_prob"});
  for (std::size_t k = 0; k <= nmax; ++k)
    if (law.probability(k) > 0.0) dist.row({f(k, 0), f(law.probability(k))});
  o.add("law_N" + std::to_string(nmax) + ".csv", dist.str());
}

ergm::ErgmSpec spec_of(const ExperimentConfig& c) {
  return ergm::make_spec(graphs_of(c.model), beta_of(c.model), u64(c.run, "n"));
}

void run_ergm_analyze(const ExperimentConfig& c, Output& o) {
  const auto spec = spec_of(c);
  const auto a = ergm::ergm_rate_analysis(spec, num(c.run, "tol"), u64(c.run, "grid"));
  Csv csv({"p", "rate", "rate_d1", "rate_d2", "fixed_point_residual", "map_derivative", "class"});
  for (const auto& s : a.stationary_points) {
    const bool in_m = near_any(s.p, a.maximizers, 0.0);
    const bool in_u = near_any(s.p, a.strict_maximizers, 0.0);
    csv.row({f(s.p), f(s.rate), f(s.rate_d1), f(s.rate_d2), f(s.fixed_point_residual), f(s.map_derivative),
             in_u ? "U" : (in_m ? "critical" : "not-maximizer")});
  }
  json sig = json::array();
  for (std::size_t k = 0; k < a.strict_maximizers.size(); ++k) {
    const double er = a.strict_maximizers[k] * (1 - a.strict_maximizers[k]) * static_cast<double>(spec.n * (spec.n - 1) / 2);
    sig.push_back({{"p_star", a.strict_maximizers[k]},
                   {"sigma_n_squared", jnum(a.sigma_n_squared[k])},
                   {"erdos_renyi_variance", er},
                   {"inconsistent", static_cast<bool>(a.inconsistent[k])}});
  }
  o.results = {{"maximizers", a.maximizers},
               {"classification", {{"U", a.strict_maximizers}, {"critical", a.critical_excluded}}},
               {"sigma_n", sig},
               {"n", spec.n}};
  o.add("stationary_points.csv", csv.str());
}

void run_ergm_sample(const ExperimentConfig& c, Output& o) {
  const auto spec = spec_of(c);
  const auto ball = ball_from(c.run);
  Rng rng = stream(c);
  const auto every = u64(c.run, "record_every");
  const bool approx = !ball.exact_for(spec.n);
  o.approximate = approx;
  Csv trace({"step", "edges", "density", "rejections"}, approx, ball_note(ball));
  std::vector<double> densities;
  std::uint64_t rejections = 0;
  const auto result = ergm::phase_sampler(spec, ball, u64(c.run, "steps"), rng,
                                          [&](const ergm::StepRecord& rec, const ergm::GraphConfig& x) {
                                            rejections += rec.rejected;
                                            if ((rec.step + 1) % every != 0) return;
                                            densities.push_back(x.edge_density());
                                            trace.row({f(rec.step + 1), f(static_cast<std::uint64_t>(x.edge_count())),
                                                       f(x.edge_density()), f(rejections)});
                                          });
  json res{{"steps", result.steps},
           {"rejections", result.rejections},
           {"final_edges", result.final_state.edge_count()},
           {"final_density", result.final_state.edge_density()},
           {"records", densities.size()},
           {"approximate", approx},
           {"ball", {{"p_star", ball.p_star}, {"eta", ball.eta}, {"mode", approx ? "APPROXIMATE" : "EXACT"}}}};
  if (densities.size() >= 100) {
    const auto mp = stats::marginal_point(densities, ball.p_star, spec.n);
    res["marginal"] = {{"deviation", mp.deviation}, {"standard_error", mp.standard_error}, {"envelope", mp.envelope}};
  }
  o.add("trace.csv", trace.str());
  std::ostringstream edges;
  ergm::write_edge_list(edges, result.final_state);
  o.add("final_graph.txt", edges.str());

  if (c.run.contains("probe")) {
    const json& pr = c.run["probe"];
    ergm::CutBall pball = ball;
    pball.eta = num(pr, "eta");
    const auto grid = pr.at("n_grid").get<std::vector<std::size_t>>();
    for (std::size_t n : grid)
      if (pball.exact_for(n) && n > 16) throw Rejected("probe grid needs exact_mode_max_n < 17");
    const bool papprox = std::any_of(grid.begin(), grid.end(), [&](std::size_t n) { return !pball.exact_for(n); });
    o.approximate = o.approximate || papprox;
    const auto rep = stats::multilinear_probe(spec, pball, grid, u64(pr, "k"), pr["adjacent"].get<bool>(),
                                              u64(pr, "samples"), u64(pr, "record_every"), u64(pr, "burn_in"),
                                              c.seed);
    Csv ml({"n", "deviation", "product_mean", "edge_mean", "standard_error", "ci_low", "ci_high", "samples"}, papprox,
           ball_note(pball));
    Csv mg({"n", "deviation", "edge_mean", "standard_error", "ci_low", "ci_high", "envelope", "samples"}, papprox,
           ball_note(pball));
    json pts = json::array(), mgs = json::array();
    for (std::size_t i = 0; i < rep.points.size(); ++i) {
      const auto& p = rep.points[i];
      const auto& m = rep.marginals[i];
      ml.row({f(p.n, 0), f(p.deviation), f(p.product_mean), f(p.edge_mean), f(p.standard_error), f(p.ci_low),
              f(p.ci_high), f(p.samples)});
      mg.row({f(m.n, 0), f(m.deviation), f(m.edge_mean), f(m.standard_error), f(m.ci_low), f(m.ci_high),
              f(m.envelope), f(m.samples)});
      pts.push_back({{"n", p.n}, {"deviation", p.deviation}, {"standard_error", p.standard_error}});
      mgs.push_back({{"n", m.n},
                     {"deviation", m.deviation},
                     {"envelope", m.envelope},
                     {"under_envelope", m.deviation <= m.envelope}});
    }
    res["multilinear"] = {{"points", pts},
                          {"slope", rep.slope},
                          {"slope_standard_error", rep.slope_standard_error},
                          {"approximate", papprox}};
    res["marginal_probe"] = mgs;
    o.add("multilinear.csv", ml.str());
    o.add("marginal.csv", mg.str());
  }
  o.results = res;
}

void run_ergm_fkg(const ExperimentConfig& c, Output& o) {
  const auto spec = spec_of(c);
  ergm::CutBall ball;
  ball.p_star = num(c.run, "p_star");
  ball.eta = num(c.run, "eta");
  const bool exhaustive = c.run["mode"] == "exhaustive";
  const auto samples = u64(c.run, "samples");
  Rng rng = stream(c);
  Rng r1 = rng.split(1), r2 = rng.split(2);
  const auto mu = ergm::ergm_measure(spec);
  const bool small = mu.dimension <= 12;
  const auto lattice = fkg::check_lattice_condition(
      mu, small ? fkg::Mode::kExhaustive : fkg::Mode::kSampled, small ? 0 : std::max<std::uint64_t>(samples, 100000), &r1);
  const auto local = ergm::local_fkg_witness_ergm(
      spec, ball, exhaustive ? ergm::Mode::kExhaustive : ergm::Mode::kSampled, samples, &r2);
  o.approximate = !ball.exact_for(spec.n);
  json lj{{"worst_log_ratio", jnum(local.worst_log_ratio)},
          {"pairs_checked", local.pairs_checked},
          {"superadditivity_checks", local.superadditivity_checks},
          {"superadditivity_violations", local.superadditivity_violations},
          {"strict_pairs", local.strict_pairs},
          {"inner_radius", local.inner_radius},
          {"holds", local.worst_log_ratio >= -1e-10}};
  o.results = {{"unconditioned", lattice_json(lattice)}, {"local", lj}, {"approximate", o.approximate}};
  Csv csv({"check", "worst_log_ratio", "pairs_checked", "exhaustive"}, o.approximate, ball_note(ball));
  csv.row({"unconditioned", f(lattice.worst_log_ratio), f(lattice.pairs_checked), fb(lattice.exhaustive)});
  csv.row({"local", f(local.worst_log_ratio), f(local.pairs_checked), fb(exhaustive)});
  o.add("fkg.csv", csv.str());
}

void run_ergm_clt(const ExperimentConfig& c, Output& o) {
  const auto spec = spec_of(c);
  const auto ball = ball_from(c.run);
  const auto sub = parse_graph(c.run["subgraph"]);
  Rng rng = stream(c);
  const auto r = stats::clt_report_ergm(spec, ball, u64(c.run, "effective"), sub, rng);
  o.approximate = r.edges.approximate;
  o.results = {{"edges", clt_json(r.edges)}, {"subgraph", clt_json(r.subgraph)}, {"correlation", r.correlation},
               {"approximate", o.approximate}};
  Csv csv({"statistic", "mean", "variance", "predicted_variance", "variance_ratio", "d_K", "d_W", "samples",
           "autocorrelation_time", "thin"},
          o.approximate, ball_note(ball));
  for (const auto* rep : {&r.edges, &r.subgraph})
    csv.row({rep->statistic, f(rep->mean), f(rep->variance), f(rep->predicted_variance), f(rep->variance_ratio),
             f(rep->distance.kolmogorov), f(rep->distance.wasserstein), f(rep->sample_count),
             f(rep->autocorrelation_time), f(rep->thin)});
  o.add("clt.csv", csv.str());
}

void run_defect(const ExperimentConfig& c, Output& o) {
  const bool gcwm_model = model_family(c.kind, c.model) == Family::kGcwm;
  const auto n = u64(c.run, "n");
  MeasureSpec mu;
  if (gcwm_model) {
    const auto p = gcwm::make_params(beta_of(c.model), n);
    const auto band = gcwm::make_band(num(c.run, "m_star"), num(c.run, "eta"), num(c.run, "epsilon"));
    mu = c.run["conditioned"].get<bool>() ? gcwm::phase_measure(p, band) : gcwm::full_measure(p);
  } else {
    const auto spec = spec_of(c);
    ergm::CutBall ball;
    ball.p_star = num(c.run, "p_star");
    ball.eta = num(c.run, "eta");
    mu = c.run["conditioned"].get<bool>() ? ergm::ball_measure(spec, ball) : ergm::ergm_measure(spec);
  }
  fkg::DefectReport rep;
  if (c.run["method"] == "exact") {
    rep = fkg::exact_defect(mu);
  } else {
    fkg::FunctionFamily fam;
    fam.kind = c.run["function_family"] == "coordinate-pairs" ? fkg::FunctionFamily::Kind::kCoordinatePairs
                                                               : fkg::FunctionFamily::Kind::kDisjointThresholds;
    fam.weighted = c.run["weighted"].get<bool>();
    Rng rng = stream(c);
    rep = fkg::sampled_defect(enumerate_measure(mu), fam, u64(c.run, "pairs"), rng);
  }
  o.approximate = rep.method == fkg::DefectMethod::kSampled;
  o.results = {{"defect", defect_json(rep)}, {"measure", mu.label}, {"dimension", mu.dimension}};
  Csv csv({"measure", "dimension", "delta", "raw_max", "method", "sample_count"}, o.approximate,
          "sampled defect is a lower bound");
  csv.row({mu.label, f(mu.dimension, 0), f(rep.delta), f(rep.raw_max), fkg::to_string(rep.method),
           f(rep.sample_count)});
  o.add("defect.csv", csv.str());
}

void run_coupling(const ExperimentConfig& c, Output& o) {
  const auto n = u64(c.run, "n");
  const auto p = gcwm::make_params(beta_of(c.model), n);
  const auto band = gcwm::make_band(num(c.run, "m_star"), num(c.run, "eta"), num(c.run, "epsilon"));
  const auto mu = gcwm::phase_measure(p, band);
  const auto lambda = gcwm::inner_region(p, band);
  const auto law = gcwm::exact_magnetization_law(p, band);
  const auto [lo, hi] = gcwm::band_levels(n, band.m_star, band.epsilon);
  double inside = 0.0;
  for (std::size_t k = lo; k <= hi && k <= n; ++k) inside += law.probability(k);
  Rng rng = stream(c);
  Rng crng = rng.split(1);
  const auto contraction = estimate_contraction(mu, lambda, gcwm::inner_pair_sampler(p, band),
                                                u64(c.run, "contraction_reps"), crng, static_cast<double>(n));
  fkg::CouplingInputs in;
  in.T = u64(c.run, "T");
  in.replicas = u64(c.run, "replicas");
  in.epsilon = 1.0 / static_cast<double>(in.T);
  in.stationary_sampler = [law](Rng& r) { return law.sample(r); };
  in.mu_lambda_complement = std::max(0.0, 1.0 - inside);
  in.alpha = std::min(1.0, contraction.alpha_hat + contraction.confidence_halfwidth);
  in.diameter = lambda.certified_diameter().value_or(intrinsic_diameter(lambda));
  IncreasingFunction g;
  const bool majority = c.run["g"] == "majority";
  const double m_star = band.m_star;
  g.evaluator = majority ? std::function<double(const SpinConfig&)>(
                               [m_star](const SpinConfig& x) { return mean_value(x) >= m_star ? 1.0 : 0.0; })
                         : std::function<double(const SpinConfig&)>([](const SpinConfig& x) { return mean_value(x); });
  g.sup_norm_bound = 1.0;
  g.label = majority ? "1[m >= m*]" : "m(x)";
  Rng erng = rng.split(2);
  const auto rep = fkg::coupling_experiment(mu, g, lambda, in, erng);
  auto ev = [](const fkg::EventSummary& s) {
    return json{{"count", s.count},
                {"frequency", s.frequency},
                {"wilson_low", s.interval.lower},
                {"wilson_high", s.interval.upper},
                {"bound", jnum(s.bound)},
                {"verdict", s.within_bound ? "within bound" : "exceeds bound"}};
  };
  o.results = {{"base_mixing", ev(rep.base_mixing)},
               {"tilted_mixing", ev(rep.tilted_mixing)},
               {"domination", ev(rep.domination)},
               {"alpha", rep.alpha},
               {"alpha_hat", contraction.alpha_hat},
               {"kappa_lower", contraction.kappa_lower()},
               {"predicted_kappa", gcwm::predicted_kappa(p.beta, m_star)},
               {"epsilon", rep.epsilon},
               {"T", rep.T},
               {"mu_lambda_complement", rep.mu_lambda_complement},
               {"diameter", jdist(in.diameter)},
               {"z", jconfig(rep.z)},
               {"z_candidates_tried", rep.z_candidates_tried},
               {"in_lambda_steps", rep.in_lambda_steps},
               {"in_lambda_order_violations", rep.in_lambda_order_violations},
               {"informative", rep.informative},
               {"g", g.label}};
  Csv csv({"event", "count", "frequency", "wilson_low", "wilson_high", "bound", "within_bound"});
  const std::pair<const char*, const fkg::EventSummary*> rows[] = {
      {"base_mixing", &rep.base_mixing}, {"tilted_mixing", &rep.tilted_mixing}, {"domination", &rep.domination}};
  for (const auto& [name, s] : rows)
    csv.row({name, f(s->count), f(s->frequency), f(s->interval.lower), f(s->interval.upper), f(s->bound),
             fb(s->within_bound)});
  o.add("coupling.csv", csv.str());
  Csv reps({"replica", "base_disagrees", "tilted_disagrees", "domination_fails", "in_lambda_steps",
            "in_lambda_order_violations"});
  for (std::size_t r = 0; r < rep.replicas.size(); ++r) {
    const auto& x = rep.replicas[r];
    reps.row({f(r, 0), fb(x.base_disagrees), fb(x.tilted_disagrees), fb(x.domination_fails), f(x.in_lambda_steps),
              f(x.in_lambda_order_violations)});
  }
  o.add("replicas.csv", reps.str());
}

void run_bound_eval(const ExperimentConfig& c, Output& o) {
  fkg::BoundInputs b;
  b.alpha = num(c.run, "alpha");
  b.T = u64(c.run, "T");
  b.alphabet_size = static_cast<int>(u64(c.run, "alphabet_size"));
  b.mu_lambda_complement = num(c.run, "mu_lambda_complement");
  b.diameter = c.run["diameter"].is_string() ? kInfinite : c.run["diameter"].get<Distance>();
  const double eps = num(c.run, "epsilon");
  const double theorem = fkg::theorem_bound(b);
  const auto cb = fkg::coupling_bounds(b.alpha, b.T, eps, b.alphabet_size, b.mu_lambda_complement, b.diameter);
  o.results = {{"theorem_bound", jnum(theorem)},
               {"coupling_bounds",
                {{"base_mixing", jnum(cb.base_mixing)},
                 {"tilted_mixing", jnum(cb.tilted_mixing)},
                 {"domination", jnum(cb.domination)}}},
               {"informative", theorem < 1.0}};
  Csv csv({"quantity", "value"});
  csv.row({"theorem_bound", f(theorem)});
  csv.row({"base_mixing", f(cb.base_mixing)});
  csv.row({"tilted_mixing", f(cb.tilted_mixing)});
  csv.row({"domination", f(cb.domination)});
  o.add("bounds.csv", csv.str());
}

const std::map<std::string, std::function<void(const ExperimentConfig&, Output&)>>& dispatch() {
  static const std::map<std::string, std::function<void(const ExperimentConfig&, Output&)>> table = {
      {"gcwm-analyze", run_gcwm_analyze}, {"gcwm-fkg", run_gcwm_fkg},   {"gcwm-clt", run_gcwm_clt},
      {"ergm-analyze", run_ergm_analyze}, {"ergm-sample", run_ergm_sample}, {"ergm-fkg", run_ergm_fkg},
      {"ergm-clt", run_ergm_clt},         {"defect", run_defect},       {"coupling", run_coupling},
      {"bound-eval", run_bound_eval}};
  return table;
}

}  // namespace

std::vector<KindInfo> experiment_kinds() {
  std::vector<KindInfo> out;
  for (const auto& [name, k] : kinds()) out.push_back({name, k.description});
  return out;
}

std::vector<std::string> validate(const json& config) { return validate_impl(config, nullptr); }

json load_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError({"cannot read config " + path.string()});
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError({std::string("config is not valid JSON: ") + e.what()});
  }
}

ExperimentConfig parse_config(const json& config) {
  ExperimentConfig c;
  auto d = validate_impl(config, &c);
  if (!d.empty()) throw ValidationError(std::move(d));
  return c;
}

json to_json(const ExperimentConfig& c) {
  json j{{"kind", c.kind}, {"seed", c.seed}, {"run", c.run}};
  if (!c.model.empty()) j["model"] = c.model;
  if (c.output) j["output"] = *c.output;
  return j;
}

OutputBundle execute(const ExperimentConfig& config) {
  auto it = dispatch().find(config.kind);
  if (it == dispatch().end()) throw Rejected("unknown experiment kind " + config.kind);
  Output o;
  it->second(config, o);
  OutputBundle b;
  b.summary = {{"schema_version", kSchemaVersion},
               {"kind", config.kind},
               {"seed", config.seed},
               {"approximate", o.approximate},
               {"results", o.results}};
  b.files.push_back({"summary.json", b.summary.dump(2) + "\n"});
  for (auto& file : o.files) b.files.push_back(std::move(file));
  b.files.push_back({"config.resolved.json", to_json(config).dump(2) + "\n"});
  json manifest{{"schema_version", kSchemaVersion}, {"files", json::array()}};
  for (const auto& file : b.files)
    manifest["files"].push_back({{"name", file.name}, {"sha256", sha256_hex(file.content)}, {"bytes", file.content.size()}});
  b.files.push_back({"manifest.json", manifest.dump(2) + "\n"});
  return b;
}

void write_bundle(const OutputBundle& bundle, const fs::path& dir) {
  if (dir.empty()) throw Rejected("output directory is empty");
  fs::path staging = dir;
  staging += ".partial";
  std::error_code ec;
  fs::remove_all(staging, ec);
  try {
    fs::create_directories(staging);
    for (const auto& file : bundle.files) {
      std::ofstream out(staging / file.name, std::ios::binary);
      out << file.content;
      if (!out) throw Rejected("cannot write " + (staging / file.name).string());
    }
    if (fs::exists(dir)) {
      if (!fs::is_directory(dir)) throw Rejected("output path exists and is not a directory: " + dir.string());
      for (const auto& file : bundle.files) fs::remove(dir / file.name);
      for (const auto& entry : fs::directory_iterator(staging))
        fs::rename(entry.path(), dir / entry.path().filename());
      fs::remove_all(staging);
    } else {
      if (dir.has_parent_path()) fs::create_directories(dir.parent_path());
      fs::rename(staging, dir);
    }
  } catch (const fs::filesystem_error& e) {
    fs::remove_all(staging, ec);
    throw Rejected(std::string("output directory not writable: ") + e.what());
  } catch (...) {
    fs::remove_all(staging, ec);
    throw;
  }
}

OutputBundle run(const ExperimentConfig& config, const fs::path& dir) {
  OutputBundle b = execute(config);
  write_bundle(b, dir);
  return b;
}

}  // namespace afkg::harness
