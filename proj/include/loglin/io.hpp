#pragma once

// File formats.
//
// Model (JSON):   {"variables":[{"name":"a","levels":2},...],
//                  "graph":{"edges":[["a","b"],...]}}       (graphical)
//              or {"variables":[...], "generators":[["a","b"],...]}
// Table (CSV):    one 0-based integer column per variable plus `count`.
// Hyper (JSON):   {"alpha":..., "s":[{"set":[...],"cell":{...},"value":...},...]}
// Vectors (JSON): {"kind":"theta"|"free_prob", "model_hash":"...",
//                  "values":[...]} (+ "p_base" for free_prob), canonical order.
//
// The model hash is a 64-bit FNV-1a digest of the canonicalized model JSON
// (sorted keys, no whitespace); vector and hyper files embed it so indices
// cannot silently cross models.

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "loglin/common.hpp"
#include "loglin/evidence.hpp"
#include "loglin/model.hpp"
#include "loglin/param.hpp"
#include "loglin/prior.hpp"

namespace loglin {

using json = nlohmann::json;  // keys kept sorted, which canonicalization relies on

// ---------------------------------------------------------------------------
// Small helpers
// ---------------------------------------------------------------------------

inline std::vector<std::string> varset_names(const variable_space& space, varset s) {
  std::vector<std::string> out;
  for (int v : s.members()) out.push_back(space.names[v]);
  return out;
}

inline varset varset_from_names(const variable_space& space, const std::vector<std::string>& names) {
  varset s;
  for (const std::string& n : names) {
    int v = space.index_of(n);
    if (s.contains(v)) throw parse_error("duplicate variable '" + n + "' in a set");
    s |= varset::single(v);
  }
  return s;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw parse_error("cannot write file: " + path);
  out << content;
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

inline json model_to_json(const model& m) {
  json j;
  json vars = json::array();
  for (int k = 0; k < m.space.num_variables(); ++k)
    vars.push_back({{"name", m.space.names[k]}, {"levels", m.space.levels[k]}});
  j["variables"] = vars;
  if (m.graph) {
    json edges = json::array();
    for (auto [u, v] : m.graph->edges())
      edges.push_back(json::array({m.space.names[u], m.space.names[v]}));
    j["graph"] = {{"edges", edges}};
  } else {
    json gens = json::array();
    for (varset g : m.generators()) gens.push_back(varset_names(m.space, g));
    j["generators"] = gens;
  }
  return j;
}

inline model model_from_json(const json& j) {
  try {
    std::vector<std::string> names;
    std::vector<int> levels;
    for (const json& v : j.at("variables")) {
      names.push_back(v.at("name").get<std::string>());
      levels.push_back(v.at("levels").get<int>());
    }
    if (names.empty()) throw parse_error("model file: 'variables' must be a non-empty array");
    variable_space space(names, levels);
    if (j.contains("graph") && j.contains("generators"))
      throw parse_error("model file has both 'graph' and 'generators'");
    if (j.contains("graph")) {
      undirected_graph g(space.num_variables());
      for (const json& e : j.at("graph").at("edges")) {
        if (!e.is_array() || e.size() != 2) throw parse_error("edge must be a pair");
        g.add_edge(space.index_of(e[0].get<std::string>()),
                   space.index_of(e[1].get<std::string>()));
      }
      return model_from_graph(std::move(space), std::move(g));
    }
    if (j.contains("generators")) {
      std::vector<varset> gens;
      for (const json& g : j.at("generators"))
        gens.push_back(varset_from_names(space, g.get<std::vector<std::string>>()));
      return model_from_generators(std::move(space), gens);
    }
    throw parse_error("model file needs 'graph' or 'generators'");
  } catch (const json::exception& e) {
    throw parse_error(std::string("malformed model JSON: ") + e.what());
  }
}

inline model load_model(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw parse_error(std::string("malformed JSON in ") + path + ": " + e.what());
  }
  return model_from_json(j);
}

// 64-bit FNV-1a digest as 16 hex digits.
inline std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= (std::uint64_t)c;
    h *= 0x100000001b3ull;
  }
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

// Digest of the canonicalized model JSON (sorted keys, no whitespace).
inline std::string model_hash(const model& m) { return fnv1a_hex(model_to_json(m).dump()); }

// ---------------------------------------------------------------------------
// Tables (CSV)
// ---------------------------------------------------------------------------

inline contingency_table table_from_csv(const variable_space& space, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw parse_error("empty table file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string field;
    while (std::getline(hs, field, ',')) header.push_back(field);
  }
  const int nv = space.num_variables();
  std::vector<int> var_col(nv, -1);
  int count_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "count") {
      count_col = (int)c;
    } else {
      int v = space.index_of(header[c]);  // throws on unknown name
      var_col[v] = (int)c;
    }
  }
  if (count_col < 0) throw parse_error("table file lacks a 'count' column");
  for (int v = 0; v < nv; ++v)
    if (var_col[v] < 0) throw parse_error("table file lacks column '" + space.names[v] + "'");

  contingency_table table(space);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != header.size())
      throw parse_error("table row " + std::to_string(line_no) + " has wrong field count");
    try {
      cell c(nv);
      for (int v = 0; v < nv; ++v) c[v] = std::stoi(fields[var_col[v]]);
      table.at(c) += std::stod(fields[count_col]);
    } catch (const domain_error&) {
      throw;
    } catch (const std::exception&) {
      throw parse_error("table row " + std::to_string(line_no) + " is malformed");
    }
  }
  return table;
}

inline std::string table_to_csv(const contingency_table& table) {
  std::ostringstream out;
  for (const std::string& n : table.space.names) out << n << ',';
  out << "count\n";
  const std::size_t nc = table.space.num_cells();
  for (std::size_t i = 0; i < nc; ++i) {
    cell c = table.space.decode(i);
    for (int v : c) out << v << ',';
    json num = table.values[i];  // shortest round-trip double formatting
    out << num.dump() << '\n';
  }
  return out.str();
}

inline contingency_table load_table(const variable_space& space, const std::string& path) {
  return table_from_csv(space, read_text_file(path));
}

// ---------------------------------------------------------------------------
// Hyperparameters
// ---------------------------------------------------------------------------

inline json hyper_to_json(const model& m, const hyperparameters& hyper) {
  json entries = json::array();
  for (int si = 0; si < m.num_sets(); ++si) {
    const scope_codec& codec = m.codecs[si];
    for (std::size_t sc = 0; sc < codec.num_star_cells(); ++sc) {
      cell star = codec.decode_star(sc);
      json cell_obj;
      for (int k = 0; k < codec.arity(); ++k) cell_obj[m.space.names[codec.vars[k]]] = star[k];
      entries.push_back({{"set", varset_names(m.space, m.interactions[si])},
                         {"cell", cell_obj},
                         {"value", hyper.s[m.offsets[si] + sc]}});
    }
  }
  return json{{"alpha", hyper.alpha}, {"s", entries}, {"model_hash", model_hash(m)}};
}

inline hyperparameters hyper_from_json(const model& m, const json& j) {
  try {
    if (j.contains("model_hash") && j.at("model_hash").get<std::string>() != model_hash(m))
      throw parse_error("hyperparameter file was written for a different model");
    hyperparameters h;
    h.alpha = j.at("alpha").get<double>();
    h.s.assign(m.theta_dim, 0.0);
    std::vector<bool> seen(m.theta_dim, false);
    for (const json& e : j.at("s")) {
      varset d = varset_from_names(m.space, e.at("set").get<std::vector<std::string>>());
      if (!m.in_family(d)) throw parse_error("hyperparameter entry names a set outside the model");
      int si = m.set_index(d);
      const scope_codec& codec = m.codecs[si];
      cell star(codec.arity());
      for (int k = 0; k < codec.arity(); ++k)
        star[k] = e.at("cell").at(m.space.names[codec.vars[k]]).get<int>();
      std::size_t idx = m.offsets[si] + codec.encode_star(star);
      if (seen[idx]) throw parse_error("duplicate hyperparameter entry");
      seen[idx] = true;
      h.s[idx] = e.at("value").get<double>();
    }
    for (bool b : seen)
      if (!b) throw parse_error("hyperparameter file is missing entries");
    return h;
  } catch (const json::exception& e) {
    throw parse_error(std::string("malformed hyperparameter JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Theta and free-probability vectors
// ---------------------------------------------------------------------------

inline json theta_to_json(const model& m, const theta_vector& theta) {
  return json{{"kind", "theta"}, {"model_hash", model_hash(m)}, {"values", theta.v}};
}

inline json free_prob_to_json(const model& m, const free_prob_vector& fp) {
  return json{{"kind", "free_prob"},
              {"model_hash", model_hash(m)},
              {"p_base", fp.p_base},
              {"values", fp.v}};
}

namespace detail {
inline void check_vector_file(const model& m, const json& j, const char* kind) {
  if (j.at("kind").get<std::string>() != kind)
    throw parse_error(std::string("expected a ") + kind + " file");
  if (j.at("model_hash").get<std::string>() != model_hash(m))
    throw parse_error("vector file was written for a different model");
  if (j.at("values").size() != m.theta_dim)
    throw parse_error("vector file has the wrong dimension");
}
}  // namespace detail

inline theta_vector theta_from_json(const model& m, const json& j) {
  try {
    detail::check_vector_file(m, j, "theta");
    theta_vector t;
    t.v = j.at("values").get<std::vector<double>>();
    return t;
  } catch (const json::exception& e) {
    throw parse_error(std::string("malformed theta JSON: ") + e.what());
  }
}

inline free_prob_vector free_prob_from_json(const model& m, const json& j) {
  try {
    detail::check_vector_file(m, j, "free_prob");
    free_prob_vector fp;
    fp.p_base = j.at("p_base").get<double>();
    fp.v = j.at("values").get<std::vector<double>>();
    return fp;
  } catch (const json::exception& e) {
    throw parse_error(std::string("malformed free_prob JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Evidence results
// ---------------------------------------------------------------------------

inline json evidence_to_json(const evidence_result& r) {
  json j{{"log_i", r.log_i}, {"method", r.method}};
  if (r.std_error) j["std_error"] = *r.std_error;
  if (r.ess) j["ess"] = *r.ess;
  if (r.method == "importance" || r.method == "component_assembly") j["seed"] = r.seed;
  if (r.unstable) j["unstable"] = true;
  return j;
}

}  // namespace loglin
