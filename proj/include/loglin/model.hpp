#pragma once

// Hierarchical log-linear models: a variable space plus a downward-closed
// generating class D of nonempty interaction sets, with the index layout of
// the free log-linear parameters.
//
// The free parameter vector stacks, for every D in the generating class (in
// canonical order), one coordinate per star cell i_D in I_D^* (lexicographic
// order).  The grand-mean term is not free: it is the negative log-partition.

#include <cstdint>
#include <optional>
#include <vector>

#include "loglin/common.hpp"
#include "loglin/graph.hpp"
#include "loglin/space.hpp"

namespace loglin {

enum class model_kind { saturated, graphical, hierarchical };

inline const char* to_string(model_kind k) {
  switch (k) {
    case model_kind::saturated: return "saturated";
    case model_kind::graphical: return "graphical";
    case model_kind::hierarchical: return "hierarchical";
  }
  return "?";
}

// Downward closure of a set of generators, nonempty subsets only, canonical
// order.  Throws if a generator is empty.
inline std::vector<varset> hierarchical_closure(const std::vector<varset>& generators) {
  std::vector<bool> seen(std::size_t{1} << kMaxVariables, false);
  std::vector<varset> out;
  for (varset g : generators) {
    if (g.is_empty()) throw domain_error("hierarchical_closure: empty generator");
    for_each_subset(g, [&](varset s) {
      if (!s.is_empty() && !seen[s.bits]) {
        seen[s.bits] = true;
        out.push_back(s);
      }
    });
  }
  std::sort(out.begin(), out.end(), canonical_order{});
  return out;
}

struct model {
  variable_space space;
  std::vector<varset> interactions;  // the generating class D, canonical order
  model_kind kind = model_kind::hierarchical;
  std::optional<undirected_graph> graph;  // present iff kind != hierarchical

  // Index layout of the free parameters.
  std::vector<scope_codec> codecs;      // aligned with interactions
  std::vector<std::size_t> offsets;     // aligned with interactions
  std::size_t theta_dim = 0;
  std::vector<std::int32_t> set_pos;    // bitmask -> position in interactions, -1 if absent

  int num_sets() const { return (int)interactions.size(); }

  bool in_family(varset s) const {
    return !s.is_empty() && set_pos[s.bits] >= 0;
  }

  int set_index(varset s) const {
    std::int32_t p = set_pos[s.bits];
    if (p < 0) throw domain_error("interaction set not in the model");
    return p;
  }

  std::size_t theta_index(int set_idx, const cell& star_cell) const {
    return offsets[set_idx] + codecs[set_idx].encode_star(star_cell);
  }

  // Maximal elements of the generating class, canonical order.
  std::vector<varset> generators() const {
    std::vector<varset> out;
    for (varset d : interactions) {
      bool maximal = true;
      for (varset e : interactions)
        if (d != e && d.subset_of(e)) {
          maximal = false;
          break;
        }
      if (maximal) out.push_back(d);
    }
    return out;
  }

  // The pairwise-dependence graph: u ~ v iff {u,v} is in the family.
  undirected_graph dependence_graph() const {
    undirected_graph g(space.num_variables());
    for (int u = 0; u < g.n; ++u)
      for (int v = u + 1; v < g.n; ++v)
        if (in_family(varset::single(u) | varset::single(v))) g.add_edge(u, v);
    return g;
  }
};

namespace detail {

inline void finish_model(model& m) {
  m.set_pos.assign(std::size_t{1} << m.space.num_variables(), -1);
  m.offsets.clear();
  m.codecs.clear();
  m.theta_dim = 0;
  for (std::size_t i = 0; i < m.interactions.size(); ++i) {
    varset d = m.interactions[i];
    if (d.is_empty()) throw domain_error("model: empty interaction set");
    if (!d.subset_of(m.space.all_vars()))
      throw domain_error("model: interaction set references unknown variable");
    m.set_pos[d.bits] = (std::int32_t)i;
    m.codecs.emplace_back(m.space, d);
    m.offsets.push_back(m.theta_dim);
    m.theta_dim += m.codecs.back().num_star_cells();
  }
  // downward closure check
  for (varset d : m.interactions)
    for_each_subset(d, [&](varset s) {
      if (!s.is_empty() && m.set_pos[s.bits] < 0)
        throw domain_error("model: generating class is not downward closed");
    });
}

}  // namespace detail

// Graphical model: the generating class is every nonempty complete subset.
inline model model_from_graph(variable_space space, undirected_graph graph) {
  if (graph.n != space.num_variables())
    throw domain_error("model_from_graph: graph size does not match variable count");
  model m;
  m.space = std::move(space);
  m.interactions = complete_subsets(graph);
  bool complete = is_complete(graph, graph.vertices());
  m.kind = complete ? model_kind::saturated : model_kind::graphical;
  m.graph = std::move(graph);
  detail::finish_model(m);
  return m;
}

inline model saturated_model(variable_space space) {
  int n = space.num_variables();
  undirected_graph g(n);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) g.add_edge(u, v);
  return model_from_graph(std::move(space), std::move(g));
}

// Hierarchical model from generators; detects when the class is graphical
// (equals the complete subsets of its own dependence graph) or saturated.
inline model model_from_generators(variable_space space, const std::vector<varset>& generators) {
  model m;
  m.space = std::move(space);
  m.interactions = hierarchical_closure(generators);
  m.kind = model_kind::hierarchical;
  detail::finish_model(m);

  undirected_graph dep = m.dependence_graph();
  std::vector<varset> graphical_family = complete_subsets(dep);
  if (graphical_family == m.interactions) {
    m.kind = is_complete(dep, dep.vertices()) ? model_kind::saturated : model_kind::graphical;
    m.graph = std::move(dep);
  }
  return m;
}

}  // namespace loglin
