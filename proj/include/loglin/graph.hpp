#pragma once

// Undirected graphs on at most 20 vertices (adjacency bitmasks) and the
// structural algorithms needed for graphical log-linear models: chordality
// (decomposability), maximal cliques, perfect orderings with running
// intersection, and decomposition into prime components by complete minimal
// separators.

#include <algorithm>
#include <stdexcept>
#include <utility>
#include <vector>

#include "loglin/common.hpp"

namespace loglin {

struct undirected_graph {
  int n = 0;
  std::vector<varset> adj;  // adj[v] excludes v itself

  undirected_graph() = default;
  explicit undirected_graph(int n_) : n(n_), adj(n_, varset::empty()) {
    if (n_ < 0 || n_ > kMaxVariables) throw domain_error("undirected_graph: bad vertex count");
  }

  void add_edge(int u, int v) {
    if (u == v) throw domain_error("undirected_graph: self loop");
    if (u < 0 || v < 0 || u >= n || v >= n) throw domain_error("undirected_graph: vertex out of range");
    adj[u] |= varset::single(v);
    adj[v] |= varset::single(u);
  }

  bool has_edge(int u, int v) const { return adj[u].contains(v); }

  varset vertices() const { return varset::full(n); }

  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> out;
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (has_edge(u, v)) out.emplace_back(u, v);
    return out;
  }

  // Neighbors of v inside `within`.
  varset neighbors_in(int v, varset within) const { return adj[v] & within; }
};

// ---------------------------------------------------------------------------
// Basic predicates on induced subgraphs (subgraphs are just vertex masks)
// ---------------------------------------------------------------------------

inline bool is_complete(const undirected_graph& g, varset s) {
  for (std::uint32_t b = s.bits; b != 0; b &= b - 1) {
    int v = std::countr_zero(b);
    varset others = s - varset::single(v);
    if (!others.subset_of(g.adj[v])) return false;
  }
  return true;
}

inline bool induced_is_connected(const undirected_graph& g, varset s) {
  if (s.is_empty()) return true;  // convention: the empty graph is connected
  varset seen = varset::single(s.lowest());
  while (true) {
    varset grow = seen;
    for (std::uint32_t b = seen.bits; b != 0; b &= b - 1)
      grow |= g.neighbors_in(std::countr_zero(b), s);
    if (grow == seen) break;
    seen = grow;
  }
  return seen == s;
}

inline std::vector<varset> connected_components(const undirected_graph& g, varset s) {
  std::vector<varset> comps;
  varset rest = s;
  while (!rest.is_empty()) {
    varset comp = varset::single(rest.lowest());
    while (true) {
      varset grow = comp;
      for (std::uint32_t b = comp.bits; b != 0; b &= b - 1)
        grow |= g.neighbors_in(std::countr_zero(b), rest);
      if (grow == comp) break;
      comp = grow;
    }
    comps.push_back(comp);
    rest = rest - comp;
  }
  return comps;
}

// ---------------------------------------------------------------------------
// Chordality via maximum cardinality search
// ---------------------------------------------------------------------------

// Visit order of maximum cardinality search restricted to `within`; ties are
// broken toward the lowest vertex index, so the result is deterministic.
inline std::vector<int> mcs_order(const undirected_graph& g, varset within) {
  std::vector<int> order;
  order.reserve(within.size());
  varset numbered = varset::empty();
  varset remaining = within;
  while (!remaining.is_empty()) {
    int best = -1, best_count = -1;
    for (std::uint32_t b = remaining.bits; b != 0; b &= b - 1) {
      int v = std::countr_zero(b);
      int c = (g.adj[v] & numbered).size();
      if (c > best_count) {
        best_count = c;
        best = v;
      }
    }
    order.push_back(best);
    numbered |= varset::single(best);
    remaining = remaining - varset::single(best);
  }
  return order;
}

// True when eliminating the vertices in the given order always leaves each
// vertex's remaining neighborhood complete (perfect elimination ordering).
inline bool is_perfect_elimination_ordering(const undirected_graph& g, const std::vector<int>& order) {
  varset remaining = varset::empty();
  for (int v : order) remaining |= varset::single(v);
  for (int v : order) {
    remaining = remaining - varset::single(v);
    if (!is_complete(g, g.adj[v] & remaining)) return false;
  }
  return true;
}

inline bool induced_is_decomposable(const undirected_graph& g, varset s) {
  std::vector<int> visit = mcs_order(g, s);
  std::reverse(visit.begin(), visit.end());
  return is_perfect_elimination_ordering(g, visit);
}

inline bool is_decomposable(const undirected_graph& g) {
  return induced_is_decomposable(g, g.vertices());
}

// ---------------------------------------------------------------------------
// Maximal cliques (Bron-Kerbosch with pivoting), canonical order
// ---------------------------------------------------------------------------

namespace detail {
inline void bron_kerbosch(const undirected_graph& g, varset r, varset p, varset x,
                          std::vector<varset>& out) {
  if (p.is_empty() && x.is_empty()) {
    out.push_back(r);
    return;
  }
  varset px = p | x;
  int pivot = px.lowest();
  int best = -1;
  for (std::uint32_t b = px.bits; b != 0; b &= b - 1) {
    int u = std::countr_zero(b);
    int c = (g.adj[u] & p).size();
    if (c > best) {
      best = c;
      pivot = u;
    }
  }
  varset candidates = p - g.adj[pivot];
  for (std::uint32_t b = candidates.bits; b != 0; b &= b - 1) {
    int v = std::countr_zero(b);
    varset vs = varset::single(v);
    bron_kerbosch(g, r | vs, p & g.adj[v], x & g.adj[v], out);
    p = p - vs;
    x = x | vs;
  }
}
}  // namespace detail

inline std::vector<varset> max_cliques_in(const undirected_graph& g, varset within) {
  std::vector<varset> out;
  if (within.is_empty()) return out;
  detail::bron_kerbosch(g, varset::empty(), within, varset::empty(), out);
  std::sort(out.begin(), out.end(), canonical_order{});
  return out;
}

inline std::vector<varset> max_cliques(const undirected_graph& g) {
  return max_cliques_in(g, g.vertices());
}

// All nonempty complete vertex subsets, canonical order.
inline std::vector<varset> complete_subsets(const undirected_graph& g) {
  std::vector<varset> out;
  std::vector<bool> seen(std::size_t{1} << g.n, false);
  for (varset clique : max_cliques(g)) {
    for_each_subset(clique, [&](varset s) {
      if (!s.is_empty() && !seen[s.bits]) {
        seen[s.bits] = true;
        out.push_back(s);
      }
    });
  }
  std::sort(out.begin(), out.end(), canonical_order{});
  return out;
}

// ---------------------------------------------------------------------------
// Perfect ordering of cliques (running intersection)
// ---------------------------------------------------------------------------

// An ordered sequence of vertex sets C_1..C_k with separators
// S_l = C_l intersect (C_1 u ... u C_{l-1}); separators[0] is always empty.
struct ordered_decomposition {
  std::vector<varset> components;
  std::vector<varset> separators;  // same length; entry 0 is the empty set
};

namespace detail {
// Computes separators for a given component order and checks running
// intersection: each S_l must be complete and contained in an earlier
// component.  Returns false if the order is not perfect.
inline bool running_intersection(const undirected_graph& g, ordered_decomposition& d) {
  d.separators.assign(d.components.size(), varset::empty());
  varset seen = varset::empty();
  for (std::size_t l = 0; l < d.components.size(); ++l) {
    varset sep = d.components[l] & seen;
    d.separators[l] = sep;
    if (l > 0) {
      if (!is_complete(g, sep)) return false;
      bool contained = false;
      for (std::size_t j = 0; j < l && !contained; ++j)
        contained = sep.subset_of(d.components[j]);
      if (!contained) return false;
    }
    seen |= d.components[l];
  }
  return true;
}
}  // namespace detail

// Perfect ordering of the maximal cliques of a decomposable graph.  Cliques
// are ordered by the maximum cardinality search rank of their last-visited
// vertex, which realizes running intersection.  Throws if the graph is not
// decomposable.  Connected components are handled independently, giving
// empty separators between them.
inline ordered_decomposition perfect_ordering(const undirected_graph& g) {
  if (!is_decomposable(g)) throw domain_error("perfect_ordering: graph is not decomposable");
  std::vector<int> visit = mcs_order(g, g.vertices());
  std::vector<int> rank(g.n, 0);
  for (std::size_t i = 0; i < visit.size(); ++i) rank[visit[i]] = (int)i;

  std::vector<varset> cliques = max_cliques(g);
  std::stable_sort(cliques.begin(), cliques.end(), [&](varset a, varset b) {
    int ra = 0, rb = 0;
    for (int v : a.members()) ra = std::max(ra, rank[v]);
    for (int v : b.members()) rb = std::max(rb, rank[v]);
    return ra < rb;
  });

  ordered_decomposition d;
  d.components = std::move(cliques);
  if (!detail::running_intersection(g, d))
    throw std::logic_error("perfect_ordering: running intersection violated (internal)");
  return d;
}

// ---------------------------------------------------------------------------
// Prime components (decomposition by complete minimal separators)
// ---------------------------------------------------------------------------

namespace detail {

// Searches for a complete subset S of `within` such that at least two
// components C of within \ S satisfy N(C) = S (a complete minimal
// separator).  Returns the empty set when none exists (the subgraph is
// prime).  Enumeration order is deterministic in the variable order.
inline varset find_complete_minimal_separator(const undirected_graph& g, varset within) {
  std::vector<varset> candidates;
  for_each_subset(within, [&](varset s) {
    if (!s.is_empty() && s.size() <= within.size() - 2) candidates.push_back(s);
  });
  std::sort(candidates.begin(), candidates.end(), canonical_order{});
  for (varset s : candidates) {
    if (!is_complete(g, s)) continue;
    int full = 0;
    for (varset comp : connected_components(g, within - s)) {
      varset nb = varset::empty();
      for (int v : comp.members()) nb |= g.neighbors_in(v, within);
      if ((nb & s) == s) ++full;
    }
    if (full >= 2) return s;
  }
  return varset::empty();
}

inline void collect_atoms(const undirected_graph& g, varset within, std::vector<varset>& atoms) {
  varset sep = find_complete_minimal_separator(g, within);
  if (sep.is_empty()) {
    if (std::find(atoms.begin(), atoms.end(), within) == atoms.end()) atoms.push_back(within);
    return;
  }
  for (varset comp : connected_components(g, within - sep)) collect_atoms(g, comp | sep, atoms);
}

}  // namespace detail

// Prime components (maximal subgraphs with no complete separator) in a
// perfect enumeration: every separator is complete and contained in an
// earlier component.  Components of a disconnected graph are concatenated,
// giving empty separators at the junctions.
inline ordered_decomposition prime_components(const undirected_graph& g) {
  std::vector<varset> atoms;
  for (varset comp : connected_components(g, g.vertices()))
    detail::collect_atoms(g, comp, atoms);
  std::sort(atoms.begin(), atoms.end(), canonical_order{});

  // Maximum-weight spanning forest on pairwise intersection sizes; a preorder
  // traversal of each tree yields running intersection (junction property of
  // the prime-component decomposition).
  const std::size_t k = atoms.size();
  std::vector<bool> placed(k, false);
  ordered_decomposition d;
  d.components.reserve(k);
  while (d.components.size() < k) {
    std::size_t root = 0;
    while (placed[root]) ++root;
    placed[root] = true;
    d.components.push_back(atoms[root]);
    // grow this tree greedily by maximum intersection with what is placed
    while (true) {
      int best = -1;
      std::size_t best_j = 0;
      for (std::size_t j = 0; j < k; ++j) {
        if (placed[j]) continue;
        int w = -1;
        for (varset c : d.components) w = std::max(w, (atoms[j] & c).size());
        if (w > best) {
          best = w;
          best_j = j;
        }
      }
      if (best <= 0) break;  // next tree (or done)
      placed[best_j] = true;
      d.components.push_back(atoms[best_j]);
    }
  }
  if (!detail::running_intersection(g, d))
    throw std::logic_error("prime_components: enumeration is not perfect (internal)");
  return d;
}

}  // namespace loglin
