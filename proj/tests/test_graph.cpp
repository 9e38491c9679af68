#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "oracle.hpp"

using namespace loglin;
using namespace testutil;

namespace {

undirected_graph cycle(int n) {
  undirected_graph g(n);
  for (int v = 0; v < n; ++v) g.add_edge(v, (v + 1) % n);
  return g;
}

undirected_graph complete(int n) {
  undirected_graph g(n);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) g.add_edge(u, v);
  return g;
}

varset vs(std::initializer_list<int> vals) {
  varset s;
  for (int v : vals) s |= varset::single(v);
  return s;
}

}  // namespace

TEST_CASE("decomposability of known graphs") {
  CHECK(is_decomposable(complete(4)));
  CHECK(is_decomposable(complete(1)));
  CHECK_FALSE(is_decomposable(cycle(4)));
  CHECK_FALSE(is_decomposable(cycle(5)));

  undirected_graph chordal_cycle = cycle(4);
  chordal_cycle.add_edge(0, 2);
  CHECK(is_decomposable(chordal_cycle));

  undirected_graph tree(5);
  tree.add_edge(0, 1);
  tree.add_edge(1, 2);
  tree.add_edge(1, 3);
  tree.add_edge(3, 4);
  CHECK(is_decomposable(tree));

  undirected_graph edgeless(3);
  CHECK(is_decomposable(edgeless));  // disconnected but chordal
}

TEST_CASE("decomposability agrees with simplicial-elimination oracle on all graphs up to 5 vertices") {
  for (int n = 1; n <= 5; ++n)
    for (const undirected_graph& g : oracle_all_graphs(n)) {
      CHECK(is_decomposable(g) == oracle_is_chordal(g, varset::full(n)));
      // induced variants on a couple of subsets
      for (std::uint32_t bits = 1; bits < (1u << n); bits += 3) {
        varset sub{bits};
        CHECK(induced_is_decomposable(g, sub) == oracle_is_chordal(g, sub));
        CHECK(induced_is_connected(g, sub) == oracle_is_connected(g, sub));
      }
    }
}

TEST_CASE("max_cliques matches brute force on all graphs up to 5 vertices") {
  for (int n = 1; n <= 5; ++n)
    for (const undirected_graph& g : oracle_all_graphs(n)) {
      std::vector<varset> got = max_cliques(g);
      // brute force: complete subsets maximal under inclusion
      std::vector<varset> comp;
      for (std::uint32_t bits = 1; bits < (1u << n); ++bits) {
        varset s{bits};
        if (is_complete(g, s)) comp.push_back(s);
      }
      std::vector<varset> want;
      for (varset s : comp) {
        bool maximal = true;
        for (varset t : comp)
          if (s != t && s.subset_of(t)) maximal = false;
        if (maximal) want.push_back(s);
      }
      std::sort(want.begin(), want.end(), canonical_order{});
      CHECK(got == want);
    }
}

TEST_CASE("perfect_ordering satisfies running intersection and covers the graph") {
  for (int n = 2; n <= 5; ++n)
    for (const undirected_graph& g : oracle_all_graphs(n)) {
      if (!is_decomposable(g)) {
        CHECK_THROWS_AS(perfect_ordering(g), domain_error);
        continue;
      }
      ordered_decomposition d = perfect_ordering(g);
      REQUIRE(d.components.size() == d.separators.size());
      CHECK(d.separators[0].is_empty());
      varset seen = varset::empty();
      for (std::size_t l = 0; l < d.components.size(); ++l) {
        CHECK(is_complete(g, d.components[l]));
        if (l > 0) {
          CHECK((d.components[l] & seen) == d.separators[l]);
          CHECK(is_complete(g, d.separators[l]));
          // separator contained in an earlier clique
          bool contained = d.separators[l].is_empty();
          for (std::size_t i = 0; i < l && !contained; ++i)
            contained = d.separators[l].subset_of(d.components[i]);
          CHECK(contained);
        }
        seen |= d.components[l];
      }
      CHECK(seen == varset::full(n));
      // same cliques up to reordering
      std::vector<varset> got = d.components;
      std::sort(got.begin(), got.end(), canonical_order{});
      std::vector<varset> want = max_cliques(g);
      std::sort(want.begin(), want.end(), canonical_order{});
      CHECK(got == want);
    }
}

TEST_CASE("prime_components matches the maximal-prime-subgraph oracle on all graphs up to 5 vertices") {
  for (int n = 1; n <= 5; ++n)
    for (const undirected_graph& g : oracle_all_graphs(n)) {
      ordered_decomposition d = prime_components(g);
      std::vector<varset> got = d.components;
      std::sort(got.begin(), got.end(), canonical_order{});
      CHECK(got == oracle_prime_atoms(g));

      // running-intersection shape of the ordering
      varset seen = varset::empty();
      for (std::size_t l = 0; l < d.components.size(); ++l) {
        if (l > 0) {
          CHECK((d.components[l] & seen) == d.separators[l]);
          CHECK(is_complete(g, d.separators[l]));
        }
        seen |= d.components[l];
      }
      CHECK(seen == varset::full(n));
    }
}

TEST_CASE("prime components of the named fixtures") {
  // four-cycle: a single prime component
  {
    ordered_decomposition d = prime_components(cycle(4));
    REQUIRE(d.components.size() == 1);
    CHECK(d.components[0] == varset::full(4));
  }
  // four-cycle plus pendant: cycle block and the pendant edge, separated by d
  {
    undirected_graph g = cycle(4);
    // relabel to match fx_cycle_pendant: cycle a-b-c-d plus d-e
    undirected_graph h(5);
    h.add_edge(0, 1);
    h.add_edge(1, 2);
    h.add_edge(2, 3);
    h.add_edge(0, 3);
    h.add_edge(3, 4);
    ordered_decomposition d = prime_components(h);
    REQUIRE(d.components.size() == 2);
    std::vector<varset> comps = d.components;
    std::sort(comps.begin(), comps.end(), canonical_order{});
    CHECK(comps[0] == vs({3, 4}));
    CHECK(comps[1] == vs({0, 1, 2, 3}));
    REQUIRE(d.separators.size() == 2);
    CHECK(d.separators[0].is_empty());
    CHECK(d.separators[1] == vs({3}));
  }
  // disconnected: atoms from both components, all separators empty
  {
    undirected_graph g(5);
    g.add_edge(0, 1);
    g.add_edge(3, 4);
    ordered_decomposition d = prime_components(g);
    std::vector<varset> comps = d.components;
    std::sort(comps.begin(), comps.end(), canonical_order{});
    REQUIRE(comps.size() == 3);  // {2} isolated, {0,1}, {3,4}
    CHECK(comps[0] == vs({2}));
    CHECK(comps[1] == vs({0, 1}));
    CHECK(comps[2] == vs({3, 4}));
    for (varset s : d.separators) CHECK(s.is_empty());
  }
}

TEST_CASE("connected_components partitions the vertex set") {
  undirected_graph g(6);
  g.add_edge(0, 2);
  g.add_edge(2, 4);
  g.add_edge(1, 5);
  std::vector<varset> comps = connected_components(g, g.vertices());
  std::sort(comps.begin(), comps.end(), canonical_order{});
  REQUIRE(comps.size() == 3);
  CHECK(comps[0] == vs({3}));
  CHECK(comps[1] == vs({1, 5}));
  CHECK(comps[2] == vs({0, 2, 4}));
}
