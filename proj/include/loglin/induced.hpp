#pragma once

// The prior induced on cell probabilities by the conjugate prior on theta.
//
// Changing variables theta -> free probabilities brings in a Jacobian
//   |dp/dtheta| = (p_empty * prod over free cells p) * K,
// where the correction K collects coefficients a(j_H) = (column sum of the
// signed incidence matrix F) - 1 over the subsets H whose induced subgraph
// is nondecomposable or disconnected.  The induced density is then a product
// of powers of the free cells (Dirichlet-like exponents alpha(i_D), with
// alpha_empty on the base cell) divided by K.

#include <cmath>
#include <cstdint>
#include <tuple>
#include <vector>

#include "loglin/common.hpp"
#include "loglin/model.hpp"
#include "loglin/param.hpp"
#include "loglin/prior.hpp"

namespace loglin {

// ---------------------------------------------------------------------------
// F matrix
// ---------------------------------------------------------------------------

// Signed incidence of model interaction sets against all subsets:
// F[(C,i_C),(H,j_H)] = (-1)^{|C|-1} when C is in the family, C subset H and
// j_H restricts to i_C on C; zero otherwise.  Rows follow the model's theta
// layout; columns enumerate every subset H of V (the empty set first) in
// canonical order with the star cells of H.
struct f_matrix {
  std::size_t num_rows = 0;
  std::vector<varset> col_sets;             // canonical order, starts with {}
  std::vector<std::size_t> col_offsets;     // aligned with col_sets
  std::size_t num_cols = 0;
  // (row, col, sign) triples, sorted by column then row
  std::vector<std::tuple<std::size_t, std::size_t, int>> entries;
};

inline f_matrix build_f_matrix(const model& m) {
  f_matrix f;
  f.num_rows = m.theta_dim;
  f.col_sets = subsets_canonical(m.space.all_vars());

  std::size_t cols = 0;
  for (varset h : f.col_sets) {
    f.col_offsets.push_back(cols);
    cols += scope_codec(m.space, h).num_star_cells();
    if (cols > (std::size_t{1} << 22))
      throw domain_error("build_f_matrix: model too large to materialize F");
  }
  f.num_cols = cols;

  for (std::size_t hi = 0; hi < f.col_sets.size(); ++hi) {
    varset h = f.col_sets[hi];
    scope_codec hcodec(m.space, h);
    const std::size_t nstar = hcodec.num_star_cells();
    for (std::size_t jc = 0; jc < nstar; ++jc) {
      cell j = hcodec.decode_star(jc);
      std::size_t col = f.col_offsets[hi] + jc;
      for_each_subset(h, [&](varset c) {
        if (c.is_empty() || !m.in_family(c)) return;
        int ci = m.set_index(c);
        const scope_codec& ccodec = m.codecs[ci];
        cell sub(ccodec.arity());
        for (int k = 0; k < ccodec.arity(); ++k) {
          int pos = 0;
          while (hcodec.vars[pos] != ccodec.vars[k]) ++pos;
          sub[k] = j[pos];
        }
        int sign = (c.size() % 2 == 1) ? 1 : -1;
        f.entries.emplace_back(m.offsets[ci] + ccodec.encode_star(sub), col, sign);
      });
    }
  }
  std::sort(f.entries.begin(), f.entries.end(),
            [](const auto& a, const auto& b) {
              return std::tie(std::get<1>(a), std::get<0>(a)) <
                     std::tie(std::get<1>(b), std::get<0>(b));
            });
  return f;
}

// ---------------------------------------------------------------------------
// Column sums and the U family
// ---------------------------------------------------------------------------

// Column sum of F over any column with set H; independent of the cell j_H,
// since membership of C only constrains the support:
//   colsum(H) = sum_{C in family, C subset H} (-1)^{|C|-1}.
inline int f_column_sum(const model& m, varset h) {
  int sum = 0;
  for_each_subset(h, [&](varset c) {
    if (c.is_empty() || !m.in_family(c)) return;
    sum += (c.size() % 2 == 1) ? 1 : -1;
  });
  return sum;
}

// a(j_H) = colsum(H) - 1; the empty set gets a = -1.
inline int coefficient_a(const model& m, varset h) { return f_column_sum(m, h) - 1; }

// U = subsets H whose induced subgraph is nondecomposable or disconnected,
// canonical order (the empty set is excluded here; U_0 adds it back).
inline std::vector<varset> u_family(const model& m) {
  if (!m.graph) throw domain_error("u_family: model has no graph");
  const undirected_graph& g = *m.graph;
  std::vector<varset> out;
  for_each_subset(m.space.all_vars(), [&](varset h) {
    if (h.is_empty()) return;
    if (!induced_is_decomposable(g, h) || !induced_is_connected(g, h)) out.push_back(h);
  });
  std::sort(out.begin(), out.end(), canonical_order{});
  return out;
}

// Subsets where the column-sum value and the U-characterization disagree
// (possible only beyond the prime graphs the equivalence is proved for);
// callers surface these as diagnostics.
inline std::vector<varset> u_family_anomalies(const model& m) {
  std::vector<varset> out;
  if (!m.graph) return out;
  const undirected_graph& g = *m.graph;
  for_each_subset(m.space.all_vars(), [&](varset h) {
    if (h.is_empty()) return;
    bool in_u = !induced_is_decomposable(g, h) || !induced_is_connected(g, h);
    if ((coefficient_a(m, h) == 0) != !in_u) out.push_back(h);
  });
  std::sort(out.begin(), out.end(), canonical_order{});
  return out;
}

// ---------------------------------------------------------------------------
// Jacobian of the theta -> p change of variables
// ---------------------------------------------------------------------------

struct jacobian_result {
  // The correction K in the star-cell coordinates.  K is identically 1 only
  // when U is empty (complete graphs); any missing edge makes some induced
  // subgraph disconnected, so even decomposable models have a nontrivial K
  // that can reach zero (the change of variables folds there) or below.
  double k_factor = 0.0;
  double log_cell_product = 0.0; // log(p_empty * prod over free cells p)
  bool k_positive() const { return k_factor > 0.0; }
  double determinant() const { return std::exp(log_cell_product) * k_factor; }
  double log_determinant() const {
    if (!k_positive())
      throw domain_error("jacobian: K factor is nonpositive at this point");
    return log_cell_product + std::log(k_factor);
  }
};

namespace detail {

// K = 1 - (1/p_empty) * sum_H sum_{j_H} a(j_H) p(j_H, j*), where H ranges
// over the subsets kept by `keep`.  Terms with a = 0 vanish and are skipped.
template <typename Keep>
double k_factor_sum(const model& m, const full_prob_table& table, Keep&& keep) {
  double p_empty = table.at(m.space.base_cell());
  double acc = 0.0;
  for_each_subset(m.space.all_vars(), [&](varset h) {
    if (h.is_empty()) return;
    int a = coefficient_a(m, h);
    if (a == 0 || !keep(h)) return;
    scope_codec codec(m.space, h);
    double block = 0.0;
    const std::size_t nstar = codec.num_star_cells();
    for (std::size_t jc = 0; jc < nstar; ++jc)
      block += table.at(codec.embed(codec.decode_star(jc), m.space.num_variables()));
    acc += (double)a * block;
  });
  return 1.0 - acc / p_empty;
}

inline double log_free_cell_product(const model& m, const free_prob_vector& fp) {
  if (!(fp.p_base > 0.0)) throw domain_error("jacobian: base-cell probability must be positive");
  double acc = std::log(fp.p_base);
  for (double v : fp.v) {
    if (!(v > 0.0)) throw domain_error("jacobian: free-cell probability must be positive");
    acc += std::log(v);
  }
  return acc;
}

}  // namespace detail

// Jacobian for a graphical model: the K sum runs over the U family (graph
// predicates), with the column-sum coefficients supplying the weights.
inline jacobian_result jacobian_factor_graphical(const model& m, const free_prob_vector& fp) {
  if (!m.graph) throw domain_error("jacobian_factor_graphical: model has no graph");
  const undirected_graph& g = *m.graph;
  full_prob_table table = complete_cells(m, fp);
  jacobian_result r;
  r.log_cell_product = detail::log_free_cell_product(m, fp);
  r.k_factor = detail::k_factor_sum(m, table, [&](varset h) {
    return !induced_is_decomposable(g, h) || !induced_is_connected(g, h);
  });
  return r;
}

// Jacobian for an arbitrary hierarchical model: the K sum runs over every
// subset with a nonzero coefficient.  On graphical models this agrees with
// the graphical route exactly (decomposable-connected subsets always have
// column sum 1).
inline jacobian_result jacobian_factor_hierarchical(const model& m, const free_prob_vector& fp) {
  full_prob_table table = complete_cells(m, fp);
  jacobian_result r;
  r.log_cell_product = detail::log_free_cell_product(m, fp);
  r.k_factor = detail::k_factor_sum(m, table, [](varset) { return true; });
  return r;
}

inline jacobian_result jacobian_factor(const model& m, const free_prob_vector& fp) {
  return m.graph ? jacobian_factor_graphical(m, fp) : jacobian_factor_hierarchical(m, fp);
}

// ---------------------------------------------------------------------------
// Induced exponents and density
// ---------------------------------------------------------------------------

// Exponents of the induced density: for each free cell,
//   alpha(i_D) = sum over family supersets F of D of
//                sum_{j_F restricting to i_D} (-1)^{|F \ D|} s(j_F),
// and on the base cell alpha_empty = alpha + same sum taken at D = {}.
struct induced_exponents_result {
  std::vector<double> alpha_cell;  // theta layout
  double alpha_empty = 0.0;
  std::vector<varset> u0;          // U family plus the empty set
};

inline induced_exponents_result induced_exponents(const model& m, const hyperparameters& hyper) {
  if (hyper.s.size() != m.theta_dim) throw domain_error("induced_exponents: dimension mismatch");
  induced_exponents_result out;
  out.alpha_cell.assign(m.theta_dim, 0.0);
  out.alpha_empty = hyper.alpha;
  for (int fi = 0; fi < m.num_sets(); ++fi) {
    varset fset = m.interactions[fi];
    const scope_codec& fcodec = m.codecs[fi];
    const std::size_t nstar = fcodec.num_star_cells();
    for (std::size_t jc = 0; jc < nstar; ++jc) {
      cell j = fcodec.decode_star(jc);
      double sv = hyper.s[m.offsets[fi] + jc];
      for_each_subset(fset, [&](varset d) {
        int sign = ((fset.size() - d.size()) % 2 == 0) ? 1 : -1;
        if (d.is_empty()) {
          out.alpha_empty += sign * sv;
          return;
        }
        // family is downward closed, so d is always present
        int di = m.set_index(d);
        const scope_codec& dcodec = m.codecs[di];
        cell sub(dcodec.arity());
        for (int k = 0; k < dcodec.arity(); ++k) {
          int pos = 0;
          while (fcodec.vars[pos] != dcodec.vars[k]) ++pos;
          sub[k] = j[pos];
        }
        out.alpha_cell[m.offsets[di] + dcodec.encode_star(sub)] += sign * sv;
      });
    }
  }
  if (m.graph) {
    out.u0 = u_family(m);
  } else {
    for_each_subset(m.space.all_vars(), [&](varset h) {
      if (!h.is_empty() && coefficient_a(m, h) != 0) out.u0.push_back(h);
    });
    std::sort(out.u0.begin(), out.u0.end(), canonical_order{});
  }
  out.u0.insert(out.u0.begin(), varset::empty());
  return out;
}

// Inverse of the exponent map (plain zeta sum over family supersets):
//   s(i_D)  = sum over family supersets F of D of
//             sum_{j_F restricting to i_D} alpha(j_F),
//   alpha   = alpha_empty + sum of all alpha(j_F).
inline hyperparameters hyper_from_induced_exponents(const model& m,
                                                    const induced_exponents_result& exps) {
  if (exps.alpha_cell.size() != m.theta_dim)
    throw domain_error("hyper_from_induced_exponents: dimension mismatch");
  hyperparameters h;
  h.s.assign(m.theta_dim, 0.0);
  h.alpha = exps.alpha_empty;
  for (int fi = 0; fi < m.num_sets(); ++fi) {
    varset fset = m.interactions[fi];
    const scope_codec& fcodec = m.codecs[fi];
    const std::size_t nstar = fcodec.num_star_cells();
    for (std::size_t jc = 0; jc < nstar; ++jc) {
      cell j = fcodec.decode_star(jc);
      double av = exps.alpha_cell[m.offsets[fi] + jc];
      h.alpha += av;
      for_each_subset(fset, [&](varset d) {
        if (d.is_empty()) return;
        int di = m.set_index(d);
        const scope_codec& dcodec = m.codecs[di];
        cell sub(dcodec.arity());
        for (int k = 0; k < dcodec.arity(); ++k) {
          int pos = 0;
          while (fcodec.vars[pos] != dcodec.vars[k]) ++pos;
          sub[k] = j[pos];
        }
        h.s[m.offsets[di] + dcodec.encode_star(sub)] += av;
      });
    }
  }
  return h;
}

// Log of the induced density on the free probabilities, without the model's
// normalizing constant I_G:
//   -log K + sum (alpha(i_D) - 1) log p(i_D, i*) + (alpha_empty - 1) log p_empty.
inline double induced_log_density(const model& m, const free_prob_vector& fp,
                                  const hyperparameters& hyper) {
  induced_exponents_result exps = induced_exponents(m, hyper);
  jacobian_result jac = jacobian_factor(m, fp);
  if (!jac.k_positive())
    throw domain_error("induced_log_density: K factor is nonpositive at this point");
  double acc = -std::log(jac.k_factor);
  for (std::size_t i = 0; i < fp.v.size(); ++i)
    acc += (exps.alpha_cell[i] - 1.0) * std::log(fp.v[i]);
  acc += (exps.alpha_empty - 1.0) * std::log(fp.p_base);
  return acc;
}

}  // namespace loglin
