#pragma once

// Closed-form machinery for decomposable graphs (hyper-Dirichlet blocks and
// the Gamma-ratio normalizing constant) plus the Markov-ratio factorization
// over prime components for arbitrary graphical models.

#include <cmath>
#include <functional>
#include <vector>

#include "loglin/common.hpp"
#include "loglin/graph.hpp"
#include "loglin/model.hpp"
#include "loglin/param.hpp"
#include "loglin/prior.hpp"

namespace loglin {

// ---------------------------------------------------------------------------
// Block exponents
// ---------------------------------------------------------------------------

// Dirichlet parameters of one clique or separator block B: one entry per
// cell of I_B, addressed by (support set D, star part i_D), with the base
// cell's entry held in alpha_empty.  Hyperconsistency: the block total
// equals alpha.
struct block_alphas {
  varset block;
  std::vector<varset> sets;                      // nonempty family D inside B, canonical
  std::vector<std::vector<double>> cell_alphas;  // per set, star cells in lex order
  double alpha_empty = 0.0;

  double total() const {
    double t = alpha_empty;
    for (const auto& v : cell_alphas)
      for (double x : v) t += x;
    return t;
  }
};

struct clique_separator_alphas {
  std::vector<block_alphas> cliques;
  std::vector<block_alphas> separators;  // aligned; entry 0 is the empty block
};

// Alternating-sum exponents restricted to the sub-lattice of `block`:
//   alpha^B(i_D) = sum_{F in family, D subset F subset B}
//                  sum_{j_F restricting to i_D} (-1)^{|F \ D|} s(j_F),
// with the D = {} term accumulating on alpha_empty (offset by alpha).
inline block_alphas block_exponents(const model& m, const hyperparameters& hyper, varset block) {
  if (hyper.s.size() != m.theta_dim) throw domain_error("block_exponents: dimension mismatch");
  block_alphas out;
  out.block = block;
  out.alpha_empty = hyper.alpha;
  for (varset d : m.interactions)
    if (d.subset_of(block)) out.sets.push_back(d);
  std::vector<int> set_slot(std::size_t{1} << m.space.num_variables(), -1);
  for (std::size_t i = 0; i < out.sets.size(); ++i) {
    set_slot[out.sets[i].bits] = (int)i;
    out.cell_alphas.emplace_back(m.codecs[m.set_index(out.sets[i])].num_star_cells(), 0.0);
  }
  for (varset fset : out.sets) {
    int fi = m.set_index(fset);
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
        const scope_codec& dcodec = m.codecs[m.set_index(d)];
        cell sub(dcodec.arity());
        for (int k = 0; k < dcodec.arity(); ++k) {
          int pos = 0;
          while (fcodec.vars[pos] != dcodec.vars[k]) ++pos;
          sub[k] = j[pos];
        }
        out.cell_alphas[set_slot[d.bits]][dcodec.encode_star(sub)] += sign * sv;
      });
    }
  }
  return out;
}

inline clique_separator_alphas clique_sep_alphas(const model& m, const hyperparameters& hyper,
                                                 const ordered_decomposition& decomp) {
  clique_separator_alphas out;
  for (varset c : decomp.components) out.cliques.push_back(block_exponents(m, hyper, c));
  for (varset s : decomp.separators) out.separators.push_back(block_exponents(m, hyper, s));
  return out;
}

// ---------------------------------------------------------------------------
// Closed-form normalizing constant
// ---------------------------------------------------------------------------

namespace detail {

// log of the block's Dirichlet-integral contribution:
//   sum_cells lgamma(alpha_cell) + lgamma(alpha_empty) - lgamma(block total).
// Hyperconsistency makes the total equal alpha; an empty block contributes 0.
inline double log_block_integral(const block_alphas& b) {
  double total = b.alpha_empty;
  double acc = 0.0;
  if (!(b.alpha_empty > 0.0))
    throw domain_error("normalizing constant: nonpositive base-cell block exponent");
  acc += std::lgamma(b.alpha_empty);
  for (const auto& v : b.cell_alphas)
    for (double x : v) {
      if (!(x > 0.0)) throw domain_error("normalizing constant: nonpositive block exponent");
      acc += std::lgamma(x);
      total += x;
    }
  return acc - std::lgamma(total);
}

}  // namespace detail

// log I_G(s, alpha) for a decomposable graph, as a ratio of clique and
// separator Dirichlet integrals under the given perfect ordering (the value
// is ordering-invariant; repeated separators count once per occurrence).
inline double log_i_decomposable(const model& m, const hyperparameters& hyper,
                                 const ordered_decomposition& decomp) {
  double acc = 0.0;
  for (varset c : decomp.components) acc += detail::log_block_integral(block_exponents(m, hyper, c));
  for (std::size_t l = 1; l < decomp.separators.size(); ++l)
    acc -= detail::log_block_integral(block_exponents(m, hyper, decomp.separators[l]));
  return acc;
}

inline double log_i_decomposable(const model& m, const hyperparameters& hyper) {
  if (!m.graph) throw domain_error("log_i_decomposable: model has no graph");
  if (!is_decomposable(*m.graph)) throw domain_error("log_i_decomposable: graph is not decomposable");
  return log_i_decomposable(m, hyper, perfect_ordering(*m.graph));
}

// ---------------------------------------------------------------------------
// Hyper-Dirichlet density
// ---------------------------------------------------------------------------

namespace detail {

// Ordinary Dirichlet log-density of a block's marginal probability table;
// the parameter of cell (i_D, 0 elsewhere) is the block exponent at (D, i_D).
inline double log_block_dirichlet(const model& m, const block_alphas& b,
                                  const marginal_table& probs) {
  if (probs.scope != b.block) throw domain_error("hyper_dirichlet: block/table scope mismatch");
  double total_prob = 0.0;
  for (double p : probs.values) {
    if (!(p > 0.0)) throw domain_error("hyper_dirichlet: nonpositive marginal probability");
    total_prob += p;
  }
  if (std::abs(total_prob - 1.0) > 1e-9)
    throw domain_error("hyper_dirichlet: block table does not sum to 1");

  double acc = std::lgamma(b.total());
  acc -= std::lgamma(b.alpha_empty);
  cell base(probs.codec.arity(), 0);
  acc += (b.alpha_empty - 1.0) * std::log(probs.at(base));
  for (std::size_t si = 0; si < b.sets.size(); ++si) {
    varset d = b.sets[si];
    const scope_codec& dcodec = m.codecs[m.set_index(d)];
    for (std::size_t jc = 0; jc < b.cell_alphas[si].size(); ++jc) {
      cell star = dcodec.decode_star(jc);
      // embed (D, i_D) into a cell of the block
      cell bc(probs.codec.arity(), 0);
      for (int k = 0; k < dcodec.arity(); ++k) {
        int pos = 0;
        while (probs.codec.vars[pos] != dcodec.vars[k]) ++pos;
        bc[pos] = star[k];
      }
      double a = b.cell_alphas[si][jc];
      if (!(a > 0.0)) throw domain_error("hyper_dirichlet: nonpositive block exponent");
      acc -= std::lgamma(a);
      acc += (a - 1.0) * std::log(probs.at(bc));
    }
  }
  return acc;
}

inline marginal_table margin_of_margin(const variable_space& space, const marginal_table& src,
                                       varset subscope) {
  marginal_table out(space, subscope);
  for (std::size_t i = 0; i < src.values.size(); ++i) {
    cell c = src.codec.decode(i);
    cell full = src.codec.embed(c, space.num_variables());
    out.values[out.codec.encode(out.codec.restrict_full(full))] += src.values[i];
  }
  return out;
}

}  // namespace detail

// Hyper-Dirichlet log-density from per-clique marginal probability tables
// (aligned with decomp.components).  Separator tables are derived from the
// cliques; any two cliques covering a separator must agree on it within
// `consistency_tol`.
inline double hyper_dirichlet_log_density(const model& m, const hyperparameters& hyper,
                                          const ordered_decomposition& decomp,
                                          const std::vector<marginal_table>& clique_probs,
                                          double consistency_tol = 1e-9) {
  if (clique_probs.size() != decomp.components.size())
    throw domain_error("hyper_dirichlet: need one probability table per clique");
  double acc = 0.0;
  for (std::size_t l = 0; l < decomp.components.size(); ++l)
    acc += detail::log_block_dirichlet(m, block_exponents(m, hyper, decomp.components[l]),
                                       clique_probs[l]);
  for (std::size_t l = 1; l < decomp.separators.size(); ++l) {
    varset sep = decomp.separators[l];
    if (sep.is_empty()) continue;
    // margins from every clique containing the separator must agree
    marginal_table ref = detail::margin_of_margin(m.space, clique_probs[l], sep);
    for (std::size_t j = 0; j < decomp.components.size(); ++j) {
      if (j == l || !sep.subset_of(decomp.components[j])) continue;
      marginal_table other = detail::margin_of_margin(m.space, clique_probs[j], sep);
      for (std::size_t i = 0; i < ref.values.size(); ++i)
        if (std::abs(ref.values[i] - other.values[i]) > consistency_tol)
          throw domain_error("hyper_dirichlet: inconsistent separator marginals");
    }
    acc -= detail::log_block_dirichlet(m, block_exponents(m, hyper, sep), ref);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Restriction to a component
// ---------------------------------------------------------------------------

// The marginal model on a subset B of the variables.  For graphical models
// the component model is graphical with the induced subgraph; otherwise the
// family is the restriction of the parent family.
struct component_restriction {
  model sub;
  std::vector<std::size_t> parent_index;  // sub theta layout -> parent theta layout
};

inline component_restriction restrict_model(const model& m, varset block) {
  if (block.is_empty()) throw domain_error("restrict_model: empty block");
  std::vector<int> vars = block.members();
  std::vector<std::string> names;
  std::vector<int> levels;
  for (int v : vars) {
    names.push_back(m.space.names[v]);
    levels.push_back(m.space.levels[v]);
  }
  variable_space sub_space(names, levels);

  component_restriction out;
  if (m.graph) {
    undirected_graph sub_g((int)vars.size());
    for (std::size_t a = 0; a < vars.size(); ++a)
      for (std::size_t b = a + 1; b < vars.size(); ++b)
        if (m.graph->has_edge(vars[a], vars[b])) sub_g.add_edge((int)a, (int)b);
    out.sub = model_from_graph(std::move(sub_space), std::move(sub_g));
  } else {
    std::vector<varset> gens;
    for (varset d : m.interactions)
      if (d.subset_of(block)) {
        varset mapped;
        for (std::size_t a = 0; a < vars.size(); ++a)
          if (d.contains(vars[a])) mapped |= varset::single((int)a);
        gens.push_back(mapped);
      }
    out.sub = model_from_generators(std::move(sub_space), gens);
  }

  // map each sub-model (D, i_D) to the parent index
  out.parent_index.resize(out.sub.theta_dim);
  for (int si = 0; si < out.sub.num_sets(); ++si) {
    varset sub_d = out.sub.interactions[si];
    varset parent_d;
    for (int k : sub_d.members()) parent_d |= varset::single(vars[k]);
    int pi = m.set_index(parent_d);
    const scope_codec& scodec = out.sub.codecs[si];
    const scope_codec& pcodec = m.codecs[pi];
    for (std::size_t jc = 0; jc < scodec.num_star_cells(); ++jc) {
      // the member order matches (both ascending), so the star cell carries over
      out.parent_index[out.sub.offsets[si] + jc] =
          m.offsets[pi] + pcodec.encode_star(scodec.decode_star(jc));
    }
  }
  return out;
}

inline hyperparameters restrict_hyper(const component_restriction& r, const hyperparameters& hyper) {
  hyperparameters out;
  out.alpha = hyper.alpha;
  out.s.resize(r.sub.theta_dim);
  for (std::size_t i = 0; i < out.s.size(); ++i) out.s[i] = hyper.s[r.parent_index[i]];
  return out;
}

// Marginal table of p(theta) on the block, as a full table of the sub-space.
inline full_prob_table marginal_prob_table(const model& m, const theta_vector& theta,
                                           const component_restriction& r, varset block) {
  full_prob_table full = full_from_theta(m, theta);
  contingency_table tmp(m.space);
  tmp.values = full.p;
  marginal_table marg = marginalize(tmp, block);
  full_prob_table out(r.sub.space);
  // scope_codec enumerates cells in the same lexicographic order as the
  // sub-space's own codec, so values copy over directly
  out.p = marg.values;
  return out;
}

// ---------------------------------------------------------------------------
// Markov-ratio factorization over prime components
// ---------------------------------------------------------------------------

using log_normalizer_fn = std::function<double(const model&, const hyperparameters&)>;

// Normalized log-density of the conjugate prior assembled component-wise:
//   sum_l log pi_{P_l}(theta^{P_l} | s^{P_l}, alpha)
// - sum_l log pi_{S_l}(theta^{S_l} | s^{S_l}, alpha),
// where component thetas come from the marginal tables and component log
// normalizing constants come from `normalizer` (closed form for complete
// blocks; the caller supplies the numeric route for prime components).
inline double markov_ratio_log_prior(const model& m, const theta_vector& theta,
                                     const hyperparameters& hyper,
                                     const ordered_decomposition& decomp,
                                     const log_normalizer_fn& normalizer) {
  auto block_term = [&](varset block) {
    component_restriction r = restrict_model(m, block);
    hyperparameters sub_h = restrict_hyper(r, hyper);
    full_prob_table marg = marginal_prob_table(m, theta, r, block);
    theta_vector sub_theta = theta_from_full(r.sub, marg);
    return log_prior_unnorm(r.sub, sub_theta, sub_h) - normalizer(r.sub, sub_h);
  };
  double acc = 0.0;
  for (varset c : decomp.components) acc += block_term(c);
  for (std::size_t l = 1; l < decomp.separators.size(); ++l)
    if (!decomp.separators[l].is_empty()) acc -= block_term(decomp.separators[l]);
  return acc;
}

}  // namespace loglin
