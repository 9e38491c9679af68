#pragma once

// The conjugate prior on the log-linear parameter:
//   pi(theta | s, alpha)  proportional to  exp(<s, theta> - alpha k(theta)).
//
// Properness holds iff alpha > 0 and s/alpha lies in the open mean space of
// the family; this is decided operationally by maximizing the strictly
// concave dual objective <s/alpha, theta> - k(theta) with a damped Newton
// ascent.  A cheap necessary-condition screen (marginal monotonicity) runs
// first and rejects obvious violations exactly.

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "loglin/common.hpp"
#include "loglin/model.hpp"
#include "loglin/param.hpp"
#include "loglin/space.hpp"

namespace loglin {

struct hyperparameters {
  double alpha = 0.0;
  std::vector<double> s;  // aligned with the model's theta layout
};

inline double log_prior_unnorm(const model& m, const theta_vector& theta,
                               const hyperparameters& hyper) {
  if (hyper.s.size() != m.theta_dim || theta.size() != m.theta_dim)
    throw domain_error("log_prior_unnorm: dimension mismatch");
  double dot = 0.0;
  for (std::size_t i = 0; i < hyper.s.size(); ++i) dot += hyper.s[i] * theta.v[i];
  return dot - hyper.alpha * log_partition(m, theta);
}

struct properness_report {
  bool proper = false;
  std::string reason;            // empty when proper
  theta_vector mode;             // maximizer (last iterate when not proper)
  full_prob_table witness;       // p at the mode; realizes s/alpha when proper
  double gradient_residual = 0;  // sup-norm of s/alpha - mean_map(mode)
  int iterations = 0;
};

// ---------------------------------------------------------------------------
// Dual ascent
// ---------------------------------------------------------------------------

namespace detail {

struct dual_ascent_result {
  theta_vector theta;
  full_prob_table table;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;  // ||theta||_inf hit the divergence bound
};

// Maximizes <target, theta> - k(theta) by damped Newton with backtracking.
// `target` must have the theta layout of `m`.
inline dual_ascent_result maximize_dual(const model& m, const std::vector<double>& target,
                                        double grad_tol = 1e-8, int max_iter = 500,
                                        double diverge_bound = 1e3) {
  const auto d = (Eigen::Index)m.theta_dim;
  dual_ascent_result res;
  res.theta = theta_vector(m.theta_dim, 0.0);

  auto objective = [&](const theta_vector& th) {
    double dot = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) dot += target[i] * th.v[i];
    return dot - log_partition(m, th);
  };

  double g_cur = objective(res.theta);
  for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
    res.table = full_from_theta(m, res.theta);
    Eigen::VectorXd grad(d);
    {
      std::vector<double> mean(m.theta_dim, 0.0);
      std::vector<std::size_t> act;
      for (std::size_t idx = 0; idx < res.table.p.size(); ++idx) {
        cell c = m.space.decode(idx);
        detail::active_indices(m, c, act);
        for (std::size_t t : act) mean[t] += res.table.p[idx];
      }
      for (Eigen::Index i = 0; i < d; ++i) grad(i) = target[i] - mean[i];
    }
    res.residual = grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0;
    if (res.residual < grad_tol) {
      res.converged = true;
      return res;
    }
    double theta_norm = 0.0;
    for (double t : res.theta.v) theta_norm = std::max(theta_norm, std::abs(t));
    if (theta_norm >= diverge_bound) {
      res.diverged = true;
      return res;
    }

    Eigen::MatrixXd hess = sufficient_stat_covariance(m, res.table);
    Eigen::VectorXd step;
    double ridge = 0.0;
    while (true) {
      Eigen::LDLT<Eigen::MatrixXd> ldlt(hess + ridge * Eigen::MatrixXd::Identity(d, d));
      step = ldlt.solve(grad);
      if (ldlt.info() == Eigen::Success && step.allFinite() &&
          step.dot(grad) > 0.0)
        break;
      ridge = (ridge == 0.0) ? 1e-10 : ridge * 100.0;
      if (ridge > 1.0) throw numerical_error("dual ascent: Hessian solve failed");
    }

    // Armijo backtracking on the concave objective.
    double slope = step.dot(grad);
    double t = 1.0;
    theta_vector trial = res.theta;
    while (true) {
      for (Eigen::Index i = 0; i < d; ++i) trial.v[i] = res.theta.v[i] + t * step(i);
      double g_trial = objective(trial);
      if (g_trial >= g_cur + 1e-4 * t * slope) {
        g_cur = g_trial;
        break;
      }
      t *= 0.5;
      if (t < 1e-14) break;  // no progress possible; let the residual speak
    }
    res.theta = trial;
  }
  res.table = full_from_theta(m, res.theta);
  return res;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Properness
// ---------------------------------------------------------------------------

// Necessary conditions only (violations are exact disproofs of properness):
// alpha > 0; 0 < s(i_D) for all entries; s strictly decreases when the
// interaction set grows (P(X_D = i_D) < P(X_C = i_C) for C subset D); the
// star-cell total of every set stays below alpha.  Returns an empty string
// when all checks pass.
inline std::string properness_screen(const model& m, const hyperparameters& hyper) {
  if (!(hyper.alpha > 0.0)) return "alpha must be positive";
  if (hyper.s.size() != m.theta_dim) return "hyperparameter dimension mismatch";
  for (double v : hyper.s)
    if (!(v > 0.0)) return "every s(i_D) must be positive";
  for (int si = 0; si < m.num_sets(); ++si) {
    const scope_codec& codec = m.codecs[si];
    double set_total = 0.0;
    for (std::size_t sc = 0; sc < codec.num_star_cells(); ++sc) {
      cell star = codec.decode_star(sc);
      double v = hyper.s[m.offsets[si] + sc];
      set_total += v;
      // compare against every proper subset's restriction
      varset d = m.interactions[si];
      bool bad = false;
      for_each_subset(d, [&](varset c) {
        if (bad || c.is_empty() || c == d) return;
        int ci = m.set_index(c);
        const scope_codec& ccodec = m.codecs[ci];
        cell sub(ccodec.arity());
        for (int k = 0; k < ccodec.arity(); ++k) {
          int pos = 0;
          while (codec.vars[pos] != ccodec.vars[k]) ++pos;
          sub[k] = star[pos];
        }
        if (!(hyper.s[m.offsets[ci] + ccodec.encode_star(sub)] > v)) bad = true;
      });
      if (bad) return "s must strictly decrease from subsets to supersets";
    }
    if (!(set_total < hyper.alpha)) return "star-cell total of a set reaches alpha";
  }
  return {};
}

// Decides properness by dual ascent; never throws on indeterminate outcomes
// (iteration cap reached) — those report proper=false with the residual.
inline properness_report check_proper(const model& m, const hyperparameters& hyper,
                                      double grad_tol = 1e-8, int max_iter = 500) {
  properness_report rep;
  std::string screen = properness_screen(m, hyper);
  if (!screen.empty()) {
    rep.proper = false;
    rep.reason = "necessary condition failed: " + screen;
    rep.mode = theta_vector(m.theta_dim, 0.0);
    rep.witness = full_from_theta(m, rep.mode);
    std::vector<double> mean = mean_map(m, rep.mode);
    rep.gradient_residual = 0.0;
    if (hyper.s.size() == m.theta_dim)
      for (std::size_t i = 0; i < mean.size(); ++i)
        rep.gradient_residual =
            std::max(rep.gradient_residual, std::abs(hyper.s[i] / hyper.alpha - mean[i]));
    return rep;
  }
  std::vector<double> target(m.theta_dim);
  for (std::size_t i = 0; i < target.size(); ++i) target[i] = hyper.s[i] / hyper.alpha;
  detail::dual_ascent_result asc = detail::maximize_dual(m, target, grad_tol, max_iter);
  rep.mode = asc.theta;
  rep.witness = asc.table;
  rep.gradient_residual = asc.residual;
  rep.iterations = asc.iterations;
  if (asc.converged) {
    rep.proper = true;
  } else if (asc.diverged) {
    rep.proper = false;
    rep.reason = "dual ascent diverged: s/alpha is outside the mean space";
  } else {
    rep.proper = false;
    rep.reason = "dual ascent did not converge within the iteration cap";
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Construction methods
// ---------------------------------------------------------------------------

// Method 1: pick the prior mean table via theta0, scale marginals by alpha.
inline hyperparameters construct_from_theta(const model& m, const theta_vector& theta0,
                                            double alpha) {
  if (!(alpha > 0.0)) throw domain_error("construct_from_theta: alpha must be positive");
  hyperparameters h;
  h.alpha = alpha;
  h.s = mean_map(m, theta0);
  for (double& v : h.s) v *= alpha;
  return h;
}

// Method 2: a strictly positive prior table supplies alpha = total mass and
// s = its marginal counts.
inline hyperparameters construct_from_prior_table(const model& m, const contingency_table& table) {
  if (table.space.num_cells() != m.space.num_cells())
    throw domain_error("construct_from_prior_table: table/model space mismatch");
  if (!table.all_positive())
    throw domain_error("construct_from_prior_table: table has a nonpositive cell");
  hyperparameters h;
  h.alpha = table.total();
  h.s = sufficient_stats(m, table);
  return h;
}

// Perks-style vague prior: uniform pseudo-table with total mass `total`.
inline hyperparameters perks_prior(const model& m, double total = 1.0) {
  contingency_table uniform(m.space, total / (double)m.space.num_cells());
  return construct_from_prior_table(m, uniform);
}

// ---------------------------------------------------------------------------
// Iterative proportional fitting
// ---------------------------------------------------------------------------

// Fits the model's maximum-likelihood table to the generator margins.
// Targets must be given for exactly the maximal sets of the generating
// class, strictly positive, with equal totals and consistent overlaps.
// Returns a probability table (targets are normalized by their total).
inline full_prob_table ipf_fit(const model& m, const std::vector<marginal_table>& targets,
                               double match_tol = 1e-10, int max_sweeps = 10000) {
  std::vector<varset> gens = m.generators();
  if (targets.size() != gens.size())
    throw domain_error("ipf_fit: need one target per maximal set of the generating class");
  std::vector<const marginal_table*> by_gen(gens.size(), nullptr);
  for (const marginal_table& t : targets) {
    bool matched = false;
    for (std::size_t g = 0; g < gens.size(); ++g)
      if (t.scope == gens[g]) {
        if (by_gen[g]) throw domain_error("ipf_fit: duplicate target scope");
        by_gen[g] = &t;
        matched = true;
      }
    if (!matched) throw domain_error("ipf_fit: target scope is not a maximal set");
  }

  // positivity and total consistency
  double total = -1.0;
  for (const marginal_table* t : by_gen) {
    double tt = 0.0;
    for (double v : t->values) {
      if (!(v > 0.0)) throw domain_error("ipf_fit: targets must be strictly positive");
      tt += v;
    }
    if (total < 0.0)
      total = tt;
    else if (std::abs(tt - total) > 1e-9 * std::max(1.0, std::abs(total)))
      throw domain_error("ipf_fit: target totals disagree");
  }

  // overlap consistency between every pair of targets
  for (std::size_t a = 0; a < gens.size(); ++a)
    for (std::size_t b = a + 1; b < gens.size(); ++b) {
      varset common = gens[a] & gens[b];
      if (common.is_empty()) continue;
      scope_codec codec(m.space, common);
      std::vector<double> ma(codec.num_cells(), 0.0), mb(codec.num_cells(), 0.0);
      for (std::size_t i = 0; i < by_gen[a]->values.size(); ++i) {
        cell c = by_gen[a]->codec.decode(i);
        cell full = by_gen[a]->codec.embed(c, m.space.num_variables());
        ma[codec.encode(codec.restrict_full(full))] += by_gen[a]->values[i];
      }
      for (std::size_t i = 0; i < by_gen[b]->values.size(); ++i) {
        cell c = by_gen[b]->codec.decode(i);
        cell full = by_gen[b]->codec.embed(c, m.space.num_variables());
        mb[codec.encode(codec.restrict_full(full))] += by_gen[b]->values[i];
      }
      for (std::size_t i = 0; i < ma.size(); ++i)
        if (std::abs(ma[i] - mb[i]) > 1e-9 * std::max(1.0, std::abs(total)))
          throw domain_error("ipf_fit: targets disagree on a shared margin");
    }

  // normalized targets, per-generator
  const std::size_t ncells = m.space.num_cells();
  full_prob_table p(m.space, 1.0 / (double)ncells);
  std::vector<std::vector<std::size_t>> cell_to_margin(gens.size());
  for (std::size_t g = 0; g < gens.size(); ++g) {
    cell_to_margin[g].resize(ncells);
    const scope_codec& codec = by_gen[g]->codec;
    for (std::size_t idx = 0; idx < ncells; ++idx)
      cell_to_margin[g][idx] = codec.encode(codec.restrict_full(m.space.decode(idx)));
  }

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (std::size_t g = 0; g < gens.size(); ++g) {
      std::vector<double> cur(by_gen[g]->values.size(), 0.0);
      for (std::size_t idx = 0; idx < ncells; ++idx) cur[cell_to_margin[g][idx]] += p.p[idx];
      for (std::size_t idx = 0; idx < ncells; ++idx) {
        double target_v = by_gen[g]->values[cell_to_margin[g][idx]] / total;
        p.p[idx] *= target_v / cur[cell_to_margin[g][idx]];
      }
    }
    double worst = 0.0;
    for (std::size_t g = 0; g < gens.size(); ++g) {
      std::vector<double> cur(by_gen[g]->values.size(), 0.0);
      for (std::size_t idx = 0; idx < ncells; ++idx) cur[cell_to_margin[g][idx]] += p.p[idx];
      for (std::size_t i = 0; i < cur.size(); ++i)
        worst = std::max(worst, std::abs(cur[i] - by_gen[g]->values[i] / total));
    }
    if (worst <= match_tol) return p;
  }
  throw numerical_error("ipf_fit: no convergence within the sweep cap");
}

// ---------------------------------------------------------------------------
// Posterior update
// ---------------------------------------------------------------------------

inline hyperparameters posterior_update(const model& m, const hyperparameters& hyper,
                                        const contingency_table& data) {
  if (data.space.num_cells() != m.space.num_cells())
    throw domain_error("posterior_update: table/model space mismatch");
  for (double v : data.values)
    if (v < 0.0) throw domain_error("posterior_update: negative count");
  hyperparameters out = hyper;
  std::vector<double> y = sufficient_stats(m, data);
  if (out.s.size() != y.size()) throw domain_error("posterior_update: dimension mismatch");
  for (std::size_t i = 0; i < y.size(); ++i) out.s[i] += y[i];
  out.alpha += data.total();
  return out;
}

}  // namespace loglin
