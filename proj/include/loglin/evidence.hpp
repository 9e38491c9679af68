#pragma once

// Numerical normalizing constants I_G(s, alpha) = integral of
// exp(<s,theta> - alpha k(theta)) d theta, Bayes factors, and
// prior-elicitation moments.
//
// Oracle chain: exact Dirichlet ratios for decomposable graphs; Laplace and
// self-normalized importance sampling (multivariate t proposal, 5 df,
// centered at the mode with shape (alpha H_k)^{-1}) for everything else;
// non-decomposable graphical models assemble I_G from prime components and
// separators.  All randomness is derived from explicit seeds through fixed
// size chunks, so results are bit-reproducible.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "loglin/common.hpp"
#include "loglin/decomposable.hpp"
#include "loglin/model.hpp"
#include "loglin/param.hpp"
#include "loglin/prior.hpp"

namespace loglin {

struct evidence_result {
  double log_i = 0.0;
  std::string method;  // closed_form | laplace | importance | component_assembly
  std::optional<double> std_error;  // importance only (assembly: combined)
  std::optional<theta_vector> mode;
  std::uint64_t seed = 0;
  std::optional<double> ess;  // effective sample size (importance)
  bool unstable = false;      // ESS below 1% of draws
};

struct evidence_policy {
  enum class kind { automatic, closed, laplace, importance };
  kind method = kind::automatic;
  std::int64_t draws = 100000;
  std::uint64_t seed = 1;
};

// ---------------------------------------------------------------------------
// Mode
// ---------------------------------------------------------------------------

// Maximizer of the strictly concave log_prior_unnorm.  The dual gradient
// tolerance is tightened by alpha so the returned mode satisfies
// ||s - alpha mean_map(mode)||_inf < 1e-8.
inline theta_vector find_mode(const model& m, const hyperparameters& hyper) {
  std::string screen = properness_screen(m, hyper);
  if (!screen.empty()) throw domain_error("find_mode: improper hyperparameters: " + screen);
  std::vector<double> target(m.theta_dim);
  for (std::size_t i = 0; i < target.size(); ++i) target[i] = hyper.s[i] / hyper.alpha;
  double tol = 1e-8 / std::max(1.0, hyper.alpha);
  detail::dual_ascent_result asc = detail::maximize_dual(m, target, tol, 500);
  if (asc.diverged)
    throw domain_error("find_mode: improper hyperparameters (dual ascent diverged)");
  if (!asc.converged)
    throw numerical_error("find_mode: dual ascent did not converge within the iteration cap");
  return asc.theta;
}

// ---------------------------------------------------------------------------
// Laplace approximation
// ---------------------------------------------------------------------------

inline evidence_result laplace_log_i(const model& m, const hyperparameters& hyper) {
  evidence_result res;
  res.method = "laplace";
  theta_vector mode = find_mode(m, hyper);
  const auto d = (Eigen::Index)m.theta_dim;
  Eigen::MatrixXd hess =
      hyper.alpha * sufficient_stat_covariance(m, full_from_theta(m, mode));
  Eigen::LLT<Eigen::MatrixXd> llt(hess);
  if (llt.info() != Eigen::Success)
    throw numerical_error("laplace_log_i: singular Hessian (boundary-adjacent hyperparameters)");
  double half_log_det = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) half_log_det += std::log(llt.matrixL()(i, i));
  res.log_i = log_prior_unnorm(m, mode, hyper) +
              0.5 * (double)d * std::log(2.0 * M_PI) - half_log_det;
  res.mode = std::move(mode);
  return res;
}

// ---------------------------------------------------------------------------
// Importance sampling
// ---------------------------------------------------------------------------

namespace detail {

// Deterministic standard-normal stream (64-bit Mersenne Twister + explicit
// Box-Muller); avoids implementation-defined std distributions so seeded
// results are identical across platforms.
struct normal_stream {
  std::mt19937_64 eng;
  double cache = 0.0;
  bool has_cache = false;

  explicit normal_stream(std::uint64_t seed) : eng(seed) {}

  double uniform_open() {  // strictly inside (0,1)
    return ((double)(eng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  double normal() {
    if (has_cache) {
      has_cache = false;
      return cache;
    }
    double u1 = uniform_open(), u2 = uniform_open();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    cache = r * std::sin(a);
    has_cache = true;
    return r * std::cos(a);
  }
};

inline constexpr std::int64_t kChunkSize = 4096;
inline constexpr double kProposalDf = 5.0;

}  // namespace detail

inline evidence_result importance_log_i(const model& m, const hyperparameters& hyper,
                                        std::int64_t draws, std::uint64_t seed) {
  if (draws < 1000) throw domain_error("importance_log_i: need at least 1000 draws");
  evidence_result res;
  res.method = "importance";
  res.seed = seed;
  theta_vector mode = find_mode(m, hyper);
  const auto d = (Eigen::Index)m.theta_dim;
  const double nu = detail::kProposalDf;

  Eigen::MatrixXd hess =
      hyper.alpha * sufficient_stat_covariance(m, full_from_theta(m, mode));
  Eigen::LLT<Eigen::MatrixXd> llt(hess);
  if (llt.info() != Eigen::Success)
    throw numerical_error("importance_log_i: singular Hessian at the mode");
  double log_det_shape = 0.0;  // log det of the proposal shape (alpha H)^{-1}
  for (Eigen::Index i = 0; i < d; ++i) log_det_shape -= 2.0 * std::log(llt.matrixL()(i, i));
  const double log_q_const = std::lgamma(0.5 * (nu + (double)d)) - std::lgamma(0.5 * nu) -
                             0.5 * (double)d * std::log(nu * M_PI) - 0.5 * log_det_shape;

  // One log-weight per draw, filled chunk by chunk; each chunk has its own
  // seeded stream, so the result does not depend on evaluation order.
  std::vector<double> logw((std::size_t)draws);
  const std::int64_t chunks = (draws + detail::kChunkSize - 1) / detail::kChunkSize;
  Eigen::VectorXd z(d), x(d);
  theta_vector th(m.theta_dim);
  for (std::int64_t c = 0; c < chunks; ++c) {
    detail::normal_stream rng(splitmix64(seed ^ splitmix64(0x517cc1b727220a95ull + (std::uint64_t)c)));
    const std::int64_t lo = c * detail::kChunkSize;
    const std::int64_t hi = std::min(draws, lo + detail::kChunkSize);
    for (std::int64_t j = lo; j < hi; ++j) {
      for (Eigen::Index i = 0; i < d; ++i) z(i) = rng.normal();
      double u = 0.0;
      for (int i = 0; i < 5; ++i) {
        double n = rng.normal();
        u += n * n;
      }
      double scale = std::sqrt(nu / u);
      // x = mode + U^{-1} z * scale, with alpha H = U' U (U upper Cholesky)
      x = llt.matrixU().solve(z) * scale;
      for (Eigen::Index i = 0; i < d; ++i) th.v[(std::size_t)i] = mode.v[(std::size_t)i] + x(i);
      double msq = z.squaredNorm() * (nu / u);
      double log_q = log_q_const - 0.5 * (nu + (double)d) * std::log1p(msq / nu);
      logw[(std::size_t)j] = log_prior_unnorm(m, th, hyper) - log_q;
    }
  }

  double mx = *std::max_element(logw.begin(), logw.end());
  double sum_a = 0.0, sum_a2 = 0.0;
  for (double lw : logw) {
    double a = std::exp(lw - mx);
    sum_a += a;
    sum_a2 += a * a;
  }
  const double n = (double)draws;
  double mean_a = sum_a / n;
  res.log_i = mx + std::log(mean_a);
  double var_a = std::max(0.0, sum_a2 / n - mean_a * mean_a) * n / std::max(1.0, n - 1.0);
  res.std_error = std::sqrt(var_a / n) / mean_a;  // delta method on log scale
  res.ess = sum_a * sum_a / sum_a2;
  res.unstable = *res.ess < 0.01 * n;
  res.mode = std::move(mode);
  return res;
}

// ---------------------------------------------------------------------------
// Dispatch and component assembly
// ---------------------------------------------------------------------------

// Stable fingerprint of a model's structure; used to derive per-component
// seeds that agree between the assembly and Markov-ratio routes.
inline std::uint64_t model_fingerprint(const model& m) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::uint64_t v) { h = splitmix64(h ^ v); };
  mix((std::uint64_t)m.space.num_variables());
  for (int l : m.space.levels) mix((std::uint64_t)l);
  for (const std::string& name : m.space.names)
    for (char ch : name) mix((std::uint64_t)(unsigned char)ch);
  for (varset d : m.interactions) mix((std::uint64_t)d.bits);
  return h;
}

inline bool model_is_decomposable(const model& m) {
  return m.graph && is_decomposable(*m.graph);
}

namespace detail {

// Numeric route for a single (sub)model under the policy defaults:
// Laplace above 40 free parameters, importance sampling otherwise, with a
// seed tied to the model structure.
inline evidence_result numeric_log_i(const model& m, const hyperparameters& hyper,
                                     const evidence_policy& pol) {
  if (m.theta_dim > 40) return laplace_log_i(m, hyper);
  return importance_log_i(m, hyper, pol.draws, splitmix64(pol.seed ^ model_fingerprint(m)));
}

}  // namespace detail

inline evidence_result log_i(const model& m, const hyperparameters& hyper,
                             const evidence_policy& pol = {}) {
  using kind = evidence_policy::kind;
  switch (pol.method) {
    case kind::closed: {
      if (!model_is_decomposable(m))
        throw domain_error("log_i: closed form requested on a non-decomposable model");
      evidence_result res;
      res.method = "closed_form";
      res.log_i = log_i_decomposable(m, hyper);
      return res;
    }
    case kind::laplace:
      return laplace_log_i(m, hyper);
    case kind::importance:
      return importance_log_i(m, hyper, pol.draws, pol.seed);
    case kind::automatic:
      break;
  }

  if (model_is_decomposable(m)) {
    evidence_result res;
    res.method = "closed_form";
    res.log_i = log_i_decomposable(m, hyper);
    return res;
  }

  if (m.graph) {
    // graphical, not decomposable: assemble over prime components
    ordered_decomposition decomp = prime_components(*m.graph);
    evidence_result res;
    res.method = "component_assembly";
    res.seed = pol.seed;
    double se2 = 0.0;
    bool any_se = false;
    for (varset comp : decomp.components) {
      component_restriction r = restrict_model(m, comp);
      hyperparameters sub_h = restrict_hyper(r, hyper);
      evidence_result term = model_is_decomposable(r.sub)
                                 ? log_i(r.sub, sub_h, evidence_policy{kind::closed})
                                 : detail::numeric_log_i(r.sub, sub_h, pol);
      res.log_i += term.log_i;
      if (term.std_error) {
        se2 += *term.std_error * *term.std_error;
        any_se = true;
      }
      if (term.unstable) res.unstable = true;
    }
    for (std::size_t l = 1; l < decomp.separators.size(); ++l) {
      varset sep = decomp.separators[l];
      if (sep.is_empty()) continue;  // zero-dimensional block: log I = 0
      component_restriction r = restrict_model(m, sep);
      hyperparameters sub_h = restrict_hyper(r, hyper);
      res.log_i -= log_i_decomposable(r.sub, sub_h);
    }
    if (any_se) res.std_error = std::sqrt(se2);
    return res;
  }

  return detail::numeric_log_i(m, hyper, pol);
}

// Component log-normalizer for the Markov-ratio factorization; uses the
// same dispatch and per-component seeds as the assembly in log_i, so the
// two routes produce identical component values.
inline log_normalizer_fn component_normalizer(const evidence_policy& pol = {}) {
  return [pol](const model& sub, const hyperparameters& h) {
    if (model_is_decomposable(sub)) return log_i_decomposable(sub, h);
    return detail::numeric_log_i(sub, h, pol).log_i;
  };
}

// Normalized log-density of the conjugate prior via prime components.
inline double markov_ratio_log_prior(const model& m, const theta_vector& theta,
                                     const hyperparameters& hyper,
                                     const evidence_policy& pol = {}) {
  if (!m.graph) throw domain_error("markov_ratio_log_prior: model has no graph");
  return markov_ratio_log_prior(m, theta, hyper, prime_components(*m.graph),
                                component_normalizer(pol));
}

// ---------------------------------------------------------------------------
// Bayes factors
// ---------------------------------------------------------------------------

// log BF(model1 : model2) = difference of prior-to-posterior evidence
// ratios, each log I(s + y, alpha + n) - log I(s, alpha).
inline double bayes_factor(const model& m1, const model& m2, const hyperparameters& h1,
                           const hyperparameters& h2, const contingency_table& data,
                           const evidence_policy& pol = {}) {
  hyperparameters p1 = posterior_update(m1, h1, data);
  hyperparameters p2 = posterior_update(m2, h2, data);
  double side1 = log_i(m1, p1, pol).log_i - log_i(m1, h1, pol).log_i;
  double side2 = log_i(m2, p2, pol).log_i - log_i(m2, h2, pol).log_i;
  return side1 - side2;
}

namespace detail {

struct block_ratio_term {
  std::uint32_t block_bits;
  int sign;  // +1 component, -1 separator
  std::vector<double> s_prior;
  double alpha_prior;
  std::vector<double> s_post;
  double alpha_post;
  double value = 0.0;  // sign * [log I(post) - log I(prior)], filled lazily
};

inline std::vector<block_ratio_term> block_ratio_terms(const model& m,
                                                       const hyperparameters& prior,
                                                       const hyperparameters& post) {
  if (!m.graph) throw domain_error("edge-local Bayes factor requires graphical models");
  ordered_decomposition decomp = prime_components(*m.graph);
  std::vector<block_ratio_term> out;
  auto push = [&](varset block, int sign) {
    if (block.is_empty()) return;
    component_restriction r = restrict_model(m, block);
    block_ratio_term t;
    t.block_bits = block.bits;
    t.sign = sign;
    hyperparameters a = restrict_hyper(r, prior), b = restrict_hyper(r, post);
    t.s_prior = a.s;
    t.alpha_prior = a.alpha;
    t.s_post = b.s;
    t.alpha_post = b.alpha;
    out.push_back(std::move(t));
  };
  for (varset c : decomp.components) push(c, +1);
  for (std::size_t l = 1; l < decomp.separators.size(); ++l) push(decomp.separators[l], -1);
  return out;
}

}  // namespace detail

// Edge-local Bayes factor for graphical models: prime-component blocks whose
// structure and restricted hyperparameters coincide on both sides cancel and
// are never evaluated; only the blocks touched by the structural difference
// are computed.  Equals bayes_factor exactly.
inline double bayes_factor_edge_local(const model& m1, const model& m2,
                                      const hyperparameters& h1, const hyperparameters& h2,
                                      const contingency_table& data,
                                      const evidence_policy& pol = {}) {
  hyperparameters p1 = posterior_update(m1, h1, data);
  hyperparameters p2 = posterior_update(m2, h2, data);
  std::vector<detail::block_ratio_term> t1 = detail::block_ratio_terms(m1, h1, p1);
  std::vector<detail::block_ratio_term> t2 = detail::block_ratio_terms(m2, h2, p2);

  // cancel identical blocks across the two models
  std::vector<bool> used2(t2.size(), false);
  std::vector<bool> keep1(t1.size(), true);
  for (std::size_t i = 0; i < t1.size(); ++i)
    for (std::size_t j = 0; j < t2.size(); ++j) {
      if (used2[j]) continue;
      if (t1[i].block_bits == t2[j].block_bits && t1[i].sign == t2[j].sign &&
          t1[i].alpha_prior == t2[j].alpha_prior && t1[i].alpha_post == t2[j].alpha_post &&
          t1[i].s_prior == t2[j].s_prior && t1[i].s_post == t2[j].s_post) {
        used2[j] = true;
        keep1[i] = false;
        break;
      }
    }

  auto eval = [&](const model& m, detail::block_ratio_term& t) {
    component_restriction r = restrict_model(m, varset{t.block_bits});
    hyperparameters prior, post;
    prior.alpha = t.alpha_prior;
    prior.s = t.s_prior;
    post.alpha = t.alpha_post;
    post.s = t.s_post;
    evidence_policy sub_pol = pol;
    double term = (model_is_decomposable(r.sub)
                       ? log_i_decomposable(r.sub, post) - log_i_decomposable(r.sub, prior)
                       : detail::numeric_log_i(r.sub, post, sub_pol).log_i -
                             detail::numeric_log_i(r.sub, prior, sub_pol).log_i);
    return t.sign * term;
  };

  double acc = 0.0;
  for (std::size_t i = 0; i < t1.size(); ++i)
    if (keep1[i]) acc += eval(m1, t1[i]);
  for (std::size_t j = 0; j < t2.size(); ++j)
    if (!used2[j]) acc -= eval(m2, t2[j]);
  return acc;
}

// ---------------------------------------------------------------------------
// Prior elicitation moments
// ---------------------------------------------------------------------------

// E[exp(theta_D(i_D))] = I(s + e, alpha) / I(s, alpha) for order 1;
// order 2 returns the variance I(s+2e)/I(s) - (I(s+e)/I(s))^2.
inline double prior_moment_exp_theta(const model& m, const hyperparameters& hyper, varset d,
                                     const cell& star_cell, int order,
                                     const evidence_policy& pol = {}) {
  if (order != 1 && order != 2) throw domain_error("prior_moment_exp_theta: order must be 1 or 2");
  int si = m.set_index(d);
  std::size_t idx = m.theta_index(si, star_cell);

  auto shifted = [&](double inc) {
    hyperparameters h = hyper;
    h.s[idx] += inc;
    return h;
  };
  for (int k = 1; k <= order; ++k) {
    properness_report rep = check_proper(m, shifted((double)k));
    if (!rep.proper)
      throw domain_error("prior_moment_exp_theta: incremented hyperparameters leave the "
                         "properness region (moment does not exist)");
  }

  evidence_policy p1 = pol, p2 = pol;
  p1.seed = splitmix64(pol.seed ^ 0x1ull);
  p2.seed = splitmix64(pol.seed ^ 0x2ull);
  double base = log_i(m, hyper, pol).log_i;
  double first = std::exp(log_i(m, shifted(1.0), p1).log_i - base);
  if (order == 1) return first;
  double second = std::exp(log_i(m, shifted(2.0), p2).log_i - base);
  return second - first * first;
}

}  // namespace loglin
