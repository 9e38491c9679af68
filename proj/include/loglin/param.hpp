#pragma once

// The corner-point log-linear parametrization and its inverse.
//
// For a cell i and interaction set D, the parameter is the alternating sum
//   theta_D(i_D) = sum_{F subset D} (-1)^{|D \ F|} log p(i_F, 0 elsewhere),
// which vanishes whenever some coordinate of i_D is zero; the free
// coordinates are therefore indexed by star cells.  Inversely,
//   p(i) = exp(sum of theta over active sets at i) / exp(k(theta)),
// where a set D is active at i when D is in the family and i is nonzero
// throughout D, and k is the log-partition function.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "loglin/common.hpp"
#include "loglin/model.hpp"
#include "loglin/space.hpp"

namespace loglin {

// Free log-linear parameters, indexed by the model's theta layout.
struct theta_vector {
  std::vector<double> v;

  theta_vector() = default;
  explicit theta_vector(std::size_t dim, double fill = 0.0) : v(dim, fill) {}
  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }
  std::size_t size() const { return v.size(); }
};

// Probabilities of the free cells: the base cell and, per (D, i_D) in the
// theta layout, the cell equal to i_D on D and zero elsewhere.
struct free_prob_vector {
  double p_base = 0.0;
  std::vector<double> v;
};

// Strictly positive probability table over the full cell space.
struct full_prob_table {
  variable_space space;
  std::vector<double> p;

  full_prob_table() = default;
  explicit full_prob_table(variable_space sp, double fill = 0.0)
      : space(std::move(sp)), p(space.num_cells(), fill) {}

  double& at(const cell& c) { return p[space.encode(c)]; }
  double at(const cell& c) const { return p[space.encode(c)]; }
};

// ---------------------------------------------------------------------------
// Cell activity
// ---------------------------------------------------------------------------

namespace detail {

// Support of a full cell: variables at a nonzero level.
inline varset support_of(const cell& c) {
  varset s;
  for (std::size_t k = 0; k < c.size(); ++k)
    if (c[k] != 0) s |= varset::single((int)k);
  return s;
}

// Theta indices active at a full cell: sets D in the family with D inside
// the support of the cell, addressed at the cell's restriction.
inline void active_indices(const model& m, const cell& c, std::vector<std::size_t>& out) {
  out.clear();
  for_each_subset(support_of(c), [&](varset d) {
    if (d.is_empty() || !m.in_family(d)) return;
    int si = m.set_index(d);
    out.push_back(m.offsets[si] + m.codecs[si].encode_star(m.codecs[si].restrict_full(c)));
  });
}

}  // namespace detail

// Sum of active theta coordinates per full cell (the unnormalized
// log-probability relative to the base cell).
inline std::vector<double> cell_exponents(const model& m, const theta_vector& theta) {
  if (theta.size() != m.theta_dim) throw domain_error("theta dimension mismatch");
  const std::size_t n = m.space.num_cells();
  std::vector<double> expo(n, 0.0);
  std::vector<std::size_t> act;
  for (std::size_t idx = 0; idx < n; ++idx) {
    cell c = m.space.decode(idx);
    detail::active_indices(m, c, act);
    double s = 0.0;
    for (std::size_t t : act) s += theta.v[t];
    expo[idx] = s;
  }
  return expo;
}

// k(theta): log of 1 + sum over non-base cells of exp(exponent).
inline double log_partition(const model& m, const theta_vector& theta) {
  return log_sum_exp(cell_exponents(m, theta));
}

inline full_prob_table full_from_theta(const model& m, const theta_vector& theta) {
  std::vector<double> expo = cell_exponents(m, theta);
  double logz = log_sum_exp(expo);
  full_prob_table out(m.space);
  for (std::size_t i = 0; i < expo.size(); ++i) out.p[i] = std::exp(expo[i] - logz);
  return out;
}

// ---------------------------------------------------------------------------
// Moebius inversion: table -> theta
// ---------------------------------------------------------------------------

namespace detail {

// log p of the cell that equals `marginal` on `scope` and zero elsewhere.
inline double log_corner(const full_prob_table& table, const scope_codec& codec,
                         const cell& marginal) {
  double p = table.at(codec.embed(marginal, table.space.num_variables()));
  if (!(p > 0.0)) throw domain_error("probability table has a nonpositive corner cell");
  return std::log(p);
}

// theta_D(i_D) for an arbitrary scope D (not necessarily in the family).
inline double theta_term_from_full(const full_prob_table& table, const variable_space& space,
                                   varset d, const cell& star_cell) {
  scope_codec codec(space, d);
  double acc = 0.0;
  for_each_subset(d, [&](varset f) {
    // restriction of the star cell to f, as a marginal cell of scope d
    cell sub(codec.arity(), 0);
    std::vector<int> fv = f.members();
    std::size_t fi = 0;
    for (int k = 0; k < codec.arity(); ++k) {
      if (fi < fv.size() && codec.vars[k] == fv[fi]) {
        sub[k] = star_cell[k];
        ++fi;
      }
    }
    int sign = ((d.size() - f.size()) % 2 == 0) ? 1 : -1;
    acc += sign * log_corner(table, codec, sub);
  });
  return acc;
}

}  // namespace detail

// Moebius inversion of a strictly positive table onto the model's free
// parameters.  With strict=true, also verifies that every out-of-family
// alternating sum vanishes within `tol` (the table then lies in the model).
inline theta_vector theta_from_full(const model& m, const full_prob_table& table,
                                    bool strict = false, double tol = 1e-8) {
  if (table.space.num_cells() != m.space.num_cells())
    throw domain_error("theta_from_full: table/model space mismatch");
  theta_vector theta(m.theta_dim);
  for (int si = 0; si < m.num_sets(); ++si) {
    const scope_codec& codec = m.codecs[si];
    const std::size_t ns = codec.num_star_cells();
    for (std::size_t s = 0; s < ns; ++s) {
      cell star = codec.decode_star(s);
      theta.v[m.offsets[si] + s] =
          detail::theta_term_from_full(table, m.space, m.interactions[si], star);
    }
  }
  if (strict) {
    for_each_subset(m.space.all_vars(), [&](varset e) {
      if (e.is_empty() || m.in_family(e)) return;
      scope_codec codec(m.space, e);
      const std::size_t ns = codec.num_star_cells();
      for (std::size_t s = 0; s < ns; ++s) {
        double t = detail::theta_term_from_full(table, m.space, e, codec.decode_star(s));
        if (std::abs(t) > tol)
          throw domain_error("table has a nonzero interaction outside the model");
      }
    });
  }
  return theta;
}

// ---------------------------------------------------------------------------
// Free-probability vector <-> theta / table
// ---------------------------------------------------------------------------

inline free_prob_vector free_from_full(const model& m, const full_prob_table& table) {
  free_prob_vector out;
  out.p_base = table.at(m.space.base_cell());
  out.v.resize(m.theta_dim);
  for (int si = 0; si < m.num_sets(); ++si) {
    const scope_codec& codec = m.codecs[si];
    for (std::size_t s = 0; s < codec.num_star_cells(); ++s)
      out.v[m.offsets[si] + s] =
          table.at(codec.embed(codec.decode_star(s), m.space.num_variables()));
  }
  return out;
}

// Moebius inversion using only the free cells.
inline theta_vector theta_from_free(const model& m, const free_prob_vector& fp) {
  if (fp.v.size() != m.theta_dim) throw domain_error("free vector dimension mismatch");
  if (!(fp.p_base > 0.0)) throw domain_error("base-cell probability must be positive");
  double log_base = std::log(fp.p_base);
  theta_vector theta(m.theta_dim);
  for (int si = 0; si < m.num_sets(); ++si) {
    varset d = m.interactions[si];
    const scope_codec& codec = m.codecs[si];
    for (std::size_t s = 0; s < codec.num_star_cells(); ++s) {
      cell star = codec.decode_star(s);
      double acc = 0.0;
      for_each_subset(d, [&](varset f) {
        int sign = ((d.size() - f.size()) % 2 == 0) ? 1 : -1;
        if (f.is_empty()) {
          acc += sign * log_base;
          return;
        }
        int fi = m.set_index(f);  // downward closure guarantees membership
        const scope_codec& fcodec = m.codecs[fi];
        cell sub(fcodec.arity());
        for (int k = 0; k < fcodec.arity(); ++k) {
          int pos = 0;
          while (codec.vars[pos] != fcodec.vars[k]) ++pos;
          sub[k] = star[pos];
        }
        double p = fp.v[m.offsets[fi] + fcodec.encode_star(sub)];
        if (!(p > 0.0)) throw domain_error("free-cell probability must be positive");
        acc += sign * std::log(p);
      });
      theta.v[m.offsets[si] + s] = acc;
    }
  }
  return theta;
}

inline free_prob_vector free_from_theta(const model& m, const theta_vector& theta) {
  return free_from_full(m, full_from_theta(m, theta));
}

// Completion of a free-probability vector to the full table implied by the
// model.  The completion must normalize on its own: if the resulting total
// differs from 1 by more than `tol`, the free probabilities are inconsistent.
inline full_prob_table complete_cells(const model& m, const free_prob_vector& fp,
                                      double tol = 1e-10) {
  theta_vector theta = theta_from_free(m, fp);
  std::vector<double> expo = cell_exponents(m, theta);
  full_prob_table out(m.space);
  double total = 0.0;
  for (std::size_t i = 0; i < expo.size(); ++i) {
    out.p[i] = fp.p_base * std::exp(expo[i]);
    total += out.p[i];
  }
  if (std::abs(total - 1.0) > tol)
    throw domain_error("free probabilities are inconsistent: completion sums to " +
                       std::to_string(total));
  return out;
}

// ---------------------------------------------------------------------------
// Mean map and sufficient-statistic covariance
// ---------------------------------------------------------------------------

// Marginal star probabilities m(D, i_D) = P(X_D = i_D), stacked like theta.
inline std::vector<double> mean_map(const model& m, const theta_vector& theta) {
  full_prob_table table = full_from_theta(m, theta);
  std::vector<double> mean(m.theta_dim, 0.0);
  std::vector<std::size_t> act;
  for (std::size_t idx = 0; idx < table.p.size(); ++idx) {
    cell c = m.space.decode(idx);
    detail::active_indices(m, c, act);
    for (std::size_t t : act) mean[t] += table.p[idx];
  }
  return mean;
}

// Covariance of the sufficient-statistic indicators under p(theta); this is
// the Hessian of the log-partition function.
inline Eigen::MatrixXd sufficient_stat_covariance(const model& m, const full_prob_table& table) {
  const std::size_t d = m.theta_dim;
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero((Eigen::Index)d, (Eigen::Index)d);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero((Eigen::Index)d);
  std::vector<std::size_t> act;
  for (std::size_t idx = 0; idx < table.p.size(); ++idx) {
    cell c = m.space.decode(idx);
    detail::active_indices(m, c, act);
    double p = table.p[idx];
    for (std::size_t a : act) {
      mean((Eigen::Index)a) += p;
      for (std::size_t b : act) second((Eigen::Index)a, (Eigen::Index)b) += p;
    }
  }
  return second - mean * mean.transpose();
}

// ---------------------------------------------------------------------------
// Sufficient statistics of data and the multinomial log-likelihood
// ---------------------------------------------------------------------------

// y(D, i_D) = n(i_D) for star cells, stacked like theta.
inline std::vector<double> sufficient_stats(const model& m, const contingency_table& data) {
  if (data.space.num_cells() != m.space.num_cells())
    throw domain_error("sufficient_stats: table/model space mismatch");
  std::vector<double> y(m.theta_dim, 0.0);
  std::vector<std::size_t> act;
  for (std::size_t idx = 0; idx < data.values.size(); ++idx) {
    if (data.values[idx] == 0.0) continue;
    cell c = data.space.decode(idx);
    detail::active_indices(m, c, act);
    for (std::size_t t : act) y[t] += data.values[idx];
  }
  return y;
}

// Multinomial log-likelihood up to the multinomial coefficient:
// <y, theta> - n k(theta).
inline double log_likelihood(const model& m, const theta_vector& theta,
                             const contingency_table& data) {
  std::vector<double> y = sufficient_stats(m, data);
  double dot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) dot += y[i] * theta.v[i];
  return dot - data.total() * log_partition(m, theta);
}

}  // namespace loglin
