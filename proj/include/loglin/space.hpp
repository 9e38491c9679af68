#pragma once

// Finite product spaces of categorical variables, cells, dense tables on the
// full space, and marginal tables on a subset of variables.
//
// Conventions used everywhere:
//   * variables keep their declared order; level 0 is the reference level,
//     so the base cell is (0, ..., 0);
//   * full cells are enumerated lexicographically by variable order then
//     level (first variable most significant);
//   * a marginal cell over a scope E is a level vector aligned with the
//     ascending member indices of E;
//   * "star cells" of E are the marginal cells with every coordinate >= 1.

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "loglin/common.hpp"

namespace loglin {

using cell = std::vector<int>;

struct variable_space {
  std::vector<std::string> names;
  std::vector<int> levels;

  variable_space() = default;
  variable_space(std::vector<std::string> names_, std::vector<int> levels_)
      : names(std::move(names_)), levels(std::move(levels_)) {
    validate();
  }

  void validate() const {
    if (names.size() != levels.size())
      throw domain_error("variable_space: names/levels size mismatch");
    if (names.empty()) throw domain_error("variable_space: no variables");
    if ((int)names.size() > kMaxVariables)
      throw domain_error("variable_space: more than 20 variables");
    for (int l : levels)
      if (l < 2) throw domain_error("variable_space: every variable needs >= 2 levels");
    for (std::size_t i = 0; i < names.size(); ++i)
      for (std::size_t j = i + 1; j < names.size(); ++j)
        if (names[i] == names[j])
          throw domain_error("variable_space: duplicate variable name '" + names[i] + "'");
  }

  int num_variables() const { return (int)levels.size(); }
  varset all_vars() const { return varset::full(num_variables()); }

  std::size_t num_cells() const {
    std::size_t n = 1;
    for (int l : levels) n *= (std::size_t)l;
    return n;
  }

  int index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return (int)i;
    throw domain_error("unknown variable '" + name + "'");
  }

  // Lexicographic cell codec (first variable most significant).
  std::size_t encode(const cell& c) const {
    std::size_t idx = 0;
    for (int k = 0; k < num_variables(); ++k) {
      if (c[k] < 0 || c[k] >= levels[k]) throw domain_error("cell level out of range");
      idx = idx * (std::size_t)levels[k] + (std::size_t)c[k];
    }
    return idx;
  }

  cell decode(std::size_t idx) const {
    cell c(num_variables());
    for (int k = num_variables() - 1; k >= 0; --k) {
      c[k] = (int)(idx % (std::size_t)levels[k]);
      idx /= (std::size_t)levels[k];
    }
    return c;
  }

  cell base_cell() const { return cell(num_variables(), 0); }
};

// ---------------------------------------------------------------------------
// Marginal cells over a scope
// ---------------------------------------------------------------------------

// Codec for marginal cells over `scope` (levels of the member variables, in
// ascending index order).  Enumerates both the full marginal space I_E and
// the star cells I_E^* (all coordinates nonzero).
struct scope_codec {
  std::vector<int> vars;    // ascending member indices
  std::vector<int> levels;  // matching levels

  scope_codec(const variable_space& space, varset scope) {
    vars = scope.members();
    levels.reserve(vars.size());
    for (int v : vars) levels.push_back(space.levels[v]);
  }

  int arity() const { return (int)vars.size(); }

  std::size_t num_cells() const {
    std::size_t n = 1;
    for (int l : levels) n *= (std::size_t)l;
    return n;
  }

  std::size_t num_star_cells() const {
    std::size_t n = 1;
    for (int l : levels) n *= (std::size_t)(l - 1);
    return n;
  }

  std::size_t encode(const cell& c) const {
    std::size_t idx = 0;
    for (int k = 0; k < arity(); ++k) {
      if (c[k] < 0 || c[k] >= levels[k]) throw domain_error("marginal cell level out of range");
      idx = idx * (std::size_t)levels[k] + (std::size_t)c[k];
    }
    return idx;
  }

  cell decode(std::size_t idx) const {
    cell c(arity());
    for (int k = arity() - 1; k >= 0; --k) {
      c[k] = (int)(idx % (std::size_t)levels[k]);
      idx /= (std::size_t)levels[k];
    }
    return c;
  }

  // Star cells use digits 1..level-1; index is mixed-radix over (level-1).
  std::size_t encode_star(const cell& c) const {
    std::size_t idx = 0;
    for (int k = 0; k < arity(); ++k) {
      if (c[k] < 1 || c[k] >= levels[k])
        throw domain_error("star cell has a zero or out-of-range coordinate");
      idx = idx * (std::size_t)(levels[k] - 1) + (std::size_t)(c[k] - 1);
    }
    return idx;
  }

  cell decode_star(std::size_t idx) const {
    cell c(arity());
    for (int k = arity() - 1; k >= 0; --k) {
      c[k] = 1 + (int)(idx % (std::size_t)(levels[k] - 1));
      idx /= (std::size_t)(levels[k] - 1);
    }
    return c;
  }

  // Restriction of a full cell to this scope.
  cell restrict_full(const cell& full) const {
    cell c(arity());
    for (int k = 0; k < arity(); ++k) c[k] = full[vars[k]];
    return c;
  }

  bool full_cell_is_star_here(const cell& full) const {
    for (int v : vars)
      if (full[v] == 0) return false;
    return true;
  }

  // Embeds a marginal cell into a full cell, zero elsewhere.
  cell embed(const cell& marginal, int num_variables) const {
    cell full(num_variables, 0);
    for (int k = 0; k < arity(); ++k) full[vars[k]] = marginal[k];
    return full;
  }
};

// Star cells of E in lexicographic order.
inline std::vector<cell> marginal_star_cells(const variable_space& space, varset scope) {
  scope_codec codec(space, scope);
  std::vector<cell> out;
  std::size_t n = codec.num_star_cells();
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(codec.decode_star(i));
  return out;
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

// Dense table of reals over the full cell space (counts, pseudo-counts or
// probabilities; semantics are the caller's).
struct contingency_table {
  variable_space space;
  std::vector<double> values;  // indexed by space.encode

  contingency_table() = default;
  explicit contingency_table(variable_space sp, double fill = 0.0)
      : space(std::move(sp)), values(space.num_cells(), fill) {}

  double& at(const cell& c) { return values[space.encode(c)]; }
  double at(const cell& c) const { return values[space.encode(c)]; }

  double total() const { return std::accumulate(values.begin(), values.end(), 0.0); }

  bool all_positive() const {
    for (double v : values)
      if (!(v > 0.0)) return false;
    return true;
  }
};

// Dense table over all cells of I_E for a scope E.
struct marginal_table {
  varset scope;
  scope_codec codec;
  std::vector<double> values;

  marginal_table(const variable_space& space, varset scope_)
      : scope(scope_), codec(space, scope_), values(codec.num_cells(), 0.0) {}

  double& at(const cell& c) { return values[codec.encode(c)]; }
  double at(const cell& c) const { return values[codec.encode(c)]; }
};

// n(i_E) = sum over full cells agreeing with i_E on E.
inline marginal_table marginalize(const contingency_table& table, varset scope) {
  marginal_table out(table.space, scope);
  const std::size_t n = table.space.num_cells();
  for (std::size_t idx = 0; idx < n; ++idx) {
    cell full = table.space.decode(idx);
    out.values[out.codec.encode(out.codec.restrict_full(full))] += table.values[idx];
  }
  return out;
}

}  // namespace loglin
