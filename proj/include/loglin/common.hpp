#pragma once

// Shared primitives: variable index sets as bitmasks, canonical orderings,
// stable numeric helpers, and the error taxonomy used across the library.

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>
#include <algorithm>
#include <cmath>
#include <limits>

namespace loglin {

// Thrown for structurally invalid inputs: improper priors, nonpositive
// tables, undecomposable models passed to closed-form routines, etc.
class domain_error : public std::runtime_error {
 public:
  explicit domain_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown for numerical failures: optimizer divergence, singular Hessians,
// overflow.  CLI maps these to a distinct exit code under --strict.
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown for malformed files / inconsistent metadata (usage-level failures).
class parse_error : public std::runtime_error {
 public:
  explicit parse_error(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// varset: a subset of variables, encoded as a bitmask over variable indices.
// The library caps the number of variables at 20, so 32 bits suffice.
// ---------------------------------------------------------------------------

inline constexpr int kMaxVariables = 20;

struct varset {
  std::uint32_t bits = 0;

  constexpr varset() = default;
  constexpr explicit varset(std::uint32_t b) : bits(b) {}

  static constexpr varset empty() { return varset{0}; }
  static constexpr varset single(int v) { return varset{std::uint32_t{1} << v}; }
  static constexpr varset full(int n) {
    return varset{n == 0 ? 0u : (n >= 32 ? ~0u : ((std::uint32_t{1} << n) - 1u))};
  }

  constexpr bool contains(int v) const { return (bits >> v) & 1u; }
  constexpr bool is_empty() const { return bits == 0; }
  constexpr int size() const { return std::popcount(bits); }
  constexpr bool subset_of(varset other) const { return (bits & ~other.bits) == 0; }
  constexpr bool intersects(varset other) const { return (bits & other.bits) != 0; }

  constexpr varset operator|(varset o) const { return varset{bits | o.bits}; }
  constexpr varset operator&(varset o) const { return varset{bits & o.bits}; }
  // set difference
  constexpr varset operator-(varset o) const { return varset{bits & ~o.bits}; }
  constexpr bool operator==(const varset&) const = default;

  varset& operator|=(varset o) { bits |= o.bits; return *this; }
  varset& operator&=(varset o) { bits &= o.bits; return *this; }

  // Ascending member indices.
  std::vector<int> members() const {
    std::vector<int> out;
    out.reserve(size());
    for (std::uint32_t b = bits; b != 0; b &= b - 1)
      out.push_back(std::countr_zero(b));
    return out;
  }

  int lowest() const { return std::countr_zero(bits); }
};

// Canonical ordering of subsets: by cardinality, then lexicographically on
// the ascending sequence of member indices (declared variable order).
inline bool canonical_less(varset a, varset b) {
  int sa = a.size(), sb = b.size();
  if (sa != sb) return sa < sb;
  std::uint32_t x = a.bits, y = b.bits;
  while (x != 0 && y != 0) {
    int i = std::countr_zero(x), j = std::countr_zero(y);
    if (i != j) return i < j;
    x &= x - 1;
    y &= y - 1;
  }
  return false;  // equal
}

struct canonical_order {
  bool operator()(varset a, varset b) const { return canonical_less(a, b); }
};

// Visits every subset of `mask` (including empty and mask itself).
template <typename F>
void for_each_subset(varset mask, F&& fn) {
  std::uint32_t m = mask.bits;
  std::uint32_t sub = m;
  while (true) {
    fn(varset{sub});
    if (sub == 0) break;
    sub = (sub - 1) & m;
  }
}

// All subsets of `mask` in canonical order.
inline std::vector<varset> subsets_canonical(varset mask) {
  std::vector<varset> out;
  for_each_subset(mask, [&](varset s) { out.push_back(s); });
  std::sort(out.begin(), out.end(), canonical_order{});
  return out;
}

// ---------------------------------------------------------------------------
// Numeric helpers
// ---------------------------------------------------------------------------

inline double log_sum_exp(const std::vector<double>& xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - m);
  return m + std::log(acc);
}

// splitmix64: used to derive independent per-chunk RNG seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace loglin
