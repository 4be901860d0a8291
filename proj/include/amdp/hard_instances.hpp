#pragma once

// Lower-bound instance family: two-state components hung from the leaves of
// an A'-ary tree (M0), with a_1 made uniquely good at every component (M1)
// or a_l made uniquely good at component k (M_{k,l}).
//
// Admissibility enforces eps <= 1/32. The body of the construction is stated
// for eps <= 1/16, the accompanying lower-bound analysis for eps <= 1/32; the
// stricter bound keeps both applicable.
//
// State layout for S = n + 2K (n tree nodes, K components):
//   0 .. n-1          internal tree nodes in breadth-first order (0 = root)
//   n .. n+K-1        x_1 .. x_K (the tree leaves)
//   n+K .. n+2K-1     y_1 .. y_K
// Actions 0 .. A'-1 are the component actions a_1 .. a_A' at x and y states.
// At x states action A-1 moves to the parent; at y states it is a self-loop.
// At internal nodes actions 0..c-1 move to the c children, the next one to
// the parent (non-root only), and the rest are self-loops.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "amdp/mdp.hpp"

namespace amdp {

enum class HardVariant { M0, M1, MKL };

inline std::string to_string(HardVariant v) {
  switch (v) {
    case HardVariant::M0: return "M0";
    case HardVariant::M1: return "M1";
    case HardVariant::MKL: return "MKL";
  }
  return "?";
}

inline HardVariant parse_variant(const std::string& s) {
  if (s == "M0") return HardVariant::M0;
  if (s == "M1") return HardVariant::M1;
  if (s == "MKL") return HardVariant::MKL;
  throw ValidationError("unknown variant '" + s + "' (expected M0, M1 or MKL)");
}

struct HardInstanceSpec {
  std::size_t S = 6;
  std::size_t A = 3;
  double D = 32.0;
  double epsilon = 1.0 / 32.0;
  HardVariant variant = HardVariant::M1;
  /// 1-based component and action indices for MKL.
  std::size_t k = 1;
  std::size_t l = 2;

  std::size_t a_prime() const { return A - 1; }
  double d_prime() const { return D / 8.0; }
  std::size_t K() const { return (S + 2) / 3; }
  std::size_t tree_nodes() const { return S - 2 * K(); }

  std::size_t x_state(std::size_t comp) const { return tree_nodes() + comp - 1; }
  std::size_t y_state(std::size_t comp) const { return tree_nodes() + K() + comp - 1; }
};

/// ceil(log_A S) in exact integer arithmetic.
inline std::size_t ceil_log(std::size_t base, std::size_t value) {
  std::size_t k = 0;
  std::uint64_t power = 1;
  while (power < value) {
    power *= base;
    ++k;
  }
  return k;
}

/// Throws ValidationError naming the failed admissibility condition.
inline void validate_spec(const HardInstanceSpec& spec) {
  if (spec.A < 3) throw ValidationError("hard instance needs A >= 3");
  const double d_min = std::max(16.0 * static_cast<double>(ceil_log(spec.A, spec.S)), 16.0);
  if (!(spec.D >= d_min)) {
    throw ValidationError("hard instance needs D >= max{16 ceil(log_A S), 16} = " +
                          std::to_string(d_min));
  }
  if (!(spec.epsilon > 0.0 && spec.epsilon <= 1.0 / 32.0)) {
    throw ValidationError("hard instance needs 0 < epsilon <= 1/32");
  }
  const std::size_t K = spec.K();
  if (spec.S < 2 * K + 1) {
    throw ValidationError("S = " + std::to_string(spec.S) +
                          " leaves no room for a tree node (need S - 2 ceil(S/3) >= 1)");
  }
  const std::size_t n = spec.tree_nodes();
  if (n + K - 1 > n * spec.a_prime()) {
    throw ValidationError("no " + std::to_string(spec.a_prime()) + "-ary tree has " +
                          std::to_string(n) + " internal nodes and " + std::to_string(K) +
                          " leaves");
  }
  if (spec.variant == HardVariant::MKL) {
    if (spec.k < 1 || spec.k > K) throw ValidationError("k must lie in [1, K]");
    if (spec.l < 2 || spec.l > spec.a_prime()) throw ValidationError("l must lie in [2, A']");
  }
}

/// Two states {x, y}; every action crosses with probability
/// (1 + 8 eps)/D' and stays otherwise; r(x) = 1, r(y) = 0.
inline TabularMdp component_mdp(double d_prime, double epsilon, std::size_t a_prime) {
  const double q = (1.0 + 8.0 * epsilon) / d_prime;
  if (!(q > 0.0 && q <= 1.0)) throw ValidationError("component crossing probability outside (0,1]");
  if (a_prime == 0) throw ValidationError("component needs at least one action");
  const auto A = static_cast<Eigen::Index>(a_prime);
  RowMatrix P(2 * A, 2);
  RewardTable r(2, A);
  for (Eigen::Index a = 0; a < A; ++a) {
    P.row(a) << 1.0 - q, q;
    P.row(A + a) << q, 1.0 - q;
    r(0, a) = 1.0;
    r(1, a) = 0.0;
  }
  return TabularMdp(2, a_prime, std::move(P), std::move(r),
                    {{"name", "component"}, {"D_prime", d_prime}, {"epsilon", epsilon}});
}

/// Stationary mass of x in a two-state chain, which is the gain when
/// r(x) = 1 and r(y) = 0.
inline double closed_form_component_gain(double q_xy, double q_yx) {
  if (!(q_xy >= 0.0 && q_yx >= 0.0) || q_xy + q_yx == 0.0) {
    throw ValidationError("component gain needs nonnegative rates, not both zero");
  }
  return q_yx / (q_xy + q_yx);
}

/// children[i] of the breadth-first tree with n internal nodes, K leaves,
/// fan-out <= a_prime. Nodes 0..n-1 are internal, n..n+K-1 leaves.
inline std::vector<std::vector<std::size_t>> build_tree(std::size_t n, std::size_t K,
                                                        std::size_t a_prime) {
  std::vector<std::vector<std::size_t>> children(n);
  std::size_t remaining = n + K - 1;  // edges still to place
  std::size_t next_child = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t later = n - 1 - i;  // every later internal node keeps >= 1 child
    const std::size_t c = std::min(a_prime, remaining - later);
    for (std::size_t j = 0; j < c; ++j) children[i].push_back(next_child++);
    remaining -= c;
  }
  return children;
}

namespace detail {

inline void set_deterministic(RowMatrix& P, std::size_t A, std::size_t s, std::size_t a,
                              std::size_t target) {
  const auto r = static_cast<Eigen::Index>(s * A + a);
  P.row(r).setZero();
  P(r, static_cast<Eigen::Index>(target)) = 1.0;
}

/// Crossing probability `q`; the staying mass is 1 - q so the row is exact.
inline void set_crossing(RowMatrix& P, std::size_t A, std::size_t s, std::size_t a,
                         std::size_t other, double q) {
  const auto r = static_cast<Eigen::Index>(s * A + a);
  P.row(r).setZero();
  P(r, static_cast<Eigen::Index>(other)) = q;
  P(r, static_cast<Eigen::Index>(s)) = 1.0 - q;
}

inline nlohmann::json spec_metadata(const HardInstanceSpec& spec) {
  nlohmann::json meta{{"name", "hard_" + to_string(spec.variant)},
                      {"S", spec.S},
                      {"A", spec.A},
                      {"D", spec.D},
                      {"epsilon", spec.epsilon},
                      {"variant", to_string(spec.variant)}};
  if (spec.variant == HardVariant::MKL) {
    meta["k"] = spec.k;
    meta["l"] = spec.l;
  }
  return meta;
}

}  // namespace detail

inline TabularMdp build_m0(const HardInstanceSpec& spec) {
  validate_spec(spec);
  const std::size_t S = spec.S, A = spec.A, K = spec.K(), n = spec.tree_nodes();
  const double q = (1.0 + 8.0 * spec.epsilon) / spec.d_prime();

  RowMatrix P = RowMatrix::Zero(static_cast<Eigen::Index>(S * A), static_cast<Eigen::Index>(S));
  RewardTable r = RewardTable::Zero(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(A));

  const auto children = build_tree(n, K, spec.a_prime());
  std::vector<std::size_t> parent(n + K, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c : children[i]) parent[c] = i;
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t a = 0;
    for (std::size_t c : children[i]) detail::set_deterministic(P, A, i, a++, c);
    if (i != 0) detail::set_deterministic(P, A, i, a++, parent[i]);
    for (; a < A; ++a) detail::set_deterministic(P, A, i, a, i);
  }
  for (std::size_t comp = 1; comp <= K; ++comp) {
    const std::size_t x = spec.x_state(comp), y = spec.y_state(comp);
    for (std::size_t a = 0; a < spec.a_prime(); ++a) {
      detail::set_crossing(P, A, x, a, y, q);
      detail::set_crossing(P, A, y, a, x, q);
      r(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(a)) = 1.0;
    }
    detail::set_deterministic(P, A, x, A - 1, parent[x]);
    detail::set_deterministic(P, A, y, A - 1, y);
  }
  return TabularMdp(S, A, std::move(P), std::move(r), detail::spec_metadata(spec));
}

inline TabularMdp build_m1(const HardInstanceSpec& spec) {
  HardInstanceSpec base = spec;
  base.variant = HardVariant::M1;
  const TabularMdp m0 = build_m0(base);
  RowMatrix P = m0.transitions();
  for (std::size_t comp = 1; comp <= spec.K(); ++comp) {
    detail::set_crossing(P, spec.A, spec.x_state(comp), 0, spec.y_state(comp),
                         1.0 / spec.d_prime());
  }
  return TabularMdp(spec.S, spec.A, std::move(P), m0.rewards(), detail::spec_metadata(base));
}

inline TabularMdp build_mkl(const HardInstanceSpec& spec, std::size_t k, std::size_t l) {
  HardInstanceSpec s = spec;
  s.variant = HardVariant::MKL;
  s.k = k;
  s.l = l;
  validate_spec(s);
  const TabularMdp m1 = build_m1(s);
  RowMatrix P = m1.transitions();
  detail::set_crossing(P, s.A, s.x_state(k), l - 1, s.y_state(k),
                       (1.0 - 8.0 * s.epsilon) / s.d_prime());
  return TabularMdp(s.S, s.A, std::move(P), m1.rewards(), detail::spec_metadata(s));
}

inline TabularMdp build_hard_instance(const HardInstanceSpec& spec) {
  switch (spec.variant) {
    case HardVariant::M0: return build_m0(spec);
    case HardVariant::M1: return build_m1(spec);
    case HardVariant::MKL: return build_mkl(spec, spec.k, spec.l);
  }
  throw ValidationError("unknown variant");
}

}  // namespace amdp
