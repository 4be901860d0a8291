#pragma once

// Small fixture MDPs and brute-force oracles shared by the test binaries.
// The oracles deliberately avoid the library's linear-algebra paths.

#include <cmath>
#include <vector>

#include "amdp/corpus.hpp"
#include "amdp/mdp.hpp"
#include "amdp/solvers.hpp"

namespace fixtures {

using amdp::RewardTable;
using amdp::RowMatrix;
using amdp::TabularMdp;

inline TabularMdp make(std::size_t S, std::size_t A,
                       const std::vector<std::vector<std::vector<double>>>& P,
                       const std::vector<std::vector<double>>& r) {
  RowMatrix T = RowMatrix::Zero(static_cast<Eigen::Index>(S * A), static_cast<Eigen::Index>(S));
  RewardTable R(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(A));
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      for (std::size_t t = 0; t < S; ++t) {
        T(static_cast<Eigen::Index>(s * A + a), static_cast<Eigen::Index>(t)) = P[s][a][t];
      }
      R(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) = r[s][a];
    }
  }
  return TabularMdp(S, A, std::move(T), std::move(R));
}

/// 0 -> 1 -> 0 with r = (1, 0).
inline TabularMdp cycle() { return make(2, 1, {{{0, 1}}, {{1, 0}}}, {{1}, {0}}); }

inline TabularMdp self_loop(double r) { return make(1, 1, {{{1}}}, {{r}}); }

/// x = 0, y = 1: p(y|x) = 1/D, p(x|y) = 1, r = (1, 0).
inline TabularMdp two_state_chain(double D) {
  return make(2, 1, {{{1 - 1 / D, 1 / D}}, {{1, 0}}}, {{1}, {0}});
}

/// The cycle plus a "stay" action at state 0 with reward 0.6.
inline TabularMdp stay_or_cycle() {
  return make(2, 2, {{{0, 1}, {1, 0}}, {{1, 0}, {1, 0}}}, {{1, 0.6}, {0, 0}});
}

inline std::vector<amdp::CorpusEntry> small_corpus(std::size_t count, std::uint64_t seed = 7) {
  return amdp::random_corpus({count, 6, 4, seed});
}

/// Cesaro oracle for the bias: average over T = 1..n of V_T - T rho, with
/// V_T from plain forward recursion.
inline amdp::Vector cesaro_bias(const amdp::InducedChain& chain, const amdp::Vector& rho,
                                std::size_t n) {
  const auto S = chain.reward.size();
  amdp::Vector v = amdp::Vector::Zero(S);
  amdp::Vector acc = amdp::Vector::Zero(S);
  for (std::size_t T = 1; T <= n; ++T) {
    v = chain.reward + chain.matrix * v;
    acc += v - static_cast<double>(T) * rho;
  }
  return acc / static_cast<double>(n);
}

/// Fixed-point iteration of the discounted evaluation operator.
inline amdp::Vector iterate_discounted(const amdp::InducedChain& chain, double gamma,
                                       double tol = 1e-13) {
  amdp::Vector v = amdp::Vector::Zero(chain.reward.size());
  for (;;) {
    const amdp::Vector next = chain.reward + gamma * chain.matrix * v;
    if ((next - v).cwiseAbs().maxCoeff() <= tol) return next;
    v = next;
  }
}

/// Cesaro limit of P^t by averaging powers; a limiting-matrix oracle.
inline amdp::Matrix cesaro_limit(const amdp::Matrix& P, std::size_t n) {
  amdp::Matrix Pt = amdp::Matrix::Identity(P.rows(), P.cols());
  amdp::Matrix acc = amdp::Matrix::Zero(P.rows(), P.cols());
  for (std::size_t t = 0; t < n; ++t) {
    acc += Pt;
    Pt = Pt * P;
  }
  return acc / static_cast<double>(n);
}

/// Exact mixing time of one chain by matrix powers against a supplied limit.
inline double power_mixing_time(const amdp::Matrix& P, const amdp::Matrix& limit,
                                std::size_t cap = 100000) {
  amdp::Matrix Pt = P;
  for (std::size_t t = 1; t <= cap; ++t) {
    double worst = 0.0;
    for (Eigen::Index s = 0; s < P.rows(); ++s) {
      worst = std::max(worst, (Pt.row(s) - limit.row(s)).cwiseAbs().sum());
    }
    if (worst <= 0.5) return static_cast<double>(t);
    Pt = Pt * P;
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace fixtures
