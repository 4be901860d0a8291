#pragma once

// Exact planning: discounted evaluation and control, finite-horizon values,
// average-reward gain/bias and average-reward optimal solutions.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "amdp/chain.hpp"
#include "amdp/mdp.hpp"

namespace amdp {

inline void check_discount(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("gamma must lie in (0,1)");
}

// ---------------------------------------------------------------------------
// Discounted

/// V = (I - gamma P_pi)^{-1} r_pi.
inline ValueVector dmdp_chain_value(const InducedChain& chain, double gamma) {
  check_discount(gamma);
  const auto n = chain.matrix.rows();
  const Matrix A = Matrix::Identity(n, n) - gamma * chain.matrix;
  Vector v = A.partialPivLu().solve(chain.reward);
  if (!v.allFinite() || (A * v - chain.reward).cwiseAbs().maxCoeff() > 1e-10) {
    throw SolverError("discounted policy evaluation: linear solve failed");
  }
  return v;
}

inline ValueVector dmdp_policy_value(const TabularMdp& m, const Policy& pi, double gamma) {
  return dmdp_chain_value(induce_chain(m, pi), gamma);
}

/// One Bellman backup: Q(s,a) = r(s,a) + gamma * P(.|s,a)^T v.
inline QTable bellman_q(const TabularMdp& m, const Vector& v, double gamma) {
  const Vector pv = m.transitions() * v;
  QTable q = m.rewards();
  const auto A = static_cast<Eigen::Index>(m.num_actions());
  for (Eigen::Index s = 0; s < q.rows(); ++s) {
    for (Eigen::Index a = 0; a < A; ++a) q(s, a) += gamma * pv(s * A + a);
  }
  return q;
}

inline DeterministicPolicy greedy_policy(const QTable& q) {
  DeterministicPolicy pi{std::vector<std::size_t>(static_cast<std::size_t>(q.rows()))};
  for (Eigen::Index s = 0; s < q.rows(); ++s) pi.actions[static_cast<std::size_t>(s)] = argmax_lowest(q.row(s));
  return pi;
}

struct DmdpSolution {
  QTable q;
  ValueVector value;
  DeterministicPolicy policy;
  std::size_t sweeps = 0;
};

struct ValueIterationOptions {
  std::size_t max_sweeps = 10'000'000;
};

/// Q-value iteration from Q = 0. Stops once ||Q_{k+1} - Q_k||_inf <=
/// target (1 - gamma) / (2 gamma), then backs up once more and acts greedily,
/// which makes the returned policy target-optimal. When the threshold is
/// below what double arithmetic can resolve, stops at the numerical fixed
/// point instead.
inline DmdpSolution dmdp_value_iteration(const TabularMdp& m, double gamma,
                                         double target_accuracy,
                                         const ValueIterationOptions& opt = {}) {
  check_discount(gamma);
  if (!(target_accuracy > 0.0)) throw ValidationError("target accuracy must be positive");
  const double threshold = target_accuracy * (1.0 - gamma) / (2.0 * gamma);
  constexpr double kEps = std::numeric_limits<double>::epsilon();

  QTable q = QTable::Zero(static_cast<Eigen::Index>(m.num_states()),
                          static_cast<Eigen::Index>(m.num_actions()));
  Vector v = Vector::Zero(q.rows());
  std::size_t sweeps = 0;
  while (true) {
    if (sweeps >= opt.max_sweeps) throw SolverError("value iteration: sweep cap exceeded");
    QTable next = bellman_q(m, v, gamma);
    ++sweeps;
    const double delta = (next - q).cwiseAbs().maxCoeff();
    const double floor = 8.0 * kEps * std::max(1.0, next.cwiseAbs().maxCoeff());
    q.swap(next);
    v = q.rowwise().maxCoeff();
    if (delta <= threshold || delta <= floor) break;
  }
  q = bellman_q(m, v, gamma);
  ++sweeps;
  DmdpSolution out;
  out.policy = greedy_policy(q);
  out.value = q.rowwise().maxCoeff();
  out.q = std::move(q);
  out.sweeps = sweeps;
  return out;
}

/// Exact discounted optimum: value iteration warm start, then policy
/// iteration with linear-solve evaluation until the greedy policy is stable.
inline DmdpSolution dmdp_optimal(const TabularMdp& m, double gamma) {
  DmdpSolution sol = dmdp_value_iteration(m, gamma, 1e-9);
  DeterministicPolicy pi = sol.policy;
  for (std::size_t iter = 0; iter < 10'000; ++iter) {
    const Vector v = dmdp_policy_value(m, pi, gamma);
    const QTable q = bellman_q(m, v, gamma);
    DeterministicPolicy next = pi;
    bool changed = false;
    for (Eigen::Index s = 0; s < q.rows(); ++s) {
      const auto su = static_cast<std::size_t>(s);
      const double current = q(s, static_cast<Eigen::Index>(pi.actions[su]));
      const std::size_t best = argmax_lowest(q.row(s));
      // Switch only on a strict improvement beyond rounding.
      if (q(s, static_cast<Eigen::Index>(best)) > current + 1e-12 * std::max(1.0, std::abs(current))) {
        next.actions[su] = best;
        changed = true;
      }
    }
    if (!changed) {
      sol.policy = pi;
      sol.value = v;
      sol.q = q;
      return sol;
    }
    pi = std::move(next);
  }
  throw SolverError("policy iteration did not stabilise");
}

// ---------------------------------------------------------------------------
// Finite horizon

/// V_T = sum_{t<T} P_pi^t r_pi via V_{t+1} = r_pi + P_pi V_t.
inline ValueVector finite_horizon_value(const InducedChain& chain, std::size_t T) {
  if (T == 0) throw ValidationError("horizon must be positive");
  Vector v = Vector::Zero(chain.reward.size());
  for (std::size_t t = 0; t < T; ++t) v = chain.reward + chain.matrix * v;
  return v;
}

inline ValueVector finite_horizon_value(const TabularMdp& m, const Policy& pi, std::size_t T) {
  return finite_horizon_value(induce_chain(m, pi), T);
}

// ---------------------------------------------------------------------------
// Average reward

struct GainBias {
  ValueVector gain;
  ValueVector bias;
};

/// rho = P* r_pi and h = (I - P + P*)^{-1} (I - P*) r_pi (deviation-matrix
/// bias, normalized so that nu_k^T h = 0 on every recurrent class).
inline GainBias chain_gain_bias(const InducedChain& chain, const ChainStructure& cs) {
  const auto n = chain.matrix.rows();
  const Matrix& Pstar = cs.limiting_matrix;
  const Matrix I = Matrix::Identity(n, n);
  GainBias out;
  out.gain = Pstar * chain.reward;
  const Vector centred = chain.reward - out.gain;
  out.bias = (I - chain.matrix + Pstar).partialPivLu().solve(centred);
  return out;
}

inline GainBias chain_gain_bias(const InducedChain& chain) {
  return chain_gain_bias(chain, decompose_chain(chain.matrix));
}

inline GainBias amdp_gain_bias(const TabularMdp& m, const Policy& pi) {
  return chain_gain_bias(induce_chain(m, pi));
}

struct AmdpOptimum {
  ValueVector gain;
  ValueVector bias;
  DeterministicPolicy policy;
  double H = 0.0;
  bool weakly_communicating = false;
};

enum class AmdpMethod { enumerate, relative_vi };

struct AmdpOptions {
  std::uint64_t enumeration_budget = 1'000'000;
  /// Gain and bias-sum ties are resolved within this tolerance.
  double tie_tolerance = 1e-9;
  double rvi_tau = 0.5;
  double rvi_tolerance = 1e-10;
  std::size_t rvi_max_iterations = 10'000'000;
};

/// max_s |(rho + h)(s) - max_a { r(s,a) + P(.|s,a)^T h }|, rho read per state.
inline double bellman_optimality_residual(const TabularMdp& m, const Vector& gain,
                                          const Vector& bias) {
  const QTable q = bellman_q(m, bias, 1.0);
  return (gain + bias - Vector(q.rowwise().maxCoeff())).cwiseAbs().maxCoeff();
}

namespace detail {

inline AmdpOptimum amdp_enumerate(const TabularMdp& m, const AmdpOptions& opt) {
  if (count_policies(m, opt.enumeration_budget) > opt.enumeration_budget) {
    throw SolverError("amdp_optimal: policy enumeration budget exceeded");
  }
  // Pass 1: score every policy by worst-start gain and bias sum.
  std::vector<double> min_gain;
  std::vector<double> bias_sum;
  for_each_policy(m, [&](const DeterministicPolicy& pi) {
    const GainBias gb = amdp_gain_bias(m, pi);
    min_gain.push_back(gb.gain.minCoeff());
    bias_sum.push_back(gb.bias.sum());
  });
  const double best_gain = *std::max_element(min_gain.begin(), min_gain.end());
  double best_bias = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < min_gain.size(); ++i) {
    if (min_gain[i] >= best_gain - opt.tie_tolerance) best_bias = std::max(best_bias, bias_sum[i]);
  }
  // Pass 2: lexicographically first policy that is gain- and bias-optimal.
  std::size_t index = 0;
  std::optional<DeterministicPolicy> chosen;
  for_each_policy(m, [&](const DeterministicPolicy& pi) {
    if (!chosen && min_gain[index] >= best_gain - opt.tie_tolerance &&
        bias_sum[index] >= best_bias - opt.tie_tolerance) {
      chosen = pi;
    }
    ++index;
  });
  const GainBias gb = amdp_gain_bias(m, *chosen);
  AmdpOptimum out;
  out.gain = gb.gain;
  out.bias = gb.bias;
  out.policy = *chosen;
  out.H = span(gb.bias);
  return out;
}

inline AmdpOptimum amdp_relative_vi(const TabularMdp& m, const AmdpOptions& opt) {
  const TabularMdp lazy = aperiodicity_transform(m, opt.rvi_tau);
  const auto n = static_cast<Eigen::Index>(m.num_states());
  Vector w = Vector::Zero(n);
  for (std::size_t it = 0; it < opt.rvi_max_iterations; ++it) {
    const Vector tw = bellman_q(lazy, w, 1.0).rowwise().maxCoeff();
    const Vector diff = tw - w;
    const double lo = diff.minCoeff();
    const double hi = diff.maxCoeff();
    if (hi - lo <= opt.rvi_tolerance) {
      AmdpOptimum out;
      const double rho = 0.5 * (lo + hi);
      out.gain = Vector::Constant(n, rho);
      Vector h = (1.0 - opt.rvi_tau) * tw;
      h.array() -= h(0);
      out.policy = greedy_policy(bellman_q(m, h, 1.0));
      // Unichain greedy chain: shift so that nu^T h = 0, as for the
      // deviation-matrix bias.
      const ChainStructure cs = decompose_chain(induce_chain(m, out.policy).matrix);
      if (cs.unichain()) h.array() -= cs.limiting_matrix.row(0).dot(h);
      out.bias = h;
      out.H = span(h);
      return out;
    }
    w = tw.array() - tw(0);
  }
  throw SolverError(
      "relative value iteration did not converge (input may not be weakly communicating)");
}

}  // namespace detail

/// Average-reward optimum. `enumerate` scores every deterministic policy
/// exactly and returns the lexicographically first gain- and bias-optimal
/// one; `relative_vi` runs relative value iteration on the lazy chain
/// (tau = 0.5) and acts greedily on the resulting bias.
inline AmdpOptimum amdp_optimal(const TabularMdp& m, AmdpMethod method,
                                const AmdpOptions& opt = {}) {
  AmdpOptimum out = method == AmdpMethod::enumerate ? detail::amdp_enumerate(m, opt)
                                                    : detail::amdp_relative_vi(m, opt);
  out.weakly_communicating = is_weakly_communicating(m);
  return out;
}

/// Enumeration when affordable, relative VI otherwise.
inline AmdpOptimum amdp_optimal_auto(const TabularMdp& m, const AmdpOptions& opt = {}) {
  const bool small = count_policies(m, opt.enumeration_budget) <= opt.enumeration_budget;
  return amdp_optimal(m, small ? AmdpMethod::enumerate : AmdpMethod::relative_vi, opt);
}

/// h_gamma* = V_gamma* - rho* / (1 - gamma).
inline ValueVector h_gamma_star(const TabularMdp& m, double gamma, const AmdpOptimum& opt) {
  const DmdpSolution sol = dmdp_value_iteration(m, gamma, 1e-9);
  return sol.value - opt.gain / (1.0 - gamma);
}

}  // namespace amdp
