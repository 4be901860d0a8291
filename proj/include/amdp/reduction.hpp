#pragma once

// Average-reward to discounted reduction: parameter schedule, the
// sample-based solver, and certificates that check each inequality of the
// reduction on a concrete instance with exact solvers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "amdp/generative.hpp"
#include "amdp/parameters.hpp"
#include "amdp/solvers.hpp"

namespace amdp {

struct ReductionParams {
  double epsilon = 1.0;
  double delta = 0.1;
  double H_bound = 1.0;
  double gamma = 0.5;
  double eps_gamma = 1.0;
  double xi = 0.0;
  std::size_t n_per_pair = 1;
  double c_p = 1.0;
  double c_tilde = 1.0;
};

/// gamma = 1 - eps/(12 H), eps_gamma = eps/(12 (1 - gamma)) (which is H),
/// xi = c_p (1 - gamma) eps_gamma / (S^5 A^5) and
/// N = ceil(c_tilde H eps^-3 ln(SA/(eps delta))) unless overridden.
inline ReductionParams reduction_params(double epsilon, double delta, double H_bound,
                                        std::size_t num_states, std::size_t num_actions,
                                        std::optional<std::size_t> n_override = std::nullopt,
                                        double c_tilde = 1.0, double c_p = 1.0) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ValidationError("epsilon must lie in (0,1]");
  if (!(delta > 0.0 && delta <= 1.0)) throw ValidationError("delta must lie in (0,1]");
  if (!(H_bound >= 1.0)) throw ValidationError("H bound must be at least 1");
  if (n_override && *n_override == 0) throw ValidationError("N must be positive");
  ReductionParams p;
  p.epsilon = epsilon;
  p.delta = delta;
  p.H_bound = H_bound;
  p.c_p = c_p;
  p.c_tilde = c_tilde;
  p.gamma = 1.0 - epsilon / (12.0 * H_bound);
  p.eps_gamma = epsilon / (12.0 * (1.0 - p.gamma));
  const double SA = static_cast<double>(num_states * num_actions);
  p.xi = c_p * (1.0 - p.gamma) * p.eps_gamma / (std::pow(SA, 5.0));
  if (n_override) {
    p.n_per_pair = *n_override;
  } else {
    const double n = c_tilde * H_bound * std::pow(epsilon, -3.0) *
                     std::log(SA / (epsilon * delta));
    p.n_per_pair = static_cast<std::size_t>(std::max(1.0, std::ceil(n)));
  }
  return p;
}

/// Internal planning accuracy of the sample-based solver.
inline double algorithm1_planning_accuracy(const ReductionParams& p) {
  return std::min(1e-9 / (1.0 - p.gamma), p.eps_gamma / 10.0);
}

struct Algorithm1Result {
  DeterministicPolicy policy;
  std::uint64_t total_samples = 0;
};

/// Perturb rewards, build the empirical model from n_per_pair samples per
/// pair, solve the discounted empirical problem by Q-value iteration and
/// return its greedy policy.
inline Algorithm1Result run_algorithm1(GenerativeModel& gm, const ReductionParams& p) {
  const RewardTable rp = perturb_rewards(gm.rewards(), p.xi, gm.seed_spec());
  const EmpiricalModel em = build_empirical(gm, p.n_per_pair, rp);
  const DmdpSolution sol = dmdp_value_iteration(em.mdp, p.gamma, algorithm1_planning_accuracy(p));
  return {sol.policy, gm.total_samples()};
}

inline DeterministicPolicy algorithm1(GenerativeModel& gm, const ReductionParams& p) {
  return run_algorithm1(gm, p).policy;
}

// ---------------------------------------------------------------------------
// Certificates

struct Certificate {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string instance_id;
};

inline Certificate make_certificate(std::string name, double lhs, double rhs, double tolerance,
                                    std::string instance_id) {
  // Infinite right-hand sides (e.g. t_mix = inf) always pass.
  const bool passed = lhs <= rhs + tolerance;
  return {std::move(name), lhs, rhs, tolerance, passed, std::move(instance_id)};
}

inline bool all_passed(const std::vector<Certificate>& certs) {
  return std::all_of(certs.begin(), certs.end(), [](const Certificate& c) { return c.passed; });
}

/// Bias-span bound used to pick gamma = 1 - eps/H in the certificates:
/// at least sp(h*) and at least 2 eps, so gamma lands in [1/2, 1).
inline double certification_h(double H, double epsilon) { return std::max(H, 2.0 * epsilon); }

/// Exact optimum plus the bias span of the returned policy itself.
struct CertificationOracle {
  AmdpOptimum opt;
  GainBias policy_gain_bias;
  /// max(sp(h_opt), sp(h^{pi*})).
  double H = 0.0;
};

inline CertificationOracle make_oracle(const TabularMdp& m, const AmdpOptimum& opt) {
  CertificationOracle o{opt, amdp_gain_bias(m, opt.policy), 0.0};
  o.H = std::max(opt.H, span(o.policy_gain_bias.bias));
  return o;
}

inline CertificationOracle make_oracle(const TabularMdp& m) {
  return make_oracle(m, amdp_optimal_auto(m));
}

/// ||rho^pi - (1-gamma) V_gamma^pi||_inf <= sp((1-gamma) V_gamma^pi).
inline Certificate certify_reduction_gap(const TabularMdp& m, const Policy& pi, double gamma,
                                         const std::string& instance_id = "") {
  const InducedChain chain = induce_chain(m, pi);
  const GainBias gb = chain_gain_bias(chain);
  const Vector scaled = (1.0 - gamma) * dmdp_chain_value(chain, gamma);
  return make_certificate("reduction_gap", (gb.gain - scaled).cwiseAbs().maxCoeff(), span(scaled),
                          1e-8, instance_id);
}

inline constexpr std::size_t kFiniteHorizonCheck = 200;

/// sp((1-gamma) V_gamma*) <= 4 eps, sp((1-gamma) V_gamma^{pi*}) <= 4 eps and
/// max_{T <= 200} sp(V_T^{pi*}) <= 2 sp(h^{pi*}), with gamma = 1 - eps/H.
inline std::vector<Certificate> certify_span_bounds(const TabularMdp& m, double epsilon,
                                                    const CertificationOracle& oracle,
                                                    const std::string& instance_id = "") {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ValidationError("epsilon must lie in (0,1]");
  constexpr double kTol = 1e-7;
  const double gamma = 1.0 - epsilon / certification_h(oracle.H, epsilon);
  const Vector v_star = dmdp_optimal(m, gamma).value;
  const InducedChain chain = induce_chain(m, oracle.opt.policy);
  const Vector v_pi = dmdp_chain_value(chain, gamma);

  double worst_finite = 0.0;
  Vector vt = Vector::Zero(chain.reward.size());
  for (std::size_t T = 1; T <= kFiniteHorizonCheck; ++T) {
    vt = chain.reward + chain.matrix * vt;
    worst_finite = std::max(worst_finite, span(vt));
  }
  return {
      make_certificate("span_discounted_optimal", span((1.0 - gamma) * v_star), 4.0 * epsilon, kTol,
                       instance_id),
      make_certificate("span_discounted_policy", span((1.0 - gamma) * v_pi), 4.0 * epsilon,
                       kTol, instance_id),
      make_certificate("finite_horizon_span", worst_finite,
                       2.0 * span(oracle.policy_gain_bias.bias), kTol, instance_id),
  };
}

inline std::vector<Certificate> certify_span_bounds(const TabularMdp& m, double epsilon,
                                                    const std::string& instance_id = "") {
  return certify_span_bounds(m, epsilon, make_oracle(m), instance_id);
}

/// Every link of
///   rho* <= (1-g) V^{pi*} + 4e + 2(1-g)eg <= (1-g) V* + 4e + 2(1-g)eg
///        <= (1-g) V^{pihat} + 4e + 3(1-g)eg <= rho^{pihat} + 8e + 3(1-g)eg
/// checked statewise, plus the end-to-end bound rho* - min rho^{pihat}.
struct ReductionChainReport {
  double gamma = 0.0;
  DeterministicPolicy pi_hat;
  std::vector<Certificate> links;
  Certificate overall;
};

inline ReductionChainReport certify_reduction_chain(const TabularMdp& m, double epsilon,
                                               double eps_gamma,
                                               const CertificationOracle& oracle,
                                               const std::string& instance_id = "") {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ValidationError("epsilon must lie in (0,1]");
  constexpr double kTol = 1e-6;
  ReductionChainReport rep;
  const double gamma = 1.0 - epsilon / certification_h(oracle.H, epsilon);
  rep.gamma = gamma;
  if (!(eps_gamma >= 0.0 && eps_gamma <= 1.0 / (1.0 - gamma) + 1e-12)) {
    throw ValidationError("eps_gamma must lie in [0, 1/(1-gamma)]");
  }
  const double g1 = 1.0 - gamma;
  rep.pi_hat = dmdp_value_iteration(m, gamma, eps_gamma > 0.0 ? eps_gamma : 1e-10).policy;

  const double rho_star = oracle.opt.gain.maxCoeff();
  const Vector v_pistar = dmdp_policy_value(m, oracle.opt.policy, gamma);
  const Vector v_star = dmdp_optimal(m, gamma).value;
  const InducedChain hat_chain = induce_chain(m, rep.pi_hat);
  const Vector v_hat = dmdp_chain_value(hat_chain, gamma);
  const Vector rho_hat = chain_gain_bias(hat_chain).gain;

  const auto n = v_star.size();
  const Vector L0 = Vector::Constant(n, rho_star);
  const Vector L1 = g1 * v_pistar.array() + 4.0 * epsilon + 2.0 * g1 * eps_gamma;
  const Vector L2 = g1 * v_star.array() + 4.0 * epsilon + 2.0 * g1 * eps_gamma;
  const Vector L3 = g1 * v_hat.array() + 4.0 * epsilon + 3.0 * g1 * eps_gamma;
  const Vector L4 = rho_hat.array() + 8.0 * epsilon + 3.0 * g1 * eps_gamma;
  const Vector* chain[] = {&L0, &L1, &L2, &L3, &L4};
  for (int i = 0; i < 4; ++i) {
    rep.links.push_back(make_certificate("reduction_chain_link" + std::to_string(i + 1),
                                         (*chain[i] - *chain[i + 1]).maxCoeff(), 0.0, kTol,
                                         instance_id));
  }
  rep.overall = make_certificate("reduction_bound", rho_star - rho_hat.minCoeff(),
                                 8.0 * epsilon + 3.0 * g1 * eps_gamma, kTol, instance_id);
  return rep;
}

/// rho* - min_s rho^{pihat}(s) <= 8 eps + 3 (1 - gamma) eps_gamma for an
/// eps_gamma-optimal discounted policy pihat.
inline Certificate certify_reduction_bound(const TabularMdp& m, double epsilon, double eps_gamma,
                                     const std::string& instance_id = "") {
  return certify_reduction_chain(m, epsilon, eps_gamma, make_oracle(m), instance_id).overall;
}

/// The per-instance certificate set: the reduction gap of pi*, the three
/// span bounds, the end-to-end reduction bound with eps_gamma = H, H <= D
/// and H <= 8 t_mix.
inline std::vector<Certificate> certify_instance(const TabularMdp& m, double epsilon,
                                                 const std::string& instance_id) {
  const CertificationOracle oracle = make_oracle(m);
  const double gamma = 1.0 - epsilon / certification_h(oracle.H, epsilon);
  std::vector<Certificate> out;
  out.push_back(certify_reduction_gap(m, oracle.opt.policy, gamma, instance_id));
  for (auto& c : certify_span_bounds(m, epsilon, oracle, instance_id)) out.push_back(std::move(c));
  const double eps_gamma = std::min(oracle.opt.H, 1.0 / (1.0 - gamma));
  out.push_back(certify_reduction_chain(m, epsilon, eps_gamma, oracle, instance_id).overall);
  const MdpParameters params = structural_parameters(m, oracle.opt);
  out.push_back(make_certificate("h_le_diameter", params.H, params.diameter, kParameterTolerance,
                                 instance_id));
  out.push_back(make_certificate("h_le_8tmix", params.H, 8.0 * params.t_mix,
                                 kParameterTolerance, instance_id));
  return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo

struct TrialRecord {
  std::uint64_t seed = 0;
  double gap = 0.0;
  bool success = false;
  std::uint64_t total_samples = 0;
  DeterministicPolicy policy;
};

/// rho* - min_s rho^pi(s), computed exactly.
inline double exact_gap(const TabularMdp& truth, const AmdpOptimum& opt,
                        const DeterministicPolicy& pi) {
  return opt.gain.maxCoeff() - amdp_gain_bias(truth, pi).gain.minCoeff();
}

/// Runs the sample-based solver once per seed and scores each output with
/// the exact solvers.
inline std::vector<TrialRecord> empirical_error(const TabularMdp& truth, const AmdpOptimum& opt,
                                                const ReductionParams& params,
                                                const std::vector<std::uint64_t>& seeds) {
  std::vector<TrialRecord> out;
  out.reserve(seeds.size());
  for (std::uint64_t seed : seeds) {
    GenerativeModel gm(truth, RngSeedSpec{seed});
    const Algorithm1Result res = run_algorithm1(gm, params);
    TrialRecord rec;
    rec.seed = seed;
    rec.gap = exact_gap(truth, opt, res.policy);
    rec.success = rec.gap <= params.epsilon;
    rec.total_samples = res.total_samples;
    rec.policy = res.policy;
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::vector<std::uint64_t> consecutive_seeds(std::uint64_t master, std::size_t trials) {
  std::vector<std::uint64_t> seeds(trials);
  for (std::size_t i = 0; i < trials; ++i) seeds[i] = master + i;
  return seeds;
}

inline double failure_rate(const std::vector<TrialRecord>& records) {
  if (records.empty()) return 0.0;
  const auto fails = std::count_if(records.begin(), records.end(),
                                   [](const TrialRecord& r) { return !r.success; });
  return static_cast<double>(fails) / static_cast<double>(records.size());
}

inline double median_gap(std::vector<TrialRecord> records) {
  if (records.empty()) return 0.0;
  std::vector<double> gaps;
  for (const auto& r : records) gaps.push_back(r.gap);
  std::sort(gaps.begin(), gaps.end());
  const std::size_t n = gaps.size();
  return n % 2 == 1 ? gaps[n / 2] : 0.5 * (gaps[n / 2 - 1] + gaps[n / 2]);
}

}  // namespace amdp
