#pragma once

// Seeded random weakly communicating MDPs for certification runs.

#include <cstdint>
#include <string>
#include <vector>

#include "amdp/chain.hpp"
#include "amdp/generative.hpp"
#include "amdp/mdp.hpp"

namespace amdp {

struct CorpusSpec {
  std::size_t count = 1000;
  std::size_t max_states = 6;
  std::size_t max_actions = 4;
  std::uint64_t seed = 7;
};

struct CorpusEntry {
  std::string id;
  TabularMdp mdp;
};

namespace detail {

inline std::size_t uniform_index(UniformStream& rng, std::size_t n) {
  return static_cast<std::size_t>(rng.next() * static_cast<double>(n));
}

/// One random MDP: each row gets a random support of 1..S states (small
/// supports favoured, so periodic and multichain policies occur) with
/// weights in [0.1, 1]; rewards uniform on [0,1], a quarter of them 0 or 1.
inline TabularMdp random_mdp(UniformStream& rng, std::size_t S, std::size_t A) {
  RowMatrix P = RowMatrix::Zero(static_cast<Eigen::Index>(S * A), static_cast<Eigen::Index>(S));
  RewardTable r(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(A));
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      const auto row = static_cast<Eigen::Index>(s * A + a);
      const std::size_t support = 1 + std::min(uniform_index(rng, S), uniform_index(rng, S));
      std::vector<std::size_t> states(S);
      for (std::size_t i = 0; i < S; ++i) states[i] = i;
      for (std::size_t i = 0; i < support; ++i) {
        std::swap(states[i], states[i + uniform_index(rng, S - i)]);
      }
      std::vector<double> w(support);
      double total = 0.0;
      for (auto& x : w) total += (x = 0.1 + 0.9 * rng.next());
      double assigned = 0.0;
      for (std::size_t i = 0; i + 1 < support; ++i) {
        const double p = w[i] / total;
        P(row, static_cast<Eigen::Index>(states[i])) = p;
        assigned += p;
      }
      P(row, static_cast<Eigen::Index>(states[support - 1])) = 1.0 - assigned;

      const double u = rng.next();
      double rew = rng.next();
      if (u < 0.125) rew = 0.0;
      else if (u < 0.25) rew = 1.0;
      r(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) = rew;
    }
  }
  return TabularMdp(S, A, std::move(P), std::move(r));
}

}  // namespace detail

/// `count` weakly communicating MDPs with 1 <= S <= max_states and
/// 1 <= A <= max_actions; candidates that are not weakly communicating are
/// redrawn from the same stream.
inline std::vector<CorpusEntry> random_corpus(const CorpusSpec& spec) {
  if (spec.max_states == 0 || spec.max_actions == 0) {
    throw ValidationError("corpus size bounds must be positive");
  }
  UniformStream rng(splitmix64(spec.seed));
  std::vector<CorpusEntry> out;
  out.reserve(spec.count);
  while (out.size() < spec.count) {
    const std::size_t S = 1 + detail::uniform_index(rng, spec.max_states);
    const std::size_t A = 1 + detail::uniform_index(rng, spec.max_actions);
    TabularMdp m = detail::random_mdp(rng, S, A);
    if (!is_weakly_communicating(m)) continue;
    const std::string id = "rand" + std::to_string(spec.seed) + "_" + std::to_string(out.size());
    out.push_back({id, m.with_metadata({{"name", id}, {"corpus_seed", spec.seed}})});
  }
  return out;
}

inline DeterministicPolicy random_policy(const TabularMdp& m, UniformStream& rng) {
  DeterministicPolicy pi{std::vector<std::size_t>(m.num_states())};
  for (auto& a : pi.actions) a = detail::uniform_index(rng, m.num_actions());
  return pi;
}

}  // namespace amdp
