#pragma once

// Seeded generative-model access to a ground-truth MDP, empirical model
// construction and reward perturbation.

#include <atomic>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "amdp/mdp.hpp"

namespace amdp {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// What a derived stream is used for; part of the derivation key.
enum class StreamPurpose : std::uint64_t { transitions = 1, reward_perturbation = 2 };

/// Per-(s,a) streams are keyed by mixing (master_seed, purpose, s, a), so
/// the draws at one pair never depend on how calls to other pairs interleave.
struct RngSeedSpec {
  std::uint64_t master_seed = 0;

  std::uint64_t derive(StreamPurpose purpose, std::uint64_t s, std::uint64_t a) const {
    std::uint64_t h = splitmix64(master_seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
    h = splitmix64(h ^ s);
    return splitmix64(h ^ (a + 0x632be59bd9b4e019ULL));
  }
};

/// mt19937_64 with a fixed 53-bit mapping to [0,1), so draws are identical
/// across standard libraries.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed = 0) : engine_(seed) {}
  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Sampling access to a hidden MDP. Rewards are known; transitions are only
/// observable through sample_next.
class GenerativeModel {
 public:
  GenerativeModel(TabularMdp truth, RngSeedSpec seed)
      : truth_(std::move(truth)),
        seed_(seed),
        counters_(std::make_unique<std::atomic<std::uint64_t>[]>(pairs())) {
    streams_.reserve(pairs());
    for (std::size_t s = 0; s < truth_.num_states(); ++s) {
      for (std::size_t a = 0; a < truth_.num_actions(); ++a) {
        streams_.emplace_back(seed_.derive(StreamPurpose::transitions, s, a));
      }
    }
    for (std::size_t i = 0; i < pairs(); ++i) counters_[i].store(0);
  }

  std::size_t num_states() const { return truth_.num_states(); }
  std::size_t num_actions() const { return truth_.num_actions(); }
  const RewardTable& rewards() const { return truth_.rewards(); }
  const RngSeedSpec& seed_spec() const { return seed_; }

  /// s' ~ P(.|s,a) by inverse CDF in state-index order.
  std::size_t sample_next(std::size_t s, std::size_t a) {
    if (s >= num_states() || a >= num_actions()) {
      throw ValidationError("sample_next: state or action out of range");
    }
    const std::size_t pair = s * num_actions() + a;
    const double u = streams_[pair].next();
    counters_[pair].fetch_add(1, std::memory_order_relaxed);
    auto row = truth_.row(s, a);
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (Eigen::Index j = 0; j < row.size(); ++j) {
      if (row(j) <= 0.0) continue;
      last_positive = static_cast<std::size_t>(j);
      cumulative += row(j);
      if (u < cumulative) return last_positive;
    }
    return last_positive;  // u beyond the rounded cumulative sum
  }

  std::uint64_t samples_drawn(std::size_t s, std::size_t a) const {
    return counters_[s * num_actions() + a].load();
  }

  std::uint64_t total_samples() const {
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < pairs(); ++i) total += counters_[i].load();
    return total;
  }

 private:
  std::size_t pairs() const { return truth_.num_states() * truth_.num_actions(); }

  TabularMdp truth_;
  RngSeedSpec seed_;
  std::vector<UniformStream> streams_;
  std::unique_ptr<std::atomic<std::uint64_t>[]> counters_;
};

struct EmpiricalModel {
  /// counts[(s*A + a)*S + s'].
  std::vector<std::uint64_t> counts;
  std::size_t n_per_pair = 0;
  TabularMdp mdp;

  std::uint64_t count(std::size_t s, std::size_t a, std::size_t next) const {
    return counts[(s * mdp.num_actions() + a) * mdp.num_states() + next];
  }
};

/// Draws n_per_pair samples at every pair; P_hat = counts / N.
inline EmpiricalModel build_empirical(GenerativeModel& gm, std::size_t n_per_pair,
                                      const RewardTable& rewards) {
  if (n_per_pair == 0) throw ValidationError("n_per_pair must be at least 1");
  const std::size_t S = gm.num_states();
  const std::size_t A = gm.num_actions();
  EmpiricalModel out;
  out.n_per_pair = n_per_pair;
  out.counts.assign(S * A * S, 0);
  RowMatrix P = RowMatrix::Zero(static_cast<Eigen::Index>(S * A), static_cast<Eigen::Index>(S));
  const double N = static_cast<double>(n_per_pair);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      std::uint64_t* c = &out.counts[(s * A + a) * S];
      for (std::size_t i = 0; i < n_per_pair; ++i) ++c[gm.sample_next(s, a)];
      const auto r = static_cast<Eigen::Index>(s * A + a);
      for (std::size_t t = 0; t < S; ++t) {
        P(r, static_cast<Eigen::Index>(t)) = static_cast<double>(c[t]) / N;
      }
    }
  }
  out.mdp = TabularMdp(S, A, std::move(P), rewards);
  return out;
}

/// r_p = r + zeta, zeta(s,a) iid Unif(0, xi) from per-pair streams of `seed`.
inline RewardTable perturb_rewards(const RewardTable& r, double xi, const RngSeedSpec& seed) {
  if (!(xi >= 0.0)) throw ValidationError("perturbation size must be nonnegative");
  RewardTable out = r;
  if (xi == 0.0) return out;
  for (Eigen::Index s = 0; s < r.rows(); ++s) {
    for (Eigen::Index a = 0; a < r.cols(); ++a) {
      UniformStream stream(seed.derive(StreamPurpose::reward_perturbation,
                                       static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(a)));
      double u = stream.next();
      while (u == 0.0) u = stream.next();
      out(s, a) += u * xi;
    }
  }
  return out;
}

}  // namespace amdp
