#pragma once

// Core data model: tabular MDPs, policies, induced Markov chains and the
// span seminorm.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "amdp/errors.hpp"
#include "json.hpp"

namespace amdp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Value functions, gains and biases are all plain per-state vectors.
using ValueVector = Vector;
/// Q[s][a].
using QTable = Matrix;
/// r[s][a].
using RewardTable = Matrix;

inline constexpr double kProbabilityTolerance = 1e-12;

/// Finite MDP M = (S, A, P, r). Transitions are stored as an (S*A) x S
/// row-major matrix whose row s*A + a is P(.|s,a). Immutable once built.
class TabularMdp {
 public:
  TabularMdp() = default;

  TabularMdp(std::size_t num_states, std::size_t num_actions, RowMatrix transitions,
             RewardTable rewards, nlohmann::json metadata = nlohmann::json::object())
      : num_states_(num_states),
        num_actions_(num_actions),
        transitions_(std::move(transitions)),
        rewards_(std::move(rewards)),
        metadata_(std::move(metadata)) {
    if (num_states_ == 0 || num_actions_ == 0) {
      throw ValidationError("MDP needs at least one state and one action");
    }
    if (static_cast<std::size_t>(transitions_.rows()) != num_states_ * num_actions_ ||
        static_cast<std::size_t>(transitions_.cols()) != num_states_) {
      throw ValidationError("transition tensor has wrong dimensions");
    }
    if (static_cast<std::size_t>(rewards_.rows()) != num_states_ ||
        static_cast<std::size_t>(rewards_.cols()) != num_actions_) {
      throw ValidationError("reward table has wrong dimensions");
    }
  }

  std::size_t num_states() const { return num_states_; }
  std::size_t num_actions() const { return num_actions_; }

  double prob(std::size_t s, std::size_t a, std::size_t next) const {
    return transitions_(row_index(s, a), static_cast<Eigen::Index>(next));
  }
  double reward(std::size_t s, std::size_t a) const {
    return rewards_(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a));
  }

  /// P(.|s,a) as a row expression.
  auto row(std::size_t s, std::size_t a) const { return transitions_.row(row_index(s, a)); }

  const RowMatrix& transitions() const { return transitions_; }
  const RewardTable& rewards() const { return rewards_; }
  const nlohmann::json& metadata() const { return metadata_; }

  TabularMdp with_rewards(RewardTable rewards) const {
    return TabularMdp(num_states_, num_actions_, transitions_, std::move(rewards), metadata_);
  }
  TabularMdp with_transitions(RowMatrix transitions) const {
    return TabularMdp(num_states_, num_actions_, std::move(transitions), rewards_, metadata_);
  }
  TabularMdp with_metadata(nlohmann::json metadata) const {
    return TabularMdp(num_states_, num_actions_, transitions_, rewards_, std::move(metadata));
  }

  Eigen::Index row_index(std::size_t s, std::size_t a) const {
    return static_cast<Eigen::Index>(s * num_actions_ + a);
  }

 private:
  std::size_t num_states_ = 0;
  std::size_t num_actions_ = 0;
  RowMatrix transitions_;
  RewardTable rewards_;
  nlohmann::json metadata_ = nlohmann::json::object();
};

struct DeterministicPolicy {
  std::vector<std::size_t> actions;

  bool operator==(const DeterministicPolicy&) const = default;
  auto operator<=>(const DeterministicPolicy&) const = default;
};

/// probs(s, a) = pi(a|s).
struct StochasticPolicy {
  Matrix probs;
};

using Policy = std::variant<DeterministicPolicy, StochasticPolicy>;

/// P_pi and r_pi of the Markov chain a policy induces.
struct InducedChain {
  Matrix matrix;
  Vector reward;

  std::size_t size() const { return static_cast<std::size_t>(matrix.rows()); }
};

struct Violation {
  std::size_t state = 0;
  std::size_t action = 0;
  std::string check;
  std::string message;
};

inline std::string describe(const Violation& v) {
  std::ostringstream out;
  out << "(s=" << v.state << ", a=" << v.action << ") " << v.check << ": " << v.message;
  return out.str();
}

/// Checks row stochasticity and reward range. `reward_slack` admits rewards
/// up to 1 + slack (perturbed empirical models).
inline std::vector<Violation> validate_mdp(const TabularMdp& m, double reward_slack = 0.0) {
  std::vector<Violation> out;
  for (std::size_t s = 0; s < m.num_states(); ++s) {
    for (std::size_t a = 0; a < m.num_actions(); ++a) {
      auto row = m.row(s, a);
      double sum = 0.0;
      bool finite = true;
      for (Eigen::Index j = 0; j < row.size(); ++j) {
        const double p = row(j);
        if (!std::isfinite(p)) {
          finite = false;
          continue;
        }
        if (p < 0.0) {
          std::ostringstream msg;
          msg << "P(" << j << "|s,a) = " << p << " is negative";
          out.push_back({s, a, "nonnegative", msg.str()});
        }
        sum += p;
      }
      if (!finite) {
        out.push_back({s, a, "finite", "transition row has a non-finite entry"});
      } else if (std::abs(sum - 1.0) > kProbabilityTolerance) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "row sums to " << sum;
        out.push_back({s, a, "row_sum", msg.str()});
      }
      const double r = m.reward(s, a);
      if (!std::isfinite(r) || r < 0.0 || r > 1.0 + reward_slack) {
        std::ostringstream msg;
        msg << "reward " << r << " outside [0, " << 1.0 + reward_slack << "]";
        out.push_back({s, a, "reward_range", msg.str()});
      }
    }
  }
  return out;
}

/// Throws ValidationError listing every violation.
inline void require_valid(const TabularMdp& m, double reward_slack = 0.0) {
  const auto violations = validate_mdp(m, reward_slack);
  if (violations.empty()) return;
  std::ostringstream msg;
  msg << violations.size() << " MDP violation(s):";
  for (const auto& v : violations) msg << "\n  " << describe(v);
  throw ValidationError(msg.str());
}

/// sp(v) = max_i v_i - min_i v_i.
inline double span(const Vector& v) {
  if (v.size() == 0) throw ValidationError("span of an empty vector");
  return v.maxCoeff() - v.minCoeff();
}

inline void check_policy(const TabularMdp& m, const DeterministicPolicy& pi) {
  if (pi.actions.size() != m.num_states()) {
    throw ValidationError("policy length does not match num_states");
  }
  for (std::size_t s = 0; s < pi.actions.size(); ++s) {
    if (pi.actions[s] >= m.num_actions()) {
      throw ValidationError("policy action out of range at state " + std::to_string(s));
    }
  }
}

inline void check_policy(const TabularMdp& m, const StochasticPolicy& pi) {
  if (static_cast<std::size_t>(pi.probs.rows()) != m.num_states() ||
      static_cast<std::size_t>(pi.probs.cols()) != m.num_actions()) {
    throw ValidationError("stochastic policy dimensions do not match the MDP");
  }
  for (Eigen::Index s = 0; s < pi.probs.rows(); ++s) {
    if ((pi.probs.row(s).array() < 0.0).any() ||
        std::abs(pi.probs.row(s).sum() - 1.0) > kProbabilityTolerance) {
      throw ValidationError("policy row " + std::to_string(s) + " is not a distribution");
    }
  }
}

inline void check_policy(const TabularMdp& m, const Policy& pi) {
  std::visit([&](const auto& p) { check_policy(m, p); }, pi);
}

inline InducedChain induce_chain(const TabularMdp& m, const DeterministicPolicy& pi) {
  check_policy(m, pi);
  const auto n = static_cast<Eigen::Index>(m.num_states());
  InducedChain chain{Matrix(n, n), Vector(n)};
  for (std::size_t s = 0; s < m.num_states(); ++s) {
    const auto i = static_cast<Eigen::Index>(s);
    chain.matrix.row(i) = m.row(s, pi.actions[s]);
    chain.reward(i) = m.reward(s, pi.actions[s]);
  }
  return chain;
}

inline InducedChain induce_chain(const TabularMdp& m, const StochasticPolicy& pi) {
  check_policy(m, pi);
  const auto n = static_cast<Eigen::Index>(m.num_states());
  InducedChain chain{Matrix::Zero(n, n), Vector::Zero(n)};
  for (std::size_t s = 0; s < m.num_states(); ++s) {
    const auto i = static_cast<Eigen::Index>(s);
    for (std::size_t a = 0; a < m.num_actions(); ++a) {
      const double w = pi.probs(i, static_cast<Eigen::Index>(a));
      if (w == 0.0) continue;
      chain.matrix.row(i) += w * m.row(s, a);
      chain.reward(i) += w * m.reward(s, a);
    }
  }
  return chain;
}

inline InducedChain induce_chain(const TabularMdp& m, const Policy& pi) {
  return std::visit([&](const auto& p) { return induce_chain(m, p); }, pi);
}

/// Number of deterministic policies, saturating at `cap + 1`.
inline std::uint64_t count_policies(const TabularMdp& m, std::uint64_t cap) {
  std::uint64_t total = 1;
  for (std::size_t s = 0; s < m.num_states(); ++s) {
    total *= m.num_actions();
    if (total > cap) return cap + 1;
  }
  return total;
}

/// Visits every deterministic policy in lexicographic order of the action
/// array (state 0 most significant).
template <class Fn>
void for_each_policy(const TabularMdp& m, Fn&& fn) {
  DeterministicPolicy pi{std::vector<std::size_t>(m.num_states(), 0)};
  while (true) {
    fn(static_cast<const DeterministicPolicy&>(pi));
    std::size_t pos = m.num_states();
    while (pos > 0) {
      --pos;
      if (++pi.actions[pos] < m.num_actions()) break;
      pi.actions[pos] = 0;
      if (pos == 0) return;
    }
  }
}

inline DeterministicPolicy uniform_action_policy(const TabularMdp& m, std::size_t action = 0) {
  return DeterministicPolicy{std::vector<std::size_t>(m.num_states(), action)};
}

/// Argmax over a row with ties broken toward the lowest index.
template <class Row>
std::size_t argmax_lowest(const Row& row) {
  std::size_t best = 0;
  for (Eigen::Index j = 1; j < row.size(); ++j) {
    if (row(j) > row(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(j);
  }
  return best;
}

}  // namespace amdp
