#pragma once

// JSON file format for MDPs and policies.
//
//   {"num_states": S, "num_actions": A,
//    "transitions": [[[P(s'|s,a) for s'] for a] for s],
//    "rewards": [[r(s,a) for a] for s],
//    "metadata": {...}}                      (optional)
//
// Policies are {"actions": [...]} or {"probs": [[...], ...]}.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "amdp/mdp.hpp"

namespace amdp {

inline nlohmann::json mdp_to_json(const TabularMdp& m) {
  nlohmann::json transitions = nlohmann::json::array();
  nlohmann::json rewards = nlohmann::json::array();
  for (std::size_t s = 0; s < m.num_states(); ++s) {
    nlohmann::json per_action = nlohmann::json::array();
    nlohmann::json r_row = nlohmann::json::array();
    for (std::size_t a = 0; a < m.num_actions(); ++a) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t t = 0; t < m.num_states(); ++t) row.push_back(m.prob(s, a, t));
      per_action.push_back(std::move(row));
      r_row.push_back(m.reward(s, a));
    }
    transitions.push_back(std::move(per_action));
    rewards.push_back(std::move(r_row));
  }
  nlohmann::json doc;
  doc["num_states"] = m.num_states();
  doc["num_actions"] = m.num_actions();
  doc["transitions"] = std::move(transitions);
  doc["rewards"] = std::move(rewards);
  if (!m.metadata().empty()) doc["metadata"] = m.metadata();
  return doc;
}

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& doc, const char* name) {
  if (!doc.is_object() || !doc.contains(name)) {
    throw FormatError(std::string("missing required field '") + name + "'");
  }
  return doc.at(name);
}

inline std::size_t require_count(const nlohmann::json& doc, const char* name) {
  const auto& v = require_field(doc, name);
  if (!v.is_number_integer() || v.get<long long>() <= 0) {
    throw FormatError(std::string("field '") + name + "' must be a positive integer");
  }
  return v.get<std::size_t>();
}

inline double require_number(const nlohmann::json& v, const std::string& where) {
  if (!v.is_number()) throw FormatError(where + " is not a number");
  return v.get<double>();
}

inline void require_array(const nlohmann::json& v, std::size_t n, const std::string& where) {
  if (!v.is_array() || v.size() != n) {
    throw FormatError(where + " must be an array of length " + std::to_string(n));
  }
}

}  // namespace detail

/// Parses and validates. `reward_slack` as in validate_mdp.
inline TabularMdp mdp_from_json(const nlohmann::json& doc, double reward_slack = 0.0) {
  using detail::require_array;
  const std::size_t S = detail::require_count(doc, "num_states");
  const std::size_t A = detail::require_count(doc, "num_actions");
  const auto& tj = detail::require_field(doc, "transitions");
  const auto& rj = detail::require_field(doc, "rewards");
  require_array(tj, S, "transitions");
  require_array(rj, S, "rewards");

  RowMatrix P(static_cast<Eigen::Index>(S * A), static_cast<Eigen::Index>(S));
  RewardTable r(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(A));
  for (std::size_t s = 0; s < S; ++s) {
    const std::string ws = "transitions[" + std::to_string(s) + "]";
    require_array(tj[s], A, ws);
    require_array(rj[s], A, "rewards[" + std::to_string(s) + "]");
    for (std::size_t a = 0; a < A; ++a) {
      const std::string wa = ws + "[" + std::to_string(a) + "]";
      require_array(tj[s][a], S, wa);
      for (std::size_t t = 0; t < S; ++t) {
        P(static_cast<Eigen::Index>(s * A + a), static_cast<Eigen::Index>(t)) =
            detail::require_number(tj[s][a][t], wa + "[" + std::to_string(t) + "]");
      }
      r(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) = detail::require_number(
          rj[s][a], "rewards[" + std::to_string(s) + "][" + std::to_string(a) + "]");
    }
  }
  nlohmann::json metadata = nlohmann::json::object();
  if (doc.contains("metadata")) metadata = doc.at("metadata");
  TabularMdp m(S, A, std::move(P), std::move(r), std::move(metadata));
  require_valid(m, reward_slack);
  return m;
}

inline TabularMdp read_mdp(const std::filesystem::path& path, double reward_slack = 0.0) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return mdp_from_json(doc, reward_slack);
}

inline void write_json(const nlohmann::json& doc, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << doc.dump(1) << '\n';
}

inline void write_mdp(const TabularMdp& m, const std::filesystem::path& path) {
  write_json(mdp_to_json(m), path);
}

inline nlohmann::json policy_to_json(const DeterministicPolicy& pi) {
  return nlohmann::json{{"actions", pi.actions}};
}

inline nlohmann::json policy_to_json(const StochasticPolicy& pi) {
  nlohmann::json probs = nlohmann::json::array();
  for (Eigen::Index s = 0; s < pi.probs.rows(); ++s) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index a = 0; a < pi.probs.cols(); ++a) row.push_back(pi.probs(s, a));
    probs.push_back(std::move(row));
  }
  return nlohmann::json{{"probs", std::move(probs)}};
}

inline Policy policy_from_json(const nlohmann::json& doc) {
  if (doc.is_object() && doc.contains("actions")) {
    const auto& arr = doc.at("actions");
    if (!arr.is_array()) throw FormatError("'actions' must be an array");
    DeterministicPolicy pi;
    for (const auto& v : arr) {
      if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw FormatError("'actions' entries must be nonnegative integers");
      }
      pi.actions.push_back(v.get<std::size_t>());
    }
    return pi;
  }
  if (doc.is_object() && doc.contains("probs")) {
    const auto& rows = doc.at("probs");
    if (!rows.is_array() || rows.empty() || !rows[0].is_array()) {
      throw FormatError("'probs' must be a nested array");
    }
    const auto S = static_cast<Eigen::Index>(rows.size());
    const auto A = static_cast<Eigen::Index>(rows[0].size());
    StochasticPolicy pi{Matrix(S, A)};
    for (Eigen::Index s = 0; s < S; ++s) {
      detail::require_array(rows[static_cast<std::size_t>(s)], static_cast<std::size_t>(A),
                            "probs[" + std::to_string(s) + "]");
      for (Eigen::Index a = 0; a < A; ++a) {
        pi.probs(s, a) = detail::require_number(
            rows[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)], "probs entry");
      }
    }
    return pi;
  }
  throw FormatError("policy needs an 'actions' or 'probs' field");
}

}  // namespace amdp
