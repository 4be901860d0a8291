#pragma once

// Structural analysis of Markov chains and MDPs: recurrent decomposition,
// limiting matrix, period, end components, diameter, mixing time and the
// aperiodicity (lazy-chain) transform.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <vector>

#include "amdp/mdp.hpp"

namespace amdp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Digraph as adjacency lists over states 0..n-1.
using Digraph = std::vector<std::vector<std::size_t>>;

/// Tarjan's algorithm. Components come out in reverse topological order;
/// states inside a component are sorted.
inline std::vector<std::vector<std::size_t>> strongly_connected_components(const Digraph& g) {
  const std::size_t n = g.size();
  constexpr std::size_t kUnvisited = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> out;
  std::size_t counter = 0;

  // Iterative DFS: frame = (vertex, next edge position).
  std::vector<std::pair<std::size_t, std::size_t>> frames;
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    frames.emplace_back(root, 0);
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      auto& [v, pos] = frames.back();
      if (pos < g[v].size()) {
        const std::size_t w = g[v][pos++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const std::size_t done = v;
      frames.pop_back();
      if (!frames.empty()) {
        const std::size_t parent = frames.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
      if (low[done] == index[done]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != done);
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
      }
    }
  }
  return out;
}

inline Digraph support_graph(const Matrix& P) {
  Digraph g(static_cast<std::size_t>(P.rows()));
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    for (Eigen::Index j = 0; j < P.cols(); ++j) {
      if (P(i, j) > 0.0) g[static_cast<std::size_t>(i)].push_back(static_cast<std::size_t>(j));
    }
  }
  return g;
}

/// Recurrent structure of a finite Markov chain.
struct ChainStructure {
  std::vector<std::vector<std::size_t>> recurrent_classes;
  std::vector<std::size_t> transient_states;
  /// stationary[k][i] is the mass of recurrent_classes[k][i].
  std::vector<Vector> stationary;
  Matrix limiting_matrix;
  std::vector<std::size_t> period;

  bool unichain() const { return recurrent_classes.size() == 1; }
  bool aperiodic() const {
    return std::all_of(period.begin(), period.end(), [](std::size_t p) { return p == 1; });
  }
};

namespace detail {

inline std::size_t class_period(const Digraph& g, const std::vector<std::size_t>& cls,
                                const std::vector<long>& class_of, long k) {
  // BFS levels from the first state; the period is the gcd of
  // level(u) + 1 - level(v) over all intra-class edges u -> v.
  std::vector<long> level(g.size(), -1);
  std::queue<std::size_t> q;
  level[cls.front()] = 0;
  q.push(cls.front());
  long g_cd = 0;
  while (!q.empty()) {
    const std::size_t u = q.front();
    q.pop();
    for (std::size_t v : g[u]) {
      if (class_of[v] != k) continue;
      if (level[v] < 0) {
        level[v] = level[u] + 1;
        q.push(v);
      } else {
        g_cd = std::gcd(g_cd, std::labs(level[u] + 1 - level[v]));
      }
    }
  }
  return static_cast<std::size_t>(g_cd == 0 ? 1 : g_cd);
}

/// Solves nu^T P_C = nu^T, sum(nu) = 1 on an irreducible block.
inline Vector stationary_distribution(const Matrix& block) {
  const Eigen::Index m = block.rows();
  Matrix A = (Matrix::Identity(m, m) - block).transpose();
  A.row(m - 1).setOnes();
  Vector b = Vector::Zero(m);
  b(m - 1) = 1.0;
  return A.fullPivLu().solve(b);
}

inline Matrix sub_matrix(const Matrix& P, const std::vector<std::size_t>& rows,
                         const std::vector<std::size_t>& cols) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          P(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(cols[j]));
    }
  }
  return out;
}

}  // namespace detail

/// Recurrent classes are the closed strongly connected components of the
/// support digraph; everything else is transient. Classes are ordered by
/// their smallest state.
inline ChainStructure decompose_chain(const Matrix& P) {
  const std::size_t n = static_cast<std::size_t>(P.rows());
  const Digraph g = support_graph(P);
  auto sccs = strongly_connected_components(g);

  std::vector<long> scc_of(n, -1);
  for (std::size_t c = 0; c < sccs.size(); ++c) {
    for (std::size_t s : sccs[c]) scc_of[s] = static_cast<long>(c);
  }

  ChainStructure out;
  for (std::size_t c = 0; c < sccs.size(); ++c) {
    bool closed = true;
    for (std::size_t s : sccs[c]) {
      for (std::size_t t : g[s]) closed = closed && scc_of[t] == static_cast<long>(c);
    }
    if (closed) out.recurrent_classes.push_back(sccs[c]);
  }
  std::sort(out.recurrent_classes.begin(), out.recurrent_classes.end());

  std::vector<long> class_of(n, -1);
  for (std::size_t k = 0; k < out.recurrent_classes.size(); ++k) {
    for (std::size_t s : out.recurrent_classes[k]) class_of[s] = static_cast<long>(k);
  }
  for (std::size_t s = 0; s < n; ++s) {
    if (class_of[s] < 0) out.transient_states.push_back(s);
  }

  const auto N = static_cast<Eigen::Index>(n);
  out.limiting_matrix = Matrix::Zero(N, N);
  for (std::size_t k = 0; k < out.recurrent_classes.size(); ++k) {
    const auto& cls = out.recurrent_classes[k];
    Vector nu = detail::stationary_distribution(detail::sub_matrix(P, cls, cls));
    for (std::size_t i : cls) {
      for (std::size_t j = 0; j < cls.size(); ++j) {
        out.limiting_matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cls[j])) =
            nu(static_cast<Eigen::Index>(j));
      }
    }
    out.stationary.push_back(std::move(nu));
    out.period.push_back(detail::class_period(g, cls, class_of, static_cast<long>(k)));
  }

  if (!out.transient_states.empty()) {
    // Absorption probabilities B = (I - Q)^{-1} R, R summed per class.
    const auto& tr = out.transient_states;
    const auto T = static_cast<Eigen::Index>(tr.size());
    const Matrix Q = detail::sub_matrix(P, tr, tr);
    const auto K = static_cast<Eigen::Index>(out.recurrent_classes.size());
    Matrix R = Matrix::Zero(T, K);
    for (Eigen::Index i = 0; i < T; ++i) {
      for (std::size_t t = 0; t < n; ++t) {
        if (class_of[t] >= 0) {
          R(i, class_of[t]) += P(static_cast<Eigen::Index>(tr[static_cast<std::size_t>(i)]),
                                 static_cast<Eigen::Index>(t));
        }
      }
    }
    const Matrix B = (Matrix::Identity(T, T) - Q).partialPivLu().solve(R);
    for (Eigen::Index i = 0; i < T; ++i) {
      const auto s = static_cast<Eigen::Index>(tr[static_cast<std::size_t>(i)]);
      for (Eigen::Index k = 0; k < K; ++k) {
        const auto& cls = out.recurrent_classes[static_cast<std::size_t>(k)];
        const auto& nu = out.stationary[static_cast<std::size_t>(k)];
        for (std::size_t j = 0; j < cls.size(); ++j) {
          out.limiting_matrix(s, static_cast<Eigen::Index>(cls[j])) +=
              B(i, k) * nu(static_cast<Eigen::Index>(j));
        }
      }
    }
  }
  return out;
}

inline ChainStructure decompose_chain(const InducedChain& chain) {
  return decompose_chain(chain.matrix);
}

// ---------------------------------------------------------------------------
// MDP-level connectivity

/// Union support graph: s -> s' when some action reaches s' from s.
inline Digraph mdp_support_graph(const TabularMdp& m) {
  Digraph g(m.num_states());
  for (std::size_t s = 0; s < m.num_states(); ++s) {
    for (std::size_t t = 0; t < m.num_states(); ++t) {
      for (std::size_t a = 0; a < m.num_actions(); ++a) {
        if (m.prob(s, a, t) > 0.0) {
          g[s].push_back(t);
          break;
        }
      }
    }
  }
  return g;
}

/// Maximal end components: maximal state sets that some policy can keep
/// the process inside while visiting every member. Sorted by smallest state.
inline std::vector<std::vector<std::size_t>> maximal_end_components(const TabularMdp& m) {
  const std::size_t n = m.num_states();
  std::vector<std::vector<bool>> allowed(n, std::vector<bool>(m.num_actions(), true));
  std::vector<bool> alive(n, true);

  while (true) {
    Digraph g(n);
    for (std::size_t s = 0; s < n; ++s) {
      if (!alive[s]) continue;
      for (std::size_t a = 0; a < m.num_actions(); ++a) {
        if (!allowed[s][a]) continue;
        for (std::size_t t = 0; t < n; ++t) {
          if (m.prob(s, a, t) > 0.0 && alive[t]) g[s].push_back(t);
        }
      }
    }
    auto sccs = strongly_connected_components(g);
    std::vector<long> scc_of(n, -1);
    for (std::size_t c = 0; c < sccs.size(); ++c) {
      for (std::size_t s : sccs[c]) scc_of[s] = static_cast<long>(c);
    }
    bool changed = false;
    for (std::size_t s = 0; s < n; ++s) {
      if (!alive[s]) continue;
      bool any = false;
      for (std::size_t a = 0; a < m.num_actions(); ++a) {
        if (!allowed[s][a]) continue;
        bool stays = true;
        for (std::size_t t = 0; t < n && stays; ++t) {
          if (m.prob(s, a, t) > 0.0 && (!alive[t] || scc_of[t] != scc_of[s])) stays = false;
        }
        if (!stays) {
          allowed[s][a] = false;
          changed = true;
        } else {
          any = true;
        }
      }
      if (!any) {
        alive[s] = false;
        changed = true;
      }
    }
    if (!changed) {
      std::vector<std::vector<std::size_t>> out;
      for (auto& c : sccs) {
        if (alive[c.front()]) out.push_back(std::move(c));
      }
      std::sort(out.begin(), out.end());
      return out;
    }
  }
}

/// Weakly communicating iff there is exactly one maximal end component:
/// that component is the closed communicating set and every other state is
/// transient under every policy.
inline bool is_weakly_communicating(const TabularMdp& m) {
  return maximal_end_components(m).size() == 1;
}

inline bool is_communicating(const TabularMdp& m) {
  const auto mecs = maximal_end_components(m);
  return mecs.size() == 1 && mecs.front().size() == m.num_states();
}

/// P_tau(s'|s,a) = (1 - tau) P(s'|s,a) + tau [s' = s]; rewards unchanged.
inline TabularMdp aperiodicity_transform(const TabularMdp& m, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw ValidationError("tau must lie in (0,1)");
  RowMatrix P = (1.0 - tau) * m.transitions();
  for (std::size_t s = 0; s < m.num_states(); ++s) {
    for (std::size_t a = 0; a < m.num_actions(); ++a) {
      const Eigen::Index r = m.row_index(s, a);
      P(r, static_cast<Eigen::Index>(s)) += tau;
    }
  }
  return m.with_transitions(std::move(P));
}

// ---------------------------------------------------------------------------
// Diameter

struct DiameterOptions {
  double residual = 1e-9;
  /// Expected hitting times beyond this are declared infinite.
  double divergence_cap = 1e9;
  std::size_t max_sweeps = 10'000'000;
};

namespace detail {

/// States from which `target` is reached with probability one under some
/// policy, with the actions that keep that possibility open.
inline std::vector<bool> almost_sure_reach(const TabularMdp& m, std::size_t target,
                                           std::vector<std::vector<bool>>& allowed) {
  const std::size_t n = m.num_states();
  std::vector<bool> in(n, true);
  allowed.assign(n, std::vector<bool>(m.num_actions(), true));
  while (true) {
    // Backward reachability to target through allowed actions.
    std::vector<bool> reach(n, false);
    reach[target] = true;
    bool grew = true;
    while (grew) {
      grew = false;
      for (std::size_t s = 0; s < n; ++s) {
        if (reach[s] || !in[s]) continue;
        for (std::size_t a = 0; a < m.num_actions() && !reach[s]; ++a) {
          if (!allowed[s][a]) continue;
          for (std::size_t t = 0; t < n; ++t) {
            if (m.prob(s, a, t) > 0.0 && reach[t]) {
              reach[s] = true;
              grew = true;
              break;
            }
          }
        }
      }
    }
    bool changed = false;
    for (std::size_t s = 0; s < n; ++s) {
      if (in[s] && !reach[s]) {
        in[s] = false;
        changed = true;
      }
    }
    for (std::size_t s = 0; s < n; ++s) {
      if (!in[s] || s == target) continue;
      for (std::size_t a = 0; a < m.num_actions(); ++a) {
        if (!allowed[s][a]) continue;
        for (std::size_t t = 0; t < n; ++t) {
          if (m.prob(s, a, t) > 0.0 && !in[t]) {
            allowed[s][a] = false;
            changed = true;
            break;
          }
        }
      }
    }
    if (!changed) return in;
  }
}

}  // namespace detail

/// Minimal expected hitting times to `target` from every state (0 at the
/// target, infinity where no policy reaches it almost surely).
inline Vector min_hitting_times(const TabularMdp& m, std::size_t target,
                                const DiameterOptions& opt = {}) {
  const std::size_t n = m.num_states();
  std::vector<std::vector<bool>> allowed;
  const std::vector<bool> finite = detail::almost_sure_reach(m, target, allowed);

  Vector T = Vector::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    Vector next = T;
    double change = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      if (s == target || !finite[s]) continue;
      double best = kInfinity;
      for (std::size_t a = 0; a < m.num_actions(); ++a) {
        if (!allowed[s][a]) continue;
        double v = 1.0;
        for (std::size_t t = 0; t < n; ++t) {
          const double p = m.prob(s, a, t);
          if (p > 0.0 && t != target) v += p * T(static_cast<Eigen::Index>(t));
        }
        best = std::min(best, v);
      }
      const auto i = static_cast<Eigen::Index>(s);
      next(i) = best;
      change = std::max(change, std::abs(best - T(i)));
    }
    T.swap(next);
    if (T.maxCoeff() > opt.divergence_cap) {
      for (std::size_t s = 0; s < n; ++s) {
        if (s != target) T(static_cast<Eigen::Index>(s)) = kInfinity;
      }
      return T;
    }
    if (change <= opt.residual) break;
  }
  for (std::size_t s = 0; s < n; ++s) {
    if (!finite[s]) T(static_cast<Eigen::Index>(s)) = kInfinity;
  }
  return T;
}

/// D = max over ordered pairs s1 != s2 of min_pi E[tau_{s2} | s1].
inline double diameter(const TabularMdp& m, const DiameterOptions& opt = {}) {
  double d = 0.0;
  for (std::size_t target = 0; target < m.num_states(); ++target) {
    const Vector T = min_hitting_times(m, target, opt);
    for (std::size_t s = 0; s < m.num_states(); ++s) {
      if (s != target) d = std::max(d, T(static_cast<Eigen::Index>(s)));
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// Mixing time

struct MixingOptions {
  /// Compared against max_s || e_s P^t - nu ||_1.
  double threshold = 0.5;
  std::size_t t_cap = 1'000'000;
  std::uint64_t enumeration_budget = 1'000'000;
};

/// max_s || e_s P^t - nu^T ||_1 for a unichain P with limiting matrix Pstar.
inline double l1_distance_to_limit(const Matrix& Pt, const Matrix& Pstar) {
  return (Pt - Pstar).cwiseAbs().rowwise().sum().maxCoeff();
}

/// Least t >= 1 with max_s ||e_s P^t - nu||_1 <= threshold. Infinite when
/// the chain is periodic, has several recurrent classes, or t_cap is hit.
inline double policy_mixing_time(const Matrix& P, const MixingOptions& opt = {}) {
  const ChainStructure cs = decompose_chain(P);
  if (!cs.unichain() || !cs.aperiodic()) return kInfinity;
  Matrix Pt = P;
  for (std::size_t t = 1; t <= opt.t_cap; ++t) {
    if (l1_distance_to_limit(Pt, cs.limiting_matrix) <= opt.threshold) {
      return static_cast<double>(t);
    }
    Pt = Pt * P;
  }
  return kInfinity;
}

/// t_mix = max over deterministic policies of the per-policy mixing time.
inline double mixing_time(const TabularMdp& m, const MixingOptions& opt = {}) {
  if (count_policies(m, opt.enumeration_budget) > opt.enumeration_budget) {
    throw SolverError("mixing_time: policy enumeration budget exceeded");
  }
  double worst = 0.0;
  for_each_policy(m, [&](const DeterministicPolicy& pi) {
    if (worst == kInfinity) return;
    worst = std::max(worst, policy_mixing_time(induce_chain(m, pi).matrix, opt));
  });
  return worst;
}

}  // namespace amdp
