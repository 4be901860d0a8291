#include <catch2/catch_amalgamated.hpp>

#include "amdp/chain.hpp"
#include "amdp/solvers.hpp"
#include "support.hpp"

using namespace amdp;
using Catch::Approx;

TEST_CASE("discounted value of a self-loop is the geometric series") {
  const auto v = dmdp_policy_value(fixtures::self_loop(1.0), DeterministicPolicy{{0}}, 0.9);
  CHECK(v(0) == Approx(10.0).epsilon(1e-14));
}

TEST_CASE("discounted value of the cycle matches fixed-point iteration") {
  const double g = 0.9;
  const auto m = fixtures::cycle();
  const auto v = dmdp_policy_value(m, DeterministicPolicy{{0, 0}}, g);
  const auto oracle = fixtures::iterate_discounted(induce_chain(m, DeterministicPolicy{{0, 0}}), g);
  CHECK(std::abs(v(0) - oracle(0)) <= 1e-10);
  CHECK(std::abs(v(1) - oracle(1)) <= 1e-10);
  CHECK(v(0) == Approx(5.2631578947).margin(1e-9));
  CHECK(v(1) == Approx(4.7368421053).margin(1e-9));
}

TEST_CASE("zero rewards give zero value, zero Q and the all-zeros policy") {
  const auto base = fixtures::stay_or_cycle();
  const auto m = base.with_rewards(RewardTable::Zero(2, 2));
  CHECK(dmdp_policy_value(m, DeterministicPolicy{{1, 0}}, 0.7).cwiseAbs().maxCoeff() == 0.0);
  const auto sol = dmdp_value_iteration(m, 0.7, 1e-6);
  CHECK(sol.q.cwiseAbs().maxCoeff() == 0.0);
  CHECK(sol.policy.actions == std::vector<std::size_t>{0, 0});
}

TEST_CASE("value iteration on a one-state two-action MDP") {
  const auto m = fixtures::make(1, 2, {{{1}, {1}}}, {{0.2, 0.8}});
  const auto sol = dmdp_value_iteration(m, 0.5, 1e-9);
  CHECK(sol.policy.actions == std::vector<std::size_t>{1});
  CHECK(sol.value(0) == Approx(1.6).margin(1e-9));
}

TEST_CASE("value iteration prefers staying when its discounted value is larger") {
  const auto m = fixtures::stay_or_cycle();
  const double g = 0.99;
  const auto sol = dmdp_value_iteration(m, g, 1e-6);
  CHECK(sol.policy.actions[0] == 1);
  const double stay = dmdp_policy_value(m, DeterministicPolicy{{1, 0}}, g)(0);
  const double move = dmdp_policy_value(m, DeterministicPolicy{{0, 0}}, g)(0);
  CHECK(stay == Approx(60.0).epsilon(1e-12));
  CHECK(move == Approx(1.0 / (1.0 - g * g)).epsilon(1e-12));
}

TEST_CASE("value iteration returns an eps-optimal greedy policy") {
  const auto corpus = fixtures::small_corpus(60, 31);
  for (const double g : {0.5, 0.9, 0.99}) {
    for (const auto& e : corpus) {
      const double eps = 1e-4;
      const auto sol = dmdp_value_iteration(e.mdp, g, eps);
      const auto exact = dmdp_optimal(e.mdp, g);
      const auto vpi = dmdp_policy_value(e.mdp, sol.policy, g);
      CHECK((exact.value - vpi).maxCoeff() <= eps + 1e-9);
      CHECK((exact.value - sol.value).cwiseAbs().maxCoeff() <= eps + 1e-9);
    }
  }
}

TEST_CASE("discounted evaluation is the Bellman fixed point and optimal values dominate") {
  const auto corpus = fixtures::small_corpus(40, 41);
  for (const double g : {0.5, 0.9, 0.99}) {
    for (const auto& e : corpus) {
      const auto star = dmdp_optimal(e.mdp, g);
      for_each_policy(e.mdp, [&](const DeterministicPolicy& pi) {
        const auto c = induce_chain(e.mdp, pi);
        const auto v = dmdp_chain_value(c, g);
        CHECK((c.reward + g * c.matrix * v - v).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK((v - star.value).maxCoeff() <= 1e-7);
      });
    }
  }
}

TEST_CASE("discount factor outside (0,1) is rejected") {
  CHECK_THROWS_AS(dmdp_policy_value(fixtures::cycle(), DeterministicPolicy{{0, 0}}, 1.0),
                  ValidationError);
  CHECK_THROWS_AS(dmdp_value_iteration(fixtures::cycle(), 0.0, 1e-3), ValidationError);
}

TEST_CASE("gain and bias of small chains") {
  const auto one = amdp_gain_bias(fixtures::self_loop(0.7), DeterministicPolicy{{0}});
  CHECK(one.gain(0) == Approx(0.7).epsilon(1e-14));
  CHECK(std::abs(one.bias(0)) <= 1e-14);

  const auto cyc = amdp_gain_bias(fixtures::cycle(), DeterministicPolicy{{0, 0}});
  CHECK(cyc.gain(0) == Approx(0.5).epsilon(1e-12));
  CHECK(cyc.gain(1) == Approx(0.5).epsilon(1e-12));
  CHECK(cyc.bias(0) == Approx(0.25).epsilon(1e-12));
  CHECK(cyc.bias(1) == Approx(-0.25).epsilon(1e-12));

  const auto d4 = amdp_gain_bias(fixtures::two_state_chain(4.0), DeterministicPolicy{{0, 0}});
  CHECK(d4.gain(0) == Approx(0.8).epsilon(1e-12));
  CHECK(d4.gain(1) == Approx(0.8).epsilon(1e-12));
}

TEST_CASE("deviation-matrix bias matches the Cesaro oracle on the cycle") {
  const auto chain = induce_chain(fixtures::cycle(), DeterministicPolicy{{0, 0}});
  const auto gb = chain_gain_bias(chain);
  const auto oracle = fixtures::cesaro_bias(chain, gb.gain, 100000);
  CHECK((gb.bias - oracle).cwiseAbs().maxCoeff() <= 1e-4);
}

TEST_CASE("gain and bias identities hold for every policy on the corpus") {
  const auto corpus = fixtures::small_corpus(80, 51);
  for (const auto& e : corpus) {
    for_each_policy(e.mdp, [&](const DeterministicPolicy& pi) {
      const auto c = induce_chain(e.mdp, pi);
      const auto cs = decompose_chain(c.matrix);
      const auto gb = chain_gain_bias(c, cs);
      CHECK((c.matrix * gb.gain - gb.gain).cwiseAbs().maxCoeff() <= 1e-9);
      CHECK((gb.gain + gb.bias - c.reward - c.matrix * gb.bias).cwiseAbs().maxCoeff() <= 1e-9);
      CHECK((cs.limiting_matrix * gb.bias).cwiseAbs().maxCoeff() <= 1e-9);
      for (std::size_t k = 0; k < cs.recurrent_classes.size(); ++k) {
        double weighted = 0.0;
        for (std::size_t j = 0; j < cs.recurrent_classes[k].size(); ++j) {
          weighted += cs.stationary[k](static_cast<Eigen::Index>(j)) *
                      gb.bias(static_cast<Eigen::Index>(cs.recurrent_classes[k][j]));
        }
        CHECK(std::abs(weighted) <= 1e-9);
      }
    });
  }
}

TEST_CASE("gain equals the limiting average of the scaled discounted value") {
  const auto corpus = fixtures::small_corpus(60, 61);
  UniformStream rng(3);
  for (const auto& e : corpus) {
    const auto pi = random_policy(e.mdp, rng);
    const auto c = induce_chain(e.mdp, pi);
    const auto cs = decompose_chain(c.matrix);
    const auto gb = chain_gain_bias(c, cs);
    for (const double g : {0.5, 0.9, 0.99}) {
      const auto v = dmdp_chain_value(c, g);
      CHECK((gb.gain - (1 - g) * cs.limiting_matrix * v).cwiseAbs().maxCoeff() <= 1e-8);
      const auto n = c.matrix.rows();
      const Matrix lhs = cs.limiting_matrix * (Matrix::Identity(n, n) - g * c.matrix);
      CHECK((lhs - (1 - g) * cs.limiting_matrix).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("finite-horizon values") {
  const auto m = fixtures::cycle();
  const DeterministicPolicy pi{{0, 0}};
  CHECK(finite_horizon_value(m, pi, 1) == induce_chain(m, pi).reward);
  const auto v5 = finite_horizon_value(m, pi, 5);
  CHECK(v5(0) == 3.0);
  CHECK(v5(1) == 2.0);
  CHECK_THROWS_AS(finite_horizon_value(m, pi, 0), ValidationError);
}

TEST_CASE("finite-horizon value decomposes into gain, bias and a transient term") {
  const auto corpus = fixtures::small_corpus(60, 71);
  UniformStream rng(4);
  for (const auto& e : corpus) {
    const auto pi = random_policy(e.mdp, rng);
    const auto c = induce_chain(e.mdp, pi);
    const auto gb = chain_gain_bias(c);
    Matrix Pt = Matrix::Identity(c.matrix.rows(), c.matrix.cols());
    Vector v = Vector::Zero(c.reward.size());
    for (std::size_t T = 1; T <= 200; ++T) {
      v = c.reward + c.matrix * v;
      Pt = Pt * c.matrix;
      const Vector rhs = static_cast<double>(T) * gb.gain + gb.bias - Pt * gb.bias;
      CHECK((v - rhs).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
}

TEST_CASE("single-action MDPs: the optimum is the only policy") {
  for (const auto& m : {fixtures::cycle(), fixtures::two_state_chain(4.0), fixtures::self_loop(0.7)}) {
    const auto opt = amdp_optimal(m, AmdpMethod::enumerate);
    const auto gb = amdp_gain_bias(m, uniform_action_policy(m));
    CHECK((opt.gain - gb.gain).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((opt.bias - gb.bias).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(opt.weakly_communicating);
  }
}

TEST_CASE("AMDP optimum satisfies the optimality equation and agrees across methods") {
  const auto corpus = fixtures::small_corpus(150, 81);
  for (const auto& e : corpus) {
    const auto en = amdp_optimal(e.mdp, AmdpMethod::enumerate);
    const auto rv = amdp_optimal(e.mdp, AmdpMethod::relative_vi);
    INFO(e.id);
    CHECK(en.weakly_communicating);
    CHECK(span(en.gain) <= 1e-9);
    CHECK(bellman_optimality_residual(e.mdp, en.gain, en.bias) <= 1e-8);
    CHECK(bellman_optimality_residual(e.mdp, rv.gain, rv.bias) <= 1e-8);
    CHECK(std::abs(en.gain(0) - rv.gain(0)) <= 1e-8);
    CHECK(std::abs(en.H - rv.H) <= 1e-6);
    // The greedy policy of relative VI is gain optimal.
    const auto g = amdp_gain_bias(e.mdp, rv.policy).gain;
    CHECK(g.minCoeff() >= en.gain.minCoeff() - 1e-8);
    // Brute-force check of gain optimality.
    for_each_policy(e.mdp, [&](const DeterministicPolicy& pi) {
      CHECK(amdp_gain_bias(e.mdp, pi).gain.minCoeff() <= en.gain.minCoeff() + 1e-9);
    });
  }
}

TEST_CASE("enumeration budget is enforced") {
  AmdpOptions opt;
  opt.enumeration_budget = 3;
  CHECK_THROWS_AS(amdp_optimal(fixtures::stay_or_cycle(), AmdpMethod::enumerate, opt),
                  SolverError);
}

TEST_CASE("h_gamma_star examples") {
  const auto loop = fixtures::self_loop(0.7);
  const auto lopt = amdp_optimal(loop, AmdpMethod::enumerate);
  for (const double g : {0.3, 0.9, 0.99}) {
    CHECK(std::abs(h_gamma_star(loop, g, lopt)(0)) <= 1e-7);
  }
  const auto m = fixtures::cycle();
  const auto opt = amdp_optimal(m, AmdpMethod::enumerate);
  const auto h = h_gamma_star(m, 0.9, opt);
  CHECK(h(0) == Approx(0.2631578947).margin(1e-8));
  CHECK(h(1) == Approx(-0.2631578947).margin(1e-8));
}

TEST_CASE("h_gamma_star solves the rewritten optimality equation and stays near h*") {
  const auto corpus = fixtures::small_corpus(80, 91);
  for (const auto& e : corpus) {
    const auto opt = amdp_optimal(e.mdp, AmdpMethod::enumerate);
    for (const double g : {0.5, 0.9, 0.99}) {
      const auto h = h_gamma_star(e.mdp, g, opt);
      const Vector best = bellman_q(e.mdp, h, g).rowwise().maxCoeff();
      CHECK((opt.gain + h - best).cwiseAbs().maxCoeff() <= 1e-7);
      CHECK((opt.bias - h).cwiseAbs().maxCoeff() <= opt.bias.cwiseAbs().maxCoeff() + 1e-7);
    }
  }
}
