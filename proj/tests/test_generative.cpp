#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "amdp/generative.hpp"
#include "amdp/reduction.hpp"
#include "support.hpp"

using namespace amdp;

TEST_CASE("a deterministic row always yields its target") {
  GenerativeModel gm(fixtures::cycle(), RngSeedSpec{1});
  for (int i = 0; i < 1000; ++i) {
    CHECK(gm.sample_next(0, 0) == 1);
    CHECK(gm.sample_next(1, 0) == 0);
  }
  CHECK(gm.samples_drawn(0, 0) == 1000);
  CHECK(gm.total_samples() == 2000);
  CHECK_THROWS_AS(gm.sample_next(2, 0), ValidationError);
}

TEST_CASE("sampling is a deterministic function of the seed and call order") {
  const auto m = fixtures::small_corpus(1, 5).front().mdp;
  GenerativeModel a(m, RngSeedSpec{42});
  GenerativeModel b(m, RngSeedSpec{42});
  GenerativeModel c(m, RngSeedSpec{43});
  std::vector<std::size_t> xa, xb, xc;
  for (int i = 0; i < 500; ++i) {
    for (std::size_t s = 0; s < m.num_states(); ++s) {
      for (std::size_t act = 0; act < m.num_actions(); ++act) {
        xa.push_back(a.sample_next(s, act));
        xb.push_back(b.sample_next(s, act));
        xc.push_back(c.sample_next(s, act));
      }
    }
  }
  CHECK(xa == xb);
  CHECK(xa != xc);
}

TEST_CASE("per-pair streams do not depend on how pairs interleave") {
  const auto m = fixtures::two_state_chain(3);
  GenerativeModel a(m, RngSeedSpec{9});
  GenerativeModel b(m, RngSeedSpec{9});
  std::vector<std::size_t> first, second;
  for (int i = 0; i < 200; ++i) first.push_back(a.sample_next(0, 0));
  for (int i = 0; i < 200; ++i) {
    b.sample_next(1, 0);
    second.push_back(b.sample_next(0, 0));
  }
  CHECK(first == second);
}

TEST_CASE("empirical frequencies concentrate around the row") {
  const auto row = fixtures::make(2, 1, {{{0.25, 0.75}}, {{1, 0}}}, {{0}, {0}});
  GenerativeModel gm(row, RngSeedSpec{2024});
  const int n = 1000000;
  int zeros = 0;
  for (int i = 0; i < n; ++i) zeros += gm.sample_next(0, 0) == 0;
  // Three binomial standard deviations are about 0.0013.
  CHECK(std::abs(static_cast<double>(zeros) / n - 0.25) <= 0.002);
}

TEST_CASE("one sample per pair gives point-mass rows") {
  const auto corpus = fixtures::small_corpus(10, 17);
  for (const auto& e : corpus) {
    GenerativeModel gm(e.mdp, RngSeedSpec{3});
    const auto em = build_empirical(gm, 1, e.mdp.rewards());
    for (Eigen::Index r = 0; r < em.mdp.transitions().rows(); ++r) {
      CHECK(em.mdp.transitions().row(r).maxCoeff() == 1.0);
      CHECK(em.mdp.transitions().row(r).sum() == 1.0);
    }
  }
}

TEST_CASE("deterministic truth is recovered exactly and counts are exact") {
  const auto m = fixtures::stay_or_cycle();
  for (const std::size_t N : {1u, 7u, 1000u}) {
    GenerativeModel gm(m, RngSeedSpec{N});
    const auto em = build_empirical(gm, N, m.rewards());
    CHECK(em.mdp.transitions() == m.transitions());
    for (std::size_t s = 0; s < 2; ++s) {
      for (std::size_t a = 0; a < 2; ++a) CHECK(gm.samples_drawn(s, a) == N);
    }
    CHECK(gm.total_samples() == 4 * N);
  }
  GenerativeModel gm(m, RngSeedSpec{0});
  CHECK_THROWS_AS(build_empirical(gm, 0, m.rewards()), ValidationError);
}

TEST_CASE("empirical model of the two-state chain is close at N = 1e5") {
  const auto m = fixtures::two_state_chain(4);
  GenerativeModel gm(m, RngSeedSpec{7});
  const auto em = build_empirical(gm, 100000, m.rewards());
  CHECK((em.mdp.transitions() - m.transitions()).cwiseAbs().maxCoeff() <= 0.01);
  CHECK(em.count(0, 0, 0) + em.count(0, 0, 1) == 100000);
  CHECK(validate_mdp(em.mdp).empty());
}

TEST_CASE("median empirical error is non-increasing in N") {
  const auto m = fixtures::small_corpus(1, 23).front().mdp;
  double previous = 1e9;
  for (const std::size_t N : {100u, 1000u, 10000u}) {
    std::vector<double> errs;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      GenerativeModel gm(m, RngSeedSpec{seed});
      const auto em = build_empirical(gm, N, m.rewards());
      errs.push_back((em.mdp.transitions() - m.transitions()).cwiseAbs().maxCoeff());
    }
    std::sort(errs.begin(), errs.end());
    const double median = 0.5 * (errs[14] + errs[15]);
    CHECK(median <= previous);
    previous = median;
  }
}

TEST_CASE("reward perturbation range and determinism") {
  const auto m = fixtures::small_corpus(1, 29).front().mdp;
  CHECK(perturb_rewards(m.rewards(), 0.0, RngSeedSpec{1}) == m.rewards());
  const double xi = 1e-3;
  const auto rp = perturb_rewards(m.rewards(), xi, RngSeedSpec{1});
  const RewardTable delta = rp - m.rewards();
  CHECK(delta.minCoeff() > 0.0);
  CHECK(delta.maxCoeff() < xi);
  CHECK(perturb_rewards(m.rewards(), xi, RngSeedSpec{1}) == rp);
  CHECK(perturb_rewards(m.rewards(), xi, RngSeedSpec{2}) != rp);
  CHECK_THROWS_AS(perturb_rewards(m.rewards(), -1.0, RngSeedSpec{1}), ValidationError);
}

TEST_CASE("the scheduled perturbation moves optimal values by at most xi/(1-gamma)") {
  const auto corpus = fixtures::small_corpus(20, 31);
  for (const auto& e : corpus) {
    const auto p = reduction_params(0.25, 0.1, 2.0, 6, 3);
    CHECK(p.xi < 1e-6);
    const auto rp = perturb_rewards(e.mdp.rewards(), p.xi, RngSeedSpec{5});
    const auto v0 = dmdp_value_iteration(e.mdp, p.gamma, 1e-10).value;
    const auto v1 = dmdp_value_iteration(e.mdp.with_rewards(rp), p.gamma, 1e-10).value;
    CHECK((v1 - v0).cwiseAbs().maxCoeff() <= p.xi / (1 - p.gamma) + 2e-10);
  }
}
