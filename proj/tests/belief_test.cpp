#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "discovery/belief.hpp"
#include "support.hpp"

using namespace discovery;
using discovery::testing::brute_force_posterior;
using discovery::testing::random_simplex;

namespace {

std::vector<double> probs(const BeliefState& b) {
  const auto p = b.posterior();
  return {p.begin(), p.end()};
}

}  // namespace

TEST(SingleTurnWeights, UniformLikelihoods) {
  const std::vector<double> lik{1, 1, 1, 1};
  const auto w = single_turn_weights(lik);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(w[i], 0.25);
  EXPECT_TRUE(w.uniform());
}

TEST(SingleTurnWeights, Normalizes) {
  const std::vector<double> a{0.9, 0.1};
  EXPECT_DOUBLE_EQ(single_turn_weights(a)[0], 0.9);
  EXPECT_DOUBLE_EQ(single_turn_weights(a)[1], 0.1);
  const std::vector<double> b{2, 3, 5};
  const auto w = single_turn_weights(b);
  EXPECT_DOUBLE_EQ(w[0], 0.2);
  EXPECT_DOUBLE_EQ(w[1], 0.3);
  EXPECT_DOUBLE_EQ(w[2], 0.5);
}

TEST(SingleTurnWeights, NonUniformPrior) {
  const std::vector<double> lik{1, 1}, prior{3, 1};
  const auto w = single_turn_weights(lik, std::span<const double>(prior));
  EXPECT_DOUBLE_EQ(w[0], 0.75);
  EXPECT_DOUBLE_EQ(w[1], 0.25);
}

TEST(SingleTurnWeights, FloorMakesAllZeroUniform) {
  const std::vector<double> lik{0, 0, 0};
  const auto w = single_turn_weights(lik);
  EXPECT_TRUE(w.uniform());
  const std::vector<double> one{1, 0};
  EXPECT_GT(single_turn_weights(one)[1], 0.0);
}

TEST(SingleTurnWeights, LengthMismatchIsInvalidInput) {
  const std::vector<double> lik{1, 2}, prior{1, 2, 3};
  try {
    single_turn_weights(lik, std::span<const double>(prior));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_input);
  }
  const std::vector<double> negative{1, -1};
  EXPECT_THROW(single_turn_weights(negative), Error);
}

TEST(Update, SingleTurnK1) {
  const auto b = BeliefState(2, 1).update(TurnWeights({0.9, 0.1}));
  EXPECT_NEAR(b.posterior()[0], 0.9, 1e-12);
  EXPECT_NEAR(b.posterior()[1], 0.1, 1e-12);
}

TEST(Update, UninformativeSecondTurnLeavesPosterior) {
  const auto b1 = BeliefState(2, 1).update(TurnWeights({0.9, 0.1}));
  const auto b2 = b1.update(TurnWeights({0.5, 0.5}));
  EXPECT_EQ(probs(b1), probs(b2));
  EXPECT_EQ(b2.exchanges(), 2u);
}

TEST(Update, PairwiseSumScores) {
  const auto b = BeliefState(3, 2).update(TurnWeights({0.5, 0.3, 0.2}));
  const auto ls = b.log_scores();
  EXPECT_NEAR(std::exp(ls[0]), 0.8, 1e-12);
  EXPECT_NEAR(std::exp(ls[1]), 0.7, 1e-12);
  EXPECT_NEAR(std::exp(ls[2]), 0.5, 1e-12);
}

TEST(Update, UniverseMismatch) {
  try {
    BeliefState(3, 1).update(TurnWeights({0.5, 0.5}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_input);
  }
}

TEST(SubsetPosterior, UniformWithNoExchanges) {
  const auto post = subset_posterior(BeliefState(3, 2));
  ASSERT_EQ(post.size(), 3u);
  for (const auto& s : post) EXPECT_NEAR(s.probability, 1.0 / 3.0, 1e-15);
  EXPECT_EQ(post[0].subset, (std::vector<FactId>{0, 1}));
  EXPECT_EQ(post[1].subset, (std::vector<FactId>{0, 2}));
  EXPECT_EQ(post[2].subset, (std::vector<FactId>{1, 2}));
}

TEST(SubsetPosterior, NormalizesPairScores) {
  const auto post = subset_posterior(BeliefState(3, 2).update(TurnWeights({0.5, 0.3, 0.2})));
  EXPECT_NEAR(post[0].probability, 0.40, 1e-12);
  EXPECT_NEAR(post[1].probability, 0.35, 1e-12);
  EXPECT_NEAR(post[2].probability, 0.25, 1e-12);
}

TEST(SubsetPosterior, K1IsElementwiseProduct) {
  const auto b = BeliefState(2, 1).update(TurnWeights({0.9, 0.1})).update(TurnWeights({0.8, 0.2}));
  EXPECT_NEAR(b.posterior()[0], 0.72 / 0.74, 1e-12);
  EXPECT_NEAR(b.posterior()[1], 0.02 / 0.74, 1e-12);
}

TEST(SubsetPosterior, CapacityErrorNamesCountAndCap) {
  const BeliefState b(100, 5);  // C(100,5) = 75,287,520
  EXPECT_FALSE(b.enumerable());
  try {
    subset_posterior(b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::capacity);
    EXPECT_NE(std::string(e.what()).find("75287520"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("1000000"), std::string::npos);
  }
  // Turn weights are still tracked past the cap.
  std::vector<double> w(100, 0.01);
  EXPECT_EQ(b.update(TurnWeights(w)).exchanges(), 1u);
  EXPECT_TRUE(BeliefState(100, 1).enumerable());
  EXPECT_TRUE(BeliefState(30, 3).enumerable());
}

TEST(FactMarginals, Examples) {
  for (double m : fact_marginals(BeliefState(3, 2))) EXPECT_NEAR(m, 2.0 / 3.0, 1e-12);

  const auto m = fact_marginals(BeliefState(3, 2).update(TurnWeights({0.5, 0.3, 0.2})));
  EXPECT_NEAR(m[0], 0.75, 1e-12);
  EXPECT_NEAR(m[1], 0.65, 1e-12);
  EXPECT_NEAR(m[2], 0.60, 1e-12);

  // Repeated evidence against fact 2 drives the posterior to a point mass on {0,1}.
  BeliefState b(3, 2);
  for (int t = 0; t < 60; ++t) b = b.update(single_turn_weights(std::vector<double>{1, 1, 0}));
  const auto point = fact_marginals(b);
  EXPECT_NEAR(point[0], 1.0, 1e-9);
  EXPECT_NEAR(point[1], 1.0, 1e-9);
  EXPECT_NEAR(point[2], 0.0, 1e-9);
}

TEST(Entropy, Examples) {
  EXPECT_EQ(entropy(std::vector<double>{1.0, 0.0}), 0.0);
  EXPECT_NEAR(entropy(std::vector<double>{1. / 3, 1. / 3, 1. / 3}), std::log(3.0), 1e-12);
  EXPECT_NEAR(entropy(std::vector<double>{0.9, 0.1}), 0.3250829733914482, 1e-12);
  EXPECT_THROW(entropy(std::vector<double>{0.5, 0.6}), Error);
}

TEST(PriorEntropy, Examples) {
  EXPECT_NEAR(prior_entropy(2, 1), 0.6931471805599453, 1e-15);
  EXPECT_NEAR(prior_entropy(3, 2), std::log(3.0), 1e-15);
  EXPECT_NEAR(prior_entropy(30, 3), 8.308938252595778, 1e-12);
  EXPECT_THROW(prior_entropy(3, 3), Error);
  EXPECT_THROW(prior_entropy(3, 0), Error);
}

TEST(DiscoveryScore, Examples) {
  EXPECT_EQ(discovery_score(BeliefState(30, 3)), 0.0);
  EXPECT_NEAR(discovery_score(BeliefState(2, 1).update(TurnWeights({0.9, 0.1}))), 0.3680642071684971, 1e-12);
  EXPECT_NEAR(discovery_score(BeliefState(3, 2).update(TurnWeights({0.5, 0.3, 0.2}))), 0.018084662063937884,
              1e-12);
}

TEST(TopSubsets, DescendingWithLexicographicTies) {
  const auto top = top_subsets(BeliefState(3, 2).update(TurnWeights({0.5, 0.3, 0.2})), 3);
  ASSERT_EQ(top.size(), 3u);
  EXPECT_EQ(top[0].subset, (std::vector<FactId>{0, 1}));
  EXPECT_EQ(top[1].subset, (std::vector<FactId>{0, 2}));
  EXPECT_EQ(top[2].subset, (std::vector<FactId>{1, 2}));
  EXPECT_FALSE(unique_argmax_subset(BeliefState(3, 2)).has_value());
}

// Properties over random weight stacks.

class BeliefProperties : public ::testing::Test {
 protected:
  RandomStream rng = make_stream(20240601);
};

TEST_F(BeliefProperties, PosteriorMatchesBruteForceAndIsNormalized) {
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 9);
    const std::size_t k = 1 + uniform_index(rng, std::min<std::size_t>(3, n - 1));
    const std::size_t turns = uniform_index(rng, 21);
    std::vector<std::vector<double>> ws;
    BeliefState b(n, k);
    for (std::size_t t = 0; t < turns; ++t) {
      ws.push_back(random_simplex(rng, n));
      b = b.update(TurnWeights(ws.back()));
    }
    const auto p = b.posterior();
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-9);
    const auto oracle = brute_force_posterior(n, k, ws);
    ASSERT_EQ(oracle.size(), p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_GE(p[i], 0.0);
      EXPECT_TRUE(std::ranges::equal(b.subsets()[i], oracle[i].ids));
      EXPECT_NEAR(p[i], oracle[i].probability, 1e-9 * std::max(1.0, oracle[i].probability));
    }
    const double score = discovery_score(b);
    EXPECT_GE(score, 0.0);
    EXPECT_LE(score, prior_entropy(n, k) + 1e-12);
    const auto m = fact_marginals(b);
    EXPECT_NEAR(std::accumulate(m.begin(), m.end(), 0.0), static_cast<double>(k), 1e-9);
  }
}

TEST_F(BeliefProperties, IncrementalEqualsFromScratch) {
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 9);
    const std::size_t k = 1 + uniform_index(rng, std::min<std::size_t>(3, n - 1));
    std::vector<TurnWeights> ws;
    BeliefState inc(n, k);
    for (std::size_t t = 0; t < 1 + uniform_index(rng, 20); ++t) {
      ws.emplace_back(random_simplex(rng, n));
      inc = inc.update(ws.back());
    }
    const auto scratch = BeliefState::from_weights(n, k, ws);
    for (std::size_t i = 0; i < inc.posterior().size(); ++i)
      EXPECT_LE(std::abs(inc.posterior()[i] - scratch.posterior()[i]), 1e-12 * scratch.posterior()[i]);
  }
}

TEST_F(BeliefProperties, SingleTurnScoreTotalIsBinomial) {
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 9);
    const std::size_t k = 1 + uniform_index(rng, std::min<std::size_t>(3, n - 1));
    const auto b = BeliefState(n, k).update(TurnWeights(random_simplex(rng, n)));
    double total = 0.0;
    for (double ls : b.log_scores()) total += std::exp(ls);
    EXPECT_NEAR(total, static_cast<double>(*binomial(n - 1, k - 1)), 1e-9);
  }
}

TEST_F(BeliefProperties, UniformTurnNeverChangesPosterior) {
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 9);
    const std::size_t k = 1 + uniform_index(rng, std::min<std::size_t>(3, n - 1));
    auto b = BeliefState(n, k).update(TurnWeights(random_simplex(rng, n)));
    const auto before = probs(b);
    const auto after = probs(b.update(single_turn_weights(std::vector<double>(n, 0.37))));
    for (std::size_t i = 0; i < before.size(); ++i) EXPECT_NEAR(before[i], after[i], 1e-12);
  }
}

TEST_F(BeliefProperties, PermutationEquivariance) {
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + uniform_index(rng, 6);
    const std::size_t k = 1 + uniform_index(rng, std::min<std::size_t>(3, n - 1));
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[uniform_index(rng, i + 1)]);

    BeliefState b(n, k), pb(n, k);
    for (int t = 0; t < 4; ++t) {
      const auto w = random_simplex(rng, n);
      std::vector<double> pw(n);
      for (std::size_t f = 0; f < n; ++f) pw[perm[f]] = w[f];
      b = b.update(TurnWeights(w));
      pb = pb.update(TurnWeights(pw));
    }
    const auto& sub = b.subsets();
    for (std::size_t i = 0; i < sub.size(); ++i) {
      std::vector<FactId> mapped;
      for (FactId f : sub[i]) mapped.push_back(static_cast<FactId>(perm[f]));
      std::ranges::sort(mapped);
      const auto j = pb.subsets().find(mapped);
      ASSERT_TRUE(j.has_value());
      EXPECT_NEAR(b.posterior()[i], pb.posterior()[*j], 1e-12);
    }
  }
}

TEST(SubsetIndex, LexicographicEnumeration) {
  const SubsetIndex idx(5, 3);
  EXPECT_EQ(idx.size(), 10u);
  for (std::size_t i = 1; i < idx.size(); ++i)
    EXPECT_TRUE(std::ranges::lexicographical_compare(idx[i - 1], idx[i]));
  const std::vector<FactId> last{2, 3, 4};
  EXPECT_EQ(idx.find(last), 9u);
  const std::vector<FactId> bad{0, 0, 1};
  EXPECT_FALSE(idx.find(bad).has_value());
}
