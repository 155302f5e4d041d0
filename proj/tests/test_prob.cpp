#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "persuasion/errors.hpp"
#include "persuasion/prob.hpp"
#include "support/properties.hpp"

using namespace persuasion;
using doctest::Approx;

namespace {

// h2 evaluated independently of the library.
double h2(double p) { return -p * std::log2(p) - (1 - p) * std::log2(1 - p); }

}  // namespace

TEST_CASE("distribution rejects invalid vectors") {
  CHECK_THROWS_AS(Distribution({0.5, 0.6}), InvalidArgument);
  CHECK_THROWS_AS(Distribution({-0.1, 1.1}), InvalidArgument);
  CHECK_THROWS_AS(Distribution({std::numeric_limits<double>::quiet_NaN(), 1.0}), InvalidArgument);
  CHECK_THROWS_AS(Distribution(std::vector<double>{}), InvalidArgument);
  CHECK_NOTHROW(Distribution({0.25, 0.75}));
  CHECK(Distribution::uniform(4)[2] == 0.25);
  CHECK(Distribution::point_mass(3, 1).values() == std::vector<double>{0, 1, 0});
}

TEST_CASE("channel rows must share an output alphabet") {
  CHECK_THROWS_AS(Channel({Distribution({1.0}), Distribution({0.5, 0.5})}), InvalidArgument);
  const auto ch = Channel::from_rows({{0.9, 0.1}, {0.2, 0.8}});
  const auto out = ch.output(Distribution({0.5, 0.5}));
  CHECK(out[0] == Approx(0.55).epsilon(1e-14));
}

TEST_CASE("entropy") {
  CHECK(entropy(Distribution({1.0, 0.0})) == 0.0);
  CHECK(entropy(Distribution({0.5, 0.5})) == Approx(1.0).epsilon(1e-15));
  CHECK(entropy(Distribution({0.1, 0.9})) == Approx(0.468996).epsilon(1e-6));
  CHECK(entropy(Distribution({0.1, 0.9})) == Approx(h2(0.1)).epsilon(1e-14));
  CHECK(entropy(Distribution::uniform(3)) == Approx(std::log2(3.0)).epsilon(1e-14));
}

TEST_CASE("mutual information") {
  const auto u = Distribution::uniform(2);
  CHECK(mutual_information(u, Channel::constant(2, Distribution({0.3, 0.7}))) == Approx(0.0).epsilon(1e-15));
  CHECK(mutual_information(u, Channel::identity(2)) == Approx(1.0).epsilon(1e-15));
  const auto bsc = Channel::from_rows({{0.9, 0.1}, {0.1, 0.9}});
  CHECK(mutual_information(u, bsc) == Approx(0.531004).epsilon(1e-6));
  CHECK(mutual_information(u, bsc) == Approx(1.0 - h2(0.1)).epsilon(1e-13));
}

TEST_CASE("conditional mutual information") {
  const auto u = Distribution::uniform(2);
  const PairAlphabet a{2, 2};
  // W1 independent of (U, W2)
  const auto indep = Channel::from_rows({{0.3, 0.2, 0.3, 0.2}, {0.1, 0.4, 0.1, 0.4}});
  CHECK(conditional_mutual_information(u, indep, a) == Approx(0.0).epsilon(1e-12));
  // W2 constant, W1 = U
  const auto copy = Channel::from_rows({{1, 0, 0, 0}, {0, 0, 1, 0}});
  CHECK(conditional_mutual_information(u, copy, a) == Approx(1.0).epsilon(1e-12));
  CHECK(mutual_information(u, marginalize_w1(copy, a)) == Approx(0.0).epsilon(1e-15));
}

TEST_CASE("kl divergence") {
  const Distribution p({0.3, 0.7});
  CHECK(kl_divergence(p, p) == 0.0);
  CHECK(kl_divergence(Distribution({0.5, 0.5}), Distribution({0.25, 0.75})) == Approx(0.207519).epsilon(1e-6));
  CHECK(kl_divergence(Distribution({0.5, 0.5}), Distribution({0.25, 0.75})) ==
        Approx(0.5 * std::log2(2.0) + 0.5 * std::log2(0.5 / 0.75)).epsilon(1e-14));
  CHECK(std::isinf(kl_divergence(Distribution({0.5, 0.5}), Distribution({1.0, 0.0}))));
  // mass of q outside supp p is fine
  CHECK(std::isfinite(kl_divergence(Distribution({1.0, 0.0}), Distribution({0.5, 0.5}))));
}

TEST_CASE("posterior") {
  const auto perfect = posterior(Distribution::uniform(2), Channel::identity(2), 0);
  CHECK(perfect.values() == std::vector<double>{1.0, 0.0});
  const Distribution prior({0.2, 0.5, 0.3});
  const auto flat = posterior(prior, Channel::constant(3, Distribution({0.4, 0.6})), 1);
  for (std::size_t i = 0; i < 3; ++i) CHECK(flat[i] == Approx(prior[i]).epsilon(1e-15));
  const auto b = posterior(Distribution({0.3, 0.7}), Channel::from_rows({{0.8, 0.2}, {0.2, 0.8}}), 1);
  CHECK(b[0] == Approx(0.096774).epsilon(1e-6));
  CHECK(b[1] == Approx(0.903226).epsilon(1e-6));
  CHECK(b[0] == Approx(0.06 / 0.62).epsilon(1e-14));
  CHECK_THROWS_AS(posterior(Distribution({1.0, 0.0}), Channel::identity(2), 1), ZeroProbabilityObservation);
}

TEST_CASE("typicality") {
  const JointDistribution uni({2}, {0.5, 0.5});
  const std::vector<Sequence> balanced{{0, 1, 1, 0}};
  CHECK(is_typical(balanced, uni, 1e-9));
  const std::vector<Sequence> zeros{{0, 0, 0, 0}};
  CHECK(type_deviation(zeros, uni) == Approx(1.0).epsilon(1e-15));
  CHECK_FALSE(is_typical(zeros, uni, 0.1));
  CHECK(is_typical(zeros, uni, 2.0));
  const JointDistribution pair({2, 2}, {0.25, 0.25, 0.25, 0.25});
  const std::vector<Sequence> two{{0, 0, 1, 1}, {0, 1, 0, 1}};
  CHECK(type_deviation(two, pair) == Approx(0.0).epsilon(1e-15));
  const std::vector<Sequence> ragged{{0, 0}, {0}};
  CHECK_THROWS_AS(type_deviation(ragged, pair), InvalidArgument);
}

TEST_CASE("joint distribution marginals") {
  const auto j = JointDistribution::from_channel(Distribution({0.3, 0.7}), Channel::from_rows({{0.1, 0.2, 0.3, 0.4},
                                                                                             {0.4, 0.3, 0.2, 0.1}}),
                                                 {2, 2});
  CHECK(j.rank() == 3);
  const auto m0 = j.marginal(0);
  CHECK(m0[0] == Approx(0.3).epsilon(1e-15));
  const auto m2 = j.marginal(2);
  CHECK(m2[0] == Approx(0.3 * 0.4 + 0.7 * 0.6).epsilon(1e-14));
}

TEST_CASE("mutual information ignores output relabeling") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 200; ++i) {
    const auto p = testing::random_distribution(rng, 3);
    const auto ch = testing::random_channel(rng, 3, 4);
    std::vector<Distribution> rows;
    for (const auto& r : ch.rows()) rows.push_back(Distribution({r[2], r[0], r[3], r[1]}));
    CHECK(mutual_information(p, Channel(rows)) == Approx(mutual_information(p, ch)).epsilon(1e-12));
  }
}

TEST_CASE("kl is nonnegative and vanishes on the diagonal") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    const auto p = testing::random_distribution(rng, 4);
    const auto q = testing::random_distribution(rng, 4);
    CHECK(kl_divergence(p, q) >= 0.0);
    CHECK(kl_divergence(p, p) == 0.0);
  }
}

TEST_CASE("property suites, 1000 cases each") {
  CHECK(testing::normalization_failures(1000, 101) == 0);
  CHECK(testing::chain_rule_failures(1000, 102) == 0);
}
