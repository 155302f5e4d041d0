#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "persuasion/block_sim.hpp"
#include "persuasion/errors.hpp"
#include "persuasion/solver.hpp"
#include "support/properties.hpp"

using namespace persuasion;
using doctest::Approx;

namespace {

// W1 and W2 are independent noisy copies of U.
Strategy two_looks(double flip1, double flip2) {
  std::vector<double> t(8);
  for (int u = 0; u < 2; ++u) {
    for (int w1 = 0; w1 < 2; ++w1) {
      for (int w2 = 0; w2 < 2; ++w2) t[u * 4 + w1 * 2 + w2] = (w1 == u ? 1 - flip1 : flip1) * (w2 == u ? 1 - flip2 : flip2);
    }
  }
  return Strategy::from_table(2, {2, 2}, t);
}

Strategy reveal_on_w2() { return Strategy::from_table(2, {1, 2}, std::vector<double>{1, 0, 0, 1}); }

// Hand-written encoding map over binary blocks of length n.
EncodingMap manual_map(int n, std::size_t m1_count, std::size_t m2_count, const Distribution& prior,
                       const std::vector<std::pair<std::size_t, std::size_t>>& msg) {
  EncodingMap map;
  map.n = n;
  map.u_size = 2;
  map.messages = {m1_count, m2_count};
  for (std::size_t b = 0; b < msg.size(); ++b) {
    map.cell.push_back(static_cast<std::uint32_t>(map.messages.cell(msg[b].first, msg[b].second)));
    double p = 1.0;
    for (int t = 0; t < n; ++t) p *= prior[(b >> (n - 1 - t)) & 1];
    map.block_prob.push_back(p);
  }
  return map;
}

}  // namespace

TEST_CASE("codebook generation") {
  const auto g = make_aligned_hamming(Distribution::uniform(2));
  SimConfig cfg;
  cfg.n = 1;
  cfg.eta = 0.0;
  const auto cb = generate_codebook(g, Strategy::uninformative(2, {1, 1}), cfg, 3);
  CHECK(cb.m1_count == 1);
  CHECK(cb.m2_count == 1);
  CHECK(cb.w2(0) == Sequence{0});

  cfg.n = 10;
  cfg.eta = 0.1;
  const auto s = two_looks(0.2, 0.25);
  const auto a = generate_codebook(g, s, cfg, 42), b = generate_codebook(g, s, cfg, 42);
  CHECK(a.w2_words == b.w2_words);
  CHECK(a.w1_words == b.w1_words);
  CHECK(generate_codebook(g, s, cfg, 43).w2_words != a.w2_words);
  const auto r = scheme_rates(g, s, 0.1);
  CHECK(a.m2_count == std::size_t{1} << message_bits(r.r2, 10));
  CHECK(a.m1_count == std::size_t{1} << message_bits(r.r1, 10));

  cfg.n = 16;
  cfg.eta = 1.0;
  CHECK_THROWS_AS(generate_codebook(g, s, cfg, 1), CodebookTooLarge);
}

TEST_CASE("refinement words follow their common word's symbols") {
  // W1 = W2 exactly: every refinement word must copy its common word.
  const auto g = make_aligned_hamming(Distribution({0.6, 0.4}));
  const auto s = Strategy::from_table(2, {2, 2}, std::vector<double>{0.7, 0, 0, 0.3, 0.2, 0, 0, 0.8});
  SimConfig cfg;
  cfg.n = 9;
  const auto cb = generate_codebook(g, s, cfg, 5);
  for (std::size_t m2 = 0; m2 < cb.m2_count; ++m2) {
    for (std::size_t m1 = 0; m1 < cb.m1_count; ++m1) CHECK(cb.w1(m1, m2) == cb.w2(m2));
  }
}

TEST_CASE("encoder") {
  const auto g = make_aligned_hamming(Distribution::uniform(2));
  SimConfig cfg;
  cfg.n = 1;
  cfg.eta = 0.0;
  const auto s1 = Strategy::uninformative(2, {1, 1});
  const auto cb1 = generate_codebook(g, s1, cfg, 1);
  const auto e = encode(Sequence{1}, cb1, g, s1, 2.0);
  CHECK_FALSE(e.error);
  CHECK(e.m1 == 0);
  CHECK(e.m2 == 0);

  const auto skew = make_aligned_hamming(Distribution({1.0, 0.0}));
  const auto cbs = generate_codebook(skew, s1, cfg, 1);
  CHECK(encode(Sequence{1}, cbs, skew, s1, 0.5).error);

  // revealing strategy: a typical block lands on a codeword whose joint type passes the check again
  const auto s = reveal_on_w2();
  cfg.n = 8;
  cfg.eta = 0.5;
  const auto cb = generate_codebook(g, s, cfg, 11);
  const Sequence u{0, 1, 1, 0, 1, 0, 0, 1};
  const auto r = encode(u, cb, g, s, 0.3);
  REQUIRE_FALSE(r.error);
  const auto ref = JointDistribution::from_channel(g.prior(), s.q(), {1, 2});
  const std::vector<Sequence> seqs{u, cb.w1(r.m1, r.m2), cb.w2(r.m2)};
  CHECK(is_typical(seqs, ref, 0.3));
  // nothing earlier in (m2, m1) order would have passed
  for (std::size_t m2 = 0; m2 <= r.m2; ++m2) {
    for (std::size_t m1 = 0; m1 < cb.m1_count; ++m1) {
      if (m2 == r.m2 && m1 >= r.m1) break;
      const std::vector<Sequence> other{u, cb.w1(m1, m2), cb.w2(m2)};
      CHECK_FALSE(is_typical(other, ref, 0.3));
    }
  }
}

TEST_CASE("encoding map agrees with the encoder block by block") {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 30; ++k) {
    const auto g = testing::random_binary_instance(rng);
    std::vector<double> t;
    for (int u = 0; u < 2; ++u) {
      const auto row = testing::random_distribution(rng, 4);
      t.insert(t.end(), row.probs().begin(), row.probs().end());
    }
    const auto s = Strategy::from_table(2, {2, 2}, t);
    SimConfig cfg;
    cfg.n = static_cast<int>(testing::small_size(rng, 3, 11));
    cfg.eta = 0.2;
    cfg.delta = std::uniform_real_distribution<double>(0.1, 0.8)(rng);
    const auto cb = generate_codebook(g, s, cfg, rng());
    const Encoder enc(cb, g, s, cfg.delta);
    const auto map = build_encoding_map(enc, g, 16);
    Sequence u(static_cast<std::size_t>(cfg.n), 0);
    int mismatches = 0;
    for (std::size_t b = 0; b < map.blocks(); ++b) {
      for (int i = 0; i < cfg.n; ++i) u[i] = static_cast<Symbol>((b >> (cfg.n - 1 - i)) & 1);
      const auto r = enc(u);
      mismatches += map.cell[b] != map.messages.cell(r.m1, r.m2);
    }
    CHECK(mismatches == 0);
  }
}

TEST_CASE("exact posteriors on hand-made encodings") {
  const Distribution prior({0.3, 0.7});
  const auto single = exact_posteriors(manual_map(1, 1, 1, prior, {{0, 0}, {0, 0}}), 0, 0);
  CHECK(single.joint[0][0] == Approx(0.3));
  CHECK(single.base[0][0] == Approx(0.3));

  const auto ident = manual_map(1, 1, 2, prior, {{0, 0}, {0, 1}});
  CHECK(exact_posteriors(ident, 0, 0).joint[0].values() == std::vector<double>{1, 0});
  CHECK(exact_posteriors(ident, 0, 1).joint[0].values() == std::vector<double>{0, 1});

  // m2 = 1{u1 = u2} on uniform pairs
  const auto same = manual_map(2, 1, 2, Distribution::uniform(2), {{0, 1}, {0, 0}, {0, 0}, {0, 1}});
  const auto p = exact_posteriors(same, 0, 1);
  CHECK(p.joint[0][0] == Approx(0.5));
  CHECK(p.joint[1][0] == Approx(0.5));
  CHECK(p.p_message == Approx(0.5));

  CHECK_THROWS_AS(exact_posteriors(manual_map(1, 2, 1, prior, {{0, 0}, {0, 0}}), 1, 0), ZeroProbabilityMessage);
  CHECK_THROWS_AS(exact_posteriors(ident, 0, 2), InvalidArgument);
}

TEST_CASE("block length cap") {
  const auto g = make_aligned_hamming(Distribution::uniform(2));
  SimConfig cfg;
  cfg.n = 17;
  cfg.eta = 0.0;
  const auto s = Strategy::uninformative(2, {1, 1});
  const auto cb = generate_codebook(g, s, cfg, 1);
  CHECK_THROWS_AS(build_encoding_map(Encoder(cb, g, s, 0.25), g, 16), BlockTooLongForExact);
  CHECK_THROWS_AS(run_trial(g, s, cb, cfg, 0, 1), BlockTooLongForExact);
}

TEST_CASE("trials") {
  // singleton messages: every position sees the prior
  const auto g = make_aligned_hamming(Distribution({0.7, 0.3}));
  const auto s = Strategy::uninformative(2, {1, 1});
  SimConfig cfg;
  cfg.n = 4;
  cfg.eta = 0.0;
  cfg.delta = 2.0;
  const double zero = solve_zero_rates(g).value;
  const auto cb = generate_codebook(g, s, cfg, 2);
  for (int i = 0; i < 20; ++i) {
    const auto rec = run_trial(g, s, cb, cfg, i, derive_seed(9, i, 2));
    CHECK(rec.d_e_cond == Approx(zero).epsilon(1e-12));
    CHECK_FALSE(rec.encoder_error);
    CHECK(rec.kl_avg_d1 <= 1e-12);
    CHECK(rec.typical_fraction == 1.0);
  }

  const auto a = run_trial(g, s, cb, cfg, 3, 77), b = run_trial(g, s, cb, cfg, 3, 77);
  CHECK(a.u_seq == b.u_seq);
  CHECK(a.d_e_emp == b.d_e_emp);
  CHECK(a.v2_seq == b.v2_seq);
}

TEST_CASE("revealing strategy decodes without distortion") {
  const auto g = make_aligned_hamming(Distribution::uniform(2));
  const auto s = reveal_on_w2();
  SimConfig cfg;
  cfg.n = 8;
  cfg.eta = 0.5;
  cfg.delta = 0.1;  // below 1/n, so a typical codeword equals the block
  cfg.trials = 30;
  const auto rep = run_monte_carlo(g, s, cfg);
  int clean = 0;
  for (const auto& rec : rep.records) {
    if (rec.encoder_error) continue;
    ++clean;
    CHECK(rec.d_e_emp == 0.0);
  }
  CHECK(clean > 0);
}

TEST_CASE("per-symbol distortion equals the single-letter form under the empirical type") {
  const auto g = make_aligned_hamming(Distribution({0.55, 0.45}));
  SimConfig cfg;
  cfg.n = 10;
  cfg.trials = 25;
  const auto rep = run_monte_carlo(g, two_looks(0.15, 0.2), cfg);
  for (const auto& rec : rep.records) {
    std::vector<double> type(8, 0.0);
    for (int t = 0; t < rec.n; ++t) type[(rec.u_seq[t] * 2 + rec.v1_seq[t]) * 2 + rec.v2_seq[t]] += 1.0 / rec.n;
    double via_type = 0.0;
    for (std::size_t u = 0; u < 2; ++u) {
      for (std::size_t v1 = 0; v1 < 2; ++v1) {
        for (std::size_t v2 = 0; v2 < 2; ++v2) via_type += type[(u * 2 + v1) * 2 + v2] * g.d_e(u, v1, v2);
      }
    }
    CHECK(rec.d_e_emp == Approx(via_type).epsilon(1e-12));
  }
}

TEST_CASE("monte carlo aggregates") {
  std::mt19937_64 rng(6);
  const auto g = testing::random_binary_instance(rng);
  const auto s = two_looks(0.2, 0.25);
  SimConfig cfg;
  cfg.trials = 40;
  cfg.delta = 2.0;
  CHECK(run_monte_carlo(g, s, cfg).error_rate == 0.0);

  // at n = 12 a tolerance of 0.25 already rejects a third of the source
  // blocks on their own type, so the covering check needs a looser one
  cfg.delta = 0.5;
  cfg.eta = 0.5;
  const auto wide = run_monte_carlo(g, s, cfg);
  CHECK(wide.error_rate < 0.1);
  CHECK(wide.kl_d1_no_error.mean <= wide.kl_bound + 3 * wide.kl_d1_no_error.se);

  cfg.eta = 0.05;
  const auto narrow = run_monte_carlo(g, s, cfg);
  CHECK(narrow.f1_rate >= wide.f1_rate);

  const auto again = run_monte_carlo(g, s, cfg);
  CHECK(again.d_e_emp.mean == narrow.d_e_emp.mean);
  CHECK(again.kl_d1_no_error.mean == narrow.kl_d1_no_error.mean);

  cfg.fixed_codebook = true;
  const auto fixed = run_monte_carlo(g, s, cfg);
  CHECK(fixed.records.size() == 40);
}

TEST_CASE("distortion gap") {
  const auto g = make_aligned_hamming(Distribution({0.7, 0.3}));
  const auto s = Strategy::uninformative(2, {1, 1});
  SimConfig cfg;
  cfg.n = 1;
  cfg.eta = 0.0;
  cfg.delta = 2.0;
  cfg.alpha = 0.0;
  cfg.gamma = 0.0;
  cfg.trials = 30;
  const auto rep = run_monte_carlo(g, s, cfg);
  const auto gb = distortion_gap_bound(rep, s, g, 0.3, 0.2, 0.25);
  CHECK(gb.gap == 0.0);
  CHECK(gb.bound >= 0.0);
  const auto tight = distortion_gap_bound(rep, s, g, 0.0, 0.0, 2.0);
  CHECK(rep.error_rate == 0.0);
  CHECK(tight.bound == Approx(2.0 * g.d_norm()));

  const auto tied = make_aligned_hamming(Distribution::uniform(2));
  CHECK_THROWS_AS(distortion_gap_bound(run_monte_carlo(tied, s, cfg), s, tied, 0.3, 0.2, 0.25), NotInQ0Tilde);
}

TEST_CASE("seed derivation") {
  CHECK(derive_seed(1, 0, 1) == derive_seed(1, 0, 1));
  CHECK(derive_seed(1, 0, 1) != derive_seed(1, 0, 2));
  CHECK(derive_seed(1, 0, 1) != derive_seed(1, 1, 1));
  CHECK(derive_seed(1, 0, 1) != derive_seed(2, 0, 1));
}

TEST_CASE("posterior tower identity, 1000 cases") { CHECK(testing::tower_failures(1000, 301) == 0); }
