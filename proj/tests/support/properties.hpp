#pragma once

// Randomized property checks shared by the unit tests and the acceptance run.
// Each returns the number of failing cases out of `cases`.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "persuasion/block_sim.hpp"
#include "persuasion/game.hpp"
#include "persuasion/prob.hpp"
#include "support/random_instances.hpp"

namespace persuasion::testing {

inline std::size_t small_size(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline int normalization_failures(int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  int bad = 0;
  for (int i = 0; i < cases; ++i) {
    const auto nu = small_size(rng, 1, 5);
    const auto nw = small_size(rng, 1, 6);
    const auto p = random_distribution(rng, nu);
    const auto ch = random_channel(rng, nu, nw);
    double sp = 0.0;
    for (double x : p.probs()) sp += x;
    const auto out = ch.output(p);
    double so = 0.0;
    for (double x : out.probs()) so += x;
    bool ok = std::abs(sp - 1.0) <= 1e-12 && std::abs(so - 1.0) <= 1e-12;
    for (std::size_t w = 0; w < nw && ok; ++w) {
      if (!(out[w] > 0.0)) continue;
      const auto post = posterior(p, ch, w);
      double s = 0.0;
      for (double x : post.probs()) s += x;
      ok = std::abs(s - 1.0) <= 1e-12 && std::all_of(post.probs().begin(), post.probs().end(),
                                                       [](double x) { return x >= 0.0; });
    }
    bad += !ok;
  }
  return bad;
}

inline int chain_rule_failures(int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  int bad = 0;
  for (int i = 0; i < cases; ++i) {
    const PairAlphabet a{small_size(rng, 1, 3), small_size(rng, 1, 3)};
    const auto nu = small_size(rng, 2, 4);
    const auto p = random_distribution(rng, nu);
    const auto q = random_channel(rng, nu, a.cells());
    const double i12 = mutual_information(p, q);
    const double i2 = mutual_information(p, marginalize_w1(q, a));
    const double cond = conditional_mutual_information(p, q, a);
    bad += !(std::abs(i12 - (i2 + cond)) <= 1e-10 && cond >= -1e-12 && i2 >= -1e-12);
  }
  return bad;
}

inline int splitting_failures(int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  int bad = 0;
  for (int i = 0; i < cases; ++i) {
    const auto nu = small_size(rng, 2, 3);
    const auto g = random_instance(rng, nu, small_size(rng, 2, 3), small_size(rng, 2, 3));
    const PairAlphabet a{g.v1_size(), g.v2_size()};
    std::vector<double> t;
    for (std::size_t u = 0; u < nu; ++u) {
      const auto row = random_distribution(rng, a.cells());
      t.insert(t.end(), row.probs().begin(), row.probs().end());
    }
    const auto s = Strategy::from_table(nu, a, t);
    const auto sp = split_from_strategy(g, s);
    bool ok = true;
    for (const BeliefSplit* split : {&sp.pairs, &sp.w2}) {
      for (std::size_t u = 0; u < nu; ++u) {
        double m = 0.0;
        for (std::size_t w = 0; w < split->weights.size(); ++w) {
          if (split->weights[w] > 0.0) m += split->weights[w] * split->beliefs[w][u];
        }
        ok = ok && std::abs(m - g.prior()[u]) <= 1e-10;
      }
    }
    bad += !ok;
  }
  return bad;
}

// Sum over m1 of P(m1|m2) P_t^{m1,m2} against P_t^{m2}, on random small codebooks.
inline int tower_failures(int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  int bad = 0;
  for (int i = 0; i < cases; ++i) {
    const auto g = random_binary_instance(rng);
    std::vector<double> t;
    for (std::size_t u = 0; u < 2; ++u) {
      const auto row = random_distribution(rng, 4);
      t.insert(t.end(), row.probs().begin(), row.probs().end());
    }
    const auto s = Strategy::from_table(2, {2, 2}, t);
    SimConfig cfg;
    cfg.n = static_cast<int>(small_size(rng, 2, 7));
    cfg.eta = 0.3;
    cfg.delta = std::uniform_real_distribution<double>(0.3, 2.0)(rng);
    const auto cb = generate_codebook(g, s, cfg, rng());
    const Encoder enc(cb, g, s, cfg.delta);
    const auto map = build_encoding_map(enc, g, 16);
    std::vector<double> p_m(map.messages.cells(), 0.0);
    for (std::size_t b = 0; b < map.blocks(); ++b) p_m[map.cell[b]] += map.block_prob[b];
    bool ok = true;
    for (std::size_t m2 = 0; m2 < cb.m2_count && ok; ++m2) {
      std::vector<double> mix(2, 0.0);
      double p_m2 = 0.0;
      std::vector<PositionBeliefs> parts;
      for (std::size_t m1 = 0; m1 < cb.m1_count; ++m1) p_m2 += p_m[map.messages.cell(m1, m2)];
      if (!(p_m2 > 0.0)) continue;
      PositionBeliefs base;
      for (std::size_t m1 = 0; m1 < cb.m1_count; ++m1) {
        if (!(p_m[map.messages.cell(m1, m2)] > 0.0)) continue;
        parts.push_back(exact_posteriors(map, m1, m2));
        base = parts.back();
      }
      for (std::size_t tt = 0; tt < static_cast<std::size_t>(cfg.n) && ok; ++tt) {
        std::fill(mix.begin(), mix.end(), 0.0);
        for (const auto& pb : parts) {
          const double w = pb.p_message / pb.p_base;
          for (std::size_t u = 0; u < 2; ++u) mix[u] += w * pb.joint[tt][u];
        }
        for (std::size_t u = 0; u < 2; ++u) ok = ok && std::abs(mix[u] - base.base[tt][u]) <= 1e-10;
      }
    }
    bad += !ok;
  }
  return bad;
}

// Shrinking tie_tol never grows a best-response set.
inline int tolerance_monotone_failures(int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  int bad = 0;
  for (int i = 0; i < cases; ++i) {
    const auto nu = small_size(rng, 2, 3);
    const auto g = random_instance(rng, nu, small_size(rng, 2, 4), small_size(rng, 2, 4));
    const auto q = random_distribution(rng, nu);
    const double hi = std::uniform_real_distribution<double>(0.0, 0.5)(rng);
    const double lo = hi * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    auto subset = [](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
      return std::includes(b.begin(), b.end(), a.begin(), a.end());
    };
    const auto s1 = best_response_set_d1(q, g, lo), b1 = best_response_set_d1(q, g, hi);
    const auto s2 = best_response_set_d2(q, g, lo), b2 = best_response_set_d2(q, g, hi);
    bad += !(subset(s1, b1) && subset(s2, b2) && !s1.empty() && !s2.empty());
  }
  return bad;
}

}  // namespace persuasion::testing
