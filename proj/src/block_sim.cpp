#include "persuasion/block_sim.hpp"

#include <algorithm>
#include <bit>
#include <climits>
#include <cmath>
#include <cstdint>
#include <random>

#include "persuasion/errors.hpp"
#include "persuasion/lattice.hpp"

namespace persuasion {

namespace {

// Comparisons of empirical quantities against their thresholds get this much room.
constexpr double kSlack = 1e-12;

MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe out;
  if (xs.empty()) return out;
  double s = 0.0;
  for (double x : xs) s += x;
  out.mean = s / static_cast<double>(xs.size());
  if (xs.size() < 2 || !std::isfinite(out.mean)) return out;
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.se = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  return out;
}

std::discrete_distribution<int> sampler(std::span<const double> weights) {
  return std::discrete_distribution<int>(weights.begin(), weights.end());
}

// Unnormalized P(U_t = u, M1 = m1', M2 = m2) for every t and m1', laid out [t][m1'][u].
std::vector<double> base_group_masses(const EncodingMap& map, std::size_t m2) {
  const std::size_t nu = map.u_size;
  const std::size_t n = static_cast<std::size_t>(map.n);
  const std::size_t nm1 = map.messages.w1_size;
  std::vector<double> masses(n * nm1 * nu, 0.0);
  std::vector<std::size_t> digits(n, 0);
  for (std::size_t b = 0; b < map.blocks(); ++b) {
    if (b > 0) {
      std::size_t t = n;
      while (t > 0 && ++digits[t - 1] == nu) digits[--t] = 0;
    }
    const std::uint32_t cell = map.cell[b];
    if (map.messages.w2_of(cell) != m2) continue;
    const double p = map.block_prob[b];
    const std::size_t m1 = map.messages.w1_of(cell);
    for (std::size_t t = 0; t < n; ++t) masses[(t * nm1 + m1) * nu + digits[t]] += p;
  }
  return masses;
}

PositionBeliefs beliefs_from_masses(const std::vector<double>& masses, std::size_t n, std::size_t nm1,
                                    std::size_t nu, std::size_t m1) {
  PositionBeliefs out;
  std::vector<double> joint(nu), base(nu);
  for (std::size_t t = 0; t < n; ++t) {
    std::fill(base.begin(), base.end(), 0.0);
    for (std::size_t a = 0; a < nm1; ++a) {
      for (std::size_t u = 0; u < nu; ++u) base[u] += masses[(t * nm1 + a) * nu + u];
    }
    for (std::size_t u = 0; u < nu; ++u) joint[u] = masses[(t * nm1 + m1) * nu + u];
    if (t == 0) {
      for (std::size_t u = 0; u < nu; ++u) {
        out.p_message += joint[u];
        out.p_base += base[u];
      }
      if (!(out.p_message > 0.0)) throw ZeroProbabilityMessage("no source block maps to this message pair");
    }
    out.joint.push_back(Distribution::from_weights(joint));
    out.base.push_back(Distribution::from_weights(base));
  }
  return out;
}

}  // namespace

void SimConfig::validate() const {
  if (n < 1) throw InvalidConfig("block length n must be at least 1");
  // instance files store the seed as a signed 64-bit TOML integer
  if (seed > static_cast<std::uint64_t>(INT64_MAX)) throw InvalidConfig("seed must be below 2^63");
  if (!(delta > 0.0)) throw InvalidConfig("delta must be positive");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw InvalidConfig("eta must be finite and nonnegative");
  if (!(alpha >= 0.0) || !(gamma >= 0.0)) throw InvalidConfig("alpha and gamma must be nonnegative");
  if (trials < 1) throw InvalidConfig("trials must be at least 1");
  if (exact_posterior_max_n < 1) throw InvalidConfig("exact_posterior_max_n must be at least 1");
  if (max_codewords == 0) throw InvalidConfig("max_codewords must be positive");
  if (!(tie_tol >= 0.0)) throw InvalidConfig("tie_tol must be nonnegative");
}

RatePair scheme_rates(const GameInstance& g, const Strategy& s, double eta) {
  const double i2 = mutual_information(g.prior(), s.w2_channel());
  const double i12 = mutual_information(g.prior(), s.q());
  return RatePair(std::max(0.0, i12 - i2) + eta, i2 + eta);
}

Codebook generate_codebook(const GameInstance& g, const Strategy& s, const SimConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (s.u_size() != g.u_size()) throw InvalidArgument("strategy does not match the source alphabet");
  const RatePair r = scheme_rates(g, s, cfg.eta);
  const int b1 = message_bits(r.r1, cfg.n);
  const int b2 = message_bits(r.r2, cfg.n);
  if (b1 + b2 >= 40 || (std::size_t{1} << (b1 + b2)) > cfg.max_codewords)
    throw CodebookTooLarge("codebook needs 2^" + std::to_string(b1 + b2) + " refinement words");

  const auto a = s.alphabet();
  const auto& prior = g.prior();
  std::vector<double> pw2(a.w2_size, 0.0);
  std::vector<double> pw1w2(a.cells(), 0.0);
  for (std::size_t u = 0; u < g.u_size(); ++u) {
    for (std::size_t c = 0; c < a.cells(); ++c) {
      pw1w2[c] += prior[u] * s.q()(u, c);
      pw2[a.w2_of(c)] += prior[u] * s.q()(u, c);
    }
  }
  auto draw_w2 = sampler(pw2);
  std::vector<std::discrete_distribution<int>> draw_w1;
  for (std::size_t w2 = 0; w2 < a.w2_size; ++w2) {
    std::vector<double> cond(a.w1_size);
    for (std::size_t w1 = 0; w1 < a.w1_size; ++w1) cond[w1] = pw1w2[a.cell(w1, w2)];
    // Unused when P(w2) = 0; any valid weights will do.
    if (!(pw2[w2] > 0.0)) cond.assign(a.w1_size, 1.0);
    draw_w1.push_back(sampler(cond));
  }

  Codebook cb;
  cb.n = cfg.n;
  cb.seed = seed;
  cb.m1_count = std::size_t{1} << b1;
  cb.m2_count = std::size_t{1} << b2;
  std::mt19937_64 rng(seed);
  const std::size_t n = static_cast<std::size_t>(cfg.n);
  cb.w2_words.assign(cb.m2_count, Sequence(n));
  for (auto& w : cb.w2_words) {
    for (auto& x : w) x = static_cast<Symbol>(draw_w2(rng));
  }
  cb.w1_words.assign(cb.m2_count * cb.m1_count, Sequence(n));
  for (std::size_t m2 = 0; m2 < cb.m2_count; ++m2) {
    for (std::size_t m1 = 0; m1 < cb.m1_count; ++m1) {
      auto& w = cb.w1_words[m2 * cb.m1_count + m1];
      for (std::size_t t = 0; t < n; ++t) w[t] = static_cast<Symbol>(draw_w1[cb.w2_words[m2][t]](rng));
    }
  }
  return cb;
}

Encoder::Encoder(const Codebook& cb, const GameInstance& g, const Strategy& s, double delta)
    : cb_(&cb),
      nu_(g.u_size()),
      nw1_(s.w1_size()),
      nw2_(s.w2_size()),
      words_((static_cast<std::size_t>(cb.n) + 63) / 64),
      delta_(delta) {
  if (!(delta > 0.0)) throw InvalidArgument("typicality tolerance must be positive");
  if (s.u_size() != nu_) throw InvalidArgument("strategy does not match the source alphabet");
  const auto a = s.alphabet();
  ref_.assign(nu_ * nw1_ * nw2_, 0.0);
  ref_u_.assign(nu_, 0.0);
  ref_uw2_.assign(nu_ * nw2_, 0.0);
  for (std::size_t u = 0; u < nu_; ++u) {
    for (std::size_t c = 0; c < a.cells(); ++c) {
      const double p = g.prior()[u] * s.q()(u, c);
      ref_[(u * nw1_ + a.w1_of(c)) * nw2_ + a.w2_of(c)] += p;
      ref_uw2_[u * nw2_ + a.w2_of(c)] += p;
    }
    ref_u_[u] = g.prior()[u];
  }
  w2_bits_.reserve(cb.m2_count * nw2_ * words_);
  for (const auto& w : cb.w2_words) {
    for (std::size_t x = 0; x < nw2_; ++x) {
      const Mask m = mask_of(w, x);
      w2_bits_.insert(w2_bits_.end(), m.begin(), m.end());
    }
  }
  w1_bits_.reserve(cb.w1_words.size() * nw1_ * words_);
  for (const auto& w : cb.w1_words) {
    for (std::size_t x = 0; x < nw1_; ++x) {
      const Mask m = mask_of(w, x);
      w1_bits_.insert(w1_bits_.end(), m.begin(), m.end());
    }
  }
}

Encoder::Mask Encoder::mask_of(const Sequence& seq, std::size_t symbol) const {
  Mask m(words_, 0);
  for (std::size_t t = 0; t < seq.size(); ++t) {
    if (seq[t] == symbol) m[t / 64] |= std::uint64_t{1} << (t % 64);
  }
  return m;
}

bool Encoder::source_typical(const Sequence& u) const {
  const double inv_n = 1.0 / cb_->n;
  std::vector<int> cnt(nu_, 0);
  for (Symbol x : u) ++cnt[x];
  double dev_u = 0.0;
  for (std::size_t a = 0; a < nu_; ++a) dev_u += std::abs(cnt[a] * inv_n - ref_u_[a]);
  return dev_u <= delta_ + kSlack;
}

EncodeResult Encoder::operator()(const Sequence& u) const {
  const auto& cb = *cb_;
  if (u.size() != static_cast<std::size_t>(cb.n)) throw InvalidArgument("source block has the wrong length");
  const double inv_n = 1.0 / cb.n;
  const double limit = delta_ + kSlack;
  EncodeResult out;
  out.error = true;
  out.f1 = true;

  std::vector<std::uint64_t> ub(nu_ * words_, 0);
  for (std::size_t t = 0; t < u.size(); ++t) {
    if (u[t] >= nu_) throw InvalidArgument("source symbol outside the alphabet");
    ub[u[t] * words_ + t / 64] |= std::uint64_t{1} << (t % 64);
  }
  // The u-marginal deviation bounds every joint deviation from below.
  double dev_u = 0.0;
  for (std::size_t a = 0; a < nu_; ++a) {
    int cnt = 0;
    for (std::size_t k = 0; k < words_; ++k) cnt += std::popcount(ub[a * words_ + k]);
    dev_u += std::abs(cnt * inv_n - ref_u_[a]);
  }
  if (dev_u > limit) return out;

  for (std::size_t m2 = 0; m2 < cb.m2_count; ++m2) {
    const std::uint64_t* w2b = &w2_bits_[m2 * nw2_ * words_];
    double dev2 = 0.0;
    for (std::size_t a = 0; a < nu_ && dev2 <= limit; ++a) {
      for (std::size_t x = 0; x < nw2_; ++x) {
        int cnt = 0;
        for (std::size_t k = 0; k < words_; ++k) cnt += std::popcount(ub[a * words_ + k] & w2b[x * words_ + k]);
        dev2 += std::abs(cnt * inv_n - ref_uw2_[a * nw2_ + x]);
      }
    }
    if (dev2 > limit) continue;
    out.f1 = false;
    for (std::size_t m1 = 0; m1 < cb.m1_count; ++m1) {
      const std::uint64_t* w1b = &w1_bits_[(m2 * cb.m1_count + m1) * nw1_ * words_];
      double dev = 0.0;
      for (std::size_t a = 0; a < nu_ && dev <= limit; ++a) {
        for (std::size_t y = 0; y < nw1_; ++y) {
          for (std::size_t x = 0; x < nw2_; ++x) {
            int cnt = 0;
            for (std::size_t k = 0; k < words_; ++k)
              cnt += std::popcount(ub[a * words_ + k] & w1b[y * words_ + k] & w2b[x * words_ + k]);
            dev += std::abs(cnt * inv_n - ref_[(a * nw1_ + y) * nw2_ + x]);
          }
        }
      }
      if (dev <= limit) {
        out.m1 = m1;
        out.m2 = m2;
        out.error = false;
        return out;
      }
    }
  }
  return out;
}

template <class F>
void Encoder::for_each_typical_block(std::size_t m1, std::size_t m2, F&& f) const {
  const auto& cb = *cb_;
  const std::size_t n = static_cast<std::size_t>(cb.n);
  const Sequence& w1 = cb.w1(m1, m2);
  const Sequence& w2 = cb.w2(m2);
  const std::size_t groups = nw1_ * nw2_;
  const double inv_n = 1.0 / cb.n;
  const double limit = delta_ + kSlack;

  std::vector<std::vector<std::size_t>> pos(groups);
  for (std::size_t t = 0; t < n; ++t) pos[w1[t] * nw2_ + w2[t]].push_back(t);
  std::vector<std::size_t> weight(n, 1);
  for (std::size_t t = n - 1; t > 0; --t) weight[t - 1] = weight[t] * nu_;
  std::vector<std::vector<std::vector<int>>> comps(n + 1);
  for (const auto& p : pos) {
    if (comps[p.size()].empty()) comps[p.size()] = all_compositions(static_cast<int>(p.size()), nu_);
  }

  std::vector<int> counts(groups * nu_, 0);  // [group][u]
  auto cnt = [&](std::size_t a, std::size_t y, std::size_t x) { return counts[(y * nw2_ + x) * nu_ + a]; };

  // Recomputes the deviations in the order operator() sums them, so both agree bit for bit.
  auto accepted = [&]() {
    double dev_u = 0.0;
    for (std::size_t a = 0; a < nu_; ++a) {
      int c = 0;
      for (std::size_t k = 0; k < groups; ++k) c += counts[k * nu_ + a];
      dev_u += std::abs(c * inv_n - ref_u_[a]);
    }
    if (dev_u > limit) return false;
    double dev2 = 0.0;
    for (std::size_t a = 0; a < nu_; ++a) {
      for (std::size_t x = 0; x < nw2_; ++x) {
        int c = 0;
        for (std::size_t y = 0; y < nw1_; ++y) c += cnt(a, y, x);
        dev2 += std::abs(c * inv_n - ref_uw2_[a * nw2_ + x]);
      }
    }
    if (dev2 > limit) return false;
    double dev = 0.0;
    for (std::size_t a = 0; a < nu_; ++a) {
      for (std::size_t y = 0; y < nw1_; ++y) {
        for (std::size_t x = 0; x < nw2_; ++x) dev += std::abs(cnt(a, y, x) * inv_n - ref_[(a * nw1_ + y) * nw2_ + x]);
      }
    }
    return dev <= limit;
  };

  std::vector<int> left(groups * nu_);  // symbols still to place, [group][u]
  auto arrange = [&](auto&& self, std::size_t g, std::size_t i, std::size_t block) -> void {
    if (g == groups) {
      f(block);
      return;
    }
    if (i == pos[g].size()) {
      self(self, g + 1, 0, block);
      return;
    }
    const std::size_t t = pos[g][i];
    for (std::size_t a = 0; a < nu_; ++a) {
      int& l = left[g * nu_ + a];
      if (l == 0) continue;
      --l;
      self(self, g, i + 1, block + a * weight[t]);
      ++l;
    }
  };
  // Partial sums only prune; the loose margin keeps rounding from dropping a block operator() accepts.
  auto choose = [&](auto&& self, std::size_t g, double partial) -> void {
    if (g == groups) {
      if (!accepted()) return;
      left = counts;
      arrange(arrange, 0, 0, 0);
      return;
    }
    const std::size_t y = g / nw2_, x = g % nw2_;
    for (const auto& comp : comps[pos[g].size()]) {
      double d = partial;
      for (std::size_t a = 0; a < nu_; ++a) d += std::abs(comp[a] * inv_n - ref_[(a * nw1_ + y) * nw2_ + x]);
      if (d > limit + 1e-9) continue;
      std::copy(comp.begin(), comp.end(), &counts[g * nu_]);
      self(self, g + 1, d);
    }
  };
  choose(choose, 0, 0.0);
}

EncodeResult encode(const Sequence& u, const Codebook& cb, const GameInstance& g, const Strategy& s, double delta) {
  return Encoder(cb, g, s, delta)(u);
}

EncodingMap build_encoding_map(const Encoder& enc, const GameInstance& g, int max_n) {
  const auto& cb = enc.codebook();
  const std::size_t nu = g.u_size();
  const std::size_t n = static_cast<std::size_t>(cb.n);
  if (cb.n > max_n) throw BlockTooLongForExact("block length " + std::to_string(cb.n) + " exceeds the exact-posterior cap");
  const double blocks_f = std::pow(static_cast<double>(nu), static_cast<double>(n));
  if (blocks_f > static_cast<double>(1u << 26)) throw BlockTooLongForExact("too many source blocks to enumerate");

  EncodingMap map;
  map.n = cb.n;
  map.u_size = nu;
  map.messages = cb.messages();
  const std::size_t blocks = static_cast<std::size_t>(blocks_f);
  map.block_prob.resize(blocks);
  Sequence u(n, 0);
  for (std::size_t b = 0; b < blocks; ++b) {
    if (b > 0) {
      std::size_t t = n;
      while (t > 0 && ++u[t - 1] == nu) u[--t] = 0;
    }
    double p = 1.0;
    for (std::size_t t = 0; t < n; ++t) p *= g.prior()[u[t]];
    map.block_prob[b] = p;
  }
  // Walking the codebook in encoder order and keeping the first claim per block
  // reproduces enc(u) without scanning the codebook once per block.
  constexpr std::uint32_t kUnset = UINT32_MAX;
  map.cell.assign(blocks, kUnset);
  // Only blocks passing the source-type check can be claimed; stop once all are.
  std::size_t open = 0;
  u.assign(n, 0);
  for (std::size_t b = 0; b < blocks; ++b) {
    if (b > 0) {
      std::size_t t = n;
      while (t > 0 && ++u[t - 1] == nu) u[--t] = 0;
    }
    open += enc.source_typical(u);
  }
  for (std::size_t m2 = 0; m2 < cb.m2_count && open > 0; ++m2) {
    for (std::size_t m1 = 0; m1 < cb.m1_count && open > 0; ++m1) {
      const auto c = static_cast<std::uint32_t>(map.messages.cell(m1, m2));
      enc.for_each_typical_block(m1, m2, [&](std::size_t b) {
        if (map.cell[b] == kUnset) {
          map.cell[b] = c;
          --open;
        }
      });
    }
  }
  const auto fallback = static_cast<std::uint32_t>(map.messages.cell(0, 0));
  for (auto& c : map.cell) {
    if (c == kUnset) c = fallback;
  }
  return map;
}

PositionBeliefs exact_posteriors(const EncodingMap& map, std::size_t m1, std::size_t m2) {
  if (m1 >= map.messages.w1_size || m2 >= map.messages.w2_size) throw InvalidArgument("message outside the codebook");
  const auto masses = base_group_masses(map, m2);
  return beliefs_from_masses(masses, static_cast<std::size_t>(map.n), map.messages.w1_size, map.u_size, m1);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

TrialRecord run_trial(const GameInstance& g, const Strategy& s, const Codebook& cb, const SimConfig& cfg, int trial,
                      std::uint64_t trial_seed) {
  cfg.validate();
  const std::size_t nu = g.u_size();
  const std::size_t n = static_cast<std::size_t>(cb.n);
  TrialRecord rec;
  rec.trial = trial;
  rec.n = cb.n;

  std::mt19937_64 rng(trial_seed);
  auto draw_u = sampler(g.prior().probs());
  rec.u_seq.resize(n);
  for (auto& x : rec.u_seq) x = static_cast<Symbol>(draw_u(rng));

  const Encoder enc(cb, g, s, cfg.delta);
  const auto sent = enc(rec.u_seq);
  rec.m1 = sent.m1;
  rec.m2 = sent.m2;
  rec.encoder_error = sent.error;
  rec.f1 = sent.f1;

  const auto map = build_encoding_map(enc, g, cfg.exact_posterior_max_n);
  const std::size_t nm1 = cb.m1_count;
  const auto masses = base_group_masses(map, rec.m2);
  const auto beliefs = beliefs_from_masses(masses, n, nm1, nu, rec.m1);
  const auto splits = split_from_strategy(g, s);
  const auto a = s.alphabet();
  const Sequence& w1 = cb.w1(rec.m1, rec.m2);
  const Sequence& w2 = cb.w2(rec.m2);
  const double kl_cut = cfg.alpha * cfg.alpha / (2.0 * std::log(2.0));

  rec.v1_seq.resize(n);
  rec.v2_seq.resize(n);
  std::size_t typical = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const auto acts = group_worst_actions(std::span<const double>(masses).subspan(t * nm1 * nu, nm1 * nu), nm1, g,
                                          cfg.tie_tol, cfg.mode);
    const std::size_t v1 = acts.v1[rec.m1];
    const std::size_t v2 = acts.v2;
    rec.v1_seq[t] = v1;
    rec.v2_seq[t] = v2;
    const std::size_t u = rec.u_seq[t];
    rec.d_e_emp += g.d_e(u, v1, v2);
    rec.d_1_emp += g.d_1(u, v1);
    rec.d_2_emp += g.d_2(u, v2);
    for (std::size_t x = 0; x < nu; ++x) rec.d_e_cond += beliefs.joint[t][x] * g.d_e(x, v1, v2);

    const double kl1 = kl_divergence(beliefs.joint[t], splits.pairs.beliefs[a.cell(w1[t], w2[t])]);
    const double kl2 = kl_divergence(beliefs.base[t], splits.w2.beliefs[w2[t]]);
    rec.kl_avg_d1 += kl1;
    rec.kl_avg_d2 += kl2;
    if (std::max(kl1, kl2) <= kl_cut) ++typical;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  rec.d_e_emp *= inv_n;
  rec.d_1_emp *= inv_n;
  rec.d_2_emp *= inv_n;
  rec.d_e_cond *= inv_n;
  rec.kl_avg_d1 *= inv_n;
  rec.kl_avg_d2 *= inv_n;
  rec.typical_fraction = static_cast<double>(typical) * inv_n;

  std::vector<double> freq(a.cells(), 0.0);
  for (std::size_t t = 0; t < n; ++t) freq[a.cell(w1[t], w2[t])] += inv_n;
  double dev = 0.0;
  for (std::size_t c = 0; c < a.cells(); ++c) dev += std::abs(splits.pairs.weights[c] - freq[c]);
  rec.in_b = rec.typical_fraction >= 1.0 - cfg.gamma - kSlack && dev <= cfg.delta + kSlack;
  return rec;
}

MonteCarloReport run_monte_carlo(const GameInstance& g, const Strategy& s, const SimConfig& cfg) {
  cfg.validate();
  MonteCarloReport rep;
  rep.n = cfg.n;
  rep.trials = cfg.trials;
  const RatePair r = scheme_rates(g, s, cfg.eta);
  rep.rate1 = r.r1;
  rep.rate2 = r.r2;
  rep.expected_distortion = expected_encoder_distortion(g, s, cfg.tie_tol, cfg.mode);

  Codebook shared;
  if (cfg.fixed_codebook) shared = generate_codebook(g, s, cfg, derive_seed(cfg.seed, 0, 1));
  int errors = 0, f1 = 0, in_b = 0;
  std::vector<double> de, d1, d2, dc, kl1, kl2;
  for (int i = 0; i < cfg.trials; ++i) {
    const auto idx = static_cast<std::uint64_t>(i);
    Codebook fresh;
    if (!cfg.fixed_codebook) fresh = generate_codebook(g, s, cfg, derive_seed(cfg.seed, idx, 1));
    const Codebook& cb = cfg.fixed_codebook ? shared : fresh;
    rep.m1_count = cb.m1_count;
    rep.m2_count = cb.m2_count;
    auto rec = run_trial(g, s, cb, cfg, i, derive_seed(cfg.seed, idx, 2));
    errors += rec.encoder_error;
    f1 += rec.f1;
    in_b += rec.in_b;
    de.push_back(rec.d_e_emp);
    d1.push_back(rec.d_1_emp);
    d2.push_back(rec.d_2_emp);
    dc.push_back(rec.d_e_cond);
    if (!rec.encoder_error) {
      kl1.push_back(rec.kl_avg_d1);
      kl2.push_back(rec.kl_avg_d2);
    }
    rep.records.push_back(std::move(rec));
  }
  const double trials = static_cast<double>(cfg.trials);
  rep.error_rate = errors / trials;
  rep.f1_rate = f1 / trials;
  rep.f2_rate = (errors - f1) / trials;
  rep.d_e_emp = mean_se(de);
  rep.d_1_emp = mean_se(d1);
  rep.d_2_emp = mean_se(d2);
  rep.d_e_cond = mean_se(dc);
  rep.no_error_trials = static_cast<int>(kl1.size());
  rep.kl_d1_no_error = mean_se(kl1);
  rep.kl_d2_no_error = mean_se(kl2);
  rep.fraction_in_b = in_b / trials;
  rep.kl_bound = cfg.eta + cfg.delta + 1.0 / cfg.n + std::log2(static_cast<double>(g.u_size())) * rep.error_rate;
  return rep;
}

GapBound distortion_gap_bound(const MonteCarloReport& report, const Strategy& s, const GameInstance& g, double alpha,
                              double gamma, double delta, double tie_tol) {
  if (!has_singleton_worst_pairs(g, s, tie_tol))
    throw NotInQ0Tilde("some positive-probability (w1, w2) has more than one worst pair");
  GapBound out;
  out.gap = std::abs(report.d_e_cond.mean - expected_encoder_distortion(g, s, tie_tol));
  out.bound = (alpha + 2.0 * gamma + delta) * g.d_norm() + (1.0 - report.fraction_in_b) * g.d_norm();
  out.slack = 3.0 * report.d_e_cond.se;
  return out;
}

}  // namespace persuasion
