#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "persuasion/game.hpp"

namespace persuasion {

struct SimConfig {
  int n = 12;
  double delta = 0.25;
  double eta = 0.2;
  double alpha = 0.3;
  double gamma = 0.2;
  int trials = 200;
  std::uint64_t seed = 1;
  int exact_posterior_max_n = 16;
  std::size_t max_codewords = std::size_t{1} << 20;
  // Reuse the trial-0 codebook for every trial instead of drawing a fresh one.
  bool fixed_codebook = false;
  double tie_tol = kDefaultTieTol;
  TieBreak mode = TieBreak::Pessimistic;

  void validate() const;
};

/// Random successive-refinement code. Indices are 0-based: m2 in [0, m2_count),
/// m1 in [0, m1_count).
struct Codebook {
  int n = 0;
  std::size_t m1_count = 1;
  std::size_t m2_count = 1;
  std::vector<Sequence> w2_words;  // [m2]
  std::vector<Sequence> w1_words;  // [m2 * m1_count + m1]
  std::uint64_t seed = 0;

  const Sequence& w2(std::size_t m2) const { return w2_words[m2]; }
  const Sequence& w1(std::size_t m1, std::size_t m2) const { return w1_words[m2 * m1_count + m1]; }
  PairAlphabet messages() const { return {m1_count, m2_count}; }

  bool operator==(const Codebook&) const = default;
};

/// Coding rates the scheme uses for strategy s: I(U;W2) + eta and I(U;W1|W2) + eta.
RatePair scheme_rates(const GameInstance& g, const Strategy& s, double eta);

/// Draws 2^floor(n R2) base words i.i.d. from P_W2 and, under each, 2^floor(n R1)
/// refinement words from P_{W1|W2} symbol by symbol. Deterministic in `seed`.
Codebook generate_codebook(const GameInstance& g, const Strategy& s, const SimConfig& cfg, std::uint64_t seed);

struct EncodeResult {
  std::size_t m1 = 0;
  std::size_t m2 = 0;
  bool error = false;  // no jointly typical pair; (0, 0) was sent
  bool f1 = false;     // no base word is jointly typical with the source
};

/// Joint-typicality encoder. Scans m2 then m1 in increasing order and returns
/// the first pair whose (u, w1, w2) type is within L1 distance delta of
/// P_U Q_{W1W2|U}. Holds bit masks of the codebook, so build it once per codebook.
class Encoder {
 public:
  Encoder(const Codebook& cb, const GameInstance& g, const Strategy& s, double delta);

  EncodeResult operator()(const Sequence& u) const;

  const Codebook& codebook() const { return *cb_; }

  /// The first check operator() makes: the source type alone within delta.
  bool source_typical(const Sequence& u) const;

  /// Calls f(block) for every source block (indexed as in EncodingMap) whose
  /// triple with codeword pair (m1, m2) passes the same checks operator() makes.
  template <class F>
  void for_each_typical_block(std::size_t m1, std::size_t m2, F&& f) const;

 private:
  using Mask = std::vector<std::uint64_t>;
  Mask mask_of(const Sequence& seq, std::size_t symbol) const;

  const Codebook* cb_;
  std::size_t nu_, nw1_, nw2_, words_;
  double delta_;
  std::vector<double> ref_;     // [u][w1][w2]
  std::vector<double> ref_u_;   // [u]
  std::vector<double> ref_uw2_; // [u][w2]
  std::vector<std::uint64_t> w2_bits_;  // [m2][w2][word]
  std::vector<std::uint64_t> w1_bits_;  // [m2 * m1_count + m1][w1][word]
};

EncodeResult encode(const Sequence& u, const Codebook& cb, const GameInstance& g, const Strategy& s, double delta);

/// The deterministic encoder evaluated on every source block, blocks indexed
/// base |U| with position 0 most significant.
struct EncodingMap {
  int n = 0;
  std::size_t u_size = 0;
  PairAlphabet messages;
  std::vector<std::uint32_t> cell;   // message cell m1 * m2_count + m2, per block
  std::vector<double> block_prob;    // P(u^n), per block

  std::size_t blocks() const { return cell.size(); }
};

/// Enumerates all |U|^n blocks. Throws BlockTooLongForExact when n exceeds `max_n`.
EncodingMap build_encoding_map(const Encoder& enc, const GameInstance& g, int max_n);

struct PositionBeliefs {
  std::vector<Distribution> joint;  // P_t^{m1,m2}, per t
  std::vector<Distribution> base;   // P_t^{m2}, per t
  double p_message = 0.0;           // P(m1, m2)
  double p_base = 0.0;              // P(m2)
};

/// Exact per-position posteriors given (m1, m2) and given m2. Throws
/// ZeroProbabilityMessage when no block maps to (m1, m2).
PositionBeliefs exact_posteriors(const EncodingMap& map, std::size_t m1, std::size_t m2);

struct TrialRecord {
  int trial = 0;
  int n = 0;
  Sequence u_seq;
  std::size_t m1 = 0;
  std::size_t m2 = 0;
  bool encoder_error = false;
  bool f1 = false;
  std::vector<std::size_t> v1_seq;
  std::vector<std::size_t> v2_seq;
  double d_e_emp = 0.0;
  double d_1_emp = 0.0;
  double d_2_emp = 0.0;
  // Encoder distortion averaged over positions under the exact posteriors,
  // i.e. E[d_e | codebook, m1, m2].
  double d_e_cond = 0.0;
  double kl_avg_d1 = 0.0;
  double kl_avg_d2 = 0.0;
  double typical_fraction = 0.0;
  bool in_b = false;
};

/// One trial with the given codebook; trial_seed drives the source draw.
TrialRecord run_trial(const GameInstance& g, const Strategy& s, const Codebook& cb, const SimConfig& cfg,
                      int trial, std::uint64_t trial_seed);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

struct MonteCarloReport {
  int n = 0;
  int trials = 0;
  double rate1 = 0.0;  // R1 used by the code, bits
  double rate2 = 0.0;
  std::size_t m1_count = 0;
  std::size_t m2_count = 0;
  double error_rate = 0.0;
  double f1_rate = 0.0;
  double f2_rate = 0.0;
  MeanSe d_e_emp, d_1_emp, d_2_emp, d_e_cond;
  int no_error_trials = 0;
  MeanSe kl_d1_no_error, kl_d2_no_error;
  double fraction_in_b = 0.0;
  double kl_bound = 0.0;  // eta + delta + 1/n + log2|U| * error_rate
  double expected_distortion = 0.0;  // single-letter value of the strategy
  std::vector<TrialRecord> records;
};

/// Codebook and source seeds for trial t, derived from the master seed and t only.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial, std::uint64_t stream);

MonteCarloReport run_monte_carlo(const GameInstance& g, const Strategy& s, const SimConfig& cfg);

struct GapBound {
  double gap = 0.0;
  double bound = 0.0;
  double slack = 0.0;  // 3 standard errors of the distortion mean
};

/// |mean E[d_e | code, messages] - single-letter value| against
/// (alpha + 2 gamma + delta) ||D|| + (1 - P(B)) ||D||. Throws NotInQ0Tilde unless
/// every positive-probability (w1, w2) of s has a unique worst pair.
GapBound distortion_gap_bound(const MonteCarloReport& report, const Strategy& s, const GameInstance& g,
                              double alpha, double gamma, double delta, double tie_tol = kDefaultTieTol);

}  // namespace persuasion
