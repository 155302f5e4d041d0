#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "persuasion/prob.hpp"

namespace persuasion {

/// Decoders within this much expected distortion of the optimum are indifferent.
inline constexpr double kDefaultTieTol = 1e-9;

/// How a decoder picks among equally good actions. Pessimistic is the robust
/// convention (worst for the encoder); Optimistic picks the encoder's favourite.
enum class TieBreak { Pessimistic, Optimistic };

/// Source prior plus the three distortion tables of the persuasion game.
///
/// Tables are row-major: d_e is [U][V1][V2], d_1 is [U][V1], d_2 is [U][V2].
class GameInstance {
 public:
  GameInstance(Distribution prior, std::size_t v1_size, std::size_t v2_size, std::vector<double> d_e,
               std::vector<double> d_1, std::vector<double> d_2);

  std::size_t u_size() const noexcept { return prior_.size(); }
  std::size_t v1_size() const noexcept { return v1_size_; }
  std::size_t v2_size() const noexcept { return v2_size_; }
  const Distribution& prior() const noexcept { return prior_; }

  double d_e(std::size_t u, std::size_t v1, std::size_t v2) const {
    return d_e_[(u * v1_size_ + v1) * v2_size_ + v2];
  }
  double d_1(std::size_t u, std::size_t v1) const { return d_1_[u * v1_size_ + v1]; }
  double d_2(std::size_t u, std::size_t v2) const { return d_2_[u * v2_size_ + v2]; }

  std::span<const double> d_e_table() const noexcept { return d_e_; }
  std::span<const double> d_1_table() const noexcept { return d_1_; }
  std::span<const double> d_2_table() const noexcept { return d_2_; }

  /// Largest absolute entry of d_e.
  double d_norm() const noexcept { return d_norm_; }

  GameInstance with_prior(Distribution prior) const;

  bool operator==(const GameInstance&) const = default;

 private:
  Distribution prior_;
  std::size_t v1_size_;
  std::size_t v2_size_;
  std::vector<double> d_e_;
  std::vector<double> d_1_;
  std::vector<double> d_2_;
  double d_norm_ = 0.0;
};

/// V1 = V2 = U, Hamming losses for both decoders, d_e = 1{u != v1} + 1{u != v2}.
GameInstance make_aligned_hamming(const Distribution& prior);

/// Binary state (0 innocent, 1 guilty); D2 chooses 0 acquit / 1 convict with
/// Hamming loss; D1 is indifferent (d_1 = 0); the encoder pays 1 on acquittal.
GameInstance make_prosecutor(double prior_guilty);

/// Nonnegative rates in bits per source symbol.
struct RatePair {
  double r1 = 0.0;
  double r2 = 0.0;

  RatePair() = default;
  RatePair(double r1_, double r2_);

  bool operator==(const RatePair&) const = default;
};

/// log2 of the message-set size at block length n: floor(n r), with a 1e-9
/// guard against representation error in n r.
int message_bits(double rate, int n);

/// Single-letter encoder strategy Q_{W1W2|U}; output cell = w1 * |W2| + w2.
class Strategy {
 public:
  /// Empty placeholder; not usable until assigned.
  Strategy() = default;
  Strategy(PairAlphabet alphabet, Channel q);

  /// Every source symbol maps to cell (0, 0).
  static Strategy uninformative(std::size_t u_size, PairAlphabet alphabet);
  /// Builds the strategy from a flat row-major |U| x cells table of conditionals.
  static Strategy from_table(std::size_t u_size, PairAlphabet alphabet, std::span<const double> table);

  PairAlphabet alphabet() const noexcept { return alphabet_; }
  std::size_t w1_size() const noexcept { return alphabet_.w1_size; }
  std::size_t w2_size() const noexcept { return alphabet_.w2_size; }
  std::size_t u_size() const noexcept { return q_.inputs(); }
  const Channel& q() const noexcept { return q_; }
  double operator()(std::size_t u, std::size_t w1, std::size_t w2) const {
    return q_(u, alphabet_.cell(w1, w2));
  }

  /// Q_{W2|U}.
  Channel w2_channel() const { return marginalize_w1(q_, alphabet_); }
  /// Flat row-major |U| x cells table.
  std::vector<double> table() const;

  bool operator==(const Strategy&) const = default;

 private:
  PairAlphabet alphabet_;
  Channel q_;
};

/// Weights over message symbols and the posterior belief each one induces.
/// Symbols of zero weight carry the prior as a placeholder belief.
struct BeliefSplit {
  Distribution weights;
  std::vector<Distribution> beliefs;

  /// Sum_w weight(w) * belief(w) equals `prior` within `tol` entrywise.
  bool satisfies_splitting(const Distribution& prior, double tol = 1e-10) const;
};

std::vector<std::size_t> best_response_set_d1(const Distribution& q1, const GameInstance& g,
                                              double tie_tol = kDefaultTieTol);
std::vector<std::size_t> best_response_set_d2(const Distribution& q2, const GameInstance& g,
                                              double tie_tol = kDefaultTieTol);

struct WorstPair {
  std::size_t v1 = 0;
  std::size_t v2 = 0;
  double value = 0.0;
};

/// The encoder-worst pair in V1*(q12) x V2*(q2), scored under D1's belief q12.
/// Ties in the score resolve to the lexicographically first (v1, v2).
WorstPair worst_pair(const Distribution& q12, const Distribution& q2, const GameInstance& g,
                     double tie_tol = kDefaultTieTol, TieBreak mode = TieBreak::Pessimistic);

/// Number of pairs attaining the worst-pair score (|A~| in the single-letter problem).
std::size_t worst_pair_count(const Distribution& q12, const Distribution& q2, const GameInstance& g,
                             double tie_tol = kDefaultTieTol);

/// Encoder distortion when both decoders share belief q.
double psi_e(const Distribution& q, const GameInstance& g, double tie_tol = kDefaultTieTol,
             TieBreak mode = TieBreak::Pessimistic);

/// Worst-case expected encoder distortion of a single-letter strategy.
///
/// D1 best-responds separately at each (w1, w2); D2's action is a function of
/// w2 alone, so for every w2 the worst action v2 in V2*(Q_U^{w2}) is chosen
/// jointly against all w1 sharing that w2. Cells of zero probability add 0.
double expected_encoder_distortion(const GameInstance& g, const Strategy& s,
                                   double tie_tol = kDefaultTieTol,
                                   TieBreak mode = TieBreak::Pessimistic);

/// Decoder actions for one value of the coarse message, chosen worst-case
/// jointly: D2's single action against every refinement under it.
struct GroupActions {
  std::size_t v2 = 0;
  std::vector<std::size_t> v1;  // per refinement; 0 where the refinement has no mass
  double value = 0.0;           // unnormalized, in the units of `masses`
};

/// masses[w1 * |U| + u] = P(u, w1, w2) for a fixed w2 (need not be normalized).
GroupActions group_worst_actions(std::span<const double> masses, std::size_t w1_count, const GameInstance& g,
                                 double tie_tol = kDefaultTieTol, TieBreak mode = TieBreak::Pessimistic);

struct StrategySplits {
  BeliefSplit pairs;  // over W1 x W2, D1's beliefs
  BeliefSplit w2;     // over W2, D2's beliefs
};

StrategySplits split_from_strategy(const GameInstance& g, const Strategy& s);

/// True when every positive-probability (w1, w2) has a unique worst pair.
bool has_singleton_worst_pairs(const GameInstance& g, const Strategy& s,
                               double tie_tol = kDefaultTieTol);

/// Allocation-free evaluator for many strategies over one alphabet.
///
/// Holds scratch buffers, so one instance must not be shared across threads.
class StrategyEvaluator {
 public:
  struct Result {
    double value = 0.0;
    double i_uw2 = 0.0;    // I(U;W2), bits
    double i_uw1w2 = 0.0;  // I(U;W1,W2), bits
  };

  StrategyEvaluator(const GameInstance& g, PairAlphabet alphabet, double tie_tol = kDefaultTieTol,
                    TieBreak mode = TieBreak::Pessimistic);

  /// `q` is a row-major |U| x cells table whose rows lie on the simplex.
  Result evaluate(std::span<const double> q);
  /// Rates only; skips the decoder layer.
  Result rates(std::span<const double> q);
  /// Distortion only; skips the information terms.
  double value(std::span<const double> q);

  PairAlphabet alphabet() const noexcept { return alphabet_; }

 private:
  void fill_masses(std::span<const double> q);
  double distortion() const;
  void compute_rates(Result& r) const;

  const GameInstance* game_;
  PairAlphabet alphabet_;
  double tie_tol_;
  TieBreak mode_;
  std::vector<double> joint_;    // [u][cell] = P(u) Q(cell|u)
  std::vector<double> cell_;     // P(cell)
  std::vector<double> joint2_;   // [u][w2]
  std::vector<double> w2_mass_;  // P(w2)
};

}  // namespace persuasion
