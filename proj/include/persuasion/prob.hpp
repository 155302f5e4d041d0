#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace persuasion {

/// Slack allowed on the sum of a probability vector.
inline constexpr double kSimplexTol = 1e-12;

/// Symbols of every finite alphabet are small integers.
using Symbol = std::uint8_t;
using Sequence = std::vector<Symbol>;

/// A point of the probability simplex over {0, ..., size()-1}.
///
/// Entries are nonnegative and sum to one within kSimplexTol; the constructor
/// rejects anything else. A default-constructed Distribution is empty and only
/// useful as a placeholder.
class Distribution {
 public:
  Distribution() = default;
  explicit Distribution(std::vector<double> probs);

  static Distribution uniform(std::size_t n);
  static Distribution point_mass(std::size_t n, std::size_t k);
  /// Normalizes nonnegative weights with a positive total.
  static Distribution from_weights(std::span<const double> weights);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }
  const std::vector<double>& values() const noexcept { return probs_; }

  bool operator==(const Distribution&) const = default;

 private:
  std::vector<double> probs_;
};

/// Conditional distribution: one output Distribution per input symbol.
class Channel {
 public:
  Channel() = default;
  explicit Channel(std::vector<Distribution> rows);

  static Channel from_rows(const std::vector<std::vector<double>>& rows);
  static Channel constant(std::size_t inputs, const Distribution& row);
  static Channel identity(std::size_t n);

  std::size_t inputs() const noexcept { return rows_.size(); }
  std::size_t outputs() const noexcept { return rows_.empty() ? 0 : rows_.front().size(); }
  const Distribution& row(std::size_t x) const { return rows_[x]; }
  const std::vector<Distribution>& rows() const noexcept { return rows_; }
  double operator()(std::size_t x, std::size_t y) const { return rows_[x][y]; }

  /// Output marginal for the given input distribution.
  Distribution output(const Distribution& input) const;

  bool operator==(const Channel&) const = default;

 private:
  std::vector<Distribution> rows_;
};

/// Probability table over a product of finite alphabets, stored row-major
/// (last axis fastest).
class JointDistribution {
 public:
  JointDistribution(std::vector<std::size_t> shape, std::vector<double> table);

  /// Joint law of (X, Y) where X ~ input and Y | X ~ channel. The channel
  /// output index is unflattened according to `output_shape`, whose product
  /// must equal channel.outputs().
  static JointDistribution from_channel(const Distribution& input, const Channel& channel,
                                        const std::vector<std::size_t>& output_shape);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::span<const double> table() const noexcept { return table_; }
  std::size_t flat_index(std::span<const std::size_t> index) const;
  double at(std::span<const std::size_t> index) const { return table_[flat_index(index)]; }

  Distribution marginal(std::size_t axis) const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> table_;
};

/// Output alphabet W1 x W2 of a two-component channel; cell = w1 * w2_size + w2.
struct PairAlphabet {
  std::size_t w1_size = 1;
  std::size_t w2_size = 1;

  std::size_t cells() const noexcept { return w1_size * w2_size; }
  std::size_t cell(std::size_t w1, std::size_t w2) const noexcept { return w1 * w2_size + w2; }
  std::size_t w1_of(std::size_t cell) const noexcept { return cell / w2_size; }
  std::size_t w2_of(std::size_t cell) const noexcept { return cell % w2_size; }

  bool operator==(const PairAlphabet&) const = default;
};

/// Shannon entropy in bits.
double entropy(const Distribution& p);

/// I(X;Y) in bits for X ~ input, Y | X ~ channel.
double mutual_information(const Distribution& input, const Channel& channel);

/// Channel U -> W2 obtained by summing out w1.
Channel marginalize_w1(const Channel& joint, PairAlphabet alphabet);

/// I(U;W1|W2) = I(U;W1,W2) - I(U;W2), in bits.
double conditional_mutual_information(const Distribution& input, const Channel& joint,
                                      PairAlphabet alphabet);

/// D(p||q) in bits; +infinity when p puts mass outside supp q.
double kl_divergence(const Distribution& p, const Distribution& q);

/// Bayes posterior on the input after observing `observation` at the output.
/// Throws ZeroProbabilityObservation when the observation has zero marginal.
Distribution posterior(const Distribution& prior, const Channel& channel, std::size_t observation);

/// L1 distance between the joint empirical type of the sequences and `ref`.
/// One sequence per axis of `ref`; all sequences share a common length n >= 1.
double type_deviation(std::span<const Sequence> sequences, const JointDistribution& ref);

/// True iff the joint type of `sequences` is within L1 distance `delta` of `ref`.
bool is_typical(std::span<const Sequence> sequences, const JointDistribution& ref, double delta);

}  // namespace persuasion
