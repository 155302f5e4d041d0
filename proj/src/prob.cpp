#include "persuasion/prob.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "persuasion/errors.hpp"

namespace persuasion {

namespace {

// Slack for comparisons of empirical types against delta.
constexpr double kTypeSlack = 1e-12;

double xlog2x_over(double p, double q) { return p > 0.0 ? p * std::log2(p / q) : 0.0; }

}  // namespace

Distribution::Distribution(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw InvalidArgument("distribution over an empty alphabet");
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw InvalidArgument("distribution entry is negative or not finite: " + std::to_string(p));
    total += p;
  }
  if (std::abs(total - 1.0) > kSimplexTol)
    throw InvalidArgument("distribution does not sum to one (sum = " + std::to_string(total) + ")");
}

Distribution Distribution::uniform(std::size_t n) {
  if (n == 0) throw InvalidArgument("uniform distribution over an empty alphabet");
  return Distribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Distribution Distribution::point_mass(std::size_t n, std::size_t k) {
  if (k >= n) throw InvalidArgument("point mass outside the alphabet");
  std::vector<double> p(n, 0.0);
  p[k] = 1.0;
  return Distribution(std::move(p));
}

Distribution Distribution::from_weights(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("negative or non-finite weight");
    total += w;
  }
  if (!(total > 0.0)) throw InvalidArgument("weights have zero total mass");
  std::vector<double> p(weights.begin(), weights.end());
  for (double& x : p) x /= total;
  return Distribution(std::move(p));
}

Channel::Channel(std::vector<Distribution> rows) : rows_(std::move(rows)) {
  if (rows_.empty()) throw InvalidArgument("channel without input symbols");
  const std::size_t width = rows_.front().size();
  for (const auto& r : rows_) {
    if (r.size() != width || width == 0) throw InvalidArgument("channel rows have inconsistent widths");
  }
}

Channel Channel::from_rows(const std::vector<std::vector<double>>& rows) {
  std::vector<Distribution> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.emplace_back(r);
  return Channel(std::move(out));
}

Channel Channel::constant(std::size_t inputs, const Distribution& row) {
  return Channel(std::vector<Distribution>(inputs, row));
}

Channel Channel::identity(std::size_t n) {
  std::vector<Distribution> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) rows.push_back(Distribution::point_mass(n, i));
  return Channel(std::move(rows));
}

Distribution Channel::output(const Distribution& input) const {
  if (input.size() != inputs()) throw InvalidArgument("input distribution does not match channel inputs");
  std::vector<double> out(outputs(), 0.0);
  for (std::size_t x = 0; x < inputs(); ++x) {
    for (std::size_t y = 0; y < outputs(); ++y) out[y] += input[x] * rows_[x][y];
  }
  return Distribution::from_weights(out);
}

JointDistribution::JointDistribution(std::vector<std::size_t> shape, std::vector<double> table)
    : shape_(std::move(shape)), table_(std::move(table)) {
  if (shape_.empty()) throw InvalidArgument("joint distribution without axes");
  std::size_t count = 1;
  for (std::size_t s : shape_) {
    if (s == 0) throw InvalidArgument("joint distribution axis of size zero");
    count *= s;
  }
  if (count != table_.size()) throw InvalidArgument("joint table size does not match its shape");
  double total = 0.0;
  for (double p : table_) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidArgument("joint table entry is negative or not finite");
    total += p;
  }
  if (std::abs(total - 1.0) > kSimplexTol) throw InvalidArgument("joint table does not sum to one");
}

JointDistribution JointDistribution::from_channel(const Distribution& input, const Channel& channel,
                                                  const std::vector<std::size_t>& output_shape) {
  if (input.size() != channel.inputs()) throw InvalidArgument("input does not match channel");
  std::size_t cells = 1;
  for (std::size_t s : output_shape) cells *= s;
  if (cells != channel.outputs()) throw InvalidArgument("output shape does not match channel outputs");
  std::vector<std::size_t> shape{input.size()};
  shape.insert(shape.end(), output_shape.begin(), output_shape.end());
  std::vector<double> table(input.size() * cells);
  for (std::size_t x = 0; x < input.size(); ++x) {
    for (std::size_t y = 0; y < cells; ++y) table[x * cells + y] = input[x] * channel(x, y);
  }
  return JointDistribution(std::move(shape), std::move(table));
}

std::size_t JointDistribution::flat_index(std::span<const std::size_t> index) const {
  if (index.size() != shape_.size()) throw InvalidArgument("index rank does not match joint distribution");
  std::size_t flat = 0;
  for (std::size_t a = 0; a < shape_.size(); ++a) {
    if (index[a] >= shape_[a]) throw InvalidArgument("index out of range");
    flat = flat * shape_[a] + index[a];
  }
  return flat;
}

Distribution JointDistribution::marginal(std::size_t axis) const {
  if (axis >= shape_.size()) throw InvalidArgument("marginal axis out of range");
  std::size_t inner = 1;
  for (std::size_t a = axis + 1; a < shape_.size(); ++a) inner *= shape_[a];
  const std::size_t n = shape_[axis];
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < table_.size(); ++i) out[(i / inner) % n] += table_[i];
  return Distribution::from_weights(out);
}

double entropy(const Distribution& p) {
  double h = 0.0;
  for (double x : p.probs()) {
    if (x > 0.0) h -= x * std::log2(x);
  }
  return std::max(0.0, h);
}

double mutual_information(const Distribution& input, const Channel& channel) {
  if (input.size() != channel.inputs()) throw InvalidArgument("input does not match channel");
  const std::size_t ny = channel.outputs();
  std::vector<double> out(ny, 0.0);
  for (std::size_t x = 0; x < input.size(); ++x) {
    for (std::size_t y = 0; y < ny; ++y) out[y] += input[x] * channel(x, y);
  }
  double info = 0.0;
  for (std::size_t x = 0; x < input.size(); ++x) {
    if (input[x] <= 0.0) continue;
    for (std::size_t y = 0; y < ny; ++y) info += input[x] * xlog2x_over(channel(x, y), out[y]);
  }
  return std::max(0.0, info);
}

Channel marginalize_w1(const Channel& joint, PairAlphabet alphabet) {
  if (joint.outputs() != alphabet.cells()) throw InvalidArgument("channel width does not match W1 x W2");
  std::vector<Distribution> rows;
  rows.reserve(joint.inputs());
  for (std::size_t u = 0; u < joint.inputs(); ++u) {
    std::vector<double> r(alphabet.w2_size, 0.0);
    for (std::size_t c = 0; c < alphabet.cells(); ++c) r[alphabet.w2_of(c)] += joint(u, c);
    rows.push_back(Distribution::from_weights(r));
  }
  return Channel(std::move(rows));
}

double conditional_mutual_information(const Distribution& input, const Channel& joint,
                                      PairAlphabet alphabet) {
  const double both = mutual_information(input, joint);
  const double coarse = mutual_information(input, marginalize_w1(joint, alphabet));
  return std::max(0.0, both - coarse);
}

double kl_divergence(const Distribution& p, const Distribution& q) {
  if (p.size() != q.size()) throw InvalidArgument("KL divergence between different alphabets");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
    d += p[i] * std::log2(p[i] / q[i]);
  }
  return std::max(0.0, d);
}

Distribution posterior(const Distribution& prior, const Channel& channel, std::size_t observation) {
  if (prior.size() != channel.inputs()) throw InvalidArgument("prior does not match channel");
  if (observation >= channel.outputs()) throw InvalidArgument("observation outside the output alphabet");
  std::vector<double> w(prior.size());
  double total = 0.0;
  for (std::size_t x = 0; x < prior.size(); ++x) {
    w[x] = prior[x] * channel(x, observation);
    total += w[x];
  }
  if (!(total > 0.0))
    throw ZeroProbabilityObservation("observation " + std::to_string(observation) + " has zero probability");
  return Distribution::from_weights(w);
}

double type_deviation(std::span<const Sequence> sequences, const JointDistribution& ref) {
  if (sequences.size() != ref.rank()) throw InvalidArgument("one sequence per joint axis is required");
  const std::size_t n = sequences.front().size();
  if (n == 0) throw InvalidArgument("typicality of empty sequences");
  for (const auto& s : sequences) {
    if (s.size() != n) throw InvalidArgument("sequences of different lengths");
  }
  const auto& shape = ref.shape();
  std::vector<double> counts(ref.table().size(), 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    std::size_t flat = 0;
    for (std::size_t a = 0; a < shape.size(); ++a) {
      const std::size_t sym = sequences[a][t];
      if (sym >= shape[a]) throw InvalidArgument("sequence symbol outside its alphabet");
      flat = flat * shape[a] + sym;
    }
    counts[flat] += 1.0;
  }
  double dev = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < counts.size(); ++i) dev += std::abs(counts[i] * inv_n - ref.table()[i]);
  return dev;
}

bool is_typical(std::span<const Sequence> sequences, const JointDistribution& ref, double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("typicality tolerance must be positive");
  return type_deviation(sequences, ref) <= delta + kTypeSlack;
}

}  // namespace persuasion
