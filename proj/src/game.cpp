#include "persuasion/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "persuasion/errors.hpp"

namespace persuasion {

namespace {

void check_table(const std::vector<double>& table, std::size_t expected, const char* name) {
  if (table.size() != expected)
    throw InvalidArgument(std::string(name) + " has " + std::to_string(table.size()) + " entries, expected " +
                          std::to_string(expected));
  for (double x : table) {
    if (!std::isfinite(x)) throw InvalidArgument(std::string(name) + " has a non-finite entry");
  }
}

// Actions whose (unnormalized) loss is within tie_tol * mass of the minimum.
template <class LossFn>
void best_responses(std::size_t actions, LossFn loss, double mass, double tie_tol, std::vector<std::size_t>& out) {
  out.clear();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < actions; ++v) best = std::min(best, loss(v));
  const double cut = best + tie_tol * mass;
  for (std::size_t v = 0; v < actions; ++v) {
    if (loss(v) <= cut) out.push_back(v);
  }
}

double encoder_score(const Distribution& q, const GameInstance& g, std::size_t v1, std::size_t v2) {
  double s = 0.0;
  for (std::size_t u = 0; u < g.u_size(); ++u) s += q[u] * g.d_e(u, v1, v2);
  return s;
}

void check_belief(const Distribution& q, const GameInstance& g) {
  if (q.size() != g.u_size()) throw InvalidArgument("belief does not match the source alphabet");
}

}  // namespace

GameInstance::GameInstance(Distribution prior, std::size_t v1_size, std::size_t v2_size, std::vector<double> d_e,
                           std::vector<double> d_1, std::vector<double> d_2)
    : prior_(std::move(prior)),
      v1_size_(v1_size),
      v2_size_(v2_size),
      d_e_(std::move(d_e)),
      d_1_(std::move(d_1)),
      d_2_(std::move(d_2)) {
  if (prior_.size() == 0) throw InvalidArgument("game without source symbols");
  if (v1_size_ == 0 || v2_size_ == 0) throw InvalidArgument("decoder action sets must be nonempty");
  if (prior_.size() > 255 || v1_size_ > 255 || v2_size_ > 255) throw InvalidArgument("alphabets are limited to 255 symbols");
  const std::size_t nu = prior_.size();
  check_table(d_e_, nu * v1_size_ * v2_size_, "d_e");
  check_table(d_1_, nu * v1_size_, "d_1");
  check_table(d_2_, nu * v2_size_, "d_2");
  for (double x : d_e_) d_norm_ = std::max(d_norm_, std::abs(x));
}

GameInstance GameInstance::with_prior(Distribution prior) const {
  if (prior.size() != u_size()) throw InvalidArgument("replacement prior has the wrong size");
  return GameInstance(std::move(prior), v1_size_, v2_size_, d_e_, d_1_, d_2_);
}

GameInstance make_aligned_hamming(const Distribution& prior) {
  const std::size_t n = prior.size();
  std::vector<double> d_e(n * n * n), d_1(n * n), d_2(n * n);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      d_1[u * n + v] = u != v ? 1.0 : 0.0;
      d_2[u * n + v] = u != v ? 1.0 : 0.0;
      for (std::size_t w = 0; w < n; ++w) d_e[(u * n + v) * n + w] = (u != v ? 1.0 : 0.0) + (u != w ? 1.0 : 0.0);
    }
  }
  return GameInstance(prior, n, n, std::move(d_e), std::move(d_1), std::move(d_2));
}

GameInstance make_prosecutor(double prior_guilty) {
  Distribution prior({1.0 - prior_guilty, prior_guilty});
  std::vector<double> d_e(8), d_1(4, 0.0), d_2(4);
  for (std::size_t u = 0; u < 2; ++u) {
    for (std::size_t v2 = 0; v2 < 2; ++v2) {
      d_2[u * 2 + v2] = u != v2 ? 1.0 : 0.0;
      for (std::size_t v1 = 0; v1 < 2; ++v1) d_e[(u * 2 + v1) * 2 + v2] = v2 == 0 ? 1.0 : 0.0;
    }
  }
  return GameInstance(std::move(prior), 2, 2, std::move(d_e), std::move(d_1), std::move(d_2));
}

RatePair::RatePair(double r1_, double r2_) : r1(r1_), r2(r2_) {
  if (!(r1 >= 0.0) || !(r2 >= 0.0) || !std::isfinite(r1) || !std::isfinite(r2))
    throw InvalidArgument("rates must be finite and nonnegative");
}

int message_bits(double rate, int n) {
  return static_cast<int>(std::floor(static_cast<double>(n) * rate + 1e-9));
}

Strategy::Strategy(PairAlphabet alphabet, Channel q) : alphabet_(alphabet), q_(std::move(q)) {
  if (alphabet_.w1_size == 0 || alphabet_.w2_size == 0) throw InvalidArgument("auxiliary alphabets must be nonempty");
  if (alphabet_.w1_size > 255 || alphabet_.w2_size > 255) throw InvalidArgument("auxiliary alphabets are limited to 255 symbols");
  if (q_.outputs() != alphabet_.cells()) throw InvalidArgument("strategy channel width does not match W1 x W2");
}

Strategy Strategy::uninformative(std::size_t u_size, PairAlphabet alphabet) {
  return Strategy(alphabet, Channel::constant(u_size, Distribution::point_mass(alphabet.cells(), 0)));
}

Strategy Strategy::from_table(std::size_t u_size, PairAlphabet alphabet, std::span<const double> table) {
  const std::size_t k = alphabet.cells();
  if (table.size() != u_size * k) throw InvalidArgument("strategy table has the wrong size");
  std::vector<Distribution> rows;
  rows.reserve(u_size);
  for (std::size_t u = 0; u < u_size; ++u) rows.push_back(Distribution::from_weights(table.subspan(u * k, k)));
  return Strategy(alphabet, Channel(std::move(rows)));
}

std::vector<double> Strategy::table() const {
  std::vector<double> t;
  t.reserve(u_size() * alphabet_.cells());
  for (const auto& r : q_.rows()) t.insert(t.end(), r.values().begin(), r.values().end());
  return t;
}

bool BeliefSplit::satisfies_splitting(const Distribution& prior, double tol) const {
  if (beliefs.size() != weights.size()) return false;
  for (std::size_t u = 0; u < prior.size(); ++u) {
    double mix = 0.0;
    for (std::size_t w = 0; w < beliefs.size(); ++w) mix += weights[w] * beliefs[w][u];
    if (std::abs(mix - prior[u]) > tol) return false;
  }
  return true;
}

std::vector<std::size_t> best_response_set_d1(const Distribution& q1, const GameInstance& g, double tie_tol) {
  check_belief(q1, g);
  std::vector<std::size_t> out;
  best_responses(
      g.v1_size(),
      [&](std::size_t v) {
        double l = 0.0;
        for (std::size_t u = 0; u < g.u_size(); ++u) l += q1[u] * g.d_1(u, v);
        return l;
      },
      1.0, tie_tol, out);
  return out;
}

std::vector<std::size_t> best_response_set_d2(const Distribution& q2, const GameInstance& g, double tie_tol) {
  check_belief(q2, g);
  std::vector<std::size_t> out;
  best_responses(
      g.v2_size(),
      [&](std::size_t v) {
        double l = 0.0;
        for (std::size_t u = 0; u < g.u_size(); ++u) l += q2[u] * g.d_2(u, v);
        return l;
      },
      1.0, tie_tol, out);
  return out;
}

WorstPair worst_pair(const Distribution& q12, const Distribution& q2, const GameInstance& g, double tie_tol,
                     TieBreak mode) {
  const auto set1 = best_response_set_d1(q12, g, tie_tol);
  const auto set2 = best_response_set_d2(q2, g, tie_tol);
  const double sign = mode == TieBreak::Pessimistic ? 1.0 : -1.0;
  // Lexicographic scan; a later pair replaces the incumbent only on a strict improvement.
  WorstPair best{set1.front(), set2.front(), encoder_score(q12, g, set1.front(), set2.front())};
  for (std::size_t v1 : set1) {
    for (std::size_t v2 : set2) {
      const double s = encoder_score(q12, g, v1, v2);
      if (sign * s > sign * best.value) best = {v1, v2, s};
    }
  }
  return best;
}

std::size_t worst_pair_count(const Distribution& q12, const Distribution& q2, const GameInstance& g, double tie_tol) {
  const auto set1 = best_response_set_d1(q12, g, tie_tol);
  const auto set2 = best_response_set_d2(q2, g, tie_tol);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t v1 : set1) {
    for (std::size_t v2 : set2) best = std::max(best, encoder_score(q12, g, v1, v2));
  }
  std::size_t count = 0;
  for (std::size_t v1 : set1) {
    for (std::size_t v2 : set2) {
      if (encoder_score(q12, g, v1, v2) >= best - tie_tol) ++count;
    }
  }
  return count;
}

double psi_e(const Distribution& q, const GameInstance& g, double tie_tol, TieBreak mode) {
  return worst_pair(q, q, g, tie_tol, mode).value;
}

double expected_encoder_distortion(const GameInstance& g, const Strategy& s, double tie_tol, TieBreak mode) {
  if (s.u_size() != g.u_size()) throw InvalidArgument("strategy does not match the source alphabet");
  StrategyEvaluator eval(g, s.alphabet(), tie_tol, mode);
  const auto table = s.table();
  return eval.evaluate(table).value;
}

GroupActions group_worst_actions(std::span<const double> masses, std::size_t w1_count, const GameInstance& g,
                                 double tie_tol, TieBreak mode) {
  const std::size_t nu = g.u_size();
  if (masses.size() != w1_count * nu) throw InvalidArgument("group masses have the wrong size");
  const double sign = mode == TieBreak::Pessimistic ? 1.0 : -1.0;
  std::vector<double> m2(nu, 0.0);
  std::vector<double> cell_mass(w1_count, 0.0);
  for (std::size_t w1 = 0; w1 < w1_count; ++w1) {
    for (std::size_t u = 0; u < nu; ++u) {
      m2[u] += masses[w1 * nu + u];
      cell_mass[w1] += masses[w1 * nu + u];
    }
  }
  const double total = std::accumulate(cell_mass.begin(), cell_mass.end(), 0.0);
  std::vector<std::size_t> set2, set1;
  best_responses(
      g.v2_size(),
      [&](std::size_t v) {
        double l = 0.0;
        for (std::size_t u = 0; u < nu; ++u) l += m2[u] * g.d_2(u, v);
        return l;
      },
      total, tie_tol, set2);

  GroupActions best;
  bool first = true;
  std::vector<std::size_t> v1(w1_count, 0);
  for (std::size_t v2 : set2) {
    double sum = 0.0;
    for (std::size_t w1 = 0; w1 < w1_count; ++w1) {
      v1[w1] = 0;
      if (!(cell_mass[w1] > 0.0)) continue;
      const double* m = masses.data() + w1 * nu;
      best_responses(
          g.v1_size(),
          [&](std::size_t v) {
            double l = 0.0;
            for (std::size_t u = 0; u < nu; ++u) l += m[u] * g.d_1(u, v);
            return l;
          },
          cell_mass[w1], tie_tol, set1);
      double pick = 0.0;
      bool have = false;
      for (std::size_t a : set1) {
        double e = 0.0;
        for (std::size_t u = 0; u < nu; ++u) e += m[u] * g.d_e(u, a, v2);
        if (!have || sign * e > sign * pick) {
          pick = e;
          v1[w1] = a;
          have = true;
        }
      }
      sum += pick;
    }
    if (first || sign * sum > sign * best.value) {
      best.v2 = v2;
      best.v1 = v1;
      best.value = sum;
      first = false;
    }
  }
  return best;
}

StrategySplits split_from_strategy(const GameInstance& g, const Strategy& s) {
  if (s.u_size() != g.u_size()) throw InvalidArgument("strategy does not match the source alphabet");
  const auto& prior = g.prior();
  const Channel w2ch = s.w2_channel();

  auto make_split = [&](const Channel& ch) {
    const Distribution weights = ch.output(prior);
    std::vector<Distribution> beliefs;
    beliefs.reserve(ch.outputs());
    for (std::size_t w = 0; w < ch.outputs(); ++w) {
      double mass = 0.0;
      for (std::size_t u = 0; u < prior.size(); ++u) mass += prior[u] * ch(u, w);
      beliefs.push_back(mass > 0.0 ? posterior(prior, ch, w) : prior);
    }
    return BeliefSplit{weights, std::move(beliefs)};
  };
  return {make_split(s.q()), make_split(w2ch)};
}

bool has_singleton_worst_pairs(const GameInstance& g, const Strategy& s, double tie_tol) {
  const auto splits = split_from_strategy(g, s);
  const auto a = s.alphabet();
  for (std::size_t c = 0; c < a.cells(); ++c) {
    if (splits.pairs.weights[c] <= 0.0) continue;
    if (worst_pair_count(splits.pairs.beliefs[c], splits.w2.beliefs[a.w2_of(c)], g, tie_tol) != 1) return false;
  }
  return true;
}

StrategyEvaluator::StrategyEvaluator(const GameInstance& g, PairAlphabet alphabet, double tie_tol, TieBreak mode)
    : game_(&g),
      alphabet_(alphabet),
      tie_tol_(tie_tol),
      mode_(mode),
      joint_(g.u_size() * alphabet.cells()),
      cell_(alphabet.cells()),
      joint2_(g.u_size() * alphabet.w2_size),
      w2_mass_(alphabet.w2_size) {
  if (alphabet.cells() == 0) throw InvalidArgument("empty auxiliary alphabet");
}

void StrategyEvaluator::fill_masses(std::span<const double> q) {
  const auto& g = *game_;
  const std::size_t k = alphabet_.cells();
  const std::size_t nw2 = alphabet_.w2_size;
  if (q.size() != g.u_size() * k) throw InvalidArgument("strategy table has the wrong size");
  std::fill(cell_.begin(), cell_.end(), 0.0);
  std::fill(joint2_.begin(), joint2_.end(), 0.0);
  std::fill(w2_mass_.begin(), w2_mass_.end(), 0.0);
  for (std::size_t u = 0; u < g.u_size(); ++u) {
    const double pu = g.prior()[u];
    for (std::size_t c = 0; c < k; ++c) {
      const double m = pu * q[u * k + c];
      joint_[u * k + c] = m;
      cell_[c] += m;
      joint2_[u * nw2 + alphabet_.w2_of(c)] += m;
    }
  }
  for (std::size_t c = 0; c < k; ++c) w2_mass_[alphabet_.w2_of(c)] += cell_[c];
}

double StrategyEvaluator::distortion() const {
  const auto& g = *game_;
  const std::size_t nu = g.u_size();
  const std::size_t k = alphabet_.cells();
  const std::size_t nw1 = alphabet_.w1_size;
  const std::size_t nw2 = alphabet_.w2_size;
  const std::size_t nv1 = g.v1_size();
  const std::size_t nv2 = g.v2_size();
  const bool pessimistic = mode_ == TieBreak::Pessimistic;

  // Small fixed-capacity scratch; alphabets are bounded by 255.
  std::size_t set2[256];
  std::size_t set1[256];
  double total = 0.0;
  for (std::size_t w2 = 0; w2 < nw2; ++w2) {
    const double m2 = w2_mass_[w2];
    if (!(m2 > 0.0)) continue;

    double best2 = std::numeric_limits<double>::infinity();
    for (std::size_t v2 = 0; v2 < nv2; ++v2) {
      double l = 0.0;
      for (std::size_t u = 0; u < nu; ++u) l += joint2_[u * nw2 + w2] * g.d_2(u, v2);
      best2 = std::min(best2, l);
    }
    std::size_t n2 = 0;
    for (std::size_t v2 = 0; v2 < nv2; ++v2) {
      double l = 0.0;
      for (std::size_t u = 0; u < nu; ++u) l += joint2_[u * nw2 + w2] * g.d_2(u, v2);
      if (l <= best2 + tie_tol_ * m2) set2[n2++] = v2;
    }

    double group = pessimistic ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    for (std::size_t i2 = 0; i2 < n2; ++i2) {
      const std::size_t v2 = set2[i2];
      double sum = 0.0;
      for (std::size_t w1 = 0; w1 < nw1; ++w1) {
        const std::size_t c = w1 * nw2 + w2;
        const double mc = cell_[c];
        if (!(mc > 0.0)) continue;
        double best1 = std::numeric_limits<double>::infinity();
        for (std::size_t v1 = 0; v1 < nv1; ++v1) {
          double l = 0.0;
          for (std::size_t u = 0; u < nu; ++u) l += joint_[u * k + c] * g.d_1(u, v1);
          best1 = std::min(best1, l);
        }
        std::size_t n1 = 0;
        for (std::size_t v1 = 0; v1 < nv1; ++v1) {
          double l = 0.0;
          for (std::size_t u = 0; u < nu; ++u) l += joint_[u * k + c] * g.d_1(u, v1);
          if (l <= best1 + tie_tol_ * mc) set1[n1++] = v1;
        }
        double pick = pessimistic ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
        for (std::size_t i1 = 0; i1 < n1; ++i1) {
          double e = 0.0;
          for (std::size_t u = 0; u < nu; ++u) e += joint_[u * k + c] * g.d_e(u, set1[i1], v2);
          pick = pessimistic ? std::max(pick, e) : std::min(pick, e);
        }
        sum += pick;
      }
      group = pessimistic ? std::max(group, sum) : std::min(group, sum);
    }
    total += group;
  }
  return total;
}

void StrategyEvaluator::compute_rates(Result& r) const {
  const auto& g = *game_;
  const std::size_t k = alphabet_.cells();
  const std::size_t nw2 = alphabet_.w2_size;
  double i12 = 0.0;
  double i2 = 0.0;
  for (std::size_t u = 0; u < g.u_size(); ++u) {
    const double pu = g.prior()[u];
    if (!(pu > 0.0)) continue;
    for (std::size_t c = 0; c < k; ++c) {
      const double m = joint_[u * k + c];
      if (m > 0.0) i12 += m * std::log2(m / (pu * cell_[c]));
    }
    for (std::size_t w2 = 0; w2 < nw2; ++w2) {
      const double m = joint2_[u * nw2 + w2];
      if (m > 0.0) i2 += m * std::log2(m / (pu * w2_mass_[w2]));
    }
  }
  r.i_uw1w2 = std::max(0.0, i12);
  r.i_uw2 = std::max(0.0, i2);
}

StrategyEvaluator::Result StrategyEvaluator::evaluate(std::span<const double> q) {
  fill_masses(q);
  Result r;
  r.value = distortion();
  compute_rates(r);
  return r;
}

double StrategyEvaluator::value(std::span<const double> q) {
  fill_masses(q);
  return distortion();
}

StrategyEvaluator::Result StrategyEvaluator::rates(std::span<const double> q) {
  fill_masses(q);
  Result r;
  compute_rates(r);
  return r;
}

}  // namespace persuasion
