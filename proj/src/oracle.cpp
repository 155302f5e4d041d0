#include "persuasion/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "persuasion/errors.hpp"
#include "persuasion/lattice.hpp"
#include "persuasion/solver.hpp"

namespace persuasion {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_table(std::span<const double> table, std::size_t rows, std::size_t cols) {
  std::string out = "[";
  char buf[32];
  for (std::size_t r = 0; r < rows; ++r) {
    out += r ? ",[" : "[";
    for (std::size_t c = 0; c < cols; ++c) {
      std::snprintf(buf, sizeof buf, "%s%.6g", c ? "," : "", table[r * cols + c]);
      out += buf;
    }
    out += "]";
  }
  return out + "]";
}

// Cell permutations induced by relabeling W1 and W2 independently.
std::vector<std::vector<std::size_t>> relabelings(PairAlphabet a) {
  std::vector<std::size_t> p1(a.w1_size), p2(a.w2_size);
  std::iota(p1.begin(), p1.end(), 0);
  std::vector<std::vector<std::size_t>> out;
  do {
    std::iota(p2.begin(), p2.end(), 0);
    do {
      std::vector<std::size_t> map(a.cells());
      for (std::size_t c = 0; c < a.cells(); ++c) map[c] = a.cell(p1[a.w1_of(c)], p2[a.w2_of(c)]);
      out.push_back(std::move(map));
    } while (std::next_permutation(p2.begin(), p2.end()));
  } while (std::next_permutation(p1.begin(), p1.end()));
  return out;
}

// Row 0 is canonical when no relabeling makes it lexicographically larger;
// every orbit of full channels then has a representative with canonical row 0.
bool is_canonical(const std::vector<int>& row, const std::vector<std::vector<std::size_t>>& perms) {
  std::vector<int> moved(row.size());
  for (const auto& p : perms) {
    for (std::size_t c = 0; c < row.size(); ++c) moved[p[c]] = row[c];
    if (std::lexicographical_compare(row.begin(), row.end(), moved.begin(), moved.end())) return false;
  }
  return true;
}

struct RateRule {
  double w2_max;
  double total_max;

  bool admits(double i2, double i12) const { return i2 <= w2_max + kRateMargin && i12 <= total_max + kRateMargin; }
};

}  // namespace

namespace {

struct PassResult {
  std::vector<double> value;
  std::vector<std::vector<double>> table;
};

// One exhaustive sweep of the channel lattice over alphabet `a`, tracking the
// minimum separately for each rate rule.
PassResult lattice_pass(const GameInstance& g, PairAlphabet a, const std::vector<RateRule>& rules, int m,
                        const GridOracleOptions& opt) {
  const std::size_t k = a.cells();
  const std::size_t nw2 = a.w2_size;
  const std::size_t nu = g.u_size();
  const auto perms = relabelings(a);
  // Canonical row-0 choices number at least |comps| / |perms|; reject before enumerating.
  const long double per_row = static_cast<long double>(lattice_size(static_cast<std::size_t>(m), k));
  if (per_row > 5e7L || std::pow(per_row, static_cast<long double>(nu)) / perms.size() > 5e9L)
    throw InstanceTooLarge("oracle lattice has too many points at this resolution");
  const auto comps = all_compositions(m, k);
  std::vector<std::size_t> row0;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (is_canonical(comps[i], perms)) row0.push_back(i);
  }
  const long double points =
      static_cast<long double>(row0.size()) * std::pow(static_cast<long double>(comps.size()), nu - 1.0L);
  if (points > 5e9L) throw InstanceTooLarge("oracle lattice has too many points at this resolution");

  // Per-composition sums of q log2 q over cells and over the W2 marginal.
  const auto& prior = g.prior();
  std::vector<double> neg_h(comps.size()), neg_h2(comps.size());
  std::vector<int> w2_counts(comps.size() * nw2, 0);
  for (std::size_t i = 0; i < comps.size(); ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      const double q = static_cast<double>(comps[i][c]) / m;
      if (q > 0.0) s += q * std::log2(q);
      w2_counts[i * nw2 + a.w2_of(c)] += comps[i][c];
    }
    neg_h[i] = s;
    double s2 = 0.0;
    for (std::size_t w = 0; w < nw2; ++w) {
      const double q = static_cast<double>(w2_counts[i * nw2 + w]) / m;
      if (q > 0.0) s2 += q * std::log2(q);
    }
    neg_h2[i] = s2;
  }
  // x log2 x of an output mass, keyed by the per-symbol lattice counts.
  std::size_t stride = 1;
  std::vector<std::size_t> strides(nu);
  for (std::size_t u = 0; u < nu; ++u) {
    strides[u] = stride;
    stride *= static_cast<std::size_t>(m + 1);
  }
  std::vector<double> xlogx(stride);
  for (std::size_t key = 0; key < stride; ++key) {
    double mass = 0.0;
    std::size_t rest = key;
    for (std::size_t u = 0; u < nu; ++u) {
      mass += prior[u] * static_cast<double>(rest % (m + 1)) / m;
      rest /= (m + 1);
    }
    xlogx[key] = mass > 0.0 ? mass * std::log2(mass) : 0.0;
  }

  std::vector<double> best(rules.size(), kInf);
  std::vector<std::vector<double>> best_table(rules.size());

  StrategyEvaluator eval(g, a, opt.tie_tol, opt.mode);
  std::vector<double> table(nu * k);
  std::vector<std::size_t> idx(nu, 0);
  std::size_t r0 = 0;
  std::vector<std::size_t> comp_of(nu);
  for (;;) {
    comp_of[0] = row0[r0];
    for (std::size_t u = 1; u < nu; ++u) comp_of[u] = idx[u];

    double row_terms = 0.0, row_terms2 = 0.0;
    for (std::size_t u = 0; u < nu; ++u) {
      row_terms += prior[u] * neg_h[comp_of[u]];
      row_terms2 += prior[u] * neg_h2[comp_of[u]];
    }
    double out_terms = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      std::size_t key = 0;
      for (std::size_t u = 0; u < nu; ++u) key += strides[u] * static_cast<std::size_t>(comps[comp_of[u]][c]);
      out_terms += xlogx[key];
    }
    double out_terms2 = 0.0;
    for (std::size_t w = 0; w < nw2; ++w) {
      std::size_t key = 0;
      for (std::size_t u = 0; u < nu; ++u) key += strides[u] * static_cast<std::size_t>(w2_counts[comp_of[u] * nw2 + w]);
      out_terms2 += xlogx[key];
    }
    const double i12 = std::max(0.0, row_terms - out_terms);
    const double i2 = std::max(0.0, row_terms2 - out_terms2);

    bool any = false;
    for (const auto& rule : rules) any = any || rule.admits(i2, i12);
    if (any) {
      for (std::size_t u = 0; u < nu; ++u) {
        for (std::size_t c = 0; c < k; ++c) table[u * k + c] = static_cast<double>(comps[comp_of[u]][c]) / m;
      }
      const double v = eval.value(table);
      for (std::size_t i = 0; i < rules.size(); ++i) {
        if (v < best[i] && rules[i].admits(i2, i12)) {
          best[i] = v;
          best_table[i] = table;
        }
      }
    }

    std::size_t u = 1;
    while (u < nu && ++idx[u] == comps.size()) idx[u++] = 0;
    if (u == nu && ++r0 == row0.size()) break;
  }

  return {std::move(best), std::move(best_table)};
}

}  // namespace

OracleResult grid_oracle_dstar(const GameInstance& g, const RatePair& r, double resolution,
                               const GridOracleOptions& opt) {
  return grid_oracle_dstar(g, std::vector<RatePair>{r}, resolution, opt).front();
}

std::vector<OracleResult> grid_oracle_dstar(const GameInstance& g, const std::vector<RatePair>& rates,
                                            double resolution, const GridOracleOptions& opt) {
  if (g.u_size() > 3 || g.v1_size() > 3 || g.v2_size() > 3)
    throw InstanceTooLarge("grid oracle is limited to alphabets of at most 3 symbols");
  if (!(resolution > 0.0) || resolution > 0.25) throw InvalidConfig("oracle resolution must lie in (0, 0.25]");
  if (rates.empty()) throw InvalidArgument("no rate pairs given");
  const int m = lattice_denominator(resolution);

  // A zero rate leaves its auxiliary uninformative; collapsing it to one symbol
  // loses nothing (D1 then shares D2's beliefs, or D2 keeps the prior), so each
  // kind of rate pair gets its own, smaller alphabet.
  enum Kind { kZero, kR1Zero, kR2Zero, kGeneral };
  auto kind_of = [](const RatePair& r) {
    if (r.r1 == 0.0 && r.r2 == 0.0) return kZero;
    if (r.r1 == 0.0) return kR1Zero;
    if (r.r2 == 0.0) return kR2Zero;
    return kGeneral;
  };
  const PairAlphabet alphabets[] = {{1, 1}, {1, g.v2_size()}, {g.v1_size(), 1}, {g.v1_size(), g.v2_size()}};

  std::vector<OracleResult> out(rates.size());
  for (int kind = kZero; kind <= kGeneral; ++kind) {
    std::vector<std::size_t> members;
    std::vector<RateRule> rules;
    for (std::size_t i = 0; i < rates.size(); ++i) {
      if (kind_of(rates[i]) != kind) continue;
      members.push_back(i);
      rules.push_back({rates[i].r2, rates[i].r1 + rates[i].r2});
    }
    if (members.empty()) continue;
    const PairAlphabet a = alphabets[kind];
    const auto pass = lattice_pass(g, a, rules, m, opt);
    for (std::size_t j = 0; j < members.size(); ++j) {
      OracleResult res;
      res.value = pass.value[j];
      res.resolution = 1.0 / m;
      res.slack = res.resolution * g.d_norm();
      res.exhaustive = true;
      res.argmin = pass.table[j];
      res.argmin_description = "W1 x W2 = " + std::to_string(a.w1_size) + " x " + std::to_string(a.w2_size) +
                               ", Q[u][w1*|W2|+w2] = " + format_table(pass.table[j], g.u_size(), a.cells());
      out[members[j]] = std::move(res);
    }
  }
  return out;
}

namespace {

// Per-symbol block distortion of an encoding U^n -> M1 x M2.
class BlockEvaluator {
 public:
  BlockEvaluator(const GameInstance& g, int n, PairAlphabet messages, const BruteForceOptions& opt)
      : g_(g), n_(n), k_(messages.cells()), eval_(g, messages, opt.tie_tol, opt.mode) {
    const std::size_t nu = g.u_size();
    blocks_ = 1;
    for (int t = 0; t < n; ++t) blocks_ *= nu;
    block_prob_.assign(blocks_, 1.0);
    symbol_.assign(blocks_ * static_cast<std::size_t>(n), 0);
    for (std::size_t s = 0; s < blocks_; ++s) {
      std::size_t rest = s;
      for (int t = n - 1; t >= 0; --t) {
        const std::size_t u = rest % nu;
        rest /= nu;
        symbol_[s * n + t] = u;
        block_prob_[s] *= g.prior()[u];
      }
    }
    induced_.assign(nu * k_, 0.0);
  }

  std::size_t blocks() const { return blocks_; }
  std::size_t cells() const { return k_; }

  double operator()(std::span<const double> sigma) {
    double total = 0.0;
    for (int t = 0; t < n_; ++t) {
      std::fill(induced_.begin(), induced_.end(), 0.0);
      for (std::size_t s = 0; s < blocks_; ++s) {
        const std::size_t u = symbol_[s * n_ + t];
        const double pu = g_.prior()[u];
        if (!(pu > 0.0)) continue;
        const double w = block_prob_[s] / pu;
        for (std::size_t c = 0; c < k_; ++c) induced_[u * k_ + c] += w * sigma[s * k_ + c];
      }
      total += eval_.value(induced_);
    }
    return total / n_;
  }

 private:
  const GameInstance& g_;
  int n_;
  std::size_t k_;
  StrategyEvaluator eval_;
  std::size_t blocks_ = 1;
  std::vector<double> block_prob_;
  std::vector<std::size_t> symbol_;
  std::vector<double> induced_;
};

// First-improvement descent moving `step` of mass between cells of one row.
double lattice_descent(BlockEvaluator& f, std::vector<double>& sigma, double value, double step) {
  const std::size_t k = f.cells();
  for (int pass = 0; pass < 500; ++pass) {
    bool improved = false;
    for (std::size_t s = 0; s < f.blocks(); ++s) {
      for (std::size_t from = 0; from < k; ++from) {
        for (std::size_t to = 0; to < k; ++to) {
          const double have = sigma[s * k + from];
          if (to == from || !(have > 0.0)) continue;
          const double amount = std::min(step, have);
          const double old_to = sigma[s * k + to];
          sigma[s * k + from] = have - amount;
          sigma[s * k + to] = old_to + amount;
          const double v = f(sigma);
          if (v < value - 1e-13) {
            value = v;
            improved = true;
          } else {
            sigma[s * k + from] = have;
            sigma[s * k + to] = old_to;
          }
        }
      }
    }
    if (!improved) break;
  }
  return value;
}

}  // namespace

OracleResult brute_force_game_value(const GameInstance& g, const RatePair& r, int n, double enc_grid,
                                    const BruteForceOptions& opt) {
  if (n != 1 && n != 2) throw InvalidArgument("brute-force game value supports n = 1 or n = 2");
  if (!(enc_grid > 0.0) || enc_grid > 0.5) throw InvalidConfig("enc_grid must lie in (0, 0.5]");
  const int b1 = message_bits(r.r1, n);
  const int b2 = message_bits(r.r2, n);
  if (b1 > 4 || b2 > 4 || b1 + b2 > 6) throw InstanceTooLarge("message sets too large to enumerate");
  const PairAlphabet messages{std::size_t{1} << b1, std::size_t{1} << b2};
  std::size_t blocks = 1;
  for (int t = 0; t < n; ++t) blocks *= g.u_size();
  if (blocks > 16) throw InstanceTooLarge("too many source blocks to enumerate");

  BlockEvaluator f(g, n, messages, opt);
  const std::size_t k = messages.cells();
  const int m = lattice_denominator(enc_grid);

  OracleResult res;
  res.resolution = 1.0 / m;
  res.slack = res.resolution * g.d_norm();
  double best = kInf;
  std::vector<double> best_sigma;
  std::vector<double> sigma(blocks * k, 0.0);

  const long double points = std::pow(static_cast<long double>(lattice_size(static_cast<std::size_t>(m), k)),
                                      static_cast<long double>(blocks));
  if (points <= static_cast<long double>(opt.max_exhaustive_points)) {
    const auto comps = all_compositions(m, k);
    std::vector<std::size_t> idx(blocks, 0);
    for (;;) {
      for (std::size_t s = 0; s < blocks; ++s) {
        for (std::size_t c = 0; c < k; ++c) sigma[s * k + c] = static_cast<double>(comps[idx[s]][c]) / m;
      }
      const double v = f(sigma);
      if (v < best) {
        best = v;
        best_sigma = sigma;
      }
      std::size_t s = 0;
      while (s < blocks && ++idx[s] == comps.size()) idx[s++] = 0;
      if (s == blocks) break;
    }
    res.exhaustive = true;
  } else {
    res.exhaustive = false;
    std::vector<std::vector<double>> starts;

    // Every deterministic encoding, if there are not too many.
    const long double maps = std::pow(static_cast<long double>(k), static_cast<long double>(blocks));
    if (maps <= 2e5L) {
      std::vector<std::size_t> cell(blocks, 0);
      std::vector<double> best_det;
      double best_det_v = kInf;
      for (;;) {
        std::fill(sigma.begin(), sigma.end(), 0.0);
        for (std::size_t s = 0; s < blocks; ++s) sigma[s * k + cell[s]] = 1.0;
        const double v = f(sigma);
        if (v < best_det_v) {
          best_det_v = v;
          best_det = sigma;
        }
        std::size_t s = 0;
        while (s < blocks && ++cell[s] == k) cell[s++] = 0;
        if (s == blocks) break;
      }
      starts.push_back(best_det);
    }

    // Two independent uses of the n = 1 optimum; floor(2R) >= 2 floor(R) leaves room.
    if (n == 2) {
      const auto one = brute_force_game_value(g, r, 1, enc_grid, opt);
      const std::size_t nu = g.u_size();
      const std::size_t a1 = std::size_t{1} << message_bits(r.r1, 1);
      const std::size_t a2 = std::size_t{1} << message_bits(r.r2, 1);
      const PairAlphabet small{a1, a2};
      std::vector<double> prod(blocks * k, 0.0);
      for (std::size_t u1 = 0; u1 < nu; ++u1) {
        for (std::size_t u2 = 0; u2 < nu; ++u2) {
          const std::size_t s = u1 * nu + u2;
          for (std::size_t c1 = 0; c1 < small.cells(); ++c1) {
            for (std::size_t c2 = 0; c2 < small.cells(); ++c2) {
              const std::size_t m1 = small.w1_of(c1) * a1 + small.w1_of(c2);
              const std::size_t m2 = small.w2_of(c1) * a2 + small.w2_of(c2);
              prod[s * k + messages.cell(m1, m2)] += one.argmin[u1 * small.cells() + c1] * one.argmin[u2 * small.cells() + c2];
            }
          }
        }
      }
      starts.push_back(prod);
    }
    if (starts.empty()) {
      std::fill(sigma.begin(), sigma.end(), 0.0);
      for (std::size_t s = 0; s < blocks; ++s) sigma[s * k] = 1.0;
      starts.push_back(sigma);
    }
    for (auto& st : starts) {
      const double v0 = f(st);
      const double v = lattice_descent(f, st, v0, res.resolution);
      if (v < best) {
        best = v;
        best_sigma = st;
      }
    }
  }

  res.value = best;
  res.argmin = best_sigma;
  res.argmin_description = "sigma[block][m1*|M2|+m2] = " + format_table(best_sigma, blocks, k);
  return res;
}

}  // namespace persuasion
