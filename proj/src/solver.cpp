#include "persuasion/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>

#include "persuasion/errors.hpp"
#include "persuasion/lattice.hpp"

namespace persuasion {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Pattern-search moves must beat the incumbent by more than this.
constexpr double kImproveTol = 1e-13;

enum class Kind { Zero, R1Zero, R2Zero, General };

Kind kind_of(const RatePair& r) {
  if (r.r1 == 0.0 && r.r2 == 0.0) return Kind::Zero;
  if (r.r1 == 0.0) return Kind::R1Zero;
  if (r.r2 == 0.0) return Kind::R2Zero;
  return Kind::General;
}

struct Limits {
  double w2_max;
  double total_max;

  bool admits(const StrategyEvaluator::Result& res) const {
    return res.i_uw2 <= w2_max + kRateMargin && res.i_uw1w2 <= total_max + kRateMargin;
  }
};

Limits limits_for(Kind kind, const RatePair& r) {
  switch (kind) {
    case Kind::R1Zero: return {r.r2, r.r2};
    case Kind::R2Zero: return {0.0, r.r1};
    default: return {r.r2, r.r1 + r.r2};
  }
}

PairAlphabet alphabet_for(Kind kind, const GameInstance& g, const SolverConfig& cfg) {
  const std::size_t nu = g.u_size();
  switch (kind) {
    case Kind::Zero: return {1, 1};
    case Kind::R1Zero: return {1, std::min({nu + 1, g.v1_size(), g.v2_size()})};
    case Kind::R2Zero: return {std::min(nu + 1, g.v1_size()), 1};
    case Kind::General: break;
  }
  if (cfg.w1_size != 0 && cfg.w1_size < g.v1_size())
    throw InvalidConfig("w1_size may only raise |W1| above |V1|");
  if (cfg.w2_size != 0 && cfg.w2_size < g.v2_size())
    throw InvalidConfig("w2_size may only raise |W2| above |V2|");
  return {std::max(cfg.w1_size, g.v1_size()), std::max(cfg.w2_size, g.v2_size())};
}

struct Candidate {
  double value = kInf;
  std::vector<double> table;
};

// The `cap` lowest-value candidates; earlier insertions win ties.
class BestSet {
 public:
  explicit BestSet(std::size_t cap) : cap_(cap) {}

  double threshold() const { return items_.size() < cap_ ? kInf : items_.back().value; }

  void offer(double value, std::span<const double> table) {
    if (!(value < threshold())) return;
    auto pos = std::upper_bound(items_.begin(), items_.end(), value,
                                [](double v, const Candidate& c) { return v < c.value; });
    items_.insert(pos, Candidate{value, std::vector<double>(table.begin(), table.end())});
    if (items_.size() > cap_) items_.pop_back();
  }

  const std::vector<Candidate>& items() const { return items_; }

 private:
  std::size_t cap_;
  std::vector<Candidate> items_;
};

// Uniform random lattice composition of m into k parts (stars and bars).
void random_composition(std::mt19937_64& rng, int m, std::size_t k, std::vector<int>& bars,
                        std::span<double> row) {
  const int slots = m + static_cast<int>(k) - 1;
  bars.resize(static_cast<std::size_t>(slots));
  std::iota(bars.begin(), bars.end(), 0);
  for (std::size_t i = 0; i + 1 < k; ++i) {
    std::uniform_int_distribution<int> pick(static_cast<int>(i), slots - 1);
    std::swap(bars[i], bars[static_cast<std::size_t>(pick(rng))]);
  }
  std::sort(bars.begin(), bars.begin() + static_cast<std::ptrdiff_t>(k - 1));
  int prev = -1;
  for (std::size_t i = 0; i < k; ++i) {
    const int edge = i + 1 < k ? bars[i] : slots;
    row[i] = static_cast<double>(edge - prev - 1) / m;
    prev = edge;
  }
}

// Lattice (or sampled lattice) seeds, one best-set per rate limit.
std::vector<BestSet> seed(const GameInstance& g, PairAlphabet alphabet, const std::vector<Limits>& limits,
                          const SolverConfig& cfg) {
  const std::size_t nu = g.u_size();
  const std::size_t k = alphabet.cells();
  const int m = lattice_denominator(cfg.grid_step);
  StrategyEvaluator eval(g, alphabet, cfg.tie_tol, cfg.mode);
  std::vector<BestSet> best(limits.size(), BestSet(static_cast<std::size_t>(cfg.restarts)));
  std::vector<double> table(nu * k);

  auto consider = [&]() {
    const auto res = eval.evaluate(table);
    for (std::size_t i = 0; i < limits.size(); ++i) {
      if (limits[i].admits(res)) best[i].offer(res.value, table);
    }
  };

  const std::size_t per_row = lattice_size(static_cast<std::size_t>(m), k);
  const long double total = std::pow(static_cast<long double>(per_row), static_cast<long double>(nu));
  if (total <= static_cast<long double>(cfg.max_lattice_points)) {
    const auto comps = all_compositions(m, k);
    std::vector<std::size_t> idx(nu, 0);
    for (;;) {
      for (std::size_t u = 0; u < nu; ++u) {
        for (std::size_t c = 0; c < k; ++c) table[u * k + c] = static_cast<double>(comps[idx[u]][c]) / m;
      }
      consider();
      std::size_t u = 0;
      while (u < nu && ++idx[u] == comps.size()) idx[u++] = 0;
      if (u == nu) break;
    }
    return best;
  }

  // Deterministic maps u -> cell first: they carry the corners of the polytope.
  const long double maps = std::pow(static_cast<long double>(k), static_cast<long double>(nu));
  if (maps <= 100000.0L) {
    std::vector<std::size_t> cell(nu, 0);
    for (;;) {
      std::fill(table.begin(), table.end(), 0.0);
      for (std::size_t u = 0; u < nu; ++u) table[u * k + cell[u]] = 1.0;
      consider();
      std::size_t u = 0;
      while (u < nu && ++cell[u] == k) cell[u++] = 0;
      if (u == nu) break;
    }
  }
  std::mt19937_64 rng(cfg.seed);
  std::vector<int> bars;
  for (std::size_t i = 0; i < cfg.sampled_points; ++i) {
    for (std::size_t u = 0; u < nu; ++u) random_composition(rng, m, k, bars, std::span<double>(table).subspan(u * k, k));
    consider();
  }
  return best;
}

// Rows of |x|, each renormalized; an all-zero row becomes uniform.
void to_table(std::span<const double> x, std::size_t nu, std::size_t k, std::span<double> table) {
  for (std::size_t u = 0; u < nu; ++u) {
    double s = 0.0;
    for (std::size_t c = 0; c < k; ++c) s += std::abs(x[u * k + c]);
    for (std::size_t c = 0; c < k; ++c)
      table[u * k + c] = s > 0.0 ? std::abs(x[u * k + c]) / s : 1.0 / static_cast<double>(k);
  }
}

class Refiner {
 public:
  Refiner(const GameInstance& g, PairAlphabet alphabet, Limits limits, const SolverConfig& cfg)
      : nu_(g.u_size()), k_(alphabet.cells()), limits_(limits), cfg_(cfg), eval_(g, alphabet, cfg.tie_tol, cfg.mode),
        scratch_(nu_ * k_) {}

  double objective(std::span<const double> table) {
    const auto res = eval_.evaluate(table);
    return limits_.admits(res) ? res.value : kInf;
  }

  // Nelder-Mead over unnormalized row weights; returns the best table seen.
  Candidate nelder_mead(const Candidate& start) {
    const std::size_t dim = nu_ * k_;
    std::vector<std::vector<double>> pts(dim + 1, start.table);
    std::vector<double> f(dim + 1);
    for (std::size_t i = 0; i < dim; ++i) pts[i + 1][i] += cfg_.grid_step;
    for (std::size_t i = 0; i <= dim; ++i) f[i] = eval_point(pts[i]);

    std::vector<std::size_t> order(dim + 1);
    std::vector<double> centroid(dim), xr(dim), xe(dim), xc(dim);
    for (int it = 0; it < cfg_.max_iters; ++it) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
      const std::size_t lo = order.front(), hi = order.back(), second = order[dim - 1];
      if (std::isfinite(f[hi]) && f[hi] - f[lo] <= 1e-12) {
        double spread = 0.0;
        for (std::size_t i = 0; i <= dim; ++i) {
          for (std::size_t j = 0; j < dim; ++j) spread = std::max(spread, std::abs(pts[i][j] - pts[lo][j]));
        }
        if (spread < cfg_.boundary_eps) break;
      }
      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t i = 0; i <= dim; ++i) {
        if (i == hi) continue;
        for (std::size_t j = 0; j < dim; ++j) centroid[j] += pts[i][j] / static_cast<double>(dim);
      }
      for (std::size_t j = 0; j < dim; ++j) xr[j] = centroid[j] + (centroid[j] - pts[hi][j]);
      const double fr = eval_point(xr);
      if (fr < f[lo]) {
        for (std::size_t j = 0; j < dim; ++j) xe[j] = centroid[j] + 2.0 * (centroid[j] - pts[hi][j]);
        const double fe = eval_point(xe);
        if (fe < fr) {
          pts[hi] = xe;
          f[hi] = fe;
        } else {
          pts[hi] = xr;
          f[hi] = fr;
        }
        continue;
      }
      if (fr < f[second]) {
        pts[hi] = xr;
        f[hi] = fr;
        continue;
      }
      const bool outside = fr < f[hi];
      for (std::size_t j = 0; j < dim; ++j)
        xc[j] = outside ? centroid[j] + 0.5 * (xr[j] - centroid[j]) : centroid[j] + 0.5 * (pts[hi][j] - centroid[j]);
      const double fc = eval_point(xc);
      if (fc < (outside ? fr : f[hi])) {
        pts[hi] = xc;
        f[hi] = fc;
        continue;
      }
      for (std::size_t i = 0; i <= dim; ++i) {
        if (i == lo) continue;
        for (std::size_t j = 0; j < dim; ++j) pts[i][j] = pts[lo][j] + 0.5 * (pts[i][j] - pts[lo][j]);
        f[i] = eval_point(pts[i]);
      }
    }
    const std::size_t best = static_cast<std::size_t>(std::min_element(f.begin(), f.end()) - f.begin());
    Candidate out;
    out.table.resize(dim);
    to_table(pts[best], nu_, k_, out.table);
    out.value = objective(out.table);
    if (!(out.value <= start.value)) return start;
    return out;
  }

  // Moves mass between cells of one row, halving the step down to boundary_eps.
  // Returns true if the last pass at the finest step found nothing to improve.
  bool pattern_search(Candidate& c) {
    bool settled = true;
    double step = cfg_.grid_step / 2.0;
    bool last = false;
    while (!last) {
      if (step <= cfg_.boundary_eps) {
        step = cfg_.boundary_eps;
        last = true;
      }
      settled = polish_at(c, step);
      step /= 2.0;
    }
    return settled;
  }

 private:
  double eval_point(std::span<const double> x) {
    to_table(x, nu_, k_, scratch_);
    return objective(scratch_);
  }

  bool polish_at(Candidate& c, double step) {
    constexpr int kMaxPasses = 400;
    std::vector<double>& t = c.table;
    for (int pass = 0; pass < kMaxPasses; ++pass) {
      bool improved = false;
      for (std::size_t u = 0; u < nu_; ++u) {
        for (std::size_t from = 0; from < k_; ++from) {
          for (std::size_t to = 0; to < k_; ++to) {
            const double have = t[u * k_ + from];
            if (to == from || !(have > 0.0)) continue;
            const double amount = std::min(step, have);
            const double old_to = t[u * k_ + to];
            t[u * k_ + from] = have - amount;
            t[u * k_ + to] = old_to + amount;
            const double v = objective(t);
            if (v < c.value - kImproveTol) {
              c.value = v;
              improved = true;
            } else {
              t[u * k_ + from] = have;
              t[u * k_ + to] = old_to;
            }
          }
        }
      }
      if (!improved) return true;
    }
    return false;
  }

  std::size_t nu_;
  std::size_t k_;
  Limits limits_;
  const SolverConfig& cfg_;
  StrategyEvaluator eval_;
  std::vector<double> scratch_;
};

SolverResult finish(const GameInstance& g, PairAlphabet alphabet, const Candidate& best, bool converged,
                    const SolverConfig& cfg) {
  SolverResult out;
  out.strategy = Strategy::from_table(g.u_size(), alphabet, best.table);
  StrategyEvaluator eval(g, alphabet, cfg.tie_tol, cfg.mode);
  const auto table = out.strategy.table();
  const auto res = eval.evaluate(table);
  out.value = res.value;
  out.i_uw2 = res.i_uw2;
  out.i_uw1w2 = res.i_uw1w2;
  out.feasible = true;
  out.restarts = cfg.restarts;
  out.converged = converged;
  out.epsilon_report = cfg.boundary_eps * g.d_norm();
  return out;
}

// Seeds once for all rates of one kind, then refines each rate separately.
std::vector<SolverResult> solve_kind(const GameInstance& g, Kind kind, const std::vector<RatePair>& rates,
                                     const SolverConfig& cfg) {
  const PairAlphabet alphabet = alphabet_for(kind, g, cfg);
  std::vector<Limits> limits;
  for (const auto& r : rates) limits.push_back(limits_for(kind, r));
  const auto seeds = seed(g, alphabet, limits, cfg);

  std::vector<SolverResult> out;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    Refiner refiner(g, alphabet, limits[i], cfg);
    Candidate best;
    bool converged = false;
    for (const auto& start : seeds[i].items()) {
      Candidate c = refiner.nelder_mead(start);
      const bool settled = refiner.pattern_search(c);
      if (c.value < best.value) {
        best = std::move(c);
        converged = settled;
      }
    }
    // The uninformative strategy is always feasible, so the seed set is never empty.
    if (best.table.empty()) {
      best.table.assign(g.u_size() * alphabet.cells(), 0.0);
      for (std::size_t u = 0; u < g.u_size(); ++u) best.table[u * alphabet.cells()] = 1.0;
    }
    out.push_back(finish(g, alphabet, best, converged, cfg));
  }
  return out;
}

bool rate_leq(const RatePair& a, const RatePair& b) { return a.r1 <= b.r1 && a.r2 <= b.r2; }

}  // namespace

void SolverConfig::validate() const {
  if (restarts <= 0) throw InvalidConfig("restarts must be positive");
  // instance files store the seed as a signed 64-bit TOML integer
  if (seed > static_cast<std::uint64_t>(INT64_MAX)) throw InvalidConfig("seed must be below 2^63");
  if (!(grid_step > 0.0) || !(grid_step <= 0.5)) throw InvalidConfig("grid_step must lie in (0, 0.5]");
  if (!(boundary_eps > 0.0) || !(boundary_eps < grid_step)) throw InvalidConfig("boundary_eps must lie in (0, grid_step)");
  if (!(tie_tol >= 0.0) || !std::isfinite(tie_tol)) throw InvalidConfig("tie_tol must be finite and nonnegative");
  if (max_iters <= 0) throw InvalidConfig("max_iters must be positive");
  if (max_lattice_points == 0) throw InvalidConfig("max_lattice_points must be positive");
}

bool feasible(const Strategy& s, const GameInstance& g, const RatePair& r, bool strict) {
  if (s.u_size() != g.u_size()) throw InvalidArgument("strategy does not match the source alphabet");
  const double i2 = mutual_information(g.prior(), s.w2_channel());
  const double i12 = mutual_information(g.prior(), s.q());
  if (strict) return i2 < r.r2 - kRateMargin && i12 < r.r1 + r.r2 - kRateMargin;
  return i2 <= r.r2 + kRateMargin && i12 <= r.r1 + r.r2 + kRateMargin;
}

Strategy embed_strategy(const Strategy& s, PairAlphabet target) {
  const auto a = s.alphabet();
  if (target.w1_size < a.w1_size || target.w2_size < a.w2_size)
    throw InvalidArgument("embedding target alphabet is smaller than the source");
  std::vector<double> table(s.u_size() * target.cells(), 0.0);
  for (std::size_t u = 0; u < s.u_size(); ++u) {
    for (std::size_t c = 0; c < a.cells(); ++c)
      table[u * target.cells() + target.cell(a.w1_of(c), a.w2_of(c))] = s.q()(u, c);
  }
  return Strategy::from_table(s.u_size(), target, table);
}

SolverResult solve_zero_rates(const GameInstance& g, const SolverConfig& cfg) {
  cfg.validate();
  SolverResult out;
  out.strategy = Strategy::uninformative(g.u_size(), {1, 1});
  out.value = worst_pair(g.prior(), g.prior(), g, cfg.tie_tol, cfg.mode).value;
  out.feasible = true;
  out.restarts = 0;
  out.converged = true;
  out.epsilon_report = 0.0;
  return out;
}

SolverResult solve_r2_zero(const GameInstance& g, double r1, const SolverConfig& cfg) {
  cfg.validate();
  const RatePair r(r1, 0.0);
  if (r1 == 0.0) return solve_zero_rates(g, cfg);
  return solve_kind(g, Kind::R2Zero, {r}, cfg).front();
}

SolverResult solve_r1_zero(const GameInstance& g, double r2, const SolverConfig& cfg) {
  cfg.validate();
  const RatePair r(0.0, r2);
  if (r2 == 0.0) return solve_zero_rates(g, cfg);
  return solve_kind(g, Kind::R1Zero, {r}, cfg).front();
}

SolverResult solve(const GameInstance& g, const RatePair& r, const SolverConfig& cfg) {
  cfg.validate();
  switch (kind_of(r)) {
    case Kind::Zero: return solve_zero_rates(g, cfg);
    case Kind::R1Zero: return solve_r1_zero(g, r.r2, cfg);
    case Kind::R2Zero: return solve_r2_zero(g, r.r1, cfg);
    case Kind::General: break;
  }
  return solve_kind(g, Kind::General, {r}, cfg).front();
}

std::vector<SolverResult> rate_sweep(const GameInstance& g, const std::vector<RatePair>& grid,
                                     const SolverConfig& cfg) {
  if (grid.empty()) throw InvalidArgument("empty rate grid");
  cfg.validate();
  std::vector<SolverResult> out(grid.size());
  for (Kind kind : {Kind::Zero, Kind::R1Zero, Kind::R2Zero, Kind::General}) {
    std::vector<std::size_t> members;
    std::vector<RatePair> rates;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (kind_of(grid[i]) == kind) {
        members.push_back(i);
        rates.push_back(grid[i]);
      }
    }
    if (members.empty()) continue;
    if (kind == Kind::Zero) {
      const auto z = solve_zero_rates(g, cfg);
      for (std::size_t i : members) out[i] = z;
      continue;
    }
    auto res = solve_kind(g, kind, rates, cfg);
    for (std::size_t j = 0; j < members.size(); ++j) out[members[j]] = std::move(res[j]);
  }

  // A strategy feasible at r stays feasible at every r' >= r.
  std::vector<std::size_t> order(grid.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return grid[a].r1 + grid[a].r2 < grid[b].r1 + grid[b].r2; });
  for (std::size_t a : order) {
    for (std::size_t b : order) {
      if (a == b || !rate_leq(grid[a], grid[b]) || !(out[a].value < out[b].value)) continue;
      const PairAlphabet target = kind_of(grid[b]) == Kind::Zero ? PairAlphabet{1, 1} : alphabet_for(kind_of(grid[b]), g, cfg);
      const PairAlphabet have = out[a].strategy.alphabet();
      if (have.w1_size > target.w1_size || have.w2_size > target.w2_size) continue;
      const Strategy moved = embed_strategy(out[a].strategy, target);
      StrategyEvaluator eval(g, target, cfg.tie_tol, cfg.mode);
      const auto table = moved.table();
      const auto res = eval.evaluate(table);
      if (!limits_for(kind_of(grid[b]), grid[b]).admits(res) || !(res.value < out[b].value)) continue;
      out[b].strategy = moved;
      out[b].value = res.value;
      out[b].i_uw2 = res.i_uw2;
      out[b].i_uw1w2 = res.i_uw1w2;
    }
  }
  return out;
}

}  // namespace persuasion
