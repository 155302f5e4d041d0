#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "persuasion/game.hpp"

namespace persuasion {

/// Slack on information constraints: weak checks allow I <= r + margin, strict
/// checks require I < r - margin.
inline constexpr double kRateMargin = 1e-9;

struct SolverConfig {
  std::uint64_t seed = 1;
  int restarts = 64;
  double grid_step = 0.05;
  double boundary_eps = 1e-4;
  double tie_tol = kDefaultTieTol;
  int max_iters = 2000;
  TieBreak mode = TieBreak::Pessimistic;
  // Auxiliary cardinalities for the general case; 0 means |V1| and |V2|. Only
  // raising them above the defaults is allowed.
  std::size_t w1_size = 0;
  std::size_t w2_size = 0;
  // Above this many lattice points the seeding stage samples instead of enumerating.
  std::size_t max_lattice_points = 4'000'000;
  // Lattice points drawn when sampling.
  std::size_t sampled_points = 200'000;

  /// Throws InvalidConfig on out-of-range fields.
  void validate() const;
};

struct SolverResult {
  double value = 0.0;
  Strategy strategy;
  double i_uw2 = 0.0;
  double i_uw1w2 = 0.0;
  bool feasible = false;
  int restarts = 0;
  bool converged = false;
  double epsilon_report = 0.0;
};

/// Membership in the information constraint set for rates r. With `strict`,
/// both inequalities must hold with margin kRateMargin.
bool feasible(const Strategy& s, const GameInstance& g, const RatePair& r, bool strict = false);

/// Optimal single-letter encoder distortion at rates r. Rates with a zero
/// component dispatch to the matching special case.
SolverResult solve(const GameInstance& g, const RatePair& r, const SolverConfig& cfg = {});

/// Both message sets are singletons: the worst pair at the prior.
SolverResult solve_zero_rates(const GameInstance& g, const SolverConfig& cfg = {});

/// Only D1 is informed; D2 acts on the prior. |W1| = min(|U| + 1, |V1|).
SolverResult solve_r2_zero(const GameInstance& g, double r1, const SolverConfig& cfg = {});

/// Both decoders share one message: a splitting of the prior over W2 with
/// |W2| = min(|U| + 1, |V1|, |V2|) and I(U;W2) <= r2.
SolverResult solve_r1_zero(const GameInstance& g, double r2, const SolverConfig& cfg = {});

/// One result per rate pair. Seeding is shared across rate pairs of the same
/// kind, and a strategy found for r is offered to every r' >= r, since it is
/// feasible there too.
std::vector<SolverResult> rate_sweep(const GameInstance& g, const std::vector<RatePair>& grid,
                                     const SolverConfig& cfg = {});

/// Re-expresses s over a larger auxiliary alphabet (cells keep their (w1, w2) labels).
Strategy embed_strategy(const Strategy& s, PairAlphabet target);

}  // namespace persuasion
