#pragma once

#include <string>
#include <vector>

#include "persuasion/game.hpp"

namespace persuasion {

struct OracleResult {
  double value = 0.0;
  std::string argmin_description;
  double resolution = 0.0;
  // Lattice slack on the value: resolution * d_norm.
  double slack = 0.0;
  // False when the encoding space was searched rather than exhausted.
  bool exhaustive = true;
  // Row-major table of the minimizing channel (source symbols or blocks x cells).
  std::vector<double> argmin;
};

struct GridOracleOptions {
  double tie_tol = kDefaultTieTol;
  TieBreak mode = TieBreak::Pessimistic;
};

/// Exhaustive minimum of the expected encoder distortion over the channel
/// lattice of the given resolution, with |W1| = |V1| and |W2| = |V2|. A zero
/// rate collapses its auxiliary to one symbol: at r1 = 0 both decoders see the
/// same message. Requires |U|, |V1|, |V2| <= 3.
OracleResult grid_oracle_dstar(const GameInstance& g, const RatePair& r, double resolution,
                               const GridOracleOptions& opt = {});

/// The same minimum for several rate pairs from a single lattice pass.
std::vector<OracleResult> grid_oracle_dstar(const GameInstance& g, const std::vector<RatePair>& rates,
                                            double resolution, const GridOracleOptions& opt = {});

struct BruteForceOptions {
  double tie_tol = kDefaultTieTol;
  TieBreak mode = TieBreak::Pessimistic;
  // Exhaust the encoding lattice only up to this many points.
  double max_exhaustive_points = 2e6;
};

/// Finite-n game value for n in {1, 2}: encodings sigma: U^n -> M1 x M2 with
/// |Mi| = 2^floor(n Ri), rows on a lattice of step enc_grid, decoders
/// best-responding per position to exact posteriors. Returns the per-symbol
/// value. When the lattice is too large to exhaust, the search covers product
/// encodings of the n = 1 optimum, every deterministic encoding, and lattice
/// descent from the best of those; `exhaustive` is then false.
OracleResult brute_force_game_value(const GameInstance& g, const RatePair& r, int n, double enc_grid,
                                    const BruteForceOptions& opt = {});

}  // namespace persuasion
