#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "persuasion/block_sim.hpp"
#include "persuasion/game.hpp"
#include "persuasion/oracle.hpp"
#include "persuasion/solver.hpp"

namespace persuasion {

/// A game instance plus the solver and simulator settings stored next to it.
struct InstanceFile {
  GameInstance game;
  SolverConfig solver;
  SimConfig sim;
};

/// Parses the TOML instance format:
///
///   u_size = 2
///   v1_size = 2
///   v2_size = 2
///   prior = [0.7, 0.3]
///   d_e = [[[1, 0], [1, 0]], [[1, 0], [1, 0]]]   # [u][v1][v2]
///   d_1 = [[0, 0], [0, 0]]                       # [u][v1]
///   d_2 = [[0, 1], [1, 0]]                       # [u][v2]
///
///   [solver]       # optional: seed, restarts, grid_step, boundary_eps, tie_tol, max_iters, optimistic
///   [simulation]   # optional: n, delta, eta, alpha, gamma, trials, seed, exact_posterior_max_n, fixed_codebook
///
/// Throws ParseError carrying "source:line:column: field: reason".
InstanceFile parse_instance(const std::string& text, const std::string& source = "<instance>");
InstanceFile load_instance(const std::string& path);

/// TOML text that parses back to an identical InstanceFile.
std::string serialize_instance(const InstanceFile& inst);

/// Round-trip decimal form: %.17g, with "inf", "-inf" and "nan" spelled out.
std::string format_double(double x);
/// Inverse of format_double; throws ParseError on anything else.
double parse_double(const std::string& text);

nlohmann::ordered_json strategy_to_json(const Strategy& s);
/// Accepts the object written by strategy_to_json, or a solve result holding one under "strategy".
Strategy strategy_from_json(const nlohmann::json& j);

nlohmann::ordered_json solve_to_json(const RatePair& r, const SolverResult& res, const SolverConfig& cfg);
nlohmann::ordered_json oracle_to_json(const RatePair& r, const OracleResult& res, int n);
nlohmann::ordered_json report_to_json(const MonteCarloReport& rep, const SimConfig& cfg, const GapBound* gap);

std::string sweep_csv(const std::vector<RatePair>& grid, const std::vector<SolverResult>& results);
std::string simulate_csv(const std::vector<TrialRecord>& records);

/// "a:step:b" (inclusive, a <= b), or a single value, or a comma list.
std::vector<double> parse_axis(const std::string& spec);

}  // namespace persuasion
