// persuade: command-line front end for the solver, the oracles and the block simulator.
//
// Exit codes:
//   0  success
//   1  usage error
//   2  unreadable or malformed input (instance, strategy)
//   3  configuration out of range
//   4  block too long for exact posteriors
//   5  oracle instance too large
//   6  codebook too large

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "persuasion/block_sim.hpp"
#include "persuasion/errors.hpp"
#include "persuasion/io.hpp"
#include "persuasion/oracle.hpp"
#include "persuasion/solver.hpp"

using namespace persuasion;

namespace {

enum Exit { kOk = 0, kUsage = 1, kInput = 2, kConfig = 3, kBlockTooLong = 4, kTooLarge = 5, kCodebook = 6 };

struct SolverFlags {
  std::optional<std::uint64_t> seed;
  std::optional<int> restarts;
  std::optional<double> grid_step;
  std::optional<double> tie_tol;
  std::optional<double> boundary_eps;
  std::optional<int> max_iters;
  bool optimistic = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Solver seed");
    cmd->add_option("--restarts", restarts, "Local searches per rate pair");
    cmd->add_option("--grid-step", grid_step, "Seeding lattice step");
    cmd->add_option("--tie-tol", tie_tol, "Best-response tie tolerance");
    cmd->add_option("--boundary-eps", boundary_eps, "Final pattern-search step");
    cmd->add_option("--max-iters", max_iters, "Nelder-Mead iterations per restart");
    cmd->add_flag("--optimistic", optimistic, "Resolve decoder ties in the encoder's favour");
  }

  SolverConfig apply(SolverConfig c) const {
    if (seed) c.seed = *seed;
    if (restarts) c.restarts = *restarts;
    if (grid_step) c.grid_step = *grid_step;
    if (tie_tol) c.tie_tol = *tie_tol;
    if (boundary_eps) c.boundary_eps = *boundary_eps;
    if (max_iters) c.max_iters = *max_iters;
    if (optimistic) c.mode = TieBreak::Optimistic;
    c.validate();
    return c;
  }
};

struct SimFlags {
  std::optional<std::uint64_t> seed;
  std::optional<int> n, trials;
  std::optional<double> delta, eta, alpha, gamma, tie_tol;
  bool fixed_codebook = false;
  bool optimistic = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Master seed");
    cmd->add_option("--n", n, "Block length");
    cmd->add_option("--trials", trials, "Monte Carlo trials");
    cmd->add_option("--delta", delta, "Typicality tolerance (L1)");
    cmd->add_option("--eta", eta, "Rate margin above the mutual informations");
    cmd->add_option("--alpha", alpha, "Belief tolerance for the typical-position set");
    cmd->add_option("--gamma", gamma, "Allowed fraction of atypical positions");
    cmd->add_option("--tie-tol", tie_tol, "Best-response tie tolerance");
    cmd->add_flag("--fixed-codebook", fixed_codebook, "Reuse one codebook for all trials");
    cmd->add_flag("--optimistic", optimistic, "Resolve decoder ties in the encoder's favour");
  }

  SimConfig apply(SimConfig c) const {
    if (seed) c.seed = *seed;
    if (n) c.n = *n;
    if (trials) c.trials = *trials;
    if (delta) c.delta = *delta;
    if (eta) c.eta = *eta;
    if (alpha) c.alpha = *alpha;
    if (gamma) c.gamma = *gamma;
    if (tie_tol) c.tie_tol = *tie_tol;
    if (fixed_codebook) c.fixed_codebook = true;
    if (optimistic) c.mode = TieBreak::Optimistic;
    c.validate();
    return c;
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path + ": cannot write file");
  out << text;
  if (!out) throw ParseError(path + ": write failed");
}

std::string dump(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

Strategy parse_strategy(const std::string& text, const std::string& source) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source + ": " + e.what());
  }
  try {
    return strategy_from_json(j);
  } catch (const Error& e) {
    throw ParseError(source + ": " + e.what());
  }
}

template <class F>
int guarded(F&& body) {
  try {
    body();
    return kOk;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const InvalidConfig& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const BlockTooLongForExact& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBlockTooLong;
  } catch (const InstanceTooLarge& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kTooLarge;
  } catch (const CodebookTooLarge& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCodebook;
  } catch (const InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Information design with two decoders: solver, oracles and block simulator"};
  app.require_subcommand(1);

  std::string instance, out;
  double r1 = 0.0, r2 = 0.0;

  auto* solve_cmd = app.add_subcommand("solve", "Optimal single-letter encoder distortion at one rate pair");
  SolverFlags solve_flags;
  solve_cmd->add_option("instance", instance, "Instance file (TOML)")->required();
  solve_cmd->add_option("--r1", r1, "Refinement rate")->required();
  solve_cmd->add_option("--r2", r2, "Common rate")->required();
  solve_cmd->add_option("--out", out, "Write JSON here instead of stdout");
  solve_flags.add(solve_cmd);

  auto* sweep_cmd = app.add_subcommand("sweep", "Solver values over a rate grid, as CSV");
  SolverFlags sweep_flags;
  std::string r1_axis, r2_axis;
  sweep_cmd->add_option("instance", instance, "Instance file (TOML)")->required();
  sweep_cmd->add_option("--r1", r1_axis, "Axis: a:step:b or a comma list")->required();
  sweep_cmd->add_option("--r2", r2_axis, "Axis: a:step:b or a comma list")->required();
  sweep_cmd->add_option("--out", out, "Write CSV here instead of stdout");
  sweep_flags.add(sweep_cmd);

  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo run of the block coding scheme");
  SimFlags sim_flags;
  std::string strategy_path, strategy_inline, report_path;
  sim_cmd->add_option("instance", instance, "Instance file (TOML)")->required();
  auto* from_file = sim_cmd->add_option("--strategy", strategy_path, "Strategy JSON file (solve output works)");
  auto* from_text = sim_cmd->add_option("--strategy-json", strategy_inline, "Strategy JSON given inline");
  from_file->excludes(from_text);
  sim_cmd->add_option("--out", out, "Per-trial CSV (stdout when neither --out nor --report is set)");
  sim_cmd->add_option("--report", report_path, "Aggregate JSON report (stdout when --out is set)");
  sim_flags.add(sim_cmd);

  auto* oracle_cmd = app.add_subcommand("oracle", "Grid oracle, or the finite-n game value with --n");
  std::optional<double> resolution;
  std::optional<int> block_n;
  double enc_grid = 0.1;
  double oracle_tie = kDefaultTieTol;
  bool oracle_optimistic = false;
  oracle_cmd->add_option("instance", instance, "Instance file (TOML)")->required();
  oracle_cmd->add_option("--r1", r1, "Refinement rate")->required();
  oracle_cmd->add_option("--r2", r2, "Common rate")->required();
  auto* res_opt = oracle_cmd->add_option("--resolution", resolution, "Channel lattice step");
  auto* n_opt = oracle_cmd->add_option("--n", block_n, "Block length (1 or 2) for the finite-n value");
  res_opt->excludes(n_opt);
  oracle_cmd->add_option("--enc-grid", enc_grid, "Encoding lattice step for --n")->capture_default_str();
  oracle_cmd->add_option("--tie-tol", oracle_tie, "Best-response tie tolerance");
  oracle_cmd->add_flag("--optimistic", oracle_optimistic, "Resolve decoder ties in the encoder's favour");
  oracle_cmd->add_option("--out", out, "Write JSON here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (*solve_cmd) {
    return guarded([&] {
      const auto inst = load_instance(instance);
      const auto cfg = solve_flags.apply(inst.solver);
      const RatePair r(r1, r2);
      const auto res = solve(inst.game, r, cfg);
      write_output(out, dump(solve_to_json(r, res, cfg)));
    });
  }
  if (*sweep_cmd) {
    return guarded([&] {
      const auto inst = load_instance(instance);
      const auto cfg = sweep_flags.apply(inst.solver);
      std::vector<double> a1, a2;
      try {
        a1 = parse_axis(r1_axis);
        a2 = parse_axis(r2_axis);
      } catch (const ParseError& e) {
        throw InvalidConfig(std::string("rate axis: ") + e.what());
      }
      std::vector<RatePair> grid;
      for (double x : a1) {
        for (double y : a2) grid.emplace_back(x, y);
      }
      write_output(out, sweep_csv(grid, rate_sweep(inst.game, grid, cfg)));
    });
  }
  if (*sim_cmd) {
    return guarded([&] {
      const auto inst = load_instance(instance);
      const auto cfg = sim_flags.apply(inst.sim);
      Strategy s;
      if (!strategy_path.empty()) {
        s = parse_strategy(read_file(strategy_path), strategy_path);
      } else if (!strategy_inline.empty()) {
        s = parse_strategy(strategy_inline, "--strategy-json");
      } else {
        throw InvalidConfig("simulate needs --strategy or --strategy-json");
      }
      if (s.u_size() != inst.game.u_size()) throw InvalidConfig("strategy does not match the instance's source alphabet");
      const auto rep = run_monte_carlo(inst.game, s, cfg);
      std::optional<GapBound> gap;
      if (has_singleton_worst_pairs(inst.game, s, cfg.tie_tol))
        gap = distortion_gap_bound(rep, s, inst.game, cfg.alpha, cfg.gamma, cfg.delta, cfg.tie_tol);
      const std::string report = dump(report_to_json(rep, cfg, gap ? &*gap : nullptr));
      if (out.empty() && report_path.empty()) {
        write_output("", simulate_csv(rep.records));
        return;
      }
      if (!out.empty()) write_output(out, simulate_csv(rep.records));
      write_output(report_path, report);
    });
  }
  if (*oracle_cmd) {
    return guarded([&] {
      const auto inst = load_instance(instance);
      const RatePair r(r1, r2);
      OracleResult res;
      if (block_n) {
        BruteForceOptions opt;
        opt.tie_tol = oracle_tie;
        opt.mode = oracle_optimistic ? TieBreak::Optimistic : TieBreak::Pessimistic;
        res = brute_force_game_value(inst.game, r, *block_n, enc_grid, opt);
      } else {
        GridOracleOptions opt;
        opt.tie_tol = oracle_tie;
        opt.mode = oracle_optimistic ? TieBreak::Optimistic : TieBreak::Pessimistic;
        res = grid_oracle_dstar(inst.game, r, resolution.value_or(0.05), opt);
      }
      write_output(out, dump(oracle_to_json(r, res, block_n.value_or(0))));
    });
  }
  return kUsage;
}
