#include "persuasion/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <tomlplusplus/toml.hpp>

#include "persuasion/errors.hpp"

namespace persuasion {

namespace {

[[noreturn]] void fail(const std::string& source, const toml::source_region& where, const std::string& field,
                       const std::string& why) {
  throw ParseError(source + ":" + std::to_string(where.begin.line) + ":" + std::to_string(where.begin.column) + ": " +
                   field + ": " + why);
}

class Reader {
 public:
  Reader(const toml::table& tbl, std::string source, std::string prefix)
      : tbl_(tbl), source_(std::move(source)), prefix_(std::move(prefix)) {}

  const toml::node* find(const std::string& key, bool required) const {
    const toml::node* n = tbl_.get(key);
    if (!n && required) fail(source_, tbl_.source(), name(key), "missing required field");
    return n;
  }

  double number(const std::string& key, const toml::node& n) const {
    if (const auto* i = n.as_integer()) return static_cast<double>(i->get());
    if (const auto* f = n.as_floating_point()) return f->get();
    fail(source_, n.source(), name(key), "expected a number");
  }

  std::int64_t integer(const std::string& key, const toml::node& n) const {
    if (const auto* i = n.as_integer()) return i->get();
    fail(source_, n.source(), name(key), "expected an integer");
  }

  template <class T>
  void opt_number(const std::string& key, T& out) const {
    if (const auto* n = find(key, false)) out = static_cast<T>(number(key, *n));
  }

  template <class T>
  void opt_integer(const std::string& key, T& out, std::int64_t lo) const {
    if (const auto* n = find(key, false)) {
      const auto v = integer(key, *n);
      if (v < lo) fail(source_, n->source(), name(key), "must be at least " + std::to_string(lo));
      out = static_cast<T>(v);
    }
  }

  void opt_bool(const std::string& key, bool& out) const {
    if (const auto* n = find(key, false)) {
      const auto* b = n->as_boolean();
      if (!b) fail(source_, n->source(), name(key), "expected true or false");
      out = b->get();
    }
  }

  // Flattens a nested array of the given shape, row-major.
  std::vector<double> tensor(const std::string& key, const std::vector<std::size_t>& shape) const {
    const toml::node* n = find(key, true);
    std::vector<double> out;
    walk(key, *n, shape, 0, out);
    return out;
  }

  [[noreturn]] void error_at(const std::string& key, const toml::node& n, const std::string& why) const {
    fail(source_, n.source(), name(key), why);
  }

  std::string name(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

 private:
  void walk(const std::string& key, const toml::node& n, const std::vector<std::size_t>& shape, std::size_t depth,
            std::vector<double>& out) const {
    if (depth == shape.size()) {
      const double v = number(key, n);
      if (!std::isfinite(v)) fail(source_, n.source(), name(key), "entries must be finite");
      out.push_back(v);
      return;
    }
    const auto* arr = n.as_array();
    if (!arr) fail(source_, n.source(), name(key), "expected an array at nesting depth " + std::to_string(depth + 1));
    if (arr->size() != shape[depth])
      fail(source_, n.source(), name(key),
           "expected " + std::to_string(shape[depth]) + " entries at nesting depth " + std::to_string(depth + 1) +
               ", found " + std::to_string(arr->size()));
    for (const auto& child : *arr) walk(key, child, shape, depth + 1, out);
  }

  const toml::table& tbl_;
  std::string source_;
  std::string prefix_;
};

std::string join_row(std::span<const double> xs) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += format_double(xs[i]);
  }
  return out + "]";
}

nlohmann::ordered_json num(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text.empty()) throw ParseError("empty number");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || errno == ERANGE) throw ParseError("not a number: '" + text + "'");
  return v;
}

InstanceFile parse_instance(const std::string& text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    fail(source, e.source(), "syntax", std::string(e.description()));
  }
  const Reader rd(root, source, "");
  auto size_of = [&](const char* key) {
    const toml::node* n = rd.find(key, true);
    const auto v = rd.integer(key, *n);
    if (v < 1 || v > 255) rd.error_at(key, *n, "must lie in [1, 255]");
    return static_cast<std::size_t>(v);
  };
  const std::size_t nu = size_of("u_size");
  const std::size_t nv1 = size_of("v1_size");
  const std::size_t nv2 = size_of("v2_size");
  const auto prior_v = rd.tensor("prior", {nu});
  Distribution prior;
  try {
    prior = Distribution(prior_v);
  } catch (const InvalidArgument& e) {
    rd.error_at("prior", *rd.find("prior", true), e.what());
  }
  auto d_e = rd.tensor("d_e", {nu, nv1, nv2});
  auto d_1 = rd.tensor("d_1", {nu, nv1});
  auto d_2 = rd.tensor("d_2", {nu, nv2});
  InstanceFile out{GameInstance(std::move(prior), nv1, nv2, std::move(d_e), std::move(d_1), std::move(d_2)), {}, {}};

  if (const toml::node* n = root.get("solver")) {
    const auto* t = n->as_table();
    if (!t) rd.error_at("solver", *n, "expected a table");
    const Reader s(*t, source, "solver");
    auto& c = out.solver;
    s.opt_integer("seed", c.seed, 0);
    s.opt_integer("restarts", c.restarts, 1);
    s.opt_number("grid_step", c.grid_step);
    s.opt_number("boundary_eps", c.boundary_eps);
    s.opt_number("tie_tol", c.tie_tol);
    s.opt_integer("max_iters", c.max_iters, 1);
    bool optimistic = false;
    s.opt_bool("optimistic", optimistic);
    c.mode = optimistic ? TieBreak::Optimistic : TieBreak::Pessimistic;
    try {
      c.validate();
    } catch (const InvalidConfig& e) {
      s.error_at("solver", *n, e.what());
    }
  }
  if (const toml::node* n = root.get("simulation")) {
    const auto* t = n->as_table();
    if (!t) rd.error_at("simulation", *n, "expected a table");
    const Reader s(*t, source, "simulation");
    auto& c = out.sim;
    s.opt_integer("n", c.n, 1);
    s.opt_number("delta", c.delta);
    s.opt_number("eta", c.eta);
    s.opt_number("alpha", c.alpha);
    s.opt_number("gamma", c.gamma);
    s.opt_integer("trials", c.trials, 1);
    s.opt_integer("seed", c.seed, 0);
    s.opt_integer("exact_posterior_max_n", c.exact_posterior_max_n, 1);
    s.opt_bool("fixed_codebook", c.fixed_codebook);
    try {
      c.validate();
    } catch (const InvalidConfig& e) {
      s.error_at("simulation", *n, e.what());
    }
  }
  return out;
}

InstanceFile load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_instance(ss.str(), path);
}

std::string serialize_instance(const InstanceFile& inst) {
  const auto& g = inst.game;
  std::ostringstream out;
  out << "u_size = " << g.u_size() << "\n";
  out << "v1_size = " << g.v1_size() << "\n";
  out << "v2_size = " << g.v2_size() << "\n";
  out << "prior = " << join_row(g.prior().probs()) << "\n";
  out << "d_e = [";
  for (std::size_t u = 0; u < g.u_size(); ++u) {
    out << (u ? ", [" : "[");
    for (std::size_t v1 = 0; v1 < g.v1_size(); ++v1) {
      if (v1) out << ", ";
      out << join_row(g.d_e_table().subspan((u * g.v1_size() + v1) * g.v2_size(), g.v2_size()));
    }
    out << "]";
  }
  out << "]\n";
  out << "d_1 = [";
  for (std::size_t u = 0; u < g.u_size(); ++u)
    out << (u ? ", " : "") << join_row(g.d_1_table().subspan(u * g.v1_size(), g.v1_size()));
  out << "]\n";
  out << "d_2 = [";
  for (std::size_t u = 0; u < g.u_size(); ++u)
    out << (u ? ", " : "") << join_row(g.d_2_table().subspan(u * g.v2_size(), g.v2_size()));
  out << "]\n";

  const auto& c = inst.solver;
  out << "\n[solver]\n";
  out << "seed = " << c.seed << "\n";
  out << "restarts = " << c.restarts << "\n";
  out << "grid_step = " << format_double(c.grid_step) << "\n";
  out << "boundary_eps = " << format_double(c.boundary_eps) << "\n";
  out << "tie_tol = " << format_double(c.tie_tol) << "\n";
  out << "max_iters = " << c.max_iters << "\n";
  out << "optimistic = " << (c.mode == TieBreak::Optimistic ? "true" : "false") << "\n";

  const auto& s = inst.sim;
  out << "\n[simulation]\n";
  out << "n = " << s.n << "\n";
  out << "delta = " << format_double(s.delta) << "\n";
  out << "eta = " << format_double(s.eta) << "\n";
  out << "alpha = " << format_double(s.alpha) << "\n";
  out << "gamma = " << format_double(s.gamma) << "\n";
  out << "trials = " << s.trials << "\n";
  out << "seed = " << s.seed << "\n";
  out << "exact_posterior_max_n = " << s.exact_posterior_max_n << "\n";
  out << "fixed_codebook = " << (s.fixed_codebook ? "true" : "false") << "\n";
  return out.str();
}

nlohmann::ordered_json strategy_to_json(const Strategy& s) {
  nlohmann::ordered_json j;
  j["u_size"] = s.u_size();
  j["w1_size"] = s.w1_size();
  j["w2_size"] = s.w2_size();
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : s.q().rows()) rows.push_back(r.values());
  j["q"] = std::move(rows);
  return j;
}

Strategy strategy_from_json(const nlohmann::json& j) {
  try {
    if (j.contains("strategy")) return strategy_from_json(j.at("strategy"));
    const auto nu = j.at("u_size").get<std::size_t>();
    const PairAlphabet a{j.at("w1_size").get<std::size_t>(), j.at("w2_size").get<std::size_t>()};
    const auto& rows = j.at("q");
    if (!rows.is_array() || rows.size() != nu) throw ParseError("strategy: q must have u_size rows");
    // rows are taken as given, not renormalized
    std::vector<Distribution> q;
    for (const auto& r : rows) {
      if (!r.is_array() || r.size() != a.cells()) throw ParseError("strategy: each row of q needs w1_size * w2_size entries");
      q.emplace_back(r.get<std::vector<double>>());
    }
    return Strategy(a, Channel(std::move(q)));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("strategy: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("strategy: ") + e.what());
  }
}

nlohmann::ordered_json solve_to_json(const RatePair& r, const SolverResult& res, const SolverConfig& cfg) {
  nlohmann::ordered_json j;
  j["r1"] = r.r1;
  j["r2"] = r.r2;
  j["value"] = num(res.value);
  j["epsilon_report"] = res.epsilon_report;
  j["feasible"] = res.feasible;
  j["converged"] = res.converged;
  j["restarts"] = res.restarts;
  j["i_uw2"] = res.i_uw2;
  j["i_uw1w2"] = res.i_uw1w2;
  j["strategy"] = strategy_to_json(res.strategy);
  nlohmann::ordered_json c;
  c["seed"] = cfg.seed;
  c["restarts"] = cfg.restarts;
  c["grid_step"] = cfg.grid_step;
  c["boundary_eps"] = cfg.boundary_eps;
  c["tie_tol"] = cfg.tie_tol;
  c["max_iters"] = cfg.max_iters;
  c["optimistic"] = cfg.mode == TieBreak::Optimistic;
  j["config"] = std::move(c);
  return j;
}

nlohmann::ordered_json oracle_to_json(const RatePair& r, const OracleResult& res, int n) {
  nlohmann::ordered_json j;
  j["r1"] = r.r1;
  j["r2"] = r.r2;
  if (n > 0) j["n"] = n;
  j["value"] = num(res.value);
  j["resolution"] = res.resolution;
  j["slack"] = res.slack;
  j["exhaustive"] = res.exhaustive;
  j["argmin"] = res.argmin_description;
  return j;
}

nlohmann::ordered_json report_to_json(const MonteCarloReport& rep, const SimConfig& cfg, const GapBound* gap) {
  auto ms = [](const MeanSe& m) {
    nlohmann::ordered_json o;
    o["mean"] = num(m.mean);
    o["se"] = num(m.se);
    return o;
  };
  nlohmann::ordered_json j;
  j["n"] = rep.n;
  j["trials"] = rep.trials;
  j["seed"] = cfg.seed;
  j["delta"] = cfg.delta;
  j["eta"] = cfg.eta;
  j["alpha"] = cfg.alpha;
  j["gamma"] = cfg.gamma;
  j["rate1"] = rep.rate1;
  j["rate2"] = rep.rate2;
  j["m1_count"] = rep.m1_count;
  j["m2_count"] = rep.m2_count;
  j["error_rate"] = rep.error_rate;
  j["f1_rate"] = rep.f1_rate;
  j["f2_rate"] = rep.f2_rate;
  j["d_e_emp"] = ms(rep.d_e_emp);
  j["d_1_emp"] = ms(rep.d_1_emp);
  j["d_2_emp"] = ms(rep.d_2_emp);
  j["d_e_cond"] = ms(rep.d_e_cond);
  j["no_error_trials"] = rep.no_error_trials;
  j["kl_d1_no_error"] = ms(rep.kl_d1_no_error);
  j["kl_d2_no_error"] = ms(rep.kl_d2_no_error);
  j["kl_bound"] = rep.kl_bound;
  j["fraction_in_b"] = rep.fraction_in_b;
  j["expected_distortion"] = rep.expected_distortion;
  if (gap) {
    nlohmann::ordered_json o;
    o["gap"] = gap->gap;
    o["bound"] = gap->bound;
    o["slack"] = gap->slack;
    o["holds"] = gap->gap <= gap->bound + gap->slack;
    j["distortion_gap"] = std::move(o);
  } else {
    j["distortion_gap"] = nullptr;
  }
  return j;
}

std::string sweep_csv(const std::vector<RatePair>& grid, const std::vector<SolverResult>& results) {
  std::string out = "r1,r2,dstar,i_uw2,i_uw1w2,feasible,restarts,epsilon_report\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& r = results[i];
    out += format_double(grid[i].r1) + "," + format_double(grid[i].r2) + "," + format_double(r.value) + "," +
           format_double(r.i_uw2) + "," + format_double(r.i_uw1w2) + "," + (r.feasible ? "1" : "0") + "," +
           std::to_string(r.restarts) + "," + format_double(r.epsilon_report) + "\n";
  }
  return out;
}

std::string simulate_csv(const std::vector<TrialRecord>& records) {
  std::string out = "trial,n,m1,m2,encoder_error,d_e_emp,d_1_emp,d_2_emp,kl_avg_d1,kl_avg_d2,typical_fraction\n";
  for (const auto& r : records) {
    out += std::to_string(r.trial) + "," + std::to_string(r.n) + "," + std::to_string(r.m1) + "," +
           std::to_string(r.m2) + "," + (r.encoder_error ? "1" : "0") + "," + format_double(r.d_e_emp) + "," +
           format_double(r.d_1_emp) + "," + format_double(r.d_2_emp) + "," + format_double(r.kl_avg_d1) + "," +
           format_double(r.kl_avg_d2) + "," + format_double(r.typical_fraction) + "\n";
  }
  return out;
}

std::vector<double> parse_axis(const std::string& spec) {
  std::vector<std::string> parts;
  auto split = [&](char sep) {
    parts.clear();
    std::string cur;
    for (char ch : spec) {
      if (ch == sep) {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    parts.push_back(cur);
  };
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    split(':');
    if (parts.size() != 3) throw ParseError("rate axis '" + spec + "': expected start:step:stop");
    const double a = parse_double(parts[0]), step = parse_double(parts[1]), b = parse_double(parts[2]);
    if (!(step > 0.0) || !(a <= b) || !(a >= 0.0)) throw ParseError("rate axis '" + spec + "': need 0 <= start <= stop, step > 0");
    const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9));
    if (count > 100000) throw ParseError("rate axis '" + spec + "': too many points");
    // Rounded to 12 decimals so that 3 * 0.1 comes out as 0.3.
    for (long i = 0; i <= count; ++i) out.push_back(std::round((a + static_cast<double>(i) * step) * 1e12) / 1e12);
    return out;
  }
  split(',');
  for (const auto& p : parts) {
    const double v = parse_double(p);
    if (!(v >= 0.0) || !std::isfinite(v)) throw ParseError("rate axis '" + spec + "': rates must be finite and nonnegative");
    out.push_back(v);
  }
  return out;
}

}  // namespace persuasion
