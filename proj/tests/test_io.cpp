#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "persuasion/errors.hpp"
#include "persuasion/io.hpp"
#include "support/random_instances.hpp"

using namespace persuasion;

namespace {

const char* kProsecutor = R"(u_size = 2
v1_size = 2
v2_size = 2
prior = [0.7, 0.3]
d_e = [[[1, 0], [1, 0]], [[1, 0], [1, 0]]]
d_1 = [[0, 0], [0, 0]]
d_2 = [[0, 1], [1, 0]]
)";

std::string error_of(const std::string& text) {
  try {
    parse_instance(text, "x.toml");
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

TEST_CASE("instance parsing") {
  const auto f = parse_instance(kProsecutor);
  CHECK(f.game == make_prosecutor(0.3));
  CHECK(f.solver.restarts == SolverConfig{}.restarts);
  CHECK(f.sim.n == SimConfig{}.n);

  const auto g = parse_instance(std::string(kProsecutor) +
                                "[solver]\nseed = 5\noptimistic = true\n[simulation]\nn = 8\ndelta = 0.5\n");
  CHECK(g.solver.seed == 5);
  CHECK(g.solver.mode == TieBreak::Optimistic);
  CHECK(g.sim.n == 8);
  CHECK(g.sim.delta == 0.5);
}

TEST_CASE("parse errors point at the offending field") {
  std::string bad = kProsecutor;
  bad.replace(bad.find("[0.7, 0.3]"), 10, "[0.7, 0.4]");
  const auto e = error_of(bad);
  CHECK(e.rfind("x.toml:4:", 0) == 0);
  CHECK(e.find("prior") != std::string::npos);

  CHECK(error_of("u_size = 2\nv1_size = 2\n").find("v2_size") != std::string::npos);
  CHECK(error_of("u_size = = 2").rfind("x.toml:1:", 0) == 0);
  CHECK(error_of(std::string(kProsecutor) + "[solver]\nrestarts = 0\n").find("restarts") != std::string::npos);
  CHECK(error_of(std::string(kProsecutor) + "[simulation]\nn = 1.5\n").find("integer") != std::string::npos);
  std::string shape = kProsecutor;
  shape.replace(shape.find("d_1 = [[0, 0], [0, 0]]"), 22, "d_1 = [[0, 0], [0]]");
  CHECK(error_of(shape).find("d_1") != std::string::npos);
  CHECK_THROWS_AS(load_instance("/nonexistent/x.toml"), ParseError);
  CHECK(error_of(std::string(kProsecutor) + "[solver]\nseed = -1\n").find("seed") != std::string::npos);
}

TEST_CASE("instance round trip") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 50; ++k) {
    InstanceFile f{testing::random_instance(rng, 2 + rng() % 3, 1 + rng() % 4, 1 + rng() % 4), {}, {}};
    f.solver.seed = rng() >> 1;
    f.solver.grid_step = 0.1;
    f.sim.delta = std::uniform_real_distribution<double>(0.01, 1.0)(rng);
    f.sim.fixed_codebook = k % 2;
    const auto text = serialize_instance(f);
    const auto back = parse_instance(text);
    CHECK(back.game == f.game);
    CHECK(back.solver.seed == f.solver.seed);
    CHECK(back.solver.grid_step == f.solver.grid_step);
    CHECK(back.sim.delta == f.sim.delta);
    CHECK(back.sim.fixed_codebook == f.sim.fixed_codebook);
    CHECK(serialize_instance(back) == text);
  }
}

TEST_CASE("doubles round trip") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int k = 0; k < 1000; ++k) {
    const double x = k % 3 ? u(rng) : std::ldexp(u(rng), -static_cast<int>(rng() % 60));
    CHECK(parse_double(format_double(x)) == x);
  }
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(format_double(inf) == "inf");
  CHECK(parse_double("inf") == inf);
  CHECK(parse_double("-inf") == -inf);
  CHECK(std::isnan(parse_double(format_double(std::nan("")))));
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK_THROWS_AS(parse_double(""), ParseError);
  CHECK_THROWS_AS(parse_double("1.5x"), ParseError);
  CHECK_THROWS_AS(parse_double("1e999"), ParseError);
}

TEST_CASE("strategy json") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 30; ++k) {
    const std::size_t nu = 2 + rng() % 3;
    const PairAlphabet a{1 + rng() % 3, 1 + rng() % 3};
    const auto s = Strategy(a, testing::random_channel(rng, nu, a.cells()));
    const auto j = strategy_to_json(s);
    const auto back = strategy_from_json(nlohmann::json::parse(j.dump()));
    CHECK(back == s);
    nlohmann::json wrapped;
    wrapped["value"] = 1.0;
    wrapped["strategy"] = j;
    CHECK(strategy_from_json(wrapped) == s);
  }
  CHECK_THROWS_AS(strategy_from_json(nlohmann::json::parse(R"({"u_size": 2})")), ParseError);
  CHECK_THROWS_AS(
      strategy_from_json(nlohmann::json::parse(R"({"u_size": 2, "w1_size": 1, "w2_size": 2, "q": [[1, 0]]})")),
      ParseError);
  CHECK_THROWS_AS(strategy_from_json(nlohmann::json::parse(
                      R"({"u_size": 2, "w1_size": 1, "w2_size": 2, "q": [[0.5, 0.6], [1, 0]]})")),
                  ParseError);
}

TEST_CASE("csv output") {
  const std::vector<RatePair> grid{RatePair(0, 0), RatePair(0.1, 1.0 / 3)};
  std::vector<SolverResult> res(2);
  res[0].value = 1.0 / 7;
  res[0].feasible = true;
  res[1].value = std::nextafter(0.25, 1.0);
  res[1].i_uw2 = 0.3;
  res[1].restarts = 16;
  const auto rows = lines(sweep_csv(grid, res));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "r1,r2,dstar,i_uw2,i_uw1w2,feasible,restarts,epsilon_report");
  for (const auto& r : rows) CHECK(fields(r).size() == 8);
  const auto second = fields(rows[2]);
  CHECK(parse_double(second[1]) == 1.0 / 3);
  CHECK(parse_double(second[2]) == res[1].value);
  CHECK(second[5] == "0");
  CHECK(second[6] == "16");
  CHECK(parse_double(fields(rows[1])[2]) == 1.0 / 7);

  std::vector<TrialRecord> recs(3);
  for (int i = 0; i < 3; ++i) {
    recs[i].trial = i;
    recs[i].n = 12;
    recs[i].d_e_emp = 1.0 / (i + 3);
    recs[i].encoder_error = i == 1;
  }
  const auto sim = lines(simulate_csv(recs));
  REQUIRE(sim.size() == 4);
  for (const auto& r : sim) CHECK(fields(r).size() == fields(sim[0]).size());
  CHECK(fields(sim[2])[4] == "1");
  CHECK(parse_double(fields(sim[3])[5]) == 1.0 / 5);
}

TEST_CASE("json numbers outside the reals are spelled out") {
  SolverResult res;
  res.value = std::numeric_limits<double>::infinity();
  res.strategy = Strategy::uninformative(2, {1, 1});
  const auto j = solve_to_json(RatePair(0, 0), res, SolverConfig{});
  CHECK(j.dump().find("\"inf\"") != std::string::npos);
}

TEST_CASE("rate axes") {
  CHECK(parse_axis("0:0.1:0.3") == std::vector<double>{0, 0.1, 0.2, 0.3});
  CHECK(parse_axis("0.5") == std::vector<double>{0.5});
  CHECK(parse_axis("0,1,0.25") == std::vector<double>{0, 1, 0.25});
  CHECK(parse_axis("0:0.25:1").size() == 5);
  CHECK_THROWS_AS(parse_axis("1:0.1:0"), ParseError);
  CHECK_THROWS_AS(parse_axis("0:0:1"), ParseError);
  CHECK_THROWS_AS(parse_axis("0:1"), ParseError);
  CHECK_THROWS_AS(parse_axis("-1"), ParseError);
  CHECK_THROWS_AS(parse_axis("a,b"), ParseError);
}
