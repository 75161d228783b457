#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "pfml/errors.hpp"
#include "pfml/metrics.hpp"
#include "pfml/workbench.hpp"

using namespace pfml;

namespace {
Rat dist(const Model& m, Method method, int depth, const char* x, const char* y) {
  MetricEngine e(m, method, 5);
  return e.distance(depth, m.state_index(x), m.state_index(y));
}
}  // namespace

TEST_CASE("depth-0 tables are zero for every method") {
  Model m = fixture_m1();
  for (Method method : {Method::Wasserstein, Method::Kantorovich, Method::Game}) {
    DistanceTable t = MetricEngine(m, method, 5).table(0);
    for (const Rat& v : t.vals) CHECK(v == Rat(0));
  }
}

TEST_CASE("frozen m1 distance tables") {
  Model m = fixture_m1();
  for (Method method : {Method::Wasserstein, Method::Kantorovich, Method::Game}) {
    CAPTURE(method_name(method));
    CHECK(dist(m, method, 1, "a", "b") == Rat(1));
    CHECK(dist(m, method, 1, "a", "c") == Rat(3, 10));
    CHECK(dist(m, method, 1, "b", "c") == Rat(1));
    CHECK(dist(m, method, 2, "a", "b") == Rat(1));
    CHECK(dist(m, method, 2, "a", "c") == Rat(1, 2));
    CHECK(dist(m, method, 2, "b", "c") == Rat(1));
    // the chain stabilizes at depth 2 on m1
    CHECK(dist(m, method, 3, "a", "c") == Rat(1, 2));
  }
}

TEST_CASE("frozen m2 distance values") {
  Model m = fixture_m2();
  for (Method method : {Method::Wasserstein, Method::Kantorovich, Method::Game}) {
    CAPTURE(method_name(method));
    CHECK(dist(m, method, 1, "s", "t") == Rat(1, 3));
    CHECK(dist(m, method, 1, "s", "u") == Rat(2, 3));
    CHECK(dist(m, method, 1, "s", "v") == Rat(1));
    CHECK(dist(m, method, 1, "t", "u") == Rat(3, 4));
    CHECK(dist(m, method, 1, "t", "v") == Rat(1));
    CHECK(dist(m, method, 1, "u", "v") == Rat(1));
    CHECK(dist(m, method, 2, "s", "t") == Rat(1));
    CHECK(dist(m, method, 2, "s", "u") == Rat(2, 3));
    CHECK(dist(m, method, 2, "t", "u") == Rat(3, 4));
  }
}

TEST_CASE("both-blocking pairs are separated by their atoms only") {
  RawModel raw;
  raw.states = {"x", "y", "z"};
  raw.atoms["A"] = {{"x", "2/3"}, {"y", "1/3"}, {"z", "1"}};
  raw.roles["r"]["z"] = {{"x", "1"}};
  auto outcome = validate_model(raw);
  REQUIRE(outcome.ok());
  const Model& m = *outcome.model;
  int x = m.state_index("x"), y = m.state_index("y");
  REQUIRE(m.blocking(x));
  REQUIRE(m.blocking(y));
  for (Method method : {Method::Wasserstein, Method::Kantorovich, Method::Game}) {
    MetricEngine e(m, method, 5);
    CHECK(e.distance(0, x, y) == Rat(0));
    CHECK(e.distance(1, x, y) == Rat(1, 3));
    CHECK(e.distance(3, x, y) == Rat(1, 3));
  }
  WitnessCertificate cert = synthesize_witness(m, 2, x, y);
  CHECK(cert.valid);
  CHECK(cert.achieved == Rat(1, 3));
}

TEST_CASE("game value conventions") {
  Model m = fixture_m1();
  CHECK(game_value(m, 1, m.state_index("b"), m.state_index("c")) == Rat(1));
  CHECK(game_value(m, 0, m.state_index("a"), m.state_index("b")) == Rat(0));
  CHECK(game_value(m, 2, m.state_index("a"), m.state_index("c")) == Rat(1, 2));
}

TEST_CASE("four-way coincidence on seeded random models") {
  auto models = random_models(8, 5, 12, 20250807);
  SuiteOutcome out = suite_coincidence(models, 3, 5);
  CAPTURE(out.first_failure);
  CHECK(out.pass());
}

TEST_CASE("cross-model distances: restriction tightness on m1") {
  Model m = fixture_m1();
  int a = m.state_index("a");
  Model r = restrict_model(m, a, 1);
  int ar = r.state_index("a");
  CHECK(cross_distance(m, a, r, ar, 1) == Rat(0));
  CHECK(cross_distance(m, a, r, ar, 2) == Rat(1, 2));
}

TEST_CASE("cross-model distances: unravelling tightness on m1") {
  Model m = fixture_m1();
  int a = m.state_index("a");
  auto [tree, root] = unravel(m, a, 2);
  CHECK(cross_distance(m, a, tree, root, 0) == Rat(0));
  CHECK(cross_distance(m, a, tree, root, 1) == Rat(0));
  CHECK(cross_distance(m, a, tree, root, 2) == Rat(0));
  CHECK(cross_distance(m, a, tree, root, 3) == Rat(1, 2));  // truncation shows
}

TEST_CASE("restriction and unravelling stay at distance zero up to k = 4") {
  for (const Model& m : {fixture_m1(), fixture_m2()}) {
    for (int a = 0; a < m.num_states(); ++a) {
      Model r = restrict_model(m, a, 4);
      int ar = r.state_index(m.state_name(a));
      CHECK(cross_distance(m, a, r, ar, 4) == Rat(0));
      auto [tree, root] = unravel(m, a, 4);
      for (int n = 0; n <= 4; ++n)
        CHECK(cross_distance(m, a, tree, root, n) == Rat(0));
    }
  }
}

TEST_CASE("chain monotonicity and pseudometric axioms on fixtures") {
  SuiteOutcome out = suite_monotone({fixture_m1(), fixture_m2()}, 5);
  CAPTURE(out.first_failure);
  CHECK(out.pass());
}

TEST_CASE("kantorovich witness potential for (a,c) at depth 2") {
  Model m = fixture_m1();
  int a = m.state_index("a"), b = m.state_index("b"), c = m.state_index("c");
  MetricEngine k(m, Method::Kantorovich);
  KantorovichResult kr = k.potential(2, a, c);
  CHECK(kr.value == Rat(1, 2));
  // the optimal potential separates b from c by the full d_1 distance
  CHECK(abs_diff(kr.potential.at(b), kr.potential.at(c)) == Rat(1));
}

TEST_CASE("wasserstein witness coupling for (a,c) at depth 2 is forced") {
  Model m = fixture_m1();
  int a = m.state_index("a"), b = m.state_index("b"), c = m.state_index("c");
  MetricEngine w(m, Method::Wasserstein);
  Coupling mu = w.optimal_coupling(2, a, c);
  REQUIRE(mu.entries.size() == 2);
  CHECK(mu.entries[0] == std::tuple<int, int, Rat>{b, c, Rat(1, 2)});
  CHECK(mu.entries[1] == std::tuple<int, int, Rat>{c, c, Rat(1, 2)});
}

TEST_CASE("distance table plumbing") {
  Model m = fixture_m2();
  DistanceTable t = wasserstein_table(m, 2);
  CHECK(t.at(1, 0) == t.at(0, 1));
  CHECK(t.at(2, 2) == Rat(0));
  CHECK(!t.triangle_violation().has_value());
  DistanceTable k = kantorovich_table(m, 2);
  CHECK(t.equal_values(k));
}

// --- strategies -------------------------------------------------------------

TEST_CASE("duplicator strategy matches the worked example") {
  Model m = fixture_m1();
  int a = m.state_index("a"), b = m.state_index("b"), c = m.state_index("c");
  Strategy s = extract_strategy(m, 2, a, c, Rat(1, 2), 5);
  REQUIRE(std::holds_alternative<DuplicatorStrategy>(s));
  const auto& dup = std::get<DuplicatorStrategy>(s);
  REQUIRE(!dup.nodes.empty());
  const auto& root = dup.nodes[0];
  REQUIRE(root.has_move);
  // the only coupling of (r_a, r_c) pairs b with c and c with c
  REQUIRE(root.move.mu.entries.size() == 2);
  CHECK(root.move.mu.entries[0] == std::tuple<int, int, Rat>{b, c, Rat(1, 2)});
  CHECK(root.move.mu.entries[1] == std::tuple<int, int, Rat>{c, c, Rat(1, 2)});
  CHECK(root.move.deviation_at(b, c) == Rat(1));  // d_1(b,c)
  CHECK(root.move.deviation_at(c, c) == Rat(0));
  CHECK(root.move.expected_deviation() == Rat(1, 2));

  VerifyResult ok = verify_strategy(m, 2, {a, c, Rat(1, 2)}, s, 5);
  CAPTURE(ok.trace);
  CHECK(ok.ok);

  // the same strategy replayed under a tighter budget loses
  VerifyResult bad = verify_strategy(m, 2, {a, c, Rat(1, 4)}, s, 5);
  CHECK(!bad.ok);
  CHECK(!bad.trace.empty());
}

TEST_CASE("spoiler strategy below the value wins the replay") {
  Model m = fixture_m1();
  int a = m.state_index("a"), c = m.state_index("c");
  Strategy s = extract_strategy(m, 2, a, c, Rat(1, 4), 5);
  REQUIRE(std::holds_alternative<SpoilerStrategy>(s));
  VerifyResult r = verify_strategy(m, 2, {a, c, Rat(1, 4)}, s, 5);
  CAPTURE(r.trace);
  CHECK(r.ok);
  // at the exact game value the Spoiler certificate must fail
  Strategy at_value = extract_strategy(m, 2, a, c, Rat(1, 2), 5);
  REQUIRE(std::holds_alternative<DuplicatorStrategy>(at_value));
}

TEST_CASE("spoiler verification rejects eps at or above the value") {
  Model m = fixture_m1();
  int a = m.state_index("a"), c = m.state_index("c");
  auto tables = std::make_shared<MetricEngine>(m, Method::Game, 5);
  SpoilerStrategy sp(tables, 2, {a, c, Rat(1, 2)});
  VerifyResult r = verify_strategy(m, 2, {a, c, Rat(1, 2)}, Strategy(sp), 5);
  CHECK(!r.ok);
  REQUIRE(!r.trace.empty());
  CHECK(r.trace[0].find("Duplicator wins") != std::string::npos);
}

TEST_CASE("zero-round games are a trivial duplicator win") {
  Model m = fixture_m1();
  int a = m.state_index("a"), b = m.state_index("b");
  Strategy s = extract_strategy(m, 0, a, b, Rat(0), 5);
  REQUIRE(std::holds_alternative<DuplicatorStrategy>(s));
  VerifyResult r = verify_strategy(m, 0, {a, b, Rat(0)}, s, 5);
  CHECK(r.ok);
}

TEST_CASE("blocking pair strategies") {
  Model m = fixture_m1();
  int b = m.state_index("b"), c = m.state_index("c");
  // d_1(b,c) = 1: Duplicator only wins with eps = 1 (the eps = 1 rule)
  Strategy dup = extract_strategy(m, 1, b, c, Rat(1), 5);
  REQUIRE(std::holds_alternative<DuplicatorStrategy>(dup));
  CHECK(verify_strategy(m, 1, {b, c, Rat(1)}, dup, 5).ok);
  Strategy sp = extract_strategy(m, 1, b, c, Rat(99, 100), 5);
  REQUIRE(std::holds_alternative<SpoilerStrategy>(sp));
  CHECK(verify_strategy(m, 1, {b, c, Rat(99, 100)}, sp, 5).ok);
}

TEST_CASE("incomplete duplicator strategies are detected") {
  Model m = fixture_m1();
  int a = m.state_index("a"), c = m.state_index("c");
  Strategy s = extract_strategy(m, 2, a, c, Rat(1, 2), 5);
  auto& dup = std::get<DuplicatorStrategy>(s);
  REQUIRE(!dup.nodes[0].children.empty());
  dup.nodes[0].children.erase(dup.nodes[0].children.begin());
  CHECK_THROWS_AS(verify_strategy(m, 2, {a, c, Rat(1, 2)}, s, 5),
                  IncompleteStrategyError);
}

TEST_CASE("strategy suite on fixtures") {
  SuiteOutcome out = suite_strategies({fixture_m1(), fixture_m2()}, 2, 5);
  CAPTURE(out.first_failure);
  CHECK(out.pass());
}

// --- logical lower bound and locality ---------------------------------------

TEST_CASE("logical lower bound on m1") {
  Model m = fixture_m1();
  auto grid = std::vector<Rat>{Rat(0), Rat(1, 2), Rat(1)};
  LogicalLbResult lb = logical_lb_table(m, 1, 500, grid);
  int a = m.state_index("a"), b = m.state_index("b"), c = m.state_index("c");
  CHECK(lb.table.at(a, c) == Rat(3, 10));  // best rank-1 separator is A itself
  CHECK(lb.table.at(b, c) == Rat(1));      // the blocking detector <r> 1
  // sound lower bound on the Wasserstein table, pointwise
  DistanceTable w = wasserstein_table(m, 1);
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) CHECK(lb.table.at(i, j) <= w.at(i, j));
  REQUIRE(lb.witnesses[DistanceTable::pair_index(3, b, c)]);
}

TEST_CASE("logical lower bound never exceeds the distance on random models") {
  auto models = random_models(5, 4, 8, 77);
  auto grid = std::vector<Rat>{Rat(0), Rat(1, 2), Rat(1)};
  for (const Model& m : models) {
    LogicalLbResult lb = logical_lb_table(m, 2, 300, grid);
    DistanceTable w = wasserstein_table(m, 2);
    for (int i = 0; i < m.num_states(); ++i)
      for (int j = i + 1; j < m.num_states(); ++j)
        CHECK(lb.table.at(i, j) <= w.at(i, j));
  }
}

TEST_CASE("locality of modal formulas on m1") {
  Model m = fixture_m1();
  int a = m.state_index("a"), c = m.state_index("c");
  Formula phi = standard_translation(parse_concept("<r> A"), "x");
  LocalityResult r1 = locality_check(m, a, phi, 2);
  CHECK(r1.full == Rat(1, 2));
  CHECK(r1.restricted == Rat(1, 2));
  CHECK(r1.equal);

  // the unrestricted exists is not local
  LocalityResult r2 = locality_check(m, c, parse_formula("E y. A(y)"), 1);
  CHECK(r2.full == Rat(1));
  CHECK(r2.restricted == Rat(3, 10));
  CHECK(!r2.equal);

  LocalityResult r3 = locality_check(m, a, parse_formula("A(x) - 0"), 0);
  CHECK(r3.equal);
  CHECK_THROWS_AS(locality_check(m, a, parse_formula("x = y"), 1), Error);
}

TEST_CASE("rank invariance of enumerated concepts") {
  SuiteOutcome out =
      suite_rank_invariance({fixture_m1(), fixture_m2()}, 120, 3);
  CAPTURE(out.first_failure);
  CHECK(out.pass());
}
