#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "pfml/errors.hpp"
#include "pfml/lp.hpp"
#include "pfml/workbench.hpp"

using namespace pfml;

namespace {

GroundFn discrete_metric() {
  return [](int i, int j) { return Rat(i == j ? 0 : 1); };
}

// random pseudometric on [0, n): symmetrized unit rationals through min-plus
// closure
std::vector<std::vector<Rat>> random_pseudometric(std::mt19937_64& rng, int n,
                                                  int denom_bound) {
  std::vector<std::vector<Rat>> d(n, std::vector<Rat>(n, Rat(0)));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) d[i][j] = d[j][i] = random_unit_rat(rng, denom_bound);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

Distribution random_distribution(std::mt19937_64& rng, int universe, int max_support,
                                 int denom_bound) {
  unsigned long den = 1 + draw(rng, denom_bound);
  int bound = std::min<int>({universe, static_cast<int>(den), max_support});
  int k = 1 + static_cast<int>(draw(rng, bound));
  std::vector<int> pts;
  std::vector<int> pool(universe);
  for (int i = 0; i < universe; ++i) pool[i] = i;
  for (int i = 0; i < k; ++i)
    std::swap(pool[i], pool[i + draw(rng, universe - i)]);
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  // composition of den into k positive parts
  std::vector<int> cuts;
  std::vector<int> cutpool(den - 1);
  for (std::size_t i = 0; i < cutpool.size(); ++i) cutpool[i] = static_cast<int>(i) + 1;
  for (int i = 0; i < k - 1; ++i)
    std::swap(cutpool[i], cutpool[i + draw(rng, cutpool.size() - i)]);
  cuts.assign(cutpool.begin(), cutpool.begin() + (k - 1));
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(static_cast<int>(den));
  Distribution out;
  int prev = 0;
  for (int i = 0; i < k; ++i) {
    out.mass.emplace_back(pool[i], Rat(cuts[i] - prev, den));
    prev = cuts[i];
  }
  return out;
}

}  // namespace

TEST_CASE("forced transport instance") {
  Distribution p1{{{0, Rat(1, 2)}, {1, Rat(1, 2)}}};  // x:1/2, y:1/2
  Distribution p2{{{0, Rat(1)}}};                     // x:1
  TransportResult r = solve_transport_min(discrete_metric(), p1, p2);
  CHECK(r.value == Rat(1, 2));
  REQUIRE(r.coupling.entries.size() == 2);
  CHECK(r.coupling.entries[0] == std::tuple<int, int, Rat>{0, 0, Rat(1, 2)});
  CHECK(r.coupling.entries[1] == std::tuple<int, int, Rat>{1, 0, Rat(1, 2)});
}

TEST_CASE("identical marginals have zero transport cost") {
  Distribution p{{{0, Rat(1, 3)}, {1, Rat(1, 3)}, {2, Rat(1, 3)}}};
  CHECK(solve_transport_min(discrete_metric(), p, p).value == Rat(0));
}

TEST_CASE("kantorovich on the forced instance") {
  Distribution p1{{{0, Rat(1, 2)}, {1, Rat(1, 2)}}};
  Distribution p2{{{0, Rat(1)}}};
  KantorovichResult r = solve_kantorovich_max(discrete_metric(), p1, p2);
  CHECK(r.value == Rat(1, 2));
  // the optimal potential separates the two points by the full ground distance
  CHECK(abs_diff(r.potential.at(0), r.potential.at(1)) == Rat(1));
  KantorovichResult same = solve_kantorovich_max(discrete_metric(), p1, p1);
  CHECK(same.value == Rat(0));
}

TEST_CASE("marginal validation") {
  Distribution bad{{{0, Rat(1, 2)}, {1, Rat(1, 3)}}};
  Distribution good{{{0, Rat(1)}}};
  CHECK_THROWS_AS(solve_transport_min(discrete_metric(), bad, good),
                  MarginalInvalidError);
  CHECK_THROWS_AS(solve_kantorovich_max(discrete_metric(), good, bad),
                  MarginalInvalidError);
  CHECK_THROWS_AS(solve_transport_min(discrete_metric(), Distribution{}, good),
                  MarginalInvalidError);
}

TEST_CASE("lift with blocking conventions") {
  Distribution zero;
  Distribution dist{{{0, Rat(1)}}};
  CHECK(lift_with_blocking(discrete_metric(), zero, zero) == Rat(0));
  CHECK(lift_with_blocking(discrete_metric(), zero, dist) == Rat(1));
  CHECK(lift_with_blocking(discrete_metric(), dist, zero) == Rat(1));
  CHECK(lift_with_blocking(discrete_metric(), dist, dist) == Rat(0));
}

TEST_CASE("vertex enumeration: two-point square has exactly two vertices") {
  Distribution p{{{0, Rat(1, 2)}, {1, Rat(1, 2)}}};
  auto vs = enumerate_transport_vertices(p, p);
  CHECK(vs.size() == 2);  // diagonal and anti-diagonal
  for (const auto& v : vs) CHECK(coupling_has_marginals(v, p, p));
}

TEST_CASE("vertex enumeration: singleton marginals") {
  Distribution p1{{{0, Rat(1)}}};
  Distribution p2{{{5, Rat(1)}}};
  auto vs = enumerate_transport_vertices(p1, p2);
  REQUIRE(vs.size() == 1);
  CHECK(vs[0].entries.size() == 1);
}

TEST_CASE("support bound is enforced") {
  Distribution big{{{0, Rat(1, 5)},
                    {1, Rat(1, 5)},
                    {2, Rat(1, 5)},
                    {3, Rat(1, 5)},
                    {4, Rat(1, 5)}}};
  Distribution small{{{0, Rat(1)}}};
  CHECK_THROWS_AS(enumerate_transport_vertices(big, small, 4), SupportTooLargeError);
  CHECK_NOTHROW(enumerate_transport_vertices(big, small, 5));
}

TEST_CASE("vertex oracle agrees with the simplex on random instances") {
  std::mt19937_64 rng(401);
  for (int it = 0; it < 120; ++it) {
    int universe = 2 + static_cast<int>(draw(rng, 4));  // 2..5 points
    auto d = random_pseudometric(rng, universe, 12);
    GroundFn ground = [&](int i, int j) { return d[i][j]; };
    Distribution p1 = random_distribution(rng, universe, 4, 12);
    Distribution p2 = random_distribution(rng, universe, 4, 12);
    TransportResult simplex = solve_transport_min(ground, p1, p2);
    auto vs = enumerate_transport_vertices(p1, p2, 4);
    REQUIRE(!vs.empty());
    Rat best = vs[0].expectation(ground);
    for (const auto& v : vs) {
      CHECK(coupling_has_marginals(v, p1, p2));
      Rat e = v.expectation(ground);
      if (e < best) best = e;
    }
    CHECK(best == simplex.value);
  }
}

TEST_CASE("KR duality on random instances, with weak duality") {
  std::mt19937_64 rng(911);
  for (int it = 0; it < 60; ++it) {
    int universe = 2 + static_cast<int>(draw(rng, 5));  // 2..6 points
    auto d = random_pseudometric(rng, universe, 12);
    GroundFn ground = [&](int i, int j) { return d[i][j]; };
    Distribution p1 = random_distribution(rng, universe, 5, 12);
    Distribution p2 = random_distribution(rng, universe, 5, 12);
    TransportResult primal = solve_transport_min(ground, p1, p2);
    KantorovichResult dual = solve_kantorovich_max(ground, p1, p2);
    CHECK(primal.value == dual.value);
    CHECK(weak_duality_holds(ground, p1, p2, primal.coupling, dual.potential));
  }
}

TEST_CASE("mcshane extension preserves support values and bounds") {
  Potential f{{{0, Rat(1, 4)}, {1, Rat(3, 4)}}};
  GroundFn ground = [](int i, int j) { return Rat(i == j ? 0 : 1) / Rat(2); };
  CHECK(mcshane_extension_value(f, ground, 0) == Rat(1, 4));
  CHECK(mcshane_extension_value(f, ground, 1) == Rat(3, 4));
  // new point: min(1, min(1/4 + 1/2, 3/4 + 1/2)) = 3/4
  CHECK(mcshane_extension_value(f, ground, 9) == Rat(3, 4));
}

TEST_CASE("vertex enumeration survives huge common denominators") {
  // lcm of these denominators exceeds 2^31, forcing the arbitrary-precision
  // path; results must still match the simplex exactly
  Distribution p1{{{0, Rat(1, 99991)}, {1, Rat(99990, 99991)}}};
  Distribution p2{{{0, Rat(1, 65537)}, {1, Rat(65536, 65537)}}};
  GroundFn ground = discrete_metric();
  auto vs = enumerate_transport_vertices(p1, p2);
  REQUIRE(!vs.empty());
  Rat best = vs[0].expectation(ground);
  for (const auto& v : vs) {
    CHECK(coupling_has_marginals(v, p1, p2));
    best = rat_min(best, v.expectation(ground));
  }
  CHECK(best == solve_transport_min(ground, p1, p2).value);
}

TEST_CASE("degenerate marginals still enumerate correctly") {
  // equal masses force degenerate tree solutions; dedupe is by value
  Distribution p1{{{0, Rat(1, 2)}, {1, Rat(1, 2)}}};
  Distribution p2{{{0, Rat(1, 2)}, {1, Rat(1, 4)}, {2, Rat(1, 4)}}};
  auto vs = enumerate_transport_vertices(p1, p2);
  GroundFn ground = discrete_metric();
  TransportResult simplex = solve_transport_min(ground, p1, p2);
  Rat best = vs[0].expectation(ground);
  for (const auto& v : vs) best = rat_min(best, v.expectation(ground));
  CHECK(best == simplex.value);
}
