#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "pfml/errors.hpp"
#include "pfml/synthesis.hpp"
#include "pfml/workbench.hpp"

using namespace pfml;

TEST_CASE("interpolant hits both targets exactly") {
  Model m = fixture_m1();
  int b = m.state_index("b"), c = m.state_index("c");
  SynthesisSession session(m);
  // d_1(b,c) = 1, targets (1, 1/4)
  Concept g = session.interpolant(1, b, c, Rat(1), Rat(1, 4));
  CHECK(session.value_at(g, b) == Rat(1));
  CHECK(session.value_at(g, c) == Rat(1, 4));
  CHECK(rank(g) <= 1);

  // degenerate cases collapse to constants
  Concept same_state = session.interpolant(1, b, b, Rat(1, 3), Rat(1, 3));
  CHECK(same_state->kind == CKind::Const);
  Concept same_target = session.interpolant(1, b, c, Rat(2, 5), Rat(2, 5));
  CHECK(same_target->kind == CKind::Const);
  CHECK(session.value_at(same_target, b) == Rat(2, 5));
}

TEST_CASE("interpolant rejects targets that deviate more than the distance") {
  Model m = fixture_m1();
  int a = m.state_index("a"), c = m.state_index("c");
  SynthesisSession session(m);
  // d_1(a,c) = 3/10 < |1 - 0|
  CHECK_THROWS_AS(session.interpolant(1, a, c, Rat(1), Rat(0)),
                  NotNonexpansiveError);
}

TEST_CASE("reconstruction agrees with the target pointwise") {
  Model m = fixture_m1();
  int a = m.state_index("a"), b = m.state_index("b"), c = m.state_index("c");
  SynthesisSession session(m);

  // constant target
  Concept k = session.reconstruct(1, {{a, Rat(2, 7)}, {b, Rat(2, 7)}});
  CHECK(session.value_at(k, a) == Rat(2, 7));

  // A's own valuation is non-expansive wrt d_1 and reconstructs exactly
  Concept like_a =
      session.reconstruct(1, {{a, Rat(3, 10)}, {b, Rat(1)}, {c, Rat(0)}});
  CHECK(session.value_at(like_a, a) == Rat(3, 10));
  CHECK(session.value_at(like_a, b) == Rat(1));
  CHECK(session.value_at(like_a, c) == Rat(0));
  CHECK(rank(like_a) <= 1);

  // an optimal dual potential for (r_a, r_c) under d_1 reconstructs exactly
  MetricEngine& w = session.tables();
  KantorovichResult kr = w.potential(2, a, c);
  Concept pot = session.reconstruct(1, kr.potential.values);
  for (const auto& [s, v] : kr.potential.values)
    CHECK(session.value_at(pot, s) == v);
}

TEST_CASE("reconstruction rejects expansive targets") {
  Model m = fixture_m1();
  int a = m.state_index("a"), c = m.state_index("c");
  SynthesisSession session(m);
  CHECK_THROWS_AS(session.reconstruct(1, {{a, Rat(1)}, {c, Rat(0)}}),
                  NotNonexpansiveError);
}

TEST_CASE("witness certificates on m1 match the distances") {
  Model m = fixture_m1();
  int a = m.state_index("a"), b = m.state_index("b"), c = m.state_index("c");

  WitnessCertificate w2 = synthesize_witness(m, 2, a, c);
  CHECK(w2.achieved == Rat(1, 2));
  CHECK(w2.claimed == Rat(1, 2));
  CHECK(w2.valid);
  CHECK(rank(w2.concept_) <= 2);

  WitnessCertificate w1 = synthesize_witness(m, 1, b, c);
  CHECK(w1.valid);
  CHECK(w1.achieved == Rat(1));
  CHECK(print_concept(w1.concept_) == "<r> 1");  // the blocking detector

  WitnessCertificate refl = synthesize_witness(m, 1, a, a);
  CHECK(refl.valid);
  CHECK(refl.achieved == Rat(0));

  WitnessCertificate zero = synthesize_witness(m, 0, a, b);
  CHECK(zero.valid);
  CHECK(zero.claimed == Rat(0));
}

TEST_CASE("witness table equals the wasserstein table") {
  for (const Model& m : {fixture_m1(), fixture_m2()}) {
    for (int depth = 0; depth <= 3; ++depth) {
      DistanceTable lw = logical_witness_table(m, depth);
      DistanceTable w = wasserstein_table(m, depth);
      CHECK(lw.equal_values(w));
    }
  }
}

TEST_CASE("exactness and rank discipline on random models") {
  auto models = random_models(6, 5, 10, 4242);
  for (const Model& m : models) {
    SynthesisSession session(m);
    for (int depth = 0; depth <= 3; ++depth)
      for (int i = 0; i < m.num_states(); ++i)
        for (int j = i + 1; j < m.num_states(); ++j) {
          WitnessCertificate cert = session.witness(depth, i, j);
          CHECK(cert.valid);
          CHECK(cert.achieved == cert.claimed);  // exact, no tolerance
          CHECK(rank(cert.concept_) <= depth);
          CHECK(dag_size(cert.concept_) <= 200000);
        }
  }
}

TEST_CASE("soundness also holds in the quantized stress mode") {
  SynthesisSession::Options opts;
  opts.grid_denominator = 4;
  for (const Model& m : {fixture_m1(), fixture_m2()}) {
    SynthesisSession session(m, opts);
    MetricEngine w(m, Method::Wasserstein);
    for (int depth = 1; depth <= 2; ++depth)
      for (int i = 0; i < m.num_states(); ++i)
        for (int j = i + 1; j < m.num_states(); ++j) {
          WitnessCertificate cert = session.witness(depth, i, j);
          CHECK(cert.achieved <= cert.claimed);
          CHECK(rank(cert.concept_) <= depth);
        }
  }
}

TEST_CASE("off-support potential values do not change the witness") {
  // the diamond only integrates over the supports, so a potential extended
  // beyond them (McShane) yields the same achieved value
  Model m = fixture_m1();
  int a = m.state_index("a"), c = m.state_index("c");
  SynthesisSession session(m);
  MetricEngine& w = session.tables();
  KantorovichResult kr = w.potential(2, a, c);
  GroundFn ground = [&](int x, int y) { return w.distance(1, x, y); };
  auto extended = kr.potential.values;
  bool added = false;
  for (int s = 0; s < m.num_states(); ++s) {
    if (kr.potential.at(s) == Rat(0) &&
        std::none_of(extended.begin(), extended.end(),
                     [&](const auto& p) { return p.first == s; })) {
      extended.emplace_back(s, mcshane_extension_value(kr.potential, ground, s));
      added = true;
    }
  }
  Concept c1 = c_dia(session.reconstruct(1, kr.potential.values), "r");
  Rat direct = abs_diff(session.value_at(c1, a), session.value_at(c1, c));
  if (added) {
    Concept c2 = c_dia(session.reconstruct(1, extended), "r");
    Rat ext = abs_diff(session.value_at(c2, a), session.value_at(c2, c));
    CHECK(direct == ext);
  }
  CHECK(direct == Rat(1, 2));
}
