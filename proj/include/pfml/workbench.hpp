#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pfml/metrics.hpp"
#include "pfml/model.hpp"
#include "pfml/synthesis.hpp"

namespace pfml {

// Canonical test models, identical to the fixtures shipped in fixtures/.
Model fixture_m1();
Model fixture_m2();

// Deterministic random generation. All draws come from std::mt19937_64 (whose
// output sequence the C++ standard pins down exactly) reduced by modulo, so a
// seed reproduces the same models on any implementation.
std::uint64_t draw(std::mt19937_64& rng, std::uint64_t bound);  // uniform-ish in [0, bound)
Rat random_unit_rat(std::mt19937_64& rng, int denom_bound);

// States s0..s{k-1} (2 <= k <= size_bound), atoms A and B with grid values,
// each row blocking with probability 1/4, otherwise a random rational
// distribution with denominator <= denom_bound.
Model random_model(std::mt19937_64& rng, int size_bound, int denom_bound);
std::vector<Model> random_models(int count, int size_bound, int denom_bound,
                                 std::uint64_t seed);

Concept random_concept(std::mt19937_64& rng, int max_rank,
                       const std::vector<Rat>& grid,
                       const std::vector<std::string>& atoms,
                       const std::string& role, int size_budget);

struct SuiteOutcome {
  std::string suite;
  int checked = 0;
  int failures = 0;
  std::string first_failure;

  bool pass() const { return failures == 0; }
  void ok() { ++checked; }
  void fail(const std::string& msg) {
    ++checked;
    ++failures;
    if (first_failure.empty()) first_failure = msg;
  }
};

// Four-way coincidence: Wasserstein (simplex), Kantorovich (dual LP), game
// (vertex enumeration) and synthesized-witness values agree exactly on every
// pair at every depth <= max_depth.
SuiteOutcome suite_coincidence(const std::vector<Model>& models, int max_depth,
                               int support_bound = 5);

// Kantorovich-Rubinstein duality on random transport instances: primal
// optimum = dual optimum, weak duality never fires.
SuiteOutcome suite_duality(int instances, int max_support, int denom_bound,
                           std::uint64_t seed);

// ||<>f - <>g||_inf <= ||f - g||_inf for random valuation pairs.
SuiteOutcome suite_diamond_nonexpansive(const std::vector<Model>& models,
                                        int pairs_per_model, int denom_bound,
                                        std::uint64_t seed);

// Enumerated concepts of rank <= max_rank are non-expansive wrt both their
// own-rank distance and d_max_rank.
SuiteOutcome suite_rank_invariance(const std::vector<Model>& models,
                                   int concepts_per_model, int max_rank);

// Chain d_n <= d_{n+1} plus pseudometric axioms for every depth <= max_depth.
SuiteOutcome suite_monotone(const std::vector<Model>& models, int max_depth);

// Sampled rank <= max_rank concepts: ST_x(C) evaluates equally on the model
// and on the radius-rank(C) restriction.
SuiteOutcome suite_locality(const std::vector<Model>& models, int samples,
                            int max_rank, std::uint64_t seed);

// Sampled concept/state pairs: C(a) = ST_x(C)(a), exact.
SuiteOutcome suite_translation(const std::vector<Model>& models, int samples,
                               int max_rank, std::uint64_t seed);

// d_k(a, a in restrict(M,a,k)) = 0 and d_n(a, root of unravel(M,a,k)) = 0 for
// n <= k <= max_k.
SuiteOutcome suite_unravel(const std::vector<Model>& models, int max_k);

// d_n(a, copy of a in M+M) = 0, and concept values are invariant under the
// disjoint-union embedding.
SuiteOutcome suite_union(const std::vector<Model>& models, int max_depth);

// Extracted Duplicator strategies verify at eps = d_n; extracted Spoiler
// strategies verify at eps = max(0, d_n - 1/100) and at eps = 0 when d_n > 0.
SuiteOutcome suite_strategies(const std::vector<Model>& models, int max_depth,
                              int support_bound = 5);

struct CheckRequest {
  std::vector<Model> models;
  std::vector<std::string> suites;
  int depth = 3;
  int denom_bound = 12;
  std::uint64_t seed = 0;
};

// Runs the named suites ("coincidence", "duality", "monotone", "nonexpansive",
// "locality", "unravel", "union", "strategies", "translation") with desk-scale
// defaults. Throws Error on an unknown suite name.
std::vector<SuiteOutcome> run_suites(const CheckRequest& req);

}  // namespace pfml
