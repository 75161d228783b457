#pragma once

#include <map>
#include <tuple>
#include <vector>

#include "pfml/metrics.hpp"
#include "pfml/semantics.hpp"
#include "pfml/syntax.hpp"

namespace pfml {

// A synthesized distinguishing concept for a state pair: rank(concept) <=
// depth, achieved = |C(a)-C(b)|, claimed = the depth-n Wasserstein distance.
// Soundness gives achieved <= claimed; the certificate is VALID when they
// are exactly equal (the constructive form of d^L_n = d^K_n on finite models).
struct WitnessCertificate {
  int a = 0, b = 0;
  int depth = 0;
  Concept concept_;
  Rat achieved;
  Rat claimed;
  bool valid = false;
};

// Synthesis session over one model. Witness concepts are memoized per
// (depth, pair) and shared as subtrees, so the emitted DAGs stay small;
// evaluation of shared nodes is cached per session.
class SynthesisSession {
 public:
  struct Options {
    std::size_t max_dag_nodes = 200000;
    // Stress mode: quantize dual potentials to multiples of 1/grid_denominator
    // before reconstruction. Witnesses stay sound (achieved <= claimed) but
    // exactness is deliberately given up. 0 = exact synthesis.
    unsigned long grid_denominator = 0;
  };

  explicit SynthesisSession(const Model& m) : SynthesisSession(m, Options()) {}
  SynthesisSession(const Model& m, Options opts);

  // Best of: each atom, the diamond over a reconstructed optimal dual
  // potential, and the blocking detector <r> 1 when exactly one row is zero.
  WitnessCertificate witness(int depth, int a, int b);

  // Lattice reconstruction: a rank <= depth concept agreeing with the target
  // exactly on its domain (target must be non-expansive wrt d_depth).
  Concept reconstruct(int depth, const std::vector<std::pair<int, Rat>>& target);

  // Rank <= depth concept g with g(x) = fx and g(y) = fy, built from the
  // pair's witness via truncated subtraction/addition.
  Concept interpolant(int depth, int x, int y, const Rat& fx, const Rat& fy);

  const Rat& value_at(const Concept& c, int state) { return eval_.eval(c)[state]; }
  MetricEngine& tables() { return wtab_; }
  const Model& model() const { return m_; }

 private:
  const Model& m_;
  Options opts_;
  MetricEngine wtab_;
  EvalCache eval_;
  std::map<std::tuple<int, int, int>, Concept> memo_;
};

WitnessCertificate synthesize_witness(const Model& m, int depth, int a, int b);
Concept reconstruct_function(const Model& m, int depth,
                             const std::vector<std::pair<int, Rat>>& target);
Concept pairwise_interpolant(const Model& m, int depth, int x, int y,
                             const Rat& fx, const Rat& fy);

// Distance table whose entries are the achieved values of synthesized
// witnesses (method LogicalWitness).
DistanceTable logical_witness_table(const Model& m, int n);

}  // namespace pfml
