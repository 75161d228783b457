#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "pfml/model.hpp"
#include "pfml/syntax.hpp"

namespace pfml {

// Truth-value assignment, one value per state of a fixed model.
using Valuation = std::vector<Rat>;

// Variable environment for formula evaluation: variable -> state index.
using Env = std::map<std::string, int>;

// Zadeh clauses: min for &, max for |, 1-x for ~, max(x-q,0) for - q; the
// diamond takes the expectation over the successor row (0 at blocking
// states, by the empty sum). Evaluation is memoized per (node, state) within
// the call, so shared subtrees of synthesized concepts evaluate once.
Valuation eval_concept(const Model& m, const Concept& c);

// (<>f)(a) = sum_{a'} r_a(a') * f(a'), over the designated role.
Valuation apply_diamond(const Model& m, const Valuation& f);

// First-order evaluation; E takes maxima over the finite domain, equality is
// two-valued, and P x y at a blocking env(x) evaluates to 0.
Rat eval_formula(const Model& m, const Formula& f, const Env& env);

// Re-usable memo for evaluating many (shared) concepts on one model. Each
// entry pins its node: cached addresses stay alive, so a recycled heap
// address can never alias a stale valuation.
class EvalCache {
 public:
  explicit EvalCache(const Model& m) : m_(m) {}
  const Valuation& eval(const Concept& c);
  const Model& model() const { return m_; }

 private:
  const Model& m_;
  std::unordered_map<const ConceptNode*, std::pair<Concept, Valuation>> memo_;
};

}  // namespace pfml
