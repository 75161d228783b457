#pragma once

#include <functional>
#include <tuple>
#include <utility>
#include <vector>

#include "pfml/rational.hpp"

namespace pfml {

// Sparse discrete probability distribution over caller-chosen integer point
// ids. An empty mass list is the distinguished zero function (blocking row).
struct Distribution {
  std::vector<std::pair<int, Rat>> mass;  // strictly positive entries

  bool zero() const { return mass.empty(); }
  Rat total() const;
  int support_size() const { return static_cast<int>(mass.size()); }
};

// Joint distribution on pairs; rows marginalize to the first distribution,
// columns to the second. Entries are strictly positive.
struct Coupling {
  std::vector<std::tuple<int, int, Rat>> entries;

  Rat expectation(const std::function<Rat(int, int)>& f) const;
};

// Candidate dual witness: point -> value in [0,1], non-expansive wrt the
// ground pseudometric in force.
struct Potential {
  std::vector<std::pair<int, Rat>> values;

  Rat at(int point) const;  // 0 when absent
  Rat expectation(const Distribution& pi) const;
};

using GroundFn = std::function<Rat(int, int)>;

struct TransportResult {
  Rat value;
  Coupling coupling;
};

struct KantorovichResult {
  Rat value;
  Potential potential;
};

inline constexpr int kDefaultSupportBound = 4;

// Exact minimum of E_mu(ground) over couplings of pi1, pi2, with an optimal
// coupling. Simplex with exact rational pivots and Bland's anti-cycling rule;
// the returned coupling's marginals are checked to match pi1, pi2 exactly.
TransportResult solve_transport_min(const GroundFn& ground,
                                    const Distribution& pi1,
                                    const Distribution& pi2);

// Exact maximum of |E_pi1(f) - E_pi2(f)| over potentials f on the union of
// the supports with f(x)-f(y) <= ground(x,y) for all ordered support pairs
// and 0 <= f <= 1. Both sign orientations are solved; the larger wins. The
// returned potential is checked feasible exactly.
KantorovichResult solve_kantorovich_max(const GroundFn& ground,
                                        const Distribution& pi1,
                                        const Distribution& pi2);

// Blocking conventions: 0 if both rows are zero, 1 if exactly one is,
// otherwise the transport minimum.
Rat lift_with_blocking(const GroundFn& ground, const Distribution& pi1,
                       const Distribution& pi2);

// All vertices of the transportation polytope of (pi1, pi2): basic feasible
// solutions, i.e. spanning-tree solutions of the complete bipartite support
// graph, deduplicated by value. Every linear objective attains its optimum on
// this list. Throws SupportTooLarge above the bound.
std::vector<Coupling> enumerate_transport_vertices(const Distribution& pi1,
                                                   const Distribution& pi2,
                                                   int support_bound = kDefaultSupportBound);

// Truncated McShane extension: min(1, min_x f(x) + ground(x, point)).
// Preserves non-expansiveness and the values on the original support.
Rat mcshane_extension_value(const Potential& f, const GroundFn& ground, int point);

// Weak duality: |E_pi1(f) - E_pi2(f)| <= E_mu(ground) for any feasible
// potential f and coupling mu. Used as a running assertion by the suites.
bool weak_duality_holds(const GroundFn& ground, const Distribution& pi1,
                        const Distribution& pi2, const Coupling& mu,
                        const Potential& f);

// Exact marginal check, used by solver postconditions and tests.
bool coupling_has_marginals(const Coupling& mu, const Distribution& pi1,
                            const Distribution& pi2);

}  // namespace pfml
