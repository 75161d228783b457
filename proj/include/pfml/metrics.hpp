#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pfml/lp.hpp"
#include "pfml/model.hpp"
#include "pfml/semantics.hpp"
#include "pfml/syntax.hpp"

namespace pfml {

enum class Method { Wasserstein, Kantorovich, Game, LogicalWitness, LogicalLB };

std::string method_name(Method m);
std::optional<Method> parse_method(std::string_view name);

// Pairwise depth-n pseudometric over the states of one model. Zero diagonal
// and symmetry hold by representation; the triangle inequality is checkable
// exhaustively.
struct DistanceTable {
  int depth = 0;
  Method method = Method::Wasserstein;
  int n = 0;
  std::vector<Rat> vals;  // upper triangle, row-major over pairs i < j

  static std::size_t pair_index(int n, int i, int j);
  const Rat& at(int i, int j) const;
  bool equal_values(const DistanceTable& other) const;
  // first triple (i,j,k) with d(i,k) > d(i,j) + d(j,k), if any
  std::optional<std::array<int, 3>> triangle_violation() const;
};

// Depth-indexed distance engine for one model and one lifting method.
// Distances are computed on demand and memoized per (depth, pair); the
// recursion is the fixed-point iteration d_{k+1} = max(atom deviation,
// lift_{d_k}(row_a, row_b)) with the blocking conventions of the lifting.
//
// The Game method never touches the simplex: its lift is the minimum of
// E_mu(d_k) over the enumerated transportation-polytope vertices, so Game vs
// Wasserstein is a genuine differential test of two independent code paths.
class MetricEngine {
 public:
  MetricEngine(const Model& m, Method method,
               int support_bound = kDefaultSupportBound);

  const Model& model() const { return m_; }
  Method method() const { return method_; }

  const Rat& distance(int depth, int a, int b);
  DistanceTable table(int depth);

  // Optimal coupling of (row_a, row_b) under ground d_{depth-1}: the simplex
  // witness for Wasserstein/Kantorovich engines, the argmin vertex for Game.
  Coupling optimal_coupling(int depth, int a, int b);
  // Dual witness over the engine's own ground d_{depth-1}.
  KantorovichResult potential(int depth, int a, int b);
  // Cached polytope vertices for the rows of a and b.
  const std::vector<Coupling>& vertices(int a, int b);

  Rat atom_deviation(int a, int b) const;
  Distribution row_distribution(int s) const;

 private:
  Rat compute(int depth, int a, int b);
  GroundFn ground(int depth);

  const Model& m_;
  Method method_;
  int bound_;
  static const Rat kZero;
  std::vector<std::vector<std::optional<Rat>>> memo_;  // [depth][pair]
  std::map<std::pair<int, int>, std::vector<Coupling>> vertex_cache_;
};

// One-shot helpers matching the per-method table operations.
DistanceTable wasserstein_table(const Model& m, int n);
DistanceTable kantorovich_table(const Model& m, int n);
Rat game_value(const Model& m, int n, int a, int b,
               int support_bound = kDefaultSupportBound);

// Depth-n distance between states of two different models, computed on
// their disjoint union.
Rat cross_distance(const Model& m, int a, const Model& other, int b, int depth,
                   Method method = Method::Wasserstein,
                   int support_bound = kDefaultSupportBound);

// ---------------------------------------------------------------------------
// epsilon-bisimulation game strategies
// ---------------------------------------------------------------------------

struct GameConfig {
  int left = 0;
  int right = 0;
  Rat epsilon;
};

// One Duplicator round: the announced coupling plus the deviation split over
// its support, with E_mu(eps') <= eps.
struct DuplicatorMove {
  Coupling mu;
  std::vector<std::tuple<int, int, Rat>> deviation;

  Rat deviation_at(int a, int b) const;
  Rat expected_deviation() const;
};

// Explicit strategy DAG: per reachable configuration the move to play, with
// children for every mu-positive successor pair.
struct DuplicatorStrategy {
  struct Node {
    GameConfig config;
    bool has_move = false;
    DuplicatorMove move;
    std::map<std::pair<int, int>, int> children;
  };
  int rounds = 0;
  std::vector<Node> nodes;  // nodes[0] is the root
};

// Response function: Duplicator announces first, then Spoiler picks the
// mu-positive pair maximizing (child game value - assigned deviation).
class SpoilerStrategy {
 public:
  SpoilerStrategy(std::shared_ptr<MetricEngine> game_tables, int rounds,
                  GameConfig root);

  int rounds() const { return rounds_; }
  const GameConfig& root() const { return root_; }
  std::pair<int, int> respond(int rounds_left, const DuplicatorMove& move) const;
  const Rat& child_value(int rounds_left, int a, int b) const;

 private:
  std::shared_ptr<MetricEngine> tables_;
  int rounds_;
  GameConfig root_;
};

using Strategy = std::variant<DuplicatorStrategy, SpoilerStrategy>;

// eps >= game value: Duplicator strategy (optimal vertex coupling, deviations
// equal to the child game values). Otherwise: Spoiler response strategy.
Strategy extract_strategy(const Model& m, int n, int a, int b, const Rat& eps,
                          int support_bound = kDefaultSupportBound);

struct VerifyResult {
  bool ok = false;
  std::vector<std::string> trace;
};

// Duplicator strategies are replayed exhaustively: Spoiler's choices range
// over all mu-positive pairs, every move is checked legal (exact marginals,
// E_mu(eps') <= eps) and the winning condition is checked before every round.
// Spoiler strategies are replayed against the canonical family of Duplicator
// moves (every polytope vertex coupling, with deviations set to the child
// game values, uniformly to eps, and to zero) and must additionally keep the
// value certificate (game value > deviation) at every visited configuration;
// a strategy passing both beats every legal Duplicator move, not only the
// replayed ones. Throws IncompleteStrategy when a required move is missing.
VerifyResult verify_strategy(const Model& m, int n, const GameConfig& config,
                             const Strategy& strategy,
                             int support_bound = kDefaultSupportBound);

// ---------------------------------------------------------------------------
// Logical lower bound and locality
// ---------------------------------------------------------------------------

struct LogicalLbResult {
  DistanceTable table;             // method LogicalLB
  std::vector<Concept> witnesses;  // per pair index; null when the bound is 0
  std::size_t concepts_used = 0;
};

// Per pair, max |C(a)-C(b)| over enumerated concepts of rank <= n; a sound
// lower bound on d_n with the maximizing concept recorded.
LogicalLbResult logical_lb_table(const Model& m, int n, std::size_t budget,
                                 const std::vector<Rat>& grid);

struct LocalityResult {
  Rat full;
  Rat restricted;
  bool equal = false;
};

// Evaluates phi (one free variable) at a on m and on restrict(m, a, k).
LocalityResult locality_check(const Model& m, int a, const Formula& phi, int k);

}  // namespace pfml
