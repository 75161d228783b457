#include "pfml/metrics.hpp"

#include <algorithm>
#include <sstream>

#include "pfml/errors.hpp"

namespace pfml {

std::string method_name(Method m) {
  switch (m) {
    case Method::Wasserstein: return "wasserstein";
    case Method::Kantorovich: return "kantorovich";
    case Method::Game: return "game";
    case Method::LogicalWitness: return "logical-witness";
    case Method::LogicalLB: return "logical-lb";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view name) {
  if (name == "wasserstein") return Method::Wasserstein;
  if (name == "kantorovich") return Method::Kantorovich;
  if (name == "game") return Method::Game;
  if (name == "logical-witness") return Method::LogicalWitness;
  if (name == "logical-lb") return Method::LogicalLB;
  return std::nullopt;
}

std::size_t DistanceTable::pair_index(int n, int i, int j) {
  if (i > j) std::swap(i, j);
  // row-major upper triangle
  return static_cast<std::size_t>(i) * n - static_cast<std::size_t>(i) * (i + 1) / 2 +
         (j - i - 1);
}

const Rat& DistanceTable::at(int i, int j) const {
  static const Rat kZero(0);
  if (i == j) return kZero;
  return vals[pair_index(n, i, j)];
}

bool DistanceTable::equal_values(const DistanceTable& other) const {
  return n == other.n && vals == other.vals;
}

std::optional<std::array<int, 3>> DistanceTable::triangle_violation() const {
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        if (i == j || j == k || i == k) continue;
        if (at(i, k) > at(i, j) + at(j, k)) return std::array<int, 3>{i, j, k};
      }
  return std::nullopt;
}

const Rat MetricEngine::kZero(0);

MetricEngine::MetricEngine(const Model& m, Method method, int support_bound)
    : m_(m), method_(method), bound_(support_bound) {
  if (method != Method::Wasserstein && method != Method::Kantorovich &&
      method != Method::Game)
    throw Error("MetricEngine: method must be wasserstein, kantorovich or game");
}

Rat MetricEngine::atom_deviation(int a, int b) const {
  Rat best(0);
  for (std::size_t ai = 0; ai < m_.atom_names().size(); ++ai) {
    Rat d = abs_diff(m_.atom(static_cast<int>(ai), a), m_.atom(static_cast<int>(ai), b));
    if (d > best) best = d;
  }
  return best;
}

Distribution MetricEngine::row_distribution(int s) const {
  return Distribution{m_.row(s).entries};
}

GroundFn MetricEngine::ground(int depth) {
  return [this, depth](int x, int y) -> Rat { return distance(depth, x, y); };
}

const Rat& MetricEngine::distance(int depth, int a, int b) {
  if (depth < 0) throw Error("distance: negative depth");
  if (a == b || depth == 0) return kZero;
  if (static_cast<int>(memo_.size()) <= depth) memo_.resize(depth + 1);
  auto& level = memo_[depth];
  if (level.empty())
    level.assign(static_cast<std::size_t>(m_.num_states()) * (m_.num_states() - 1) / 2,
                 std::nullopt);
  std::size_t idx = DistanceTable::pair_index(m_.num_states(), a, b);
  if (!level[idx]) level[idx] = compute(depth, std::min(a, b), std::max(a, b));
  return *level[idx];
}

Rat MetricEngine::compute(int depth, int a, int b) {
  Rat atoms = atom_deviation(a, b);
  bool ba = m_.blocking(a), bb = m_.blocking(b);
  if (ba && bb) return atoms;
  if (ba || bb) return Rat(1);  // zero function vs proper distribution
  Rat lift;
  Distribution pa = row_distribution(a);
  Distribution pb = row_distribution(b);
  switch (method_) {
    case Method::Wasserstein:
      lift = solve_transport_min(ground(depth - 1), pa, pb).value;
      break;
    case Method::Kantorovich:
      lift = solve_kantorovich_max(ground(depth - 1), pa, pb).value;
      break;
    case Method::Game: {
      const auto& vs = vertices(a, b);
      bool first = true;
      GroundFn g = ground(depth - 1);
      for (const Coupling& mu : vs) {
        Rat v = mu.expectation(g);
        if (first || v < lift) lift = std::move(v);
        first = false;
      }
      if (first) throw Error("game lift: empty vertex list");
      break;
    }
    default:
      throw Error("unsupported lift");
  }
  return rat_max(atoms, lift);
}

const std::vector<Coupling>& MetricEngine::vertices(int a, int b) {
  auto key = std::make_pair(a, b);
  auto it = vertex_cache_.find(key);
  if (it == vertex_cache_.end())
    it = vertex_cache_
             .emplace(key, enumerate_transport_vertices(row_distribution(a),
                                                        row_distribution(b), bound_))
             .first;
  return it->second;
}

Coupling MetricEngine::optimal_coupling(int depth, int a, int b) {
  if (depth < 1) throw Error("optimal_coupling: depth must be >= 1");
  if (m_.blocking(a) || m_.blocking(b))
    throw Error("optimal_coupling: blocking state has no coupling");
  if (method_ == Method::Game) {
    const auto& vs = vertices(a, b);
    GroundFn g = ground(depth - 1);
    const Coupling* best = nullptr;
    Rat best_v;
    for (const Coupling& mu : vs) {
      Rat v = mu.expectation(g);
      if (!best || v < best_v) {
        best = &mu;
        best_v = std::move(v);
      }
    }
    if (!best) throw Error("optimal_coupling: empty vertex list");
    return *best;
  }
  return solve_transport_min(ground(depth - 1), row_distribution(a),
                             row_distribution(b))
      .coupling;
}

KantorovichResult MetricEngine::potential(int depth, int a, int b) {
  if (depth < 1) throw Error("potential: depth must be >= 1");
  if (m_.blocking(a) || m_.blocking(b))
    throw Error("potential: blocking state has no potential");
  return solve_kantorovich_max(ground(depth - 1), row_distribution(a),
                               row_distribution(b));
}

DistanceTable MetricEngine::table(int depth) {
  DistanceTable t;
  t.depth = depth;
  t.method = method_;
  t.n = m_.num_states();
  t.vals.reserve(static_cast<std::size_t>(t.n) * (t.n - 1) / 2);
  for (int i = 0; i < t.n; ++i)
    for (int j = i + 1; j < t.n; ++j) t.vals.push_back(distance(depth, i, j));
  return t;
}

DistanceTable wasserstein_table(const Model& m, int n) {
  return MetricEngine(m, Method::Wasserstein).table(n);
}

DistanceTable kantorovich_table(const Model& m, int n) {
  return MetricEngine(m, Method::Kantorovich).table(n);
}

Rat game_value(const Model& m, int n, int a, int b, int support_bound) {
  return MetricEngine(m, Method::Game, support_bound).distance(n, a, b);
}

Rat cross_distance(const Model& m, int a, const Model& other, int b, int depth,
                   Method method, int support_bound) {
  DisjointUnion du = disjoint_union({&m, &other});
  MetricEngine engine(du.model, method, support_bound);
  return engine.distance(depth, du.injections[0][a], du.injections[1][b]);
}

// ---------------------------------------------------------------------------
// Strategies
// ---------------------------------------------------------------------------

Rat DuplicatorMove::deviation_at(int a, int b) const {
  for (const auto& [x, y, e] : deviation)
    if (x == a && y == b) return e;
  return Rat(0);
}

Rat DuplicatorMove::expected_deviation() const {
  Rat s(0);
  for (const auto& [x, y, p] : mu.entries) s += p * deviation_at(x, y);
  return s;
}

SpoilerStrategy::SpoilerStrategy(std::shared_ptr<MetricEngine> game_tables,
                                 int rounds, GameConfig root)
    : tables_(std::move(game_tables)), rounds_(rounds), root_(std::move(root)) {}

const Rat& SpoilerStrategy::child_value(int rounds_left, int a, int b) const {
  return tables_->distance(rounds_left, a, b);
}

std::pair<int, int> SpoilerStrategy::respond(int rounds_left,
                                             const DuplicatorMove& move) const {
  if (move.mu.entries.empty()) throw Error("spoiler response: empty coupling");
  std::pair<int, int> best{-1, -1};
  Rat best_margin;
  bool first = true;
  for (const auto& [a, b, p] : move.mu.entries) {
    (void)p;
    Rat margin = tables_->distance(rounds_left - 1, a, b) - move.deviation_at(a, b);
    std::pair<int, int> cand{a, b};
    if (first || margin > best_margin ||
        (margin == best_margin && cand < best)) {
      best = cand;
      best_margin = std::move(margin);
      first = false;
    }
  }
  return best;
}

namespace {

struct DuplicatorBuilder {
  MetricEngine& tables;
  DuplicatorStrategy strat;
  std::map<std::tuple<int, int, int>, int> dedupe;  // (rounds_left, a, b) -> node

  int build(const GameConfig& cfg, int rounds_left) {
    // Non-root configurations carry eps equal to the child game value, so the
    // triple (rounds_left, pair) determines them; the root keeps the caller's
    // eps and must not be shared.
    bool is_root = rounds_left == strat.rounds;
    auto key = std::make_tuple(rounds_left, cfg.left, cfg.right);
    if (!is_root) {
      auto it = dedupe.find(key);
      if (it != dedupe.end()) return it->second;
    }
    int idx = static_cast<int>(strat.nodes.size());
    strat.nodes.push_back({cfg, false, {}, {}});
    if (!is_root) dedupe[key] = idx;
    if (rounds_left == 0) return idx;
    const Model& m = tables.model();
    bool ba = m.blocking(cfg.left), bb = m.blocking(cfg.right);
    if ((ba && bb) || cfg.epsilon.is_one()) return idx;  // immediate win rule
    if (ba || bb) return idx;  // only reachable with eps = 1; leaf either way
    DuplicatorMove move;
    move.mu = tables.optimal_coupling(rounds_left, cfg.left, cfg.right);
    for (const auto& [a, b, p] : move.mu.entries) {
      (void)p;
      move.deviation.emplace_back(a, b, tables.distance(rounds_left - 1, a, b));
    }
    std::map<std::pair<int, int>, int> children;
    for (const auto& [a, b, p] : move.mu.entries) {
      (void)p;
      GameConfig child{a, b, tables.distance(rounds_left - 1, a, b)};
      children[{a, b}] = build(child, rounds_left - 1);
    }
    strat.nodes[idx].has_move = true;
    strat.nodes[idx].move = std::move(move);
    strat.nodes[idx].children = std::move(children);
    return idx;
  }
};

}  // namespace

Strategy extract_strategy(const Model& m, int n, int a, int b, const Rat& eps,
                          int support_bound) {
  if (!eps.in_unit()) throw Error("extract_strategy: eps must be in [0,1]");
  auto tables = std::make_shared<MetricEngine>(m, Method::Game, support_bound);
  const Rat& value = tables->distance(n, a, b);
  GameConfig root{a, b, eps};
  if (eps >= value) {
    DuplicatorBuilder builder{*tables, {}, {}};
    builder.strat.rounds = n;
    builder.build(root, n);
    return builder.strat;
  }
  return SpoilerStrategy(tables, n, root);
}

namespace {

std::string cfg_str(const Model& m, const GameConfig& c, int rounds_left) {
  std::ostringstream os;
  os << "(" << m.state_name(c.left) << ", " << m.state_name(c.right) << ", "
     << c.epsilon.str() << ") with " << rounds_left << " round(s) left";
  return os.str();
}

struct DuplicatorVerifier {
  const Model& m;
  const DuplicatorStrategy& strat;
  VerifyResult result;

  // winning condition, checked before every round
  bool condition(const GameConfig& cfg, int rounds_left) {
    for (std::size_t ai = 0; ai < m.atom_names().size(); ++ai) {
      Rat d = abs_diff(m.atom(static_cast<int>(ai), cfg.left),
                       m.atom(static_cast<int>(ai), cfg.right));
      if (d > cfg.epsilon) {
        result.trace.push_back(
            "winning condition fails at " + cfg_str(m, cfg, rounds_left) +
            ": atom " + m.atom_names()[ai] + " deviates by " + d.str());
        return false;
      }
    }
    return true;
  }

  // eps is the budget actually in force: the requested one at the root (which
  // may differ from the recorded one when replaying a strategy under a
  // tighter budget), the assigned deviation below.
  bool walk(int node_idx, int rounds_left, const Rat& eps) {
    const auto& node = strat.nodes[node_idx];
    GameConfig cfg{node.config.left, node.config.right, eps};
    if (rounds_left == 0) return true;  // no condition check after the last round
    if (!condition(cfg, rounds_left)) return false;
    bool ba = m.blocking(cfg.left), bb = m.blocking(cfg.right);
    if ((ba && bb) || cfg.epsilon.is_one()) return true;  // D wins outright
    if (ba || bb) {
      result.trace.push_back("Spoiler wins at " + cfg_str(m, cfg, rounds_left) +
                             ": exactly one state is blocking and eps < 1");
      return false;
    }
    if (!node.has_move)
      throw IncompleteStrategyError("no move recorded at " +
                                    cfg_str(m, cfg, rounds_left));
    const DuplicatorMove& move = node.move;
    Distribution pa{m.row(cfg.left).entries};
    Distribution pb{m.row(cfg.right).entries};
    if (!coupling_has_marginals(move.mu, pa, pb)) {
      result.trace.push_back("illegal coupling at " + cfg_str(m, cfg, rounds_left));
      return false;
    }
    for (const auto& [x, y, e] : move.deviation) {
      (void)x;
      (void)y;
      if (!e.in_unit()) {
        result.trace.push_back("deviation out of [0,1] at " +
                               cfg_str(m, cfg, rounds_left));
        return false;
      }
    }
    Rat expected = move.expected_deviation();
    if (expected > cfg.epsilon) {
      result.trace.push_back("E_mu(eps') = " + expected.str() + " > eps = " +
                             cfg.epsilon.str() + " at " +
                             cfg_str(m, cfg, rounds_left));
      return false;
    }
    // Spoiler's choices range over all mu-positive pairs
    for (const auto& [a, b, p] : move.mu.entries) {
      (void)p;
      auto it = node.children.find({a, b});
      if (it == node.children.end())
        throw IncompleteStrategyError(
            "no child for Spoiler pick (" + m.state_name(a) + ", " +
            m.state_name(b) + ") at " + cfg_str(m, cfg, rounds_left));
      const auto& child = strat.nodes[it->second];
      Rat assigned = move.deviation_at(a, b);
      if (child.config.left != a || child.config.right != b) {
        result.trace.push_back("child configuration mismatch under pick (" +
                               m.state_name(a) + ", " + m.state_name(b) + ")");
        return false;
      }
      if (!walk(it->second, rounds_left - 1, assigned)) {
        result.trace.push_back("...reached via Spoiler pick (" + m.state_name(a) +
                               ", " + m.state_name(b) + ") from " +
                               cfg_str(m, cfg, rounds_left));
        return false;
      }
    }
    return true;
  }
};

struct SpoilerVerifier {
  const Model& m;
  const SpoilerStrategy& strat;
  MetricEngine& tables;
  VerifyResult result;

  bool walk(const GameConfig& cfg, int rounds_left) {
    // value certificate: Spoiler can only win below the game value
    const Rat& value = tables.distance(rounds_left, cfg.left, cfg.right);
    if (!(cfg.epsilon < value)) {
      result.trace.push_back("Duplicator wins from " +
                             cfg_str(m, cfg, rounds_left) + ": eps >= d_" +
                             std::to_string(rounds_left) + " = " + value.str());
      return false;
    }
    // rounds_left >= 1 from here: d_0 = 0 admits no eps < 0
    Rat atoms(0);
    for (std::size_t ai = 0; ai < m.atom_names().size(); ++ai)
      atoms = rat_max(atoms, abs_diff(m.atom(static_cast<int>(ai), cfg.left),
                                      m.atom(static_cast<int>(ai), cfg.right)));
    if (atoms > cfg.epsilon) return true;  // condition breached, Spoiler wins now
    bool ba = m.blocking(cfg.left), bb = m.blocking(cfg.right);
    if ((ba && bb) || cfg.epsilon.is_one()) {
      result.trace.push_back("Duplicator wins outright at " +
                             cfg_str(m, cfg, rounds_left));
      return false;
    }
    if (ba || bb) return true;  // exactly one blocking, eps < 1
    // canonical Duplicator family: every vertex coupling, three deviation splits
    const auto& vs = tables.vertices(std::min(cfg.left, cfg.right),
                                     std::max(cfg.left, cfg.right));
    for (const Coupling& vertex : vs) {
      Coupling mu = vertex;
      if (cfg.left > cfg.right)  // vertices are cached for the sorted pair
        for (auto& [x, y, p] : mu.entries) std::swap(x, y);
      std::vector<DuplicatorMove> moves;
      DuplicatorMove childvals;
      childvals.mu = mu;
      for (const auto& [x, y, p] : mu.entries) {
        (void)p;
        childvals.deviation.emplace_back(x, y,
                                         tables.distance(rounds_left - 1, x, y));
      }
      if (childvals.expected_deviation() <= cfg.epsilon)
        moves.push_back(childvals);
      DuplicatorMove uniform;
      uniform.mu = mu;
      for (const auto& [x, y, p] : mu.entries) {
        (void)p;
        uniform.deviation.emplace_back(x, y, cfg.epsilon);
      }
      moves.push_back(uniform);
      DuplicatorMove zero;
      zero.mu = mu;
      moves.push_back(zero);
      for (const DuplicatorMove& move : moves) {
        auto [a, b] = strat.respond(rounds_left, move);
        bool positive = false;
        for (const auto& [x, y, p] : move.mu.entries)
          if (x == a && y == b && p.sign() > 0) positive = true;
        if (!positive) {
          result.trace.push_back("Spoiler response picked a zero-mass pair at " +
                                 cfg_str(m, cfg, rounds_left));
          return false;
        }
        Rat assigned = move.deviation_at(a, b);
        const Rat& child = tables.distance(rounds_left - 1, a, b);
        if (!(assigned < child)) {
          result.trace.push_back(
              "Spoiler response loses the value certificate at " +
              cfg_str(m, cfg, rounds_left) + ": picked (" + m.state_name(a) +
              ", " + m.state_name(b) + ") with eps' = " + assigned.str() +
              " >= d_" + std::to_string(rounds_left - 1) + " = " + child.str());
          return false;
        }
        if (!walk({a, b, assigned}, rounds_left - 1)) return false;
      }
    }
    return true;
  }
};

}  // namespace

VerifyResult verify_strategy(const Model& m, int n, const GameConfig& config,
                             const Strategy& strategy, int support_bound) {
  if (const auto* dup = std::get_if<DuplicatorStrategy>(&strategy)) {
    if (dup->nodes.empty()) {
      if (n == 0) return {true, {}};
      throw IncompleteStrategyError("empty Duplicator strategy");
    }
    const GameConfig& root = dup->nodes[0].config;
    if (root.left != config.left || root.right != config.right)
      return {false, {"strategy root does not match the requested pair"}};
    DuplicatorVerifier v{m, *dup, {}};
    v.result.ok = v.walk(0, n, config.epsilon);
    return std::move(v.result);
  }
  const auto& sp = std::get<SpoilerStrategy>(strategy);
  MetricEngine tables(m, Method::Game, support_bound);
  SpoilerVerifier v{m, sp, tables, {}};
  v.result.ok = v.walk(config, n);
  return std::move(v.result);
}

// ---------------------------------------------------------------------------
// Logical lower bound and locality
// ---------------------------------------------------------------------------

LogicalLbResult logical_lb_table(const Model& m, int n, std::size_t budget,
                                 const std::vector<Rat>& grid) {
  LogicalLbResult out;
  out.table.depth = n;
  out.table.method = Method::LogicalLB;
  out.table.n = m.num_states();
  std::size_t pairs = static_cast<std::size_t>(out.table.n) * (out.table.n - 1) / 2;
  out.table.vals.assign(pairs, Rat(0));
  out.witnesses.assign(pairs, nullptr);
  ConceptEnumerator en(n, /*max_size=*/64, grid, m.atom_names(), m.designated_role());
  for (std::size_t count = 0; count < budget; ++count) {
    auto c = en.next();
    if (!c) break;
    ++out.concepts_used;
    Valuation v = eval_concept(m, *c);
    std::size_t idx = 0;
    for (int i = 0; i < out.table.n; ++i)
      for (int j = i + 1; j < out.table.n; ++j, ++idx) {
        Rat gap = abs_diff(v[i], v[j]);
        if (gap > out.table.vals[idx]) {
          out.table.vals[idx] = std::move(gap);
          out.witnesses[idx] = *c;
        }
      }
  }
  return out;
}

LocalityResult locality_check(const Model& m, int a, const Formula& phi, int k) {
  auto fv = free_vars(phi);
  if (fv.size() > 1)
    throw Error("locality_check: formula must have at most one free variable");
  LocalityResult res;
  Env env;
  if (!fv.empty()) env[*fv.begin()] = a;
  res.full = eval_formula(m, phi, env);
  Model restricted = restrict_model(m, a, k);
  Env env2;
  if (!fv.empty()) env2[*fv.begin()] = restricted.state_index(m.state_name(a));
  res.restricted = eval_formula(restricted, phi, env2);
  res.equal = res.full == res.restricted;
  return res;
}

}  // namespace pfml
