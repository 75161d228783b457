#include "pfml/workbench.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "pfml/errors.hpp"
#include "pfml/semantics.hpp"

namespace pfml {

Model fixture_m1() {
  RawModel raw;
  raw.states = {"a", "b", "c"};
  raw.atoms["A"] = {{"a", "3/10"}, {"b", "1"}, {"c", "0"}};
  raw.roles["r"]["a"] = {{"b", "1/2"}, {"c", "1/2"}};
  raw.roles["r"]["b"] = {};
  raw.roles["r"]["c"] = {{"c", "1"}};
  auto out = validate_model(raw);
  if (!out.ok()) throw Error("fixture m1 failed validation");
  return *std::move(out.model);
}

Model fixture_m2() {
  RawModel raw;
  raw.states = {"s", "t", "u", "v"};
  raw.atoms["A"] = {{"s", "1/2"}, {"t", "1/4"}, {"u", "1"}, {"v", "0"}};
  raw.atoms["B"] = {{"s", "0"}, {"t", "1/3"}, {"u", "2/3"}, {"v", "1"}};
  raw.roles["r"]["s"] = {{"t", "1/3"}, {"u", "2/3"}};
  raw.roles["r"]["t"] = {{"v", "1"}};
  raw.roles["r"]["u"] = {{"u", "1/2"}, {"v", "1/2"}};
  raw.roles["r"]["v"] = {};
  raw.roles["s"]["s"] = {{"s", "1"}};
  auto out = validate_model(raw);
  if (!out.ok()) throw Error("fixture m2 failed validation");
  return *std::move(out.model);
}

std::uint64_t draw(std::mt19937_64& rng, std::uint64_t bound) {
  return bound == 0 ? 0 : rng() % bound;
}

Rat random_unit_rat(std::mt19937_64& rng, int denom_bound) {
  unsigned long den = 1 + draw(rng, static_cast<std::uint64_t>(denom_bound));
  long num = static_cast<long>(draw(rng, den + 1));
  return Rat(num, den);
}

namespace {

// k distinct values from [0, n), order of selection
std::vector<int> sample_distinct(std::mt19937_64& rng, int n, int k) {
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < k; ++i)
    std::swap(pool[i], pool[i + draw(rng, static_cast<std::uint64_t>(n - i))]);
  pool.resize(k);
  return pool;
}

// random distribution with denominator den over `targets`: a composition of
// den into |targets| positive parts via distinct cut points
std::vector<Rat> random_composition(std::mt19937_64& rng, unsigned long den, int parts) {
  std::vector<int> cuts = sample_distinct(rng, static_cast<int>(den) - 1, parts - 1);
  for (int& c : cuts) ++c;  // cut points in 1..den-1
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(static_cast<int>(den));
  std::vector<Rat> out;
  int prev = 0;
  for (int c : cuts) {
    out.push_back(Rat(c - prev, den));
    prev = c;
  }
  return out;
}

}  // namespace

Model random_model(std::mt19937_64& rng, int size_bound, int denom_bound) {
  if (size_bound < 2) throw Error("random_model: size bound must be >= 2");
  int n = 2 + static_cast<int>(draw(rng, static_cast<std::uint64_t>(size_bound - 1)));
  RawModel raw;
  for (int i = 0; i < n; ++i) raw.states.push_back("s" + std::to_string(i));
  raw.atoms["A"];
  raw.atoms["B"];
  for (const char* atom : {"A", "B"})
    for (int i = 0; i < n; ++i) {
      Rat v = random_unit_rat(rng, denom_bound);
      if (!v.is_zero()) raw.atoms[atom][raw.states[i]] = v.str();
    }
  for (int i = 0; i < n; ++i) {
    if (draw(rng, 4) == 0) continue;  // blocking row
    unsigned long den = 1 + draw(rng, static_cast<std::uint64_t>(denom_bound));
    int max_support = std::min<int>(n, static_cast<int>(den));
    int k = 1 + static_cast<int>(draw(rng, static_cast<std::uint64_t>(max_support)));
    auto targets = sample_distinct(rng, n, k);
    auto masses = random_composition(rng, den, k);
    auto& row = raw.roles["r"][raw.states[i]];
    for (int t = 0; t < k; ++t) row[raw.states[targets[t]]] = masses[t].str();
  }
  raw.roles["r"];  // ensure the designated role exists even if all rows block
  auto out = validate_model(raw);
  if (!out.ok()) throw Error("random_model produced an invalid model");
  return *std::move(out.model);
}

std::vector<Model> random_models(int count, int size_bound, int denom_bound,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Model> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i)
    out.push_back(random_model(rng, size_bound, denom_bound));
  return out;
}

Concept random_concept(std::mt19937_64& rng, int max_rank,
                       const std::vector<Rat>& grid,
                       const std::vector<std::string>& atoms,
                       const std::string& role, int size_budget) {
  auto grid_pick = [&]() { return grid[draw(rng, grid.size())]; };
  if (size_budget <= 1) {
    if (max_rank >= 1 && !atoms.empty() && draw(rng, 2) == 0)
      return c_atom(atoms[draw(rng, atoms.size())]);
    return c_const(grid_pick());
  }
  switch (draw(rng, 6)) {
    case 0:
      return c_const(grid_pick());
    case 1:
      if (max_rank >= 1 && !atoms.empty())
        return c_atom(atoms[draw(rng, atoms.size())]);
      return c_const(grid_pick());
    case 2:
      return c_sub(random_concept(rng, max_rank, grid, atoms, role, size_budget - 1),
                   grid_pick());
    case 3:
      return c_neg(random_concept(rng, max_rank, grid, atoms, role, size_budget - 1));
    case 4: {
      int left = 1 + static_cast<int>(draw(rng, static_cast<std::uint64_t>(size_budget - 1)));
      Concept l = random_concept(rng, max_rank, grid, atoms, role, left);
      Concept r = random_concept(rng, max_rank, grid, atoms, role, size_budget - 1 - left);
      return draw(rng, 2) == 0 ? c_and(std::move(l), std::move(r))
                               : c_or(std::move(l), std::move(r));
    }
    default:
      if (max_rank >= 1)
        return c_dia(random_concept(rng, max_rank - 1, grid, atoms, role,
                                    size_budget - 1),
                     role);
      return c_sub(random_concept(rng, max_rank, grid, atoms, role, size_budget - 1),
                   grid_pick());
  }
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

namespace {

std::string pair_str(const Model& m, int i, int j) {
  return "(" + m.state_name(i) + ", " + m.state_name(j) + ")";
}

std::vector<Rat> default_grid() {
  return {Rat(0), Rat(1, 2), Rat(1)};
}

}  // namespace

SuiteOutcome suite_coincidence(const std::vector<Model>& models, int max_depth,
                               int support_bound) {
  SuiteOutcome out;
  out.suite = "coincidence";
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const Model& m = models[mi];
    MetricEngine w(m, Method::Wasserstein);
    MetricEngine k(m, Method::Kantorovich);
    MetricEngine g(m, Method::Game, support_bound);
    SynthesisSession synth(m);
    bool model_ok = true;
    for (int depth = 0; depth <= max_depth && model_ok; ++depth)
      for (int i = 0; i < m.num_states() && model_ok; ++i)
        for (int j = i + 1; j < m.num_states(); ++j) {
          const Rat& dw = w.distance(depth, i, j);
          const Rat& dk = k.distance(depth, i, j);
          const Rat& dg = g.distance(depth, i, j);
          WitnessCertificate cert = synth.witness(depth, i, j);
          if (dw != dk || dw != dg || !cert.valid || cert.achieved != dw) {
            std::ostringstream os;
            os << "model " << mi << " pair " << pair_str(m, i, j) << " depth "
               << depth << ": W=" << dw.str() << " K=" << dk.str()
               << " G=" << dg.str() << " witness=" << cert.achieved.str();
            out.fail(os.str());
            model_ok = false;
            break;
          }
        }
    if (model_ok) out.ok();
  }
  return out;
}

SuiteOutcome suite_duality(int instances, int max_support, int denom_bound,
                           std::uint64_t seed) {
  SuiteOutcome out;
  out.suite = "duality";
  std::mt19937_64 rng(seed);
  for (int it = 0; it < instances; ++it) {
    int universe = 2 + static_cast<int>(draw(rng, 5));  // 2..6 points
    // random pseudometric: symmetrized values pushed through min-plus closure
    std::vector<std::vector<Rat>> d(universe, std::vector<Rat>(universe, Rat(0)));
    for (int i = 0; i < universe; ++i)
      for (int j = i + 1; j < universe; ++j)
        d[i][j] = d[j][i] = random_unit_rat(rng, denom_bound);
    for (int k = 0; k < universe; ++k)
      for (int i = 0; i < universe; ++i)
        for (int j = 0; j < universe; ++j)
          if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
    auto random_dist = [&]() {
      unsigned long den = 1 + draw(rng, static_cast<std::uint64_t>(denom_bound));
      int bound = std::min<int>({universe, static_cast<int>(den), max_support});
      int k = 1 + static_cast<int>(draw(rng, static_cast<std::uint64_t>(bound)));
      auto pts = sample_distinct(rng, universe, k);
      std::sort(pts.begin(), pts.end());
      auto masses = random_composition(rng, den, k);
      Distribution dist;
      for (int t = 0; t < k; ++t) dist.mass.emplace_back(pts[t], masses[t]);
      return dist;
    };
    Distribution p1 = random_dist();
    Distribution p2 = random_dist();
    GroundFn ground = [&](int i, int j) { return d[i][j]; };
    TransportResult primal = solve_transport_min(ground, p1, p2);
    KantorovichResult dual = solve_kantorovich_max(ground, p1, p2);
    if (primal.value != dual.value) {
      out.fail("instance " + std::to_string(it) + ": primal " +
               primal.value.str() + " != dual " + dual.value.str());
      continue;
    }
    if (!weak_duality_holds(ground, p1, p2, primal.coupling, dual.potential)) {
      out.fail("instance " + std::to_string(it) + ": weak duality fired");
      continue;
    }
    out.ok();
  }
  return out;
}

SuiteOutcome suite_diamond_nonexpansive(const std::vector<Model>& models,
                                        int pairs_per_model, int denom_bound,
                                        std::uint64_t seed) {
  SuiteOutcome out;
  out.suite = "diamond-nonexpansive";
  std::mt19937_64 rng(seed);
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const Model& m = models[mi];
    for (int it = 0; it < pairs_per_model; ++it) {
      Valuation f(m.num_states()), g(m.num_states());
      for (int s = 0; s < m.num_states(); ++s) {
        f[s] = random_unit_rat(rng, denom_bound);
        g[s] = random_unit_rat(rng, denom_bound);
      }
      Valuation df = apply_diamond(m, f);
      Valuation dg = apply_diamond(m, g);
      Rat in(0), outn(0);
      for (int s = 0; s < m.num_states(); ++s) {
        in = rat_max(in, abs_diff(f[s], g[s]));
        outn = rat_max(outn, abs_diff(df[s], dg[s]));
      }
      if (outn > in)
        out.fail("model " + std::to_string(mi) + " sample " + std::to_string(it) +
                 ": ||<>f - <>g|| = " + outn.str() + " > ||f - g|| = " + in.str());
      else
        out.ok();
    }
  }
  return out;
}

SuiteOutcome suite_rank_invariance(const std::vector<Model>& models,
                                   int concepts_per_model, int max_rank) {
  SuiteOutcome out;
  out.suite = "rank-invariance";
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const Model& m = models[mi];
    MetricEngine w(m, Method::Wasserstein);
    auto concepts = enumerate_concepts(max_rank, 64, default_grid(), m.atom_names(),
                                       m.designated_role(),
                                       static_cast<std::size_t>(concepts_per_model));
    for (const Concept& c : concepts) {
      int r = rank(c);
      Valuation v = eval_concept(m, c);
      bool good = true;
      for (int i = 0; i < m.num_states() && good; ++i)
        for (int j = i + 1; j < m.num_states(); ++j) {
          Rat gap = abs_diff(v[i], v[j]);
          if (gap > w.distance(r, i, j) || gap > w.distance(max_rank, i, j)) {
            out.fail("model " + std::to_string(mi) + " concept " +
                     print_concept(c) + " pair " + pair_str(m, i, j) +
                     ": gap " + gap.str() + " exceeds d_" + std::to_string(r));
            good = false;
            break;
          }
        }
      if (good) out.ok();
    }
  }
  return out;
}

SuiteOutcome suite_monotone(const std::vector<Model>& models, int max_depth) {
  SuiteOutcome out;
  out.suite = "monotone";
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const Model& m = models[mi];
    MetricEngine w(m, Method::Wasserstein);
    std::vector<DistanceTable> tables;
    for (int depth = 0; depth <= max_depth; ++depth) tables.push_back(w.table(depth));
    bool good = true;
    for (int depth = 0; depth + 1 <= max_depth && good; ++depth)
      for (int i = 0; i < m.num_states() && good; ++i)
        for (int j = i + 1; j < m.num_states(); ++j)
          if (tables[depth].at(i, j) > tables[depth + 1].at(i, j)) {
            out.fail("model " + std::to_string(mi) + " pair " + pair_str(m, i, j) +
                     ": d_" + std::to_string(depth) + " > d_" +
                     std::to_string(depth + 1));
            good = false;
            break;
          }
    for (int depth = 0; depth <= max_depth && good; ++depth) {
      for (const Rat& v : tables[depth].vals)
        if (!v.in_unit()) {
          out.fail("model " + std::to_string(mi) + ": value outside [0,1]");
          good = false;
          break;
        }
      if (auto bad = tables[depth].triangle_violation()) {
        out.fail("model " + std::to_string(mi) + " depth " + std::to_string(depth) +
                 ": triangle inequality fails at (" + m.state_name((*bad)[0]) +
                 ", " + m.state_name((*bad)[1]) + ", " + m.state_name((*bad)[2]) + ")");
        good = false;
      }
    }
    if (good) out.ok();
  }
  return out;
}

SuiteOutcome suite_locality(const std::vector<Model>& models, int samples,
                            int max_rank, std::uint64_t seed) {
  SuiteOutcome out;
  out.suite = "locality";
  std::mt19937_64 rng(seed);
  auto grid = default_grid();
  for (int it = 0; it < samples; ++it) {
    const Model& m = models[draw(rng, models.size())];
    Concept c = random_concept(rng, max_rank, grid, m.atom_names(),
                               m.designated_role(), 6);
    int k = rank(c);
    int a = static_cast<int>(draw(rng, static_cast<std::uint64_t>(m.num_states())));
    Formula phi = standard_translation(c, "x");
    LocalityResult lr = locality_check(m, a, phi, k);
    if (!lr.equal)
      out.fail("sample " + std::to_string(it) + ": concept " + print_concept(c) +
               " of rank " + std::to_string(k) + " not " + std::to_string(k) +
               "-local at " + m.state_name(a) + " (" + lr.full.str() + " vs " +
               lr.restricted.str() + ")");
    else
      out.ok();
  }
  return out;
}

SuiteOutcome suite_translation(const std::vector<Model>& models, int samples,
                               int max_rank, std::uint64_t seed) {
  SuiteOutcome out;
  out.suite = "translation";
  std::mt19937_64 rng(seed);
  auto grid = default_grid();
  for (int it = 0; it < samples; ++it) {
    const Model& m = models[draw(rng, models.size())];
    Concept c = random_concept(rng, max_rank, grid, m.atom_names(),
                               m.designated_role(), 7);
    Formula phi = standard_translation(c, "x");
    if (qrank(phi) != rank(c)) {
      out.fail("sample " + std::to_string(it) + ": qrank(ST(C)) != rank(C) for " +
               print_concept(c));
      continue;
    }
    int a = static_cast<int>(draw(rng, static_cast<std::uint64_t>(m.num_states())));
    Rat lhs = eval_concept(m, c)[a];
    Env env;
    if (free_vars(phi).count("x")) env["x"] = a;
    Rat rhs = eval_formula(m, phi, env);
    if (lhs != rhs)
      out.fail("sample " + std::to_string(it) + ": C(a) = " + lhs.str() +
               " but ST_x(C)(a) = " + rhs.str() + " for " + print_concept(c));
    else
      out.ok();
  }
  return out;
}

SuiteOutcome suite_unravel(const std::vector<Model>& models, int max_k) {
  SuiteOutcome out;
  out.suite = "unravel";
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const Model& m = models[mi];
    bool good = true;
    for (int a = 0; a < m.num_states() && good; ++a) {
      for (int k = 0; k <= max_k && good; ++k) {
        Model restricted = restrict_model(m, a, k);
        int ar = restricted.state_index(m.state_name(a));
        DisjointUnion du = disjoint_union({&m, &restricted});
        MetricEngine engine(du.model, Method::Wasserstein);
        const Rat& dr = engine.distance(k, du.injections[0][a], du.injections[1][ar]);
        if (!dr.is_zero()) {
          out.fail("model " + std::to_string(mi) + ": d_" + std::to_string(k) +
                   "(" + m.state_name(a) + ", restrict_" + std::to_string(k) +
                   ") = " + dr.str());
          good = false;
          break;
        }
        auto [tree, root] = unravel(m, a, k);
        DisjointUnion du2 = disjoint_union({&m, &tree});
        MetricEngine engine2(du2.model, Method::Wasserstein);
        for (int depth = 0; depth <= k; ++depth) {
          const Rat& dn =
              engine2.distance(depth, du2.injections[0][a], du2.injections[1][root]);
          if (!dn.is_zero()) {
            out.fail("model " + std::to_string(mi) + ": d_" + std::to_string(depth) +
                     "(" + m.state_name(a) + ", unravel_" + std::to_string(k) +
                     " root) = " + dn.str());
            good = false;
            break;
          }
        }
      }
    }
    if (good) out.ok();
  }
  return out;
}

SuiteOutcome suite_union(const std::vector<Model>& models, int max_depth) {
  SuiteOutcome out;
  out.suite = "union";
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const Model& m = models[mi];
    DisjointUnion du = disjoint_union({&m, &m});
    MetricEngine engine(du.model, Method::Wasserstein);
    bool good = true;
    for (int a = 0; a < m.num_states() && good; ++a)
      for (int depth = 0; depth <= max_depth; ++depth) {
        const Rat& d = engine.distance(depth, du.injections[0][a], du.injections[1][a]);
        if (!d.is_zero()) {
          out.fail("model " + std::to_string(mi) + ": d_" + std::to_string(depth) +
                   "(" + m.state_name(a) + ", its copy) = " + d.str());
          good = false;
          break;
        }
      }
    // concept values are invariant under the embedding into the union
    auto concepts = enumerate_concepts(std::min(max_depth, 3), 5, default_grid(),
                                       m.atom_names(), m.designated_role(), 40);
    for (const Concept& c : concepts) {
      if (!good) break;
      Valuation v = eval_concept(m, c);
      Valuation vu = eval_concept(du.model, c);
      for (int a = 0; a < m.num_states(); ++a)
        if (v[a] != vu[du.injections[0][a]]) {
          out.fail("model " + std::to_string(mi) + ": concept " + print_concept(c) +
                   " changes value under disjoint union at " + m.state_name(a));
          good = false;
          break;
        }
    }
    if (good) out.ok();
  }
  return out;
}

SuiteOutcome suite_strategies(const std::vector<Model>& models, int max_depth,
                              int support_bound) {
  SuiteOutcome out;
  out.suite = "strategies";
  const Rat hundredth(1, 100);
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const Model& m = models[mi];
    MetricEngine game(m, Method::Game, support_bound);
    bool good = true;
    for (int n = 0; n <= max_depth && good; ++n)
      for (int i = 0; i < m.num_states() && good; ++i)
        for (int j = i + 1; j < m.num_states(); ++j) {
          Rat value = game.distance(n, i, j);
          Strategy dup = extract_strategy(m, n, i, j, value, support_bound);
          VerifyResult vr = verify_strategy(m, n, {i, j, value}, dup, support_bound);
          if (!vr.ok) {
            out.fail("model " + std::to_string(mi) + " pair " + pair_str(m, i, j) +
                     " depth " + std::to_string(n) +
                     ": Duplicator strategy failed at eps = d_n" +
                     (vr.trace.empty() ? "" : " (" + vr.trace.front() + ")"));
            good = false;
            break;
          }
          if (value.sign() > 0) {
            for (const Rat& eps : {rat_max(Rat(0), value - hundredth), Rat(0)}) {
              Strategy sp = extract_strategy(m, n, i, j, eps, support_bound);
              if (!std::holds_alternative<SpoilerStrategy>(sp)) {
                out.fail("expected a Spoiler strategy below the game value");
                good = false;
                break;
              }
              VerifyResult sr = verify_strategy(m, n, {i, j, eps}, sp, support_bound);
              if (!sr.ok) {
                out.fail("model " + std::to_string(mi) + " pair " +
                         pair_str(m, i, j) + " depth " + std::to_string(n) +
                         ": Spoiler strategy failed at eps = " + eps.str() +
                         (sr.trace.empty() ? "" : " (" + sr.trace.front() + ")"));
                good = false;
                break;
              }
            }
          }
          if (!good) break;
        }
    if (good) out.ok();
  }
  return out;
}

std::vector<SuiteOutcome> run_suites(const CheckRequest& req) {
  std::vector<SuiteOutcome> out;
  for (const std::string& name : req.suites) {
    if (name == "coincidence") {
      out.push_back(suite_coincidence(req.models, req.depth));
    } else if (name == "duality") {
      out.push_back(suite_duality(500, 5, req.denom_bound, req.seed));
    } else if (name == "nonexpansive") {
      out.push_back(suite_diamond_nonexpansive(req.models, 200, req.denom_bound,
                                               req.seed));
      out.push_back(suite_rank_invariance(req.models, 200, std::min(req.depth, 3)));
    } else if (name == "monotone") {
      out.push_back(suite_monotone(req.models, req.depth));
    } else if (name == "locality") {
      out.push_back(suite_locality(req.models, 100, 2, req.seed));
    } else if (name == "translation") {
      out.push_back(suite_translation(req.models, 500, 3, req.seed));
    } else if (name == "unravel") {
      out.push_back(suite_unravel(req.models, std::min(req.depth, 3)));
    } else if (name == "union") {
      out.push_back(suite_union(req.models, req.depth));
    } else if (name == "strategies") {
      out.push_back(suite_strategies(req.models, std::min(req.depth, 3)));
    } else {
      throw Error("unknown suite: " + name);
    }
  }
  return out;
}

}  // namespace pfml
