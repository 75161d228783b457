#include "pfml/lp.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>

#include <gmpxx.h>

#include "pfml/errors.hpp"

namespace pfml {

Rat Distribution::total() const {
  Rat s(0);
  for (const auto& [_, p] : mass) s += p;
  return s;
}

Rat Coupling::expectation(const std::function<Rat(int, int)>& f) const {
  Rat s(0);
  for (const auto& [i, j, p] : entries) s += p * f(i, j);
  return s;
}

Rat Potential::at(int point) const {
  for (const auto& [p, v] : values)
    if (p == point) return v;
  return Rat(0);
}

Rat Potential::expectation(const Distribution& pi) const {
  Rat s(0);
  for (const auto& [p, m] : pi.mass) s += m * at(p);
  return s;
}

namespace {

void require_proper(const Distribution& pi, const char* which) {
  if (pi.zero())
    throw MarginalInvalidError(std::string(which) + ": zero function where a "
                               "probability distribution is required");
  Rat s(0);
  for (const auto& [p, m] : pi.mass) {
    (void)p;
    if (m.sign() <= 0)
      throw MarginalInvalidError(std::string(which) + ": nonpositive mass entry");
    s += m;
  }
  if (!s.is_one())
    throw MarginalInvalidError(std::string(which) + ": masses sum to " + s.str() +
                               ", expected 1");
}

// ---------------------------------------------------------------------------
// Exact two-phase primal simplex on a dense rational tableau, Bland's rule.
//
// maximize c.x  subject to  A x (=|<=) b,  x >= 0,  with b >= 0 expected
// (both LPs built here satisfy that). Artificial variables are added for
// equality rows; phase one drives them to zero.
// ---------------------------------------------------------------------------

enum class RowRel { Eq, Le };

struct SimplexResult {
  Rat value;
  std::vector<Rat> x;
};

class Simplex {
 public:
  Simplex(int nvars, std::vector<std::vector<Rat>> rows, std::vector<RowRel> rels,
          std::vector<Rat> rhs, std::vector<Rat> objective)
      : nvars_(nvars), obj_(std::move(objective)) {
    int m = static_cast<int>(rows.size());
    int nslack = 0;
    for (RowRel r : rels)
      if (r == RowRel::Le) ++nslack;
    int nart = 0;
    for (RowRel r : rels)
      if (r == RowRel::Eq) ++nart;
    ncols_ = nvars_ + nslack + nart;
    first_art_ = nvars_ + nslack;
    tab_.assign(m, std::vector<Rat>(ncols_ + 1, Rat(0)));
    basis_.assign(m, -1);
    int slack_at = nvars_;
    int art_at = first_art_;
    for (int i = 0; i < m; ++i) {
      if (rhs[i].sign() < 0) throw Error("simplex: negative rhs not supported here");
      for (int j = 0; j < nvars_; ++j) tab_[i][j] = rows[i][j];
      tab_[i][ncols_] = rhs[i];
      if (rels[i] == RowRel::Le) {
        tab_[i][slack_at] = Rat(1);
        basis_[i] = slack_at++;
      } else {
        tab_[i][art_at] = Rat(1);
        basis_[i] = art_at++;
      }
    }
  }

  SimplexResult solve() {
    if (first_art_ < ncols_) phase_one();
    run(phase_two_costs(), /*allow_art=*/false);
    std::vector<Rat> x(nvars_, Rat(0));
    for (int i = 0; i < rows(); ++i)
      if (basis_[i] < nvars_) x[basis_[i]] = tab_[i][ncols_];
    Rat value(0);
    for (int j = 0; j < nvars_; ++j) value += obj_[j] * x[j];
    return {std::move(value), std::move(x)};
  }

 private:
  int rows() const { return static_cast<int>(tab_.size()); }

  std::vector<Rat> phase_two_costs() const {
    std::vector<Rat> c(ncols_, Rat(0));
    for (int j = 0; j < nvars_; ++j) c[j] = obj_[j];
    return c;
  }

  void phase_one() {
    std::vector<Rat> c(ncols_, Rat(0));
    for (int j = first_art_; j < ncols_; ++j) c[j] = Rat(-1);
    run(c, /*allow_art=*/true);
    Rat infeas(0);
    for (int i = 0; i < rows(); ++i)
      if (basis_[i] >= first_art_) infeas += tab_[i][ncols_];
    if (!infeas.is_zero()) throw MarginalInvalidError("transport LP infeasible");
    // pivot remaining (degenerate) artificials out of the basis
    for (int i = 0; i < rows(); ++i) {
      if (basis_[i] < first_art_) continue;
      int enter = -1;
      for (int j = 0; j < first_art_; ++j)
        if (!tab_[i][j].is_zero()) { enter = j; break; }
      if (enter >= 0) {
        pivot(i, enter);
      } else {
        // redundant constraint: the whole row is zero; drop it
        tab_.erase(tab_.begin() + i);
        basis_.erase(basis_.begin() + i);
        --i;
      }
    }
  }

  // Bland's rule: entering = lowest-index improving column; leaving = lowest
  // basis index among minimum-ratio rows. Guarantees termination with exact
  // arithmetic even on degenerate bases.
  void run(const std::vector<Rat>& costs, bool allow_art) {
    std::vector<Rat> zrow(ncols_ + 1, Rat(0));
    auto recompute = [&]() {
      std::fill(zrow.begin(), zrow.end(), Rat(0));
      for (int j = 0; j < ncols_; ++j) zrow[j] = -costs[j];
      for (int i = 0; i < rows(); ++i) {
        const Rat& cb = costs[basis_[i]];
        if (cb.is_zero()) continue;
        for (int j = 0; j <= ncols_; ++j) zrow[j] += cb * tab_[i][j];
      }
    };
    recompute();
    for (;;) {
      int enter = -1;
      for (int j = 0; j < (allow_art ? ncols_ : first_art_); ++j)
        if (zrow[j].sign() < 0) { enter = j; break; }
      if (enter < 0) break;
      int leave = -1;
      Rat best_ratio(0);
      for (int i = 0; i < rows(); ++i) {
        if (tab_[i][enter].sign() <= 0) continue;
        Rat ratio = tab_[i][ncols_] / tab_[i][enter];
        if (leave < 0 || ratio < best_ratio ||
            (ratio == best_ratio && basis_[i] < basis_[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
      if (leave < 0) throw Error("simplex: unbounded LP");
      pivot_with_zrow(leave, enter, zrow);
    }
  }

  void pivot(int r, int j) {
    normalize_row(r, j);
    for (int i = 0; i < rows(); ++i) {
      if (i == r || tab_[i][j].is_zero()) continue;
      eliminate(tab_[i], tab_[r], j);
    }
    basis_[r] = j;
  }

  void pivot_with_zrow(int r, int j, std::vector<Rat>& zrow) {
    normalize_row(r, j);
    for (int i = 0; i < rows(); ++i) {
      if (i == r || tab_[i][j].is_zero()) continue;
      eliminate(tab_[i], tab_[r], j);
    }
    if (!zrow[j].is_zero()) eliminate(zrow, tab_[r], j);
    basis_[r] = j;
  }

  void normalize_row(int r, int j) {
    Rat p = tab_[r][j];
    if (p.is_zero()) throw Error("simplex: zero pivot");
    if (!p.is_one())
      for (auto& v : tab_[r]) v /= p;
  }

  static void eliminate(std::vector<Rat>& target, const std::vector<Rat>& prow, int j) {
    Rat f = target[j];
    if (f.is_zero()) return;
    for (std::size_t k = 0; k < target.size(); ++k)
      if (!prow[k].is_zero()) target[k] -= f * prow[k];
  }

  int nvars_;
  int ncols_;
  int first_art_;
  std::vector<Rat> obj_;
  std::vector<std::vector<Rat>> tab_;
  std::vector<int> basis_;
};

}  // namespace

bool coupling_has_marginals(const Coupling& mu, const Distribution& pi1,
                            const Distribution& pi2) {
  std::map<int, Rat> rows, cols;
  for (const auto& [i, j, p] : mu.entries) {
    if (p.sign() <= 0) return false;
    rows[i] += p;
    cols[j] += p;
  }
  std::map<int, Rat> want1, want2;
  for (const auto& [p, m] : pi1.mass) want1[p] += m;
  for (const auto& [p, m] : pi2.mass) want2[p] += m;
  return rows == want1 && cols == want2;
}

TransportResult solve_transport_min(const GroundFn& ground,
                                    const Distribution& pi1,
                                    const Distribution& pi2) {
  require_proper(pi1, "pi1");
  require_proper(pi2, "pi2");
  int m = pi1.support_size();
  int n = pi2.support_size();
  int nvars = m * n;
  std::vector<std::vector<Rat>> rows;
  std::vector<RowRel> rels;
  std::vector<Rat> rhs;
  for (int i = 0; i < m; ++i) {
    std::vector<Rat> row(nvars, Rat(0));
    for (int j = 0; j < n; ++j) row[i * n + j] = Rat(1);
    rows.push_back(std::move(row));
    rels.push_back(RowRel::Eq);
    rhs.push_back(pi1.mass[i].second);
  }
  for (int j = 0; j < n; ++j) {
    std::vector<Rat> row(nvars, Rat(0));
    for (int i = 0; i < m; ++i) row[i * n + j] = Rat(1);
    rows.push_back(std::move(row));
    rels.push_back(RowRel::Eq);
    rhs.push_back(pi2.mass[j].second);
  }
  std::vector<Rat> obj(nvars);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      obj[i * n + j] = -ground(pi1.mass[i].first, pi2.mass[j].first);
  SimplexResult res = Simplex(nvars, std::move(rows), std::move(rels),
                              std::move(rhs), std::move(obj)).solve();
  TransportResult out;
  out.value = -res.value;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      const Rat& p = res.x[i * n + j];
      if (p.sign() > 0)
        out.coupling.entries.emplace_back(pi1.mass[i].first, pi2.mass[j].first, p);
    }
  if (!coupling_has_marginals(out.coupling, pi1, pi2))
    throw Error("transport simplex returned an infeasible coupling");
  return out;
}

namespace {

std::vector<int> support_union(const Distribution& pi1, const Distribution& pi2) {
  std::vector<int> pts;
  for (const auto& [p, _] : pi1.mass) pts.push_back(p);
  for (const auto& [p, _] : pi2.mass)
    if (std::find(pts.begin(), pts.end(), p) == pts.end()) pts.push_back(p);
  std::sort(pts.begin(), pts.end());
  return pts;
}

KantorovichResult solve_kantorovich_oriented(const GroundFn& ground,
                                             const Distribution& pi1,
                                             const Distribution& pi2,
                                             const std::vector<int>& pts) {
  int k = static_cast<int>(pts.size());
  std::vector<std::vector<Rat>> rows;
  std::vector<RowRel> rels;
  std::vector<Rat> rhs;
  Rat one(1);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      Rat d = ground(pts[i], pts[j]);
      if (d >= one) continue;  // implied by 0 <= f <= 1, same feasible set
      std::vector<Rat> row(k, Rat(0));
      row[i] = Rat(1);
      row[j] = Rat(-1);
      rows.push_back(std::move(row));
      rels.push_back(RowRel::Le);
      rhs.push_back(std::move(d));
    }
  for (int i = 0; i < k; ++i) {
    std::vector<Rat> row(k, Rat(0));
    row[i] = Rat(1);
    rows.push_back(std::move(row));
    rels.push_back(RowRel::Le);
    rhs.push_back(Rat(1));
  }
  std::vector<Rat> obj(k, Rat(0));
  for (const auto& [p, m] : pi1.mass)
    obj[std::lower_bound(pts.begin(), pts.end(), p) - pts.begin()] += m;
  for (const auto& [p, m] : pi2.mass)
    obj[std::lower_bound(pts.begin(), pts.end(), p) - pts.begin()] -= m;
  SimplexResult res = Simplex(k, std::move(rows), std::move(rels),
                              std::move(rhs), std::move(obj)).solve();
  KantorovichResult out;
  out.value = res.value;
  for (int i = 0; i < k; ++i)
    out.potential.values.emplace_back(pts[i], res.x[i]);
  return out;
}

}  // namespace

KantorovichResult solve_kantorovich_max(const GroundFn& ground,
                                        const Distribution& pi1,
                                        const Distribution& pi2) {
  require_proper(pi1, "pi1");
  require_proper(pi2, "pi2");
  auto pts = support_union(pi1, pi2);
  KantorovichResult fwd = solve_kantorovich_oriented(ground, pi1, pi2, pts);
  KantorovichResult bwd = solve_kantorovich_oriented(ground, pi2, pi1, pts);
  KantorovichResult& best = (bwd.value > fwd.value) ? bwd : fwd;
  // dual feasibility, exact: 0 <= f <= 1 and every ordered-pair constraint
  for (const auto& [p, v] : best.potential.values)
    if (v.sign() < 0 || v > Rat(1))
      throw Error("kantorovich potential out of [0,1]");
  for (const auto& [p, v] : best.potential.values)
    for (const auto& [q, w] : best.potential.values)
      if (p != q && v - w > ground(p, q))
        throw Error("kantorovich potential violates non-expansiveness");
  return best;
}

Rat lift_with_blocking(const GroundFn& ground, const Distribution& pi1,
                       const Distribution& pi2) {
  if (pi1.zero() && pi2.zero()) return Rat(0);
  if (pi1.zero() || pi2.zero()) return Rat(1);
  return solve_transport_min(ground, pi1, pi2).value;
}

// ---------------------------------------------------------------------------
// Vertex enumeration. Vertices of the transportation polytope are exactly
// the feasible spanning-tree solutions of the complete bipartite graph on
// the two supports. Tree structures (with their leaf-stripping order) depend
// only on the support sizes and are cached across calls.
// ---------------------------------------------------------------------------

namespace {

struct TreeStep {
  std::uint8_t cell;      // i * n + j
  std::uint8_t take_row;  // assign remaining row mass (else column mass)
};

// All spanning trees of K_{m,n}, each stored as its leaf-stripping program of
// m+n-1 steps, flattened into one array.
struct TreeOrders {
  int steps_per_tree = 0;
  std::vector<TreeStep> data;
  std::size_t tree_count() const {
    return steps_per_tree ? data.size() / steps_per_tree : 0;
  }
};

TreeOrders build_tree_orders(int m, int n) {
  int vertices = m + n;
  int need = vertices - 1;
  int total_edges = m * n;
  TreeOrders out;
  out.steps_per_tree = need;
  std::vector<int> chosen;
  std::vector<int> parent(vertices);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<int> size(vertices, 1);

  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v];
    return v;
  };

  std::vector<int> deg(vertices), leaves;
  leaves.reserve(vertices);
  auto emit_strip_order = [&](const std::vector<int>& edges) {
    // degree-1 elimination; each step takes the leaf's remaining mass
    std::fill(deg.begin(), deg.end(), 0);
    for (int e : edges) {
      ++deg[e / n];
      ++deg[m + e % n];
    }
    leaves.clear();
    for (int v = 0; v < vertices; ++v)
      if (deg[v] == 1) leaves.push_back(v);
    std::vector<bool> used(edges.size(), false);
    int emitted = 0;
    std::size_t qi = 0;
    while (qi < leaves.size() && emitted < need) {
      int v = leaves[qi++];
      if (deg[v] != 1) continue;
      for (std::size_t k = 0; k < edges.size(); ++k) {
        if (used[k]) continue;
        int e = edges[k];
        int i = e / n, j = m + e % n;
        if (i != v && j != v) continue;
        used[k] = true;
        int other = (i == v) ? j : i;
        out.data.push_back({static_cast<std::uint8_t>(e),
                            static_cast<std::uint8_t>(i == v ? 1 : 0)});
        ++emitted;
        --deg[v];
        --deg[other];
        if (deg[other] == 1) leaves.push_back(other);
        break;
      }
    }
  };

  auto rec = [&](auto&& self, int next_edge) -> void {
    if (static_cast<int>(chosen.size()) == need) {
      emit_strip_order(chosen);
      return;
    }
    int remaining_need = need - static_cast<int>(chosen.size());
    for (int e = next_edge; e <= total_edges - remaining_need; ++e) {
      int i = e / n, j = m + e % n;
      int ri = find(i), rj = find(j);
      if (ri == rj) continue;  // cycle
      if (size[ri] < size[rj]) std::swap(ri, rj);
      parent[rj] = ri;
      size[ri] += size[rj];
      chosen.push_back(e);
      self(self, e + 1);
      chosen.pop_back();
      parent[rj] = rj;
      size[ri] -= size[rj];
    }
  };
  rec(rec, 0);
  return out;
}

const TreeOrders& tree_orders(int m, int n) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, TreeOrders> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(m, n);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, build_tree_orders(m, n)).first;
  return it->second;
}

template <typename Int>
bool run_tree(const TreeStep* steps, int count, int n,
              const std::vector<Int>& row_mass, const std::vector<Int>& col_mass,
              std::vector<Int>& rrem, std::vector<Int>& crem,
              std::vector<Int>& cells) {
  rrem = row_mass;
  crem = col_mass;
  std::fill(cells.begin(), cells.end(), Int(0));
  for (int s = 0; s < count; ++s) {
    const TreeStep& st = steps[s];
    int i = st.cell / n, j = st.cell % n;
    Int amount = st.take_row ? rrem[i] : crem[j];
    if (amount < 0) return false;
    cells[st.cell] = amount;
    if (st.take_row) {
      rrem[i] = 0;
      crem[j] -= amount;
    } else {
      crem[j] = 0;
      rrem[i] -= amount;
    }
  }
  return true;
}

}  // namespace

std::vector<Coupling> enumerate_transport_vertices(const Distribution& pi1,
                                                   const Distribution& pi2,
                                                   int support_bound) {
  require_proper(pi1, "pi1");
  require_proper(pi2, "pi2");
  int m = pi1.support_size();
  int n = pi2.support_size();
  if (m > support_bound || n > support_bound)
    throw SupportTooLargeError("support " + std::to_string(m) + "x" +
                               std::to_string(n) + " exceeds bound " +
                               std::to_string(support_bound));
  // scale masses to a common integer denominator
  mpz_class lcm_den(1);
  for (const auto& [_, p] : pi1.mass)
    mpz_lcm(lcm_den.get_mpz_t(), lcm_den.get_mpz_t(), p.raw().get_den().get_mpz_t());
  for (const auto& [_, p] : pi2.mass)
    mpz_lcm(lcm_den.get_mpz_t(), lcm_den.get_mpz_t(), p.raw().get_den().get_mpz_t());
  Rat scale{mpq_class(lcm_den, 1)};

  const TreeOrders& orders = tree_orders(m, n);
  std::vector<Coupling> out;

  auto emit = [&](auto cell_value, const auto& cells) {
    Coupling cpl;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        Rat v = cell_value(cells[i * n + j]);
        if (v.sign() > 0)
          cpl.entries.emplace_back(pi1.mass[i].first, pi2.mass[j].first, std::move(v));
      }
    out.push_back(std::move(cpl));
  };

  bool small = mpz_fits_slong_p(lcm_den.get_mpz_t()) && lcm_den < 2000000000;
  if (small) {
    std::vector<long> rm(m), cm(n);
    for (int i = 0; i < m; ++i)
      rm[i] = mpz_class(pi1.mass[i].second.raw().get_num() *
                        (lcm_den / pi1.mass[i].second.raw().get_den())).get_si();
    for (int j = 0; j < n; ++j)
      cm[j] = mpz_class(pi2.mass[j].second.raw().get_num() *
                        (lcm_den / pi2.mass[j].second.raw().get_den())).get_si();
    std::vector<long> cells(m * n), rrem, crem;
    std::map<std::vector<long>, bool> seen;
    for (std::size_t t = 0; t < orders.tree_count(); ++t) {
      const TreeStep* steps = orders.data.data() + t * orders.steps_per_tree;
      if (!run_tree(steps, orders.steps_per_tree, n, rm, cm, rrem, crem, cells))
        continue;
      if (!seen.emplace(cells, true).second) continue;
      emit([&](long c) { return Rat(c) / scale; }, cells);
    }
    return out;
  }

  std::vector<mpz_class> rm(m), cm(n);
  for (int i = 0; i < m; ++i)
    rm[i] = pi1.mass[i].second.raw().get_num() *
            (lcm_den / pi1.mass[i].second.raw().get_den());
  for (int j = 0; j < n; ++j)
    cm[j] = pi2.mass[j].second.raw().get_num() *
            (lcm_den / pi2.mass[j].second.raw().get_den());
  std::vector<mpz_class> cells(m * n), rrem, crem;
  std::map<std::vector<mpz_class>, bool> seen;
  for (std::size_t t = 0; t < orders.tree_count(); ++t) {
    const TreeStep* steps = orders.data.data() + t * orders.steps_per_tree;
    if (!run_tree(steps, orders.steps_per_tree, n, rm, cm, rrem, crem, cells))
      continue;
    if (!seen.emplace(cells, true).second) continue;
    emit([&](const mpz_class& c) { return Rat(mpq_class(c, lcm_den)); }, cells);
  }
  return out;
}

Rat mcshane_extension_value(const Potential& f, const GroundFn& ground, int point) {
  Rat best(1);
  for (const auto& [p, v] : f.values) {
    if (p == point) return v;  // extension agrees with f on its support
    Rat cand = v + ground(p, point);
    if (cand < best) best = cand;
  }
  return best;
}

bool weak_duality_holds(const GroundFn& ground, const Distribution& pi1,
                        const Distribution& pi2, const Coupling& mu,
                        const Potential& f) {
  Rat gap = rat_abs(f.expectation(pi1) - f.expectation(pi2));
  Rat cost = mu.expectation(ground);
  return gap <= cost;
}

}  // namespace pfml
