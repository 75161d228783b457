#include "pfml/synthesis.hpp"

#include <algorithm>

#include "pfml/errors.hpp"

namespace pfml {

SynthesisSession::SynthesisSession(const Model& m, Options opts)
    : m_(m), opts_(opts), wtab_(m, Method::Wasserstein), eval_(m) {}

Concept SynthesisSession::interpolant(int depth, int x, int y, const Rat& fx,
                                      const Rat& fy) {
  if (x == y || fx == fy) return c_const(fx);
  // orient so that the u-target is the larger one
  int u = x, v = y;
  Rat tu = fx, tv = fy;
  if (tu < tv) {
    std::swap(u, v);
    std::swap(tu, tv);
  }
  Rat need = tu - tv;
  const Rat& claimed = wtab_.distance(depth, u, v);
  if (opts_.grid_denominator == 0 && need > claimed)
    throw NotNonexpansiveError("interpolant targets deviate by " + need.str() +
                               " > d_" + std::to_string(depth) + " = " +
                               claimed.str());
  WitnessCertificate cert = witness(depth, u, v);
  Concept d = cert.concept_;
  Rat du = value_at(d, u);
  Rat dv = value_at(d, v);
  if (du < dv) {
    d = c_neg(d);
    du = Rat(1) - du;
    dv = Rat(1) - dv;
  }
  Rat gap = du - dv;
  // exact witnesses give gap = claimed >= need; in quantized stress mode the
  // gap may fall short and the interpolant is clamped (still sound)
  Rat tgap = rat_min(need, gap);
  if (tgap.is_zero()) return c_const(tv);
  return c_add(c_and(c_sub(std::move(d), dv), c_const(tgap)), tv);
}

Concept SynthesisSession::reconstruct(int depth,
                                      const std::vector<std::pair<int, Rat>>& target) {
  if (target.empty()) throw Error("reconstruct: empty domain");
  for (const auto& [s, v] : target) {
    if (s < 0 || s >= m_.num_states())
      throw UnknownStateError("reconstruct: state index " + std::to_string(s));
    if (!v.in_unit()) throw Error("reconstruct: target outside [0,1]");
  }
  if (opts_.grid_denominator == 0) {
    for (const auto& [sx, vx] : target)
      for (const auto& [sy, vy] : target)
        if (sx != sy && abs_diff(vx, vy) > wtab_.distance(depth, sx, sy))
          throw NotNonexpansiveError(
              "target is not non-expansive wrt d_" + std::to_string(depth) +
              " at pair (" + m_.state_name(sx) + ", " + m_.state_name(sy) + ")");
  }
  bool all_equal = std::all_of(target.begin(), target.end(), [&](const auto& t) {
    return t.second == target.front().second;
  });
  if (all_equal) return c_const(target.front().second);

  Concept result;
  for (const auto& [sx, vx] : target) {
    Concept hx = c_const(vx);  // g_xx
    for (const auto& [sy, vy] : target) {
      if (sy == sx) continue;
      hx = c_and(std::move(hx), interpolant(depth, sx, sy, vx, vy));
    }
    result = result ? c_or(std::move(result), std::move(hx)) : std::move(hx);
  }
  if (opts_.grid_denominator == 0) {
    // postcondition: exact agreement on the domain
    for (const auto& [s, v] : target)
      if (value_at(result, s) != v)
        throw Error("reconstruct postcondition failed at state " + m_.state_name(s));
  }
  return result;
}

namespace {
Rat quantize_down(const Rat& v, unsigned long den) {
  // largest multiple of 1/den that is <= v
  mpz_class num = v.raw().get_num() * den;
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), v.raw().get_den().get_mpz_t());
  return Rat(mpq_class(q, den));
}
}  // namespace

WitnessCertificate SynthesisSession::witness(int depth, int a, int b) {
  WitnessCertificate cert;
  cert.depth = depth;
  cert.a = a;
  cert.b = b;
  if (a == b) {
    cert.concept_ = c_const(Rat(0));
    cert.achieved = Rat(0);
    cert.claimed = Rat(0);
    cert.valid = true;
    return cert;
  }
  int lo = std::min(a, b), hi = std::max(a, b);
  cert.claimed = wtab_.distance(depth, lo, hi);
  auto key = std::make_tuple(depth, lo, hi);
  auto it = memo_.find(key);
  if (it != memo_.end()) {
    cert.concept_ = it->second;
  } else if (depth == 0) {
    cert.concept_ = c_const(Rat(0));
  } else {
    Concept best = c_const(Rat(0));
    Rat best_gap(0);
    for (const auto& atom : m_.atom_names()) {
      Rat gap = abs_diff(m_.atom_by_name(atom, lo), m_.atom_by_name(atom, hi));
      if (gap > best_gap) {
        best = c_atom(atom);
        best_gap = std::move(gap);
      }
    }
    bool bl = m_.blocking(lo), bh = m_.blocking(hi);
    if (!bl && !bh) {
      KantorovichResult kr = wtab_.potential(depth, lo, hi);
      std::vector<std::pair<int, Rat>> target = kr.potential.values;
      if (opts_.grid_denominator > 0)
        for (auto& [s, v] : target) v = quantize_down(v, opts_.grid_denominator);
      Concept cand = c_dia(reconstruct(depth - 1, target), m_.designated_role());
      Rat gap = abs_diff(value_at(cand, lo), value_at(cand, hi));
      if (gap >= best_gap) {
        best = std::move(cand);
        best_gap = std::move(gap);
      }
    } else if (bl != bh) {
      // blocking detector: <r> 1 is 0 at blocking states, 1 elsewhere
      Concept cand = c_dia(c_const(Rat(1)), m_.designated_role());
      Rat gap = abs_diff(value_at(cand, lo), value_at(cand, hi));
      if (gap >= best_gap) {
        best = std::move(cand);
        best_gap = std::move(gap);
      }
    }
    if (dag_size(best) > opts_.max_dag_nodes)
      throw Error("synthesized witness exceeds the configured size ceiling");
    memo_[key] = best;
    cert.concept_ = std::move(best);
  }
  cert.achieved = abs_diff(value_at(cert.concept_, lo), value_at(cert.concept_, hi));
  cert.valid = cert.achieved == cert.claimed;
  return cert;
}

WitnessCertificate synthesize_witness(const Model& m, int depth, int a, int b) {
  SynthesisSession session(m);
  return session.witness(depth, a, b);
}

Concept reconstruct_function(const Model& m, int depth,
                             const std::vector<std::pair<int, Rat>>& target) {
  SynthesisSession session(m);
  return session.reconstruct(depth, target);
}

Concept pairwise_interpolant(const Model& m, int depth, int x, int y,
                             const Rat& fx, const Rat& fy) {
  SynthesisSession session(m);
  return session.interpolant(depth, x, y, fx, fy);
}

DistanceTable logical_witness_table(const Model& m, int n) {
  SynthesisSession session(m);
  DistanceTable t;
  t.depth = n;
  t.method = Method::LogicalWitness;
  t.n = m.num_states();
  for (int i = 0; i < t.n; ++i)
    for (int j = i + 1; j < t.n; ++j)
      t.vals.push_back(session.witness(n, i, j).achieved);
  return t;
}

}  // namespace pfml
