#include "pfml/semantics.hpp"

#include "pfml/errors.hpp"

namespace pfml {

const Valuation& EvalCache::eval(const Concept& c) {
  auto it = memo_.find(c.get());
  if (it != memo_.end()) return it->second.second;
  int n = m_.num_states();
  Valuation v(n, Rat(0));
  switch (c->kind) {
    case CKind::Const:
      for (int s = 0; s < n; ++s) v[s] = c->q;
      break;
    case CKind::Atom: {
      auto idx = m_.find_atom(c->name);
      if (!idx) throw UnknownAtomError(c->name);
      for (int s = 0; s < n; ++s) v[s] = m_.atom(*idx, s);
      break;
    }
    case CKind::TruncSub: {
      const Valuation& x = eval(c->a);
      for (int s = 0; s < n; ++s) v[s] = truncated_sub(x[s], c->q);
      break;
    }
    case CKind::Neg: {
      const Valuation& x = eval(c->a);
      for (int s = 0; s < n; ++s) v[s] = Rat(1) - x[s];
      break;
    }
    case CKind::And: {
      const Valuation& x = eval(c->a);
      const Valuation& y = eval(c->b);
      for (int s = 0; s < n; ++s) v[s] = rat_min(x[s], y[s]);
      break;
    }
    case CKind::Or: {
      const Valuation& x = eval(c->a);
      const Valuation& y = eval(c->b);
      for (int s = 0; s < n; ++s) v[s] = rat_max(x[s], y[s]);
      break;
    }
    case CKind::Dia: {
      if (!m_.has_role(c->name)) throw UnknownRoleError(c->name);
      const Valuation& x = eval(c->a);
      for (int s = 0; s < n; ++s) {
        Rat e(0);
        for (const auto& [t, p] : m_.row_of(c->name, s).entries) e += p * x[t];
        v[s] = e;
      }
      break;
    }
  }
  return memo_.emplace(c.get(), std::make_pair(c, std::move(v))).first->second.second;
}

Valuation eval_concept(const Model& m, const Concept& c) {
  EvalCache cache(m);
  return cache.eval(c);
}

Valuation apply_diamond(const Model& m, const Valuation& f) {
  if (static_cast<int>(f.size()) != m.num_states())
    throw Error("apply_diamond: valuation size mismatch");
  Valuation out(m.num_states(), Rat(0));
  for (int s = 0; s < m.num_states(); ++s) {
    Rat e(0);
    for (const auto& [t, p] : m.row(s).entries) e += p * f[t];
    out[s] = e;
  }
  return out;
}

namespace {

Rat eval_f(const Model& m, const Formula& f, Env& env) {
  switch (f->kind) {
    case FKind::Const:
      return f->q;
    case FKind::Atom: {
      auto it = env.find(f->var);
      if (it == env.end()) throw UnboundVariableError(f->var);
      auto idx = m.find_atom(f->atom);
      if (!idx) throw UnknownAtomError(f->atom);
      return m.atom(*idx, it->second);
    }
    case FKind::Eq: {
      auto x = env.find(f->var), y = env.find(f->var2);
      if (x == env.end()) throw UnboundVariableError(f->var);
      if (y == env.end()) throw UnboundVariableError(f->var2);
      return Rat(x->second == y->second ? 1 : 0);
    }
    case FKind::TruncSub:
      return truncated_sub(eval_f(m, f->a, env), f->q);
    case FKind::Neg:
      return Rat(1) - eval_f(m, f->a, env);
    case FKind::And: {
      Rat x = eval_f(m, f->a, env);
      Rat y = eval_f(m, f->b, env);
      return rat_min(x, y);
    }
    case FKind::Exists: {
      // finite domain, so the supremum is an attained maximum
      Rat best(0);
      auto prev = env.find(f->var);
      std::optional<int> saved;
      if (prev != env.end()) saved = prev->second;
      for (int s = 0; s < m.num_states(); ++s) {
        env[f->var] = s;
        Rat v = eval_f(m, f->a, env);
        if (v > best) best = v;
        if (best.is_one()) break;
      }
      if (saved) env[f->var] = *saved; else env.erase(f->var);
      return best;
    }
    case FKind::DiaBind: {
      auto it = env.find(f->var);
      if (it == env.end()) throw UnboundVariableError(f->var);
      const SuccessorRow& row = m.row(it->second);
      Rat e(0);
      auto prev = env.find(f->var2);
      std::optional<int> saved;
      if (prev != env.end()) saved = prev->second;
      for (const auto& [t, p] : row.entries) {
        env[f->var2] = t;
        e += p * eval_f(m, f->a, env);
      }
      if (saved) env[f->var2] = *saved; else env.erase(f->var2);
      return e;
    }
  }
  throw Error("eval_formula: unreachable");
}

}  // namespace

Rat eval_formula(const Model& m, const Formula& f, const Env& env) {
  for (const auto& v : free_vars(f))
    if (!env.count(v)) throw UnboundVariableError(v);
  for (const auto& [var, s] : env)
    if (s < 0 || s >= m.num_states())
      throw UnknownStateError("environment binds " + var + " to a bad index");
  Env scratch = env;
  return eval_f(m, f, scratch);
}

}  // namespace pfml
