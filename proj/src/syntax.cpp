#include "pfml/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>
#include <unordered_map>

#include "pfml/errors.hpp"

namespace pfml {

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

namespace {
Concept make_c(CKind k, Rat q, std::string name, Concept a, Concept b) {
  auto n = std::make_shared<ConceptNode>();
  n->kind = k;
  n->q = std::move(q);
  n->name = std::move(name);
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

void require_unit(const Rat& q) {
  if (!q.in_unit()) throw Error("constant out of [0,1]: " + q.str());
}
}  // namespace

Concept c_const(Rat q) {
  require_unit(q);
  return make_c(CKind::Const, std::move(q), "", nullptr, nullptr);
}
Concept c_atom(std::string name) {
  return make_c(CKind::Atom, Rat(0), std::move(name), nullptr, nullptr);
}
Concept c_sub(Concept child, Rat q) {
  require_unit(q);
  return make_c(CKind::TruncSub, std::move(q), "", std::move(child), nullptr);
}
Concept c_neg(Concept child) {
  return make_c(CKind::Neg, Rat(0), "", std::move(child), nullptr);
}
Concept c_and(Concept l, Concept r) {
  return make_c(CKind::And, Rat(0), "", std::move(l), std::move(r));
}
Concept c_or(Concept l, Concept r) {
  return make_c(CKind::Or, Rat(0), "", std::move(l), std::move(r));
}
Concept c_dia(Concept child, std::string role) {
  return make_c(CKind::Dia, Rat(0), std::move(role), std::move(child), nullptr);
}
Concept c_add(Concept child, Rat q) {
  // min(x+q, 1) = ~(~x - q); sugar only, never an AST node
  require_unit(q);
  return c_neg(c_sub(c_neg(std::move(child)), std::move(q)));
}

int rank(const Concept& c) {
  switch (c->kind) {
    case CKind::Const: return 0;
    case CKind::Atom: return 1;
    case CKind::TruncSub:
    case CKind::Neg: return rank(c->a);
    case CKind::And:
    case CKind::Or: return std::max(rank(c->a), rank(c->b));
    case CKind::Dia: return 1 + rank(c->a);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Printing. Levels: | = 0, & = 1, prefix ops = 2, - q chains = 3, primary = 4.
// A child is parenthesized when its level is below the context level; right
// operands of binary connectives use a strictly higher context so that the
// printed form reparses to the identical tree.
// ---------------------------------------------------------------------------

namespace {

int c_level(const Concept& c) {
  switch (c->kind) {
    case CKind::Or: return 0;
    case CKind::And: return 1;
    case CKind::Neg:
    case CKind::Dia: return 2;
    case CKind::TruncSub: return 3;
    default: return 4;
  }
}

void print_c(const Concept& c, int ctx, std::string& out) {
  bool parens = c_level(c) < ctx;
  if (parens) out += '(';
  switch (c->kind) {
    case CKind::Const: out += c->q.str(); break;
    case CKind::Atom: out += c->name; break;
    case CKind::TruncSub:
      print_c(c->a, 3, out);
      out += " - ";
      out += c->q.str();
      break;
    case CKind::Neg:
      out += '~';
      print_c(c->a, 2, out);
      break;
    case CKind::Dia:
      out += '<';
      out += c->name;
      out += "> ";
      print_c(c->a, 2, out);
      break;
    case CKind::And:
      print_c(c->a, 1, out);
      out += " & ";
      print_c(c->b, 2, out);
      break;
    case CKind::Or:
      print_c(c->a, 0, out);
      out += " | ";
      print_c(c->b, 1, out);
      break;
  }
  if (parens) out += ')';
}

}  // namespace

std::string print_concept(const Concept& c) {
  std::string out;
  print_c(c, 0, out);
  return out;
}

bool concepts_equal(const Concept& a, const Concept& b) {
  if (a.get() == b.get()) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case CKind::Const: return a->q == b->q;
    case CKind::Atom: return a->name == b->name;
    case CKind::TruncSub: return a->q == b->q && concepts_equal(a->a, b->a);
    case CKind::Neg: return concepts_equal(a->a, b->a);
    case CKind::Dia: return a->name == b->name && concepts_equal(a->a, b->a);
    case CKind::And:
    case CKind::Or:
      return concepts_equal(a->a, b->a) && concepts_equal(a->b, b->b);
  }
  return false;
}

namespace {
void collect_nodes(const ConceptNode* n, std::set<const ConceptNode*>& seen) {
  if (!n || seen.count(n)) return;
  seen.insert(n);
  collect_nodes(n->a.get(), seen);
  collect_nodes(n->b.get(), seen);
}
}  // namespace

std::size_t dag_size(const Concept& c) {
  std::set<const ConceptNode*> seen;
  collect_nodes(c.get(), seen);
  return seen.size();
}

std::size_t tree_size(const Concept& c) {
  // memoized over shared nodes; the count itself is the expanded-tree size
  std::unordered_map<const ConceptNode*, std::size_t> memo;
  auto go = [&](auto&& self, const ConceptNode* n) -> std::size_t {
    if (!n) return 0;
    auto it = memo.find(n);
    if (it != memo.end()) return it->second;
    std::size_t s = 1 + self(self, n->a.get()) + self(self, n->b.get());
    memo[n] = s;
    return s;
  };
  return go(go, c.get());
}

nlohmann::ordered_json concept_to_json(const Concept& c, bool sharing) {
  using J = nlohmann::ordered_json;
  if (!sharing) {
    J j;
    switch (c->kind) {
      case CKind::Const: j["kind"] = "const"; j["value"] = c->q.str(); break;
      case CKind::Atom: j["kind"] = "atom"; j["name"] = c->name; break;
      case CKind::TruncSub:
        j["kind"] = "sub"; j["child"] = concept_to_json(c->a); j["value"] = c->q.str();
        break;
      case CKind::Neg: j["kind"] = "neg"; j["child"] = concept_to_json(c->a); break;
      case CKind::Dia:
        j["kind"] = "dia"; j["role"] = c->name; j["child"] = concept_to_json(c->a);
        break;
      case CKind::And:
        j["kind"] = "and"; j["left"] = concept_to_json(c->a); j["right"] = concept_to_json(c->b);
        break;
      case CKind::Or:
        j["kind"] = "or"; j["left"] = concept_to_json(c->a); j["right"] = concept_to_json(c->b);
        break;
    }
    return j;
  }
  // Shared form: post-order node table, children by index.
  std::map<const ConceptNode*, int> ids;
  J nodes = J::array();
  auto go = [&](auto&& self, const ConceptNode* n) -> int {
    auto it = ids.find(n);
    if (it != ids.end()) return it->second;
    int ia = n->a ? self(self, n->a.get()) : -1;
    int ib = n->b ? self(self, n->b.get()) : -1;
    J j;
    switch (n->kind) {
      case CKind::Const: j["kind"] = "const"; j["value"] = n->q.str(); break;
      case CKind::Atom: j["kind"] = "atom"; j["name"] = n->name; break;
      case CKind::TruncSub: j["kind"] = "sub"; j["child"] = ia; j["value"] = n->q.str(); break;
      case CKind::Neg: j["kind"] = "neg"; j["child"] = ia; break;
      case CKind::Dia: j["kind"] = "dia"; j["role"] = n->name; j["child"] = ia; break;
      case CKind::And: j["kind"] = "and"; j["left"] = ia; j["right"] = ib; break;
      case CKind::Or: j["kind"] = "or"; j["left"] = ia; j["right"] = ib; break;
    }
    int id = static_cast<int>(nodes.size());
    nodes.push_back(std::move(j));
    ids[n] = id;
    return id;
  };
  int root = go(go, c.get());
  J out;
  out["nodes"] = std::move(nodes);
  out["root"] = root;
  return out;
}

// ---------------------------------------------------------------------------
// Formulas
// ---------------------------------------------------------------------------

namespace {
Formula make_f(FKind k, Rat q, std::string atom, std::string var,
               std::string var2, Formula a, Formula b) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = k;
  n->q = std::move(q);
  n->atom = std::move(atom);
  n->var = std::move(var);
  n->var2 = std::move(var2);
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}
}  // namespace

Formula f_const(Rat q) {
  require_unit(q);
  return make_f(FKind::Const, std::move(q), "", "", "", nullptr, nullptr);
}
Formula f_atom(std::string atom, std::string var) {
  return make_f(FKind::Atom, Rat(0), std::move(atom), std::move(var), "", nullptr, nullptr);
}
Formula f_eq(std::string x, std::string y) {
  return make_f(FKind::Eq, Rat(0), "", std::move(x), std::move(y), nullptr, nullptr);
}
Formula f_sub(Formula child, Rat q) {
  require_unit(q);
  return make_f(FKind::TruncSub, std::move(q), "", "", "", std::move(child), nullptr);
}
Formula f_neg(Formula child) {
  return make_f(FKind::Neg, Rat(0), "", "", "", std::move(child), nullptr);
}
Formula f_and(Formula l, Formula r) {
  return make_f(FKind::And, Rat(0), "", "", "", std::move(l), std::move(r));
}
Formula f_exists(std::string var, Formula child) {
  return make_f(FKind::Exists, Rat(0), "", std::move(var), "", std::move(child), nullptr);
}
Formula f_diabind(std::string at, std::string bound, Formula child) {
  return make_f(FKind::DiaBind, Rat(0), "", std::move(at), std::move(bound),
                std::move(child), nullptr);
}

int qrank(const Formula& f) {
  switch (f->kind) {
    case FKind::Const:
    case FKind::Eq: return 0;
    case FKind::Atom: return 1;
    case FKind::TruncSub:
    case FKind::Neg: return qrank(f->a);
    case FKind::And: return std::max(qrank(f->a), qrank(f->b));
    case FKind::Exists:
    case FKind::DiaBind: return 1 + qrank(f->a);
  }
  return 0;
}

std::set<std::string> free_vars(const Formula& f) {
  switch (f->kind) {
    case FKind::Const: return {};
    case FKind::Atom: return {f->var};
    case FKind::Eq: return {f->var, f->var2};
    case FKind::TruncSub:
    case FKind::Neg: return free_vars(f->a);
    case FKind::And: {
      auto s = free_vars(f->a);
      auto t = free_vars(f->b);
      s.insert(t.begin(), t.end());
      return s;
    }
    case FKind::Exists: {
      auto s = free_vars(f->a);
      s.erase(f->var);
      return s;
    }
    case FKind::DiaBind: {
      auto s = free_vars(f->a);
      s.erase(f->var2);  // the successor variable is bound, the at-variable is not
      s.insert(f->var);
      return s;
    }
  }
  return {};
}

namespace {

int f_level(const Formula& f) {
  switch (f->kind) {
    case FKind::And: return 1;
    case FKind::Neg:
    case FKind::Exists:
    case FKind::DiaBind: return 2;
    case FKind::TruncSub: return 3;
    default: return 4;
  }
}

void print_f(const Formula& f, int ctx, std::string& out) {
  bool parens = f_level(f) < ctx;
  if (parens) out += '(';
  switch (f->kind) {
    case FKind::Const: out += f->q.str(); break;
    case FKind::Atom: out += f->atom + "(" + f->var + ")"; break;
    case FKind::Eq: out += f->var + " = " + f->var2; break;
    case FKind::TruncSub:
      print_f(f->a, 3, out);
      out += " - ";
      out += f->q.str();
      break;
    case FKind::Neg:
      out += '~';
      print_f(f->a, 2, out);
      break;
    case FKind::And:
      print_f(f->a, 1, out);
      out += " & ";
      print_f(f->b, 2, out);
      break;
    case FKind::Exists:
      out += "E " + f->var + ". ";
      print_f(f->a, 2, out);
      break;
    case FKind::DiaBind:
      out += "P " + f->var + " " + f->var2 + ". ";
      print_f(f->a, 2, out);
      break;
  }
  if (parens) out += ')';
}

}  // namespace

std::string print_formula(const Formula& f) {
  std::string out;
  print_f(f, 0, out);
  return out;
}

// ---------------------------------------------------------------------------
// Standard translation
// ---------------------------------------------------------------------------

namespace {
std::string fresh_var(int depth, const std::string& avoid) {
  std::string v;
  if (depth == 1) v = "y";
  else if (depth == 2) v = "z";
  else if (depth == 3) v = "w";
  else v = "v" + std::to_string(depth);
  if (v == avoid) v = "u" + std::to_string(depth);
  return v;
}

Formula st(const Concept& c, const std::string& var, int depth,
           const std::string& root_var) {
  switch (c->kind) {
    case CKind::Const: return f_const(c->q);
    case CKind::Atom: return f_atom(c->name, var);
    case CKind::TruncSub: return f_sub(st(c->a, var, depth, root_var), c->q);
    case CKind::Neg: return f_neg(st(c->a, var, depth, root_var));
    case CKind::And:
      return f_and(st(c->a, var, depth, root_var), st(c->b, var, depth, root_var));
    case CKind::Or:
      // the formula language has no native disjunction; use ~(~p & ~q)
      return f_neg(f_and(f_neg(st(c->a, var, depth, root_var)),
                         f_neg(st(c->b, var, depth, root_var))));
    case CKind::Dia: {
      std::string y = fresh_var(depth + 1, root_var);
      return f_diabind(var, y, st(c->a, y, depth + 1, root_var));
    }
  }
  throw Error("standard_translation: unreachable");
}
}  // namespace

Formula standard_translation(const Concept& c, const std::string& x) {
  return st(c, x, 0, x);
}

// ---------------------------------------------------------------------------
// Parsing (shared lexer for both languages)
// ---------------------------------------------------------------------------

namespace {

struct Parser {
  std::string_view text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }
  bool eof() {
    skip_ws();
    return pos >= text.size();
  }
  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }
  bool try_consume(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(char c, const char* what) {
    if (!try_consume(c)) throw SyntaxError(pos, what);
  }
  // identifier: letter followed by letters/digits/underscore
  std::optional<std::string> try_ident() {
    skip_ws();
    std::size_t start = pos;
    if (start >= text.size() || !std::isalpha(static_cast<unsigned char>(text[start])))
      return std::nullopt;
    std::size_t end = start + 1;
    while (end < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[end])) || text[end] == '_'))
      ++end;
    pos = end;
    return std::string(text.substr(start, end - start));
  }
  Rat parse_rational() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos == start) throw SyntaxError(pos, "number");
    if (pos < text.size() && text[pos] == '/') {
      ++pos;
      std::size_t dstart = pos;
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
      if (pos == dstart) throw SyntaxError(pos, "denominator");
    }
    Rat q = Rat::parse(text.substr(start, pos - start));
    if (!q.in_unit()) throw SyntaxError(start, "constant in [0,1]");
    return q;
  }

  // --- concepts ---
  Concept concept_or() {
    Concept c = concept_and();
    while (try_consume('|')) c = c_or(std::move(c), concept_and());
    return c;
  }
  Concept concept_and() {
    Concept c = concept_unary();
    while (try_consume('&')) c = c_and(std::move(c), concept_unary());
    return c;
  }
  Concept concept_unary() {
    if (try_consume('~')) return c_neg(concept_unary());
    if (try_consume('<')) {
      auto role = try_ident();
      if (!role) throw SyntaxError(pos, "role name");
      expect('>', "'>'");
      return c_dia(concept_unary(), *role);
    }
    return concept_postfix();
  }
  Concept concept_postfix() {
    Concept c = concept_primary();
    for (;;) {
      skip_ws();
      if (try_consume('-')) {
        c = c_sub(std::move(c), parse_rational());
      } else if (try_consume('+')) {
        c = c_add(std::move(c), parse_rational());
      } else {
        break;
      }
    }
    return c;
  }
  Concept concept_primary() {
    skip_ws();
    if (try_consume('(')) {
      Concept c = concept_or();
      expect(')', "')'");
      return c;
    }
    if (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
      return c_const(parse_rational());
    std::size_t at = pos;
    auto ident = try_ident();
    if (!ident || !std::isupper(static_cast<unsigned char>((*ident)[0])))
      throw SyntaxError(at, "constant, atom or '('");
    return c_atom(*ident);
  }

  // --- formulas ---
  Formula formula_or() {
    Formula f = formula_and();
    while (try_consume('|'))
      f = f_neg(f_and(f_neg(std::move(f)), f_neg(formula_and())));
    return f;
  }
  Formula formula_and() {
    Formula f = formula_unary();
    while (try_consume('&')) f = f_and(std::move(f), formula_unary());
    return f;
  }
  Formula formula_unary() {
    if (try_consume('~')) return f_neg(formula_unary());
    skip_ws();
    std::size_t save = pos;
    auto ident = try_ident();
    if (ident == "E") {
      auto v = try_ident();
      if (v && std::islower(static_cast<unsigned char>((*v)[0])) && try_consume('.'))
        return f_exists(*v, formula_unary());
      pos = save;
    } else if (ident == "P") {
      auto v1 = try_ident();
      auto v2 = v1 ? try_ident() : std::nullopt;
      if (v1 && v2 && std::islower(static_cast<unsigned char>((*v1)[0])) &&
          std::islower(static_cast<unsigned char>((*v2)[0])) && try_consume('.'))
        return f_diabind(*v1, *v2, formula_unary());
      pos = save;
    } else {
      pos = save;
    }
    return formula_postfix();
  }
  Formula formula_postfix() {
    Formula f = formula_primary();
    for (;;) {
      if (try_consume('-')) {
        f = f_sub(std::move(f), parse_rational());
      } else if (try_consume('+')) {
        Rat q = parse_rational();
        f = f_neg(f_sub(f_neg(std::move(f)), q));
      } else {
        break;
      }
    }
    return f;
  }
  Formula formula_primary() {
    skip_ws();
    if (try_consume('(')) {
      Formula f = formula_or();
      expect(')', "')'");
      return f;
    }
    if (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
      return f_const(parse_rational());
    std::size_t at = pos;
    auto ident = try_ident();
    if (!ident) throw SyntaxError(at, "constant, atom application, variable or '('");
    if (std::isupper(static_cast<unsigned char>((*ident)[0]))) {
      expect('(', "'(' after atom name");
      auto v = try_ident();
      if (!v) throw SyntaxError(pos, "variable");
      expect(')', "')'");
      return f_atom(*ident, *v);
    }
    // lowercase identifier: must be the left side of an equality
    expect('=', "'=' after variable");
    auto v2 = try_ident();
    if (!v2 || !std::islower(static_cast<unsigned char>((*v2)[0])))
      throw SyntaxError(pos, "variable");
    return f_eq(*ident, *v2);
  }
};

}  // namespace

Concept parse_concept(std::string_view text) {
  Parser p{text};
  Concept c = p.concept_or();
  if (!p.eof()) throw SyntaxError(p.pos, "end of input");
  return c;
}

Formula parse_formula(std::string_view text) {
  Parser p{text};
  Formula f = p.formula_or();
  if (!p.eof()) throw SyntaxError(p.pos, "end of input");
  return f;
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

ConceptEnumerator::ConceptEnumerator(int max_rank, int max_size,
                                     std::vector<Rat> grid,
                                     std::vector<std::string> atoms,
                                     std::string role)
    : max_rank_(max_rank),
      max_size_(max_size),
      grid_(std::move(grid)),
      atoms_(std::move(atoms)),
      role_(std::move(role)) {
  for (const Rat& q : grid_)
    if (!q.in_unit()) throw Error("enumeration grid value out of [0,1]: " + q.str());
  bank_.resize(1);  // bank_[0] unused
}

void ConceptEnumerator::reset() {
  cur_size_ = 1;
  cur_pos_ = 0;
}

void ConceptEnumerator::ensure_size(int size) {
  while (static_cast<int>(bank_.size()) <= size) {
    int s = static_cast<int>(bank_.size());
    std::vector<std::pair<Concept, int>> out;
    auto add = [&](Concept c) {
      int r = rank(c);
      if (r > max_rank_) return;
      std::string key = print_concept(c);
      if (!seen_.insert(key).second) return;
      out.emplace_back(std::move(c), r);
    };
    if (s == 1) {
      for (const Rat& q : grid_) add(c_const(q));
      for (const auto& a : atoms_) add(c_atom(a));
    } else {
      for (const auto& [child, r] : bank_[s - 1]) {
        (void)r;
        add(c_neg(child));
        for (const Rat& q : grid_) add(c_sub(child, q));
        add(c_dia(child, role_));
      }
      // binary connectives: sizes split as (i, s-1-i); canonical argument
      // order (left text <= right text) quotients out commutativity
      for (int i = 1; i <= s - 2; ++i) {
        int j = s - 1 - i;
        if (j < 1) continue;
        for (const auto& [l, rl] : bank_[i]) {
          (void)rl;
          for (const auto& [rr, rrk] : bank_[j]) {
            (void)rrk;
            if (print_concept(l) <= print_concept(rr)) {
              add(c_and(l, rr));
              add(c_or(l, rr));
            } else {
              add(c_and(rr, l));
              add(c_or(rr, l));
            }
          }
        }
      }
    }
    bank_.push_back(std::move(out));
  }
}

std::optional<Concept> ConceptEnumerator::next() {
  for (;;) {
    if (cur_size_ > max_size_) return std::nullopt;
    ensure_size(cur_size_);
    const auto& bucket = bank_[cur_size_];
    if (cur_pos_ < bucket.size()) return bucket[cur_pos_++].first;
    ++cur_size_;
    cur_pos_ = 0;
  }
}

std::vector<Concept> enumerate_concepts(int max_rank, int max_size,
                                        const std::vector<Rat>& grid,
                                        const std::vector<std::string>& atoms,
                                        const std::string& role,
                                        std::size_t budget) {
  ConceptEnumerator en(max_rank, max_size, grid, atoms, role);
  std::vector<Concept> out;
  while (out.size() < budget) {
    auto c = en.next();
    if (!c) break;
    out.push_back(std::move(*c));
  }
  return out;
}

}  // namespace pfml
