#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pfml/rational.hpp"

namespace pfml {

// ---------------------------------------------------------------------------
// Concepts
//
// Grammar (text form):   q | A | C - q | ~C | C & D | C | D | <role> C
// Precedence: ~ / <role> / - q  bind tighter than &, which binds tighter
// than |. "C + q" is accepted as sugar for ~(~C - q) and expanded on
// construction; it never appears in the AST.
// ---------------------------------------------------------------------------

enum class CKind { Const, Atom, TruncSub, Neg, And, Or, Dia };

struct ConceptNode;
using Concept = std::shared_ptr<const ConceptNode>;

struct ConceptNode {
  CKind kind;
  Rat q;             // Const value / TruncSub subtrahend
  std::string name;  // Atom name, or role name for Dia
  Concept a, b;      // children (a only for unary kinds)
};

Concept c_const(Rat q);
Concept c_atom(std::string name);
Concept c_sub(Concept child, Rat q);
Concept c_neg(Concept child);
Concept c_and(Concept l, Concept r);
Concept c_or(Concept l, Concept r);
Concept c_dia(Concept child, std::string role = "r");
// min(x + q, 1), expanded to ~(~C - q)
Concept c_add(Concept child, Rat q);

// Nesting depth of diamonds and atomic concepts.
int rank(const Concept& c);

std::string print_concept(const Concept& c);
Concept parse_concept(std::string_view text);  // throws SyntaxError

bool concepts_equal(const Concept& a, const Concept& b);
// Number of distinct nodes (concepts are shared DAGs after synthesis).
std::size_t dag_size(const Concept& c);
// Number of nodes of the fully expanded tree.
std::size_t tree_size(const Concept& c);

// Stable JSON form: {"kind": ..., children/fields}. With sharing=true the
// DAG is serialized as a node table plus a root index.
nlohmann::ordered_json concept_to_json(const Concept& c, bool sharing = false);

// ---------------------------------------------------------------------------
// First-order formulas
//
// Grammar adds:  A(x) | x = y | E x. phi | P x y. phi
// "P x y. phi" is the binder whose value at x is the expected truth value of
// phi at a random successor y of x; y is bound, x stays free.
// ---------------------------------------------------------------------------

enum class FKind { Const, Atom, Eq, TruncSub, Neg, And, Exists, DiaBind };

struct FormulaNode;
using Formula = std::shared_ptr<const FormulaNode>;

struct FormulaNode {
  FKind kind;
  Rat q;
  std::string atom;       // Atom
  std::string var, var2;  // Atom: var; Eq: var,var2; Exists: var; DiaBind: at,bound
  Formula a, b;
};

Formula f_const(Rat q);
Formula f_atom(std::string atom, std::string var);
Formula f_eq(std::string x, std::string y);
Formula f_sub(Formula child, Rat q);
Formula f_neg(Formula child);
Formula f_and(Formula l, Formula r);
Formula f_exists(std::string var, Formula child);
Formula f_diabind(std::string at, std::string bound, Formula child);

// Nesting depth of the binders (E, P) and propositional atoms.
int qrank(const Formula& f);

std::set<std::string> free_vars(const Formula& f);

std::string print_formula(const Formula& f);
Formula parse_formula(std::string_view text);  // throws SyntaxError

// ST_x: concepts are a fragment of the first-order language. The result has
// exactly one free variable x and qrank equal to the concept rank.
Formula standard_translation(const Concept& c, const std::string& x);

// ---------------------------------------------------------------------------
// Bounded enumeration
// ---------------------------------------------------------------------------

// Streams every concept (up to commutativity of & and |, argument order
// canonicalized lexicographically) with rank <= max_rank, node count <=
// max_size and constants drawn from `grid`. Restartable and deterministic.
class ConceptEnumerator {
 public:
  ConceptEnumerator(int max_rank, int max_size, std::vector<Rat> grid,
                    std::vector<std::string> atoms, std::string role = "r");

  std::optional<Concept> next();
  void reset();

 private:
  void ensure_size(int size);

  int max_rank_;
  int max_size_;
  std::vector<Rat> grid_;
  std::vector<std::string> atoms_;
  std::string role_;
  // bank_[s] holds all concepts of tree size s (s >= 1), with cached rank
  std::vector<std::vector<std::pair<Concept, int>>> bank_;
  std::set<std::string> seen_;
  int cur_size_ = 1;
  std::size_t cur_pos_ = 0;
};

std::vector<Concept> enumerate_concepts(int max_rank, int max_size,
                                        const std::vector<Rat>& grid,
                                        const std::vector<std::string>& atoms,
                                        const std::string& role = "r",
                                        std::size_t budget = SIZE_MAX);

}  // namespace pfml
