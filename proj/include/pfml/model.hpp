#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pfml/rational.hpp"

namespace pfml {

// Sparse successor distribution of one state under one role. Entries are
// strictly positive and sorted by target state index; an empty row means the
// state is blocking. A valid row sums to exactly 0 or exactly 1.
struct SuccessorRow {
  std::vector<std::pair<int, Rat>> entries;

  bool blocking() const { return entries.empty(); }
  Rat sum() const;
  Rat at(int target) const;  // 0 when absent
};

struct Violation {
  std::string location;  // names the state / atom / row concerned
  std::string message;
};

// Raw, unvalidated model data as it appears in the file format. Rationals are
// still strings here; validate_model turns this into a canonical Model or a
// list of violations.
struct RawModel {
  std::vector<std::string> states;
  // atom name -> state name -> rational string
  std::map<std::string, std::map<std::string, std::string>> atoms;
  // role name -> state name -> target name -> rational string
  std::map<std::string, std::map<std::string, std::map<std::string, std::string>>> roles;
};

// Finite probabilistic fuzzy model. Immutable after validation; every
// operation below is a pure function, so sharing a model across threads is
// safe. All distance/game machinery reads the designated role only (default
// "r"); other roles are carried through validation and serialization.
class Model {
 public:
  int num_states() const { return static_cast<int>(states_.size()); }
  const std::vector<std::string>& states() const { return states_; }
  const std::string& state_name(int i) const { return states_[i]; }
  int state_index(std::string_view name) const;  // throws UnknownStateError
  std::optional<int> find_state(std::string_view name) const;

  const std::vector<std::string>& atom_names() const { return atom_names_; }
  std::optional<int> find_atom(std::string_view name) const;
  // value of atom `atom_idx` at state `state`
  const Rat& atom(int atom_idx, int state) const { return atoms_[atom_idx][state]; }
  Rat atom_by_name(std::string_view atom, int state) const;  // 0 when absent

  const std::vector<std::string>& role_names() const { return role_names_; }
  bool has_role(std::string_view role) const;
  const std::string& designated_role() const { return designated_role_; }
  Model with_designated_role(std::string role) const;  // throws UnknownRoleError

  // Row of the designated role. The designated role may be absent from the
  // file; every state is then blocking.
  const SuccessorRow& row(int state) const;
  const SuccessorRow& row_of(std::string_view role, int state) const;
  bool blocking(int state) const { return row(state).blocking(); }

  friend struct ModelBuilder;

 private:
  std::vector<std::string> states_;
  std::unordered_map<std::string, int> state_index_;
  std::vector<std::string> atom_names_;
  std::unordered_map<std::string, int> atom_index_;
  std::vector<std::vector<Rat>> atoms_;  // [atom][state]
  std::vector<std::string> role_names_;
  std::map<std::string, std::vector<SuccessorRow>> roles_;
  std::string designated_role_ = "r";
  std::vector<SuccessorRow> empty_rows_;  // used when the designated role is absent
};

struct ValidationOutcome {
  std::optional<Model> model;
  std::vector<Violation> violations;
  bool ok() const { return model.has_value(); }
};

// Checks row sums (exactly 0 or 1), atom ranges, duplicate/unknown names.
ValidationOutcome validate_model(const RawModel& raw, std::string designated_role = "r");

// JSON file format, see README. Throws IoError / SyntaxError on malformed input.
RawModel raw_model_from_json_text(const std::string& text);
Model model_from_json_text(const std::string& text, const std::string& designated_role = "r");
Model model_from_file(const std::string& path, const std::string& designated_role = "r");
std::string model_to_json_text(const Model& m);

// FNV-1a over the canonical serialization; stable across runs.
std::string model_hash(const Model& m);

struct DisjointUnion {
  Model model;
  // injections[k]: state index in component k -> state index in the union
  std::vector<std::vector<int>> injections;
};

// Tags states of component k as "name#k". Atom and role vocabularies are the
// unions of the components' vocabularies (absent entries default to 0 /
// blocking, matching the file-format conventions).
DisjointUnion disjoint_union(const std::vector<const Model*>& models);

// Shortest-path distance in the undirected support graph of the designated
// role; nullopt when unreachable.
std::optional<int> gaifman_distance(const Model& m, int a, int b);

// Radius-k neighbourhood restriction: frontier states (distance exactly k)
// become blocking. Output carries the designated role only.
Model restrict_model(const Model& m, int a, int k);

// Depth-bounded tree unravelling from `a`; paths of length k are blocking.
// Returns the model and the index of the root state.
std::pair<Model, int> unravel(const Model& m, int a, int k);

// Partial isomorphism predicate of the Ehrenfeucht-Fraisse game: equality
// pattern, atom values and designated-role probabilities must all agree.
bool is_partial_isomorphism(const Model& m, const Model& n,
                            std::span<const int> as, std::span<const int> bs);

// Replays a scripted EF play: every prefix of the two vectors must be a
// partial isomorphism. Returns the first failing round (1-based), 0 if ok.
int ef_script_first_failure(const Model& m, const Model& n,
                            std::span<const int> as, std::span<const int> bs);

}  // namespace pfml
