#include "pfml/model.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pfml/errors.hpp"

namespace pfml {

using ordered_json = nlohmann::ordered_json;

Rat SuccessorRow::sum() const {
  Rat s(0);
  for (const auto& [_, p] : entries) s += p;
  return s;
}

Rat SuccessorRow::at(int target) const {
  for (const auto& [t, p] : entries)
    if (t == target) return p;
  return Rat(0);
}

int Model::state_index(std::string_view name) const {
  auto it = state_index_.find(std::string(name));
  if (it == state_index_.end()) throw UnknownStateError(std::string(name));
  return it->second;
}

std::optional<int> Model::find_state(std::string_view name) const {
  auto it = state_index_.find(std::string(name));
  if (it == state_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> Model::find_atom(std::string_view name) const {
  auto it = atom_index_.find(std::string(name));
  if (it == atom_index_.end()) return std::nullopt;
  return it->second;
}

Rat Model::atom_by_name(std::string_view atom, int state) const {
  auto idx = find_atom(atom);
  return idx ? atoms_[*idx][state] : Rat(0);
}

bool Model::has_role(std::string_view role) const {
  return roles_.count(std::string(role)) > 0;
}

Model Model::with_designated_role(std::string role) const {
  if (!has_role(role)) throw UnknownRoleError(role);
  Model copy = *this;
  copy.designated_role_ = std::move(role);
  return copy;
}

const SuccessorRow& Model::row(int state) const {
  return row_of(designated_role_, state);
}

const SuccessorRow& Model::row_of(std::string_view role, int state) const {
  auto it = roles_.find(std::string(role));
  if (it == roles_.end()) {
    static const SuccessorRow kEmpty{};
    return kEmpty;
  }
  return it->second[state];
}

// Grants validate_model access to the private representation.
struct ModelBuilder {
  Model m;
  void set_states(std::vector<std::string> states) {
    m.states_ = std::move(states);
    for (int i = 0; i < static_cast<int>(m.states_.size()); ++i)
      m.state_index_[m.states_[i]] = i;
  }
  void add_atom(const std::string& name, std::vector<Rat> values) {
    m.atom_index_[name] = static_cast<int>(m.atom_names_.size());
    m.atom_names_.push_back(name);
    m.atoms_.push_back(std::move(values));
  }
  void add_role(const std::string& name, std::vector<SuccessorRow> rows) {
    m.role_names_.push_back(name);
    m.roles_[name] = std::move(rows);
  }
  void set_designated(std::string role) { m.designated_role_ = std::move(role); }
};

ValidationOutcome validate_model(const RawModel& raw, std::string designated_role) {
  std::vector<Violation> violations;
  auto bad = [&](std::string where, std::string what) {
    violations.push_back({std::move(where), std::move(what)});
  };

  std::unordered_map<std::string, int> index;
  for (int i = 0; i < static_cast<int>(raw.states.size()); ++i) {
    if (index.count(raw.states[i]))
      bad("state " + raw.states[i], "duplicate state identifier");
    else
      index[raw.states[i]] = i;
  }
  if (raw.states.empty()) bad("states", "model has no states");

  ModelBuilder b;
  b.set_states(raw.states);
  b.set_designated(std::move(designated_role));

  auto parse_entry = [&](const std::string& where, const std::string& text,
                         Rat& out) -> bool {
    try {
      out = Rat::parse(text);
    } catch (const Error&) {
      bad(where, "not a rational: \"" + text + "\"");
      return false;
    }
    return true;
  };

  for (const auto& [atom, row] : raw.atoms) {
    std::vector<Rat> values(raw.states.size(), Rat(0));
    for (const auto& [state, text] : row) {
      auto it = index.find(state);
      if (it == index.end()) {
        bad("atom " + atom + ", state " + state, "unknown state");
        continue;
      }
      Rat v;
      if (!parse_entry("atom " + atom + "(" + state + ")", text, v)) continue;
      if (!v.in_unit()) {
        bad("atom " + atom + "(" + state + ")",
            "value out of range [0,1]: " + v.str());
        continue;
      }
      values[it->second] = v;
    }
    b.add_atom(atom, std::move(values));
  }

  for (const auto& [role, rows] : raw.roles) {
    std::vector<SuccessorRow> parsed(raw.states.size());
    for (const auto& [state, row] : rows) {
      auto sit = index.find(state);
      if (sit == index.end()) {
        bad("role " + role + ", row " + state, "unknown state");
        continue;
      }
      SuccessorRow r;
      Rat sum(0);
      bool row_ok = true;
      for (const auto& [target, text] : row) {
        auto tit = index.find(target);
        if (tit == index.end()) {
          bad("role " + role + ", row " + state, "unknown target " + target);
          row_ok = false;
          continue;
        }
        Rat p;
        if (!parse_entry("role " + role + ", row " + state + " -> " + target,
                         text, p)) {
          row_ok = false;
          continue;
        }
        if (p.sign() < 0 || p > Rat(1)) {
          bad("role " + role + ", row " + state + " -> " + target,
              "probability out of range [0,1]: " + p.str());
          row_ok = false;
          continue;
        }
        if (p.is_zero()) continue;  // omitted and explicit zeros are the same
        r.entries.emplace_back(tit->second, p);
        sum += p;
      }
      if (!row_ok) continue;
      if (!sum.is_zero() && !sum.is_one()) {
        bad("role " + role + ", row " + state,
            "row sum must be exactly 0 or 1, got " + sum.str());
        continue;
      }
      std::sort(r.entries.begin(), r.entries.end(),
                [](const auto& x, const auto& y) { return x.first < y.first; });
      parsed[sit->second] = std::move(r);
    }
    b.add_role(role, std::move(parsed));
  }

  if (!violations.empty()) return ValidationOutcome{std::nullopt, violations};
  return ValidationOutcome{std::move(b.m), {}};
}

RawModel raw_model_from_json_text(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SyntaxError(e.byte, std::string("valid JSON (") + e.what() + ")");
  }
  RawModel raw;
  if (!j.is_object()) throw IoError("model file: top level must be an object");
  if (!j.contains("states") || !j["states"].is_array())
    throw IoError("model file: missing \"states\" array");
  for (const auto& s : j["states"]) {
    if (!s.is_string()) throw IoError("model file: state ids must be strings");
    raw.states.push_back(s.get<std::string>());
  }
  auto as_rat_string = [](const ordered_json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    throw IoError("model file: rationals must be strings like \"3/10\"");
  };
  if (j.contains("atoms")) {
    for (const auto& [atom, row] : j["atoms"].items())
      for (const auto& [state, v] : row.items())
        raw.atoms[atom][state] = as_rat_string(v);
  }
  if (j.contains("roles")) {
    for (const auto& [role, rows] : j["roles"].items())
      for (const auto& [state, row] : rows.items()) {
        raw.roles[role][state];  // a present empty row is an explicit blocking row
        for (const auto& [target, v] : row.items())
          raw.roles[role][state][target] = as_rat_string(v);
      }
  }
  return raw;
}

Model model_from_json_text(const std::string& text, const std::string& designated_role) {
  auto outcome = validate_model(raw_model_from_json_text(text), designated_role);
  if (!outcome.ok()) {
    std::ostringstream os;
    os << "invalid model:";
    for (const auto& v : outcome.violations)
      os << " [" << v.location << ": " << v.message << "]";
    throw IoError(os.str());
  }
  return *std::move(outcome.model);
}

Model model_from_file(const std::string& path, const std::string& designated_role) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json_text(ss.str(), designated_role);
}

std::string model_to_json_text(const Model& m) {
  ordered_json j;
  j["states"] = m.states();
  ordered_json atoms = ordered_json::object();
  for (int ai = 0; ai < static_cast<int>(m.atom_names().size()); ++ai) {
    ordered_json row = ordered_json::object();
    for (int s = 0; s < m.num_states(); ++s) {
      const Rat& v = m.atom(ai, s);
      if (!v.is_zero()) row[m.state_name(s)] = v.str();
    }
    atoms[m.atom_names()[ai]] = std::move(row);
  }
  j["atoms"] = std::move(atoms);
  ordered_json roles = ordered_json::object();
  for (const auto& role : m.role_names()) {
    ordered_json rows = ordered_json::object();
    for (int s = 0; s < m.num_states(); ++s) {
      const SuccessorRow& r = m.row_of(role, s);
      if (r.blocking()) continue;
      ordered_json row = ordered_json::object();
      for (const auto& [t, p] : r.entries) row[m.state_name(t)] = p.str();
      rows[m.state_name(s)] = std::move(row);
    }
    roles[role] = std::move(rows);
  }
  j["roles"] = std::move(roles);
  return j.dump();
}

std::string model_hash(const Model& m) {
  std::string s = model_to_json_text(m);
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a 64
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

DisjointUnion disjoint_union(const std::vector<const Model*>& models) {
  if (models.empty()) throw Error("disjoint_union of zero models");
  RawModel raw;
  DisjointUnion out;
  std::vector<std::vector<std::string>> tagged(models.size());
  for (std::size_t k = 0; k < models.size(); ++k) {
    const Model& m = *models[k];
    for (int s = 0; s < m.num_states(); ++s) {
      std::string name = m.state_name(s) + "#" + std::to_string(k);
      tagged[k].push_back(name);
      raw.states.push_back(name);
    }
    // the union vocabulary covers every component's atoms and roles, even
    // those with only zero entries or blocking rows
    for (const auto& atom : m.atom_names()) raw.atoms[atom];
    for (const auto& role : m.role_names()) raw.roles[role];
  }
  for (std::size_t k = 0; k < models.size(); ++k) {
    const Model& m = *models[k];
    for (int ai = 0; ai < static_cast<int>(m.atom_names().size()); ++ai)
      for (int s = 0; s < m.num_states(); ++s) {
        const Rat& v = m.atom(ai, s);
        if (!v.is_zero()) raw.atoms[m.atom_names()[ai]][tagged[k][s]] = v.str();
      }
    for (const auto& role : m.role_names())
      for (int s = 0; s < m.num_states(); ++s) {
        const SuccessorRow& r = m.row_of(role, s);
        if (r.blocking()) continue;
        auto& row = raw.roles[role][tagged[k][s]];
        for (const auto& [t, p] : r.entries) row[tagged[k][t]] = p.str();
      }
  }
  auto outcome = validate_model(raw, models[0]->designated_role());
  // components were valid, so the union is; violations here are a bug
  if (!outcome.ok()) throw Error("disjoint_union produced an invalid model");
  out.model = *std::move(outcome.model);
  for (std::size_t k = 0; k < models.size(); ++k) {
    std::vector<int> inj(models[k]->num_states());
    for (int s = 0; s < models[k]->num_states(); ++s)
      inj[s] = out.model.state_index(tagged[k][s]);
    out.injections.push_back(std::move(inj));
  }
  return out;
}

namespace {

// Undirected support adjacency of the designated role.
std::vector<std::vector<int>> gaifman_adjacency(const Model& m) {
  std::vector<std::vector<int>> adj(m.num_states());
  for (int s = 0; s < m.num_states(); ++s)
    for (const auto& [t, p] : m.row(s).entries) {
      (void)p;
      adj[s].push_back(t);
      if (t != s) adj[t].push_back(s);
    }
  return adj;
}

std::vector<int> bfs_distances(const Model& m, int a) {
  auto adj = gaifman_adjacency(m);
  std::vector<int> dist(m.num_states(), -1);
  std::deque<int> queue{a};
  dist[a] = 0;
  while (!queue.empty()) {
    int s = queue.front();
    queue.pop_front();
    for (int t : adj[s])
      if (dist[t] < 0) {
        dist[t] = dist[s] + 1;
        queue.push_back(t);
      }
  }
  return dist;
}

void check_state(const Model& m, int s) {
  if (s < 0 || s >= m.num_states())
    throw UnknownStateError("state index " + std::to_string(s));
}

}  // namespace

std::optional<int> gaifman_distance(const Model& m, int a, int b) {
  check_state(m, a);
  check_state(m, b);
  int d = bfs_distances(m, a)[b];
  if (d < 0) return std::nullopt;
  return d;
}

Model restrict_model(const Model& m, int a, int k) {
  check_state(m, a);
  if (k < 0) throw Error("restrict: negative radius");
  auto dist = bfs_distances(m, a);
  RawModel raw;
  for (const auto& atom : m.atom_names()) raw.atoms[atom];
  raw.roles[m.designated_role()];
  for (int s = 0; s < m.num_states(); ++s)
    if (dist[s] >= 0 && dist[s] <= k) raw.states.push_back(m.state_name(s));
  for (int ai = 0; ai < static_cast<int>(m.atom_names().size()); ++ai)
    for (int s = 0; s < m.num_states(); ++s)
      if (dist[s] >= 0 && dist[s] <= k && !m.atom(ai, s).is_zero())
        raw.atoms[m.atom_names()[ai]][m.state_name(s)] = m.atom(ai, s).str();
  const std::string& role = m.designated_role();
  for (int s = 0; s < m.num_states(); ++s) {
    if (dist[s] < 0 || dist[s] >= k) continue;  // frontier states become blocking
    const SuccessorRow& r = m.row(s);
    if (r.blocking()) continue;
    auto& row = raw.roles[role][m.state_name(s)];
    for (const auto& [t, p] : r.entries) row[m.state_name(t)] = p.str();
  }
  auto outcome = validate_model(raw, role);
  if (!outcome.ok()) throw Error("restrict produced an invalid model");
  return *std::move(outcome.model);
}

std::pair<Model, int> unravel(const Model& m, int a, int k) {
  check_state(m, a);
  if (k < 0) throw Error("unravel: negative depth");
  // Path states are generated level by level; names join components with ".".
  struct Path {
    std::string name;
    int last;
    int depth;
  };
  std::vector<Path> paths{{m.state_name(a), a, 0}};
  RawModel raw;
  const std::string& role = m.designated_role();
  for (const auto& atom : m.atom_names()) raw.atoms[atom];
  raw.roles[role];
  for (std::size_t i = 0; i < paths.size(); ++i) {
    Path p = paths[i];
    raw.states.push_back(p.name);
    for (int ai = 0; ai < static_cast<int>(m.atom_names().size()); ++ai)
      if (!m.atom(ai, p.last).is_zero())
        raw.atoms[m.atom_names()[ai]][p.name] = m.atom(ai, p.last).str();
    if (p.depth == k) continue;  // truncation: depth-k leaves are blocking
    const SuccessorRow& r = m.row(p.last);
    if (r.blocking()) continue;
    auto& row = raw.roles[role][p.name];
    for (const auto& [t, prob] : r.entries) {
      std::string child = p.name + "." + m.state_name(t);
      row[child] = prob.str();
      paths.push_back({std::move(child), t, p.depth + 1});
    }
  }
  auto outcome = validate_model(raw, role);
  if (!outcome.ok()) throw Error("unravel produced an invalid model");
  Model out = *std::move(outcome.model);
  int root = out.state_index(paths[0].name);
  return {std::move(out), root};
}

bool is_partial_isomorphism(const Model& m, const Model& n,
                            std::span<const int> as, std::span<const int> bs) {
  if (as.size() != bs.size())
    throw LengthMismatchError("partial isomorphism: vectors of unequal length");
  for (int s : as) check_state(m, s);
  for (int s : bs) check_state(n, s);
  std::size_t len = as.size();
  for (std::size_t i = 0; i < len; ++i)
    for (std::size_t j = 0; j < len; ++j)
      if ((as[i] == as[j]) != (bs[i] == bs[j])) return false;
  // atom values agree pointwise, over the union of the two vocabularies
  std::vector<std::string> atoms = m.atom_names();
  for (const auto& a : n.atom_names())
    if (std::find(atoms.begin(), atoms.end(), a) == atoms.end())
      atoms.push_back(a);
  for (std::size_t i = 0; i < len; ++i)
    for (const auto& atom : atoms)
      if (m.atom_by_name(atom, as[i]) != n.atom_by_name(atom, bs[i])) return false;
  for (std::size_t i = 0; i < len; ++i)
    for (std::size_t j = 0; j < len; ++j)
      if (m.row(as[i]).at(as[j]) != n.row(bs[i]).at(bs[j])) return false;
  return true;
}

int ef_script_first_failure(const Model& m, const Model& n,
                            std::span<const int> as, std::span<const int> bs) {
  if (as.size() != bs.size())
    throw LengthMismatchError("EF script: vectors of unequal length");
  for (std::size_t len = 0; len <= as.size(); ++len)
    if (!is_partial_isomorphism(m, n, as.subspan(0, len), bs.subspan(0, len)))
      return static_cast<int>(len);
  return 0;
}

}  // namespace pfml
