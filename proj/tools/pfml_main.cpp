// pfml: workbench CLI for probabilistic fuzzy modal logic over finite models.
//
// Subcommands: validate, eval, dist, synth, check, transform. All values are
// exact rationals printed as "p/q"; JSON reports (--json) are byte-identical
// for identical invocations. Exit codes: 0 success / all checks pass,
// 1 domain failure (invalid model, invalid certificate, suite failure),
// 2 usage or expression parse error.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pfml/errors.hpp"
#include "pfml/metrics.hpp"
#include "pfml/model.hpp"
#include "pfml/semantics.hpp"
#include "pfml/synthesis.hpp"
#include "pfml/syntax.hpp"
#include "pfml/workbench.hpp"

using namespace pfml;
using ordered_json = nlohmann::ordered_json;

namespace {

struct UsageError : Error {
  using Error::Error;
};

ordered_json report_head(const std::string& command) {
  ordered_json j;
  j["schema"] = "pfml/1";
  j["command"] = command;
  return j;
}

std::pair<std::string, std::string> split_pair(const std::string& text) {
  auto comma = text.find(',');
  if (comma == std::string::npos)
    throw UsageError("expected a comma-separated pair, got \"" + text + "\"");
  return {text.substr(0, comma), text.substr(comma + 1)};
}

std::pair<std::string, int> split_state_nat(const std::string& text) {
  auto [s, k] = split_pair(text);
  try {
    std::size_t used = 0;
    int n = std::stoi(k, &used);
    if (used != k.size() || n < 0) throw std::invalid_argument(k);
    return {s, n};
  } catch (const std::exception&) {
    throw UsageError("expected state,<natural>, got \"" + text + "\"");
  }
}

std::vector<Rat> parse_grid(const std::string& text) {
  std::vector<Rat> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) grid.push_back(Rat::parse(item));
  if (grid.empty()) throw UsageError("empty constant grid");
  return grid;
}

void emit(const ordered_json& j, bool json_mode, const std::string& text) {
  if (json_mode)
    std::cout << j.dump() << "\n";
  else
    std::cout << text;
}

ordered_json coupling_json(const Model& m, const Coupling& mu) {
  ordered_json out = ordered_json::array();
  for (const auto& [x, y, p] : mu.entries) {
    ordered_json e;
    e["from"] = m.state_name(x);
    e["to"] = m.state_name(y);
    e["mass"] = p.str();
    out.push_back(std::move(e));
  }
  return out;
}

ordered_json potential_json(const Model& m, const Potential& f) {
  ordered_json out = ordered_json::object();
  for (const auto& [s, v] : f.values) out[m.state_name(s)] = v.str();
  return out;
}

// ---------------------------------------------------------------------------

int cmd_validate(const std::string& path, bool json_mode) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  ordered_json j = report_head("validate");
  ValidationOutcome outcome;
  try {
    outcome = validate_model(raw_model_from_json_text(ss.str()));
  } catch (const SyntaxError& e) {
    j["valid"] = false;
    j["parse_error"] = e.what();
    emit(j, json_mode, std::string("parse error: ") + e.what() + "\n");
    return 1;
  }
  j["valid"] = outcome.ok();
  ordered_json violations = ordered_json::array();
  std::ostringstream text;
  if (outcome.ok()) {
    j["model_hash"] = model_hash(*outcome.model);
    j["states"] = outcome.model->num_states();
    text << "valid model: " << outcome.model->num_states() << " state(s), hash "
         << model_hash(*outcome.model) << "\n";
  } else {
    text << "invalid model:\n";
    for (const auto& v : outcome.violations) {
      ordered_json vj;
      vj["location"] = v.location;
      vj["message"] = v.message;
      violations.push_back(std::move(vj));
      text << "  " << v.location << ": " << v.message << "\n";
    }
  }
  j["violations"] = std::move(violations);
  emit(j, json_mode, text.str());
  return outcome.ok() ? 0 : 1;
}

int cmd_eval(const std::string& path, const std::string& role,
             const std::string& concept_text, const std::string& formula_text,
             const std::string& state, const std::vector<std::string>& env_args,
             bool all_states, bool json_mode) {
  Model m = model_from_file(path, role);
  ordered_json j = report_head("eval");
  j["model_hash"] = model_hash(m);
  std::ostringstream text;
  if (!concept_text.empty() == !formula_text.empty())
    throw UsageError("exactly one of --concept / --formula is required");
  if (!concept_text.empty()) {
    Concept c = parse_concept(concept_text);
    j["concept"] = print_concept(c);
    j["rank"] = rank(c);
    Valuation v = eval_concept(m, c);
    if (all_states || state.empty()) {
      ordered_json vals = ordered_json::object();
      for (int s = 0; s < m.num_states(); ++s) {
        vals[m.state_name(s)] = v[s].str();
        text << m.state_name(s) << ": " << v[s].str() << "\n";
      }
      j["values"] = std::move(vals);
    } else {
      int s = m.state_index(state);
      j["state"] = state;
      j["value"] = v[s].str();
      text << v[s].str() << "\n";
    }
  } else {
    Formula f = parse_formula(formula_text);
    j["formula"] = print_formula(f);
    j["qrank"] = qrank(f);
    Env env;
    ordered_json envj = ordered_json::object();
    for (const auto& kv : env_args) {
      auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw UsageError("--env entries look like x=state, got \"" + kv + "\"");
      std::string var = kv.substr(0, eq), st = kv.substr(eq + 1);
      env[var] = m.state_index(st);
      envj[var] = st;
    }
    j["env"] = std::move(envj);
    Rat v = eval_formula(m, f, env);
    j["value"] = v.str();
    text << v.str() << "\n";
  }
  emit(j, json_mode, text.str());
  return 0;
}

int cmd_dist(const std::string& path, const std::string& role, int depth,
             const std::string& method_arg, const std::string& pair_arg,
             int game_bound, std::size_t budget, const std::string& grid_arg,
             bool json_mode) {
  Model m = model_from_file(path, role);
  ordered_json j = report_head("dist");
  j["model_hash"] = model_hash(m);
  j["depth"] = depth;
  j["method"] = method_arg;
  std::ostringstream text;

  bool all = method_arg == "all";
  std::vector<Method> methods;
  if (all) {
    methods = {Method::Wasserstein, Method::Kantorovich, Method::Game,
               Method::LogicalWitness};
  } else {
    auto parsed = parse_method(method_arg);
    if (!parsed) throw UsageError("unknown method: " + method_arg);
    methods = {*parsed};
  }

  std::optional<std::pair<int, int>> pair;
  if (!pair_arg.empty()) {
    auto [x, y] = split_pair(pair_arg);
    pair = {m.state_index(x), m.state_index(y)};
  }

  std::vector<Rat> grid = parse_grid(grid_arg);
  // per-method tables for all depths 0..depth, for the stabilization report
  std::vector<std::vector<DistanceTable>> chains;
  LogicalLbResult lb;
  for (Method method : methods) {
    std::vector<DistanceTable> chain;
    if (method == Method::LogicalWitness) {
      for (int d = 0; d <= depth; ++d) chain.push_back(logical_witness_table(m, d));
    } else if (method == Method::LogicalLB) {
      for (int d = 0; d <= depth; ++d) {
        LogicalLbResult r = logical_lb_table(m, d, budget, grid);
        if (d == depth) lb = r;
        chain.push_back(std::move(r.table));
      }
    } else {
      MetricEngine engine(m, method, game_bound);
      for (int d = 0; d <= depth; ++d) chain.push_back(engine.table(d));
    }
    chains.push_back(std::move(chain));
  }

  auto value_str = [&](std::size_t mi, int a, int b) {
    return chains[mi][depth].at(a, b).str();
  };

  ordered_json pairs = ordered_json::array();
  bool all_equal = true;
  auto emit_pair = [&](int a, int b) {
    ordered_json pj;
    pj["a"] = m.state_name(a);
    pj["b"] = m.state_name(b);
    ordered_json vals = ordered_json::object();
    text << "(" << m.state_name(a) << ", " << m.state_name(b) << ")";
    bool equal = true;
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      vals[method_name(methods[mi])] = value_str(mi, a, b);
      text << "  " << method_name(methods[mi]) << "=" << value_str(mi, a, b);
      if (chains[mi][depth].at(a, b) != chains[0][depth].at(a, b)) equal = false;
    }
    pj["values"] = std::move(vals);
    if (all) {
      pj["verdict"] = equal ? "EQUAL" : "DIFFER";
      text << "  " << (equal ? "EQUAL" : "DIFFER");
      if (!equal) all_equal = false;
    }
    text << "\n";
    pairs.push_back(std::move(pj));
  };

  text << "depth " << depth << ", method " << method_arg << "\n";
  if (pair) {
    emit_pair(pair->first, pair->second);
  } else {
    for (int a = 0; a < m.num_states(); ++a)
      for (int b = a + 1; b < m.num_states(); ++b) emit_pair(a, b);
  }
  j["pairs"] = std::move(pairs);

  // witnesses for single-pair queries
  if (pair && pair->first != pair->second && depth >= 1) {
    ordered_json wit = ordered_json::object();
    int a = pair->first, b = pair->second;
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      Method method = methods[mi];
      if (method == Method::Wasserstein || method == Method::Game) {
        if (!m.blocking(a) && !m.blocking(b)) {
          MetricEngine engine(m, method, game_bound);
          wit[method_name(method)] =
              coupling_json(m, engine.optimal_coupling(depth, a, b));
        }
      } else if (method == Method::Kantorovich) {
        if (!m.blocking(a) && !m.blocking(b)) {
          MetricEngine engine(m, method, game_bound);
          wit[method_name(method)] =
              potential_json(m, engine.potential(depth, a, b).potential);
        }
      } else if (method == Method::LogicalWitness) {
        WitnessCertificate cert = synthesize_witness(m, depth, a, b);
        wit[method_name(method)] = print_concept(cert.concept_);
      } else {
        const Concept& c =
            lb.witnesses[DistanceTable::pair_index(m.num_states(), a, b)];
        if (c) wit[method_name(method)] = print_concept(c);
      }
    }
    j["witnesses"] = std::move(wit);
  }

  // stabilization flag over the computed chain (observational only)
  std::optional<int> stabilized;
  for (int d = 0; d + 1 <= depth; ++d)
    if (chains[0][d].equal_values(chains[0][d + 1])) {
      stabilized = d;
      break;
    }
  if (stabilized) {
    j["stabilized_at"] = *stabilized;
    text << "chain d_0..d_" << depth << ": stabilized at depth " << *stabilized
         << " (d_" << *stabilized << " = d_" << *stabilized + 1 << ")\n";
  } else {
    j["stabilized_at"] = nullptr;
    text << "chain d_0..d_" << depth << ": no stabilization observed\n";
  }

  emit(j, json_mode, text.str());
  if (all && !all_equal) return 1;
  return 0;
}

int cmd_synth(const std::string& path, const std::string& role, int depth,
              const std::string& pair_arg, unsigned long eps_denominator,
              bool json_mode) {
  Model m = model_from_file(path, role);
  auto [x, y] = split_pair(pair_arg);
  int a = m.state_index(x), b = m.state_index(y);
  SynthesisSession::Options opts;
  opts.grid_denominator = eps_denominator;
  SynthesisSession session(m, opts);
  WitnessCertificate cert = session.witness(depth, a, b);
  ordered_json j = report_head("synth");
  j["model_hash"] = model_hash(m);
  j["pair"] = ordered_json::array({x, y});
  j["depth"] = depth;
  j["concept"] = print_concept(cert.concept_);
  j["concept_dag"] = concept_to_json(cert.concept_, true);
  j["rank"] = rank(cert.concept_);
  j["achieved"] = cert.achieved.str();
  j["target"] = cert.claimed.str();
  j["valid"] = cert.valid;
  std::ostringstream text;
  text << "concept: " << print_concept(cert.concept_) << "\n"
       << "rank: " << rank(cert.concept_) << "\n"
       << "achieved |C(" << x << ") - C(" << y << ")| = " << cert.achieved.str()
       << "\n"
       << "d_" << depth << "(" << x << ", " << y << ") = " << cert.claimed.str()
       << "\n"
       << (cert.valid ? "VALID" : "INVALID") << "\n";
  emit(j, json_mode, text.str());
  return cert.valid ? 0 : 1;
}

int cmd_check(const std::string& path, const std::string& role,
              const std::vector<int>& random_args, std::uint64_t seed,
              const std::string& suites_arg, int depth, bool json_mode) {
  auto started = std::chrono::steady_clock::now();
  CheckRequest req;
  req.depth = depth;
  req.seed = seed;
  if (!random_args.empty()) {
    if (random_args.size() != 3)
      throw UsageError("--random takes three values: count sizeBound denomBound");
    req.denom_bound = random_args[2];
    req.models = random_models(random_args[0], random_args[1], random_args[2], seed);
  } else if (!path.empty()) {
    req.models = {model_from_file(path, role)};
  } else {
    throw UsageError("check needs a model file or --random");
  }
  std::stringstream ss(suites_arg);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) req.suites.push_back(item);
  if (req.suites.empty()) throw UsageError("no suites named");

  std::vector<SuiteOutcome> outcomes;
  try {
    outcomes = run_suites(req);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  ordered_json j = report_head("check");
  j["depth"] = depth;
  j["seed"] = seed;
  j["models"] = req.models.size();
  ordered_json sj = ordered_json::array();
  std::ostringstream text;
  bool all_pass = true;
  int pass_count = 0;
  for (const SuiteOutcome& out : outcomes) {
    ordered_json oj;
    oj["suite"] = out.suite;
    oj["checked"] = out.checked;
    oj["failures"] = out.failures;
    if (!out.pass()) {
      oj["first_counterexample"] = out.first_failure;
      all_pass = false;
    } else {
      ++pass_count;
    }
    sj.push_back(std::move(oj));
    text << "suite " << out.suite << ": "
         << (out.pass() ? "pass" : "FAIL") << " (" << out.checked - out.failures
         << "/" << out.checked << ")";
    if (!out.pass()) text << "  first counterexample: " << out.first_failure;
    text << "\n";
  }
  j["suites"] = std::move(sj);
  j["pass"] = all_pass;
  auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                     std::chrono::steady_clock::now() - started)
                     .count();
  text << (all_pass ? "all suites pass" : "FAILURES present") << " (" << pass_count
       << "/" << outcomes.size() << " suites), " << elapsed << " ms\n";
  emit(j, json_mode, text.str());
  return all_pass ? 0 : 1;
}

int cmd_transform(const std::string& path, const std::string& role,
                  const std::string& restrict_arg, const std::string& unravel_arg,
                  const std::string& union_arg, const std::string& out_path,
                  bool json_mode) {
  Model m = model_from_file(path, role);
  int selected = (!restrict_arg.empty()) + (!unravel_arg.empty()) + (!union_arg.empty());
  if (selected != 1)
    throw UsageError("exactly one of --restrict / --unravel / --union is required");
  Model result = m;
  ordered_json j = report_head("transform");
  j["model_hash"] = model_hash(m);
  std::ostringstream text;
  if (!restrict_arg.empty()) {
    auto [state, k] = split_state_nat(restrict_arg);
    result = restrict_model(m, m.state_index(state), k);
    j["transform"] = "restrict";
    text << "restricted to the radius-" << k << " neighbourhood of " << state
         << ": " << result.num_states() << " state(s)\n";
  } else if (!unravel_arg.empty()) {
    auto [state, k] = split_state_nat(unravel_arg);
    auto [tree, root] = unravel(m, m.state_index(state), k);
    result = std::move(tree);
    j["transform"] = "unravel";
    j["root"] = result.state_name(root);
    text << "unravelled from " << state << " to depth " << k << ": "
         << result.num_states() << " state(s), root " << result.state_name(root)
         << "\n";
  } else {
    Model other = model_from_file(union_arg, role);
    result = disjoint_union({&m, &other}).model;
    j["transform"] = "union";
    text << "disjoint union: " << result.num_states() << " state(s)\n";
  }
  std::string serialized = model_to_json_text(result);
  j["result_hash"] = model_hash(result);
  j["states"] = result.num_states();
  if (out_path.empty() || out_path == "-") {
    j["model"] = ordered_json::parse(serialized);
    text << serialized << "\n";
  } else {
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot write " + out_path);
    out << serialized << "\n";
    j["output"] = out_path;
    text << "written to " << out_path << "\n";
  }
  emit(j, json_mode, text.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pfml: exact workbench for probabilistic fuzzy modal logic"};
  app.require_subcommand(1);
  bool json_mode = false;
  app.add_flag("--json", json_mode, "machine-readable report (deterministic)");

  std::string path, role = "r";
  std::string concept_text, formula_text, state, pair_arg, method_arg = "all";
  std::string restrict_arg, unravel_arg, union_arg, out_path;
  std::string suites_arg, grid_arg = "0,1/2,1";
  std::vector<std::string> env_args;
  std::vector<int> random_args;
  bool all_states = false;
  int depth = 2;
  int game_bound = kDefaultSupportBound;
  std::size_t budget = 2000;
  std::uint64_t seed = 0;
  unsigned long eps_denominator = 0;

  auto* validate = app.add_subcommand("validate", "validate a model file");
  validate->add_option("model", path)->required();

  auto* eval = app.add_subcommand("eval", "evaluate a concept or formula");
  eval->add_option("model", path)->required();
  eval->add_option("--role", role, "designated role (default r)");
  eval->add_option("--concept", concept_text);
  eval->add_option("--formula", formula_text);
  eval->add_option("--state", state, "state for --concept");
  eval->add_option("--env", env_args, "bindings x=state for --formula")
      ->delimiter(',');
  eval->add_flag("--all-states", all_states, "print the whole valuation");

  auto* dist = app.add_subcommand("dist", "depth-n behavioural distances");
  dist->add_option("model", path)->required();
  dist->add_option("--role", role);
  dist->add_option("--depth", depth)->check(CLI::NonNegativeNumber);
  dist->add_option("--method", method_arg,
                   "wasserstein|kantorovich|game|logical-lb|all");
  dist->add_option("--pair", pair_arg, "a,b");
  dist->add_option("--game-bound", game_bound, "vertex-enumeration support bound");
  dist->add_option("--budget", budget, "concept budget for logical-lb");
  dist->add_option("--grid", grid_arg, "constant grid for logical-lb");

  auto* synth = app.add_subcommand("synth", "synthesize a distinguishing concept");
  synth->add_option("model", path)->required();
  synth->add_option("--role", role);
  synth->add_option("--depth", depth)->check(CLI::NonNegativeNumber);
  synth->add_option("--pair", pair_arg, "a,b")->required();
  synth->add_option("--eps", eps_denominator,
                    "quantize potentials to multiples of 1/D (stress mode)");

  auto* check = app.add_subcommand("check", "run invariant suites");
  check->add_option("model", path);
  check->add_option("--role", role);
  check->add_option("--random", random_args,
                    "count sizeBound denomBound: use seeded random models")
      ->expected(3);
  check->add_option("--seed", seed);
  check->add_option("--suite", suites_arg,
                    "comma list: coincidence,duality,monotone,nonexpansive,"
                    "locality,unravel,union,strategies,translation")
      ->required();
  check->add_option("--depth", depth)->check(CLI::NonNegativeNumber);

  auto* transform = app.add_subcommand("transform", "restrict/unravel/union");
  transform->add_option("model", path)->required();
  transform->add_option("--role", role);
  transform->add_option("--restrict", restrict_arg, "a,k");
  transform->add_option("--unravel", unravel_arg, "a,k");
  transform->add_option("--union", union_arg, "other model file");
  transform->add_option("-o,--output", out_path, "output path (default stdout)");

  for (CLI::App* sub : {validate, eval, dist, synth, check, transform})
    sub->add_flag("--json", json_mode, "machine-readable report (deterministic)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*validate) return cmd_validate(path, json_mode);
    if (*eval)
      return cmd_eval(path, role, concept_text, formula_text, state, env_args,
                      all_states, json_mode);
    if (*dist)
      return cmd_dist(path, role, depth, method_arg, pair_arg, game_bound, budget,
                      grid_arg, json_mode);
    if (*synth)
      return cmd_synth(path, role, depth, pair_arg, eps_denominator, json_mode);
    if (*check)
      return cmd_check(path, role, random_args, seed, suites_arg, depth, json_mode);
    if (*transform)
      return cmd_transform(path, role, restrict_arg, unravel_arg, union_arg,
                           out_path, json_mode);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const SyntaxError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
