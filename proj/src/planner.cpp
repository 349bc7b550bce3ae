#include "fmplan/planner.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include "json.hpp"

namespace fmplan::planner {

std::string ValueStore::mint(const std::string& prefix, Value v) {
  int n = counters_[prefix]++;
  std::string id = prefix + std::to_string(n);
  values_[id] = std::move(v);
  return id;
}

const Value& ValueStore::get(const std::string& id) const {
  auto it = values_.find(id);
  if (it == values_.end()) throw PlanningError("unknown value handle '" + id + "'");
  return it->second;
}

namespace {

using pddl::Fact;
using pddl::FactSet;
using pddl::FactView;
using pddl::Formula;
using pddl::GroundOperator;
using pddl::KindTable;

// Predicates written by any operator effect are fluents; everything else in
// the initial state or certified by streams is static.
std::set<std::string> fluent_predicates(const pddl::DomainDef& d) {
  std::set<std::string> out;
  for (const auto& op : d.operators) {
    for (const auto& e : op.effects) out.insert(e.atom.pred);
  }
  return out;
}

void collect_static_positives(const Formula& f, const std::set<std::string>& fluents,
                              const pddl::DomainDef& d, std::vector<Fact>& out) {
  switch (f.kind) {
    case Formula::Kind::Atom:
      if (!fluents.count(f.atom.pred) && !d.is_derived(f.atom.pred)) out.push_back(f.atom);
      return;
    case Formula::Kind::And:
      for (const auto& c : f.children) collect_static_positives(c, fluents, d, out);
      return;
    default:
      return;  // atoms under or/not/exists do not bind parameters
  }
}

// First top-level positive fluent atom; used to index ground operators by a
// required state fact so expansion only touches plausible candidates.
std::optional<Fact> index_atom(const Formula& ground_pre, const std::set<std::string>& fluents,
                               const pddl::DomainDef& d) {
  if (ground_pre.kind == Formula::Kind::Atom) {
    if (fluents.count(ground_pre.atom.pred)) return ground_pre.atom;
    return std::nullopt;
  }
  if (ground_pre.kind != Formula::Kind::And) return std::nullopt;
  for (const auto& c : ground_pre.children) {
    if (c.kind == Formula::Kind::Atom && fluents.count(c.atom.pred) && !d.is_derived(c.atom.pred)) {
      return c.atom;
    }
  }
  return std::nullopt;
}

struct GroundRec {
  GroundOperator op;
  Formula precondition;  // ground
  std::vector<Fact> adds;
  std::vector<Fact> dels;  // may contain "_" wildcards
  std::optional<Fact> index;
  double cost = 0.0;
  uint64_t order = 0;  // tie-break key (insertion, seed-shuffled per round)
};

struct SearchNode {
  FactSet fluents;
  int parent = -1;
  int via = -1;  // GroundRec index
  double g = 0.0;
  int len = 0;
};

std::string op_signature(const GroundOperator& op) {
  std::string s = op.name;
  for (const auto& a : op.args) s += "\x1f" + a;
  return s;
}

}  // namespace

Plan incremental_solve(const pddl::DomainDef& d, const pddl::ProblemDef& p,
                       const std::vector<StreamImpl>& streams, const SolveBudget& budget,
                       uint64_t seed, ValueStore& store, const CostHook& cost_hook) {
  if (budget.max_rounds < 1 || budget.max_stream_evals_per_round < 1 || budget.search_nodes < 1) {
    throw PlanningError("incremental_solve: budgets must be positive");
  }
  Rng run_rng(seed ^ 0x9d2c5680u);
  KindTable kinds(d, p.objects);
  std::set<std::string> fluents_preds = fluent_predicates(d);

  FactSet statics, init_fluents;
  for (const auto& f : p.init) {
    (fluents_preds.count(f.pred) ? init_fluents : statics).insert(f);
  }

  Plan plan;
  std::vector<pddl::ObjectDecl> minted;

  // Stream bookkeeping: per (stream, binding) call counts; declined tests.
  std::map<std::string, int> call_counts;
  std::set<std::string> done_tests;

  std::vector<GroundRec> ground;
  std::set<std::string> ground_seen;
  std::map<std::string, std::vector<int>> ops_by_index_fact;
  std::vector<int> ops_always;
  uint64_t order_counter = 0;
  uint64_t work = 0;

  const std::map<std::string, const StreamImpl*> impl_by_name = [&] {
    std::map<std::string, const StreamImpl*> m;
    for (const auto& s : streams) m[s.name] = &s;
    return m;
  }();

  for (int round = 0; round < budget.max_rounds; ++round) {
    plan.rounds_used = round + 1;
    // -- Stream phase: level-by-level instantiation until fixpoint or budget.
    int evals_left = budget.max_stream_evals_per_round;
    for (int level = 0; level < 12 && evals_left > 0; ++level) {
      bool any_new = false;
      for (const auto& sd : d.streams) {
        auto impl_it = impl_by_name.find(sd.name);
        if (impl_it == impl_by_name.end()) {
          throw PlanningError("no implementation for stream '" + sd.name + "'");
        }
        // Collect bindings first: certification must not feed new instances
        // within the same pass.
        std::vector<std::vector<std::string>> bindings;
        pddl::enumerate_bindings(sd.inputs, sd.input_pattern, FactView{&statics, nullptr}, kinds,
                                 [&](const std::map<std::string, std::string>& env) {
                                   std::vector<std::string> b;
                                   for (const auto& in : sd.inputs) b.push_back(env.at(in.name));
                                   bindings.push_back(std::move(b));
                                 });
        for (const auto& b : bindings) {
          if (evals_left <= 0) break;
          std::string key = sd.name;
          for (const auto& x : b) key += "\x1f" + x;
          if (sd.test && done_tests.count(key)) continue;
          int call_idx = call_counts[key];
          if (!sd.test && call_idx > round) continue;  // one generative call per round per binding
          if (sd.test) {
            done_tests.insert(key);
          } else {
            call_counts[key] = call_idx + 1;
          }
          --evals_left;
          ++work;
          uint64_t stream_key = stable_hash(key) ^ (0x5bd1e995u + static_cast<uint64_t>(call_idx));
          Rng srng = Rng(seed ^ 0x2545f491u).split(stream_key);
          auto tuples = impl_it->second->gen(b, store, srng, call_idx);
          for (const auto& tup : tuples) {
            if (tup.size() != sd.outputs.size()) {
              throw PlanningError("stream '" + sd.name + "' returned wrong output arity");
            }
            std::map<std::string, std::string> env;
            for (size_t i = 0; i < sd.inputs.size(); ++i) env[sd.inputs[i].name] = b[i];
            for (size_t i = 0; i < tup.size(); ++i) {
              env[sd.outputs[i].name] = tup[i];
              if (!kinds.has(tup[i])) {
                kinds.add_object(tup[i], sd.outputs[i].kind);
                minted.push_back({tup[i], sd.outputs[i].kind});
              }
            }
            for (const auto& tmpl : sd.certified) {
              Fact g = tmpl;
              for (auto& a : g.args) {
                auto it = env.find(a);
                if (it != env.end()) a = it->second;
              }
              if (statics.insert(g).second) any_new = true;
            }
          }
        }
      }
      if (!any_new) break;
    }

    // -- Grounding phase: enumerate new operator instances over the statics.
    std::vector<int> fresh;
    for (const auto& opdef : d.operators) {
      std::vector<Fact> binders;
      collect_static_positives(opdef.precondition, fluents_preds, d, binders);
      pddl::enumerate_bindings(opdef.params, binders, FactView{&statics, nullptr}, kinds,
                               [&](const std::map<std::string, std::string>& env) {
        GroundOperator op;
        op.name = opdef.name;
        for (const auto& prm : opdef.params) {
          auto it = env.find(prm.name);
          if (it == env.end()) return;  // parameter not bound by static atoms
          op.args.push_back(it->second);
        }
        for (size_t i = 0; i < opdef.params.size(); ++i) {
          if (!kinds.is_a(op.args[i], opdef.params[i].kind)) return;
        }
        std::string sig = op_signature(op);
        if (!ground_seen.insert(sig).second) return;
        GroundRec rec;
        rec.op = op;
        std::map<std::string, std::string> sub(env.begin(), env.end());
        rec.precondition = pddl::substitute(opdef.precondition, sub);
        for (const auto& e : opdef.effects) {
          Fact g = e.atom;
          for (auto& a : g.args) {
            auto it = sub.find(a);
            if (it != sub.end()) a = it->second;
          }
          (e.del ? rec.dels : rec.adds).push_back(g);
        }
        rec.index = index_atom(rec.precondition, fluents_preds, d);
        if (cost_hook) {
          OperatorCost oc = cost_hook(rec.op, store);
          if (oc.infeasible) return;  // p = 0: operator pruned
          rec.cost = oc.value;
          rec.op.cost = oc.value;
        }
        ground.push_back(std::move(rec));
        fresh.push_back(static_cast<int>(ground.size()) - 1);
      });
    }
    // Seed-shuffled insertion order for deterministic but seed-varied
    // tie-breaking among equal-length plans.
    Rng shuffle_rng = run_rng.split(0xabcd00 + static_cast<uint64_t>(round));
    shuffle_rng.shuffle(fresh);
    for (int gi : fresh) {
      ground[static_cast<size_t>(gi)].order = order_counter++;
      const auto& rec = ground[static_cast<size_t>(gi)];
      if (rec.index) {
        ops_by_index_fact[rec.index->str()].push_back(gi);
      } else {
        ops_always.push_back(gi);
      }
    }

    // -- Search phase: best-first on (length, insertion order) with the
    // accumulated robustness cost as a pruning threshold.
    std::vector<SearchNode> nodes;
    nodes.push_back({init_fluents, -1, -1, 0.0, 0});
    // key: (len, order, node index)
    std::set<std::tuple<int, uint64_t, int>> open;
    open.insert({0, 0, 0});
    std::map<FactSet, double> best_g;
    best_g[init_fluents] = 0.0;
    int expanded = 0;
    int goal_node = -1;

    while (!open.empty() && expanded < budget.search_nodes) {
      auto it = open.begin();
      int ni = std::get<2>(*it);
      open.erase(it);
      ++expanded;
      ++work;
      SearchNode node = nodes[static_cast<size_t>(ni)];

      FactView view{&statics, &node.fluents};
      std::map<Fact, int> memo;
      if (pddl::eval_formula_lazy(p.goal, view, d, kinds, memo)) {
        goal_node = ni;
        break;
      }

      // Candidate operators: indexed by one of the node's fluents, plus the
      // always-candidates.
      std::vector<int> cands = ops_always;
      for (const auto& f : node.fluents) {
        auto oit = ops_by_index_fact.find(f.str());
        if (oit != ops_by_index_fact.end()) {
          cands.insert(cands.end(), oit->second.begin(), oit->second.end());
        }
      }
      std::sort(cands.begin(), cands.end());
      for (int gi : cands) {
        const GroundRec& rec = ground[static_cast<size_t>(gi)];
        double g2 = node.g + rec.cost;
        if (g2 > budget.cost_threshold + 1e-9) continue;
        if (!pddl::eval_formula_lazy(rec.precondition, view, d, kinds, memo)) continue;
        FactSet next = node.fluents;
        for (const auto& del : rec.dels) {
          bool wildcard = false;
          for (const auto& a : del.args)
            if (a == "_") wildcard = true;
          if (!wildcard) {
            next.erase(del);
          } else {
            for (auto fit = next.lower_bound(Fact{del.pred, {}});
                 fit != next.end() && fit->pred == del.pred;) {
              bool m = fit->args.size() == del.args.size();
              if (m) {
                for (size_t i = 0; i < del.args.size(); ++i) {
                  if (del.args[i] != "_" && del.args[i] != fit->args[i]) { m = false; break; }
                }
              }
              fit = m ? next.erase(fit) : std::next(fit);
            }
          }
        }
        for (const auto& add : rec.adds) next.insert(add);
        auto bit = best_g.find(next);
        if (bit != best_g.end() && bit->second <= g2 + 1e-12) continue;
        best_g[next] = g2;
        nodes.push_back({std::move(next), ni, gi, g2, node.len + 1});
        open.insert({node.len + 1, rec.order, static_cast<int>(nodes.size()) - 1});
      }
    }

    if (goal_node >= 0) {
      std::vector<int> chain;
      for (int c = goal_node; c > 0; c = nodes[static_cast<size_t>(c)].parent) chain.push_back(c);
      std::reverse(chain.begin(), chain.end());
      plan.found = true;
      plan.total_cost = 0.0;
      for (int c : chain) {
        const GroundRec& rec = ground[static_cast<size_t>(nodes[static_cast<size_t>(c)].via)];
        plan.steps.push_back(rec.op);
        plan.total_cost += rec.cost;
      }
      plan.certified = statics;
      for (const auto& f : p.init) plan.certified.erase(f);
      plan.minted = minted;
      plan.work = work;
      return plan;
    }
  }

  plan.found = false;
  plan.certified = statics;
  for (const auto& f : p.init) plan.certified.erase(f);
  plan.minted = minted;
  plan.work = work;
  return plan;
}

bool validate_plan(const pddl::DomainDef& d, const pddl::ProblemDef& p, const Plan& plan) {
  KindTable kinds(d, p.objects);
  for (const auto& o : plan.minted) {
    if (!kinds.has(o.name)) kinds.add_object(o.name, o.kind);
  }
  FactSet state = p.init;
  state.insert(plan.certified.begin(), plan.certified.end());
  double cost_sum = 0.0;
  try {
    for (const auto& step : plan.steps) {
      if (!pddl::applicable(state, step, d, kinds)) return false;
      state = pddl::apply(state, step, d, kinds);
      cost_sum += step.cost;
    }
  } catch (const std::exception&) {
    return false;
  }
  if (std::abs(cost_sum - plan.total_cost) > 1e-6) return false;
  FactSet full = pddl::evaluate_derived(state, d, kinds);
  return pddl::eval_formula(p.goal, full, kinds);
}

std::string plan_to_text(const Plan& plan) {
  std::ostringstream os;
  if (!plan.found) {
    os << "no plan found within budget\n";
    return os.str();
  }
  os.precision(6);
  for (size_t i = 0; i < plan.steps.size(); ++i) {
    os << i + 1 << ": " << plan.steps[i].str() << "  cost=" << std::fixed << plan.steps[i].cost << "\n";
  }
  os << "steps=" << plan.steps.size() << " total_cost=" << std::fixed << plan.total_cost << "\n";
  return os.str();
}

std::string plan_to_json(const Plan& plan, const std::string& domain, const std::string& scenario,
                         uint64_t seed) {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["domain"] = domain;
  j["scenario"] = scenario;
  j["seed"] = seed;
  j["found"] = plan.found;
  j["steps"] = nlohmann::ordered_json::array();
  for (const auto& s : plan.steps) {
    nlohmann::ordered_json js;
    js["op"] = s.name;
    js["args"] = s.args;
    js["cost"] = s.cost;
    j["steps"].push_back(js);
  }
  j["step_count"] = plan.steps.size();
  j["total_cost"] = plan.total_cost;
  j["work"] = plan.work;
  j["rounds"] = plan.rounds_used;
  return j.dump(2) + "\n";
}

}  // namespace fmplan::planner
