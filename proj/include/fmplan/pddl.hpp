#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fmplan/errors.hpp"

namespace fmplan::pddl {

struct Fact {
  std::string pred;
  std::vector<std::string> args;
  Fact() = default;
  Fact(std::string p, std::vector<std::string> a) : pred(std::move(p)), args(std::move(a)) {}
  auto operator<=>(const Fact&) const = default;
  std::string str() const;
};

using FactSet = std::set<Fact>;

struct Parameter {
  std::string name;  // with leading '?'
  std::string kind;  // declared type; "object" when omitted
  auto operator<=>(const Parameter&) const = default;
};

struct Formula {
  enum class Kind { Atom, And, Or, Not, Exists };
  Kind kind = Kind::And;
  Fact atom;                          // Atom
  std::vector<Formula> children;      // And/Or/Not
  std::vector<Parameter> quantified;  // Exists
  bool operator==(const Formula&) const = default;

  static Formula make_atom(Fact f) {
    Formula x;
    x.kind = Kind::Atom;
    x.atom = std::move(f);
    return x;
  }
};

struct Effect {
  bool del = false;
  Fact atom;  // args may include the wildcard "_" in deletes
  bool operator==(const Effect&) const = default;
};

// Named cost hook with operator-parameter arguments; resolved by the planner.
struct CostExpr {
  std::string hook;
  std::vector<std::string> args;
  bool operator==(const CostExpr&) const = default;
};

struct OperatorDef {
  std::string name;
  std::vector<Parameter> params;
  Formula precondition;
  std::vector<Effect> effects;
  std::optional<CostExpr> cost;
  bool operator==(const OperatorDef&) const = default;
};

struct DerivedDef {
  std::string pred;
  std::vector<Parameter> params;
  Formula body;
  bool operator==(const DerivedDef&) const = default;
};

struct StreamDef {
  std::string name;
  bool test = false;  // test streams certify facts about existing values only
  std::vector<Parameter> inputs;
  std::vector<Fact> input_pattern;  // atoms over the inputs
  std::vector<Parameter> outputs;
  std::vector<Fact> certified;
  bool operator==(const StreamDef&) const = default;
};

struct PredicateDef {
  std::string name;
  std::vector<Parameter> params;
  bool operator==(const PredicateDef&) const = default;
};

struct DomainDef {
  std::string name;
  std::vector<std::pair<std::string, std::string>> types;  // (type, parent)
  std::vector<PredicateDef> predicates;
  std::vector<OperatorDef> operators;
  std::vector<DerivedDef> derived;
  std::vector<StreamDef> streams;
  bool operator==(const DomainDef&) const = default;

  const OperatorDef* find_operator(const std::string& n) const;
  const PredicateDef* find_predicate(const std::string& n) const;
  bool is_derived(const std::string& pred) const;
  // Derived definitions in dependency (stratum) order; computed at parse time.
  std::vector<int> strata_order;
};

struct ObjectDecl {
  std::string name;
  std::string kind;
  auto operator<=>(const ObjectDecl&) const = default;
};

struct ProblemDef {
  std::string name;
  std::string domain;
  std::vector<ObjectDecl> objects;
  FactSet init;
  Formula goal;
  bool operator==(const ProblemDef&) const = default;
};

// Object -> kind table with single-inheritance subtyping.
class KindTable {
 public:
  KindTable() = default;
  KindTable(const DomainDef& d, const std::vector<ObjectDecl>& objs);
  void add_object(const std::string& name, const std::string& kind);
  bool has(const std::string& obj) const { return obj_kind_.count(obj) > 0; }
  const std::string& kind_of(const std::string& obj) const;
  bool is_a(const std::string& obj, const std::string& kind) const;
  bool kind_is_a(std::string kind, const std::string& want) const;
  // Deterministic (sorted) listing of objects whose kind derives from `kind`.
  std::vector<std::string> objects_of(const std::string& kind) const;

 private:
  std::map<std::string, std::string> obj_kind_;
  std::map<std::string, std::string> type_parent_;
};

DomainDef parse_domain(const std::string& text);
ProblemDef parse_problem(const std::string& text, const DomainDef& d);
std::string print_domain(const DomainDef& d);
std::string print_problem(const ProblemDef& p);

// Two-level fact lookup so searches can layer fluents over a fixed certified
// base without copying either set.
struct FactView {
  const FactSet* primary = nullptr;
  const FactSet* overlay = nullptr;
  bool count(const Fact& f) const {
    return (primary && primary->count(f)) || (overlay && overlay->count(f));
  }
};

// Fixpoint of the derived-predicate rules over `state`, stratum by stratum;
// negation as failure against lower strata. Returns state plus derived facts.
FactSet evaluate_derived(const FactSet& state, const DomainDef& d, const KindTable& kinds);

// Formula evaluation over a fixed fact set (all variables must be bound or
// quantified). Used for goals and ground preconditions.
bool eval_formula(const Formula& f, const FactSet& facts, const KindTable& kinds);

// Derived-aware evaluation: derived atoms are computed on demand against the
// view, memoized in `memo` (one map per state). The formula must be ground up
// to existential quantification.
bool eval_formula_lazy(const Formula& f, const FactView& facts, const DomainDef& d,
                       const KindTable& kinds, std::map<Fact, int>& memo);

// Enumerates every binding of `params` under which the conjunction of
// `pattern` atoms holds in the view; bindings are reported in deterministic
// order. Used for stream instantiation and operator grounding.
void enumerate_bindings(const std::vector<Parameter>& params, const std::vector<Fact>& pattern,
                        const FactView& facts, const KindTable& kinds,
                        const std::function<void(const std::map<std::string, std::string>&)>& fn);

struct GroundOperator {
  std::string name;
  std::vector<std::string> args;
  double cost = 0.0;
  bool cost_infeasible = false;
  std::string str() const;
  auto operator<=>(const GroundOperator&) const = default;
};

Formula substitute(const Formula& f, const std::map<std::string, std::string>& sub);

bool applicable(const FactSet& state, const GroundOperator& op, const DomainDef& d, const KindTable& kinds);

// Applies effects (wildcard deletes remove all matching facts). Throws
// PlanningError when the operator is not applicable.
FactSet apply(const FactSet& state, const GroundOperator& op, const DomainDef& d, const KindTable& kinds);

}  // namespace fmplan::pddl
