#pragma once

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "fmplan/chain.hpp"
#include "fmplan/motion.hpp"
#include "fmplan/pddl.hpp"
#include "fmplan/scene.hpp"

namespace fmplan::planner {

// Trajectory value with the bookkeeping samplers and collision tests need.
struct TrajValue {
  std::string arm;
  Trajectory traj;
  std::optional<HeldObject> held;
  std::set<std::string> exempt;  // objects the trajectory may legitimately touch
  Wrench planned_wrench;         // world frame at the end effector (forceful ops)
  Pose wrench_frame;             // world pose of the planned wrench frame
};

using Value = std::variant<Pose, Configuration, GraspValue, Wrench, TrajValue, double>;

// Opaque-handle store for stream-minted continuous values.
class ValueStore {
 public:
  std::string mint(const std::string& prefix, Value v);
  bool has(const std::string& id) const { return values_.count(id) > 0; }
  const Value& get(const std::string& id) const;

  template <typename T>
  const T& get_as(const std::string& id) const {
    const Value& v = get(id);
    const T* p = std::get_if<T>(&v);
    if (!p) throw PlanningError("value '" + id + "' has unexpected type");
    return *p;
  }

  void put(const std::string& id, Value v) { values_[id] = std::move(v); }

 private:
  std::map<std::string, Value> values_;
  std::map<std::string, int> counters_;
};

// One output tuple of a generator call (handles minted into the store).
using OutputTuple = std::vector<std::string>;

// Generator procedure: binds inputs, mints values, returns output tuples.
// Test streams return one empty tuple to certify, none to decline.
using StreamGen = std::function<std::vector<OutputTuple>(const std::vector<std::string>& inputs,
                                                         ValueStore& store, Rng& rng, int call_index)>;

struct StreamImpl {
  std::string name;
  StreamGen gen;
};

struct SolveBudget {
  int max_rounds = 3;
  int max_stream_evals_per_round = 20000;
  int search_nodes = 200000;
  double cost_threshold = std::numeric_limits<double>::infinity();
};

// Cost hook: evaluated once per ground operator at grounding time.
using CostHook = std::function<OperatorCost(const pddl::GroundOperator& op, ValueStore& store)>;

struct Plan {
  bool found = false;
  std::vector<pddl::GroundOperator> steps;
  double total_cost = 0.0;
  // Replay context: certified static facts and stream-minted objects.
  pddl::FactSet certified;
  std::vector<pddl::ObjectDecl> minted;
  // Deterministic effort counters (also the "ms" column of sweep output).
  uint64_t work = 0;
  int rounds_used = 0;
};

Plan incremental_solve(const pddl::DomainDef& d, const pddl::ProblemDef& p,
                       const std::vector<StreamImpl>& streams, const SolveBudget& budget,
                       uint64_t seed, ValueStore& store, const CostHook& cost_hook);

// Replays the plan from the initial state (plus its certified facts); true iff
// every step is applicable and the goal holds at the end.
bool validate_plan(const pddl::DomainDef& d, const pddl::ProblemDef& p, const Plan& plan);

std::string plan_to_text(const Plan& plan);
std::string plan_to_json(const Plan& plan, const std::string& domain, const std::string& scenario,
                         uint64_t seed);

}  // namespace fmplan::planner
