#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "samp/access.hpp"
#include "samp/assignment.hpp"
#include "samp/common.hpp"
#include "samp/network.hpp"

namespace samp {

struct Move {
  enum class Kind { Add, Drop, Swap };
  Kind kind = Kind::Add;
  LineId add_line = -1;   // line gaining a vehicle (Add, Swap)
  LineId drop_line = -1;  // line losing a vehicle (Drop, Swap)

  std::string describe() const;
};

// Forbidden elementary move: sign +1 blocks adding a vehicle to `line`
// (rule +e_l), sign -1 blocks dropping one (rule -e_l).
struct TabuRule {
  LineId line;
  int sign;
  auto operator<=>(const TabuRule&) const = default;
};

// Short-term memory. A rule added at iteration k with tenure t expires at
// k + ceil(t): blocked(k') holds for k' < expiry only.
class TabuList {
 public:
  void add(TabuRule rule, int expiry) { rules_[rule] = expiry; }
  bool blocked(TabuRule rule, int iteration) const {
    auto it = rules_.find(rule);
    return it != rules_.end() && iteration < it->second;
  }
  void purge(int iteration) {
    std::erase_if(rules_, [&](const auto& kv) { return kv.second <= iteration; });
  }
  // Removes the rule with the fewest iterations left (ties: lowest line id,
  // drop-blocking rules first). Returns false when empty.
  bool erase_shortest_remaining();
  std::size_t size() const { return rules_.size(); }
  const std::map<TabuRule, int>& rules() const { return rules_; }

 private:
  std::map<TabuRule, int> rules_;  // ordered: deterministic iteration
};

class Rng;  // documented single generator, defined in rng.hpp

// Long-term memory: bounded pool of attractive fleet vectors. Insertions
// beyond capacity evict a uniformly random entry; backtracking pops one.
class AttractivePool {
 public:
  explicit AttractivePool(std::size_t cap) : cap_(cap) {}
  void push(FleetVector y, Rng& rng);
  FleetVector pop_random(Rng& rng);
  std::size_t size() const { return pool_.size(); }
  bool empty() const { return pool_.empty(); }

 private:
  std::size_t cap_;
  std::vector<FleetVector> pool_;
};

struct SolverConfig {
  int iterations = 200;        // tabu/annealing steps before the final search
  double t0 = 6.0;             // initial tabu tenure
  double tenure_growth = 1.15; // multiplier when tenures grow
  double temperature0 = 1e16;  // initial annealing temperature
  double cooling = 0.999;      // multiplicative cooling per iteration
  int q_in_max = 20;           // inner nonimprovement cutoff (backtrack)
  int q_out_max = 10;          // outer nonimprovement cutoff (tenure reset)
  int n_tilde_max = 50;        // first-pass tentative candidates per list
  int n_max = 2;               // feasible candidates kept per list
  int ltm_cap = 40;
  std::uint64_t seed = 1;
  bool final_search = true;    // run the terminal exhaustive local search

  AccessParams access;
  AssignmentConfig assignment;
  UserCostWeights weights;     // epsilon lives here
  OperatorCostHook operator_hook;
};

// Caches objective and user-cost evaluations keyed by the fleet vector (both
// are pure functions of it). Shared across solver runs on the same instance
// so parameter sweeps do not repeat assignments.
class Evaluator {
 public:
  Evaluator(const TransitNetwork& net, const ODMatrix& od, AccessParams access,
            AssignmentConfig assignment, UserCostWeights weights,
            OperatorCostHook hook = {});

  double objective(const FleetVector& y);

  struct CostEval {
    bool reachable = false;   // every positive demand had a strategy under y
    double user_cost = kInf;  // defined when reachable
  };
  const CostEval& cost_of(const FleetVector& y);

  // Bounds, budget, the user-cost allowance, and the operator hook in one
  // check. The infinite-epsilon, disabled-hook configuration never runs
  // assignment.
  bool is_feasible(const FleetVector& y, double epsilon);

  // User cost of the network's initial fleet; computed on first use.
  double baseline();

  const TransitNetwork& network() const { return net_; }
  const ODMatrix& od() const { return od_; }
  const AccessParams& access_params() const { return access_; }
  const AssignmentConfig& assignment_config() const { return assignment_; }
  const UserCostWeights& weights() const { return weights_; }
  const OperatorCostHook& hook() const { return hook_; }

  long access_evaluations = 0;      // cache misses (actual recomputations)
  long assignment_evaluations = 0;  // cache misses

 private:
  struct VecHash {
    std::size_t operator()(const FleetVector& v) const {
      return fnv1a64(v.data(), v.size() * sizeof(int));
    }
  };

  const TransitNetwork& net_;
  const ODMatrix& od_;
  AccessParams access_;
  AssignmentConfig assignment_;
  UserCostWeights weights_;
  OperatorCostHook hook_;
  std::unordered_map<FleetVector, double, VecHash> access_cache_;
  std::unordered_map<FleetVector, CostEval, VecHash> cost_cache_;
  double baseline_ = -1;
};

struct HistoryRow {
  int iteration;
  double incumbent_objective;
  double best_objective;
  bool operator==(const HistoryRow&) const = default;
};

struct SolveResult {
  FleetVector best;
  double best_objective = 0;
  FleetVector initial;
  double initial_objective = 0;
  std::vector<HistoryRow> history;
  double baseline_user_cost = 0;
  long access_evaluations = 0;
  long assignment_evaluations = 0;
  int forced_backtracks = 0;
  int ltm_backtracks = 0;
  int sa_acceptances = 0;
  int improvements = 0;
};

// Annotated neighbor produced by the passes.
struct Candidate {
  Move move;
  FleetVector fleet;
  double objective = 0;
};

class Solver {
 public:
  Solver(Evaluator& eval, const SolverConfig& cfg);
  ~Solver();  // out of line: members only forward-declared here

  // Runs cfg.iterations steps from the initial fleet, then (unless disabled)
  // the exhaustive local search from the best solution found.
  SolveResult run();

  // One tabu/annealing iteration; exposed for tests.
  void step();

  // Steepest-ascent over the full ADD/DROP/SWAP neighborhood, no tabu rules:
  // repeatedly take the best feasible improving neighbor. The result admits
  // no feasible improving single move.
  FleetVector exhaustive_local_search(FleetVector y);

  // State inspection for tests.
  const FleetVector& incumbent() const { return incumbent_; }
  double incumbent_objective() const { return incumbent_obj_; }
  const FleetVector& best() const { return best_; }
  double best_objective() const { return best_obj_; }
  const TabuList& tabu() const { return tabu_; }
  std::size_t ltm_size() const { return ltm_.size(); }
  double temperature() const { return temperature_; }
  double tenure() const { return tenure_; }
  int q_in() const { return q_in_; }
  int q_out() const { return q_out_; }
  int iteration() const { return iteration_; }
  const std::vector<HistoryRow>& history() const { return history_; }
  long last_second_pass_checks() const { return last_second_pass_checks_; }

  // First-pass candidate generation (shuffled scan under design feasibility
  // and tabu/aspiration), exposed for tests.
  std::vector<Candidate> first_pass(bool add_moves, int cap);
  // Feasibility filter in descending objective order, early-halting at
  // cfg.n_max kept candidates.
  std::vector<Candidate> second_pass(std::vector<Candidate> tentative);
  std::vector<Candidate> swap_search(const std::vector<Candidate>& adds,
                                     const std::vector<Candidate>& drops);

  int forced_backtracks = 0;
  int ltm_backtracks = 0;
  int sa_acceptances = 0;
  int improvements = 0;

 private:
  bool design_feasible_add(const FleetVector& y, LineId l) const;
  bool design_feasible_drop(const FleetVector& y, LineId l) const;
  void apply_move(const Candidate& c);
  void counter_evaluation();
  void upkeep();
  void log_row();

  Evaluator& eval_;
  SolverConfig cfg_;
  const TransitNetwork& net_;

  std::vector<int> line_type_;        // interned vehicle-type index per line
  std::vector<long long> type_budget_;

  FleetVector incumbent_, best_;
  double incumbent_obj_ = 0, best_obj_ = 0;
  TabuList tabu_;
  AttractivePool ltm_;
  double temperature_ = 0, tenure_ = 0;
  int q_in_ = 0, q_out_ = 0;
  int iteration_ = 0;
  std::vector<HistoryRow> history_;
  long last_second_pass_checks_ = 0;
  std::unique_ptr<Rng> rng_;
};

struct VerifyReport {
  bool bounds_ok = false;
  bool budget_ok = false;
  bool user_cost_ok = false;
  bool locally_optimal = false;
  double baseline = 0;
  double user_cost = 0;   // of the verified fleet (NaN when skipped)
  double objective = 0;
  std::string detail;     // first failure, empty when ok

  bool ok() const { return bounds_ok && budget_ok && user_cost_ok && locally_optimal; }
};

// Independent re-check of a solution: fleet bounds, type budgets, the
// user-cost bound against a recomputed baseline, and single-move local
// optimality via a full neighborhood sweep.
VerifyReport verify_solution(Evaluator& eval, const FleetVector& y,
                             double epsilon);

}  // namespace samp
