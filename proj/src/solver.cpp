#include "samp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "samp/rng.hpp"

// Random draws per step, in order: the ADD-scan shuffle, then the DROP-scan
// shuffle (repeated for each search retry), then the annealing uniform draw
// when the best neighbor does not improve, then any pool draws (eviction on
// push, selection on backtrack). Keeping this order fixed is what makes
// seeded runs reproduce bit-identically.

namespace samp {

std::string Move::describe() const {
  switch (kind) {
    case Kind::Add: return "add(" + std::to_string(add_line) + ")";
    case Kind::Drop: return "drop(" + std::to_string(drop_line) + ")";
    case Kind::Swap:
      return "swap(-" + std::to_string(drop_line) + ",+" + std::to_string(add_line) + ")";
  }
  return "?";
}

bool TabuList::erase_shortest_remaining() {
  if (rules_.empty()) return false;
  auto best = rules_.begin();
  for (auto it = std::next(rules_.begin()); it != rules_.end(); ++it)
    if (it->second < best->second) best = it;  // map order breaks ties
  rules_.erase(best);
  return true;
}

void AttractivePool::push(FleetVector y, Rng& rng) {
  if (cap_ == 0) return;
  if (pool_.size() >= cap_) {
    std::size_t victim = static_cast<std::size_t>(rng.index(pool_.size()));
    pool_[victim] = std::move(y);
    return;
  }
  pool_.push_back(std::move(y));
}

FleetVector AttractivePool::pop_random(Rng& rng) {
  std::size_t pick = static_cast<std::size_t>(rng.index(pool_.size()));
  FleetVector y = std::move(pool_[pick]);
  pool_[pick] = std::move(pool_.back());
  pool_.pop_back();
  return y;
}

Evaluator::Evaluator(const TransitNetwork& net, const ODMatrix& od,
                     AccessParams access, AssignmentConfig assignment,
                     UserCostWeights weights, OperatorCostHook hook)
    : net_(net), od_(od), access_(access), assignment_(assignment),
      weights_(weights), hook_(std::move(hook)) {}

double Evaluator::objective(const FleetVector& y) {
  auto it = access_cache_.find(y);
  if (it != access_cache_.end()) return it->second;
  ++access_evaluations;
  double obj = access_objective(net_, y, access_).objective;
  access_cache_.emplace(y, obj);
  return obj;
}

const Evaluator::CostEval& Evaluator::cost_of(const FleetVector& y) {
  auto it = cost_cache_.find(y);
  if (it != cost_cache_.end()) return it->second;
  ++assignment_evaluations;
  CostEval eval;
  try {
    AssignmentResult r = transit_assignment(net_, y, od_, assignment_);
    eval.reachable = true;
    eval.user_cost = user_cost(net_, r, weights_);
  } catch (const UnreachableDemandError&) {
    eval.reachable = false;
    eval.user_cost = kInf;
  }
  return cost_cache_.emplace(y, eval).first->second;
}

double Evaluator::baseline() {
  if (baseline_ < 0) {
    const CostEval& eval = cost_of(net_.initial_fleet());
    if (!eval.reachable)
      throw UnreachableDemandError(-1, -1);  // seed network must serve its demand
    baseline_ = eval.user_cost;
  }
  return baseline_;
}

bool Evaluator::is_feasible(const FleetVector& y, double epsilon) {
  if (!hook_.feasible(net_, y)) return false;
  if (std::isinf(epsilon) && !hook_.enabled()) return true;  // bound never binds
  if (std::isinf(epsilon)) return true;
  const double base = baseline();
  const CostEval& eval = cost_of(y);
  if (!eval.reachable) return false;  // stranded demand rejects the move
  return check_user_cost_bound(eval.user_cost, base, epsilon);
}

namespace {

// Deterministic order for equal-objective candidates.
int move_rank(const Move& m) { return static_cast<int>(m.kind); }

bool candidate_before(const Candidate& a, const Candidate& b) {
  if (a.objective != b.objective) return a.objective > b.objective;
  if (move_rank(a.move) != move_rank(b.move)) return move_rank(a.move) < move_rank(b.move);
  if (a.move.add_line != b.move.add_line) return a.move.add_line < b.move.add_line;
  return a.move.drop_line < b.move.drop_line;
}

}  // namespace

Solver::Solver(Evaluator& eval, const SolverConfig& cfg)
    : eval_(eval), cfg_(cfg), net_(eval.network()), ltm_(cfg.ltm_cap),
      rng_(std::make_unique<Rng>(cfg.seed)) {
  std::vector<std::string> types;
  line_type_.resize(net_.lines.size());
  for (const Line& l : net_.lines) {
    auto it = std::find(types.begin(), types.end(), l.vehicle_type);
    if (it == types.end()) it = types.insert(types.end(), l.vehicle_type);
    line_type_[l.id] = static_cast<int>(it - types.begin());
  }
  type_budget_.assign(types.size(), 0);
  for (const Line& l : net_.lines)
    type_budget_[line_type_[l.id]] += l.initial_fleet;

  incumbent_ = net_.initial_fleet();
  validate_fleet_bounds(net_, incumbent_);
  incumbent_obj_ = eval_.objective(incumbent_);
  best_ = incumbent_;
  best_obj_ = incumbent_obj_;
  temperature_ = cfg_.temperature0;
  tenure_ = cfg_.t0;
  log_row();
}

Solver::~Solver() = default;

bool Solver::design_feasible_add(const FleetVector& y, LineId l) const {
  if (y[l] + 1 > net_.lines[l].fleet_max) return false;
  long long used = 1;  // the vehicle being added
  for (const Line& ln : net_.lines)
    if (line_type_[ln.id] == line_type_[l]) used += y[ln.id];
  return used <= type_budget_[line_type_[l]];
}

bool Solver::design_feasible_drop(const FleetVector& y, LineId l) const {
  return y[l] - 1 >= net_.lines[l].fleet_min;
}

std::vector<Candidate> Solver::first_pass(bool add_moves, int cap) {
  std::vector<LineId> order(net_.lines.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<LineId>(i);
  rng_->shuffle(order);

  const int k = iteration_ + 1;  // the step being executed
  std::vector<Candidate> kept;
  for (LineId l : order) {
    if (static_cast<int>(kept.size()) >= cap) break;
    Candidate c;
    if (add_moves) {
      if (!design_feasible_add(incumbent_, l)) continue;
      c.move = {Move::Kind::Add, l, -1};
      c.fleet = incumbent_;
      ++c.fleet[l];
    } else {
      if (!design_feasible_drop(incumbent_, l)) continue;
      c.move = {Move::Kind::Drop, -1, l};
      c.fleet = incumbent_;
      --c.fleet[l];
    }
    c.objective = eval_.objective(c.fleet);
    // Tabu rules block the elementary move unless it beats the best known
    // objective (aspiration).
    const TabuRule rule{l, add_moves ? +1 : -1};
    if (tabu_.blocked(rule, k) && !(c.objective > best_obj_)) continue;
    kept.push_back(std::move(c));
  }
  return kept;
}

std::vector<Candidate> Solver::second_pass(std::vector<Candidate> tentative) {
  std::sort(tentative.begin(), tentative.end(), candidate_before);
  std::vector<Candidate> kept;
  for (Candidate& c : tentative) {
    if (static_cast<int>(kept.size()) >= cfg_.n_max) break;
    ++last_second_pass_checks_;
    if (eval_.is_feasible(c.fleet, cfg_.weights.epsilon)) kept.push_back(std::move(c));
  }
  return kept;
}

std::vector<Candidate> Solver::swap_search(const std::vector<Candidate>& adds,
                                           const std::vector<Candidate>& drops) {
  struct Pair {
    LineId drop, add;
    double key;  // ordering uses the sum of the two individual objectives
  };
  std::vector<Pair> pairs;
  for (const Candidate& d : drops) {
    for (const Candidate& a : adds) {
      const LineId m = d.move.drop_line, l = a.move.add_line;
      if (m == l || line_type_[m] != line_type_[l]) continue;
      pairs.push_back({m, l, d.objective + a.objective});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
    if (x.key != y.key) return x.key > y.key;
    if (x.drop != y.drop) return x.drop < y.drop;
    return x.add < y.add;
  });

  std::vector<Candidate> kept;
  for (const Pair& p : pairs) {
    if (static_cast<int>(kept.size()) >= cfg_.n_max) break;
    Candidate c;
    c.move = {Move::Kind::Swap, p.add, p.drop};
    c.fleet = incumbent_;
    --c.fleet[p.drop];
    ++c.fleet[p.add];
    // The stored objective is the combined vector's own value, evaluated
    // fresh; the pair key above was only the scan order.
    c.objective = eval_.objective(c.fleet);
    ++last_second_pass_checks_;
    if (eval_.is_feasible(c.fleet, cfg_.weights.epsilon)) kept.push_back(std::move(c));
  }
  return kept;
}

void Solver::apply_move(const Candidate& c) {
  incumbent_ = c.fleet;
  incumbent_obj_ = c.objective;
  const int k = iteration_ + 1;
  const int expiry = k + static_cast<int>(std::ceil(tenure_));
  // Reversal rules: re-dropping an added vehicle and re-adding a dropped one
  // are both forbidden (swaps contribute both halves).
  if (c.move.kind == Move::Kind::Add || c.move.kind == Move::Kind::Swap)
    tabu_.add({c.move.add_line, -1}, expiry);
  if (c.move.kind == Move::Kind::Drop || c.move.kind == Move::Kind::Swap)
    tabu_.add({c.move.drop_line, +1}, expiry);
}

void Solver::step() {
  last_second_pass_checks_ = 0;
  tabu_.purge(iteration_ + 1);  // rules that cannot block this step go first

  auto search = [&](int cap) {
    auto adds = second_pass(first_pass(true, cap));
    auto drops = second_pass(first_pass(false, cap));
    return std::make_pair(std::move(adds), std::move(drops));
  };

  auto [adds, drops] = search(cfg_.n_tilde_max);
  bool searched_ok = !(adds.empty() && drops.empty());
  if (!searched_ok) {
    // Failed search: once more without the first-pass cap, then shed tabu
    // rules (shortest remaining tenure first), at most |STM| of them.
    std::tie(adds, drops) = search(std::numeric_limits<int>::max());
    searched_ok = !(adds.empty() && drops.empty());
    while (!searched_ok && tabu_.size() > 0) {
      ++q_out_;
      tabu_.erase_shortest_remaining();
      std::tie(adds, drops) = search(std::numeric_limits<int>::max());
      searched_ok = !(adds.empty() && drops.empty());
    }
  }

  if (!searched_ok) {
    // Every neighbor infeasible even with an empty tabu list: fall back to a
    // long-term-memory backtrack (or stay put when the pool is empty too).
    ++forced_backtracks;
    q_in_ = 0;
    ++q_out_;
    if (!ltm_.empty()) {
      ++ltm_backtracks;
      incumbent_ = ltm_.pop_random(*rng_);
      incumbent_obj_ = eval_.objective(incumbent_);
      tenure_ *= cfg_.tenure_growth;
    }
  } else {
    auto swaps = swap_search(adds, drops);
    std::vector<Candidate> all;
    all.reserve(adds.size() + drops.size() + swaps.size());
    for (auto& c : adds) all.push_back(std::move(c));
    for (auto& c : drops) all.push_back(std::move(c));
    for (auto& c : swaps) all.push_back(std::move(c));
    std::sort(all.begin(), all.end(), candidate_before);

    const Candidate& top = all.front();
    if (top.objective > incumbent_obj_) {
      ++improvements;
      q_out_ = 0;
      tenure_ = cfg_.t0;
      apply_move(top);
      if (incumbent_obj_ > best_obj_) {
        best_ = incumbent_;
        best_obj_ = incumbent_obj_;
      }
    } else {
      ++q_out_;
      ++q_in_;
      const double delta = incumbent_obj_ - top.objective;
      const double draw = rng_->u01();
      if (draw < std::exp(-delta / temperature_)) {
        // Annealing accepted a nonimproving move. Tenures grow first so the
        // reversal rules of this move carry the longer tenure.
        ++sa_acceptances;
        tenure_ *= cfg_.tenure_growth;
        q_in_ = 0;
        apply_move(top);
        if (all.size() > 1) ltm_.push(all[1].fleet, *rng_);
      } else {
        ltm_.push(top.fleet, *rng_);
      }
    }
  }

  counter_evaluation();
  upkeep();
  ++iteration_;
  log_row();
}

void Solver::counter_evaluation() {
  if (q_in_ >= cfg_.q_in_max) {
    q_in_ = 0;
    ++q_out_;
    if (!ltm_.empty()) {
      ++ltm_backtracks;
      incumbent_ = ltm_.pop_random(*rng_);
      incumbent_obj_ = eval_.objective(incumbent_);
      tenure_ *= cfg_.tenure_growth;
    }
  }
  if (q_out_ >= cfg_.q_out_max) tenure_ = cfg_.t0;
}

void Solver::upkeep() { temperature_ *= cfg_.cooling; }

void Solver::log_row() {
  history_.push_back({iteration_, incumbent_obj_, best_obj_});
}

FleetVector Solver::exhaustive_local_search(FleetVector y) {
  double obj = eval_.objective(y);
  while (true) {
    std::vector<Candidate> all;
    for (const Line& ln : net_.lines) {
      if (design_feasible_add(y, ln.id)) {
        Candidate c;
        c.move = {Move::Kind::Add, ln.id, -1};
        c.fleet = y;
        ++c.fleet[ln.id];
        c.objective = eval_.objective(c.fleet);
        all.push_back(std::move(c));
      }
      if (design_feasible_drop(y, ln.id)) {
        Candidate c;
        c.move = {Move::Kind::Drop, -1, ln.id};
        c.fleet = y;
        --c.fleet[ln.id];
        c.objective = eval_.objective(c.fleet);
        all.push_back(std::move(c));
      }
    }
    for (const Line& lm : net_.lines) {
      for (const Line& ll : net_.lines) {
        if (lm.id == ll.id || line_type_[lm.id] != line_type_[ll.id]) continue;
        if (!design_feasible_drop(y, lm.id)) continue;
        if (y[ll.id] + 1 > ll.fleet_max) continue;  // swap keeps the budget even
        Candidate c;
        c.move = {Move::Kind::Swap, ll.id, lm.id};
        c.fleet = y;
        --c.fleet[lm.id];
        ++c.fleet[ll.id];
        c.objective = eval_.objective(c.fleet);
        all.push_back(std::move(c));
      }
    }
    std::sort(all.begin(), all.end(), candidate_before);

    bool moved = false;
    for (const Candidate& c : all) {
      if (c.objective <= obj) break;  // sorted: nothing improving remains
      if (eval_.is_feasible(c.fleet, cfg_.weights.epsilon)) {
        y = c.fleet;
        obj = c.objective;
        moved = true;
        break;
      }
    }
    if (!moved) return y;
  }
}

SolveResult Solver::run() {
  for (int k = 0; k < cfg_.iterations; ++k) step();
  if (cfg_.final_search) {
    best_ = exhaustive_local_search(best_);
    best_obj_ = eval_.objective(best_);
  }
  SolveResult r;
  r.best = best_;
  r.best_objective = best_obj_;
  r.initial = net_.initial_fleet();
  r.initial_objective = eval_.objective(r.initial);
  r.history = history_;
  const bool needs_baseline =
      !std::isinf(cfg_.weights.epsilon) || cfg_.operator_hook.enabled();
  r.baseline_user_cost = needs_baseline ? eval_.baseline() : std::nan("");
  r.access_evaluations = eval_.access_evaluations;
  r.assignment_evaluations = eval_.assignment_evaluations;
  r.forced_backtracks = forced_backtracks;
  r.ltm_backtracks = ltm_backtracks;
  r.sa_acceptances = sa_acceptances;
  r.improvements = improvements;
  return r;
}

VerifyReport verify_solution(Evaluator& eval, const FleetVector& y,
                             double epsilon) {
  const TransitNetwork& net = eval.network();
  VerifyReport rep;

  rep.bounds_ok = true;
  if (y.size() != net.lines.size()) {
    rep.bounds_ok = false;
    rep.detail = "fleet vector length mismatch";
    return rep;
  }
  for (const Line& l : net.lines) {
    if (y[l.id] < l.fleet_min || y[l.id] > l.fleet_max) {
      rep.bounds_ok = false;
      rep.detail = "line " + std::to_string(l.id) + " fleet outside its bounds";
    }
  }
  if (!rep.bounds_ok) return rep;  // the budget check rejects such vectors

  rep.budget_ok = fleet_within_budget(net, y);
  if (!rep.budget_ok) {
    rep.detail = "vehicle-type budget exceeded";
    return rep;
  }

  if (std::isinf(epsilon) && !eval.hook().enabled()) {
    rep.user_cost_ok = true;
    rep.user_cost = std::nan("");
  } else {
    rep.baseline = eval.baseline();
    const auto& cost = eval.cost_of(y);
    rep.user_cost = cost.user_cost;
    rep.user_cost_ok = cost.reachable &&
                       check_user_cost_bound(cost.user_cost, rep.baseline, epsilon) &&
                       eval.hook().feasible(net, y);
    if (!rep.user_cost_ok && rep.detail.empty())
      rep.detail = cost.reachable ? "user-cost bound violated"
                                  : "solution strands positive demand";
  }
  if (!rep.user_cost_ok) return rep;

  rep.objective = eval.objective(y);

  // Full single-move sweep: any feasible neighbor with a strictly better
  // objective disproves local optimality.
  SolverConfig probe_cfg;
  probe_cfg.access = eval.access_params();
  probe_cfg.assignment = eval.assignment_config();
  probe_cfg.weights = eval.weights();
  probe_cfg.weights.epsilon = epsilon;
  probe_cfg.operator_hook = eval.hook();
  Solver probe(eval, probe_cfg);
  FleetVector settled = probe.exhaustive_local_search(y);
  rep.locally_optimal = settled == y;
  if (!rep.locally_optimal)
    rep.detail = "an improving feasible single move exists";
  return rep;
}

}  // namespace samp
