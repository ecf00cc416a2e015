#include "daverpg/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace daverpg {

DelayModel DelayModel::constant(double duration) {
  DelayModel m;
  m.kind = Kind::constant;
  m.duration = duration;
  return m;
}

DelayModel DelayModel::uniform(double min, double max) {
  DelayModel m;
  m.kind = Kind::uniform;
  m.min = min;
  m.max = max;
  return m;
}

DelayModel DelayModel::exponential(double mean) {
  DelayModel m;
  m.kind = Kind::exponential;
  m.mean = mean;
  return m;
}

DelayModel DelayModel::slow_worker(int slow_index, double factor, double base) {
  DelayModel m;
  m.kind = Kind::slow_worker;
  m.slow_index = slow_index;
  m.factor = factor;
  m.base = base;
  return m;
}

void DelayModel::validate(int workers) const {
  switch (kind) {
    case Kind::constant:
      if (!(duration > 0)) throw std::invalid_argument("delay model: duration must be positive");
      break;
    case Kind::uniform:
      if (!(min > 0)) throw std::invalid_argument("delay model: uniform min must be positive");
      if (max < min) throw std::invalid_argument("delay model: uniform max < min");
      break;
    case Kind::exponential:
      if (!(mean > 0)) throw std::invalid_argument("delay model: mean must be positive");
      break;
    case Kind::slow_worker:
      if (!(base > 0)) throw std::invalid_argument("delay model: base must be positive");
      if (!(factor >= 1)) throw std::invalid_argument("delay model: factor must be >= 1");
      if (slow_index < 0 || slow_index >= workers) {
        throw std::invalid_argument("delay model: slow worker index out of range");
      }
      break;
  }
}

std::string DelayModel::describe() const {
  switch (kind) {
    case Kind::constant:
      return "constant:" + std::to_string(duration);
    case Kind::uniform:
      return "uniform:" + std::to_string(min) + "," + std::to_string(max);
    case Kind::exponential:
      return "exponential:" + std::to_string(mean);
    case Kind::slow_worker:
      return "slow-worker:" + std::to_string(slow_index) + "," + std::to_string(factor) +
             "," + std::to_string(base);
  }
  return "";
}

double sample_compute_time(const DelayModel& model, int worker, CounterRng& rng) {
  switch (model.kind) {
    case DelayModel::Kind::constant:
      rng.next_u64();  // every kind consumes exactly one draw
      return model.duration;
    case DelayModel::Kind::uniform:
      return rng.uniform(model.min, model.max);
    case DelayModel::Kind::exponential: {
      double t = rng.exponential(model.mean);
      return t > 0 ? t : std::numeric_limits<double>::min();
    }
    case DelayModel::Kind::slow_worker:
      rng.next_u64();
      return worker == model.slow_index ? model.base * model.factor : model.base;
  }
  throw std::logic_error("unreachable delay model kind");
}

void SimBudget::validate() const {
  if (max_iterations <= 0 && max_sim_time <= 0) {
    throw std::invalid_argument("budget: need a positive iteration or sim-time budget");
  }
  if (max_iterations < 0 || max_sim_time < 0) {
    throw std::invalid_argument("budget: negative budget");
  }
}

namespace {

// Round duration plus the realized repetition count. Fixed policies consume
// exactly p draws; the budgeted policy keeps drawing (one per repetition)
// while the accumulated time stays under the budget, always taking at least
// one.
struct RoundPlan {
  double duration = 0;
  int reps = 1;
};

RoundPlan plan_round(const DelayModel& model, const RepetitionPolicy& policy, int worker,
                     CounterRng& rng) {
  RoundPlan plan;
  if (policy.kind == RepetitionPolicy::Kind::budgeted) {
    plan.reps = 0;
    do {
      plan.duration += sample_compute_time(model, worker, rng);
      plan.reps += 1;
    } while (plan.duration < policy.time_budget);
    return plan;
  }
  plan.reps = policy.resolve(worker);
  for (int q = 0; q < plan.reps; ++q) {
    plan.duration += sample_compute_time(model, worker, rng);
  }
  return plan;
}

// Shared event skeleton: calls commit(worker, time, reps) at every exchange
// in the deterministic commit order.
template <class Commit>
void run_events(const DelayModel& model, int workers, std::uint64_t seed,
                const RepetitionPolicy& policy, const SimBudget& budget,
                bool piag_single_rep, Commit&& commit) {
  std::vector<CounterRng> streams;
  streams.reserve(static_cast<std::size_t>(workers));
  for (int i = 0; i < workers; ++i) streams.emplace_back(seed, static_cast<std::uint64_t>(i));

  RepetitionPolicy effective = policy;
  if (piag_single_rep) effective = RepetitionPolicy::fixed(1);

  std::vector<double> next_time(static_cast<std::size_t>(workers));
  std::vector<int> next_reps(static_cast<std::size_t>(workers));
  for (int i = 0; i < workers; ++i) {
    RoundPlan plan = plan_round(model, effective, i, streams[static_cast<std::size_t>(i)]);
    next_time[static_cast<std::size_t>(i)] = plan.duration;
    next_reps[static_cast<std::size_t>(i)] = plan.reps;
  }

  std::int64_t iterations = 0;
  while (true) {
    int who = 0;
    for (int i = 1; i < workers; ++i) {
      if (next_time[static_cast<std::size_t>(i)] < next_time[static_cast<std::size_t>(who)]) {
        who = i;  // ties commit in ascending worker index
      }
    }
    const double t = next_time[static_cast<std::size_t>(who)];
    if (budget.max_sim_time > 0 && t > budget.max_sim_time) break;
    commit(who, t, next_reps[static_cast<std::size_t>(who)]);
    iterations += 1;
    if (budget.max_iterations > 0 && iterations >= budget.max_iterations) break;
    RoundPlan plan =
        plan_round(model, effective, who, streams[static_cast<std::size_t>(who)]);
    next_time[static_cast<std::size_t>(who)] = t + plan.duration;
    next_reps[static_cast<std::size_t>(who)] = plan.reps;
  }
}

SimResult simulate_sync_pg(const ProblemD& problem, const SimOptions& options,
                           bool snapshots) {
  SimResult result;
  // One synchronized round per exchange: the trace reads as a single
  // aggregate worker, so the epoch machinery reduces to the one-worker case.
  result.trace.workers = 1;
  result.trace.algo = Algo::sync_pg;
  VecD x = options.x_bar_init ? *options.x_bar_init : VecD::Zero(problem.dim());
  result.trace.x_bar_init = x;
  result.trace.worker_init = {x};
  result.trace.has_snapshots = snapshots;

  std::vector<CounterRng> streams;
  for (int i = 0; i < problem.workers(); ++i) {
    streams.emplace_back(options.seed, static_cast<std::uint64_t>(i));
  }
  double t = 0;
  std::int64_t k = 0;
  while (true) {
    double round = 0;
    for (int i = 0; i < problem.workers(); ++i) {
      round = std::max(round, sample_compute_time(options.model, i,
                                                  streams[static_cast<std::size_t>(i)]));
    }
    if (options.budget.max_sim_time > 0 && t + round > options.budget.max_sim_time) break;
    t += round;
    VecD x_next = sync_pg_round(problem, x, options.steps);
    TraceRecord rec;
    rec.k = ++k;
    rec.worker = 0;
    rec.sim_time = t;
    rec.reps = 1;
    rec.delta_norm = (x_next - x).norm();
    if (snapshots) {
      rec.delta = x_next - x;
      rec.x_worker = x_next;
      rec.x_bar = x_next;
    }
    result.trace.records.push_back(std::move(rec));
    x = std::move(x_next);
    if (options.budget.max_iterations > 0 && k >= options.budget.max_iterations) break;
  }
  result.master.x_bar = x;
  result.master.k = k;
  result.master.config = options.steps;
  result.output = x;  // rounds already end with the proximity step
  return result;
}

}  // namespace

SimResult simulate(const ProblemD& problem, const SimOptions& options) {
  problem.validate();
  options.budget.validate();
  const int M = problem.workers();
  if (M <= 0) throw std::invalid_argument("simulate: zero workers");
  options.model.validate(M);
  const bool snapshots = options.snapshots ? *options.snapshots : problem.dim() <= 1000;

  if (options.algo == Algo::sync_pg) {
    if (options.steps.workers() != M) {
      throw std::invalid_argument("simulate: step config does not match problem");
    }
    return simulate_sync_pg(problem, options, snapshots);
  }

  SimResult result;
  result.trace.workers = M;
  result.trace.algo = options.algo;
  result.trace.has_snapshots = snapshots;
  const VecD x_bar0 = options.x_bar_init ? *options.x_bar_init : VecD::Zero(problem.dim());
  detail::check_dim(x_bar0.size(), problem.dim(), "simulate x_bar_init");
  result.trace.x_bar_init = x_bar0;

  std::vector<VecD> worker_x(static_cast<std::size_t>(M), x_bar0);
  if (options.worker_init) {
    if (static_cast<int>(options.worker_init->size()) != M) {
      throw std::invalid_argument("simulate: worker_init size mismatch");
    }
    worker_x = *options.worker_init;
    for (const auto& x : worker_x) detail::check_dim(x.size(), problem.dim(), "worker_init");
  }
  result.trace.worker_init = worker_x;

  if (options.algo == Algo::dave_rpg) {
    if (options.steps.workers() != M) {
      throw std::invalid_argument("simulate: step config does not match problem");
    }
    MasterStateD master{x_bar0, 0, options.steps};
    // What each worker received at its last exchange (initially the
    // distributed starting point).
    std::vector<VecD> received(static_cast<std::size_t>(M), x_bar0);
    run_events(options.model, M, options.seed, options.reps, options.budget,
               /*piag_single_rep=*/false,
               [&](int i, double t, int reps) {
                 const auto ui = static_cast<std::size_t>(i);
                 RoundResult<double> round = rpg_worker_round(
                     worker_x[ui], received[ui], reps, problem.terms[ui], problem.reg,
                     options.steps.gammas[i], options.steps.pis[i],
                     options.steps.gamma_bar);
                 master_apply(master, AdjustmentMsg<double>{i, round.delta});
                 if (options.reanchor_interval > 0 &&
                     master.k % options.reanchor_interval == 0) {
                   VecD avg = VecD::Zero(master.x_bar.size());
                   for (int j = 0; j < M; ++j) {
                     const VecD& xj =
                         j == i ? round.x_new : worker_x[static_cast<std::size_t>(j)];
                     avg += options.steps.pis[j] * xj;
                   }
                   master.x_bar = std::move(avg);
                 }
                 TraceRecord rec;
                 rec.k = master.k;
                 rec.worker = i;
                 rec.sim_time = t;
                 rec.reps = reps;
                 rec.delta_norm = round.delta.norm();
                 if (snapshots) {
                   rec.delta = round.delta;
                   rec.x_worker = round.x_new;
                   rec.x_bar = master.x_bar;
                 }
                 result.trace.records.push_back(std::move(rec));
                 worker_x[ui] = std::move(round.x_new);
                 received[ui] = master.x_bar;
               });
    result.output = master_output(master, problem.reg);
    result.master = std::move(master);
    return result;
  }

  // PIAG: one stored gradient per worker, stepped from the latest iterate.
  if (!(options.piag_gamma > 0)) {
    throw std::invalid_argument("simulate: piag requires a positive piag_gamma");
  }
  PiagState<double> state = piag_init(problem, x_bar0, options.piag_gamma);
  std::vector<VecD> received(static_cast<std::size_t>(M), x_bar0);
  run_events(options.model, M, options.seed, options.reps, options.budget,
             /*piag_single_rep=*/true,
             [&](int i, double t, int reps) {
               const auto ui = static_cast<std::size_t>(i);
               const VecD old_x = state.x;
               const VecD fresh = gradient(problem.terms[ui], received[ui]);
               piag_step(state, problem.reg, i, fresh);
               TraceRecord rec;
               rec.k = state.k;
               rec.worker = i;
               rec.sim_time = t;
               rec.reps = reps;
               rec.delta_norm = (state.x - old_x).norm();
               if (snapshots) {
                 rec.delta = state.x - old_x;
                 rec.x_worker = received[ui];
                 rec.x_bar = state.x;
               }
               result.trace.records.push_back(std::move(rec));
               received[ui] = state.x;
             });
  result.master.x_bar = state.x;
  result.master.k = state.k;
  result.master.config = options.steps;
  result.output = state.x;  // piag_step already applies the proximity operator
  return result;
}

std::vector<int> simulate_schedule(const DelayModel& model, int workers,
                                   std::uint64_t seed, const RepetitionPolicy& reps,
                                   const SimBudget& budget) {
  if (workers <= 0) throw std::invalid_argument("simulate_schedule: zero workers");
  model.validate(workers);
  budget.validate();
  std::vector<int> order;
  run_events(model, workers, seed, reps, budget, /*piag_single_rep=*/false,
             [&](int who, double, int) { order.push_back(who); });
  return order;
}

}  // namespace daverpg
