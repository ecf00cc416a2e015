#pragma once

#include <cstdint>
#include <vector>

#include "daverpg/problem.hpp"
#include "daverpg/steps.hpp"
#include "daverpg/types.hpp"

namespace daverpg {

template <class Scalar>
struct AdjustmentMsg {
  int worker_id = 0;
  Vector<Scalar> delta;
};

/// Master side of the protocol: x_bar accumulates worker adjustments and is
/// at all times the weighted average of the workers' latest parameters.
template <class Scalar>
struct MasterState {
  Vector<Scalar> x_bar;
  std::int64_t k = 0;
  StepConfig<Scalar> config;
};

template <class Scalar>
void master_apply(MasterState<Scalar>& master, const AdjustmentMsg<Scalar>& msg) {
  detail::check_dim(msg.delta.size(), master.x_bar.size(), "master_apply");
  master.x_bar += msg.delta;
  master.k += 1;
}

template <class Scalar>
Vector<Scalar> master_output(const MasterState<Scalar>& master,
                             const Regularizer<Scalar>& reg) {
  return prox_reg(reg, master.x_bar, master.config.gamma_bar);
}

template <class Scalar>
struct WorkerState {
  int id = 0;
  Vector<Scalar> x;  // parameter produced by the last completed round
  Scalar gamma = 0;
  Scalar pi = 0;
  Scalar gamma_bar = 0;
  Vector<Scalar> last_received;  // most recent x_bar from the master
};

template <class Scalar>
struct RoundResult {
  Vector<Scalar> delta;
  Vector<Scalar> x_new;
};

/// One worker round of p >= 1 repeated proximal-gradient passes:
///   z <- prox(x_bar + delta); x+ <- z - gamma_i grad f_i(z);
///   delta <- delta + pi_i (x+ - x); x <- x+.
/// With p = 1 and no regularizer this is a plain delayed gradient step.
template <class Scalar>
RoundResult<Scalar> rpg_worker_round(const Vector<Scalar>& x_prev,
                                     const Vector<Scalar>& x_bar, int reps,
                                     const SmoothTerm<Scalar>& term,
                                     const Regularizer<Scalar>& reg, Scalar gamma_i,
                                     Scalar pi_i, Scalar gamma_bar) {
  detail::require(reps >= 1, "rpg_worker_round: need at least one repetition");
  detail::check_dim(x_prev.size(), term.dim, "rpg_worker_round x_prev");
  detail::check_dim(x_bar.size(), term.dim, "rpg_worker_round x_bar");
  RoundResult<Scalar> out;
  out.delta = Vector<Scalar>::Zero(x_bar.size());
  Vector<Scalar> x = x_prev;
  for (int q = 0; q < reps; ++q) {
    const Vector<Scalar> z = prox_reg(reg, Vector<Scalar>(x_bar + out.delta), gamma_bar);
    Vector<Scalar> x_next = z - gamma_i * gradient(term, z);
    out.delta += pi_i * (x_next - x);
    x = std::move(x_next);
  }
  out.x_new = std::move(x);
  return out;
}

template <class Scalar>
RoundResult<Scalar> rpg_worker_round(const WorkerState<Scalar>& worker,
                                     const Vector<Scalar>& x_bar, int reps,
                                     const SmoothTerm<Scalar>& term,
                                     const Regularizer<Scalar>& reg) {
  return rpg_worker_round(worker.x, x_bar, reps, term, reg, worker.gamma, worker.pi,
                          worker.gamma_bar);
}

/// How many local passes a worker performs before exchanging.
struct RepetitionPolicy {
  enum class Kind { fixed, per_worker, budgeted };
  Kind kind = Kind::fixed;
  int p = 1;
  std::vector<int> per_worker_p;
  double time_budget = 0;  // budgeted: keep repeating while round time < budget

  static RepetitionPolicy fixed(int p) {
    detail::require(p >= 1, "repetition policy: p must be >= 1");
    return {Kind::fixed, p, {}, 0};
  }
  static RepetitionPolicy per_worker(std::vector<int> ps) {
    for (int p : ps) detail::require(p >= 1, "repetition policy: p must be >= 1");
    return {Kind::per_worker, 1, std::move(ps), 0};
  }
  static RepetitionPolicy budgeted(double time_budget) {
    detail::require(time_budget > 0, "repetition policy: budget must be positive");
    return {Kind::budgeted, 1, {}, time_budget};
  }

  int resolve(int worker) const {
    if (kind == Kind::per_worker) {
      return per_worker_p.at(static_cast<std::size_t>(worker));
    }
    return p;
  }
};

/// Aggregated-delayed-gradient baseline state: one stored gradient per
/// worker, refreshed as workers report, stepped from the latest iterate.
template <class Scalar>
struct PiagState {
  Vector<Scalar> x;
  std::vector<Vector<Scalar>> gradient_table;
  Scalar gamma = 0;
  std::int64_t k = 0;

  bool warm() const {
    if (gradient_table.empty()) return false;
    for (const auto& g : gradient_table) {
      if (g.size() != x.size()) return false;
    }
    return true;
  }
};

/// Warm-up: every table entry is the gradient at the initial point.
template <class Scalar>
PiagState<Scalar> piag_init(const CompositeProblem<Scalar>& problem,
                            const Vector<Scalar>& x0, Scalar gamma) {
  detail::check_dim(x0.size(), problem.dim(), "piag_init");
  detail::require(gamma > Scalar(0), "piag_init: stepsize must be positive");
  PiagState<Scalar> s;
  s.x = x0;
  s.gamma = gamma;
  s.gradient_table.reserve(problem.terms.size());
  for (const auto& t : problem.terms) s.gradient_table.push_back(gradient(t, x0));
  return s;
}

/// Replace one worker's table entry, then take a proximal step from the
/// current iterate using the table average.
template <class Scalar>
void piag_step(PiagState<Scalar>& state, const Regularizer<Scalar>& reg, int worker_id,
               const Vector<Scalar>& fresh_gradient) {
  detail::require(state.warm(), "piag_step: gradient table not initialized");
  detail::require(worker_id >= 0 &&
                      worker_id < static_cast<int>(state.gradient_table.size()),
                  "piag_step: worker id out of range");
  detail::check_dim(fresh_gradient.size(), state.x.size(), "piag_step");
  state.gradient_table[static_cast<std::size_t>(worker_id)] = fresh_gradient;
  Vector<Scalar> sum = Vector<Scalar>::Zero(state.x.size());
  for (const auto& g : state.gradient_table) sum += g;
  const Scalar scale = state.gamma / Scalar(state.gradient_table.size());
  state.x = prox_reg(reg, Vector<Scalar>(state.x - scale * sum), state.gamma);
  state.k += 1;
}

/// Delay-dependent stepsize of the aggregated-gradient baseline:
/// (16/mu) [ (1 + mu/(48 L))^{1/(d+1)} - 1 ], with the analytic mu -> 0
/// limit 1/(3 L (d+1)). Evaluated through log1p/expm1 so the small-mu
/// regime keeps full relative precision.
template <class Scalar>
Scalar piag_stepsize(Scalar mu, Scalar L, long delay_bound) {
  detail::require(L > Scalar(0), "piag_stepsize: L must be positive");
  detail::require(delay_bound >= 0, "piag_stepsize: delay bound must be >= 0");
  detail::require(mu >= Scalar(0), "piag_stepsize: mu must be >= 0");
  const Scalar denom = Scalar(delay_bound + 1);
  if (mu == Scalar(0)) return Scalar(1) / (Scalar(3) * L * denom);
  return (Scalar(16) / mu) * std::expm1(std::log1p(mu / (Scalar(48) * L)) / denom);
}

/// One synchronous round: every worker's gradient taken at the same point,
///   x+ = prox( sum_i pi_i (x - gamma_i grad f_i(x)) ).
/// Collapses to the classical proximal-gradient step when all gammas agree.
template <class Scalar>
Vector<Scalar> sync_pg_round(const CompositeProblem<Scalar>& problem,
                             const Vector<Scalar>& x, const StepConfig<Scalar>& config) {
  detail::check_dim(x.size(), problem.dim(), "sync_pg_round");
  detail::require(config.workers() == problem.workers(),
                  "sync_pg_round: config/problem worker mismatch");
  Vector<Scalar> acc = Vector<Scalar>::Zero(x.size());
  for (int i = 0; i < problem.workers(); ++i) {
    const auto& t = problem.terms[static_cast<std::size_t>(i)];
    acc += config.pis[i] * (x - config.gammas[i] * gradient(t, x));
  }
  return prox_reg(problem.reg, acc, config.gamma_bar);
}

}  // namespace daverpg
