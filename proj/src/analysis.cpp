#include "daverpg/analysis.hpp"

#include <cmath>
#include <stdexcept>

namespace daverpg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// max(||xb - xb*||^2, ||xb_{-i} - xb*_{-i}||^2) with the leave-one-out
// average reconstructed as (xb - pi_i x_i) / (1 - pi_i).
double error_pair(const VecD& x_bar, const VecD& x_i, int i, const StepConfigD& config,
                  const ReferenceSolution<double>& ref) {
  double a = (x_bar - ref.x_bar_star).squaredNorm();
  const double pi = config.pis[i];
  if (config.workers() > 1 && pi < 1.0) {
    const VecD loo = (x_bar - pi * x_i) / (1.0 - pi);
    const VecD loo_star =
        (ref.x_bar_star - pi * ref.shifted[static_cast<std::size_t>(i)]) / (1.0 - pi);
    a = std::max(a, (loo - loo_star).squaredNorm());
  }
  return a;
}

}  // namespace

ConvergenceReport make_report(const ProblemD& problem, const StepConfigD& config,
                              const Trace& trace, const ReferenceSolution<double>& ref,
                              const std::optional<std::vector<int>>& reps_per_worker) {
  if (!trace.has_snapshots) {
    throw std::invalid_argument("make_report: trace has no iterate snapshots");
  }
  ConvergenceReport report;
  report.delays = delays_from_trace(trace, trace.workers);
  report.epochs = epoch_sequence(report.delays);
  const bool dave = trace.algo == Algo::dave_rpg;

  const std::size_t rows = trace.records.size() + 1;
  report.sim_time.reserve(rows);
  report.distance_sq.reserve(rows);
  report.suboptimality.reserve(rows);
  report.residual_norm.reserve(rows);
  report.a_k.reserve(rows);
  report.epoch_index.reserve(rows);

  // DAve rows snapshot the master variable, whose output map is the
  // proximity step; piag/syncpg rows already snapshot post-prox iterates.
  auto push_row = [&](double t, const VecD& x_bar, double a, int epoch) {
    const VecD x = dave ? prox_reg(problem.reg, x_bar, config.gamma_bar) : x_bar;
    report.sim_time.push_back(t);
    report.distance_sq.push_back((x - ref.x_star).squaredNorm());
    report.suboptimality.push_back(evaluate(problem, x) - ref.f_star);
    report.residual_norm.push_back(min_norm_subgradient(problem, x).norm());
    report.a_k.push_back(a);
    report.epoch_index.push_back(epoch);
  };

  // Initial row: the distributed starting point, before any exchange.
  double a0 = kNaN;
  if (dave) {
    a0 = (trace.x_bar_init - ref.x_bar_star).squaredNorm();
    for (int j = 0; j < trace.workers; ++j) {
      a0 = std::max(a0, error_pair(trace.x_bar_init,
                                   trace.worker_init[static_cast<std::size_t>(j)], j,
                                   config, ref));
    }
  }
  push_row(0.0, trace.x_bar_init, a0, 0);

  for (std::size_t r = 0; r < trace.records.size(); ++r) {
    const TraceRecord& rec = trace.records[r];
    const auto kappa = static_cast<std::int64_t>(r);
    const double a =
        dave ? error_pair(rec.x_bar, rec.x_worker, rec.worker, config, ref) : kNaN;
    push_row(rec.sim_time, rec.x_bar, a, report.epochs.epoch_of(kappa));
  }

  const int epochs_total = report.epoch_index.empty()
                               ? 1
                               : report.epoch_index.back() + 1;
  report.b_m.assign(static_cast<std::size_t>(epochs_total), 0.0);
  if (dave) {
    for (std::size_t r = 0; r < report.a_k.size(); ++r) {
      auto& slot = report.b_m[static_cast<std::size_t>(report.epoch_index[r])];
      slot = std::max(slot, report.a_k[r]);
    }
  } else {
    report.b_m.assign(static_cast<std::size_t>(epochs_total), kNaN);
  }

  // Envelopes per epoch index.
  report.bound_strong.assign(static_cast<std::size_t>(epochs_total), kNaN);
  report.bound_tighter.assign(static_cast<std::size_t>(epochs_total), kNaN);
  report.bound_residual.assign(static_cast<std::size_t>(epochs_total), kNaN);

  if (dave) {
    bool all_strong = true;
    for (const auto& t : problem.terms) all_strong = all_strong && t.mu > 0;
    if (all_strong) {
      std::vector<int> reps(static_cast<std::size_t>(problem.workers()), 1);
      if (reps_per_worker) reps = *reps_per_worker;
      const auto env = strong_rate_envelope(problem, config, trace.worker_init, ref, reps);
      for (int m = 0; m < epochs_total; ++m) {
        report.bound_strong[static_cast<std::size_t>(m)] = env.bound(m);
        report.bound_tighter[static_cast<std::size_t>(m)] = env.tighter_bound(m);
      }
    }
    bool open_range = true;
    VecD Ls(problem.workers());
    for (int i = 0; i < problem.workers(); ++i) {
      Ls[i] = problem.terms[static_cast<std::size_t>(i)].L;
      open_range = open_range && config.gammas[i] * Ls[i] < 2.0;
    }
    if (open_range) {
      for (int m = 1; m < epochs_total; ++m) {
        report.bound_residual[static_cast<std::size_t>(m)] = sublinear_residual_bound(
            static_cast<std::int64_t>(m), trace.worker_init, ref.shifted, config.gammas,
            Ls);
      }
    }
  }
  return report;
}

}  // namespace daverpg
