#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "daverpg/algorithm.hpp"
#include "daverpg/problem.hpp"
#include "daverpg/steps.hpp"
#include "daverpg/trace.hpp"
#include "daverpg/types.hpp"

namespace daverpg {

using ProblemD = CompositeProblem<double>;
using StepConfigD = StepConfig<double>;

/// Optimum of the composite objective together with the fixed-point data of
/// the protocol: the shifted local solutions x_i* = x* - gamma_i grad f_i(x*)
/// and their weighted average, which the master variable converges to.
template <class Scalar>
struct ReferenceSolution {
  Vector<Scalar> x_star;
  Scalar f_star = 0;
  Vector<Scalar> x_bar_star;
  std::vector<Vector<Scalar>> shifted;  // one per worker
  std::int64_t iterations = 0;
  Scalar residual = 0;

  Scalar max_shift_distance_sq(const std::vector<Vector<Scalar>>& inits) const {
    Scalar best = 0;
    for (std::size_t i = 0; i < shifted.size(); ++i) {
      best = std::max(best, (inits[i] - shifted[i]).squaredNorm());
    }
    return best;
  }
};

/// Synchronous proximal gradient from zero until the minimum-norm
/// subgradient drops below tol. Throws if the cap is reached first.
template <class Scalar>
ReferenceSolution<Scalar> reference_solution(const CompositeProblem<Scalar>& problem,
                                             const StepConfig<Scalar>& config,
                                             Scalar tol = Scalar(1e-12),
                                             std::int64_t max_iterations = 2000000) {
  problem.validate();
  detail::require(config.workers() == problem.workers(),
                  "reference_solution: config/problem mismatch");
  ReferenceSolution<Scalar> ref;
  Vector<Scalar> x = Vector<Scalar>::Zero(problem.dim());
  Scalar res = min_norm_subgradient(problem, x).norm();
  std::int64_t it = 0;
  while (res > tol) {
    if (it >= max_iterations) {
      throw std::runtime_error("reference_solution: iteration cap reached at residual " +
                               std::to_string(static_cast<double>(res)));
    }
    x = sync_pg_round(problem, x, config);
    res = min_norm_subgradient(problem, x).norm();
    it += 1;
  }
  ref.x_star = x;
  ref.f_star = evaluate(problem, x);
  ref.residual = res;
  ref.iterations = it;
  ref.shifted.reserve(problem.terms.size());
  for (int i = 0; i < problem.workers(); ++i) {
    ref.shifted.push_back(
        x - config.gammas[i] * gradient(problem.terms[static_cast<std::size_t>(i)], x));
  }
  ref.x_bar_star = Vector<Scalar>::Zero(problem.dim());
  for (int i = 0; i < problem.workers(); ++i) {
    ref.x_bar_star += config.pis[i] * ref.shifted[static_cast<std::size_t>(i)];
  }
  return ref;
}

/// Local contraction improvement from p repeated passes:
///   r(p) = 1 - gamma mu sum_{q=1}^{p-1} (1 - gamma mu)^{q-1} pi^q,
/// equal to 1 at p = 1, decreasing in p.
template <class Scalar>
Scalar repetition_factor(Scalar gamma_mu, Scalar pi, std::int64_t p) {
  detail::require(gamma_mu >= Scalar(0) && gamma_mu <= Scalar(1),
                  "repetition_factor: gamma*mu outside [0, 1]");
  detail::require(pi > Scalar(0) && pi < Scalar(1),
                  "repetition_factor: pi outside (0, 1)");
  detail::require(p >= 1, "repetition_factor: p must be >= 1");
  Scalar sum = 0;
  Scalar term = pi;  // (1 - gamma mu)^{q-1} pi^q at q = 1
  for (std::int64_t q = 1; q <= p - 1; ++q) {
    sum += term;
    term *= (Scalar(1) - gamma_mu) * pi;
  }
  return Scalar(1) - gamma_mu * sum;
}

/// Limit of repetition_factor as p -> infinity:
///   r(inf) = 1 - gamma mu pi / (1 - (1 - gamma mu) pi).
template <class Scalar>
Scalar repetition_factor_limit(Scalar gamma_mu, Scalar pi) {
  detail::require(gamma_mu >= Scalar(0) && gamma_mu <= Scalar(1),
                  "repetition_factor: gamma*mu outside [0, 1]");
  detail::require(pi > Scalar(0) && pi < Scalar(1),
                  "repetition_factor: pi outside (0, 1)");
  return Scalar(1) - gamma_mu * pi / (Scalar(1) - (Scalar(1) - gamma_mu) * pi);
}

template <class Scalar>
struct StrongRateEnvelope {
  Scalar initial = 0;        // max_i ||x_i^0 - x_i*||^2
  Scalar rate = 0;           // rho = min_i gamma_i mu_i
  Scalar epoch_factor = 0;   // (1 - rho)^2
  Scalar tighter_factor = 0; // max_i (1 - gamma_i mu_i)^2 r_i(p_i)^2

  Scalar bound(std::int64_t m) const {
    return initial * std::pow(Scalar(1) - rate, Scalar(2 * m));
  }
  Scalar tighter_bound(std::int64_t m) const {
    return initial * std::pow(tighter_factor, Scalar(m));
  }
};

/// Per-epoch linear decrease guarantee in the strongly convex case, plus the
/// tighter per-epoch factor when workers repeat their local passes.
template <class Scalar>
StrongRateEnvelope<Scalar> strong_rate_envelope(
    const CompositeProblem<Scalar>& problem, const StepConfig<Scalar>& config,
    const std::vector<Vector<Scalar>>& inits, const ReferenceSolution<Scalar>& ref,
    const std::vector<int>& reps_per_worker) {
  detail::require(static_cast<int>(inits.size()) == problem.workers(),
                  "strong_rate_envelope: init size mismatch");
  detail::require(static_cast<int>(reps_per_worker.size()) == problem.workers(),
                  "strong_rate_envelope: repetition schedule size mismatch");
  StrongRateEnvelope<Scalar> env;
  env.initial = ref.max_shift_distance_sq(inits);
  env.rate = std::numeric_limits<Scalar>::infinity();
  env.tighter_factor = 0;
  for (int i = 0; i < problem.workers(); ++i) {
    const auto& t = problem.terms[static_cast<std::size_t>(i)];
    detail::require(t.mu > Scalar(0), "strong_rate_envelope: needs mu_i > 0 for every term");
    const Scalar gm = config.gammas[i] * t.mu;
    detail::require(config.gammas[i] <= Scalar(2) / (t.mu + t.L) * (Scalar(1) + Scalar(1e-12)),
                    "strong_rate_envelope: stepsize outside (0, 2/(mu+L)]");
    env.rate = std::min(env.rate, gm);
    const Scalar r = repetition_factor(gm, Scalar(config.pis[i]),
                                       reps_per_worker[static_cast<std::size_t>(i)]);
    env.tighter_factor =
        std::max(env.tighter_factor, (Scalar(1) - gm) * (Scalar(1) - gm) * r * r);
  }
  env.epoch_factor = (Scalar(1) - env.rate) * (Scalar(1) - env.rate);
  return env;
}

/// Best-residual guarantee at epoch m in the general convex case:
///   min_{k' <= k} ||dF(x^{k'})|| <=
///     (2 sqrt(2) / sqrt(m)) max_i ||x_i^0 - x_i*|| / min_j gamma_j sqrt(2 - gamma_j L_j).
template <class Scalar>
Scalar sublinear_residual_bound(std::int64_t m,
                                const std::vector<Vector<Scalar>>& inits,
                                const std::vector<Vector<Scalar>>& shifted,
                                const Vector<Scalar>& gammas, const Vector<Scalar>& Ls) {
  detail::require(m >= 1, "sublinear_residual_bound: m must be >= 1");
  detail::require(inits.size() == shifted.size(),
                  "sublinear_residual_bound: init/shift size mismatch");
  detail::require(gammas.size() == Ls.size() &&
                      gammas.size() == static_cast<Index>(inits.size()),
                  "sublinear_residual_bound: size mismatch");
  Scalar max_init = 0;
  for (std::size_t i = 0; i < inits.size(); ++i) {
    max_init = std::max(max_init, (inits[i] - shifted[i]).norm());
  }
  Scalar min_denom = std::numeric_limits<Scalar>::infinity();
  for (Index j = 0; j < gammas.size(); ++j) {
    const Scalar slack = Scalar(2) - gammas[j] * Ls[j];
    detail::require(gammas[j] > Scalar(0) && slack > Scalar(0),
                    "sublinear_residual_bound: stepsize outside (0, 2/L)");
    min_denom = std::min(min_denom, gammas[j] * std::sqrt(slack));
  }
  return Scalar(2) * std::sqrt(Scalar(2)) / std::sqrt(Scalar(m)) * max_init / min_denom;
}

struct EpochIterationBound {
  double gap_bound = 0;     // k_{m+1} - k_m <= gap_bound
  double growth_coeff = 0;  // k_m <= growth_coeff * m
};

enum class DelayBoundKind { uniform, average };

/// Epoch-gap and epoch-sequence growth bounds under a uniform (d_i^k <= d)
/// or average ((1/M) sum_i d_i^k <= dbar) delay bound; inputs below the
/// unimprovable minima (d >= M, dbar >= (M-1)/2) are rejected.
inline EpochIterationBound epoch_iteration_bound(int workers, DelayBoundKind kind,
                                                 double bound) {
  detail::require(workers > 1, "epoch_iteration_bound: needs M > 1");
  EpochIterationBound out;
  const double M = workers;
  if (kind == DelayBoundKind::uniform) {
    detail::require(bound >= M, "epoch_iteration_bound: uniform bound requires d >= M");
    out.gap_bound = 2 * bound + 1;
    out.growth_coeff = 2 * bound + 1;  // = 2M + 2 tau + 1 with tau = d - M
  } else {
    detail::require(bound >= (M - 1) / 2,
                    "epoch_iteration_bound: average bound requires dbar >= (M-1)/2");
    const double tau = bound - (M - 1) / 2;
    out.gap_bound = 2 * M * (2 * bound - M + 3) - 3;
    out.growth_coeff = 4 * M * (tau + 1);
  }
  return out;
}

/// Measured convergence series for one run, plus the matching theoretical
/// envelopes. Row 0 is the initial state; rows 1..K correspond to trace
/// records (exchange kappa = row - 1).
struct ConvergenceReport {
  std::vector<double> sim_time;
  std::vector<double> distance_sq;     // ||x^k - x*||^2 with x^k = prox(x_bar^k)
  std::vector<double> suboptimality;   // F(x^k) - F*
  std::vector<double> residual_norm;   // min-norm subgradient at x^k
  std::vector<double> a_k;             // max of full / leave-one-out average distances
  std::vector<int> epoch_index;        // epoch of each row

  std::vector<double> b_m;             // per-epoch max of a_k (last one may be partial)
  std::vector<double> bound_strong;    // per-epoch envelope, NaN when not applicable
  std::vector<double> bound_tighter;
  std::vector<double> bound_residual;

  EpochSequence epochs;
  DelayTable delays;

  double best_residual_up_to(std::size_t row) const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r <= row && r < residual_norm.size(); ++r) {
      best = std::min(best, residual_norm[r]);
    }
    return best;
  }
};

/// Builds the full report for a trace with snapshots. `reps_per_worker`
/// enables the tighter strongly convex envelope when supplied.
ConvergenceReport make_report(const ProblemD& problem, const StepConfigD& config,
                              const Trace& trace, const ReferenceSolution<double>& ref,
                              const std::optional<std::vector<int>>& reps_per_worker = {});

}  // namespace daverpg
