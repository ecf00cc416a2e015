#pragma once

#include "daverpg/problem.hpp"
#include "daverpg/types.hpp"

namespace daverpg {

/// Per-worker stepsizes with the matching contribution weights and the
/// master stepsize used inside every proximity operator.
template <class Scalar>
struct StepConfig {
  Vector<Scalar> gammas;  // gamma_i > 0, one per worker
  Vector<Scalar> pis;     // pi_i = (1/gamma_i) / sum_j (1/gamma_j)
  Scalar gamma_bar = 0;   // M / sum_i (1/gamma_i), harmonic mean of the gammas

  int workers() const { return static_cast<int>(gammas.size()); }
};

template <class Scalar>
StepConfig<Scalar> configure_steps(const Vector<Scalar>& gammas) {
  detail::require(gammas.size() > 0, "configure_steps: no stepsizes");
  for (Index i = 0; i < gammas.size(); ++i) {
    detail::require(gammas[i] > Scalar(0), "configure_steps: stepsizes must be positive");
  }
  StepConfig<Scalar> cfg;
  cfg.gammas = gammas;
  const Vector<Scalar> inv = gammas.cwiseInverse();
  const Scalar inv_sum = inv.sum();
  cfg.pis = inv / inv_sum;
  cfg.gamma_bar = Scalar(gammas.size()) / inv_sum;
  return cfg;
}

/// Largest theoretically-sanctioned stepsizes: 2/(mu_i + L_i) when the term
/// is strongly convex, 1.8/L_i (strictly inside (0, 2/L_i)) otherwise.
template <class Scalar>
Vector<Scalar> default_stepsizes(const CompositeProblem<Scalar>& problem) {
  Vector<Scalar> gammas(problem.workers());
  for (int i = 0; i < problem.workers(); ++i) {
    const auto& t = problem.terms[static_cast<std::size_t>(i)];
    gammas[i] = t.mu > Scalar(0) ? Scalar(2) / (t.mu + t.L) : Scalar(1.8) / t.L;
  }
  return gammas;
}

template <class Scalar>
StepConfig<Scalar> default_step_config(const CompositeProblem<Scalar>& problem) {
  return configure_steps(default_stepsizes(problem));
}

}  // namespace daverpg
