#pragma once

#include <cstdint>

#include "daverpg/libsvm.hpp"
#include "daverpg/problem.hpp"
#include "daverpg/types.hpp"

namespace daverpg {

/// Sum of M quadratics with controlled conditioning. With condition = 1
/// every Hessian is the identity, so the optimum is the mean of the centers.
struct QuadraticSumParams {
  int workers = 5;
  Index dim = 2;
  double center_spread = 1.0;  // centers ~ spread * gaussian
  double condition = 1.0;      // eigenvalues span [1, condition]
  double lambda1 = 0;          // optional l1 regularizer
};

CompositeProblem<double> synth_quadratic_sum(const QuadraticSumParams& params,
                                             std::uint64_t seed);

/// Binary classification data with gaussian sparse features and labels from
/// a planted separator, split contiguously over the workers.
struct LogisticSynthParams {
  int workers = 5;
  Index dim = 50;
  Index examples = 500;
  double density = 0.2;  // expected fraction of nonzero features per row
  double noise = 0.5;    // label margin noise magnitude
  double lambda1 = 0;
  double lambda2 = 0;
};

LibSVMDataset synth_logistic_dataset(const LogisticSynthParams& params,
                                     std::uint64_t seed);
CompositeProblem<double> synth_logistic(const LogisticSynthParams& params,
                                        std::uint64_t seed);

}  // namespace daverpg
