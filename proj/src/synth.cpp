#include "daverpg/synth.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/QR>

#include "daverpg/rng.hpp"

namespace daverpg {

namespace {

using MatD = Matrix<double>;

MatD random_rotation(Index dim, CounterRng& rng) {
  MatD g(dim, dim);
  for (Index i = 0; i < dim; ++i) {
    for (Index j = 0; j < dim; ++j) g(i, j) = rng.gaussian();
  }
  Eigen::HouseholderQR<MatD> qr(g);
  MatD q = qr.householderQ();
  // Fix signs so the factorization is unique.
  const MatD r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < dim; ++j) {
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace

CompositeProblem<double> synth_quadratic_sum(const QuadraticSumParams& params,
                                             std::uint64_t seed) {
  if (params.workers < 1) throw std::invalid_argument("quadratic sum: workers < 1");
  if (params.dim < 1) throw std::invalid_argument("quadratic sum: dim < 1");
  if (params.condition < 1) throw std::invalid_argument("quadratic sum: condition < 1");
  if (params.center_spread < 0) throw std::invalid_argument("quadratic sum: spread < 0");
  CompositeProblem<double> problem;
  for (int i = 0; i < params.workers; ++i) {
    CounterRng rng(seed, 0x71ad00000000ULL + static_cast<std::uint64_t>(i));
    VecD center(params.dim);
    for (Index j = 0; j < params.dim; ++j) {
      center[j] = params.center_spread * rng.gaussian();
    }
    MatD hessian;
    if (params.condition == 1.0) {
      hessian = MatD::Identity(params.dim, params.dim);
    } else {
      VecD eigs(params.dim);
      for (Index j = 0; j < params.dim; ++j) {
        const double t = params.dim == 1 ? 1.0
                                         : static_cast<double>(j) /
                                               static_cast<double>(params.dim - 1);
        eigs[j] = std::pow(params.condition, t);  // geometric from 1 to condition
      }
      const MatD q = random_rotation(params.dim, rng);
      hessian = q * eigs.asDiagonal() * q.transpose();
      hessian = ((hessian + hessian.transpose()) / 2.0).eval();  // exact symmetry
    }
    problem.terms.push_back(SmoothTerm<double>::quadratic(hessian, center));
  }
  problem.reg = params.lambda1 > 0 ? Regularizer<double>::l1(params.lambda1)
                                   : Regularizer<double>::none();
  problem.validate();
  return problem;
}

LibSVMDataset synth_logistic_dataset(const LogisticSynthParams& params,
                                     std::uint64_t seed) {
  if (params.workers < 1) throw std::invalid_argument("logistic synth: workers < 1");
  if (params.dim < 1 || params.examples < 1) {
    throw std::invalid_argument("logistic synth: need dim >= 1 and examples >= 1");
  }
  if (!(params.density > 0) || params.density > 1) {
    throw std::invalid_argument("logistic synth: density outside (0, 1]");
  }
  CounterRng rng(seed, 0x1091571c0ULL);
  VecD w_true(params.dim);
  for (Index j = 0; j < params.dim; ++j) w_true[j] = rng.gaussian();

  LibSVMDataset data;
  data.n_features = params.dim;
  data.rows.reserve(static_cast<std::size_t>(params.examples));
  for (Index r = 0; r < params.examples; ++r) {
    SparseRow row;
    double margin = 0;
    for (Index j = 0; j < params.dim; ++j) {
      if (rng.next_unit() < params.density) {
        const double v = rng.gaussian();
        row.indices.push_back(j);
        row.values.push_back(v);
        margin += v * w_true[j];
      }
    }
    if (row.indices.empty()) {
      const auto j = static_cast<Index>(rng.next_u64() % static_cast<std::uint64_t>(params.dim));
      row.indices.push_back(j);
      row.values.push_back(rng.gaussian());
      margin += row.values.back() * w_true[j];
    }
    data.labels.push_back(margin + params.noise * rng.gaussian() >= 0 ? 1.0 : -1.0);
    data.rows.push_back(std::move(row));
  }
  return data;
}

CompositeProblem<double> synth_logistic(const LogisticSynthParams& params,
                                        std::uint64_t seed) {
  return problem_from_dataset(synth_logistic_dataset(params, seed), params.workers,
                              params.lambda1, params.lambda2);
}

}  // namespace daverpg
