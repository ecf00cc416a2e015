#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cmath>
#include <cstdint>

namespace daverpg {

using Index = Eigen::Index;

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Row-major so that per-example rows of a design matrix are contiguous.
template <class Scalar>
using SparseRowMatrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

using VecD = Vector<double>;

/// Componentwise soft-threshold, returned as a lazy expression.
template <class Derived>
auto soft_threshold(const Eigen::MatrixBase<Derived>& v,
                    typename Derived::Scalar threshold) {
  using S = typename Derived::Scalar;
  return v.unaryExpr([threshold](S x) {
    const S shrunk = std::abs(x) - threshold;
    return shrunk > S(0) ? (x > S(0) ? shrunk : -shrunk) : S(0);
  });
}

/// Scalar soft-threshold.
template <class Scalar>
Scalar soft_threshold_scalar(Scalar x, Scalar threshold) {
  const Scalar shrunk = std::abs(x) - threshold;
  return shrunk > Scalar(0) ? (x > Scalar(0) ? shrunk : -shrunk) : Scalar(0);
}

/// log(1 + exp(t)) without overflow for large |t|.
template <class Scalar>
Scalar log1p_exp(Scalar t) {
  return t > Scalar(0) ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

/// 1 / (1 + exp(-t)) evaluated from the side that cannot overflow.
template <class Scalar>
Scalar sigmoid(Scalar t) {
  if (t >= Scalar(0)) {
    return Scalar(1) / (Scalar(1) + std::exp(-t));
  }
  const Scalar e = std::exp(t);
  return e / (Scalar(1) + e);
}

}  // namespace daverpg
