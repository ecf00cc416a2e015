#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "daverpg/types.hpp"

namespace daverpg {

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

inline void check_dim(Index got, Index want, const char* where) {
  if (got != want) {
    throw std::invalid_argument(std::string(where) + ": dimension mismatch, got " +
                                std::to_string(got) + ", expected " +
                                std::to_string(want));
  }
}

}  // namespace detail

/// f(x) = (1/2) (x - c)^T H (x - c) with H symmetric positive semidefinite.
template <class Scalar>
struct QuadraticTerm {
  Matrix<Scalar> hessian;
  Vector<Scalar> center;
};

/// f(x) = sum_j log(1 + exp(-b_j a_j^T x)) + (ridge/2) ||x||^2.
template <class Scalar>
struct LogisticTerm {
  SparseRowMatrix<Scalar> features;  // one example per row
  Vector<Scalar> labels;             // entries in {-1, +1}
  Scalar ridge = 0;
};

/// Largest eigenvalue of A^T A by power iteration (200 rounds or relative
/// change below 1e-8), inflated by 1% so the result stays an upper bound.
template <class Scalar>
Scalar power_iteration_sq_norm(const SparseRowMatrix<Scalar>& a) {
  detail::require(a.rows() > 0 && a.cols() > 0, "power iteration: empty matrix");
  Vector<Scalar> v = Vector<Scalar>::Ones(a.cols()).normalized();
  // Deterministic perturbation breaks symmetry when ones is orthogonal to the
  // leading eigenvector.
  for (Index j = 0; j < v.size(); ++j) v[j] += Scalar(1e-3) * Scalar((j % 7) + 1);
  v.normalize();
  Scalar lambda = 0;
  for (int it = 0; it < 200; ++it) {
    Vector<Scalar> w = a.transpose() * (a * v);
    const Scalar norm = w.norm();
    if (norm == Scalar(0)) return Scalar(0);
    const Scalar next = v.dot(w);
    w /= norm;
    const Scalar change = std::abs(next - lambda);
    lambda = next;
    v.swap(w);
    if (it > 0 && change <= Scalar(1e-8) * std::max(Scalar(1), std::abs(lambda))) break;
  }
  return lambda * Scalar(1.01);
}

/// One smooth summand of the objective, with its convexity constants.
template <class Scalar>
struct SmoothTerm {
  std::variant<QuadraticTerm<Scalar>, LogisticTerm<Scalar>> payload;
  Scalar mu = 0;  // strong convexity, >= 0
  Scalar L = 0;   // gradient Lipschitz constant, > 0
  Index dim = 0;

  static SmoothTerm quadratic(Matrix<Scalar> hessian, Vector<Scalar> center) {
    detail::require(hessian.rows() == hessian.cols(), "quadratic term: hessian not square");
    detail::check_dim(center.size(), hessian.rows(), "quadratic term");
    SmoothTerm t;
    t.dim = center.size();
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(hessian, Eigen::EigenvaluesOnly);
    t.mu = eig.eigenvalues().minCoeff();
    t.L = eig.eigenvalues().maxCoeff();
    detail::require(t.mu >= Scalar(-1e-12), "quadratic term: hessian not PSD");
    t.mu = std::max(t.mu, Scalar(0));
    detail::require(t.L > Scalar(0), "quadratic term: zero hessian");
    t.payload = QuadraticTerm<Scalar>{std::move(hessian), std::move(center)};
    return t;
  }

  static SmoothTerm logistic(SparseRowMatrix<Scalar> features, Vector<Scalar> labels,
                             Scalar ridge) {
    detail::require(features.rows() > 0, "logistic term: no examples");
    detail::check_dim(labels.size(), features.rows(), "logistic term labels");
    detail::require(ridge >= Scalar(0), "logistic term: negative ridge");
    for (Index j = 0; j < labels.size(); ++j) {
      detail::require(labels[j] == Scalar(1) || labels[j] == Scalar(-1),
                      "logistic term: labels must be +/-1");
    }
    SmoothTerm t;
    t.dim = features.cols();
    t.mu = ridge;
    t.L = ridge + power_iteration_sq_norm(features) / Scalar(4);
    t.payload = LogisticTerm<Scalar>{std::move(features), std::move(labels), ridge};
    return t;
  }
};

template <class Scalar>
Scalar value(const SmoothTerm<Scalar>& term, const Vector<Scalar>& x) {
  detail::check_dim(x.size(), term.dim, "smooth value");
  return std::visit(
      [&](const auto& f) -> Scalar {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, QuadraticTerm<Scalar>>) {
          const Vector<Scalar> r = x - f.center;
          return Scalar(0.5) * r.dot(f.hessian * r);
        } else {
          const Vector<Scalar> margins = f.features * x;
          Scalar sum = 0;
          for (Index j = 0; j < margins.size(); ++j) {
            sum += log1p_exp(-f.labels[j] * margins[j]);
          }
          return sum + Scalar(0.5) * f.ridge * x.squaredNorm();
        }
      },
      term.payload);
}

template <class Scalar>
Vector<Scalar> gradient(const SmoothTerm<Scalar>& term, const Vector<Scalar>& x) {
  detail::check_dim(x.size(), term.dim, "smooth gradient");
  return std::visit(
      [&](const auto& f) -> Vector<Scalar> {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, QuadraticTerm<Scalar>>) {
          return f.hessian * (x - f.center);
        } else {
          const Vector<Scalar> margins = f.features * x;
          Vector<Scalar> coeff(margins.size());
          for (Index j = 0; j < margins.size(); ++j) {
            coeff[j] = -f.labels[j] * sigmoid(-f.labels[j] * margins[j]);
          }
          Vector<Scalar> g = f.features.transpose() * coeff;
          if (f.ridge != Scalar(0)) g += f.ridge * x;
          return g;
        }
      },
      term.payload);
}

/// Re-derives (mu, L) from the stored payload.
template <class Scalar>
std::pair<Scalar, Scalar> estimate_constants(const SmoothTerm<Scalar>& term) {
  return std::visit(
      [&](const auto& f) -> std::pair<Scalar, Scalar> {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, QuadraticTerm<Scalar>>) {
          detail::require(f.hessian.size() > 0, "estimate_constants: empty term");
          Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(f.hessian,
                                                            Eigen::EigenvaluesOnly);
          return {std::max(eig.eigenvalues().minCoeff(), Scalar(0)),
                  eig.eigenvalues().maxCoeff()};
        } else {
          detail::require(f.features.rows() > 0, "estimate_constants: empty term");
          return {f.ridge, f.ridge + power_iteration_sq_norm(f.features) / Scalar(4)};
        }
      },
      term.payload);
}

template <class Scalar>
struct Regularizer {
  enum class Kind { zero, l1 };
  Kind kind = Kind::zero;
  Scalar lambda1 = 0;

  static Regularizer none() { return {Kind::zero, Scalar(0)}; }
  static Regularizer l1(Scalar lambda1) {
    detail::require(lambda1 >= Scalar(0), "l1 regularizer: negative weight");
    return {Kind::l1, lambda1};
  }
};

template <class Scalar>
Scalar value(const Regularizer<Scalar>& reg, const Vector<Scalar>& x) {
  return reg.kind == Regularizer<Scalar>::Kind::l1
             ? reg.lambda1 * x.template lpNorm<1>()
             : Scalar(0);
}

/// argmin_z g(z) + ||z - v||^2 / (2 step); exact for both kinds.
template <class Scalar>
Vector<Scalar> prox_reg(const Regularizer<Scalar>& reg, const Vector<Scalar>& v,
                        Scalar step) {
  detail::require(step > Scalar(0), "prox: step must be positive");
  if (reg.kind == Regularizer<Scalar>::Kind::zero) return v;
  return soft_threshold(v, step * reg.lambda1);
}

/// F(x) = (1/M) sum_i f_i(x) + g(x).
template <class Scalar>
struct CompositeProblem {
  std::vector<SmoothTerm<Scalar>> terms;
  Regularizer<Scalar> reg = Regularizer<Scalar>::none();

  Index dim() const { return terms.empty() ? 0 : terms.front().dim; }
  int workers() const { return static_cast<int>(terms.size()); }

  void validate() const {
    detail::require(!terms.empty(), "composite problem: needs at least one term");
    for (const auto& t : terms) {
      detail::check_dim(t.dim, dim(), "composite problem terms");
    }
  }
};

template <class Scalar>
Scalar evaluate(const CompositeProblem<Scalar>& problem, const Vector<Scalar>& x) {
  detail::check_dim(x.size(), problem.dim(), "evaluate");
  Scalar sum = 0;
  for (const auto& t : problem.terms) sum += value(t, x);
  return sum / Scalar(problem.terms.size()) + value(problem.reg, x);
}

/// Gradient of the smooth part (1/M) sum_i f_i.
template <class Scalar>
Vector<Scalar> smooth_gradient(const CompositeProblem<Scalar>& problem,
                               const Vector<Scalar>& x) {
  detail::check_dim(x.size(), problem.dim(), "smooth_gradient");
  Vector<Scalar> g = Vector<Scalar>::Zero(x.size());
  for (const auto& t : problem.terms) g += gradient(t, x);
  return g / Scalar(problem.terms.size());
}

/// Minimum-norm element of the subdifferential of F at x.
template <class Scalar>
Vector<Scalar> min_norm_subgradient(const CompositeProblem<Scalar>& problem,
                                    const Vector<Scalar>& x) {
  Vector<Scalar> g = smooth_gradient(problem, x);
  if (problem.reg.kind == Regularizer<Scalar>::Kind::zero) return g;
  const Scalar lambda1 = problem.reg.lambda1;
  for (Index j = 0; j < x.size(); ++j) {
    if (x[j] != Scalar(0)) {
      g[j] += lambda1 * (x[j] > Scalar(0) ? Scalar(1) : Scalar(-1));
    } else {
      g[j] = soft_threshold_scalar(g[j], lambda1);
    }
  }
  return g;
}

}  // namespace daverpg
