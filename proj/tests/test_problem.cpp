#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "daverpg/analysis.hpp"
#include "daverpg/problem.hpp"
#include "daverpg/rng.hpp"
#include "daverpg/steps.hpp"

using namespace daverpg;

namespace {

using Vec = Vector<double>;
using Mat = Matrix<double>;

Vec make_vec(std::initializer_list<double> vals) {
  Vec v(static_cast<Index>(vals.size()));
  Index i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

SmoothTerm<double> random_logistic_term(Index examples, Index dim, double ridge,
                                        CounterRng& rng) {
  SparseRowMatrix<double> a(examples, dim);
  std::vector<Eigen::Triplet<double>> triplets;
  Vec labels(examples);
  for (Index r = 0; r < examples; ++r) {
    bool any = false;
    for (Index c = 0; c < dim; ++c) {
      if (rng.next_unit() < 0.6) {
        triplets.emplace_back(static_cast<int>(r), static_cast<int>(c), rng.gaussian());
        any = true;
      }
    }
    if (!any) triplets.emplace_back(static_cast<int>(r), 0, rng.gaussian());
    labels[r] = rng.next_unit() < 0.5 ? -1.0 : 1.0;
  }
  a.setFromTriplets(triplets.begin(), triplets.end());
  return SmoothTerm<double>::logistic(a, labels, ridge);
}

SmoothTerm<double> random_quadratic_term(Index dim, CounterRng& rng) {
  Mat g(dim, dim);
  for (Index i = 0; i < dim; ++i) {
    for (Index j = 0; j < dim; ++j) g(i, j) = rng.gaussian();
  }
  Mat h = g * g.transpose() + 0.1 * Mat::Identity(dim, dim);
  h = ((h + h.transpose()) / 2.0).eval();
  Vec c(dim);
  for (Index j = 0; j < dim; ++j) c[j] = rng.gaussian();
  return SmoothTerm<double>::quadratic(h, c);
}

Vec random_vec(Index dim, CounterRng& rng) {
  Vec v(dim);
  for (Index j = 0; j < dim; ++j) v[j] = rng.gaussian();
  return v;
}

// Central finite differences, the independent gradient oracle.
Vec finite_difference_gradient(const SmoothTerm<double>& term, const Vec& x,
                               double step = 1e-6) {
  Vec g(x.size());
  for (Index j = 0; j < x.size(); ++j) {
    Vec hi = x, lo = x;
    hi[j] += step;
    lo[j] -= step;
    g[j] = (value(term, hi) - value(term, lo)) / (2 * step);
  }
  return g;
}

}  // namespace

TEST_CASE("evaluate: centered quadratic vanishes at its minimum") {
  CompositeProblem<double> p;
  p.terms.push_back(
      SmoothTerm<double>::quadratic(Mat::Identity(1, 1), make_vec({1.0})));
  CHECK(evaluate(p, make_vec({1.0})) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("evaluate: l1 regularizer alone is the weighted l1 norm") {
  const Vec x = make_vec({2.0, -3.0});
  // Smooth part centered at x contributes exactly zero.
  CompositeProblem<double> p;
  p.terms.push_back(SmoothTerm<double>::quadratic(Mat::Identity(2, 2), x));
  p.reg = Regularizer<double>::l1(1.0);
  CHECK(evaluate(p, x) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(value(p.reg, x) == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("evaluate: single logistic example at zero gives log 2") {
  SparseRowMatrix<double> a(1, 1);
  a.insert(0, 0) = 1.0;
  CompositeProblem<double> p;
  p.terms.push_back(SmoothTerm<double>::logistic(a, make_vec({1.0}), 0.0));
  CHECK(evaluate(p, make_vec({0.0})) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("evaluate: dimension mismatch throws") {
  CompositeProblem<double> p;
  p.terms.push_back(
      SmoothTerm<double>::quadratic(Mat::Identity(2, 2), make_vec({0.0, 0.0})));
  CHECK_THROWS_AS(evaluate(p, make_vec({1.0})), std::invalid_argument);
}

TEST_CASE("gradient: quadratic is stationary at its center") {
  const Vec c = make_vec({0.3, -0.7});
  const auto term = SmoothTerm<double>::quadratic(2.0 * Mat::Identity(2, 2), c);
  CHECK(gradient(term, c).norm() == 0.0);
}

TEST_CASE("gradient: single logistic example at zero") {
  SparseRowMatrix<double> a(1, 1);
  a.insert(0, 0) = 1.0;
  const auto term = SmoothTerm<double>::logistic(a, make_vec({1.0}), 0.0);
  CHECK(gradient(term, make_vec({0.0}))[0] == doctest::Approx(-0.5).epsilon(1e-15));
}

TEST_CASE("gradient matches central finite differences on random terms") {
  CounterRng rng(7, 0);
  for (int trial = 0; trial < 100; ++trial) {
    SmoothTerm<double> term = trial % 2 == 0 ? random_logistic_term(8, 5, 0.3 * rng.next_unit(), rng)
                                             : random_quadratic_term(5, rng);
    const Vec x = random_vec(5, rng);
    const Vec g = gradient(term, x);
    const Vec fd = finite_difference_gradient(term, x);
    CHECK((g - fd).norm() <= 1e-5 * std::max(1.0, g.norm()));
  }
}

TEST_CASE("prox: soft threshold on a worked example") {
  const auto reg = Regularizer<double>::l1(1.0);
  const Vec z = prox_reg(reg, make_vec({1.2, -0.3, 0.5}), 0.5);
  CHECK(z[0] == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(z[1] == 0.0);
  CHECK(z[2] == 0.0);
}

TEST_CASE("prox: zero regularizer is the identity") {
  const auto reg = Regularizer<double>::none();
  const Vec v = make_vec({1.0, -2.0, 0.0});
  CHECK(prox_reg(reg, v, 3.0) == v);
}

TEST_CASE("prox: nonpositive step throws") {
  const auto reg = Regularizer<double>::l1(1.0);
  CHECK_THROWS_AS(prox_reg(reg, make_vec({1.0}), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(prox_reg(reg, make_vec({1.0}), -1.0), std::invalid_argument);
}

TEST_CASE("prox: subdifferential membership on random inputs") {
  CounterRng rng(11, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const double lambda1 = 0.1 + rng.next_unit();
    const double step = 0.1 + rng.next_unit();
    const auto reg = Regularizer<double>::l1(lambda1);
    const Vec v = random_vec(6, rng);
    const Vec z = prox_reg(reg, v, step);
    for (Index j = 0; j < v.size(); ++j) {
      if (z[j] != 0.0) {
        const double stationarity = z[j] - v[j] + step * lambda1 * (z[j] > 0 ? 1 : -1);
        CHECK(std::abs(stationarity) <= 1e-12);
      } else {
        CHECK(std::abs(v[j]) <= step * lambda1 + 1e-12);
      }
    }
  }
}

TEST_CASE("prox minimizes the proximal objective against perturbations") {
  CounterRng rng(13, 0);
  auto objective = [](const Regularizer<double>& reg, const Vec& z, const Vec& v,
                      double step) {
    return value(reg, z) + (z - v).squaredNorm() / (2 * step);
  };
  for (int trial = 0; trial < 20; ++trial) {
    const auto reg = Regularizer<double>::l1(0.2 + rng.next_unit());
    const double step = 0.2 + rng.next_unit();
    const Vec v = random_vec(5, rng);
    const Vec z = prox_reg(reg, v, step);
    const double best = objective(reg, z, v, step);
    for (int k = 0; k < 50; ++k) {
      const Vec other = z + 0.5 * random_vec(5, rng);
      CHECK(best <= objective(reg, other, v, step) + 1e-12);
    }
  }
}

TEST_CASE("estimate_constants: diagonal quadratic gives exact eigenvalues") {
  Mat h = Mat::Zero(2, 2);
  h(0, 0) = 1.0;
  h(1, 1) = 4.0;
  const auto term = SmoothTerm<double>::quadratic(h, make_vec({0.0, 0.0}));
  const auto [mu, L] = estimate_constants(term);
  CHECK(mu == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(L == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(term.mu == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(term.L == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("estimate_constants: single logistic example") {
  SparseRowMatrix<double> a(1, 1);
  a.insert(0, 0) = 2.0;
  const auto term = SmoothTerm<double>::logistic(a, make_vec({1.0}), 0.0);
  CHECK(term.mu == 0.0);
  CHECK(term.L >= 1.0);
  CHECK(term.L <= 1.01 + 1e-12);
}

TEST_CASE("estimate_constants: logistic L within 1% above the dense eigenvalue") {
  CounterRng rng(17, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto term = random_logistic_term(20, 5, 0.0, rng);
    const auto& payload = std::get<LogisticTerm<double>>(term.payload);
    const Mat gram = Mat(payload.features.transpose() * payload.features);
    Eigen::SelfAdjointEigenSolver<Mat> eig(gram, Eigen::EigenvaluesOnly);
    const double exact = eig.eigenvalues().maxCoeff() / 4.0;
    CHECK(term.L >= exact * (1.0 - 1e-9));
    CHECK(term.L <= exact * 1.0101);
  }
}

TEST_CASE("estimate_constants: ridge becomes the strong convexity constant") {
  CounterRng rng(19, 0);
  const auto term = random_logistic_term(10, 4, 0.37, rng);
  CHECK(term.mu == 0.37);
}

TEST_CASE("smooth term factories reject bad input") {
  CHECK_THROWS_AS(SmoothTerm<double>::quadratic(Mat::Zero(2, 3), make_vec({0, 0})),
                  std::invalid_argument);
  CHECK_THROWS_AS(SmoothTerm<double>::quadratic(Mat::Zero(2, 2), make_vec({0, 0})),
                  std::invalid_argument);  // zero hessian: L = 0
  SparseRowMatrix<double> empty(0, 3);
  CHECK_THROWS_AS(SmoothTerm<double>::logistic(empty, Vec(), 0.0), std::invalid_argument);
  SparseRowMatrix<double> a(1, 1);
  a.insert(0, 0) = 1.0;
  CHECK_THROWS_AS(SmoothTerm<double>::logistic(a, make_vec({2.0}), 0.0),
                  std::invalid_argument);  // label not in {-1, +1}
}

TEST_CASE("estimate_constants rejects an empty term") {
  SmoothTerm<double> blank;
  CHECK_THROWS_AS(estimate_constants(blank), std::invalid_argument);
}

TEST_CASE("min_norm_subgradient: no regularizer returns the full gradient") {
  CounterRng rng(23, 0);
  CompositeProblem<double> p;
  p.terms.push_back(random_quadratic_term(4, rng));
  p.terms.push_back(random_quadratic_term(4, rng));
  const Vec x = random_vec(4, rng);
  CHECK((min_norm_subgradient(p, x) - smooth_gradient(p, x)).norm() == 0.0);
}

TEST_CASE("min_norm_subgradient: zero coordinate inside the l1 interval") {
  // 1-D term with gradient 0.3 at x = 0 and lambda1 = 0.5.
  CompositeProblem<double> p;
  p.terms.push_back(
      SmoothTerm<double>::quadratic(Mat::Identity(1, 1), make_vec({-0.3})));
  p.reg = Regularizer<double>::l1(0.5);
  CHECK(min_norm_subgradient(p, make_vec({0.0}))[0] == 0.0);
}

TEST_CASE("min_norm_subgradient is minimal over random subgradient selections") {
  CounterRng rng(29, 0);
  CompositeProblem<double> p;
  p.terms.push_back(random_quadratic_term(5, rng));
  p.terms.push_back(random_logistic_term(12, 5, 0.1, rng));
  p.reg = Regularizer<double>::l1(0.4);
  Vec x = random_vec(5, rng);
  x[1] = 0.0;
  x[3] = 0.0;
  const double best = min_norm_subgradient(p, x).norm();
  const Vec g = smooth_gradient(p, x);
  for (int trial = 0; trial < 1000; ++trial) {
    Vec h = g;
    for (Index j = 0; j < x.size(); ++j) {
      const double s = x[j] != 0.0 ? (x[j] > 0 ? 1.0 : -1.0) : rng.uniform(-1.0, 1.0);
      h[j] += p.reg.lambda1 * s;
    }
    CHECK(best <= h.norm() + 1e-12);
  }
}

TEST_CASE("descent map is nonexpansive at gamma = 2/(mu+L)") {
  CounterRng rng(31, 0);
  for (int trial = 0; trial < 25; ++trial) {
    SmoothTerm<double> term = trial % 2 == 0 ? random_quadratic_term(4, rng)
                                             : random_logistic_term(10, 4, 0.2, rng);
    const double gamma = 2.0 / (term.mu + term.L);
    const Vec x = random_vec(4, rng);
    const Vec y = random_vec(4, rng);
    const Vec tx = x - gamma * gradient(term, x);
    const Vec ty = y - gamma * gradient(term, y);
    CHECK((tx - ty).norm() <= (x - y).norm() * (1.0 + 1e-12));
  }
}

TEST_CASE("gradient is L-Lipschitz on sampled pairs") {
  CounterRng rng(43, 0);
  for (int trial = 0; trial < 40; ++trial) {
    SmoothTerm<double> term = trial % 2 == 0 ? random_quadratic_term(5, rng)
                                             : random_logistic_term(12, 5, 0.1, rng);
    const Vec x = random_vec(5, rng);
    const Vec y = random_vec(5, rng);
    CHECK((gradient(term, x) - gradient(term, y)).norm() <=
          term.L * (x - y).norm() * (1.0 + 1e-9));
  }
}

TEST_CASE("logistic oracles stay finite at extreme margins") {
  SparseRowMatrix<double> a(2, 1);
  a.insert(0, 0) = 1.0;
  a.insert(1, 0) = -1.0;
  const auto term = SmoothTerm<double>::logistic(a, make_vec({1.0, 1.0}), 0.0);
  for (double x : {-1e4, -500.0, 500.0, 1e4}) {
    const Vec at = make_vec({x});
    CHECK(std::isfinite(value(term, at)));
    CHECK(std::isfinite(gradient(term, at)[0]));
  }
  // log(1 + exp(t)) ~ t for large t.
  CHECK(value(term, make_vec({1e4})) == doctest::Approx(1e4).epsilon(1e-12));
}

TEST_CASE("strong monotonicity holds when mu > 0") {
  CounterRng rng(37, 0);
  for (int trial = 0; trial < 25; ++trial) {
    const auto term = random_quadratic_term(4, rng);
    const Vec x = random_vec(4, rng);
    const Vec y = random_vec(4, rng);
    const double inner = (gradient(term, x) - gradient(term, y)).dot(x - y);
    CHECK(inner >= term.mu * (x - y).squaredNorm() * (1.0 - 1e-9));
  }
}

TEST_CASE("minimum-norm subgradient vanishes at a tight reference solution") {
  CounterRng rng(41, 0);
  CompositeProblem<double> p;
  for (int i = 0; i < 3; ++i) p.terms.push_back(random_quadratic_term(5, rng));
  p.reg = Regularizer<double>::l1(0.3);
  const auto config = default_step_config(p);
  const auto ref = reference_solution(p, config, 1e-12);
  CHECK(min_norm_subgradient(p, ref.x_star).norm() <= 1e-9);
  CHECK((prox_reg(p.reg, ref.x_bar_star, config.gamma_bar) - ref.x_star).norm() <= 1e-10);
}
