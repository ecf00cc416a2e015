#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "daverpg/algorithm.hpp"
#include "daverpg/rng.hpp"
#include "daverpg/simulator.hpp"
#include "test_fixtures.hpp"

using namespace daverpg;
using daverpg::testing::exact_pair;
using daverpg::testing::make_vec;
using Vec = Vector<double>;
using Mat = Matrix<double>;

TEST_CASE("configure_steps: equal stepsizes give uniform weights") {
  const auto cfg = configure_steps(Vec(Vec::Constant(4, 0.7)));
  for (int i = 0; i < 4; ++i) CHECK(cfg.pis[i] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(cfg.gamma_bar == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("configure_steps: worked two-worker example") {
  const auto cfg = configure_steps(make_vec({1.0, 3.0}));
  CHECK(cfg.pis[0] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(cfg.pis[1] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(cfg.gamma_bar == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("configure_steps: invariants over 1000 random stepsize vectors") {
  CounterRng rng(5, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int m = 1 + static_cast<int>(rng.next_u64() % 12);
    Vec gammas(m);
    for (int i = 0; i < m; ++i) gammas[i] = std::exp(rng.uniform(-6.0, 3.0));
    const auto cfg = configure_steps(gammas);
    CHECK(std::abs(cfg.pis.sum() - 1.0) <= 1e-12);
    for (int i = 0; i < m; ++i) {
      CHECK(std::abs(cfg.pis[i] * cfg.gammas[i] - cfg.gamma_bar / m) <= 1e-12);
      CHECK(cfg.pis[i] > 0.0);
    }
  }
}

TEST_CASE("configure_steps rejects nonpositive stepsizes") {
  CHECK_THROWS_AS(configure_steps(make_vec({1.0, 0.0})), std::invalid_argument);
  CHECK_THROWS_AS(configure_steps(make_vec({-0.5})), std::invalid_argument);
}

TEST_CASE("worker round: fixed point of the shifted optima") {
  for (bool with_l1 : {false, true}) {
    const auto fix = exact_pair(with_l1);
    const auto cfg = default_step_config(fix.problem);
    const auto ref = fix.reference(cfg);
    for (int p : {1, 2, 5}) {
      for (int i = 0; i < 2; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const auto round =
            rpg_worker_round(ref.shifted[ui], ref.x_bar_star, p, fix.problem.terms[ui],
                             fix.problem.reg, cfg.gammas[i], cfg.pis[i], cfg.gamma_bar);
        CHECK(round.delta.norm() <= 1e-14);
        CHECK((round.x_new - ref.shifted[ui]).norm() <= 1e-14);
      }
    }
  }
}

TEST_CASE("worker round: p=1 without regularizer is one delayed gradient step") {
  const auto fix = exact_pair(false);
  const auto cfg = default_step_config(fix.problem);
  const Vec x_bar = make_vec({0.4, -1.2});
  const Vec x_prev = make_vec({-0.3, 0.9});
  const auto round = rpg_worker_round(x_prev, x_bar, 1, fix.problem.terms[0],
                                      fix.problem.reg, cfg.gammas[0], cfg.pis[0],
                                      cfg.gamma_bar);
  const Vec expected_x = x_bar - cfg.gammas[0] * gradient(fix.problem.terms[0], x_bar);
  CHECK((round.x_new - expected_x).norm() == 0.0);
  CHECK((round.delta - cfg.pis[0] * (expected_x - x_prev)).norm() == 0.0);
}

TEST_CASE("worker round: hand-unrolled two-repetition scalar case") {
  // f(x) = (x-1)^2/2, gamma = pi = as stated, no regularizer, from zero:
  // q=1: z=0, x+=1, delta=0.5; q=2: z=0.5, x+=1, delta unchanged.
  CompositeProblem<double> p;
  p.terms.push_back(SmoothTerm<double>::quadratic(Mat::Identity(1, 1), make_vec({1.0})));
  const auto round = rpg_worker_round(make_vec({0.0}), make_vec({0.0}), 2, p.terms[0],
                                      p.reg, 1.0, 0.5, 1.0);
  CHECK(round.delta[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(round.x_new[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("worker round: the stateful wrapper matching the free function") {
  const auto fix = exact_pair(true);
  const auto cfg = default_step_config(fix.problem);
  WorkerState<double> worker;
  worker.id = 1;
  worker.x = make_vec({0.5, -0.5});
  worker.gamma = cfg.gammas[1];
  worker.pi = cfg.pis[1];
  worker.gamma_bar = cfg.gamma_bar;
  worker.last_received = make_vec({1.0, 1.0});
  const auto a = rpg_worker_round(worker, worker.last_received, 3, fix.problem.terms[1],
                                  fix.problem.reg);
  const auto b = rpg_worker_round(worker.x, worker.last_received, 3, fix.problem.terms[1],
                                  fix.problem.reg, cfg.gammas[1], cfg.pis[1],
                                  cfg.gamma_bar);
  CHECK((a.delta - b.delta).norm() == 0.0);
  CHECK((a.x_new - b.x_new).norm() == 0.0);
}

TEST_CASE("worker round rejects bad repetition counts and dimensions") {
  const auto fix = exact_pair(false);
  const auto cfg = default_step_config(fix.problem);
  CHECK_THROWS_AS(rpg_worker_round(make_vec({0.0, 0.0}), make_vec({0.0, 0.0}), 0,
                                   fix.problem.terms[0], fix.problem.reg, cfg.gammas[0],
                                   cfg.pis[0], cfg.gamma_bar),
                  std::invalid_argument);
  CHECK_THROWS_AS(rpg_worker_round(make_vec({0.0}), make_vec({0.0, 0.0}), 1,
                                   fix.problem.terms[0], fix.problem.reg, cfg.gammas[0],
                                   cfg.pis[0], cfg.gamma_bar),
                  std::invalid_argument);
}

TEST_CASE("master_apply adds the adjustment and advances the clock") {
  MasterState<double> master{make_vec({0.2}), 7, configure_steps(make_vec({1.0}))};
  master_apply(master, AdjustmentMsg<double>{0, make_vec({0.1})});
  CHECK(master.x_bar[0] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(master.k == 8);
  master_apply(master, AdjustmentMsg<double>{0, make_vec({0.0})});
  CHECK(master.x_bar[0] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(master.k == 9);
  CHECK_THROWS_AS(master_apply(master, AdjustmentMsg<double>{0, make_vec({0.0, 0.0})}),
                  std::invalid_argument);
}

TEST_CASE("master_output: identity without regularizer, soft threshold with l1") {
  MasterState<double> master{make_vec({0.4}), 0, configure_steps(make_vec({0.5}))};
  CHECK(master_output(master, Regularizer<double>::none())[0] == 0.4);
  // gamma_bar * lambda1 = 0.5 kills the small component.
  CHECK(master_output(master, Regularizer<double>::l1(1.0))[0] == 0.0);
}

TEST_CASE("master_output at the fixed point returns the optimum") {
  const auto fix = exact_pair(true);
  const auto cfg = default_step_config(fix.problem);
  const auto ref = fix.reference(cfg);
  MasterState<double> master{ref.x_bar_star, 0, cfg};
  CHECK((master_output(master, fix.problem.reg) - fix.x_star).norm() <= 1e-14);
}

TEST_CASE("piag_step: fresh table at the same point is a plain gradient step") {
  const auto fix = exact_pair(false);
  const Vec x = make_vec({1.5, -0.5});
  auto state = piag_init(fix.problem, x, 0.2);
  // Replace one entry with the gradient at x (it already is), then step.
  piag_step(state, fix.problem.reg, 0, gradient(fix.problem.terms[0], x));
  const Vec expected = x - 0.2 * smooth_gradient(fix.problem, x);
  CHECK((state.x - expected).norm() <= 1e-15);
  CHECK(state.k == 1);
}

TEST_CASE("piag_step: optimum with optimal table is a fixed point") {
  const auto fix = exact_pair(true);
  auto state = piag_init(fix.problem, fix.x_star, 0.3);
  piag_step(state, fix.problem.reg, 1, gradient(fix.problem.terms[1], fix.x_star));
  CHECK((state.x - fix.x_star).norm() <= 1e-14);
}

TEST_CASE("piag_step: scalar two-worker hand evaluation") {
  CompositeProblem<double> p;
  p.terms.push_back(SmoothTerm<double>::quadratic(Mat::Identity(1, 1), make_vec({0.0})));
  p.terms.push_back(SmoothTerm<double>::quadratic(Mat::Identity(1, 1), make_vec({0.0})));
  auto state = piag_init(p, make_vec({1.0}), 0.1);
  state.gradient_table[0] = make_vec({2.0});
  state.gradient_table[1] = make_vec({-1.0});
  piag_step(state, p.reg, 0, make_vec({2.0}));  // table (2, -1), mean 0.5
  CHECK(state.x[0] == doctest::Approx(0.95).epsilon(1e-15));
  piag_step(state, p.reg, 1, make_vec({3.0}));  // table (2, 3), mean 2.5
  CHECK(state.x[0] == doctest::Approx(0.70).epsilon(1e-15));
}

TEST_CASE("piag_step requires a warm table") {
  const auto fix = exact_pair(false);
  PiagState<double> cold;
  cold.x = make_vec({0.0, 0.0});
  cold.gamma = 0.1;
  CHECK_THROWS_AS(piag_step(cold, fix.problem.reg, 0, make_vec({0.0, 0.0})),
                  std::invalid_argument);
}

TEST_CASE("piag_stepsize: zero-curvature limit form") {
  CHECK(piag_stepsize(0.0, 1.0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(piag_stepsize(0.0, 2.5, 7) ==
        doctest::Approx(1.0 / (3.0 * 2.5 * 8.0)).epsilon(1e-15));
}

TEST_CASE("piag_stepsize: d = 0 collapses to 1/(3L) for any mu") {
  for (double mu : {1e-3, 0.1, 1.0}) {
    CHECK(piag_stepsize(mu, 2.0, 0) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  }
}

TEST_CASE("piag_stepsize matches an extended-precision evaluation") {
  // Oracle: the same closed form evaluated in long double.
  auto oracle = [](long double mu, long double L, long d) -> long double {
    return (16.0L / mu) * expm1l(log1pl(mu / (48.0L * L)) / (long double)(d + 1));
  };
  CounterRng rng(3, 0);
  CHECK(piag_stepsize(1.0, 1.0, 9) ==
        doctest::Approx(static_cast<double>(oracle(1.0L, 1.0L, 9))).epsilon(1e-12));
  for (int trial = 0; trial < 50; ++trial) {
    const double mu = std::exp(rng.uniform(-10.0, 0.0));
    const double L = mu * std::exp(rng.uniform(0.0, 6.0));
    const long d = static_cast<long>(rng.next_u64() % 50);
    const double got = piag_stepsize(mu, L, d);
    const double want = static_cast<double>(oracle(mu, L, d));
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("piag_stepsize: vanishing mu approaches the stated limit") {
  const double L = 3.0;
  const long d = 12;
  const double limit = 1.0 / (3.0 * L * (d + 1));
  for (int k = 4; k <= 12; ++k) {
    const double mu = std::pow(10.0, -k);
    CHECK(std::abs(piag_stepsize(mu, L, d) - limit) <= 1e-6 * limit);
  }
}

TEST_CASE("piag_stepsize rejects bad arguments") {
  CHECK_THROWS_AS(piag_stepsize(0.0, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(piag_stepsize(0.0, -1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(piag_stepsize(0.1, 1.0, -1), std::invalid_argument);
}

TEST_CASE("sync_pg_round: equal stepsizes without regularizer is a gradient step") {
  const auto fix = exact_pair(false);
  const auto cfg = configure_steps(Vec(Vec::Constant(2, 0.25)));
  const Vec x = make_vec({1.0, -2.0});
  const Vec got = sync_pg_round(fix.problem, x, cfg);
  const Vec want = x - 0.25 * smooth_gradient(fix.problem, x);
  CHECK((got - want).norm() <= 1e-15);
}

TEST_CASE("sync_pg_round: optimum is a fixed point") {
  const auto fix = exact_pair(true);
  const auto cfg = default_step_config(fix.problem);
  CHECK((sync_pg_round(fix.problem, fix.x_star, cfg) - fix.x_star).norm() <= 1e-14);
}

TEST_CASE("sync_pg_round matches a hand-evaluated round") {
  const auto fix = exact_pair(true);
  const auto cfg = default_step_config(fix.problem);
  const Vec x = make_vec({0.7, 1.1});
  Vec acc = Vec::Zero(2);
  for (int i = 0; i < 2; ++i) {
    acc += cfg.pis[i] * (x - cfg.gammas[i] * gradient(fix.problem.terms[i], x));
  }
  Vec want(2);
  for (int j = 0; j < 2; ++j) {
    const double t = cfg.gamma_bar * fix.problem.reg.lambda1;
    want[j] = std::abs(acc[j]) > t ? (acc[j] > 0 ? acc[j] - t : acc[j] + t) : 0.0;
  }
  CHECK((sync_pg_round(fix.problem, x, cfg) - want).norm() <= 1e-15);
}

TEST_CASE("repetition policy: kinds resolve and validate") {
  CHECK(RepetitionPolicy::fixed(3).resolve(5) == 3);
  const auto per = RepetitionPolicy::per_worker({1, 4, 2});
  CHECK(per.resolve(1) == 4);
  CHECK_THROWS_AS(RepetitionPolicy::fixed(0), std::invalid_argument);
  CHECK_THROWS_AS(RepetitionPolicy::per_worker({1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(RepetitionPolicy::budgeted(0.0), std::invalid_argument);
}

TEST_CASE("single worker: averaging protocol and piag produce the same iterates") {
  CompositeProblem<double> p;
  Mat h = Mat::Zero(2, 2);
  h(0, 0) = 1.0;
  h(1, 1) = 3.0;
  p.terms.push_back(SmoothTerm<double>::quadratic(h, make_vec({1.0, -1.0})));
  const auto cfg = default_step_config(p);

  SimOptions dave;
  dave.algo = Algo::dave_rpg;
  dave.steps = cfg;
  dave.budget.max_iterations = 100;
  dave.x_bar_init = make_vec({5.0, 5.0});

  SimOptions piag = dave;
  piag.algo = Algo::piag;
  piag.piag_gamma = cfg.gammas[0];

  const auto a = simulate(p, dave);
  const auto b = simulate(p, piag);
  REQUIRE(a.trace.records.size() == 100);
  REQUIRE(b.trace.records.size() == 100);
  for (std::size_t r = 0; r < 100; ++r) {
    // dave snapshots the master variable; with g == 0 the output map is the
    // identity, so the iterates are directly comparable.
    const Vec& xa = a.trace.records[r].x_bar;
    const Vec& xb = b.trace.records[r].x_bar;
    CHECK((xa - xb).norm() <= 1e-12 * (1.0 + xa.norm()));
  }
}
