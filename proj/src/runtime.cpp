#include "daverpg/runtime.hpp"

#include <chrono>
#include <condition_variable>
#include <deque>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace daverpg {

void StopRule::validate() const {
  if (max_iterations <= 0 && residual_threshold <= 0 && wall_clock_seconds <= 0) {
    throw std::invalid_argument("stop rule: no active stopping condition");
  }
  if (max_iterations < 0 || residual_threshold < 0 || wall_clock_seconds < 0) {
    throw std::invalid_argument("stop rule: negative value");
  }
}

namespace {

struct Upstream {
  int worker = 0;  // -1 signals a worker failure
  VecD delta;
  VecD x_new;
  int reps = 1;
};

// Single-slot mailbox the master uses to hand the fresh x_bar back.
struct Mailbox {
  std::mutex mutex;
  std::condition_variable cv;
  std::optional<VecD> model;
  bool stop = false;
};

struct MasterQueue {
  std::mutex mutex;
  std::condition_variable cv;
  std::deque<Upstream> queue;

  void push(Upstream msg) {
    {
      std::lock_guard<std::mutex> lock(mutex);
      queue.push_back(std::move(msg));
    }
    cv.notify_one();
  }
  Upstream pop() {
    std::unique_lock<std::mutex> lock(mutex);
    cv.wait(lock, [&] { return !queue.empty(); });
    Upstream msg = std::move(queue.front());
    queue.pop_front();
    return msg;
  }
};

}  // namespace

RunResult run_cluster(const ProblemD& problem, const ClusterConfig& config) {
  problem.validate();
  config.stop.validate();
  const int M = config.workers;
  if (M != problem.workers()) {
    throw std::invalid_argument("run_cluster: config.workers != problem terms");
  }
  if (config.steps.workers() != M) {
    throw std::invalid_argument("run_cluster: step config does not match problem");
  }
  if (!config.slowdown.empty() && static_cast<int>(config.slowdown.size()) != M) {
    throw std::invalid_argument("run_cluster: slowdown size mismatch");
  }

  RunResult result;
  const VecD x_bar0 =
      config.x_bar_init ? *config.x_bar_init : VecD::Zero(problem.dim());
  std::vector<VecD> worker_x(static_cast<std::size_t>(M), x_bar0);
  if (config.worker_init) {
    if (static_cast<int>(config.worker_init->size()) != M) {
      throw std::invalid_argument("run_cluster: worker_init size mismatch");
    }
    worker_x = *config.worker_init;
  }
  result.trace.workers = M;
  result.trace.algo = Algo::dave_rpg;
  result.trace.x_bar_init = x_bar0;
  result.trace.worker_init = worker_x;
  result.trace.has_snapshots = problem.dim() <= 1000;

  MasterStateD master{x_bar0, 0, config.steps};
  MasterQueue upstream;
  std::vector<Mailbox> mailboxes(static_cast<std::size_t>(M));

  std::mutex error_mutex;
  std::string first_error;

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) {
    threads.emplace_back([&, i] {
      const auto ui = static_cast<std::size_t>(i);
      const double gamma = config.steps.gammas[i];
      const double pi = config.steps.pis[i];
      const double gamma_bar = config.steps.gamma_bar;
      const double sleep_s = config.slowdown.empty() ? 0.0 : config.slowdown[ui];
      try {
        VecD x = worker_x[ui];
        VecD x_bar = x_bar0;
        Mailbox& mail = mailboxes[ui];
        while (true) {
          // One round: p repeated passes, accumulating the adjustment.
          VecD delta = VecD::Zero(x_bar.size());
          int reps = 0;
          const auto round_start = std::chrono::steady_clock::now();
          auto round_seconds = [&round_start] {
            return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                 round_start)
                .count();
          };
          while (true) {
            RoundResult<double> pass =
                rpg_worker_round(x, VecD(x_bar + delta), 1,
                                 problem.terms[ui], problem.reg, gamma, pi, gamma_bar);
            delta += pass.delta;
            x = std::move(pass.x_new);
            reps += 1;
            if (sleep_s > 0) {
              std::this_thread::sleep_for(std::chrono::duration<double>(sleep_s));
            }
            if (config.reps.kind == RepetitionPolicy::Kind::budgeted) {
              if (round_seconds() >= config.reps.time_budget) break;
            } else if (reps >= config.reps.resolve(i)) {
              break;
            }
          }
          upstream.push(Upstream{i, delta, x, reps});
          std::unique_lock<std::mutex> lock(mail.mutex);
          mail.cv.wait(lock, [&] { return mail.model.has_value() || mail.stop; });
          if (mail.stop) break;
          x_bar = std::move(*mail.model);
          mail.model.reset();
        }
      } catch (const std::exception& e) {
        {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (first_error.empty()) {
            first_error = "worker " + std::to_string(i) + ": " + e.what();
          }
        }
        upstream.push(Upstream{-1, {}, {}, 0});
      }
    });
  }

  bool failed = false;
  while (true) {
    Upstream msg = upstream.pop();
    if (msg.worker < 0) {
      failed = true;
      break;
    }
    master_apply(master, AdjustmentMsg<double>{msg.worker, msg.delta});
    TraceRecord rec;
    rec.k = master.k;
    rec.worker = msg.worker;
    rec.sim_time = elapsed();
    rec.reps = msg.reps;
    rec.delta_norm = msg.delta.norm();
    if (result.trace.has_snapshots) {
      rec.delta = msg.delta;
      rec.x_worker = msg.x_new;
      rec.x_bar = master.x_bar;
    }
    result.trace.records.push_back(std::move(rec));

    bool stop = false;
    if (config.stop.max_iterations > 0 && master.k >= config.stop.max_iterations) {
      stop = true;
    }
    if (!stop && config.stop.wall_clock_seconds > 0 &&
        elapsed() >= config.stop.wall_clock_seconds) {
      stop = true;
    }
    if (!stop && config.stop.residual_threshold > 0) {
      const VecD out = master_output(master, problem.reg);
      if (min_norm_subgradient(problem, out).norm() <= config.stop.residual_threshold) {
        stop = true;
      }
    }
    if (stop) break;

    Mailbox& mail = mailboxes[static_cast<std::size_t>(msg.worker)];
    {
      std::lock_guard<std::mutex> lock(mail.mutex);
      mail.model = master.x_bar;
    }
    mail.cv.notify_one();
  }

  // Interrupt all workers; adjustments still in flight are discarded.
  for (auto& mail : mailboxes) {
    {
      std::lock_guard<std::mutex> lock(mail.mutex);
      mail.stop = true;
    }
    mail.cv.notify_one();
  }
  for (auto& t : threads) t.join();

  result.failed = failed;
  if (failed) {
    std::lock_guard<std::mutex> lock(error_mutex);
    result.error = first_error;
  }
  result.output = master_output(master, problem.reg);
  result.master = std::move(master);
  return result;
}

}  // namespace daverpg
