#include "daverpg/trace.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace daverpg {

std::string algo_name(Algo a) {
  switch (a) {
    case Algo::dave_rpg:
      return "daverpg";
    case Algo::piag:
      return "piag";
    case Algo::sync_pg:
      return "syncpg";
  }
  return "";
}

Algo algo_from_name(const std::string& name) {
  if (name == "daverpg") return Algo::dave_rpg;
  if (name == "piag") return Algo::piag;
  if (name == "syncpg") return Algo::sync_pg;
  throw std::invalid_argument("unknown algorithm: " + name +
                              " (expected daverpg, piag, or syncpg)");
}

DelayTable delays_from_update_order(const std::vector<int>& order, int workers) {
  if (order.empty()) throw std::invalid_argument("delays: empty trace");
  if (workers <= 0) throw std::invalid_argument("delays: need at least one worker");
  const auto K = static_cast<Index>(order.size());
  DelayTable table;
  table.workers = workers;
  table.d.resize(K, workers);
  table.D.resize(K, workers);
  std::vector<std::int64_t> last(static_cast<std::size_t>(workers), -1);
  std::vector<std::int64_t> prev(static_cast<std::size_t>(workers), -1);
  for (Index kappa = 0; kappa < K; ++kappa) {
    const int i = order[static_cast<std::size_t>(kappa)];
    if (i < 0 || i >= workers) {
      throw std::invalid_argument("delays: worker id out of range at exchange " +
                                  std::to_string(kappa));
    }
    prev[static_cast<std::size_t>(i)] = last[static_cast<std::size_t>(i)];
    last[static_cast<std::size_t>(i)] = kappa;
    for (int j = 0; j < workers; ++j) {
      table.d(kappa, j) = kappa - last[static_cast<std::size_t>(j)];
      table.D(kappa, j) = prev[static_cast<std::size_t>(j)] >= 0
                              ? kappa - prev[static_cast<std::size_t>(j)]
                              : -1;
    }
  }
  return table;
}

DelayTable delays_from_trace(const Trace& trace, int workers) {
  return delays_from_update_order(trace.update_order(), workers);
}

int EpochSequence::epoch_of(std::int64_t kappa) const {
  auto it = std::upper_bound(boundaries.begin(), boundaries.end(), kappa);
  return static_cast<int>(it - boundaries.begin()) - 1;
}

EpochSequence epoch_sequence(const DelayTable& delays) {
  EpochSequence seq;
  seq.boundaries.push_back(0);
  const std::int64_t K = delays.exchanges();
  for (std::int64_t kappa = 0; kappa < K; ++kappa) {
    // min over workers of the second-to-last commit; undefined while some
    // worker has fewer than two commits. A boundary can never repeat: the
    // second-to-last commit is always strictly before kappa.
    std::int64_t min_prev = K;
    bool defined = true;
    for (int j = 0; j < delays.workers; ++j) {
      const std::int64_t D = delays.D(kappa, j);
      if (D < 0) {
        defined = false;
        break;
      }
      min_prev = std::min(min_prev, kappa - D);
    }
    if (defined && min_prev >= seq.boundaries.back()) {
      seq.boundaries.push_back(kappa);
    }
  }
  return seq;
}

EpochBoundReport verify_epoch_bounds(const DelayTable& delays,
                                     const EpochSequence& epochs) {
  EpochBoundReport report;
  report.observed_max_delay = delays.max_delay();
  report.observed_max_average_delay = delays.max_average_delay();
  report.uniform_gap_bound = 2 * report.observed_max_delay + 1;
  const double M = delays.workers;
  report.average_gap_bound =
      2.0 * M * (2.0 * report.observed_max_average_delay - M + 3.0) - 3.0;
  for (std::size_t m = 0; m + 1 < epochs.boundaries.size(); ++m) {
    const std::int64_t gap = epochs.boundaries[m + 1] - epochs.boundaries[m];
    report.max_gap = std::max(report.max_gap, gap);
    if (gap > report.uniform_gap_bound) {
      report.uniform_violations.push_back(static_cast<int>(m));
    }
    if (static_cast<double>(gap) > report.average_gap_bound) {
      report.average_violations.push_back(static_cast<int>(m));
    }
  }
  return report;
}

}  // namespace daverpg
