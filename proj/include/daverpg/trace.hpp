#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "daverpg/types.hpp"

namespace daverpg {

enum class Algo { dave_rpg, piag, sync_pg };

std::string algo_name(Algo a);
Algo algo_from_name(const std::string& name);

/// One master commit. `k` is 1-based in exported artifacts; in-memory the
/// record at position kappa of Trace::records is exchange number kappa
/// (0-based), with k == kappa + 1.
struct TraceRecord {
  std::int64_t k = 0;
  int worker = 0;
  double sim_time = 0;
  int reps = 1;
  double delta_norm = 0;
  // Snapshots (present when Trace::has_snapshots): the applied adjustment,
  // the committing worker's new local parameter, and the master state after
  // the commit.
  VecD delta;
  VecD x_worker;
  VecD x_bar;
};

struct Trace {
  int workers = 0;
  Algo algo = Algo::dave_rpg;
  VecD x_bar_init;
  std::vector<VecD> worker_init;
  std::vector<TraceRecord> records;
  bool has_snapshots = true;

  std::int64_t iterations() const { return static_cast<std::int64_t>(records.size()); }
  std::vector<int> update_order() const {
    std::vector<int> order;
    order.reserve(records.size());
    for (const auto& r : records) order.push_back(r.worker);
    return order;
  }
};

/// Per-exchange delay tables on 0-based exchange indices.
///
///   d(kappa, j) — exchanges since worker j last committed (the initial
///     distribution of the master variable counts as an exchange at -1, so
///     d is defined everywhere and the updating worker always has d = 0);
///   D(kappa, j) — distance back to worker j's second-to-last real commit,
///     d_j^k + d_j^{k-d_j^k-1} + 1; set to -1 until j has committed twice.
struct DelayTable {
  int workers = 0;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> d;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> D;

  std::int64_t exchanges() const { return d.rows(); }

  std::int64_t max_delay() const { return d.size() ? d.maxCoeff() : 0; }
  double max_average_delay() const {
    double best = 0;
    for (Index k = 0; k < d.rows(); ++k) {
      best = std::max(best, static_cast<double>(d.row(k).sum()) / workers);
    }
    return best;
  }
  std::int64_t max_delay_at(std::int64_t kappa) const { return d.row(kappa).maxCoeff(); }
};

DelayTable delays_from_update_order(const std::vector<int>& order, int workers);
DelayTable delays_from_trace(const Trace& trace, int workers);

/// Epoch boundaries kappa_0 = 0 < kappa_1 < ... on 0-based exchange
/// indices: kappa_{m+1} = min{ kappa : kappa - D_i^kappa >= kappa_m for
/// every worker i }, i.e. every worker commits at least twice in
/// [kappa_m, kappa_{m+1}].
struct EpochSequence {
  std::vector<std::int64_t> boundaries;  // boundaries[m] = kappa_m, boundaries[0] = 0

  /// Epoch index m with kappa in [kappa_m, kappa_{m+1}); exchanges past the
  /// last boundary belong to the trailing (possibly incomplete) epoch.
  int epoch_of(std::int64_t kappa) const;
  /// Number of completed epochs (gaps between consecutive boundaries).
  int complete_epochs() const { return static_cast<int>(boundaries.size()) - 1; }
};

EpochSequence epoch_sequence(const DelayTable& delays);

struct EpochBoundReport {
  std::int64_t observed_max_delay = 0;
  double observed_max_average_delay = 0;
  std::int64_t max_gap = 0;
  std::int64_t uniform_gap_bound = 0;
  double average_gap_bound = 0;
  std::vector<int> uniform_violations;  // epoch indices m with gap > bound
  std::vector<int> average_violations;

  bool ok() const { return uniform_violations.empty() && average_violations.empty(); }
};

/// Checks every completed epoch gap against the two delay-based bounds
/// evaluated at the observed maximum and maximum-average delays.
EpochBoundReport verify_epoch_bounds(const DelayTable& delays,
                                     const EpochSequence& epochs);

}  // namespace daverpg
