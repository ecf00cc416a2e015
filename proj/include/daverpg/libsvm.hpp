#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "daverpg/problem.hpp"
#include "daverpg/types.hpp"

namespace daverpg {

struct SparseRow {
  std::vector<Index> indices;  // 0-based, strictly increasing
  std::vector<double> values;
};

struct LibSVMDataset {
  std::vector<SparseRow> rows;
  std::vector<double> labels;  // entries in {-1, +1}
  Index n_features = 0;

  Index n_examples() const { return static_cast<Index>(rows.size()); }

  /// Assembles the rows into a sparse matrix with at least `min_cols`
  /// columns (n_features by default).
  SparseRowMatrix<double> to_matrix(Index min_cols = 0) const;
};

/// Parses the text format "label idx:val idx:val ..." with 1-based indices.
/// Labels 0/1 map to -1/+1; blank lines are skipped; any malformed token is
/// rejected with the offending line number. With `feature_cap` > 0, indices
/// above the cap are dropped and n_features is the cap.
LibSVMDataset parse_libsvm(std::istream& in, Index feature_cap = 0);
LibSVMDataset parse_libsvm_file(const std::string& path, Index feature_cap = 0);

std::string serialize_libsvm(const LibSVMDataset& data);

/// Contiguous blocks whose sizes differ by at most one (remainder spread
/// over the earliest shards).
std::vector<LibSVMDataset> partition(const LibSVMDataset& data, int shards);

/// Shard sizes only, same rule as partition().
std::vector<Index> partition_sizes(Index n, int shards);

/// One logistic term per contiguous shard plus an l1 regularizer.
CompositeProblem<double> problem_from_dataset(const LibSVMDataset& data, int workers,
                                              double lambda1, double lambda2);

}  // namespace daverpg
