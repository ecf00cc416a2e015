#include "daverpg/libsvm.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace daverpg {

namespace {

[[noreturn]] void fail(std::int64_t line, const std::string& message) {
  throw std::runtime_error("line " + std::to_string(line) + ": " + message);
}

double parse_number(const std::string& token, std::int64_t line, const char* what) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size() || token.empty() || errno == ERANGE) {
    fail(line, std::string("nonnumeric ") + what + " '" + token + "'");
  }
  return v;
}

double parse_label(const std::string& token, std::int64_t line) {
  const double v = parse_number(token, line, "label");
  if (v == 1 || v == -1) return v;
  if (v == 0) return -1;  // 0/1 labeling maps to -1/+1
  fail(line, "label must be one of -1, 0, +1, got '" + token + "'");
}

}  // namespace

SparseRowMatrix<double> LibSVMDataset::to_matrix(Index min_cols) const {
  const Index cols = std::max(n_features, min_cols);
  SparseRowMatrix<double> m(n_examples(), cols);
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t t = 0; t < rows[r].indices.size(); ++t) {
      triplets.emplace_back(static_cast<int>(r), static_cast<int>(rows[r].indices[t]),
                            rows[r].values[t]);
    }
  }
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

LibSVMDataset parse_libsvm(std::istream& in, Index feature_cap) {
  LibSVMDataset data;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    line_no += 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream tokens(line);
    std::string token;
    if (!(tokens >> token)) continue;  // blank line
    data.labels.push_back(parse_label(token, line_no));
    SparseRow row;
    Index last_index = -1;
    while (tokens >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == token.size()) {
        fail(line_no, "malformed feature token '" + token + "'");
      }
      const double raw_index =
          parse_number(token.substr(0, colon), line_no, "feature index");
      const auto index_1b = static_cast<Index>(raw_index);
      if (raw_index != static_cast<double>(index_1b) || index_1b < 1) {
        fail(line_no, "feature index must be a positive integer in '" + token + "'");
      }
      const double value = parse_number(token.substr(colon + 1), line_no, "feature value");
      const Index index = index_1b - 1;
      if (index <= last_index) {
        fail(line_no, "feature indices must be strictly increasing at '" + token + "'");
      }
      last_index = index;
      if (feature_cap > 0 && index >= feature_cap) continue;  // cap truncates
      row.indices.push_back(index);
      row.values.push_back(value);
      if (index + 1 > data.n_features) data.n_features = index + 1;
    }
    data.rows.push_back(std::move(row));
  }
  if (feature_cap > 0) data.n_features = feature_cap;
  return data;
}

LibSVMDataset parse_libsvm_file(const std::string& path, Index feature_cap) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  return parse_libsvm(in, feature_cap);
}

std::string serialize_libsvm(const LibSVMDataset& data) {
  std::string out;
  char buf[64];
  for (std::size_t r = 0; r < data.rows.size(); ++r) {
    out += data.labels[r] > 0 ? "+1" : "-1";
    for (std::size_t t = 0; t < data.rows[r].indices.size(); ++t) {
      std::snprintf(buf, sizeof(buf), " %lld:%.17g",
                    static_cast<long long>(data.rows[r].indices[t] + 1),
                    data.rows[r].values[t]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::vector<Index> partition_sizes(Index n, int shards) {
  if (shards <= 0) throw std::invalid_argument("partition: need at least one shard");
  if (static_cast<Index>(shards) > n) {
    throw std::invalid_argument("partition: more shards than examples (" +
                                std::to_string(shards) + " > " + std::to_string(n) + ")");
  }
  std::vector<Index> sizes(static_cast<std::size_t>(shards));
  const Index base = n / shards;
  const Index extra = n % shards;
  for (int i = 0; i < shards; ++i) {
    sizes[static_cast<std::size_t>(i)] = base + (i < extra ? 1 : 0);
  }
  return sizes;
}

std::vector<LibSVMDataset> partition(const LibSVMDataset& data, int shards) {
  const std::vector<Index> sizes = partition_sizes(data.n_examples(), shards);
  std::vector<LibSVMDataset> out(static_cast<std::size_t>(shards));
  Index start = 0;
  for (int i = 0; i < shards; ++i) {
    auto& shard = out[static_cast<std::size_t>(i)];
    shard.n_features = data.n_features;
    const Index size = sizes[static_cast<std::size_t>(i)];
    for (Index r = start; r < start + size; ++r) {
      shard.rows.push_back(data.rows[static_cast<std::size_t>(r)]);
      shard.labels.push_back(data.labels[static_cast<std::size_t>(r)]);
    }
    start += size;
  }
  return out;
}

CompositeProblem<double> problem_from_dataset(const LibSVMDataset& data, int workers,
                                              double lambda1, double lambda2) {
  if (lambda1 < 0 || lambda2 < 0) {
    throw std::invalid_argument("problem_from_dataset: negative regularization");
  }
  CompositeProblem<double> problem;
  for (const auto& shard : partition(data, workers)) {
    VecD labels(shard.n_examples());
    for (Index j = 0; j < shard.n_examples(); ++j) {
      labels[j] = shard.labels[static_cast<std::size_t>(j)];
    }
    problem.terms.push_back(SmoothTerm<double>::logistic(
        shard.to_matrix(data.n_features), labels, lambda2));
  }
  problem.reg = lambda1 > 0 ? Regularizer<double>::l1(lambda1)
                            : Regularizer<double>::none();
  problem.validate();
  return problem;
}

}  // namespace daverpg
