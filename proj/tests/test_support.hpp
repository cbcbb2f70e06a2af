#pragma once

#include <vector>

#include "fasttls/matrix.hpp"
#include "fasttls/random.hpp"

namespace testsup {

using fasttls::DenseMatrix;
using fasttls::Index;
using fasttls::SparseMatrix;

inline DenseMatrix random_dense(Index rows, Index cols, std::uint64_t seed) {
  fasttls::Rng rng(seed);
  DenseMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

inline SparseMatrix random_sparse(Index rows, Index cols, double fill, std::uint64_t seed) {
  fasttls::Rng rng(seed);
  std::vector<SparseMatrix::Triplet> trips;
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      if (rng.uniform() < fill) trips.push_back({i, j, rng.normal()});
  if (trips.empty()) trips.push_back({0, 0, 1.0});
  return SparseMatrix::from_triplets(rows, cols, std::move(trips));
}

inline DenseMatrix diag(std::vector<double> entries) {
  const Index n = static_cast<Index>(entries.size());
  DenseMatrix m(n, n);
  for (Index i = 0; i < n; ++i) m(i, i) = entries[static_cast<std::size_t>(i)];
  return m;
}

inline DenseMatrix random_rank_k(Index rows, Index cols, Index k, std::uint64_t seed) {
  return fasttls::multiply(random_dense(rows, k, seed), random_dense(k, cols, seed + 1));
}

}  // namespace testsup
