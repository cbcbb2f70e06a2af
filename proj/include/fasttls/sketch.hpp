#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "fasttls/decomp.hpp"
#include "fasttls/matrix.hpp"
#include "fasttls/random.hpp"

namespace fasttls {

//
// Instrumentation: multiply-add count of the sketch-application phase.
// Accumulated per call so the hot loops stay free of atomics.
//

namespace detail {
inline std::atomic<std::uint64_t>& apply_flop_counter() {
  static std::atomic<std::uint64_t> counter{0};
  return counter;
}
}  // namespace detail

inline void reset_apply_flops() { detail::apply_flop_counter().store(0); }
inline std::uint64_t apply_flops() { return detail::apply_flop_counter().load(); }

//
// Oblivious transforms
//

// Sparse embedding: each source index is hashed to one target row with a
// random sign, so applying the transform touches each nonzero of the operand
// exactly once.
class CountSketchTransform {
 public:
  CountSketchTransform(Index target_rows, Index source_dim, std::uint64_t seed)
      : target_rows_(target_rows), source_dim_(source_dim), seed_(seed) {
    if (target_rows < 1 || source_dim < 0)
      throw DimensionError("CountSketchTransform: invalid shape");
    bucket_of_.resize(static_cast<std::size_t>(source_dim));
    sign_of_.resize(static_cast<std::size_t>(source_dim));
    Rng rng(seed);
    for (Index i = 0; i < source_dim; ++i) {
      bucket_of_[static_cast<std::size_t>(i)] = rng.uniform_index(target_rows);
      sign_of_[static_cast<std::size_t>(i)] = static_cast<std::int8_t>(rng.rademacher());
    }
  }

  // bucket i -> i with positive signs; the transform acts as the identity.
  static CountSketchTransform identity_like(Index n) {
    CountSketchTransform t(n, n, 0);
    for (Index i = 0; i < n; ++i) {
      t.bucket_of_[static_cast<std::size_t>(i)] = i;
      t.sign_of_[static_cast<std::size_t>(i)] = 1;
    }
    return t;
  }

  Index target_rows() const noexcept { return target_rows_; }
  Index source_dim() const noexcept { return source_dim_; }
  Index bucket(Index i) const { return bucket_of_[static_cast<std::size_t>(i)]; }
  int sign(Index i) const { return sign_of_[static_cast<std::size_t>(i)]; }
  std::uint64_t seed() const noexcept { return seed_; }

  DenseMatrix to_dense() const {
    DenseMatrix out(target_rows_, source_dim_);
    for (Index i = 0; i < source_dim_; ++i) out(bucket(i), i) = sign(i);
    return out;
  }

 private:
  Index target_rows_;
  Index source_dim_;
  std::vector<Index> bucket_of_;
  std::vector<std::int8_t> sign_of_;
  std::uint64_t seed_;
};

inline DenseMatrix apply_countsketch_left(const CountSketchTransform& s, const Matrix& m) {
  if (s.source_dim() != m.rows())
    throw DimensionError("apply_countsketch_left: source dimension must equal row count");
  DenseMatrix out(s.target_rows(), m.cols());
  std::uint64_t flops = 0;
  if (const auto* d = m.as_dense()) {
    for (Index i = 0; i < d->rows(); ++i) {
      auto dst = out.row(s.bucket(i));
      const double sg = s.sign(i);
      const auto src = d->row(i);
      for (Index j = 0; j < d->cols(); ++j) dst[j] += sg * src[j];
    }
    flops = static_cast<std::uint64_t>(d->rows()) * static_cast<std::uint64_t>(d->cols());
  } else {
    const SparseMatrix& sp = *m.as_sparse();
    for (Index i = 0; i < sp.rows(); ++i) {
      auto dst = out.row(s.bucket(i));
      const double sg = s.sign(i);
      for (Index p = sp.row_ptr()[i]; p < sp.row_ptr()[i + 1]; ++p)
        dst[sp.col_idx()[p]] += sg * sp.values()[p];
    }
    flops = static_cast<std::uint64_t>(sp.nnz());
  }
  detail::apply_flop_counter().fetch_add(flops, std::memory_order_relaxed);
  return out;
}

// M * S^T: the transform acts on columns of M.
inline DenseMatrix apply_countsketch_cols(const Matrix& m, const CountSketchTransform& s) {
  if (s.source_dim() != m.cols())
    throw DimensionError("apply_countsketch_cols: source dimension must equal column count");
  DenseMatrix out(m.rows(), s.target_rows());
  std::uint64_t flops = 0;
  if (const auto* d = m.as_dense()) {
    for (Index i = 0; i < d->rows(); ++i) {
      auto dst = out.row(i);
      const auto src = d->row(i);
      for (Index j = 0; j < d->cols(); ++j) dst[s.bucket(j)] += s.sign(j) * src[j];
    }
    flops = static_cast<std::uint64_t>(d->rows()) * static_cast<std::uint64_t>(d->cols());
  } else {
    const SparseMatrix& sp = *m.as_sparse();
    for (Index i = 0; i < sp.rows(); ++i) {
      auto dst = out.row(i);
      for (Index p = sp.row_ptr()[i]; p < sp.row_ptr()[i + 1]; ++p)
        dst[s.bucket(sp.col_idx()[p])] += s.sign(sp.col_idx()[p]) * sp.values()[p];
    }
    flops = static_cast<std::uint64_t>(sp.nnz());
  }
  detail::apply_flop_counter().fetch_add(flops, std::memory_order_relaxed);
  return out;
}

// Dense Gaussian projection with entries N(0, 1/m).
class GaussianTransform {
 public:
  GaussianTransform(Index target_rows, Index source_dim, std::uint64_t seed)
      : target_rows_(target_rows), source_dim_(source_dim), seed_(seed),
        entries_(target_rows, source_dim) {
    if (target_rows < 1 || source_dim < 0) throw DimensionError("GaussianTransform: invalid shape");
    Rng rng(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(target_rows));
    for (Index i = 0; i < target_rows; ++i)
      for (Index j = 0; j < source_dim; ++j) entries_(i, j) = scale * rng.normal();
  }

  Index target_rows() const noexcept { return target_rows_; }
  Index source_dim() const noexcept { return source_dim_; }
  const DenseMatrix& entries() const noexcept { return entries_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  Index target_rows_;
  Index source_dim_;
  std::uint64_t seed_;
  DenseMatrix entries_;
};

inline DenseMatrix apply_gaussian_left(const GaussianTransform& g, const Matrix& m) {
  if (g.source_dim() != m.rows())
    throw DimensionError("apply_gaussian_left: source dimension must equal row count");
  DenseMatrix out(g.target_rows(), m.cols());
  std::uint64_t flops = 0;
  if (const auto* d = m.as_dense()) {
    out.map().noalias() = g.entries().map() * d->map();
    flops = static_cast<std::uint64_t>(g.target_rows()) * static_cast<std::uint64_t>(d->rows()) *
            static_cast<std::uint64_t>(d->cols());
  } else {
    const SparseMatrix& sp = *m.as_sparse();
    for (Index i = 0; i < sp.rows(); ++i)
      for (Index p = sp.row_ptr()[i]; p < sp.row_ptr()[i + 1]; ++p) {
        const Index j = sp.col_idx()[p];
        const double v = sp.values()[p];
        for (Index r = 0; r < g.target_rows(); ++r) out(r, j) += g.entries()(r, i) * v;
      }
    flops = static_cast<std::uint64_t>(sp.nnz()) * static_cast<std::uint64_t>(g.target_rows());
  }
  detail::apply_flop_counter().fetch_add(flops, std::memory_order_relaxed);
  return out;
}

// CountSketch followed by a Gaussian projection of the sketched rows.
class CombinedTransform {
 public:
  CombinedTransform(Index target_rows, Index inner_rows, Index source_dim, std::uint64_t seed)
      : inner_(inner_rows, source_dim, derive_seed(seed, "combined-inner")),
        outer_(target_rows, inner_rows, derive_seed(seed, "combined-outer")) {}

  CombinedTransform(CountSketchTransform inner, GaussianTransform outer)
      : inner_(std::move(inner)), outer_(std::move(outer)) {
    if (inner_.target_rows() != outer_.source_dim())
      throw DimensionError("CombinedTransform: inner target must match outer source");
  }

  const CountSketchTransform& inner() const noexcept { return inner_; }
  const GaussianTransform& outer() const noexcept { return outer_; }

 private:
  CountSketchTransform inner_;
  GaussianTransform outer_;
};

inline DenseMatrix apply_combined_left(const CombinedTransform& t, const Matrix& m) {
  return apply_gaussian_left(t.outer(), apply_countsketch_left(t.inner(), m));
}

//
// Leverage scores and sampling
//

namespace detail {

// Row norms of an orthonormal column basis, via thin QR with column
// pivoting.
inline std::vector<double> basis_row_norms_dense(const DenseMatrix& m, Index& rank_out) {
  Eigen::MatrixXd work = m.map();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(work);
  qr.setThreshold(kDefaultRankTol);
  const Index r = std::max<Index>(qr.rank(), 1);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), r);
  rank_out = r;
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = q.row(i).squaredNorm();
  return out;
}

// Gram-matrix route for sparse operands: G = M^T M costs one pass over the
// nonzeros per row pair, and the basis row norms follow from the spectral
// factors of G. Keeps leverage computation proportional to nnz for the
// sparse families instead of densifying an m x w matrix.
inline std::vector<double> basis_row_norms_sparse(const SparseMatrix& m, Index& rank_out) {
  const Index w = m.cols();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(w, w);
  for (Index i = 0; i < m.rows(); ++i)
    for (Index p = m.row_ptr()[i]; p < m.row_ptr()[i + 1]; ++p)
      for (Index q = m.row_ptr()[i]; q < m.row_ptr()[i + 1]; ++q)
        gram(m.col_idx()[p], m.col_idx()[q]) += m.values()[p] * m.values()[q];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success)
    throw FactorizationError("leverage_scores: eigendecomposition failed", m.rows(), m.cols());
  const Eigen::VectorXd& ev = eig.eigenvalues();  // ascending
  const double cut = 1e-13 * std::max(ev(w - 1), 0.0);
  Index r = 0;
  for (Index j = 0; j < w; ++j)
    if (ev(j) > cut && ev(j) > 0.0) ++r;
  r = std::max<Index>(r, 1);
  // Basis = M * V_r * diag(1/sqrt(eigenvalue)); only its row norms are kept.
  Eigen::MatrixXd vr = eig.eigenvectors().rightCols(r);
  for (Index j = 0; j < r; ++j) vr.col(j) /= std::sqrt(ev(w - r + j));
  rank_out = r;
  std::vector<double> out(static_cast<std::size_t>(m.rows()), 0.0);
  Eigen::RowVectorXd basis_row(r);
  for (Index i = 0; i < m.rows(); ++i) {
    basis_row.setZero();
    for (Index p = m.row_ptr()[i]; p < m.row_ptr()[i + 1]; ++p)
      basis_row.noalias() += m.values()[p] * vr.row(m.col_idx()[p]);
    out[static_cast<std::size_t>(i)] = basis_row.squaredNorm();
  }
  return out;
}

}  // namespace detail

// p_i = ||e_i^T U||^2 / rank for an orthonormal basis U of the column span.
// The scores sum to one.
inline std::vector<double> leverage_scores(const Matrix& m) {
  if (frobenius_norm(m) == 0.0) throw DegenerateInputError("leverage_scores: zero matrix");
  Index rank = 0;
  std::vector<double> norms = m.is_sparse()
                                  ? detail::basis_row_norms_sparse(*m.as_sparse(), rank)
                                  : detail::basis_row_norms_dense(*m.as_dense(), rank);
  double total = 0.0;
  for (double& v : norms) {
    v = std::max(v, 0.0);
    total += v;
  }
  for (double& v : norms) v /= total;  // total = rank up to roundoff
  return norms;
}

// Row sampling-and-rescaling operator: s indices drawn i.i.d. with
// replacement from a distribution q with q_i >= beta * p_i, each sampled row
// rescaled by 1/sqrt(q_i * s) so that E[R^T R] = I.
class LeverageSampler {
 public:
  LeverageSampler(Index source_dim, Index sample_count, std::vector<double> probabilities,
                  double beta, std::uint64_t seed)
      : source_dim_(source_dim),
        sample_count_(sample_count),
        probabilities_(std::move(probabilities)),
        beta_(beta),
        seed_(seed) {
    if (sample_count < 1) throw DimensionError("LeverageSampler: sample_count must be >= 1");
    if (probabilities_.size() != static_cast<std::size_t>(source_dim))
      throw DimensionError("LeverageSampler: distribution length mismatch");
    std::vector<double> cumulative(probabilities_.size());
    std::partial_sum(probabilities_.begin(), probabilities_.end(), cumulative.begin());
    const double total = cumulative.back();
    Rng rng(seed);
    sampled_indices_.reserve(static_cast<std::size_t>(sample_count));
    rescale_weights_.reserve(static_cast<std::size_t>(sample_count));
    for (Index t = 0; t < sample_count; ++t) {
      const double u = rng.uniform() * total;
      const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      Index idx = static_cast<Index>(std::distance(cumulative.begin(), it));
      if (idx >= source_dim) idx = source_dim - 1;
      while (probabilities_[static_cast<std::size_t>(idx)] == 0.0 && idx > 0) --idx;
      sampled_indices_.push_back(idx);
      rescale_weights_.push_back(
          1.0 / std::sqrt(probabilities_[static_cast<std::size_t>(idx)] *
                          static_cast<double>(sample_count)));
    }
  }

  Index source_dim() const noexcept { return source_dim_; }
  Index sample_count() const noexcept { return sample_count_; }
  std::span<const Index> sampled_indices() const noexcept { return sampled_indices_; }
  std::span<const double> rescale_weights() const noexcept { return rescale_weights_; }
  std::span<const double> probabilities() const noexcept { return probabilities_; }
  double beta() const noexcept { return beta_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  Index source_dim_;
  Index sample_count_;
  std::vector<Index> sampled_indices_;
  std::vector<double> probabilities_;
  std::vector<double> rescale_weights_;
  double beta_;
  std::uint64_t seed_;
};

// q blends the leverage distribution with a uniform distribution over its
// support: q_i = beta * p_i + (1-beta) / |support|. Zero-leverage rows keep
// q_i = 0 and are never drawn.
inline LeverageSampler build_row_sampler(const Matrix& m, Index s, double beta,
                                         std::uint64_t seed) {
  if (s < 1) throw DimensionError("build_row_sampler: sample count must be >= 1");
  if (beta <= 0.0 || beta > 1.0)
    throw DegenerateInputError("build_row_sampler: beta must lie in (0, 1]");
  std::vector<double> q = leverage_scores(m);
  if (beta < 1.0) {
    Index support = 0;
    for (double v : q)
      if (v > 0.0) ++support;
    const double uniform = (1.0 - beta) / static_cast<double>(support);
    for (double& v : q)
      if (v > 0.0) v = beta * v + uniform;
  }
  return LeverageSampler(m.rows(), s, std::move(q), beta, seed);
}

// Diagonal sampling-and-rescaling operator: row i is kept independently
// with probability pi_i = min(1, target * q_i) and rescaled by 1/sqrt(pi_i),
// so E[R^T R] = I and the expected number of kept rows is at most `target`.
// Rows whose q saturates (target * q_i >= 1) are kept deterministically,
// which is what keeps small important row sets fully covered.
class InclusionSampler {
 public:
  InclusionSampler(Index source_dim, std::vector<Index> rows, std::vector<double> weights,
                   std::uint64_t seed)
      : source_dim_(source_dim), rows_(std::move(rows)), weights_(std::move(weights)),
        seed_(seed) {
    if (rows_.size() != weights_.size())
      throw DimensionError("InclusionSampler: row/weight length mismatch");
  }

  Index source_dim() const noexcept { return source_dim_; }
  Index sample_count() const noexcept { return static_cast<Index>(rows_.size()); }
  std::span<const Index> rows() const noexcept { return rows_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  Index source_dim_;
  std::vector<Index> rows_;
  std::vector<double> weights_;
  std::uint64_t seed_;
};

inline InclusionSampler inclusion_sampler_from_distribution(std::vector<double> q, Index target,
                                                            std::uint64_t seed) {
  if (target < 1) throw DimensionError("inclusion sampler: target must be >= 1");
  Rng rng(seed);
  std::vector<Index> rows;
  std::vector<double> weights;
  Index best = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] > q[static_cast<std::size_t>(best)]) best = static_cast<Index>(i);
    const double keep = std::min(1.0, static_cast<double>(target) * q[i]);
    if (keep <= 0.0) {
      rng.uniform();  // keep the stream aligned across targets
      continue;
    }
    if (rng.uniform() < keep) {
      rows.push_back(static_cast<Index>(i));
      weights.push_back(1.0 / std::sqrt(keep));
    }
  }
  if (rows.empty()) {
    rows.push_back(best);
    weights.push_back(1.0);
  }
  return InclusionSampler(static_cast<Index>(q.size()), std::move(rows), std::move(weights), seed);
}

inline InclusionSampler build_inclusion_sampler(const Matrix& m, Index target,
                                                std::uint64_t seed) {
  return inclusion_sampler_from_distribution(leverage_scores(m), target, seed);
}

inline DenseMatrix apply_inclusion_left(const InclusionSampler& r, const Matrix& m) {
  if (r.source_dim() != m.rows())
    throw DimensionError("apply_inclusion_left: source dimension must equal row count");
  DenseMatrix out(r.sample_count(), m.cols());
  std::uint64_t flops = 0;
  for (Index t = 0; t < r.sample_count(); ++t) {
    const Index i = r.rows()[static_cast<std::size_t>(t)];
    const double w = r.weights()[static_cast<std::size_t>(t)];
    auto dst = out.row(t);
    if (const auto* d = m.as_dense()) {
      const auto src = d->row(i);
      for (Index j = 0; j < m.cols(); ++j) dst[j] = w * src[j];
      flops += static_cast<std::uint64_t>(m.cols());
    } else {
      const SparseMatrix& sp = *m.as_sparse();
      for (Index p = sp.row_ptr()[i]; p < sp.row_ptr()[i + 1]; ++p)
        dst[sp.col_idx()[p]] = w * sp.values()[p];
      flops += static_cast<std::uint64_t>(sp.row_ptr()[i + 1] - sp.row_ptr()[i]);
    }
  }
  detail::apply_flop_counter().fetch_add(flops, std::memory_order_relaxed);
  return out;
}

inline DenseMatrix apply_inclusion_cols(const Matrix& m, const InclusionSampler& r) {
  if (r.source_dim() != m.cols())
    throw DimensionError("apply_inclusion_cols: source dimension must equal column count");
  DenseMatrix out(m.rows(), r.sample_count());
  std::uint64_t flops = 0;
  if (const auto* d = m.as_dense()) {
    for (Index i = 0; i < d->rows(); ++i) {
      auto dst = out.row(i);
      const auto src = d->row(i);
      for (Index t = 0; t < r.sample_count(); ++t)
        dst[t] = r.weights()[static_cast<std::size_t>(t)] *
                 src[r.rows()[static_cast<std::size_t>(t)]];
    }
    flops = static_cast<std::uint64_t>(d->rows()) * static_cast<std::uint64_t>(r.sample_count());
  } else {
    const SparseMatrix& sp = *m.as_sparse();
    std::vector<Index> slot(static_cast<std::size_t>(sp.cols()), -1);
    for (Index t = 0; t < r.sample_count(); ++t)
      slot[static_cast<std::size_t>(r.rows()[static_cast<std::size_t>(t)])] = t;
    for (Index i = 0; i < sp.rows(); ++i)
      for (Index p = sp.row_ptr()[i]; p < sp.row_ptr()[i + 1]; ++p) {
        const Index t = slot[static_cast<std::size_t>(sp.col_idx()[p])];
        if (t >= 0) {
          out(i, t) = r.weights()[static_cast<std::size_t>(t)] * sp.values()[p];
          ++flops;
        }
      }
  }
  detail::apply_flop_counter().fetch_add(flops, std::memory_order_relaxed);
  return out;
}

inline DenseMatrix apply_sampler_left(const LeverageSampler& r, const Matrix& m) {
  if (r.source_dim() != m.rows())
    throw DimensionError("apply_sampler_left: source dimension must equal row count");
  DenseMatrix out(r.sample_count(), m.cols());
  std::uint64_t flops = 0;
  for (Index t = 0; t < r.sample_count(); ++t) {
    const Index i = r.sampled_indices()[static_cast<std::size_t>(t)];
    const double w = r.rescale_weights()[static_cast<std::size_t>(t)];
    auto dst = out.row(t);
    if (const auto* d = m.as_dense()) {
      const auto src = d->row(i);
      for (Index j = 0; j < m.cols(); ++j) dst[j] = w * src[j];
      flops += static_cast<std::uint64_t>(m.cols());
    } else {
      const SparseMatrix& sp = *m.as_sparse();
      for (Index p = sp.row_ptr()[i]; p < sp.row_ptr()[i + 1]; ++p)
        dst[sp.col_idx()[p]] = w * sp.values()[p];
      flops += static_cast<std::uint64_t>(sp.row_ptr()[i + 1] - sp.row_ptr()[i]);
    }
  }
  detail::apply_flop_counter().fetch_add(flops, std::memory_order_relaxed);
  return out;
}

// M * R^T for a sampler built over the columns of M (i.e. over the rows of
// M^T): gathers and rescales the sampled columns.
inline DenseMatrix apply_sampler_cols(const Matrix& m, const LeverageSampler& r) {
  if (r.source_dim() != m.cols())
    throw DimensionError("apply_sampler_cols: source dimension must equal column count");
  DenseMatrix out(m.rows(), r.sample_count());
  std::uint64_t flops = 0;
  if (const auto* d = m.as_dense()) {
    for (Index i = 0; i < d->rows(); ++i) {
      auto dst = out.row(i);
      const auto src = d->row(i);
      for (Index t = 0; t < r.sample_count(); ++t)
        dst[t] = r.rescale_weights()[static_cast<std::size_t>(t)] *
                 src[r.sampled_indices()[static_cast<std::size_t>(t)]];
    }
    flops = static_cast<std::uint64_t>(d->rows()) * static_cast<std::uint64_t>(r.sample_count());
  } else {
    const SparseMatrix& sp = *m.as_sparse();
    std::vector<std::vector<Index>> slots(static_cast<std::size_t>(sp.cols()));
    for (Index t = 0; t < r.sample_count(); ++t)
      slots[static_cast<std::size_t>(r.sampled_indices()[static_cast<std::size_t>(t)])]
          .push_back(t);
    for (Index i = 0; i < sp.rows(); ++i)
      for (Index p = sp.row_ptr()[i]; p < sp.row_ptr()[i + 1]; ++p) {
        for (Index t : slots[static_cast<std::size_t>(sp.col_idx()[p])]) {
          out(i, t) = r.rescale_weights()[static_cast<std::size_t>(t)] * sp.values()[p];
          ++flops;
        }
      }
  }
  detail::apply_flop_counter().fetch_add(flops, std::memory_order_relaxed);
  return out;
}

}  // namespace fasttls
