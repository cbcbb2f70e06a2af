#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <vector>

#include "fasttls/matrix.hpp"

namespace fasttls {

// Relative cutoff under which a singular value is treated as zero.
inline constexpr double kDefaultRankTol = 1e-10;

// Thin SVD factors: M = U * diag(singular_values) * V^T with orthonormal
// columns in U and V and a nonincreasing spectrum.
struct SvdFactors {
  DenseMatrix u;
  std::vector<double> singular_values;
  DenseMatrix v;

  Index rank(double rank_tol = kDefaultRankTol) const {
    if (singular_values.empty()) return 0;
    const double cut = rank_tol * singular_values.front();
    Index r = 0;
    for (double s : singular_values)
      if (s > cut && s > 0.0) ++r;
    return r;
  }
};

namespace detail {

inline SvdFactors svd_impl(const DenseMatrix& m, unsigned options) {
  Eigen::MatrixXd work = m.map();
  Eigen::BDCSVD<Eigen::MatrixXd> dec(work, options);
  if (dec.info() != Eigen::Success)
    throw FactorizationError("svd: decomposition did not converge", m.rows(), m.cols());
  SvdFactors out;
  out.u = DenseMatrix::from_eigen(dec.matrixU());
  out.v = DenseMatrix::from_eigen(dec.matrixV());
  const auto& sv = dec.singularValues();
  out.singular_values.assign(sv.data(), sv.data() + sv.size());
  return out;
}

}  // namespace detail

// Sparse operands are densified here: every factorization in the pipeline
// acts on a matrix with at least one small dimension, so the sparsity payoff
// lives in sketch application, not in the SVD.
inline SvdFactors svd(const Matrix& m) {
  return detail::svd_impl(m.to_dense(), Eigen::ComputeThinU | Eigen::ComputeThinV);
}

// Thin U, square V; used where the trailing right singular vectors matter.
inline SvdFactors svd_full_v(const Matrix& m) {
  return detail::svd_impl(m.to_dense(), Eigen::ComputeThinU | Eigen::ComputeFullV);
}

inline DenseMatrix pseudoinverse(const Matrix& m, double rank_tol = kDefaultRankTol) {
  if (rank_tol <= 0.0) throw DegenerateInputError("pseudoinverse: rank_tol must be positive");
  const SvdFactors f = svd(m);
  const Index r = f.rank(rank_tol);
  DenseMatrix out(m.cols(), m.rows());
  if (r == 0) return out;
  // V_r * diag(1/sigma) * U_r^T
  Eigen::MatrixXd vr = f.v.map().leftCols(r);
  for (Index j = 0; j < r; ++j) vr.col(j) /= f.singular_values[static_cast<std::size_t>(j)];
  out.map().noalias() = vr * f.u.map().leftCols(r).transpose();
  return out;
}

inline DenseMatrix best_rank_k(const Matrix& m, Index k) {
  if (k < 0) throw DimensionError("best_rank_k: negative rank");
  const SvdFactors f = svd(m);
  const Index kk = std::min<Index>(k, static_cast<Index>(f.singular_values.size()));
  DenseMatrix out(m.rows(), m.cols());
  if (kk == 0) return out;
  Eigen::MatrixXd uk = f.u.map().leftCols(kk);
  for (Index j = 0; j < kk; ++j) uk.col(j) *= f.singular_values[static_cast<std::size_t>(j)];
  out.map().noalias() = uk * f.v.map().leftCols(kk).transpose();
  return out;
}

inline double frobenius_distance(const SvdFactors& f, const Matrix& m) {
  DenseMatrix rebuilt(m.rows(), m.cols());
  Eigen::MatrixXd us = f.u.map();
  for (Index j = 0; j < us.cols(); ++j) us.col(j) *= f.singular_values[static_cast<std::size_t>(j)];
  rebuilt.map().noalias() = us * f.v.map().transpose();
  return frobenius_distance(Matrix(rebuilt), m);
}

// Rank-limited product left * mid * right, kept in factored form so the full
// height is only ever touched block-wise.
struct FactoredLowRank {
  Matrix left;       // m x p (may be sparse)
  DenseMatrix mid;   // p x q
  DenseMatrix right; // q x w
};

}  // namespace fasttls
