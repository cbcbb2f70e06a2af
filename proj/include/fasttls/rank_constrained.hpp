#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "fasttls/decomp.hpp"
#include "fasttls/matrix.hpp"

namespace fasttls {

// min over rank-k Z of ||target - left * Z * right||_F. Objectives here and
// everywhere in this library are squared Frobenius norms.
struct RankConstrainedSolution {
  DenseMatrix z;
  double objective = 0.0;
};

// Closed form: Z = left^+ (P_left * target * P_right)_k right^+, where P_*
// are the orthogonal projectors onto the column span of `left` and the row
// span of `right`, and (.)_k is the best rank-k truncation.
inline RankConstrainedSolution rank_constrained_solve(const DenseMatrix& target,
                                                      const DenseMatrix& left,
                                                      const DenseMatrix& right, Index k) {
  if (target.rows() != left.rows() || target.cols() != right.cols())
    throw DimensionError("rank_constrained_solve: shapes are not conformal");
  if (k < 0) throw DimensionError("rank_constrained_solve: negative rank");

  const SvdFactors fl = svd(left);
  const SvdFactors fr = svd(right);
  const Index rl = fl.rank();
  const Index rr = fr.rank();
  RankConstrainedSolution out;
  out.z = DenseMatrix(left.cols(), right.rows());
  if (rl == 0 || rr == 0 || k == 0) {
    out.objective = std::pow(frobenius_norm(target), 2);
    return out;
  }

  // Projected core G = U_l^T * target * V_r, truncated to rank k. A rank
  // request beyond the attainable core rank is clamped.
  Eigen::MatrixXd ul = fl.u.map().leftCols(rl);
  Eigen::MatrixXd vr = fr.v.map().leftCols(rr);
  Eigen::MatrixXd core = ul.transpose() * target.map() * vr;
  const Index kk = std::min<Index>(k, std::min(rl, rr));
  Eigen::BDCSVD<Eigen::MatrixXd> cs(core, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (cs.info() != Eigen::Success)
    throw FactorizationError("rank_constrained_solve: core svd failed", core.rows(), core.cols());
  Eigen::MatrixXd core_k = cs.matrixU().leftCols(kk) *
                           cs.singularValues().head(kk).asDiagonal() *
                           cs.matrixV().leftCols(kk).transpose();

  // left^+ U_l = V_l Sigma_l^{-1}, and symmetrically on the right.
  Eigen::MatrixXd vl_scaled = fl.v.map().leftCols(rl);
  for (Index j = 0; j < rl; ++j) vl_scaled.col(j) /= fl.singular_values[static_cast<std::size_t>(j)];
  Eigen::MatrixXd ur_scaled = fr.u.map().leftCols(rr);
  for (Index j = 0; j < rr; ++j) ur_scaled.col(j) /= fr.singular_values[static_cast<std::size_t>(j)];
  out.z.map().noalias() = vl_scaled * core_k * ur_scaled.transpose();

  Eigen::MatrixXd residual = target.map() - left.map() * out.z.map() * right.map();
  out.objective = residual.squaredNorm();
  return out;
}

// min over Z_R (r x k), Z_S (k x s) of
//   ||C Z_R Z_S D - B||_F^2 + lambda ||C Z_R||_F^2 + lambda ||Z_S D||_F^2.
// Only the products C Z_R and Z_S D are determined; the small factors
// returned alongside are the minimum-norm preimages.
struct RegularizedPairSolution {
  DenseMatrix left_factor;   // C * Z_R, n1 x k
  DenseMatrix right_factor;  // Z_S * D, k x n2
  DenseMatrix z_r;           // r x k
  DenseMatrix z_s;           // k x s
  double objective = 0.0;
};

// Reduction: writing C Z_R = U_C P and Z_S D = Q V_D^T over orthonormal
// bases, the problem becomes min over rank-<=k M = P Q of
// ||M - U_C^T B V_D||_F^2 + 2 lambda ||M||_*, solved by soft-thresholding
// the top-k singular values of the projected core.
inline RegularizedPairSolution regularized_rank_solve(const DenseMatrix& col_factor,
                                                      const DenseMatrix& row_factor,
                                                      const DenseMatrix& target, Index k,
                                                      double lambda) {
  if (target.rows() != col_factor.rows() || target.cols() != row_factor.cols())
    throw DimensionError("regularized_rank_solve: shapes are not conformal");
  if (k < 0) throw DimensionError("regularized_rank_solve: negative rank");
  if (lambda < 0.0) throw DegenerateInputError("regularized_rank_solve: lambda must be >= 0");

  const Index n1 = target.rows();
  const Index n2 = target.cols();
  const Index r = col_factor.cols();
  const Index s = row_factor.rows();

  RegularizedPairSolution out;
  out.left_factor = DenseMatrix(n1, k);
  out.right_factor = DenseMatrix(k, n2);
  out.z_r = DenseMatrix(r, k);
  out.z_s = DenseMatrix(k, s);

  const SvdFactors fc = svd(col_factor);
  const SvdFactors fd = svd(row_factor);
  const Index rc = fc.rank();
  const Index rd = fd.rank();
  if (rc > 0 && rd > 0 && k > 0) {
    Eigen::MatrixXd uc = fc.u.map().leftCols(rc);
    Eigen::MatrixXd vd = fd.v.map().leftCols(rd);
    Eigen::MatrixXd core = uc.transpose() * target.map() * vd;
    Eigen::BDCSVD<Eigen::MatrixXd> cs(core, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (cs.info() != Eigen::Success)
      throw FactorizationError("regularized_rank_solve: core svd failed", core.rows(),
                               core.cols());
    const Index kk = std::min<Index>(k, cs.singularValues().size());
    for (Index j = 0; j < kk; ++j) {
      const double soft = cs.singularValues()(j) - lambda;
      if (soft <= 0.0) break;
      const double root = std::sqrt(soft);
      // Balanced split M = P Q distributes the shrunken singular value
      // evenly, which is what attains 2*lambda*||M||_* in the penalty.
      Eigen::VectorXd p_col = cs.matrixU().col(j) * root;
      Eigen::VectorXd q_row = cs.matrixV().col(j) * root;
      out.left_factor.map().col(j) = uc * p_col;
      out.right_factor.map().row(j) = (vd * q_row).transpose();
      Eigen::VectorXd zr_col = fc.v.map().leftCols(rc) *
                               (p_col.array() /
                                Eigen::Map<const Eigen::ArrayXd>(fc.singular_values.data(), rc))
                                   .matrix();
      Eigen::VectorXd zs_row = fd.u.map().leftCols(rd) *
                               (q_row.array() /
                                Eigen::Map<const Eigen::ArrayXd>(fd.singular_values.data(), rd))
                                   .matrix();
      out.z_r.map().col(j) = zr_col;
      out.z_s.map().row(j) = zs_row.transpose();
    }
  }

  Eigen::MatrixXd fit = out.left_factor.map() * out.right_factor.map() - target.map();
  out.objective = fit.squaredNorm() + lambda * out.left_factor.map().squaredNorm() +
                  lambda * out.right_factor.map().squaredNorm();
  return out;
}

// X = (A^T A + lambda I)^{-1} A^T B via the augmented system [A; sqrt(lambda) I].
// With lambda = 0 and a rank-deficient A this falls back to the minimum-norm
// least squares solution.
inline DenseMatrix ridge_solve(const Matrix& a, const DenseMatrix& b, double lambda) {
  if (a.rows() != b.rows()) throw DimensionError("ridge_solve: row counts differ");
  if (lambda < 0.0) throw DegenerateInputError("ridge_solve: lambda must be >= 0");
  const Index n = a.cols();
  DenseMatrix out(n, b.cols());
  if (lambda == 0.0) {
    Eigen::MatrixXd ad = a.to_dense().map();
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(ad);
    out.map() = cod.solve(Eigen::MatrixXd(b.map()));
    return out;
  }
  Eigen::MatrixXd aug(a.rows() + n, n);
  aug.topRows(a.rows()) = a.to_dense().map();
  aug.bottomRows(n) = std::sqrt(lambda) * Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(a.rows() + n, b.cols());
  rhs.topRows(a.rows()) = b.map();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(aug);
  out.map() = qr.solve(rhs);
  return out;
}

// sd_lambda(A) = sum_i 1 / (1 + lambda / sigma_i^2) over the positive
// spectrum; equals rank(A) at lambda = 0 and decreases in lambda.
inline double statistical_dimension(const Matrix& a, double lambda) {
  if (lambda < 0.0) throw DegenerateInputError("statistical_dimension: lambda must be >= 0");
  const SvdFactors f = svd(a);
  const Index r = f.rank();
  double total = 0.0;
  for (Index i = 0; i < r; ++i) {
    const double s2 = f.singular_values[static_cast<std::size_t>(i)] *
                      f.singular_values[static_cast<std::size_t>(i)];
    total += 1.0 / (1.0 + lambda / s2);
  }
  return total;
}

}  // namespace fasttls
