#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "fasttls/decomp.hpp"
#include "fasttls/matrix.hpp"

namespace fasttls {

// Relative residual under which a column counts as dependent during repair.
inline constexpr double kRepairTol = 1e-8;

// Relative gap under which neighboring singular values count as tied, and
// under which a square block counts as singular.
inline constexpr double kSingularTol = 1e-10;

struct LsSolution {
  DenseMatrix x;
  double cost = 0.0;  // squared residual
};

// Minimum-norm least squares: X = A^+ B, cost = ||AX - B||_F^2.
inline LsSolution ls_solve(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("ls_solve: row counts differ");
  LsSolution out;
  Eigen::MatrixXd ad = a.to_dense().map();
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(ad);
  out.x = DenseMatrix(a.cols(), b.cols());
  out.x.map() = cod.solve(Eigen::MatrixXd(b.to_dense().map()));
  const double r = frobenius_distance(Matrix(multiply(a, out.x)), b);
  out.cost = r * r;
  return out;
}

namespace detail {

struct RepairOutcome {
  std::vector<std::optional<Index>> pi;  // repaired column -> donor column of b
  Index rank = 0;
  Index repaired = 0;
};

// Walks the columns of `a` left to right, keeping an orthonormal basis of
// the span so far. A column whose residual against the basis is below
// kRepairTol (relative) is dependent; the lowest-indexed unused column of
// `b` that is independent of the basis is added to it, scaled by delta_col.
// Each donor column is used at most once.
inline RepairOutcome repair_dependent_columns(DenseMatrix& a, const DenseMatrix& b,
                                              double delta_col) {
  const Index rows = a.rows();
  const Index n = a.cols();
  const Index d = b.cols();
  const Index max_rank = std::min(rows, n);

  Eigen::MatrixXd basis(rows, max_rank);
  Index basis_size = 0;
  auto orthogonal_residual = [&](Eigen::VectorXd v) {
    for (int pass = 0; pass < 2 && basis_size > 0; ++pass)
      v -= basis.leftCols(basis_size) * (basis.leftCols(basis_size).transpose() * v);
    return v;
  };
  auto try_extend_basis = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd r = orthogonal_residual(v);
    const double rn = r.norm();
    if (rn > kRepairTol * v.norm() && rn > 0.0 && basis_size < max_rank) {
      basis.col(basis_size++) = r / rn;
      return true;
    }
    return false;
  };

  RepairOutcome out;
  out.pi.assign(static_cast<std::size_t>(n), std::nullopt);
  std::vector<bool> used(static_cast<std::size_t>(d), false);
  auto am = a.map();
  const auto bm = b.map();

  for (Index i = 0; i < n; ++i) {
    if (try_extend_basis(am.col(i))) continue;
    for (Index j = 0; j < d; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      Eigen::VectorXd donor = bm.col(j);
      Eigen::VectorXd donor_res = orthogonal_residual(donor);
      if (donor_res.norm() > kRepairTol * donor.norm() && donor_res.norm() > 0.0) {
        am.col(i) += delta_col * donor;
        used[static_cast<std::size_t>(j)] = true;
        out.pi[static_cast<std::size_t>(i)] = j;
        ++out.repaired;
        try_extend_basis(am.col(i));
        break;
      }
    }
  }
  out.rank = basis_size;
  return out;
}

inline bool block_nonsingular(const Eigen::MatrixXd& block) {
  Eigen::JacobiSVD<Eigen::MatrixXd> dec(block);
  const double smax = dec.singularValues()(0);
  if (smax == 0.0) return false;
  const double smin = dec.singularValues()(dec.singularValues().size() - 1);
  return smin >= kSingularTol * smax;
}

}  // namespace detail

enum class TlsCase { unique, non_unique, no_solution };

// Output of the closed-form solver. `cost` is the squared distance from C to
// its best rank-n approximation. `x` is the exact solution when one exists;
// in the no-solution case `repaired_x` holds the result of perturbing the
// rank-n minimizer until the implied linear system becomes solvable.
struct TlsSolution {
  std::optional<DenseMatrix> x;
  std::optional<DenseMatrix> repaired_x;
  FactoredLowRank c_hat;
  double cost = 0.0;
  TlsCase case_tag = TlsCase::unique;

  const DenseMatrix& any_x() const {
    if (x) return *x;
    if (repaired_x) return *repaired_x;
    throw CorruptedStateError("TlsSolution: no solution stored");
  }
};

// Squared optimal cost, without solving for X: the squared tail of the
// spectrum of C = [A, B] past index n.
inline double tls_cost(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("tls_cost: row counts differ");
  Eigen::MatrixXd c = hconcat(a, b).to_dense().map();
  Eigen::BDCSVD<Eigen::MatrixXd> dec(c);
  if (dec.info() != Eigen::Success)
    throw FactorizationError("tls_cost: svd failed", c.rows(), c.cols());
  const Index n = a.cols();
  double total = 0.0;
  for (Index i = n; i < dec.singularValues().size(); ++i)
    total += dec.singularValues()(i) * dec.singularValues()(i);
  return total;
}

inline TlsSolution tls_solve(const Matrix& a, const Matrix& b, double perturb_delta = 1e-9) {
  const Index m = a.rows();
  const Index n = a.cols();
  const Index d = b.cols();
  if (n == 0 || d == 0) throw DegenerateInputError("tls_solve: empty system");
  if (b.rows() != m) throw DimensionError("tls_solve: row counts differ");
  if (perturb_delta <= 0.0) throw DegenerateInputError("tls_solve: perturb_delta must be > 0");

  const Matrix c = hconcat(a, b);
  const SvdFactors f = svd_full_v(c);
  const Index nsv = static_cast<Index>(f.singular_values.size());
  auto sigma = [&](Index i) {
    return i < nsv ? f.singular_values[static_cast<std::size_t>(i)] : 0.0;
  };

  TlsSolution out;
  for (Index i = n; i < nsv; ++i) out.cost += sigma(i) * sigma(i);

  const Index kk = std::min(n, nsv);
  {
    DenseMatrix mid(kk, kk);
    for (Index i = 0; i < kk; ++i) mid(i, i) = sigma(i);
    DenseMatrix left(m, kk);
    left.map() = f.u.map().leftCols(kk);
    DenseMatrix right(kk, n + d);
    right.map() = f.v.map().leftCols(kk).transpose();
    out.c_hat = FactoredLowRank{Matrix(std::move(left)), std::move(mid), std::move(right)};
  }

  const auto vm = f.v.map();
  const double sigma_max = sigma(0);

  // p = number of leading singular values clearly above sigma_{n+1}; p = n
  // means the gap at n is clean and the classical unique-solution test
  // applies, otherwise the tied tail is handled as one group.
  const double tie_cut = sigma(n) + kSingularTol * sigma_max;
  Index p = 0;
  for (Index i = 0; i < n; ++i)
    if (sigma(i) > tie_cut) ++p;

  if (p == n) {
    Eigen::MatrixXd v22 = vm.block(n, n, d, d);
    if (detail::block_nonsingular(v22)) {
      out.case_tag = TlsCase::unique;
      Eigen::MatrixXd v12 = vm.block(0, n, n, d);
      DenseMatrix x(n, d);
      x.map() = -(v22.transpose().partialPivLu().solve(v12.transpose())).transpose();
      out.x = std::move(x);
      return out;
    }
  } else {
    // Tied tail: the minimizer is not unique. Pick, among the right singular
    // directions of the tied group, the combination whose trailing d-by-d
    // block is triangularized by an orthogonal rotation; this yields the
    // minimum-norm X when the block is nonsingular.
    const Index q = n - p + d;
    Eigen::MatrixXd v2 = vm.rightCols(q);
    Eigen::MatrixXd v2_low = v2.bottomRows(d);
    if (detail::block_nonsingular(v2_low)) {
      out.case_tag = TlsCase::non_unique;
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(v2_low.transpose());
      Eigen::MatrixXd qfull = qr.householderQ() * Eigen::MatrixXd::Identity(q, d);
      Eigen::MatrixXd w = v2 * qfull;  // (n+d) x d, lower block triangular
      Eigen::MatrixXd w_low = w.bottomRows(d);
      DenseMatrix x(n, d);
      x.map() = -(w_low.transpose().partialPivLu().solve(w.topRows(n).transpose())).transpose();
      out.x = std::move(x);
      return out;
    }
  }

  // No exact solution: perturb dependent columns of the rank-n minimizer by
  // tiny multiples of unspanned response columns until the system solves.
  out.case_tag = TlsCase::no_solution;
  DenseMatrix scaled_u(m, kk);
  scaled_u.map() = f.u.map().leftCols(kk);
  for (Index j = 0; j < kk; ++j) scaled_u.map().col(j) *= sigma(j);
  DenseMatrix hat_a(m, n);
  hat_a.map().noalias() = scaled_u.map() * vm.topLeftCorner(n + d, kk).topRows(n).transpose();
  DenseMatrix hat_b(m, d);
  hat_b.map().noalias() = scaled_u.map() * vm.topLeftCorner(n + d, kk).bottomRows(d).transpose();

  double max_bcol = 0.0;
  for (Index j = 0; j < d; ++j) max_bcol = std::max(max_bcol, column_norm(hat_b, j));
  const double delta_col =
      perturb_delta / (std::sqrt(static_cast<double>(n)) * (1.0 + max_bcol));
  detail::repair_dependent_columns(hat_a, hat_b, delta_col);
  out.repaired_x = ls_solve(Matrix(hat_a), Matrix(hat_b)).x;
  return out;
}

}  // namespace fasttls
