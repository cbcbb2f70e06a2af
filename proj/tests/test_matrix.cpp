#include <catch2/catch_amalgamated.hpp>

#include "fasttls/decomp.hpp"
#include "fasttls/matrix.hpp"
#include "test_support.hpp"

using namespace fasttls;
using testsup::diag;
using testsup::random_dense;
using testsup::random_sparse;

namespace {

// independent oracle: elementwise double loop
double naive_frobenius_distance(const DenseMatrix& a, const DenseMatrix& b) {
  double total = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) total += (a(i, j) - b(i, j)) * (a(i, j) - b(i, j));
  return std::sqrt(total);
}

double reconstruction_residual(const SvdFactors& f, const Matrix& m) {
  return frobenius_distance(f, m);
}

}  // namespace

TEST_CASE("dense matrix construction and invariants") {
  DenseMatrix m(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m(1, 2) == 6.0);
  CHECK(m.nnz() == 6);

  CHECK_THROWS_AS(DenseMatrix(2, 2, {1, 2, 3}), DimensionError);
  CHECK_THROWS_AS(DenseMatrix(1, 2, {1.0, std::nan("")}), DegenerateInputError);
  CHECK_THROWS_AS(DenseMatrix(1, 1, {INFINITY}), DegenerateInputError);
}

TEST_CASE("sparse matrix invariants") {
  // 2x3 with entries (0,1)=2, (1,0)=1, (1,2)=5
  SparseMatrix s(2, 3, {0, 1, 3}, {1, 0, 2}, {2.0, 1.0, 5.0});
  CHECK(s.nnz() == 3);
  CHECK(s.to_dense()(0, 1) == 2.0);
  CHECK(s.to_dense()(1, 2) == 5.0);

  // row pointer not nondecreasing
  CHECK_THROWS_AS(SparseMatrix(2, 3, {0, 2, 1}, {0, 1, 2}, {1, 1, 1}), DimensionError);
  // column indices must strictly increase within a row
  CHECK_THROWS_AS(SparseMatrix(1, 3, {0, 2}, {1, 1}, {1, 1}), DimensionError);
  // column index out of range
  CHECK_THROWS_AS(SparseMatrix(1, 2, {0, 1}, {5}, {1}), DimensionError);
  // nnz must equal final row pointer
  CHECK_THROWS_AS(SparseMatrix(1, 2, {0, 2}, {0}, {1}), DimensionError);

  auto t = SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {0, 0, 2.0}, {1, 1, 4.0}});
  CHECK(t.to_dense()(0, 0) == 3.0);  // duplicates summed
}

TEST_CASE("svd examples") {
  SECTION("diagonal matrix") {
    const SvdFactors f = svd(Matrix(diag({3, 1, 1})));
    REQUIRE(f.singular_values.size() == 3);
    CHECK(f.singular_values[0] == Catch::Approx(3.0));
    CHECK(f.singular_values[1] == Catch::Approx(1.0));
    CHECK(f.singular_values[2] == Catch::Approx(1.0));
  }
  SECTION("zero matrix") {
    const SvdFactors f = svd(Matrix(DenseMatrix(2, 2)));
    CHECK(f.singular_values[0] == 0.0);
    CHECK(f.singular_values[1] == 0.0);
    // factors stay orthonormal
    Eigen::MatrixXd utu = f.u.map().transpose() * f.u.map();
    CHECK((utu - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-10);
  }
  SECTION("random 5x3 reconstruction") {
    const DenseMatrix m = random_dense(5, 3, 101);
    const SvdFactors f = svd(Matrix(m));
    CHECK(reconstruction_residual(f, Matrix(m)) <= 1e-8 * frobenius_norm(Matrix(m)));
    for (std::size_t i = 1; i < f.singular_values.size(); ++i)
      CHECK(f.singular_values[i] <= f.singular_values[i - 1]);
  }
}

TEST_CASE("svd round trip and orthonormality over assorted shapes") {
  const std::pair<Index, Index> shapes[] = {{1, 1}, {4, 4}, {7, 3}, {3, 7}, {20, 5}};
  std::uint64_t seed = 7;
  for (auto [r, c] : shapes) {
    const DenseMatrix m = random_dense(r, c, seed++);
    const SvdFactors f = svd(Matrix(m));
    CHECK(reconstruction_residual(f, Matrix(m)) <=
          1e-8 * std::max(1.0, frobenius_norm(Matrix(m))));
    Eigen::MatrixXd utu = f.u.map().transpose() * f.u.map();
    Eigen::MatrixXd vtv = f.v.map().transpose() * f.v.map();
    CHECK((utu - Eigen::MatrixXd::Identity(utu.rows(), utu.cols())).norm() < 1e-10);
    CHECK((vtv - Eigen::MatrixXd::Identity(vtv.rows(), vtv.cols())).norm() < 1e-10);
  }
}

TEST_CASE("pseudoinverse") {
  SECTION("identity") {
    const DenseMatrix p = pseudoinverse(Matrix(DenseMatrix::identity(3)), 1e-10);
    CHECK(naive_frobenius_distance(p, DenseMatrix::identity(3)) < 1e-12);
  }
  SECTION("diag(2,0) inverts only the nonzero value") {
    const DenseMatrix p = pseudoinverse(Matrix(diag({2, 0})), 1e-10);
    CHECK(p(0, 0) == Catch::Approx(0.5));
    CHECK(p(1, 1) == 0.0);
  }
  SECTION("full column rank tall matrix") {
    const DenseMatrix m = random_dense(4, 2, 55);
    const DenseMatrix p = pseudoinverse(Matrix(m), 1e-10);
    const DenseMatrix pm = multiply(p, m);
    CHECK(naive_frobenius_distance(pm, DenseMatrix::identity(2)) < 1e-8);
  }
  SECTION("Moore-Penrose identities") {
    const DenseMatrix m = random_dense(5, 3, 77);
    const DenseMatrix p = pseudoinverse(Matrix(m), 1e-10);
    const DenseMatrix mpm = multiply(multiply(m, p), m);
    const DenseMatrix pmp = multiply(multiply(p, m), p);
    CHECK(naive_frobenius_distance(mpm, m) < 1e-8 * frobenius_norm(Matrix(m)));
    CHECK(naive_frobenius_distance(pmp, p) < 1e-8 * frobenius_norm(Matrix(p)));
  }
  CHECK_THROWS_AS(pseudoinverse(Matrix(DenseMatrix::identity(2)), 0.0), DegenerateInputError);
}

TEST_CASE("best rank k") {
  SECTION("drops one unit direction of diag(1,1,3)") {
    const DenseMatrix r = best_rank_k(Matrix(diag({1, 1, 3})), 2);
    CHECK(frobenius_distance(Matrix(r), Matrix(diag({1, 1, 3}))) == Catch::Approx(1.0));
  }
  SECTION("k = rank reproduces the matrix") {
    const DenseMatrix m = random_dense(4, 3, 31);
    const DenseMatrix r = best_rank_k(Matrix(m), 3);
    CHECK(naive_frobenius_distance(r, m) < 1e-8 * frobenius_norm(Matrix(m)));
  }
  SECTION("tail-of-spectrum identity on a random 6x4") {
    const DenseMatrix m = random_dense(6, 4, 97);
    const SvdFactors f = svd(Matrix(m));
    const DenseMatrix r = best_rank_k(Matrix(m), 2);
    const double resid2 = std::pow(frobenius_distance(Matrix(m), Matrix(r)), 2);
    const double tail2 = f.singular_values[2] * f.singular_values[2] +
                         f.singular_values[3] * f.singular_values[3];
    CHECK(resid2 == Catch::Approx(tail2).margin(1e-8 * std::pow(frobenius_norm(Matrix(m)), 2)));
  }
  SECTION("k = 0 yields the zero matrix") {
    const DenseMatrix r = best_rank_k(Matrix(diag({1, 2})), 0);
    CHECK(frobenius_norm(Matrix(r)) == 0.0);
  }
}

TEST_CASE("frobenius distance") {
  const DenseMatrix a = random_dense(4, 5, 11);
  CHECK(frobenius_distance(Matrix(a), Matrix(a)) == 0.0);
  CHECK(frobenius_distance(Matrix(diag({1, 1, 3})), Matrix(diag({1, 1, 0}))) == Catch::Approx(3.0));

  const DenseMatrix b = random_dense(4, 5, 12);
  CHECK(frobenius_distance(Matrix(a), Matrix(b)) == Catch::Approx(naive_frobenius_distance(a, b)));
  CHECK(frobenius_distance(Matrix(a), Matrix(b)) ==
        Catch::Approx(frobenius_distance(Matrix(b), Matrix(a))));
  CHECK_THROWS_AS(frobenius_distance(Matrix(a), Matrix(DenseMatrix(3, 3))), DimensionError);
}

TEST_CASE("sparse and dense representations agree") {
  const SparseMatrix s = random_sparse(8, 5, 0.4, 1234);
  const DenseMatrix d = s.to_dense();

  CHECK(frobenius_norm(Matrix(s)) == Catch::Approx(frobenius_norm(Matrix(d))).epsilon(1e-12));

  const SvdFactors fs = svd(Matrix(s));
  const SvdFactors fd = svd(Matrix(d));
  for (std::size_t i = 0; i < fs.singular_values.size(); ++i)
    CHECK(fs.singular_values[i] == Catch::Approx(fd.singular_values[i]).margin(1e-12));

  CHECK(naive_frobenius_distance(best_rank_k(Matrix(s), 2), best_rank_k(Matrix(d), 2)) < 1e-12);
  CHECK(naive_frobenius_distance(pseudoinverse(Matrix(s)), pseudoinverse(Matrix(d))) < 1e-12);

  // mixed-representation distances agree with the dense path
  const SparseMatrix s2 = random_sparse(8, 5, 0.3, 99);
  const double dd = frobenius_distance(Matrix(d), Matrix(s2.to_dense()));
  CHECK(frobenius_distance(Matrix(s), Matrix(s2)) == Catch::Approx(dd).epsilon(1e-12));
  CHECK(frobenius_distance(Matrix(d), Matrix(s2)) == Catch::Approx(dd).epsilon(1e-12));
  CHECK(frobenius_distance(Matrix(s), Matrix(s2.to_dense())) == Catch::Approx(dd).epsilon(1e-12));
}

TEST_CASE("matrix helpers") {
  const DenseMatrix a = random_dense(3, 2, 5);
  const DenseMatrix b = random_dense(3, 4, 6);
  const Matrix joined = hconcat(Matrix(a), Matrix(b));
  CHECK(joined.cols() == 6);
  CHECK(joined.to_dense()(2, 5) == b(2, 3));

  const SparseMatrix sa = random_sparse(4, 3, 0.5, 21);
  const SparseMatrix sb = random_sparse(4, 2, 0.5, 22);
  const Matrix sj = hconcat(Matrix(sa), Matrix(sb));
  CHECK(sj.is_sparse());
  CHECK(naive_frobenius_distance(sj.to_dense(), hconcat(sa.to_dense(), sb.to_dense())) == 0.0);

  const DenseMatrix blk = row_block(sj, 1, 3);
  CHECK(blk.rows() == 2);
  CHECK(blk(0, 0) == sj.to_dense()(1, 0));

  const SparseMatrix sp = random_sparse(6, 4, 0.5, 33);
  const DenseMatrix rhs = random_dense(4, 3, 7);
  CHECK(naive_frobenius_distance(multiply(Matrix(sp), rhs), multiply(sp.to_dense(), rhs)) < 1e-14);
}
