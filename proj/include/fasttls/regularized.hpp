#pragma once

#include <chrono>

#include "fasttls/fast_tls.hpp"

namespace fasttls {

// Configuration for the ridge-regularized pipeline. Sizes follow the same
// policy as FtlsConfig; s3 plays the role the split sketch s2 plays there.
struct RftlsConfig {
  double lambda = 1.0;
  double eps = 0.5;
  double delta = 1e-6;
  SizeMode mode = SizeMode::theory;
  double density = 0.3;
  double c1 = 4.0;  // s1 multiplier (row sketch)
  double c2 = 4.0;  // s2 multiplier (column sketch)
  double c3 = 4.0;  // s3 multiplier (split sketch)
  double c4 = 4.0;  // d1 multiplier (leverage sample)
  Index evaluate_block_rows = 1024;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(lambda > 0.0)) throw DegenerateInputError("RftlsConfig: lambda must be > 0");
    if (!(eps > 0.0 && eps < 1.0)) throw DegenerateInputError("RftlsConfig: eps must be in (0,1)");
    if (!(delta > 0.0)) throw DegenerateInputError("RftlsConfig: delta must be > 0");
    if (!(density > 0.0 && density <= 1.0))
      throw DegenerateInputError("RftlsConfig: density must be in (0,1]");
    if (c1 < 1.0 || c2 < 1.0 || c3 < 1.0 || c4 < 1.0)
      throw DegenerateInputError("RftlsConfig: size constants must be >= 1");
  }
};

struct RftlsSizes {
  Index s1 = 0;
  Index s2 = 0;
  Index s3 = 0;
  Index d1 = 0;
};

inline RftlsSizes resolve_rftls_sizes(const RftlsConfig& cfg, Index m, Index n, Index d) {
  RftlsSizes sz;
  if (cfg.mode == SizeMode::density) {
    const Index rows = std::max<Index>(1, static_cast<Index>(std::ceil(cfg.density * m)));
    sz.s1 = rows;
    sz.s3 = rows;
    // sampling stage keeps the statistical floor, as in the plain pipeline
    const Index d1_floor =
        static_cast<Index>(std::ceil(cfg.c4 * static_cast<double>(n + d) *
                                     std::log(static_cast<double>(n + d) + 2.0)));
    sz.d1 = std::min<Index>(m, std::max(rows, d1_floor));
    sz.s2 = std::max<Index>(
        1, std::min<Index>(n + d, static_cast<Index>(std::ceil(cfg.density * (n + d)))));
  } else {
    const double base = static_cast<double>(n) / cfg.eps;
    const double logged = base * std::log(base + 2.0);
    sz.s1 = std::min<Index>(m, static_cast<Index>(std::ceil(cfg.c1 * base)));
    sz.s2 = std::min<Index>(n + d, static_cast<Index>(std::ceil(cfg.c2 * base)));
    sz.s3 = std::min<Index>(m, static_cast<Index>(std::ceil(cfg.c3 * base)));
    sz.d1 = std::min<Index>(m, static_cast<Index>(std::ceil(cfg.c4 * logged)));
  }
  return sz;
}

struct RftlsResult {
  DenseMatrix x;
  DenseMatrix u_hat;  // m x n
  DenseMatrix v_hat;  // n x (n+d)
  FactoredLowRank factors;
  SplitResult split;
  double data_fit = 0.0;    // ||[A_hat, A_hat X] - C||_F^2
  double objective = 0.0;   // data_fit + lambda (||u_hat||^2 + ||v_hat||^2)
  RunDiagnostics diagnostics;
};

// Regularized pipeline: sketch rows (S1) and columns (S2) of C, sample d1
// rows of C S2^T by leverage, solve the small regularized pair problem for
// (Z2, Z1), then repair the s3-row sketch of C S2^T Z2 Z1 S1 C and read X
// off the small regression. The penalized factors are
// u_hat = C S2^T Z2 and v_hat = Z1 S1 C.
inline RftlsResult rftls_solve(const Matrix& a, const Matrix& b, const RftlsConfig& cfg) {
  cfg.validate();
  const Index m = a.rows();
  const Index n = a.cols();
  const Index d = b.cols();
  if (b.rows() != m) throw DimensionError("rftls_solve: row counts differ");
  if (n < 1 || d < 1) throw DimensionError("rftls_solve: empty system");
  if (m < n + 1) throw DimensionError("rftls_solve: system must be overconstrained (m >= n+1)");

  const auto t0 = std::chrono::steady_clock::now();
  const Matrix c = hconcat(a, b);
  const RftlsSizes sz = resolve_rftls_sizes(cfg, m, n, d);

  CountSketchTransform s1(sz.s1, m, derive_seed(cfg.seed, "s1"));
  const DenseMatrix s1c = apply_countsketch_left(s1, c);
  CountSketchTransform s2(sz.s2, n + d, derive_seed(cfg.seed, "s2"));
  const DenseMatrix cs2t = apply_countsketch_cols(c, s2);

  const InclusionSampler d1 =
      build_inclusion_sampler(Matrix(cs2t), sz.d1, derive_seed(cfg.seed, "d1"));
  const DenseMatrix d1cs2t = apply_inclusion_left(d1, Matrix(cs2t));
  const DenseMatrix d1c = apply_inclusion_left(d1, c);

  RegularizedPairSolution pair = regularized_rank_solve(d1cs2t, s1c, d1c, n, cfg.lambda);
  const DenseMatrix mid = multiply(pair.z_r, pair.z_s);  // s2 x s1

  const double perturb_delta = cfg.delta / (static_cast<double>(m) * static_cast<double>(n + d));
  SplitResult sp =
      split(Matrix(cs2t), mid, s1c, n, d, sz.s3, perturb_delta, derive_seed(cfg.seed, "split"));
  LsSolution small = ls_solve(Matrix(sp.proxy_a), Matrix(sp.proxy_b));
  detail::check_split_solvable(sp, small.x, n);

  RftlsResult out;
  out.x = std::move(small.x);
  out.u_hat = multiply(cs2t, pair.z_r);
  out.v_hat = multiply(pair.z_s, s1c);
  out.factors = FactoredLowRank{Matrix(cs2t), mid, s1c};
  out.split = std::move(sp);
  out.data_fit = evaluate(out.factors, out.x, out.split.pi, out.split.perturb_delta, c,
                          cfg.evaluate_block_rows);
  out.objective = out.data_fit +
                  cfg.lambda * (std::pow(frobenius_norm(Matrix(out.u_hat)), 2) +
                                std::pow(frobenius_norm(Matrix(out.v_hat)), 2));

  out.diagnostics.method = "RFTLS";
  out.diagnostics.mode = cfg.mode == SizeMode::density ? "density" : "theory";
  out.diagnostics.rho_or_eps = cfg.mode == SizeMode::density ? cfg.density : cfg.eps;
  out.diagnostics.seed = cfg.seed;
  out.diagnostics.cost = out.objective;
  out.diagnostics.sizes = SketchSizes{sz.s1, sz.s3, sz.s2, sz.d1, true};
  out.diagnostics.split_repairs = out.split.repaired;
  out.diagnostics.rank_deficit = n - out.split.rank;
  out.diagnostics.sketch_kinds = "countsketch/leverage";
  out.diagnostics.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace fasttls
