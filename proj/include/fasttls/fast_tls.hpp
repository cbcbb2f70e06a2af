#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "fasttls/rank_constrained.hpp"
#include "fasttls/sketch.hpp"
#include "fasttls/tls.hpp"

namespace fasttls {

enum class SizeMode { theory, density };
enum class SketchKind { countsketch, gaussian, leverage };

inline const char* to_string(SketchKind k) {
  switch (k) {
    case SketchKind::countsketch: return "countsketch";
    case SketchKind::gaussian: return "gaussian";
    case SketchKind::leverage: return "leverage";
  }
  return "?";
}

// Sketch-size policy. Theory mode scales every reduction with n/eps (the
// sampled dimensions carry an extra log factor); density mode ties every
// row count to a fraction rho of the instance height, and the column
// sample to the same fraction of the width.
struct FtlsConfig {
  double eps = 0.5;
  double delta = 1e-6;  // additive slack distributed to the repair step
  SizeMode mode = SizeMode::theory;
  double density = 0.3;  // rho, used in density mode
  double c1 = 4.0;       // s1 multiplier
  double c2 = 4.0;       // s2 multiplier
  double c3 = 4.0;       // d1 multiplier
  double c4 = 4.0;       // d2 multiplier
  double d_large_factor = 2.0;  // column sampling engages iff d > factor * s1
  SketchKind s1_kind = SketchKind::countsketch;
  SketchKind d2_kind = SketchKind::leverage;
  Index evaluate_block_rows = 1024;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(eps > 0.0 && eps < 1.0)) throw DegenerateInputError("FtlsConfig: eps must be in (0,1)");
    if (!(delta > 0.0)) throw DegenerateInputError("FtlsConfig: delta must be > 0");
    if (!(density > 0.0 && density <= 1.0))
      throw DegenerateInputError("FtlsConfig: density must be in (0,1]");
    if (c1 < 1.0 || c2 < 1.0 || c3 < 1.0 || c4 < 1.0)
      throw DegenerateInputError("FtlsConfig: size constants must be >= 1");
    if (evaluate_block_rows < 1)
      throw DegenerateInputError("FtlsConfig: evaluate_block_rows must be >= 1");
  }
};

struct SketchSizes {
  Index s1 = 0;
  Index s2 = 0;
  Index d1 = 0;
  Index d2 = 0;
  bool use_d1 = false;
};

inline SketchSizes resolve_sketch_sizes(const FtlsConfig& cfg, Index m, Index n, Index d) {
  SketchSizes sz;
  if (cfg.mode == SizeMode::density) {
    const Index rows = std::max<Index>(1, static_cast<Index>(std::ceil(cfg.density * m)));
    sz.s1 = rows;
    sz.s2 = rows;
    // The sampling stages are statistical fits, not data compression; their
    // budgets scale with rho but never drop below the width-times-log floor
    // the fit needs. On sparse families the sampler only ever keeps rows
    // with nonzero leverage, so a generous budget stays cheap.
    const Index d2_floor =
        static_cast<Index>(std::ceil(cfg.c4 * static_cast<double>(n + d) *
                                     std::log(static_cast<double>(n + d) + 2.0)));
    sz.d2 = std::min<Index>(m, std::max(rows, d2_floor));
    const Index d1_floor = static_cast<Index>(
        std::ceil(cfg.c3 * static_cast<double>(n) * std::log(static_cast<double>(n) + 2.0)));
    const Index d1_rho = static_cast<Index>(std::ceil(cfg.density * (n + d)));
    sz.d1 = std::max<Index>(1, std::min<Index>(n + d, std::max(d1_rho, d1_floor)));
  } else {
    const double base = static_cast<double>(n) / cfg.eps;
    const double logged = base * std::log(base + 2.0);
    sz.s1 = std::min<Index>(m, static_cast<Index>(std::ceil(cfg.c1 * base)));
    sz.s2 = std::min<Index>(m, static_cast<Index>(std::ceil(cfg.c2 * base)));
    sz.d1 = std::min<Index>(n + d, static_cast<Index>(std::ceil(cfg.c3 * logged)));
    sz.d2 = std::min<Index>(m, static_cast<Index>(std::ceil(cfg.c4 * logged)));
  }
  sz.use_d1 = d > static_cast<Index>(cfg.d_large_factor * static_cast<double>(sz.s1));
  return sz;
}

// Output of the rank-repair pass over the sketched system.
struct SplitResult {
  DenseMatrix a_bar;                     // s2 x n, sketched repaired system
  DenseMatrix b_bar;                     // s2 x d
  DenseMatrix proxy_a;                   // p x n factor-level repaired system
  DenseMatrix proxy_b;                   // p x d
  std::vector<std::optional<Index>> pi;  // repaired column -> donor column of b_bar
  double perturb_delta = 0.0;
  Index repaired = 0;
  Index rank = 0;  // numerical rank of the repaired leading block; n when the sketch held up
};

// Perturbs dependent columns of the approximation's leading block with
// unspanned response columns until the response block is covered, making the
// implied system exactly solvable, then sketches the repaired system down to
// s2 rows. Column dependences are decided on the small factor-level proxy
// W = mid * right, which shares them with the full-height product left * W
// whenever `left` has full column rank; this keeps every repair valid at
// full height no matter how the s2-row sketch lands.
inline SplitResult split(const Matrix& left, const DenseMatrix& mid, const DenseMatrix& right,
                         Index n, Index d, Index s2, double perturb_delta, std::uint64_t seed) {
  if (right.cols() != n + d) throw DimensionError("split: factor width must equal n + d");
  if (perturb_delta <= 0.0) throw DegenerateInputError("split: perturb_delta must be > 0");

  const DenseMatrix w = multiply(mid, right);
  SplitResult out;
  out.perturb_delta = perturb_delta;
  out.proxy_a = DenseMatrix(w.rows(), n);
  out.proxy_b = DenseMatrix(w.rows(), d);
  out.proxy_a.map() = w.map().leftCols(n);
  out.proxy_b.map() = w.map().rightCols(d);
  auto repair = detail::repair_dependent_columns(out.proxy_a, out.proxy_b, perturb_delta);
  out.pi = std::move(repair.pi);
  out.repaired = repair.repaired;
  out.rank = repair.rank;

  CountSketchTransform s2_transform(s2, left.rows(), seed);
  const DenseMatrix sketched_left = apply_countsketch_left(s2_transform, left);
  out.a_bar = multiply(sketched_left, out.proxy_a);
  out.b_bar = multiply(sketched_left, out.proxy_b);
  return out;
}

namespace detail {

// The repaired system must be solvable: residual relative to the problem
// data (not just b_bar, whose conditioning the tiny repair multiples can
// wreck) must vanish. Violations mean the sketched factors are corrupt
// beyond what repair can express.
inline void check_split_solvable(const SplitResult& sp, const DenseMatrix& x, Index n) {
  const double resid = frobenius_distance(Matrix(multiply(sp.a_bar, x)), Matrix(sp.b_bar));
  const double scale = frobenius_norm(Matrix(sp.b_bar)) +
                       frobenius_norm(Matrix(sp.a_bar)) * frobenius_norm(Matrix(x));
  if (resid > 1e-8 * scale)
    throw RankRepairError("split left the response block unspanned (rank " +
                          std::to_string(sp.rank) + " of " + std::to_string(n) +
                          ", relative residual " + std::to_string(resid / (scale + 1e-300)) + ")");
}

}  // namespace detail

// Exact objective ||[A_hat, A_hat X] - C||_F^2 computed from the factored
// approximation in row blocks, with the same column repairs the solve
// applied; peak extra memory is block_rows * (n + d).
inline double evaluate(const FactoredLowRank& f, const DenseMatrix& x,
                       const std::vector<std::optional<Index>>& pi, double perturb_delta,
                       const Matrix& c, Index block_rows = 1024) {
  const Index m = c.rows();
  const Index n = x.rows();
  const Index d = x.cols();
  if (c.cols() != n + d) throw DimensionError("evaluate: width mismatch");
  if (pi.size() != static_cast<std::size_t>(n))
    throw CorruptedStateError("evaluate: repair map length mismatch");
  for (const auto& j : pi)
    if (j && (*j < 0 || *j >= d))
      throw CorruptedStateError("evaluate: repair map references a column out of range");

  const DenseMatrix mid_right = multiply(f.mid, f.right);
  double total = 0.0;
  for (Index r0 = 0; r0 < m; r0 += block_rows) {
    const Index r1 = std::min(m, r0 + block_rows);
    const DenseMatrix left_block = row_block(f.left, r0, r1);
    DenseMatrix chat_block = multiply(left_block, mid_right);
    const DenseMatrix c_block = row_block(c, r0, r1);
    auto chat = chat_block.map();
    // repaired A block, then its responses
    Eigen::MatrixXd a_hat = chat.leftCols(n);
    for (Index i = 0; i < n; ++i)
      if (pi[static_cast<std::size_t>(i)])
        a_hat.col(i) += perturb_delta * chat.col(n + *pi[static_cast<std::size_t>(i)]);
    total += (a_hat - c_block.map().leftCols(n)).squaredNorm();
    total += (a_hat * x.map() - c_block.map().rightCols(d)).squaredNorm();
  }
  return total;
}

// Median of independent sketched estimates of the evaluate objective; each
// trial compresses the residual with a fresh CountSketch of O(1/eps^2) rows.
inline double estimate_cost(const FactoredLowRank& f, const DenseMatrix& x,
                            const std::vector<std::optional<Index>>& pi, double perturb_delta,
                            const Matrix& c, double eps_est, Index trials, std::uint64_t seed) {
  if (!(eps_est > 0.0 && eps_est < 1.0))
    throw DegenerateInputError("estimate_cost: eps_est must be in (0,1)");
  if (trials < 1 || trials % 2 == 0)
    throw DegenerateInputError("estimate_cost: trials must be odd and >= 1");
  const Index n = x.rows();
  const Index d = x.cols();
  for (const auto& j : pi)
    if (j && (*j < 0 || *j >= d))
      throw CorruptedStateError("estimate_cost: repair map references a column out of range");

  const Index rows = static_cast<Index>(std::ceil(10.0 / (eps_est * eps_est)));
  std::vector<double> estimates;
  estimates.reserve(static_cast<std::size_t>(trials));
  for (Index t = 0; t < trials; ++t) {
    CountSketchTransform s(rows, c.rows(), derive_seed(seed, "estimate", t));
    const DenseMatrix sc = apply_countsketch_left(s, c);
    const DenseMatrix s_left = apply_countsketch_left(s, f.left);
    const DenseMatrix s_chat = multiply(multiply(s_left, f.mid), f.right);
    Eigen::MatrixXd a_hat = s_chat.map().leftCols(n);
    for (Index i = 0; i < n; ++i)
      if (pi[static_cast<std::size_t>(i)])
        a_hat.col(i) += perturb_delta * s_chat.map().col(n + *pi[static_cast<std::size_t>(i)]);
    double est = (a_hat - sc.map().leftCols(n)).squaredNorm();
    est += (a_hat * x.map() - sc.map().rightCols(d)).squaredNorm();
    estimates.push_back(est);
  }
  std::nth_element(estimates.begin(), estimates.begin() + estimates.size() / 2, estimates.end());
  return estimates[estimates.size() / 2];
}

// Serializable run summary.
struct RunDiagnostics {
  std::string method;
  std::string mode;
  double rho_or_eps = 0.0;
  std::uint64_t seed = 0;
  std::optional<double> cost;
  double wall_time_seconds = 0.0;
  SketchSizes sizes;
  Index split_repairs = 0;
  Index rank_deficit = 0;  // n minus the repaired system's rank
  std::string sketch_kinds;
};

struct FtlsResult {
  DenseMatrix x;
  FactoredLowRank factors;
  SplitResult split;
  RunDiagnostics diagnostics;
};

namespace detail {

// Reduces the rows of `m` to `rows` many, either obliviously or by leverage
// sampling of `sample_target`'s rows. Returns the reduced copies of both
// matrices so leverage draws stay aligned across them.
struct RowReduction {
  DenseMatrix first;
  DenseMatrix second;
};

inline RowReduction reduce_rows(SketchKind kind, Index rows, const Matrix& first,
                                const Matrix& second, std::uint64_t seed) {
  switch (kind) {
    case SketchKind::countsketch: {
      CountSketchTransform t(rows, first.rows(), seed);
      return {apply_countsketch_left(t, first), apply_countsketch_left(t, second)};
    }
    case SketchKind::gaussian: {
      GaussianTransform t(rows, first.rows(), seed);
      return {apply_gaussian_left(t, first), apply_gaussian_left(t, second)};
    }
    case SketchKind::leverage: {
      InclusionSampler r = build_inclusion_sampler(first, rows, seed);
      return {apply_inclusion_left(r, first), apply_inclusion_left(r, second)};
    }
  }
  throw CorruptedStateError("reduce_rows: unknown sketch kind");
}

inline DenseMatrix reduce_rows_single(SketchKind kind, Index rows, const Matrix& m,
                                      std::uint64_t seed) {
  switch (kind) {
    case SketchKind::countsketch:
      return apply_countsketch_left(CountSketchTransform(rows, m.rows(), seed), m);
    case SketchKind::gaussian:
      return apply_gaussian_left(GaussianTransform(rows, m.rows(), seed), m);
    case SketchKind::leverage:
      return apply_inclusion_left(build_inclusion_sampler(m, rows, seed), m);
  }
  throw CorruptedStateError("reduce_rows_single: unknown sketch kind");
}

}  // namespace detail

// The sketched total least squares pipeline:
//   1. reduce C's rows to s1 (oblivious sketch),
//   2. when d is large, sample d1 columns by the leverage scores of the
//      sketched rows' transpose,
//   3. sample d2 rows of C*D1 by leverage, and solve the small
//      rank-constrained regression for the middle factor Z2,
//   4. repair the s2-row sketch of the factored approximation (split) and
//      read X off the small regression.
inline FtlsResult ftls_solve(const Matrix& a, const Matrix& b, const FtlsConfig& cfg) {
  cfg.validate();
  const Index m = a.rows();
  const Index n = a.cols();
  const Index d = b.cols();
  if (b.rows() != m) throw DimensionError("ftls_solve: row counts differ");
  if (n < 1 || d < 1) throw DimensionError("ftls_solve: empty system");
  if (m < n + 1) throw DimensionError("ftls_solve: system must be overconstrained (m >= n+1)");

  const auto t0 = std::chrono::steady_clock::now();
  const Matrix c = hconcat(a, b);
  const SketchSizes sz = resolve_sketch_sizes(cfg, m, n, d);

  const DenseMatrix s1c =
      detail::reduce_rows_single(cfg.s1_kind, sz.s1, c, derive_seed(cfg.seed, "s1"));

  Matrix cd1 = c;
  if (sz.use_d1) {
    const InclusionSampler d1 =
        build_inclusion_sampler(Matrix(transpose(s1c)), sz.d1, derive_seed(cfg.seed, "d1"));
    cd1 = Matrix(apply_inclusion_cols(c, d1));
  }

  const auto [d2_cd1, d2_c] =
      detail::reduce_rows(cfg.d2_kind, sz.d2, cd1, c, derive_seed(cfg.seed, "d2"));

  DenseMatrix z2 = rank_constrained_solve(d2_c, d2_cd1, s1c, n).z;

  const double perturb_delta = cfg.delta / (static_cast<double>(m) * static_cast<double>(n + d));
  SplitResult sp = split(cd1, z2, s1c, n, d, sz.s2, perturb_delta, derive_seed(cfg.seed, "split"));
  // the factor-level system carries the same solutions as the sketched one
  // and stays exact at full height
  LsSolution small = ls_solve(Matrix(sp.proxy_a), Matrix(sp.proxy_b));
  detail::check_split_solvable(sp, small.x, n);

  FtlsResult out;
  out.x = std::move(small.x);
  out.factors = FactoredLowRank{std::move(cd1), std::move(z2), s1c};
  out.split = std::move(sp);
  out.diagnostics.method = "FTLS";
  out.diagnostics.mode = cfg.mode == SizeMode::density ? "density" : "theory";
  out.diagnostics.rho_or_eps = cfg.mode == SizeMode::density ? cfg.density : cfg.eps;
  out.diagnostics.seed = cfg.seed;
  out.diagnostics.sizes = sz;
  out.diagnostics.split_repairs = out.split.repaired;
  out.diagnostics.rank_deficit = n - out.split.rank;
  out.diagnostics.sketch_kinds =
      std::string(to_string(cfg.s1_kind)) + "/" + to_string(cfg.d2_kind);
  out.diagnostics.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

// Runs the solver `runs` times on independently derived seeds, scores every
// returned X with the sketched cost estimator, and keeps the argmin (ties
// broken by the lowest run index). Runs execute concurrently.
inline FtlsResult ftls_boosted(const Matrix& a, const Matrix& b, const FtlsConfig& cfg,
                               Index runs) {
  if (runs < 1) throw DegenerateInputError("ftls_boosted: runs must be >= 1");
  constexpr double kScoreEps = 0.2;
  constexpr Index kScoreTrials = 9;

  const Matrix c = hconcat(a, b);
  struct Scored {
    std::optional<FtlsResult> result;
    double score = 0.0;
    std::string error;
  };
  auto run_one = [&](Index r) -> Scored {
    FtlsConfig run_cfg = cfg;
    run_cfg.seed = runs == 1 ? cfg.seed : derive_seed(cfg.seed, "boost", static_cast<std::uint64_t>(r));
    try {
      FtlsResult res = ftls_solve(a, b, run_cfg);
      const double score =
          estimate_cost(res.factors, res.x, res.split.pi, res.split.perturb_delta, c, kScoreEps,
                        kScoreTrials, derive_seed(run_cfg.seed, "boost-score"));
      return {std::move(res), score, {}};
    } catch (const std::exception& e) {
      return {std::nullopt, 0.0, e.what()};
    }
  };

  std::vector<std::future<Scored>> futures;
  futures.reserve(static_cast<std::size_t>(runs));
  for (Index r = 0; r < runs; ++r)
    futures.push_back(std::async(std::launch::async, run_one, r));

  std::optional<FtlsResult> best;
  double best_score = 0.0;
  std::string first_error;
  for (auto& fut : futures) {
    Scored s = fut.get();
    if (!s.result) {
      if (first_error.empty()) first_error = s.error;
      continue;
    }
    if (!best || s.score < best_score) {
      best = std::move(s.result);
      best_score = s.score;
    }
  }
  if (!best) throw RankRepairError("ftls_boosted: all runs failed; first error: " + first_error);
  best->diagnostics.cost = best_score;
  return std::move(*best);
}

}  // namespace fasttls
