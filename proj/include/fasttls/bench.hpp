#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fasttls/data.hpp"
#include "fasttls/fast_tls.hpp"
#include "fasttls/regularized.hpp"
#include "fasttls/tls.hpp"

namespace fasttls {

enum class Method { tls, ls, ftls, rftls };

struct MethodSpec {
  Method kind = Method::tls;
  // FTLS / RFTLS knobs: density when rho is set, otherwise theory mode with eps.
  std::optional<double> rho;
  double eps = 0.5;
  double delta = 1e-6;
  double lambda = 1.0;
  Index boost = 1;

  std::string label() const {
    char buf[64];
    switch (kind) {
      case Method::tls: return "TLS";
      case Method::ls: return "LS";
      case Method::ftls:
        if (rho)
          std::snprintf(buf, sizeof buf, "FTLS %g", *rho);
        else
          std::snprintf(buf, sizeof buf, "FTLS eps=%g", eps);
        break;
      case Method::rftls:
        if (rho)
          std::snprintf(buf, sizeof buf, "RFTLS %g,%g", lambda, *rho);
        else
          std::snprintf(buf, sizeof buf, "RFTLS %g,eps=%g", lambda, eps);
        break;
    }
    std::string out = buf;
    if (boost > 1) out += " boost=" + std::to_string(boost);
    return out;
  }
};

struct BenchRecord {
  std::string method;
  double cost_mean = 0.0;
  double cost_std = 0.0;
  double time_mean = 0.0;
  double time_std = 0.0;
  Index repeats = 0;
  std::uint64_t seed_base = 0;
  Index failed_runs = 0;
  bool ok = true;
  std::string error;
};

struct BenchOptions {
  Index repeats = 1;
  std::uint64_t seed = 0;
  bool timed = true;  // untimed benchmarks may run repeats concurrently
};

namespace detail {

struct RunSample {
  double cost = 0.0;
  double seconds = 0.0;
  bool ok = false;
  std::string error;
};

inline RunSample run_method_once(const Instance& inst, const MethodSpec& spec,
                                 std::uint64_t run_seed) {
  RunSample sample;
  try {
    const auto t0 = std::chrono::steady_clock::now();
    switch (spec.kind) {
      case Method::tls: {
        sample.cost = tls_solve(inst.a, inst.b, spec.delta).cost;
        break;
      }
      case Method::ls: {
        sample.cost = ls_solve(inst.a, inst.b).cost;
        break;
      }
      case Method::ftls: {
        FtlsConfig cfg;
        cfg.eps = spec.eps;
        cfg.delta = spec.delta;
        cfg.seed = run_seed;
        if (spec.rho) {
          cfg.mode = SizeMode::density;
          cfg.density = *spec.rho;
        }
        FtlsResult res =
            spec.boost > 1 ? ftls_boosted(inst.a, inst.b, cfg, spec.boost)
                           : ftls_solve(inst.a, inst.b, cfg);
        sample.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        // exact objective, block-wise, outside the timed region
        const Matrix c = hconcat(inst.a, inst.b);
        sample.cost = evaluate(res.factors, res.x, res.split.pi, res.split.perturb_delta, c);
        sample.ok = true;
        return sample;
      }
      case Method::rftls: {
        RftlsConfig cfg;
        cfg.lambda = spec.lambda;
        cfg.eps = spec.eps;
        cfg.delta = spec.delta;
        cfg.seed = run_seed;
        if (spec.rho) {
          cfg.mode = SizeMode::density;
          cfg.density = *spec.rho;
        }
        sample.cost = rftls_solve(inst.a, inst.b, cfg).objective;
        break;
      }
    }
    sample.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    sample.ok = true;
  } catch (const std::exception& e) {
    sample.ok = false;
    sample.error = e.what();
  }
  return sample;
}

inline std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size() - 1);
  return {mean, std::sqrt(var)};
}

inline int method_rank(const MethodSpec& s) {
  switch (s.kind) {
    case Method::tls: return 0;
    case Method::ls: return 1;
    case Method::ftls: return 2;
    case Method::rftls: return 3;
  }
  return 4;
}

}  // namespace detail

// Executes `repeats` seeded runs per method, timing only the solve, and
// aggregates mean/std per method. Rows come out ordered TLS, LS, then the
// sketched methods by descending density. Timed runs are serialized; with
// options.timed == false the repeats run concurrently and times read 0.
inline std::vector<BenchRecord> run_benchmark(const Instance& inst, std::vector<MethodSpec> specs,
                                              const BenchOptions& options = {}) {
  if (specs.empty()) throw DegenerateInputError("run_benchmark: no methods requested");
  if (options.repeats < 1) throw DegenerateInputError("run_benchmark: repeats must be >= 1");

  std::stable_sort(specs.begin(), specs.end(), [](const MethodSpec& a, const MethodSpec& b) {
    const int ra = detail::method_rank(a), rb = detail::method_rank(b);
    if (ra != rb) return ra < rb;
    return a.rho.value_or(-1.0) > b.rho.value_or(-1.0);
  });

  std::vector<BenchRecord> records;
  records.reserve(specs.size());
  for (const MethodSpec& spec : specs) {
    const std::string label = spec.label();
    BenchRecord rec;
    rec.method = label;
    rec.repeats = options.repeats;
    rec.seed_base = options.seed;

    std::vector<detail::RunSample> samples(static_cast<std::size_t>(options.repeats));
    auto seed_for = [&](Index r) {
      return derive_seed(options.seed, label, static_cast<std::uint64_t>(r));
    };
    if (options.timed) {
      if (options.repeats >= 3)  // warm-up run, untimed
        detail::run_method_once(inst, spec, derive_seed(options.seed, label + " warmup"));
      for (Index r = 0; r < options.repeats; ++r)
        samples[static_cast<std::size_t>(r)] = detail::run_method_once(inst, spec, seed_for(r));
    } else {
      std::vector<std::future<detail::RunSample>> futures;
      for (Index r = 0; r < options.repeats; ++r)
        futures.push_back(std::async(std::launch::async, [&, r] {
          return detail::run_method_once(inst, spec, seed_for(r));
        }));
      for (Index r = 0; r < options.repeats; ++r)
        samples[static_cast<std::size_t>(r)] = futures[static_cast<std::size_t>(r)].get();
    }

    std::vector<double> costs, times;
    for (const auto& s : samples) {
      if (!s.ok) {
        ++rec.failed_runs;
        if (rec.error.empty()) rec.error = s.error;
        continue;
      }
      costs.push_back(s.cost);
      if (options.timed) times.push_back(s.seconds);
    }
    if (costs.empty()) {
      rec.ok = false;
    } else {
      rec.ok = true;
      std::tie(rec.cost_mean, rec.cost_std) = detail::mean_std(costs);
      std::tie(rec.time_mean, rec.time_std) = detail::mean_std(times);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

inline void write_table(std::ostream& out, const std::vector<BenchRecord>& records) {
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return std::string(buf);
  };
  std::size_t name_width = 6;
  for (const auto& r : records) name_width = std::max(name_width, r.method.size());
  out << std::left << std::setw(static_cast<int>(name_width) + 2) << "Method" << std::setw(12)
      << "Cost" << std::setw(12) << "C-std" << std::setw(12) << "Time" << std::setw(12) << "T-std"
      << '\n';
  for (const auto& r : records) {
    out << std::left << std::setw(static_cast<int>(name_width) + 2) << r.method;
    if (!r.ok) {
      out << "error: " << r.error << '\n';
      continue;
    }
    out << std::setw(12) << fmt(r.cost_mean) << std::setw(12) << fmt(r.cost_std) << std::setw(12)
        << fmt(r.time_mean) << std::setw(12) << fmt(r.time_std) << '\n';
  }
}

inline void write_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
  out << "method,cost,cost_std,time,time_std,repeats,seed,failed_runs,status\n";
  for (const auto& r : records) {
    out << r.method << ',' << detail::format_double(r.cost_mean) << ','
        << detail::format_double(r.cost_std) << ',' << detail::format_double(r.time_mean) << ','
        << detail::format_double(r.time_std) << ',' << r.repeats << ',' << r.seed_base << ','
        << r.failed_runs << ',' << (r.ok ? "ok" : ("error: " + r.error)) << '\n';
  }
}

inline nlohmann::json to_json(const BenchRecord& r) {
  nlohmann::json j;
  j["method"] = r.method;
  j["cost"] = r.cost_mean;
  j["cost_std"] = r.cost_std;
  j["time"] = r.time_mean;
  j["time_std"] = r.time_std;
  j["repeats"] = r.repeats;
  j["seed"] = r.seed_base;
  j["failed_runs"] = r.failed_runs;
  j["status"] = r.ok ? "ok" : r.error;
  return j;
}

inline nlohmann::json to_json(const RunDiagnostics& d) {
  nlohmann::json j;
  j["method"] = d.method;
  j["mode"] = d.mode;
  j["rho_or_eps"] = d.rho_or_eps;
  j["seed"] = d.seed;
  if (d.cost) j["cost"] = *d.cost;
  j["wall_time_seconds"] = d.wall_time_seconds;
  j["s1"] = d.sizes.s1;
  j["s2"] = d.sizes.s2;
  j["d1"] = d.sizes.d1;
  j["d2"] = d.sizes.d2;
  j["column_sampling"] = d.sizes.use_d1;
  j["split_repairs"] = d.split_repairs;
  j["sketch_kinds"] = d.sketch_kinds;
  return j;
}

inline void write_json(std::ostream& out, const std::vector<BenchRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) arr.push_back(to_json(r));
  out << arr.dump(2) << '\n';
}

}  // namespace fasttls
