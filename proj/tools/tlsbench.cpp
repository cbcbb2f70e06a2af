// Benchmark and data-generation harness for the total least squares library.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fasttls/fasttls.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitArgument = 2;
constexpr int kExitIngestion = 3;
constexpr int kExitSolver = 4;

fasttls::Instance make_family(const std::string& family, fasttls::Index k, std::uint64_t seed) {
  if (family == "toy") return fasttls::gen_toy();
  if (family == "toy-appendix") return fasttls::gen_toy_appendix();
  if (family == "identity") return fasttls::gen_identity_family(k);
  if (family == "gaussian") return fasttls::gen_gaussian_family(k, seed);
  if (family == "small-gaussian") return fasttls::gen_small_gaussian(seed);
  throw CLI::ValidationError("family", "unknown family '" + family + "'");
}

struct SolveArgs {
  std::string input;
  std::string family;
  fasttls::Index k = 5;
  fasttls::Index n_predictors = 0;
  std::vector<std::string> methods;
  std::vector<double> rhos;
  double eps = 0.5;
  double delta = 1e-6;
  double lambda = 1.0;
  fasttls::Index repeats = 1;
  std::uint64_t seed = 42;
  fasttls::Index boost = 1;
  fasttls::Index pad_rows_to = 0;
  std::string format = "table";
  std::string out_path;
  std::string delimiter = ",";
  bool header = false;
  bool untimed = false;
};

fasttls::Instance load_solve_instance(const SolveArgs& args) {
  fasttls::Instance inst;
  if (!args.input.empty()) {
    if (args.n_predictors > 0) {
      fasttls::CsvOptions opt;
      opt.delimiter = args.delimiter.empty() ? ',' : args.delimiter[0];
      opt.header = args.header;
      inst = fasttls::load_csv(args.input, args.n_predictors, opt);
    } else {
      inst = fasttls::load_instance(args.input);
    }
  } else {
    inst = make_family(args.family, args.k, args.seed);
  }
  if (args.pad_rows_to > 0) inst = fasttls::pad_rows(inst, args.pad_rows_to);
  return inst;
}

std::vector<fasttls::MethodSpec> build_specs(const SolveArgs& args) {
  using fasttls::Method;
  using fasttls::MethodSpec;
  std::vector<std::string> methods = args.methods;
  if (methods.empty()) methods = {"tls", "ls", "ftls"};
  std::vector<double> rhos = args.rhos;
  if (rhos.empty() && methods.end() != std::find(methods.begin(), methods.end(), "ftls") &&
      args.methods.empty())
    rhos = {0.9, 0.6, 0.3, 0.1};

  std::vector<MethodSpec> specs;
  for (const std::string& name : methods) {
    MethodSpec base;
    base.eps = args.eps;
    base.delta = args.delta;
    base.lambda = args.lambda;
    if (name == "tls") {
      base.kind = Method::tls;
      specs.push_back(base);
    } else if (name == "ls") {
      base.kind = Method::ls;
      specs.push_back(base);
    } else if (name == "ftls" || name == "rftls") {
      base.kind = name == "ftls" ? Method::ftls : Method::rftls;
      base.boost = name == "ftls" ? args.boost : 1;
      if (rhos.empty()) {
        specs.push_back(base);
      } else {
        for (double rho : rhos) {
          base.rho = rho;
          specs.push_back(base);
        }
      }
    } else {
      throw CLI::ValidationError("method", "unknown method '" + name + "'");
    }
  }
  return specs;
}

void write_records(const SolveArgs& args, const std::vector<fasttls::BenchRecord>& records) {
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!args.out_path.empty()) {
    file.open(args.out_path);
    if (!file) throw fasttls::IngestionError("cannot write '" + args.out_path + "'");
    out = &file;
  }
  if (args.format == "csv")
    fasttls::write_csv(*out, records);
  else if (args.format == "json")
    fasttls::write_json(*out, records);
  else
    fasttls::write_table(*out, records);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact and sketching-accelerated total least squares benchmarks"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic instance and write it out");
  std::string gen_family;
  fasttls::Index gen_k = 5;
  std::uint64_t gen_seed = 42;
  fasttls::Index gen_pad = 0;
  std::string gen_out;
  gen->add_option("family", gen_family,
                  "one of: toy, toy-appendix, identity, gaussian, small-gaussian")
      ->required();
  gen->add_option("--k", gen_k, "family size parameter");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--pad-rows", gen_pad, "pad with zero rows up to this height");
  gen->add_option("--out", gen_out, "output path (default: stdout)");

  // solve
  auto* solve = app.add_subcommand("solve", "Benchmark solvers on an instance");
  SolveArgs args;
  auto* input_opt = solve->add_option(
      "--input", args.input,
      "instance file; with --n-predictors the file is parsed as a numeric CSV instead");
  auto* family_opt =
      solve->add_option("--family", args.family, "generate this family instead of reading a file");
  input_opt->excludes(family_opt);
  solve->add_option("--k", args.k, "family size parameter");
  solve->add_option("--n-predictors", args.n_predictors,
                    "CSV ingestion: leading predictor column count");
  solve->add_option("--method", args.methods, "tls|ls|ftls|rftls (repeatable; default: tls ls ftls)");
  solve->add_option("--rho", args.rhos, "sample density for ftls/rftls (repeatable)");
  solve->add_option("--eps", args.eps, "accuracy parameter when no --rho is given");
  solve->add_option("--delta", args.delta, "additive slack for the repair step");
  solve->add_option("--lambda", args.lambda, "ridge weight for rftls");
  solve->add_option("--repeats", args.repeats, "seeded repetitions per method");
  solve->add_option("--seed", args.seed, "master seed");
  solve->add_option("--boost", args.boost, "best-of-k independent ftls runs");
  solve->add_option("--pad-rows", args.pad_rows_to, "pad with zero rows up to this height");
  solve->add_option("--format", args.format, "table|csv|json")
      ->check(CLI::IsMember({"table", "csv", "json"}));
  solve->add_option("--out", args.out_path, "output path (default: stdout)");
  solve->add_option("--delimiter", args.delimiter, "CSV delimiter (default ,)");
  solve->add_flag("--header", args.header, "CSV has a header row to skip");
  solve->add_flag("--untimed", args.untimed, "skip timing and run repeats concurrently");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitArgument;
  }

  try {
    if (gen->parsed()) {
      fasttls::Instance inst = make_family(gen_family, gen_k, gen_seed);
      if (gen_pad > 0) inst = fasttls::pad_rows(inst, gen_pad);
      if (gen_out.empty())
        fasttls::save_instance(inst, std::cout);
      else
        fasttls::save_instance(inst, gen_out);
      return kExitOk;
    }

    if (args.input.empty() && args.family.empty())
      throw CLI::ValidationError("solve", "one of --input or --family is required");
    const fasttls::Instance inst = load_solve_instance(args);

    fasttls::BenchOptions options;
    options.repeats = args.repeats;
    options.seed = args.seed;
    options.timed = !args.untimed;
    const auto records = fasttls::run_benchmark(inst, build_specs(args), options);
    write_records(args, records);

    const bool all_failed =
        std::all_of(records.begin(), records.end(), [](const auto& r) { return !r.ok; });
    return all_failed ? kExitSolver : kExitOk;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitArgument;
  } catch (const fasttls::IngestionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIngestion;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolver;
  }
}
