// SPDX-License-Identifier: Apache-2.0
#pragma once

// Command-line front end: compute | test | rank | simulate.
// Exit codes: 0 ok, 2 usage/parse, 3 degenerate data, 4 numeric failure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>

#include "xicor/cdf.hpp"
#include "xicor/csv.hpp"
#include "xicor/errors.hpp"
#include "xicor/estimator.hpp"
#include "xicor/inference.hpp"
#include "xicor/kernels.hpp"
#include "xicor/sample.hpp"
#include "xicor/simulate.hpp"

namespace xicor::cli {

struct DataArgs {
  std::string file;
  std::string x_col;
  std::vector<std::string> y_cols;
  std::string h = "power:1";
  std::string f;
  std::string variant;
  std::uint64_t seed = 0;
  std::optional<double> f_mu;
  std::optional<double> f_sd;
  bool continuous_y = false;
};

struct SimulateArgs {
  std::string model;
  std::vector<std::string> sigmas{"0", "0.1", "0.5", "inf"};
  std::vector<std::size_t> ns{100, 500, 2000};
  std::size_t reps = 100;
  std::vector<std::string> methods;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  std::string dump_dir;
};

namespace detail {

using xicor::detail::format_number;

inline DistMapSpec distmap_spec(const DataArgs& args, const std::string& fallback) {
  DistMapSpec spec = parse_distmap_spec(args.f.empty() ? fallback : args.f);
  if (args.f_mu || args.f_sd) {
    if (spec.kind != DistMapKind::fitted_normal) {
      throw_usage("--f-mu/--f-sd only apply to --f fit-normal");
    }
    spec.mu_override = args.f_mu;
    spec.sigma_override = args.f_sd;
  }
  return spec;
}

inline Variant variant_of(const std::string& text, const std::string& fallback) {
  const auto v = parse_variant(text.empty() ? fallback : text);
  if (!v) throw_usage("unknown variant '" + text + "'");
  return *v;
}

/// X and the single Y column; defaults are the first and second columns.
inline PairedSample load_pair(const DataArgs& args) {
  const CsvTable table = read_csv_file(args.file);
  if (table.headers.size() < 2 && (args.x_col.empty() || args.y_cols.empty())) {
    throw_usage("need two columns (or --x-col and --y-col)");
  }
  if (args.y_cols.size() > 1) throw_usage("this command takes a single --y-col");
  const std::string x = args.x_col.empty() ? table.headers[0] : args.x_col;
  const std::string y = args.y_cols.empty() ? table.headers[1] : args.y_cols.front();
  return PairedSample(table.column(x), table.column(y));
}

inline void print_coefficient(std::ostream& out, const CoefficientResult& r, const std::string& kernel,
                              const std::string& f) {
  out << "xi=" << format_number(r.xi) << "\n"
      << "zeta=" << format_number(r.zeta) << "\n"
      << "normalization=" << format_number(r.normalization) << "\n"
      << "variant=" << to_string(r.variant) << "\n"
      << "kernel=" << kernel << "\n"
      << "f=" << f << "\n"
      << "n=" << r.n << "\n"
      << "tie_seed=" << r.tie_seed << "\n";
}

}  // namespace detail

inline int cmd_compute(const DataArgs& args, std::ostream& out) {
  const PairedSample sample = detail::load_pair(args);
  EstimatorConfig cfg;
  cfg.variant = detail::variant_of(args.variant, "plugin");
  cfg.kernel = parse_kernel_spec(args.h);
  cfg.f = detail::distmap_spec(args, "std-normal");
  const CoefficientResult r = estimate(sample, cfg, args.seed);
  std::string f_label = "-";
  if (cfg.variant == Variant::plugin) f_label = cfg.f.resolve(sample.ys()).describe();
  if (cfg.variant == Variant::rank || cfg.variant == Variant::simplified) f_label = "empirical";
  const bool kernel_used = cfg.variant == Variant::plugin || cfg.variant == Variant::rank ||
                           cfg.variant == Variant::simplified;
  detail::print_coefficient(out, r, kernel_used ? cfg.kernel.name() : "-", f_label);
  return 0;
}

inline int cmd_test(const DataArgs& args, std::ostream& out, std::ostream& err) {
  const PairedSample sample = detail::load_pair(args);
  const Kernel kernel = parse_kernel_spec(args.h);
  TestOptions opts;
  opts.variant = detail::variant_of(args.variant, "plugin");
  opts.tie_seed = args.seed;
  opts.continuous_y = args.continuous_y;
  if (opts.variant == Variant::plugin) {
    opts.f = detail::distmap_spec(args, "std-normal").resolve(sample.ys());
  }
  const TestResult r = independence_test(sample, kernel, opts);
  if (r.ties_with_continuous_flag) {
    err << "warning: --continuous-y given but Y has duplicate values\n";
  }
  out << "xi=" << detail::format_number(r.coefficient.xi) << "\n"
      << "z=" << detail::format_number(r.z) << "\n"
      << "sigma2=" << detail::format_number(r.sigma2_used.sigma2) << "\n"
      << "sigma2_source=" << to_string(r.sigma2_used.source) << "\n"
      << "p_one_sided=" << detail::format_number(r.p_one_sided) << "\n"
      << "p_two_sided=" << detail::format_number(r.p_two_sided) << "\n"
      << "variant=" << to_string(r.variant) << "\n"
      << "n=" << r.coefficient.n << "\n";
  return 0;
}

struct RankEntry {
  std::string name;
  double xi = std::numeric_limits<double>::quiet_NaN();
  std::size_t rank = 0;  // 0 for degenerate series
};

/// One coefficient per Y series, sorted by descending xi, ties by name.
/// Series that cannot be scored come last with xi = NaN.
inline std::vector<RankEntry> rank_series(const CsvTable& table, const DataArgs& args,
                                          std::size_t* warnings = nullptr) {
  std::vector<double> xs;
  std::vector<std::string> y_names = args.y_cols;
  if (args.x_col.empty()) {
    xs.resize(table.n_rows);
    for (std::size_t i = 0; i < table.n_rows; ++i) xs[i] = static_cast<double>(i + 1);
  } else {
    xs = table.column(args.x_col);
  }
  if (y_names.empty()) {
    for (const auto& h : table.headers) {
      if (h != args.x_col) y_names.push_back(h);
    }
  }
  if (y_names.empty()) throw_usage("no Y columns to rank");

  EstimatorConfig cfg;
  cfg.variant = detail::variant_of(args.variant, "plugin");
  cfg.kernel = parse_kernel_spec(args.h);
  cfg.f = detail::distmap_spec(args, "fit-normal");
  cfg.prepare();

  std::vector<RankEntry> entries;
  std::size_t degenerate = 0;
  for (const auto& name : y_names) {
    RankEntry e;
    e.name = name;
    const auto& ys = table.column(name);
    try {
      e.xi = estimate(PairedSample(xs, ys), cfg, args.seed).xi;
    } catch (const Error& ex) {
      if (ex.kind() == ErrorKind::usage) throw;
      ++degenerate;
    }
    entries.push_back(std::move(e));
  }
  std::stable_sort(entries.begin(), entries.end(), [](const RankEntry& a, const RankEntry& b) {
    const bool an = std::isnan(a.xi);
    const bool bn = std::isnan(b.xi);
    if (an != bn) return bn;
    if (!an && a.xi != b.xi) return a.xi > b.xi;
    return a.name < b.name;
  });
  std::size_t position = 0;
  for (auto& e : entries) {
    if (!std::isnan(e.xi)) e.rank = ++position;
  }
  if (warnings) *warnings = degenerate;
  return entries;
}

inline int cmd_rank(const DataArgs& args, std::ostream& out, std::ostream& err) {
  const CsvTable table = read_csv_file(args.file);
  std::size_t warnings = 0;
  const auto entries = rank_series(table, args, &warnings);
  out << "name,xi,rank\n";
  for (const auto& e : entries) {
    out << e.name << "," << (std::isnan(e.xi) ? std::string("nan") : detail::format_number(e.xi))
        << ",";
    if (e.rank > 0) out << e.rank;
    out << "\n";
  }
  if (warnings > 0) err << "warning: " << warnings << " degenerate series reported as nan\n";
  return 0;
}

inline int cmd_simulate(const SimulateArgs& args, std::ostream& out) {
  const Model model = parse_model(args.model);
  std::vector<NoiseLevel> sigmas;
  for (const auto& s : args.sigmas) sigmas.push_back(NoiseLevel::parse(s));
  if (args.ns.empty() || sigmas.empty()) throw_usage("need at least one --sigma and one --n");
  std::vector<EstimatorConfig> methods;
  for (const auto& m : args.methods) methods.push_back(parse_method_spec(m));
  if (methods.empty()) methods.push_back(parse_method_spec("simplified,power:1"));
  for (auto& m : methods) m.prepare();
  const unsigned workers = args.workers == 0 ? default_workers() : args.workers;

  std::vector<TableRow> rows;
  for (const auto& m : methods) {
    auto [method, kernel] = table_labels(m);
    rows.push_back(TableRow{method, kernel, {}});
  }

  std::ofstream coefficients;
  if (!args.dump_dir.empty()) {
    std::filesystem::create_directories(args.dump_dir);
    coefficients.open(std::filesystem::path(args.dump_dir) / "coefficients.csv");
    if (!coefficients) throw_usage("cannot write to '" + args.dump_dir + "'");
    coefficients << "sigma,n,rep,tie_seed,file,method,xi\n";
  }

  for (const auto& sigma : sigmas) {
    for (std::size_t n : args.ns) {
      ModelSpec spec{model, sigma, n, args.seed};
      std::vector<std::tuple<std::size_t, std::uint64_t, std::vector<CoefficientResult>>> dumped;
      SampleObserver observer;
      if (!args.dump_dir.empty()) {
        observer = [&](std::size_t rep, std::uint64_t seed, const PairedSample& sample,
                       const std::vector<CoefficientResult>& results) {
          const std::string file = "sigma=" + sigma.to_string() + "_n=" + std::to_string(n) +
                                   "_rep=" + std::to_string(rep) + ".csv";
          std::ofstream data(std::filesystem::path(args.dump_dir) / file);
          write_csv(data, {"x", "y"}, {sample.xs(), sample.ys()});
          dumped.emplace_back(rep, seed, results);
        };
      }
      const auto summaries = replicate_many(spec, methods, args.reps, args.seed, workers, observer);
      for (std::size_t k = 0; k < methods.size(); ++k) rows[k].cells.push_back(summaries[k]);

      std::sort(dumped.begin(), dumped.end(),
                [](const auto& a, const auto& b) { return std::get<0>(a) < std::get<0>(b); });
      for (const auto& [rep, seed, results] : dumped) {
        const std::string file = "sigma=" + sigma.to_string() + "_n=" + std::to_string(n) +
                                 "_rep=" + std::to_string(rep) + ".csv";
        for (std::size_t k = 0; k < methods.size(); ++k) {
          coefficients << sigma.to_string() << "," << n << "," << rep << "," << seed << ","
                       << file << ",\"" << methods[k].label() << "\","
                       << detail::format_number(results[k].xi) << "\n";
        }
      }
    }
  }
  write_table_csv(out, sigmas, args.ns, rows);
  return 0;
}

namespace detail {

inline void add_data_options(CLI::App& cmd, DataArgs& args, bool multi_y) {
  cmd.add_option("--file", args.file, "CSV input (header row, comma-separated)")->required();
  cmd.add_option("--x-col", args.x_col, "X column name");
  if (multi_y) {
    cmd.add_option("--y-col", args.y_cols, "Y column names (default: all other columns)")
        ->delimiter(',');
  } else {
    cmd.add_option("--y-col", args.y_cols, "Y column name")->expected(1);
  }
  cmd.add_option("--h", args.h, "kernel: power:GAMMA | exp:BETA | expsq | expgrowth");
  cmd.add_option("--f", args.f, "F: std-normal | fit-normal | empirical | uniform:A,B");
  cmd.add_option("--f-mu", args.f_mu, "mean override for --f fit-normal");
  cmd.add_option("--f-sd", args.f_sd, "scale override for --f fit-normal");
  cmd.add_option("--variant", args.variant, "plugin | rank | simplified | chatterjee");
  cmd.add_option("--seed", args.seed, "tie-break seed (default 0)");
}

class OutputTarget {
 public:
  OutputTarget(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw_usage("cannot open '" + path + "' for writing");
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

}  // namespace detail

/// Parses argv and runs one subcommand; never throws.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Chatterjee-type rank and kernel correlation coefficients"};
  app.name("xicor");
  // `--h` selects the kernel, so help is long-form only (subcommands inherit this).
  app.set_help_flag("--help", "print this help message and exit");
  app.require_subcommand(1);

  DataArgs compute_args, test_args, rank_args;
  SimulateArgs sim_args;
  std::string out_path;

  auto* compute = app.add_subcommand("compute", "coefficient of Y on X from a CSV file");
  detail::add_data_options(*compute, compute_args, false);
  compute->add_option("--out", out_path, "output path (default stdout)");

  auto* test = app.add_subcommand("test", "CLT-based independence test");
  detail::add_data_options(*test, test_args, false);
  test->add_flag("--continuous-y", test_args.continuous_y,
                 "Y is continuous: use the closed-form null variance for power kernels");
  test->add_option("--out", out_path, "output path (default stdout)");

  auto* rank = app.add_subcommand("rank", "rank many Y series by their coefficient on X");
  detail::add_data_options(*rank, rank_args, true);
  rank->add_option("--out", out_path, "output path (default stdout)");

  auto* simulate = app.add_subcommand("simulate", "replicate the synthetic-model experiments");
  simulate->add_option("--model", sim_args.model, "linear | quadratic | sinusoidal")->required();
  simulate->add_option("--sigma", sim_args.sigmas, "noise levels, `inf` for pure noise")
      ->delimiter(',');
  simulate->add_option("--n", sim_args.ns, "sample sizes")->delimiter(',');
  simulate->add_option("--reps", sim_args.reps, "replicates per cell");
  simulate->add_option("--method", sim_args.methods,
                       "VARIANT[,KERNEL[,F]], repeatable (e.g. plugin,power:2,std-normal)");
  simulate->add_option("--seed", sim_args.seed, "base seed (default 0)");
  simulate->add_option("--workers", sim_args.workers, "worker threads (default: all cores)");
  simulate->add_option("--dump-dir", sim_args.dump_dir,
                       "write every replicate's sample and coefficients here");
  simulate->add_option("--out", out_path, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return exit_code(ErrorKind::usage);
  }

  try {
    detail::OutputTarget target(out_path, out);
    if (compute->parsed()) return cmd_compute(compute_args, target.get());
    if (test->parsed()) return cmd_test(test_args, target.get(), err);
    if (rank->parsed()) return cmd_rank(rank_args, target.get(), err);
    if (simulate->parsed()) {
      if (sim_args.reps < 1) throw_usage("--reps must be ≥ 1");
      return cmd_simulate(sim_args, target.get());
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code(ErrorKind::usage);
}

}  // namespace xicor::cli
