// rbftune: shape-parameter benchmark runner.
//
//   rbftune sweep      [options]   all (function, method, n) cells -> results.csv, config.txt, SVG plots
//   rbftune stability  [options]   landmark NMI stability grid -> stability.csv
//   rbftune tune       [options]   one cell, printed to stdout
//   rbftune plot       [options]   re-render plots from an existing results.csv
//
// Shared options may also come from a key = value file given with --config;
// command-line flags override it.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rbftune/bench.hpp"
#include "rbftune/error.hpp"

namespace {

using namespace rbftune;

struct Options {
  BenchConfig config;
  std::vector<std::string> method_names = {"rippa", "rippa-nystrom", "gd", "gd-nystrom"};
  std::string out = "results";

  // stability
  std::vector<int> dims = {1, 2, 3};
  std::vector<Index> stability_sizes = {1024, 2048, 4096, 8192};
  std::vector<Index> stability_ms = {50, 100, 200, 400};

  // tune
  std::string function = "f1";
  std::string method = "rippa";
  Index n = 256;

  // plot
  std::string csv;
};

void add_shared_options(CLI::App& app, Options& o) {
  auto& c = o.config;
  app.add_option("--functions", c.functions, "Test functions, e.g. f1,f2")->delimiter(',');
  app.add_option("--methods", o.method_names, "rippa, rippa-nystrom, gd, gd-nystrom")->delimiter(',');
  app.add_option("--full-sizes", c.full_sizes, "Training sizes for full-matrix methods")->delimiter(',');
  app.add_option("--nystrom-sizes", c.nystrom_sizes, "Training sizes for Nystrom methods")->delimiter(',');
  app.add_option("-m,--m", c.m, "Number of landmarks");
  app.add_option("--seed", c.base_seed, "Base seed");
  app.add_option("--lambda-nystrom", c.lambda_nystrom, "Nystrom regularization");
  app.add_option("--jitter-1d", c.jitter_1d, "Full-matrix jitter in 1D");
  app.add_option("--jitter-multi", c.jitter_multi, "Full-matrix jitter in 2D and 3D");
  app.add_option("--n-test", c.n_test, "Test points per function");
  app.add_option("--repetitions", c.repetitions, "Timed repetitions per cell (median reported)");
  app.add_flag("--timing,!--no-timing", c.record_timing,
               "Record wall time; --no-timing writes 0 so output is byte-reproducible");
  app.add_option("--workers", c.workers, "Worker threads");
  app.add_option("--out", o.out, "Output directory")->envname("RBFTUNE_OUTPUT_DIR");

  app.add_option("--grid-coarse-count", c.grid.coarse_count);
  app.add_option("--grid-coarse-lo", c.grid.coarse_lo);
  app.add_option("--grid-coarse-hi", c.grid.coarse_hi);
  app.add_option("--grid-refine-count", c.grid.refine_count);
  app.add_option("--grid-refine-lo-factor", c.grid.refine_lo_factor);
  app.add_option("--grid-refine-hi-factor", c.grid.refine_hi_factor);
  app.add_option("--gd-eta0", c.gd.eta0);
  app.add_option("--gd-eta-max", c.gd.eta_max);
  app.add_option("--gd-grow", c.gd.grow);
  app.add_option("--gd-shrink", c.gd.shrink);
  app.add_option("--gd-max-retries", c.gd.max_retries);
  app.add_option("--gd-max-iters", c.gd.max_iters);
  app.add_option("--gd-grad-tol", c.gd.grad_tol);
  app.add_option("--gd-rel-obj-tol", c.gd.rel_obj_tol);
  app.add_option("--gd-fd-scale", c.gd.fd_scale);
}

void finish_config(Options& o) {
  o.config.methods.clear();
  for (const auto& name : o.method_names) o.config.methods.push_back(parse_tune_method(name));
  o.config.output_dir = o.out;
  o.config.validate();
}

std::string describe(const RunRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-3s %-13s n=%-5ld eps*=%-12.6g L=%-12.6g rmse=%-12.6g %9.2f ms  %s",
                r.function.c_str(), std::string(tune_method_name(r.method)).c_str(),
                static_cast<long>(r.n), r.epsilon_star, r.loocv_objective, r.rmse, r.wall_time_ms,
                r.ok ? "ok" : ("FAILED: " + r.diagnostic).c_str());
  return buf;
}

void write_plots(const std::vector<RunRecord>& records, const std::filesystem::path& dir) {
  try {
    for (const auto& p : emit_plots(records, dir)) std::printf("wrote %s\n", p.c_str());
  } catch (const Error& e) {
    if (e.code() != Errc::NoValidRecords) throw;
    std::fprintf(stderr, "warning: %s\n", e.what());
  }
}

int cmd_sweep(Options& o) {
  finish_config(o);
  const auto& c = o.config;
  const auto records = run_sweep(c);
  for (const auto& r : records) std::printf("%s\n", describe(r).c_str());
  emit_csv(records, c.output_dir / "results.csv");
  write_text_file(c.output_dir / "config.txt", config_echo(c));
  std::printf("wrote %s\n", (c.output_dir / "results.csv").c_str());
  write_plots(records, c.output_dir);
  return 0;
}

int cmd_stability(Options& o) {
  finish_config(o);
  const auto reports = run_stability(o.dims, o.stability_sizes, o.stability_ms, o.config.base_seed,
                                     o.config.workers);
  for (const auto& r : reports) {
    std::printf("dim=%d n=%-5ld m=%-4ld mean NMI %.4f  std %.4f\n", r.dim, static_cast<long>(r.n),
                static_cast<long>(r.m), r.mean_nmi, r.std_nmi);
  }
  const auto path = o.config.output_dir / "stability.csv";
  write_text_file(path, stability_to_csv(reports));
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

int cmd_tune(Options& o) {
  finish_config(o);
  const RunRecord r = run_cell(o.config, test_function(o.function), parse_tune_method(o.method), o.n);
  std::printf("%s\n", describe(r).c_str());
  return r.ok ? 0 : 1;
}

int cmd_plot(Options& o) {
  const std::filesystem::path csv =
      o.csv.empty() ? std::filesystem::path(o.out) / "results.csv" : std::filesystem::path(o.csv);
  write_plots(read_csv(csv), o.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Leave-one-out shape-parameter tuning for inverse multiquadric RBF interpolation"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value file supplying any shared option");
  add_shared_options(app, o);

  auto* sweep = app.add_subcommand("sweep", "Run every (function, method, n) cell");
  auto* stability = app.add_subcommand("stability", "k-means++ landmark stability (pairwise NMI)");
  stability->add_option("--dims", o.dims)->delimiter(',');
  stability->add_option("--sizes", o.stability_sizes)->delimiter(',');
  stability->add_option("--ms", o.stability_ms)->delimiter(',');
  auto* tune = app.add_subcommand("tune", "Tune one cell and print epsilon* and RMSE");
  tune->add_option("--function", o.function);
  tune->add_option("--method", o.method);
  tune->add_option("-n,--n", o.n);
  auto* plot = app.add_subcommand("plot", "Render SVG plots from a results CSV");
  plot->add_option("--csv", o.csv, "Results file (default <out>/results.csv)");
  for (auto* sub : {sweep, stability, tune, plot}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sweep) return cmd_sweep(o);
    if (*stability) return cmd_stability(o);
    if (*tune) return cmd_tune(o);
    if (*plot) return cmd_plot(o);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
