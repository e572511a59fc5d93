#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rbftune/landmarks.hpp"
#include "rbftune/optimize.hpp"
#include "rbftune/testbed.hpp"

namespace rbftune {

/// The four tuning strategies, named as they appear in CSV output:
/// rippa, rippa-nystrom, gd, gd-nystrom.
TuneMethod parse_tune_method(std::string_view name);
bool is_nystrom(TuneMethod method) noexcept;

struct BenchConfig {
  std::vector<std::string> functions = {"f1", "f2", "f3", "f4", "f5", "f6", "f7", "f8"};
  std::vector<TuneMethod> methods = {TuneMethod::GridFull, TuneMethod::GridNystrom,
                                     TuneMethod::GdFull, TuneMethod::GdNystrom};
  std::vector<Index> full_sizes = kFullTrainSizes;
  std::vector<Index> nystrom_sizes = kNystromTrainSizes;
  Index m = 200;
  std::uint64_t base_seed = 1;
  double lambda_nystrom = 1e-6;
  double jitter_1d = 1e-14;
  double jitter_multi = 1e-10;  ///< full-path jitter for 2D and 3D
  Index n_test = 5000;
  int repetitions = 5;
  int workers = 1;
  bool record_timing = true;
  std::filesystem::path output_dir = "results";
  GridSpec grid;
  GdSpec gd;

  void validate() const;
  const std::vector<Index>& sizes_for(TuneMethod method) const {
    return is_nystrom(method) ? nystrom_sizes : full_sizes;
  }
  double full_jitter(int dim) const { return dim == 1 ? jitter_1d : jitter_multi; }
};

/// key = value lines, one per setting, in a fixed order. The same keys are
/// accepted by the CLI config file.
std::string config_echo(const BenchConfig& config);

struct RunRecord {
  std::string function;
  int dim = 0;
  TuneMethod method = TuneMethod::GridFull;
  Index n = 0;
  std::optional<Index> m;  ///< present iff the method is Nystrom-based
  double epsilon_star = 0.0;
  double loocv_objective = 0.0;
  double rmse = 0.0;
  double wall_time_ms = 0.0;
  long evaluations = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string diagnostic;  ///< failure reason; not part of the CSV

  bool operator==(const RunRecord& other) const;
};

/// Per-cell seed: a SplitMix64 chain over (base_seed, fnv1a(function), method, n).
std::uint64_t cell_seed(std::uint64_t base_seed, std::string_view function, TuneMethod method,
                        Index n) noexcept;
/// Seed of the training nodes; shared by all methods on the same (function, n).
std::uint64_t node_seed(std::uint64_t base_seed, std::string_view function, Index n) noexcept;

/// Tunes epsilon for one (function, method, n) cell, fits at epsilon*, and
/// measures the RMS error on the function's fixed test set. Failures are
/// returned as records with ok == false.
RunRecord run_cell(const BenchConfig& config, const TestFunction& function, TuneMethod method,
                   Index n);

/// Every (function, method, n) cell in declared config order.
std::vector<RunRecord> run_sweep(const BenchConfig& config);

std::vector<StabilityReport> run_stability(const std::vector<int>& dims,
                                           const std::vector<Index>& sizes,
                                           const std::vector<Index>& ms, std::uint64_t base_seed,
                                           int workers = 1);

inline constexpr const char* kCsvHeader =
    "function,dim,method,n,m,epsilon_star,loocv_objective,rmse,wall_time_ms,evaluations,seed,"
    "status";

std::string format_double(double value);
std::string records_to_csv(const std::vector<RunRecord>& records);
std::vector<RunRecord> records_from_csv(const std::string& text);

void emit_csv(const std::vector<RunRecord>& records, const std::filesystem::path& path);
std::vector<RunRecord> read_csv(const std::filesystem::path& path);

std::string stability_to_csv(const std::vector<StabilityReport>& reports);

/// Log-log RMSE-vs-N and time-vs-N plots, one pair per function, one
/// polyline series per method. Returns the written files in order.
/// Throws NoValidRecords if no successful record exists.
std::vector<std::filesystem::path> emit_plots(const std::vector<RunRecord>& records,
                                              const std::filesystem::path& dir);

/// Writes `text` to `path`, creating parent directories. Throws Io on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace rbftune
