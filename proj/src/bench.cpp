#include "rbftune/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "rbftune/error.hpp"
#include "rbftune/loocv.hpp"
#include "rbftune/parallel.hpp"
#include "rbftune/random.hpp"

namespace rbftune {
namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kNodeSalt = 0x6e6f646573ULL;

// Shortest decimal form that parses back to the same double.
std::string format_short(double value) {
  char buf[64];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, value);
    if (std::strtod(buf, nullptr) == value) break;
  }
  return buf;
}

template <typename T, typename F>
std::string join(const std::vector<T>& items, F&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ',';
    out += fmt(items[i]);
  }
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

bool same_double(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

}  // namespace

TuneMethod parse_tune_method(std::string_view name) {
  for (auto m : {TuneMethod::GridFull, TuneMethod::GridNystrom, TuneMethod::GdFull, TuneMethod::GdNystrom}) {
    if (tune_method_name(m) == name) return m;
  }
  throw Error(Errc::InvalidArgument, "unknown method '" + std::string(name) +
                                         "' (expected rippa, rippa-nystrom, gd or gd-nystrom)");
}

bool is_nystrom(TuneMethod method) noexcept {
  return method == TuneMethod::GridNystrom || method == TuneMethod::GdNystrom;
}

void BenchConfig::validate() const {
  for (const auto& f : functions) test_function(f);
  if (methods.empty()) throw Error(Errc::InvalidArgument, "no methods selected");
  if (m < 1) throw Error(Errc::InvalidArgument, "landmark count must be positive");
  if (!(lambda_nystrom > 0.0)) throw Error(Errc::InvalidArgument, "Nystrom lambda_reg must be > 0");
  if (!(jitter_1d >= 0.0 && jitter_multi >= 0.0)) throw Error(Errc::InvalidArgument, "jitter must be >= 0");
  if (n_test < 1) throw Error(Errc::InvalidArgument, "n_test must be positive");
  if (repetitions < 1) throw Error(Errc::InvalidArgument, "repetitions must be positive");
  for (Index n : full_sizes) {
    if (n < 2) throw Error(Errc::InvalidArgument, "train sizes must be >= 2");
  }
  for (Index n : nystrom_sizes) {
    if (n < 2) throw Error(Errc::InvalidArgument, "train sizes must be >= 2");
  }
  grid.validate();
  gd.validate();
}

std::string config_echo(const BenchConfig& c) {
  std::ostringstream os;
  auto idx = [](Index v) { return std::to_string(v); };
  os << "functions = " << join(c.functions, [](const std::string& s) { return s; }) << '\n'
     << "methods = " << join(c.methods, [](TuneMethod m) { return std::string(tune_method_name(m)); }) << '\n'
     << "full-sizes = " << join(c.full_sizes, idx) << '\n'
     << "nystrom-sizes = " << join(c.nystrom_sizes, idx) << '\n'
     << "m = " << c.m << '\n'
     << "seed = " << c.base_seed << '\n'
     << "lambda-nystrom = " << format_short(c.lambda_nystrom) << '\n'
     << "jitter-1d = " << format_short(c.jitter_1d) << '\n'
     << "jitter-multi = " << format_short(c.jitter_multi) << '\n'
     << "n-test = " << c.n_test << '\n'
     << "repetitions = " << c.repetitions << '\n'
     << "timing = " << (c.record_timing ? "true" : "false") << '\n'
     << "grid-coarse-count = " << c.grid.coarse_count << '\n'
     << "grid-coarse-lo = " << format_short(c.grid.coarse_lo) << '\n'
     << "grid-coarse-hi = " << format_short(c.grid.coarse_hi) << '\n'
     << "grid-refine-count = " << c.grid.refine_count << '\n'
     << "grid-refine-lo-factor = " << format_short(c.grid.refine_lo_factor) << '\n'
     << "grid-refine-hi-factor = " << format_short(c.grid.refine_hi_factor) << '\n'
     << "gd-eta0 = " << format_short(c.gd.eta0) << '\n'
     << "gd-eta-max = " << format_short(c.gd.eta_max) << '\n'
     << "gd-grow = " << format_short(c.gd.grow) << '\n'
     << "gd-shrink = " << format_short(c.gd.shrink) << '\n'
     << "gd-max-retries = " << c.gd.max_retries << '\n'
     << "gd-max-iters = " << c.gd.max_iters << '\n'
     << "gd-grad-tol = " << format_short(c.gd.grad_tol) << '\n'
     << "gd-rel-obj-tol = " << format_short(c.gd.rel_obj_tol) << '\n'
     << "gd-fd-scale = " << format_short(c.gd.fd_scale) << '\n';
  return os.str();
}

bool RunRecord::operator==(const RunRecord& o) const {
  return function == o.function && dim == o.dim && method == o.method && n == o.n && m == o.m &&
         same_double(epsilon_star, o.epsilon_star) && same_double(loocv_objective, o.loocv_objective) &&
         same_double(rmse, o.rmse) && same_double(wall_time_ms, o.wall_time_ms) &&
         evaluations == o.evaluations && seed == o.seed && ok == o.ok;
}

std::uint64_t cell_seed(std::uint64_t base_seed, std::string_view function, TuneMethod method,
                        Index n) noexcept {
  std::uint64_t s = mix_seed(base_seed, fnv1a(function));
  s = mix_seed(s, static_cast<std::uint64_t>(method));
  return mix_seed(s, static_cast<std::uint64_t>(n));
}

std::uint64_t node_seed(std::uint64_t base_seed, std::string_view function, Index n) noexcept {
  return mix_seed(mix_seed(mix_seed(base_seed, kNodeSalt), fnv1a(function)), static_cast<std::uint64_t>(n));
}

RunRecord run_cell(const BenchConfig& config, const TestFunction& function, TuneMethod method,
                   Index n) {
  RunRecord rec;
  rec.function = std::string(function.name);
  rec.dim = function.dim;
  rec.method = method;
  rec.n = n;
  if (is_nystrom(method)) rec.m = config.m;
  rec.seed = cell_seed(config.base_seed, function.name, method, n);

  try {
    const NodeSet nodes = make_nodes(function.dim, n, default_node_scheme(function.dim),
                                     node_seed(config.base_seed, function.name, n));
    const Eigen::VectorXd values = eval_function(function, nodes.points());
    const double jitter = config.full_jitter(function.dim);

    auto tune_once = [&]() -> TuneResult {
      Objective objective;
      LandmarkSet landmarks;
      if (is_nystrom(method)) {
        landmarks = kmeanspp_select(nodes, config.m, rec.seed);
        objective = [&](double eps) {
          return loocv_nystrom(nodes, values, landmarks, eps, config.lambda_nystrom);
        };
      } else {
        objective = [&](double eps) {
          return loocv_full_closed_form(nodes, values, KernelSpec{RbfFamily::InverseMultiquadric, eps, jitter});
        };
      }
      if (method == TuneMethod::GridFull || method == TuneMethod::GridNystrom) {
        return grid_search(objective, config.grid, method);
      }
      return gradient_descent(objective, initial_epsilon(nodes, rec.seed), config.gd, method);
    };

    std::vector<double> times_ms;
    TuneResult tuned;
    for (int rep = 0; rep < config.repetitions; ++rep) {
      const auto start = Clock::now();
      tuned = tune_once();
      times_ms.push_back(std::chrono::duration<double, std::milli>(Clock::now() - start).count());
    }

    const InterpolantModel model =
        fit(nodes, values, KernelSpec{RbfFamily::InverseMultiquadric, tuned.epsilon_star, jitter});
    const PointMatrix tp = test_points(function, config.n_test);
    rec.epsilon_star = tuned.epsilon_star;
    rec.loocv_objective = tuned.objective_star;
    rec.rmse = rms_error(model, tp, eval_function(function, tp));
    rec.evaluations = tuned.evaluations;
    rec.wall_time_ms = config.record_timing ? median(times_ms) : 0.0;
    if (!std::isfinite(rec.rmse)) {
      rec.ok = false;
      rec.diagnostic = "RMSE is not finite";
    }
  } catch (const Error& e) {
    rec.ok = false;
    rec.diagnostic = e.what();
  }
  if (!rec.ok) {
    const double nan = std::nan("");
    rec.epsilon_star = rec.loocv_objective = rec.rmse = rec.wall_time_ms = nan;
  }
  return rec;
}

std::vector<RunRecord> run_sweep(const BenchConfig& config) {
  config.validate();
  struct Cell {
    const TestFunction* function;
    TuneMethod method;
    Index n;
  };
  std::vector<Cell> cells;
  for (const auto& name : config.functions) {
    const TestFunction& f = test_function(name);
    for (TuneMethod method : config.methods) {
      for (Index n : config.sizes_for(method)) cells.push_back({&f, method, n});
    }
  }
  std::vector<RunRecord> records(cells.size());
  parallel_for(cells.size(), config.workers, [&](std::size_t i) {
    records[i] = run_cell(config, *cells[i].function, cells[i].method, cells[i].n);
  });
  return records;
}

std::vector<StabilityReport> run_stability(const std::vector<int>& dims,
                                           const std::vector<Index>& sizes,
                                           const std::vector<Index>& ms, std::uint64_t base_seed,
                                           int workers) {
  std::vector<StabilityReport> out;
  for (int dim : dims) {
    for (Index n : sizes) {
      const NodeSet nodes = make_nodes(dim, n, default_node_scheme(dim),
                                       mix_seed(mix_seed(base_seed, static_cast<std::uint64_t>(dim)),
                                                static_cast<std::uint64_t>(n)));
      for (Index m : ms) out.push_back(stability_experiment(nodes, m, base_seed, workers));
    }
  }
  return out;
}

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string records_to_csv(const std::vector<RunRecord>& records) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : records) {
    out += r.function;
    out += ',' + std::to_string(r.dim);
    out += ',' + std::string(tune_method_name(r.method));
    out += ',' + std::to_string(r.n);
    out += ',' + (r.m ? std::to_string(*r.m) : std::string());
    out += ',' + format_double(r.epsilon_star);
    out += ',' + format_double(r.loocv_objective);
    out += ',' + format_double(r.rmse);
    out += ',' + format_double(r.wall_time_ms);
    out += ',' + std::to_string(r.evaluations);
    out += ',' + std::to_string(r.seed);
    out += r.ok ? ",ok\n" : ",failed\n";
  }
  return out;
}

std::vector<RunRecord> records_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw Error(Errc::InvalidArgument, "CSV header does not match the results schema");
  }
  std::vector<RunRecord> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (fields.size() != 12) {
      throw Error(Errc::InvalidArgument, "CSV line " + std::to_string(line_no) + " has " +
                                             std::to_string(fields.size()) + " fields");
    }
    try {
      RunRecord r;
      r.function = fields[0];
      r.dim = std::stoi(fields[1]);
      r.method = parse_tune_method(fields[2]);
      r.n = std::stol(fields[3]);
      if (!fields[4].empty()) r.m = std::stol(fields[4]);
      r.epsilon_star = std::strtod(fields[5].c_str(), nullptr);
      r.loocv_objective = std::strtod(fields[6].c_str(), nullptr);
      r.rmse = std::strtod(fields[7].c_str(), nullptr);
      r.wall_time_ms = std::strtod(fields[8].c_str(), nullptr);
      r.evaluations = std::stol(fields[9]);
      r.seed = std::stoull(fields[10]);
      if (fields[11] != "ok" && fields[11] != "failed") throw std::invalid_argument("status");
      r.ok = fields[11] == "ok";
      out.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw Error(Errc::InvalidArgument, "CSV line " + std::to_string(line_no) + " is malformed");
    }
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error(Errc::Io, path.parent_path().string() + ": " + ec.message());
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (f == nullptr) throw Error(Errc::Io, path.string() + ": cannot open for writing");
  const std::size_t written = std::fwrite(text.data(), 1, text.size(), f);
  const bool closed = std::fclose(f) == 0;
  if (written != text.size() || !closed) throw Error(Errc::Io, path.string() + ": write failed");
}

void emit_csv(const std::vector<RunRecord>& records, const std::filesystem::path& path) {
  write_text_file(path, records_to_csv(records));
}

std::vector<RunRecord> read_csv(const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (f == nullptr) throw Error(Errc::Io, path.string() + ": cannot open for reading");
  std::string text;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, f)) > 0) text.append(buf, got);
  std::fclose(f);
  return records_from_csv(text);
}

std::string stability_to_csv(const std::vector<StabilityReport>& reports) {
  std::string out = "dim,n,m,pairs,mean_nmi,std_nmi,min_nmi,max_nmi\n";
  for (const auto& r : reports) {
    const auto [lo, hi] = std::minmax_element(r.pair_nmis.begin(), r.pair_nmis.end());
    out += std::to_string(r.dim) + ',' + std::to_string(r.n) + ',' + std::to_string(r.m) + ',' +
           std::to_string(r.pair_nmis.size()) + ',' + format_double(r.mean_nmi) + ',' +
           format_double(r.std_nmi) + ',' + format_double(r.pair_nmis.empty() ? 0.0 : *lo) + ',' +
           format_double(r.pair_nmis.empty() ? 0.0 : *hi) + '\n';
  }
  return out;
}

}  // namespace rbftune
