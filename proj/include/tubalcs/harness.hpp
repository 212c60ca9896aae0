// Copyright 2026 The tubalcs Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Experiment plumbing: config files, seeded sweeps, metrics and CSV output.

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "tubalcs/io.hpp"
#include "tubalcs/recovery.hpp"

namespace tubalcs {

// ---------------------------------------------------------------------------
// Metrics

/// 10 log10(peak^2 n1 n3 / ||x(i) - x_hat(i)||_F^2) for every lateral slice;
/// +inf where the slice is reproduced exactly.
inline std::vector<double> psnr(const Tensor3d& x, const Tensor3d& x_hat,
                                double peak) {
  if (x.dims() != x_hat.dims()) {
    throw DimensionMismatch("psnr: " + to_string(x.dims()) + " vs " +
                            to_string(x_hat.dims()));
  }
  if (!(peak > 0.0)) throw InvalidSpec("psnr: peak must be > 0");
  const double scale =
      peak * peak * static_cast<double>(x.n1()) * static_cast<double>(x.n3());
  std::vector<double> out(static_cast<std::size_t>(x.n2()));
  for (Index i = 0; i < x.n2(); ++i) {
    const double err = (x.lateral(i) - x_hat.lateral(i)).squaredNorm();
    out[static_cast<std::size_t>(i)] =
        err > 0.0 ? 10.0 * std::log10(scale / err)
                  : std::numeric_limits<double>::infinity();
  }
  return out;
}

/// First iteration whose relative error is <= threshold and stays <= 2x the
/// threshold for the rest of the trace.
inline std::optional<int> iterations_to(const RecoveryTrace& trace,
                                        double threshold) {
  std::optional<int> hit;
  for (const auto& row : trace.rows) {
    if (!(row.rel_err <= 2.0 * threshold)) {
      hit.reset();
    } else if (!hit && row.rel_err <= threshold) {
      hit = row.iter;
    }
  }
  return hit;
}

inline constexpr std::array<double, 3> kReportThresholds{1e-2, 1e-4, 1e-6};

struct MetricReport {
  std::string variant;
  std::string init;
  double kappa = 1.0;
  std::uint64_t seed = 0;
  int iterations = 0;  // U steps executed
  double final_rel_err = 0.0;
  double final_dis = 0.0;
  std::array<std::optional<int>, 3> iterations_to_threshold{};
  /// Per-slice PSNR at peak 1; empty unless the ground truth lies in [0, 1].
  std::vector<double> psnr;
};

inline MetricReport summarize(const RecoveryTrace& trace) {
  if (trace.rows.empty()) throw InvalidSpec("summarize: empty trace");
  MetricReport m;
  m.iterations = trace.back().iter;
  m.final_rel_err = trace.back().rel_err;
  m.final_dis = trace.back().dis;
  for (std::size_t k = 0; k < kReportThresholds.size(); ++k) {
    m.iterations_to_threshold[k] = iterations_to(trace, kReportThresholds[k]);
  }
  return m;
}

inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Inverse of format_double (accepts "inf" / "nan" as written there).
inline double parse_double(std::string_view s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw IoError("not a number: '" + std::string(s) + "'");
  }
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline RecoveryTrace read_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "iter,rel_err,dis,residual,elapsed_ms") {
    throw IoError("trace csv: bad header");
  }
  RecoveryTrace trace;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 5) throw IoError("trace csv: expected 5 columns");
    TraceRow row;
    row.iter = static_cast<int>(parse_double(cells[0]));
    row.rel_err = parse_double(cells[1]);
    row.dis = parse_double(cells[2]);
    row.residual = parse_double(cells[3]);
    row.elapsed_ms = parse_double(cells[4]);
    trace.rows.push_back(row);
  }
  return trace;
}

inline constexpr std::string_view kSummaryHeader =
    "variant,init,kappa,seed,iterations,final_rel_err,final_dis,"
    "iters_1e-2,iters_1e-4,iters_1e-6,psnr_min,psnr_mean";

inline void write_summary_row(std::ostream& os, const MetricReport& m) {
  os << m.variant << ',' << m.init << ',' << format_double(m.kappa) << ','
     << m.seed << ',' << m.iterations << ',' << format_double(m.final_rel_err)
     << ',' << format_double(m.final_dis);
  for (const auto& it : m.iterations_to_threshold) {
    os << ',';
    if (it) os << *it;
  }
  os << ',';
  if (!m.psnr.empty()) {
    os << format_double(*std::min_element(m.psnr.begin(), m.psnr.end()));
  }
  os << ',';
  if (!m.psnr.empty()) {
    double sum = 0.0;
    for (double v : m.psnr) sum += v;
    os << format_double(sum / static_cast<double>(m.psnr.size()));
  }
  os << '\n';
}

// ---------------------------------------------------------------------------
// Config

inline std::string to_string(Variant v) {
  return v == Variant::pgd ? "pgd" : "scaled_pgd";
}

inline std::string to_string(InitMode m) {
  switch (m) {
    case InitMode::spectral: return "spectral";
    case InitMode::random: return "random";
    case InitMode::provided: return "provided";
  }
  return "?";
}

struct ExperimentConfig {
  /// Empty for a synthetic ground truth, else the TNS3 file to load.
  std::filesystem::path ground_truth_file;
  Index n1 = 0, n2 = 0, n3 = 0;
  Index r = 0;
  std::vector<double> kappas{1.0};
  std::vector<std::uint64_t> seeds;
  Index m0 = 0, mc = 0;
  std::vector<Variant> variants{Variant::scaled_pgd};
  InitMode init = InitMode::spectral;
  double c_eta = 0.8;
  double trunc_C = 9.0;
  SplitMode split = SplitMode::pooled;
  int T = 100;
  double stop_tol = 0.0;
  std::optional<double> mu;
  std::optional<double> xstar_norm;

  bool synthetic() const { return ground_truth_file.empty(); }
};

/// One (variant, kappa) solver setting; each is run once per seed.
struct ExperimentRun {
  Variant variant;
  double kappa;
};

inline std::vector<ExperimentRun> expand_runs(const ExperimentConfig& cfg) {
  std::vector<ExperimentRun> runs;
  for (double kappa : cfg.kappas) {
    for (Variant v : cfg.variants) runs.push_back({v, kappa});
  }
  return runs;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

}  // namespace detail

/// Parse the line-based `key = value` format.  Every malformed line is
/// reported (ParseError); a syntactically clean file then gets all semantic
/// problems reported together (ValidationError).  Relative ground-truth paths
/// are resolved against `base_dir`.
inline ExperimentConfig parse_config(std::string_view text,
                                     const std::filesystem::path& base_dir = {}) {
  using detail::parse_number;
  using detail::split_list;
  using detail::trim;

  ExperimentConfig cfg;
  std::vector<std::string> parse_errors;
  std::map<std::string, int, std::less<>> seen;
  bool synthetic = true;

  int line_no = 0;
  std::string_view rest = text;
  while (!rest.empty()) {
    ++line_no;
    const auto nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    const auto fail = [&](const std::string& msg) {
      parse_errors.push_back("line " + std::to_string(line_no) + ": " + msg);
    };
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail("expected 'key = value'");
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) {
      fail("missing key");
      continue;
    }
    if (value.empty()) {
      fail("missing value for '" + key + "'");
      continue;
    }
    if (const auto it = seen.find(key); it != seen.end()) {
      fail("duplicate key '" + key + "' (first set on line " +
           std::to_string(it->second) + ")");
      continue;
    }
    seen.emplace(key, line_no);

    const auto bad = [&](const char* expected) {
      fail("'" + key + "' expects " + expected + ", got '" + std::string(value) +
           "'");
    };
    const auto get_index = [&](Index& out) {
      long long v = 0;
      if (parse_number(value, v)) {
        out = static_cast<Index>(v);
      } else {
        bad("an integer");
      }
    };
    const auto get_double = [&](double& out) {
      if (!parse_number(value, out) || !std::isfinite(out)) bad("a number");
    };

    if (key == "n1") {
      get_index(cfg.n1);
    } else if (key == "n2") {
      get_index(cfg.n2);
    } else if (key == "n3") {
      get_index(cfg.n3);
    } else if (key == "r") {
      get_index(cfg.r);
    } else if (key == "m0") {
      get_index(cfg.m0);
    } else if (key == "mc") {
      get_index(cfg.mc);
    } else if (key == "T") {
      Index t = 0;
      get_index(t);
      cfg.T = static_cast<int>(t);
    } else if (key == "c_eta") {
      get_double(cfg.c_eta);
    } else if (key == "trunc_C") {
      get_double(cfg.trunc_C);
    } else if (key == "stop_tol") {
      get_double(cfg.stop_tol);
    } else if (key == "mu") {
      double v = 0;
      get_double(v);
      cfg.mu = v;
    } else if (key == "xstar_norm") {
      double v = 0;
      get_double(v);
      cfg.xstar_norm = v;
    } else if (key == "kappa") {
      cfg.kappas.clear();
      for (auto item : split_list(value)) {
        double v = 0;
        if (!parse_number(item, v) || !std::isfinite(v)) {
          bad("a comma list of numbers");
          break;
        }
        cfg.kappas.push_back(v);
      }
    } else if (key == "seed") {
      cfg.seeds.clear();
      for (auto item : split_list(value)) {
        std::uint64_t v = 0;
        if (!parse_number(item, v)) {
          bad("a comma list of non-negative integers");
          break;
        }
        cfg.seeds.push_back(v);
      }
    } else if (key == "variant") {
      cfg.variants.clear();
      for (auto item : split_list(value)) {
        if (item == "pgd") {
          cfg.variants.push_back(Variant::pgd);
        } else if (item == "scaled_pgd") {
          cfg.variants.push_back(Variant::scaled_pgd);
        } else {
          bad("a comma list of pgd, scaled_pgd");
          break;
        }
      }
    } else if (key == "init") {
      if (value == "spectral") {
        cfg.init = InitMode::spectral;
      } else if (value == "random") {
        cfg.init = InitMode::random;
      } else {
        bad("spectral or random");
      }
    } else if (key == "split") {
      if (value == "true") {
        cfg.split = SplitMode::split;
      } else if (value == "false") {
        cfg.split = SplitMode::pooled;
      } else {
        bad("true or false");
      }
    } else if (key == "ground_truth") {
      if (value == "synthetic") {
        synthetic = true;
      } else if (value.starts_with("file:") && value.size() > 5) {
        synthetic = false;
        std::filesystem::path p(std::string(value.substr(5)));
        cfg.ground_truth_file = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
      } else {
        bad("synthetic or file:<path>");
      }
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  if (!parse_errors.empty()) throw ParseError(std::move(parse_errors));

  std::vector<std::string> problems;
  const auto need = [&](const char* key, bool ok, const char* what) {
    if (!seen.contains(key)) {
      problems.push_back(std::string("missing required key '") + key + "'");
    } else if (!ok) {
      problems.push_back(std::string("'") + key + "' " + what);
    }
  };
  if (synthetic) {
    need("n1", cfg.n1 >= 1, "must be >= 1");
    need("n2", cfg.n2 >= 1, "must be >= 1");
    need("n3", cfg.n3 >= 1, "must be >= 1");
  } else {
    for (const char* key : {"n1", "n2", "n3"}) {
      const Index v = key[1] == '1' ? cfg.n1 : key[1] == '2' ? cfg.n2 : cfg.n3;
      if (seen.contains(key) && v < 1) {
        problems.push_back(std::string("'") + key + "' must be >= 1");
      }
    }
  }
  need("r", cfg.r >= 1, "must be >= 1");
  if (cfg.r >= 1 && cfg.n1 >= 1 && cfg.n2 >= 1 && cfg.r > std::min(cfg.n1, cfg.n2)) {
    problems.push_back("'r' must not exceed min(n1, n2)");
  }
  need("seed", !cfg.seeds.empty(), "needs at least one value");
  need("m0", cfg.m0 >= 1, "must be >= 1");
  need("mc", cfg.mc >= 1, "must be >= 1");
  for (double k : cfg.kappas) {
    if (!(k >= 1.0)) {
      problems.push_back("'kappa' values must be >= 1");
      break;
    }
  }
  if (!(cfg.c_eta > 0.0 && cfg.c_eta <= 0.9)) {
    problems.push_back("'c_eta' must lie in (0, 0.9]");
  }
  if (!(cfg.trunc_C > 0.0)) problems.push_back("'trunc_C' must be > 0");
  if (cfg.T < 1) problems.push_back("'T' must be >= 1");
  if (!(cfg.stop_tol >= 0.0)) problems.push_back("'stop_tol' must be >= 0");
  if (cfg.mu && !(*cfg.mu > 0.0)) problems.push_back("'mu' must be > 0");
  if (cfg.xstar_norm && !(*cfg.xstar_norm > 0.0)) {
    problems.push_back("'xstar_norm' must be > 0");
  }
  if (!problems.empty()) throw ValidationError(std::move(problems));
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

// ---------------------------------------------------------------------------
// Sweeps

/// Seeds for the pieces of one (run, seed) pair, all derived from the
/// experiment seed so that a pair is reproducible on its own.
struct PairSeeds {
  std::uint64_t truth;
  std::uint64_t ensemble;
  std::uint64_t init;
};

inline PairSeeds derive_seeds(std::uint64_t seed) {
  return {seed, detail::mix64(seed ^ 0x656e73656d626c65ULL),
          detail::mix64(seed ^ 0x696e697469616c73ULL)};
}

struct RunOptions {
  std::filesystem::path out_dir = "results";
  int threads = 1;
  bool record_time = true;
};

inline std::string trace_file_name(const ExperimentRun& run, std::uint64_t seed) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "trace_%s_kappa%g_seed%llu.csv",
                to_string(run.variant).c_str(), run.kappa,
                static_cast<unsigned long long>(seed));
  return buf;
}

struct ExperimentReport {
  std::vector<MetricReport> rows;  // ordered by run, then seed
};

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << s) || !out.flush()) {
    throw IoError("cannot write " + path.string());
  }
}

}  // namespace detail

/// Ground truth for one (run, seed) pair.
inline Tensor3d ground_truth_for(const ExperimentConfig& cfg, double kappa,
                                 std::uint64_t seed) {
  if (!cfg.synthetic()) {
    Tensor3d x = io::load_tensor(cfg.ground_truth_file);
    if ((cfg.n1 > 0 && x.n1() != cfg.n1) || (cfg.n2 > 0 && x.n2() != cfg.n2) ||
        (cfg.n3 > 0 && x.n3() != cfg.n3)) {
      throw DimensionMismatch("ground truth file has dims " +
                              to_string(x.dims()) + ", config disagrees");
    }
    return x;
  }
  return generate_ground_truth(
      {cfg.n1, cfg.n2, cfg.n3, cfg.r, kappa, derive_seeds(seed).truth});
}

/// Run one (run, seed) pair and write its trace file.
inline MetricReport run_pair(const ExperimentConfig& cfg, const ExperimentRun& setting,
                             std::uint64_t seed, const RunOptions& opts) {
  const Tensor3d x = ground_truth_for(cfg, setting.kappa, seed);
  const PairSeeds seeds = derive_seeds(seed);

  SolverConfig sc;
  sc.variant = setting.variant;
  sc.r = cfg.r;
  sc.T = cfg.T;
  sc.c_eta = cfg.c_eta;
  sc.kappa = setting.kappa;
  if (cfg.mu) {
    sc.mu = *cfg.mu;
  } else if (tubal_rank(x) <= cfg.r) {
    sc.mu = incoherence(x, cfg.r);
  }
  sc.trunc_C = cfg.trunc_C;
  sc.init = cfg.init;
  sc.split = cfg.split;
  sc.m0 = cfg.m0;
  sc.mc = cfg.mc;
  sc.stop_tol = cfg.stop_tol;
  sc.seed = seeds.init;
  sc.xstar_norm = cfg.xstar_norm ? *cfg.xstar_norm : spectral_norm(x);
  sc.record_time = opts.record_time;

  const auto schedule = schedule_for(sc);
  const auto e =
      generate_ensemble(x.n1(), x.n2(), x.n3(), schedule.m_total(), seeds.ensemble);
  const auto y = measure(e, x);

  const auto trace_path = opts.out_dir / trace_file_name(setting, seed);
  const auto write_trace = [&](const RecoveryTrace& trace) {
    std::ostringstream os;
    write_trace_csv(os, trace);
    detail::write_text(trace_path, os.str());
  };

  RecoveryResult result;
  try {
    result = tubalcs::run(&x, e, y, sc);
  } catch (const NonFinite& err) {
    write_trace(err.trace());
    throw;
  }
  write_trace(result.trace);

  MetricReport m = summarize(result.trace);
  m.variant = to_string(setting.variant);
  m.init = to_string(cfg.init);
  m.kappa = setting.kappa;
  m.seed = seed;
  const auto [lo, hi] = std::minmax_element(x.data().begin(), x.data().end());
  if (*lo >= 0.0 && *hi <= 1.0) m.psnr = psnr(x, result.state.reconstruct(), 1.0);
  return m;
}

/// Every (run, seed) pair of the config.  Pairs may run on several threads;
/// output is identical to a serial run because each pair owns its files and
/// the summary is written in pair order.  When a pair fails, the summary
/// of all pairs finished so far is written before the error propagates.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                       const RunOptions& opts = {}) {
  std::filesystem::create_directories(opts.out_dir);
  const auto runs = expand_runs(cfg);
  struct Pair {
    ExperimentRun run;
    std::uint64_t seed;
  };
  std::vector<Pair> pairs;
  for (const auto& run : runs) {
    for (auto seed : cfg.seeds) pairs.push_back({run, seed});
  }

  std::vector<std::optional<MetricReport>> slots(pairs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::size_t first_error_index = pairs.size();
  std::mutex error_mutex;

  const auto worker = [&] {
    while (!failed.load()) {
      const std::size_t k = next.fetch_add(1);
      if (k >= pairs.size()) return;
      try {
        slots[k] = run_pair(cfg, pairs[k].run, pairs[k].seed, opts);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (k < first_error_index) {
          first_error_index = k;
          first_error = std::current_exception();
        }
        failed.store(true);
      }
    }
  };
  const int threads =
      std::max(1, std::min<int>(opts.threads, static_cast<int>(pairs.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  ExperimentReport report;
  std::ostringstream summary;
  summary << kSummaryHeader << '\n';
  for (const auto& slot : slots) {
    if (!slot) continue;
    write_summary_row(summary, *slot);
    report.rows.push_back(*slot);
  }
  detail::write_text(opts.out_dir / "summary.csv", summary.str());
  if (first_error) std::rethrow_exception(first_error);
  return report;
}

}  // namespace tubalcs
