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

// Alternating minimization for locally sensed low-tubal-rank tensors.
//
// The unknown is factored as X = U * V with U (n1 x r x n3) orthogonal and
// V (r x n2 x n3).  Each iteration solves the per-slice least-squares problem
// for V exactly, then takes one (optionally preconditioned) gradient step on
// U followed by a t-QR retraction.  Initialization is the truncated spectral
// estimate, a random orthogonal tensor, or a caller-supplied basis.

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include "tubalcs/algebra.hpp"
#include "tubalcs/sensing.hpp"
#include "tubalcs/synthetic.hpp"

namespace tubalcs {

enum class Variant { pgd, scaled_pgd };
enum class InitMode { spectral, random, provided };

struct SolverConfig {
  Variant variant = Variant::scaled_pgd;
  Index r = 1;
  /// Iteration budget in the sense of the sample-splitting schedule: at most
  /// T - 1 U steps (and T V solves) are executed.
  int T = 100;
  double c_eta = 0.8;
  /// Threshold parameters of the truncated initialization.
  double kappa = 1.0;
  double mu = 1.0;
  double trunc_C = 9.0;
  InitMode init = InitMode::spectral;
  std::optional<Tensor3d> U0;
  SplitMode split = SplitMode::pooled;
  Index m0 = 1;
  Index mc = 1;
  /// Relative error (ground truth known) or relative change of X between
  /// iterations (unknown) at which the loop stops; 0 disables early exit.
  double stop_tol = 0.0;
  /// Seed of the random initialization.
  std::uint64_t seed = 0;
  /// ||X*|| used by the plain step size; estimated from the initialization
  /// tensor when absent.
  std::optional<double> xstar_norm;
  bool record_time = true;
};

inline void validate(const SolverConfig& cfg) {
  if (cfg.r < 1) throw InvalidSpec("solver: r must be >= 1");
  if (cfg.T < 0) throw InvalidSpec("solver: T must be >= 0");
  if (!(cfg.c_eta > 0.0 && cfg.c_eta <= 0.9)) {
    throw InvalidSpec("solver: c_eta must lie in (0, 0.9]");
  }
  if (!(cfg.trunc_C > 0.0)) throw InvalidSpec("solver: trunc_C must be > 0");
  if (!(cfg.kappa >= 1.0) || !(cfg.mu > 0.0)) {
    throw InvalidSpec("solver: need kappa >= 1 and mu > 0");
  }
  if (cfg.m0 < 1 || cfg.mc < 1) throw InvalidSpec("solver: m0, mc must be >= 1");
  if (cfg.init == InitMode::provided && !cfg.U0) {
    throw InvalidSpec("solver: init = provided requires U0");
  }
  if (cfg.xstar_norm && !(*cfg.xstar_norm > 0.0)) {
    throw InvalidSpec("solver: xstar_norm must be > 0");
  }
}

inline SplitSchedule schedule_for(const SolverConfig& cfg) {
  return build_schedule(std::max(cfg.T, 1), cfg.m0, cfg.mc, cfg.split);
}

struct FactorState {
  Tensor3d U;  // n1 x r x n3, orthogonal
  Tensor3d V;  // r x n2 x n3

  Tensor3d reconstruct() const { return t_product(U, V); }
};

struct TraceRow {
  int iter = 0;
  double rel_err = std::numeric_limits<double>::quiet_NaN();
  double dis = std::numeric_limits<double>::quiet_NaN();
  /// ||H^c v - y|| / ||y|| of the V solve, pooled over slices.
  double residual = std::numeric_limits<double>::quiet_NaN();
  double elapsed_ms = 0.0;
};

struct RecoveryTrace {
  std::vector<TraceRow> rows;

  std::size_t size() const noexcept { return rows.size(); }
  const TraceRow& back() const { return rows.back(); }
};

/// Trace CSV: iter, rel_err, dis, residual, elapsed_ms.
inline void write_trace_csv(std::ostream& os, const RecoveryTrace& trace) {
  os << "iter,rel_err,dis,residual,elapsed_ms\n";
  char buf[160];
  for (const auto& r : trace.rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.3f\n", r.iter,
                  r.rel_err, r.dis, r.residual, r.elapsed_ms);
    os << buf;
  }
}

/// Thrown when an iterate stops being finite; carries the trace so far.
class NonFinite : public Error {
 public:
  NonFinite(const std::string& what, RecoveryTrace trace)
      : Error(what), trace_(std::move(trace)) {}
  const RecoveryTrace& trace() const noexcept { return trace_; }

 private:
  RecoveryTrace trace_;
};

// ---------------------------------------------------------------------------
// Stage I: truncated spectral initialization

/// alpha = C kappa^2 mu^2 * mean(y^2) over the threshold probes of all slices.
inline double truncation_threshold(const MeasurementSet& y, ProbeRange range,
                                   double C, double kappa, double mu) {
  if (range.size() < 1 || y.n2() < 1) {
    throw InvalidSchedule("truncation_threshold: no measurements");
  }
  const double sum_sq =
      y.values.middleRows(range.begin, range.size()).squaredNorm();
  return C * kappa * kappa * mu * mu * sum_sq /
         static_cast<double>(range.size() * y.n2());
}

/// X0(:, i, :) = (1/m0) sum_j y_ji A_i(:, j, :) 1{|y_ji| <= sqrt(alpha)}.
inline Tensor3d init_tensor(const SensingEnsemble& e, const MeasurementSet& y,
                            ProbeRange range, double alpha) {
  const double bound = std::sqrt(alpha);
  const double scale = 1.0 / static_cast<double>(range.size());
  Tensor3d x0(e.n1(), e.n2(), e.n3());
  for (Index i = 0; i < e.n2(); ++i) {
    Eigen::VectorXd w = y.slice(i, range);
    for (Index j = 0; j < w.size(); ++j) {
      w(j) = std::abs(w(j)) <= bound ? w(j) * scale : 0.0;
    }
    e.with_probes(i, range, [&](const Eigen::Ref<const Eigen::MatrixXd>& a) {
      const Eigen::VectorXd col = a * w;
      x0.lateral(i) = Eigen::Map<const Eigen::MatrixXd>(col.data(), e.n1(), e.n3());
    });
  }
  return x0;
}

/// Top-r left singular tensor of the initialization tensor.  The leading
/// columns of an unpivoted t-QR only span the first r slices of X0, which
/// carry almost no information about the dominant subspace.
inline Tensor3d init_basis(const Tensor3d& x0, Index r) {
  if (r < 1 || r > std::min(x0.n1(), x0.n2())) {
    throw DimensionMismatch("init_basis: r must lie in [1, min(n1, n2)]");
  }
  return t_svd(x0, r).U;
}

inline Tensor3d spectral_init(const SensingEnsemble& e, const MeasurementSet& y,
                              ProbeRange range, double alpha, Index r) {
  const Tensor3d x0 = init_tensor(e, y, range, alpha);
  if (x0.frobenius_norm() == 0.0) {
    throw DegenerateInit("spectral_init: every measurement was truncated");
  }
  return init_basis(x0, r);
}

/// Orthogonal basis from an i.i.d. Gaussian n1 x r x n3 tensor.
inline Tensor3d random_init(Index n1, Index r, Index n3, std::uint64_t seed) {
  return t_qr(gaussian_tensor(n1, r, n3, seed)).Q;
}

// ---------------------------------------------------------------------------
// V step

/// Half-spectrum of the probes of one slice: bins[k] is m x n1 and holds the
/// k-th DFT bin of every probe tube, probe j in row j.
struct SliceSpectra {
  std::vector<Eigen::MatrixXcd> bins;
};

inline SliceSpectra slice_spectra(const Eigen::Ref<const Eigen::MatrixXd>& probes,
                                  Index n1, Index n3) {
  const Index h = half_spectrum(n3);
  const Index m = probes.cols();
  const auto f = detail::forward_dft_matrix<double>(n3, h);
  SliceSpectra out;
  out.bins.assign(static_cast<std::size_t>(h), Eigen::MatrixXcd::Zero(m, n1));
  Eigen::MatrixXd re(m, n1), im(m, n1);
  for (Index k = 0; k < h; ++k) {
    re.setZero();
    im.setZero();
    for (Index n = 0; n < n3; ++n) {
      const auto block = probes.middleRows(n1 * n, n1).transpose();
      re.noalias() += f(n, k).real() * block;
      im.noalias() += f(n, k).imag() * block;
    }
    auto& bin = out.bins[static_cast<std::size_t>(k)];
    bin.real() = re;
    bin.imag() = im;
  }
  return out;
}

/// Precomputed probe spectra for one probe range of every slice.  Pooled
/// schedules re-read the same probes each iteration, so the transform is
/// paid once per run.
struct SpectraCache {
  ProbeRange range;
  std::vector<SliceSpectra> slices;
};

inline SpectraCache build_spectra_cache(const SensingEnsemble& e,
                                        ProbeRange range) {
  SpectraCache cache{range, {}};
  cache.slices.reserve(static_cast<std::size_t>(e.n2()));
  for (Index i = 0; i < e.n2(); ++i) {
    cache.slices.push_back(e.with_probes(
        i, range, [&](const Eigen::Ref<const Eigen::MatrixXd>& a) {
          return slice_spectra(a, e.n1(), e.n3());
        }));
  }
  return cache;
}

/// H^c for one slice: an m x (r n3) matrix whose row j is Unfold(U^c * A(j)),
/// assembled from the spectra (`u_spec` must hold at least the half spectrum
/// of U).
inline Eigen::MatrixXd design_matrix_transposed(const SpectralTensord& u_spec,
                                                const SliceSpectra& spectra) {
  const Index r = u_spec.n2(), n3 = u_spec.n3();
  const Index h = half_spectrum(n3);
  const Index m = spectra.bins.front().rows();
  const auto w = detail::half_inverse_weights<double>(n3);

  // Column k of `bins` holds vec of the k-th bin of U^c * A(j) (row j); real
  // parts first, then imaginary parts.  One product with the stacked inverse
  // weights then yields every frontal slice, already in Unfold order.
  Eigen::MatrixXd bins(m * r, 2 * h);
  Eigen::MatrixXd weights(2 * h, n3);
  Eigen::MatrixXcd bt(m, r);
  for (Index k = 0; k < h; ++k) {
    bt.noalias() = spectra.bins[static_cast<std::size_t>(k)] *
                   u_spec.slice(k).conjugate();
    // Reshape the destination: imag() views start mid-element and are unaligned.
    bins.col(k).reshaped(m, r) = bt.real();
    bins.col(h + k).reshaped(m, r) = bt.imag();
    weights.row(k) = w.row(k).real();
    weights.row(h + k) = -w.row(k).imag();
  }
  Eigen::MatrixXd ht(m, r * n3);
  ht.reshaped(m * r, n3).noalias() = bins * weights;
  return ht;
}

/// Relative cutoff on |R_ii| below which the V system counts as singular.
inline constexpr double kSingularSystemCutoff = 1e-10;

struct VSolve {
  Eigen::VectorXd v;         // Unfold of the r x 1 x n3 lateral slice
  Eigen::VectorXd residual;  // H^c v - y
};

/// Least-squares solve min_v ||H^c v - y|| through a Householder QR of H^c.
inline VSolve solve_least_squares(const Eigen::MatrixXd& ht,
                                  const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (ht.rows() < ht.cols()) {
    throw UnderdeterminedSystem("update_v: " + std::to_string(ht.rows()) +
                                " probes for " + std::to_string(ht.cols()) +
                                " unknowns");
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(ht);
  const auto diag = qr.matrixQR().diagonal().cwiseAbs();
  if (!(diag.minCoeff() > kSingularSystemCutoff * diag.maxCoeff())) {
    throw SingularSystem("update_v: design matrix is rank deficient");
  }
  VSolve out;
  out.v = qr.solve(y);
  out.residual = ht * out.v - y;
  return out;
}

inline VSolve update_v(const SpectralTensord& u_spec, const SliceSpectra& spectra,
                       const Eigen::Ref<const Eigen::VectorXd>& y) {
  return solve_least_squares(design_matrix_transposed(u_spec, spectra), y);
}

/// V(:, i, :) for one slice, as an r x 1 x n3 tensor.
inline Tensor3d update_v(const Tensor3d& U, const SensingEnsemble& e, Index i,
                         ProbeRange range, const MeasurementSet& y) {
  const auto spectra = e.with_probes(
      i, range, [&](const Eigen::Ref<const Eigen::MatrixXd>& a) {
        return slice_spectra(a, e.n1(), e.n3());
      });
  const auto sol = update_v(dft_tubes(U), spectra, y.slice(i, range));
  return Tensor3d(U.n2(), 1, U.n3(),
                  std::vector<double>(sol.v.data(), sol.v.data() + sol.v.size()));
}

struct VUpdate {
  Tensor3d V;
  double residual = 0.0;  // ||H^c v - y|| / ||y|| over all slices
};

/// V solve for every slice.  `cache` must cover `range` when given.
inline VUpdate update_v_all(const Tensor3d& U, const SensingEnsemble& e,
                            ProbeRange range, const MeasurementSet& y,
                            const SpectraCache* cache = nullptr) {
  const Index r = U.n2(), n3 = U.n3();
  const auto u_spec = dft_tubes(U);
  VUpdate out{Tensor3d(r, e.n2(), n3), 0.0};
  double res_sq = 0.0, y_sq = 0.0;
  for (Index i = 0; i < e.n2(); ++i) {
    const auto yi = y.slice(i, range);
    VSolve sol;
    if (cache != nullptr && cache->range == range) {
      sol = update_v(u_spec, cache->slices[static_cast<std::size_t>(i)], yi);
    } else {
      const auto spectra = e.with_probes(
          i, range, [&](const Eigen::Ref<const Eigen::MatrixXd>& a) {
            return slice_spectra(a, e.n1(), n3);
          });
      sol = update_v(u_spec, spectra, yi);
    }
    out.V.lateral(i) = Eigen::Map<const Eigen::MatrixXd>(sol.v.data(), r, n3);
    res_sq += sol.residual.squaredNorm();
    y_sq += yi.squaredNorm();
  }
  out.residual = y_sq > 0 ? std::sqrt(res_sq / y_sq) : std::sqrt(res_sq);
  return out;
}

// ---------------------------------------------------------------------------
// U step

/// Loss sum_i sum_j (<A_i(j), (U * V)(i)> - y_ji)^2 over `range`.
inline double loss(const Tensor3d& U, const Tensor3d& V, const SensingEnsemble& e,
                   ProbeRange range, const MeasurementSet& y) {
  const Tensor3d x = t_product(U, V);
  double total = 0.0;
  for (Index i = 0; i < e.n2(); ++i) {
    const Eigen::VectorXd xi = lateral_vector(x, i);
    e.with_probes(i, range, [&](const Eigen::Ref<const Eigen::MatrixXd>& a) {
      total += (a.transpose() * xi - y.slice(i, range)).squaredNorm();
    });
  }
  return total;
}

/// Gradient of `loss` in U: 2 T * V^c with T(:, i, :) = sum_j b_ij A_i(:, j, :)
/// and b_i = H^c Unfold(V(i)) - y_i.
inline Tensor3d gradient_u(const Tensor3d& U, const Tensor3d& V,
                           const SensingEnsemble& e, ProbeRange range,
                           const MeasurementSet& y) {
  if (U.n2() != V.n1() || U.n3() != V.n3() || U.n1() != e.n1() ||
      V.n2() != e.n2() || U.n3() != e.n3()) {
    throw DimensionMismatch("gradient_u: factor shapes disagree with ensemble");
  }
  const Tensor3d x = t_product(U, V);
  Tensor3d t(e.n1(), e.n2(), e.n3());
  for (Index i = 0; i < e.n2(); ++i) {
    const Eigen::VectorXd xi = lateral_vector(x, i);
    e.with_probes(i, range, [&](const Eigen::Ref<const Eigen::MatrixXd>& a) {
      const Eigen::VectorXd b = a.transpose() * xi - y.slice(i, range);
      const Eigen::VectorXd ti = a * b;
      t.lateral(i) = Eigen::Map<const Eigen::MatrixXd>(ti.data(), e.n1(), e.n3());
    });
  }
  return 2.0 * t_product(t, conj_transpose(V));
}

/// (V * V^c)^{-1}, computed per spectral slice.
inline Tensor3d preconditioner(const Tensor3d& V) {
  const auto vs = dft_tubes(V);
  try {
    return idft_tubes(
        spectral_inverse(spectral_product(vs, spectral_adjoint(vs))));
  } catch (const SingularTensor& err) {
    throw SingularPreconditioner(std::string("V * V^c not invertible: ") +
                                 err.what());
  }
}

/// Moves along the update direction D = grad / 2 = T * V^c: U - eta * D (pgd)
/// or U - eta * D * (V * V^c)^{-1} (scaled), retracted onto orthogonal tensors
/// by t-QR.  The step sizes c_eta / m_c are calibrated for D, not for grad.
inline Tensor3d step_u(const Tensor3d& U, const Tensor3d& grad, const Tensor3d& V,
                       double eta, Variant variant) {
  if (!(eta > 0.0)) throw InvalidSpec("step_u: eta must be > 0");
  if (grad.dims() != U.dims()) {
    throw DimensionMismatch("step_u: gradient shape differs from U");
  }
  Tensor3d direction = 0.5 * grad;
  if (variant == Variant::scaled_pgd) {
    direction = t_product(direction, preconditioner(V));
  }
  return t_qr(U - eta * direction).Q;
}

// ---------------------------------------------------------------------------
// Driver

struct RecoveryResult {
  FactorState state;
  RecoveryTrace trace;
  double eta = 0.0;
  Index iterations = 0;  // U steps executed
};

/// Ground-truth left factor used for the distance column of the trace.
inline Tensor3d left_singular_basis(const Tensor3d& x, Index r) {
  return t_svd(x, r).U;
}

inline RecoveryResult run(const Tensor3d* x_star, const SensingEnsemble& e,
                          const MeasurementSet& y, const SolverConfig& cfg) {
  validate(cfg);
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const auto elapsed = [&] {
    return cfg.record_time
               ? std::chrono::duration<double, std::milli>(clock::now() - start)
                     .count()
               : 0.0;
  };

  const SplitSchedule sched = schedule_for(cfg);
  if (y.m_total() != e.m_total() || y.n2() != e.n2()) {
    throw DimensionMismatch("run: measurements do not match ensemble");
  }
  if (sched.m_total() > e.m_total()) {
    throw InvalidSchedule("run: schedule needs " +
                          std::to_string(sched.m_total()) +
                          " probes per slice, ensemble has " +
                          std::to_string(e.m_total()));
  }
  if (cfg.r > std::min(e.n1(), e.n2())) {
    throw InvalidSpec("run: r exceeds min(n1, n2)");
  }
  if (x_star != nullptr && x_star->dims() != Dims{e.n1(), e.n2(), e.n3()}) {
    throw DimensionMismatch("run: ground truth shape differs from ensemble");
  }

  std::optional<Tensor3d> x0;
  const auto build_x0 = [&] {
    const double alpha = truncation_threshold(
        y, sched.probes_for(Stage::threshold()), cfg.trunc_C, cfg.kappa, cfg.mu);
    x0 = init_tensor(e, y, sched.probes_for(Stage::init()), alpha);
  };

  Tensor3d U;
  switch (cfg.init) {
    case InitMode::spectral:
      build_x0();
      if (x0->frobenius_norm() == 0.0) {
        throw DegenerateInit("run: every initialization measurement truncated");
      }
      U = init_basis(*x0, cfg.r);
      break;
    case InitMode::random:
      U = random_init(e.n1(), cfg.r, e.n3(), cfg.seed);
      break;
    case InitMode::provided:
      U = *cfg.U0;
      if (U.dims() != Dims{e.n1(), cfg.r, e.n3()}) {
        throw DimensionMismatch("run: provided U0 has the wrong shape");
      }
      if (orthogonality_defect(U) > kOrthogonalityTolerance) {
        throw NotOrthogonal("run: provided U0 is not orthogonal");
      }
      break;
  }

  const Index mc = sched.probes_for(Stage::v_update(0)).size();
  double eta = cfg.c_eta / static_cast<double>(mc);
  if (cfg.variant == Variant::pgd) {
    double norm = 0.0;
    if (cfg.xstar_norm) {
      norm = *cfg.xstar_norm;
    } else {
      if (!x0) build_x0();
      norm = spectral_norm(*x0);
      if (!(norm > 0.0)) throw DegenerateInit("run: cannot estimate ||X*||");
    }
    eta /= norm * norm;
  }

  std::optional<Tensor3d> u_star;
  double x_star_norm = 0.0;
  if (x_star != nullptr) {
    u_star = left_singular_basis(*x_star, cfg.r);
    x_star_norm = x_star->frobenius_norm();
  }

  std::optional<SpectraCache> cache;
  if (sched.mode == SplitMode::pooled) {
    cache = build_spectra_cache(e, sched.probes_for(Stage::v_update(0)));
  }
  const SpectraCache* cache_ptr = cache ? &*cache : nullptr;

  RecoveryResult result;
  result.eta = eta;
  auto vu = update_v_all(U, e, sched.probes_for(Stage::v_update(0)), y, cache_ptr);

  // Records row t and returns U * V.  Non-finite factors are caught before
  // the product, whose inverse transform would reject them as asymmetric.
  const auto record = [&](int t, const Tensor3d& U, const Tensor3d& V,
                          double residual) {
    TraceRow row;
    row.iter = t;
    row.residual = residual;
    row.elapsed_ms = elapsed();
    if (!U.all_finite() || !V.all_finite()) {
      result.trace.rows.push_back(row);
      throw NonFinite("run: non-finite iterate at t = " + std::to_string(t),
                      result.trace);
    }
    Tensor3d X = t_product(U, V);
    if (x_star != nullptr) {
      row.rel_err = x_star_norm > 0 ? (X - *x_star).frobenius_norm() / x_star_norm
                                    : X.frobenius_norm();
      row.dis = subspace_distance(U, *u_star);
    }
    result.trace.rows.push_back(row);
    return X;
  };
  const auto converged = [&](const Tensor3d& X, const Tensor3d* previous) {
    if (!(cfg.stop_tol > 0.0)) return false;
    if (x_star != nullptr) return result.trace.back().rel_err <= cfg.stop_tol;
    if (previous == nullptr) return false;
    const double denom = X.frobenius_norm();
    return denom > 0 && (X - *previous).frobenius_norm() / denom <= cfg.stop_tol;
  };

  Tensor3d X = record(0, U, vu.V, vu.residual);
  bool done = converged(X, nullptr);
  for (int t = 1; t < cfg.T && !done; ++t) {
    const Tensor3d grad =
        gradient_u(U, vu.V, e, sched.probes_for(Stage::u_update(t)), y);
    if (!grad.all_finite()) {
      throw NonFinite("run: non-finite gradient at t = " + std::to_string(t),
                      result.trace);
    }
    U = step_u(U, grad, vu.V, eta, cfg.variant);
    vu = update_v_all(U, e, sched.probes_for(Stage::v_update(t)), y, cache_ptr);
    Tensor3d next = record(t, U, vu.V, vu.residual);
    done = converged(next, &X);
    X = std::move(next);
    result.iterations = t;
  }
  result.state = FactorState{std::move(U), std::move(vu.V)};
  return result;
}

}  // namespace tubalcs
