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


#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "test_support.hpp"

namespace tubalcs {
namespace {

using testing::diag_tube;
using testing::random_orthogonal;
using testing::random_tensor;
using testing::rel_diff;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Ground truth, its left basis and a pooled measurement set.
struct Problem {
  Tensor3d x;
  Tensor3d u_star;
  SensingEnsemble e;
  MeasurementSet y;
};

Problem make_problem(const GroundTruthSpec& spec, Index m, std::uint64_t seed) {
  auto x = generate_ground_truth(spec);
  auto u = t_svd(x, spec.r).U;
  auto e = generate_ensemble(spec.n1, spec.n2, spec.n3, m, seed);
  auto y = measure(e, x);
  return {std::move(x), std::move(u), std::move(e), std::move(y)};
}

// --- truncated spectral initialization -----------------------------------------

TEST(TruncationThreshold, Examples) {
  MeasurementSet y;
  y.values = Eigen::MatrixXd::Zero(4, 3);
  EXPECT_EQ(truncation_threshold(y, {0, 4}, 9, 1, 1), 0.0);

  y.values = Eigen::MatrixXd::Ones(4, 3);
  EXPECT_DOUBLE_EQ(truncation_threshold(y, {0, 4}, 9, 1, 1), 9.0);
  EXPECT_DOUBLE_EQ(truncation_threshold(y, {0, 4}, 9, 2, 3), 9.0 * 4 * 9);

  std::mt19937_64 rng(1);
  y.values = Eigen::MatrixXd::Random(6, 5);
  const double a = truncation_threshold(y, {1, 5}, 2, 1.5, 1.2);
  y.values *= 2.0;
  EXPECT_NEAR(truncation_threshold(y, {1, 5}, 2, 1.5, 1.2), 4.0 * a, 1e-12 * a);
  EXPECT_THROW(truncation_threshold(y, {2, 2}, 9, 1, 1), InvalidSchedule);
}

TEST(InitTensor, MatchesDirectTruncatedSum) {
  std::mt19937_64 rng(2);
  const auto e = generate_ensemble(3, 4, 2, 9, 5);
  const auto y = measure(e, random_tensor(rng, 3, 4, 2));
  const double alpha = 1.0;
  const auto x0 = init_tensor(e, y, {2, 9}, alpha);
  for (Index i = 0; i < 4; ++i) {
    Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(3, 2);
    for (Index j = 2; j < 9; ++j) {
      if (std::abs(y.values(j, i)) <= 1.0) ref += y.values(j, i) * e.probe(i, j);
    }
    ref /= 7.0;
    EXPECT_LE((x0.lateral(i) - ref).norm(), 1e-12 * (1 + ref.norm()));
  }
}

TEST(SpectralInit, ZeroThresholdIsDegenerate) {
  std::mt19937_64 rng(3);
  const auto e = generate_ensemble(3, 4, 2, 6, 5);
  const auto y = measure(e, random_tensor(rng, 3, 4, 2));
  EXPECT_THROW(spectral_init(e, y, {0, 6}, 0.0, 2), DegenerateInit);
}

TEST(SpectralInit, ExpectedInitRecoversTheSubspace) {
  // E[X0 | alpha] = X* * D with D f-diagonal and positive, so the initial
  // basis spans the column space of X*.
  const auto x = generate_ground_truth({8, 12, 4, 3, 2.0, 4});
  std::vector<double> d(12);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = 0.5 + 0.1 * static_cast<double>(i);
  const auto u0 = init_basis(t_product(x, diag_tube(d, 4)), 3);
  EXPECT_LE(orthogonality_defect(u0), 1e-8);
  EXPECT_LE(subspace_distance(u0, t_svd(x, 3).U), 1e-8);
}

TEST(SpectralInit, RejectsBadRank) {
  std::mt19937_64 rng(4);
  EXPECT_THROW(init_basis(random_tensor(rng, 3, 4, 2), 0), DimensionMismatch);
  EXPECT_THROW(init_basis(random_tensor(rng, 3, 4, 2), 4), DimensionMismatch);
}

TEST(SpectralInit, BeatsRandomInitOnDesktopInstances) {
  const Index n1 = 20, n2 = 400, n3 = 20, r = 4, m0 = 200;
  std::vector<double> spectral, random;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = make_problem({n1, n2, n3, r, 1.0, seed}, m0, 1000 + seed);
    const double alpha = truncation_threshold(p.y, {0, m0}, 9.0, 1.0, 1.0);
    const auto u0 = spectral_init(p.e, p.y, {0, m0}, alpha, r);
    EXPECT_LE(orthogonality_defect(u0), 1e-8);
    spectral.push_back(subspace_distance(u0, p.u_star));
    random.push_back(subspace_distance(random_init(n1, r, n3, 2000 + seed), p.u_star));
  }
  EXPECT_LT(median(spectral), median(random));
}

TEST(RandomInit, OrthogonalAndSeeded) {
  const auto u = random_init(6, 2, 5, 9);
  EXPECT_LE(orthogonality_defect(u), 1e-10);
  EXPECT_EQ(u, random_init(6, 2, 5, 9));
  EXPECT_NE(u, random_init(6, 2, 5, 10));
}

// --- V step --------------------------------------------------------------------------

TEST(DesignMatrix, SpectralAssemblyMatchesBcircOracle) {
  std::mt19937_64 rng(5);
  for (Index n3 : {1, 2, 3, 4, 7}) {
    const auto u = random_tensor(rng, 4, 2, n3);
    const auto e = generate_ensemble(4, 1, n3, 11, rng());
    const Eigen::MatrixXd a = e.probes(0, {0, 11});
    const Eigen::MatrixXd ref = oracle::design_matrix(u, a);
    const Eigen::MatrixXd ht =
        design_matrix_transposed(dft_tubes(u), slice_spectra(a, 4, n3));
    EXPECT_LE((ht.transpose() - ref).norm(), 1e-12 * ref.norm()) << "n3=" << n3;
  }
}

TEST(UpdateV, MatchesDenseNormalEquations) {
  std::mt19937_64 rng(6);
  const auto u = random_orthogonal(rng, 4, 2, 3);
  const auto e = generate_ensemble(4, 3, 3, 10, 7);
  const auto y = measure(e, random_tensor(rng, 4, 3, 3));
  for (Index i = 0; i < 3; ++i) {
    const Eigen::MatrixXd h = oracle::design_matrix(u, e.probes(i, {0, 10}));
    const Eigen::VectorXd yi = y.slice(i, {0, 10});
    const Eigen::VectorXd ref = (h * h.transpose()).inverse() * (h * yi);
    const auto v = update_v(u, e, i, {0, 10}, y);
    EXPECT_EQ(v.dims(), (Dims{2, 1, 3}));
    EXPECT_LE((v.flat() - ref).norm(), 1e-9 * ref.norm());
  }
}

TEST(UpdateV, ExactSubspaceRecoversTheSlice) {
  const auto p = make_problem({6, 5, 4, 2, 2.0, 8}, 12, 9);
  for (Index i = 0; i < 5; ++i) {
    const auto v = update_v(p.u_star, p.e, i, {0, 12}, p.y);
    const auto xi = p.x.lateral_range(i, 1);
    EXPECT_LE(rel_diff(t_product(p.u_star, v), xi), 1e-8);
  }
}

TEST(UpdateV, ZeroMeasurementsGiveZero) {
  std::mt19937_64 rng(10);
  const auto u = random_orthogonal(rng, 4, 2, 3);
  const auto e = generate_ensemble(4, 2, 3, 8, 1);
  const auto y = measure(e, Tensor3d(4, 2, 3));
  EXPECT_EQ(update_v(u, e, 1, {0, 8}, y).flat().norm(), 0.0);
}

TEST(UpdateV, ResidualIsOrthogonalToTheRowSpace) {
  std::mt19937_64 rng(11);
  const auto u = random_orthogonal(rng, 5, 2, 4);
  const auto e = generate_ensemble(5, 1, 4, 20, 2);
  const auto y = measure(e, random_tensor(rng, 5, 1, 4));
  const Eigen::MatrixXd a = e.probes(0, {0, 20});
  const Eigen::VectorXd yi = y.slice(0, {0, 20});
  const auto sol = update_v(dft_tubes(u), slice_spectra(a, 5, 4), yi);
  const Eigen::MatrixXd h = oracle::design_matrix(u, a);
  EXPECT_LE((h * sol.residual).norm(), 1e-8 * h.norm() * yi.norm());
}

TEST(UpdateV, Errors) {
  std::mt19937_64 rng(12);
  const auto u = random_orthogonal(rng, 4, 2, 3);
  const auto e = generate_ensemble(4, 2, 3, 8, 1);
  const auto y = measure(e, random_tensor(rng, 4, 2, 3));
  EXPECT_THROW(update_v(u, e, 0, {0, 5}, y), UnderdeterminedSystem);
  EXPECT_THROW(update_v(Tensor3d(4, 2, 3), e, 0, {0, 8}, y), SingularSystem);
}

TEST(UpdateVAll, CacheGivesTheSameAnswer) {
  std::mt19937_64 rng(13);
  const auto u = random_orthogonal(rng, 4, 2, 3);
  const auto e = generate_ensemble(4, 6, 3, 9, 3);
  const auto y = measure(e, random_tensor(rng, 4, 6, 3));
  const auto cache = build_spectra_cache(e, {0, 9});
  const auto a = update_v_all(u, e, {0, 9}, y);
  const auto b = update_v_all(u, e, {0, 9}, y, &cache);
  EXPECT_EQ(a.V, b.V);
  EXPECT_EQ(a.residual, b.residual);
  for (Index i = 0; i < 6; ++i) {
    EXPECT_EQ(a.V.lateral_range(i, 1), update_v(u, e, i, {0, 9}, y));
  }
}

// --- gradient ---------------------------------------------------------------------

TEST(Gradient, VanishesAtTheTruth) {
  const auto p = make_problem({4, 6, 3, 2, 2.0, 14}, 10, 15);
  const auto v = t_product(conj_transpose(p.u_star), p.x);
  const auto g = gradient_u(p.u_star, v, p.e, {0, 10}, p.y);
  EXPECT_LE(g.frobenius_norm(), 1e-10);
}

TEST(Gradient, MatchesFiniteDifferencesOnCoordinates) {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 20; ++trial) {
    const auto u = random_tensor(rng, 3, 2, 2);
    const auto v = random_tensor(rng, 2, 3, 2);
    const auto e = generate_ensemble(3, 3, 2, 6, rng());
    const auto y = measure(e, random_tensor(rng, 3, 3, 2));
    const auto g = gradient_u(u, v, e, {0, 6}, y);
    for (int c = 0; c < 5; ++c) {
      Tensor3d dir(3, 2, 2);
      const auto idx = static_cast<std::size_t>(testing::uniform(rng, 0, 11));
      dir.data()[idx] = 1.0;
      const double h = 1e-6;
      const double fd = (loss(u + h * dir, v, e, {0, 6}, y) -
                         loss(u - h * dir, v, e, {0, 6}, y)) /
                        (2 * h);
      const double an = g.data()[idx];
      EXPECT_LE(std::abs(fd - an), 1e-5 * std::max(std::abs(an), 1.0));
    }
  }
}

TEST(Gradient, ExpectationOverEnsembles) {
  // Averaged over fresh ensembles, grad / 2 approaches m (X - X*) * V^c.
  std::mt19937_64 rng(17);
  const Index n1 = 4, n2 = 5, n3 = 3, r = 2, m = 10;
  const auto x_star = generate_ground_truth({n1, n2, n3, r, 2.0, 18});
  const auto u = random_orthogonal(rng, n1, r, n3);
  const auto v = random_tensor(rng, r, n2, n3);
  Tensor3d mean(n1, r, n3);
  const int ensembles = 200;
  for (int s = 0; s < ensembles; ++s) {
    const auto e = generate_ensemble(n1, n2, n3, m, 5000 + s);
    mean += gradient_u(u, v, e, {0, m}, measure(e, x_star));
  }
  mean *= 0.5 / ensembles;
  const auto expected = static_cast<double>(m) *
                        t_product(t_product(u, v) - x_star, conj_transpose(v));
  EXPECT_LE(rel_diff(mean, expected), 0.10);
}

TEST(Gradient, DimensionMismatch) {
  const auto e = generate_ensemble(3, 3, 2, 4, 1);
  const auto y = measure(e, Tensor3d(3, 3, 2));
  EXPECT_THROW(gradient_u(Tensor3d(3, 2, 2), Tensor3d(1, 3, 2), e, {0, 4}, y),
               DimensionMismatch);
  EXPECT_THROW(gradient_u(Tensor3d(3, 2, 2), Tensor3d(2, 4, 2), e, {0, 4}, y),
               DimensionMismatch);
}

// --- U step ------------------------------------------------------------------------

TEST(StepU, ZeroGradientKeepsTheSubspace) {
  std::mt19937_64 rng(19);
  const auto u = random_orthogonal(rng, 6, 2, 4);
  const auto v = random_tensor(rng, 2, 7, 4);
  for (auto variant : {Variant::pgd, Variant::scaled_pgd}) {
    const auto out = step_u(u, Tensor3d(6, 2, 4), v, 0.1, variant);
    EXPECT_LE(subspace_distance(out, u), 1e-9);
  }
}

TEST(StepU, IdentityPreconditionerMatchesPlainStep) {
  std::mt19937_64 rng(20);
  const auto u = random_orthogonal(rng, 6, 2, 4);
  const auto v = conj_transpose(random_orthogonal(rng, 7, 2, 4));
  EXPECT_LE(rel_diff(preconditioner(v), identity_tensor<double>(2, 4)), 1e-10);
  const auto g = random_tensor(rng, 6, 2, 4);
  EXPECT_LE(rel_diff(step_u(u, g, v, 0.05, Variant::scaled_pgd),
                     step_u(u, g, v, 0.05, Variant::pgd)),
            1e-10);
}

TEST(StepU, PreconditionerInvertsTheGram) {
  std::mt19937_64 rng(21);
  const auto v = random_tensor(rng, 3, 8, 5);
  const auto gram = t_product(v, conj_transpose(v));
  EXPECT_LE(rel_diff(t_product(gram, preconditioner(v)), identity_tensor<double>(3, 5)),
            1e-9);
}

TEST(StepU, PlainStepFollowsHalfGradient) {
  std::mt19937_64 rng(22);
  const auto u = random_orthogonal(rng, 5, 2, 3);
  const auto v = random_tensor(rng, 2, 4, 3);
  const auto g = random_tensor(rng, 5, 2, 3);
  const auto expected = t_qr(u - 0.3 * (0.5 * g)).Q;
  EXPECT_LE(rel_diff(step_u(u, g, v, 0.3, Variant::pgd), expected), 1e-12);
}

TEST(StepU, OrthogonalAfterEveryStep) {
  const auto p = make_problem({8, 40, 4, 2, 3.0, 43}, 30, 44);
  const ProbeRange all{0, 30};
  for (auto variant : {Variant::pgd, Variant::scaled_pgd}) {
    Tensor3d u = random_init(8, 2, 4, 45);
    for (int t = 0; t < 30; ++t) {
      const auto v = update_v_all(u, p.e, all, p.y).V;
      u = step_u(u, gradient_u(u, v, p.e, all, p.y), v, 0.8 / 30, variant);
      const auto gram = t_product(conj_transpose(u), u);
      ASSERT_LE((gram - identity_tensor<double>(2, 4)).frobenius_norm(),
                1e-8 * std::sqrt(2.0 * 4.0))
          << "t=" << t;
    }
  }
}

TEST(StepU, Errors) {
  std::mt19937_64 rng(23);
  const auto u = random_orthogonal(rng, 5, 2, 3);
  const auto g = random_tensor(rng, 5, 2, 3);
  EXPECT_THROW(step_u(u, g, Tensor3d(2, 4, 3), 0.1, Variant::scaled_pgd),
               SingularPreconditioner);
  EXPECT_THROW(step_u(u, g, random_tensor(rng, 2, 4, 3), 0.0, Variant::pgd),
               InvalidSpec);
  EXPECT_THROW(step_u(u, random_tensor(rng, 5, 1, 3), random_tensor(rng, 2, 4, 3),
                      0.1, Variant::pgd),
               DimensionMismatch);
}

// --- driver -------------------------------------------------------------------------

SolverConfig small_config(Variant variant, Index r, Index m0, Index mc, int T) {
  SolverConfig cfg;
  cfg.variant = variant;
  cfg.r = r;
  cfg.m0 = m0;
  cfg.mc = mc;
  cfg.T = T;
  cfg.record_time = false;
  return cfg;
}

TEST(Run, ProvidedTruthBasisNeedsOneSolve) {
  const auto p = make_problem({8, 30, 5, 3, 3.0, 24}, 15, 25);
  auto cfg = small_config(Variant::scaled_pgd, 3, 15, 15, 0);
  cfg.init = InitMode::provided;
  cfg.U0 = p.u_star;
  const auto res = run(&p.x, p.e, p.y, cfg);
  ASSERT_EQ(res.trace.size(), 1u);
  EXPECT_EQ(res.iterations, 0);
  EXPECT_LE(res.trace.back().rel_err, 1e-8);
  EXPECT_LE(rel_diff(res.state.reconstruct(), p.x), 1e-8);
}

TEST(Run, ScaledConvergesAndDecreases) {
  const auto p = make_problem({10, 80, 4, 2, 1.0, 26}, 80, 27);
  auto cfg = small_config(Variant::scaled_pgd, 2, 80, 40, 200);
  cfg.stop_tol = 1e-7;
  const auto res = run(&p.x, p.e, p.y, cfg);
  const auto& rows = res.trace.rows;
  EXPECT_LE(rows.back().rel_err, 1e-6);
  EXPECT_LT(rows.size(), 200u);
  for (std::size_t t = 3; t < rows.size(); ++t) {
    EXPECT_LT(rows[t].rel_err, rows[t - 1].rel_err) << "t=" << t;
  }
  for (const auto& row : rows) {
    EXPECT_TRUE(std::isfinite(row.rel_err) && std::isfinite(row.dis) &&
                std::isfinite(row.residual));
    EXPECT_EQ(row.elapsed_ms, 0.0);
  }
  EXPECT_LE(orthogonality_defect(res.state.U), 1e-8);
}

TEST(Run, PlainStepSlowsDownWithKappa) {
  const auto iterations_to = [](double kappa, std::uint64_t seed) {
    const auto p = make_problem({10, 80, 4, 2, kappa, seed}, 80, seed + 100);
    auto cfg = small_config(Variant::pgd, 2, 80, 40, 400);
    cfg.kappa = kappa;
    cfg.stop_tol = 1e-4;
    cfg.xstar_norm = spectral_norm(p.x);
    return static_cast<double>(run(&p.x, p.e, p.y, cfg).iterations);
  };
  std::vector<double> k1, k4;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    k1.push_back(iterations_to(1.0, seed));
    k4.push_back(iterations_to(4.0, seed));
  }
  EXPECT_GT(median(k4), median(k1));
}

TEST(Run, DistanceNonincreasingAfterWarmup) {
  int monotone = 0;
  const Index n1 = 8, n2 = 60, n3 = 4, r = 2;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = make_problem({n1, n2, n3, r, 1.0, 300 + seed}, 60, 400 + seed);
    auto cfg = small_config(Variant::pgd, r, 60, 3 * r * n3, 40);
    cfg.xstar_norm = spectral_norm(p.x);
    const auto rows = run(&p.x, p.e, p.y, cfg).trace.rows;
    bool ok = true;
    for (std::size_t t = 3; t < rows.size(); ++t) {
      // Once at machine precision the distance only jitters.
      if (rows[t - 1].dis < 1e-12) break;
      ok = ok && rows[t].dis <= rows[t - 1].dis * (1 + 1e-9);
    }
    monotone += ok ? 1 : 0;
  }
  EXPECT_GE(monotone, 19);
}

TEST(Run, SplitModeConsumesDisjointGroups) {
  const Index n1 = 6, n2 = 20, n3 = 3, r = 2;
  const int T = 6;
  const auto sched = build_schedule(T, 30, 20, SplitMode::split);
  const auto x = generate_ground_truth({n1, n2, n3, r, 1.0, 31});
  const auto e = generate_ensemble(n1, n2, n3, sched.m_total(), 32);
  auto y = measure(e, x);
  assign_groups(y, sched);
  auto cfg = small_config(Variant::scaled_pgd, r, 30, 20, T);
  cfg.split = SplitMode::split;
  const auto res = run(&x, e, y, cfg);
  EXPECT_EQ(res.trace.size(), static_cast<std::size_t>(T));
  EXPECT_LT(res.trace.back().rel_err, res.trace.rows.front().rel_err);

  // Fewer probes than the split schedule needs.
  const auto short_e = generate_ensemble(n1, n2, n3, sched.m_total() - 1, 32);
  EXPECT_THROW(run(&x, short_e, measure(short_e, x), cfg), InvalidSchedule);
}

TEST(Run, DeterministicForFixedSeeds) {
  const auto p = make_problem({6, 30, 3, 2, 2.0, 33}, 40, 34);
  auto cfg = small_config(Variant::pgd, 2, 40, 20, 15);
  cfg.init = InitMode::random;
  cfg.seed = 5;
  const auto a = run(&p.x, p.e, p.y, cfg);
  const auto b = run(&p.x, p.e, p.y, cfg);
  std::ostringstream sa, sb;
  write_trace_csv(sa, a.trace);
  write_trace_csv(sb, b.trace);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(a.state.U, b.state.U);
}

TEST(Run, StopsOnRelativeChangeWithoutTruth) {
  const auto p = make_problem({6, 40, 3, 2, 1.0, 35}, 40, 36);
  auto cfg = small_config(Variant::scaled_pgd, 2, 40, 30, 300);
  cfg.stop_tol = 1e-9;
  const auto res = run(nullptr, p.e, p.y, cfg);
  EXPECT_LT(res.iterations, 299);
  EXPECT_TRUE(std::isnan(res.trace.back().rel_err));
  EXPECT_LE(rel_diff(res.state.reconstruct(), p.x), 1e-6);
}

TEST(Run, NonFiniteAbortsWithTrace) {
  auto p = make_problem({4, 6, 2, 1, 1.0, 37}, 10, 38);
  p.y.values(3, 2) = std::nan("");
  auto cfg = small_config(Variant::scaled_pgd, 1, 10, 10, 5);
  cfg.init = InitMode::random;
  try {
    run(&p.x, p.e, p.y, cfg);
    FAIL() << "expected NonFinite";
  } catch (const NonFinite& err) {
    EXPECT_EQ(err.trace().size(), 1u);
  }
}

TEST(Run, ConfigErrors) {
  const auto p = make_problem({4, 6, 2, 2, 1.0, 39}, 10, 40);
  auto cfg = small_config(Variant::scaled_pgd, 2, 10, 10, 5);
  auto bad = cfg;
  bad.c_eta = 0.95;
  EXPECT_THROW(run(&p.x, p.e, p.y, bad), InvalidSpec);
  bad = cfg;
  bad.init = InitMode::provided;
  EXPECT_THROW(run(&p.x, p.e, p.y, bad), InvalidSpec);
  bad.U0 = Tensor3d(4, 2, 2);
  EXPECT_THROW(run(&p.x, p.e, p.y, bad), NotOrthogonal);
  bad.U0 = Tensor3d(4, 1, 2);
  EXPECT_THROW(run(&p.x, p.e, p.y, bad), DimensionMismatch);
  bad = cfg;
  bad.r = 7;
  EXPECT_THROW(run(&p.x, p.e, p.y, bad), InvalidSpec);
  bad = cfg;
  bad.mc = 11;
  EXPECT_THROW(run(&p.x, p.e, p.y, bad), InvalidSchedule);
  const Tensor3d wrong(4, 6, 3);
  EXPECT_THROW(run(&wrong, p.e, p.y, cfg), DimensionMismatch);
}

TEST(Run, PlainStepSizeUsesTheNormEstimate) {
  const auto p = make_problem({4, 6, 2, 2, 1.0, 41}, 12, 42);
  auto cfg = small_config(Variant::pgd, 2, 12, 12, 2);
  cfg.xstar_norm = 2.0;
  EXPECT_DOUBLE_EQ(run(&p.x, p.e, p.y, cfg).eta, 0.8 / 12 / 4);
  cfg.variant = Variant::scaled_pgd;
  EXPECT_DOUBLE_EQ(run(&p.x, p.e, p.y, cfg).eta, 0.8 / 12);
}

TEST(TraceCsv, HeaderAndRows) {
  RecoveryTrace trace;
  trace.rows.push_back({0, 0.5, 0.25, 0.125, 1.5});
  std::ostringstream os;
  write_trace_csv(os, trace);
  EXPECT_EQ(os.str(), "iter,rel_err,dis,residual,elapsed_ms\n0,0.5,0.25,0.125,1.500\n");
}

}  // namespace
}  // namespace tubalcs
