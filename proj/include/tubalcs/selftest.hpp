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

// Quick oracle and invariant checks for an installed build (`tubalcs selftest`).

#pragma once

#include <cstdio>
#include <functional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "tubalcs/oracle.hpp"
#include "tubalcs/recovery.hpp"

namespace tubalcs {

struct SelftestResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;  // largest observed error
  double tolerance = 0.0;
};

namespace detail {

inline Tensor3d random_tensor(std::mt19937_64& rng, Index n1, Index n2, Index n3) {
  return gaussian_tensor(n1, n2, n3, rng());
}

inline Index random_dim(std::mt19937_64& rng, Index lo, Index hi) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

}  // namespace detail

inline std::vector<SelftestResult> run_selftest(std::uint64_t seed = 7,
                                                int trials = 25) {
  using detail::random_dim;
  using detail::random_tensor;
  std::mt19937_64 rng(seed);
  std::vector<SelftestResult> out;
  const auto check = [&](std::string name, double tol,
                         const std::function<double()>& trial) {
    SelftestResult res{std::move(name), true, 0.0, tol};
    for (int t = 0; t < trials; ++t) res.worst = std::max(res.worst, trial());
    res.passed = res.worst <= tol;
    out.push_back(res);
  };

  check("t_product matches bcirc oracle", 1e-10, [&] {
    const Index n1 = random_dim(rng, 1, 6), n2 = random_dim(rng, 1, 6);
    const Index n4 = random_dim(rng, 1, 6), n3 = random_dim(rng, 1, 5);
    const auto a = random_tensor(rng, n1, n2, n3);
    const auto b = random_tensor(rng, n2, n4, n3);
    const auto ref = oracle::t_product(a, b);
    return (t_product(a, b) - ref).frobenius_norm() /
           std::max(ref.frobenius_norm(), 1e-300);
  });

  check("dft/idft round trip", 1e-12, [&] {
    const auto a = random_tensor(rng, random_dim(rng, 1, 6), random_dim(rng, 1, 6),
                                 random_dim(rng, 1, 8));
    return (idft_tubes(dft_tubes(a)) - a).frobenius_norm() / a.frobenius_norm();
  });

  check("spectral norm matches bcirc SVD", 1e-9, [&] {
    const auto a = random_tensor(rng, random_dim(rng, 1, 6), random_dim(rng, 1, 6),
                                 random_dim(rng, 1, 5));
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(oracle::bcirc(a));
    const double ref = svd.singularValues()(0);
    return std::abs(spectral_norm(a) - ref) / ref;
  });

  check("t-SVD reconstruction and orthogonality", 1e-9, [&] {
    const auto a = random_tensor(rng, random_dim(rng, 1, 6), random_dim(rng, 1, 6),
                                 random_dim(rng, 1, 5));
    const auto f = t_svd(a);
    const double rec = (t_product(t_product(f.U, f.S), conj_transpose(f.V)) - a)
                           .frobenius_norm() /
                       a.frobenius_norm();
    return std::max({rec, orthogonality_defect(f.U), orthogonality_defect(f.V)});
  });

  check("t-QR reconstruction and orthogonality", 1e-9, [&] {
    const auto a = random_tensor(rng, random_dim(rng, 1, 6), random_dim(rng, 1, 6),
                                 random_dim(rng, 1, 5));
    const auto f = t_qr(a);
    const double rec =
        (t_product(f.Q, f.R) - a).frobenius_norm() / a.frobenius_norm();
    return std::max(rec, orthogonality_defect(f.Q));
  });

  check("V solve matches dense normal equations", 1e-9, [&] {
    const Index n1 = random_dim(rng, 2, 5), n3 = random_dim(rng, 1, 3);
    const Index r = random_dim(rng, 1, std::min<Index>(2, n1));
    const Index m = 3 * r * n3;
    const auto u = t_qr(random_tensor(rng, n1, r, n3)).Q;
    const auto e = generate_ensemble(n1, 1, n3, m, rng());
    const auto y = measure(e, random_tensor(rng, n1, 1, n3));
    const Eigen::MatrixXd a = e.probes(0, {0, m});
    const Eigen::MatrixXd h = oracle::design_matrix(u, a);
    const Eigen::VectorXd yi = y.slice(0, {0, m});
    const Eigen::VectorXd ref = (h * h.transpose()).inverse() * h * yi;
    const auto v = update_v(u, e, 0, {0, m}, y);
    return (v.flat() - ref).norm() / std::max(ref.norm(), 1e-300);
  });

  check("gradient matches finite differences", 1e-5, [&] {
    const Index n1 = 3, r = 2, n2 = 3, n3 = 2, m = 6;
    const auto u = random_tensor(rng, n1, r, n3);
    const auto v = random_tensor(rng, r, n2, n3);
    const auto e = generate_ensemble(n1, n2, n3, m, rng());
    const auto y = measure(e, random_tensor(rng, n1, n2, n3));
    const ProbeRange all{0, m};
    const auto g = gradient_u(u, v, e, all, y);
    const auto dir = random_tensor(rng, n1, r, n3);
    const double h = 1e-6;
    const double fd = (loss(u + h * dir, v, e, all, y) -
                       loss(u - h * dir, v, e, all, y)) /
                      (2 * h);
    const double an = g.flat().dot(dir.flat());
    return std::abs(fd - an) / std::max(std::abs(an), 1e-12);
  });

  return out;
}

/// Prints one line per check; returns true when all pass.
inline bool report_selftest(std::ostream& os,
                            const std::vector<SelftestResult>& results) {
  bool ok = true;
  char buf[256];
  for (const auto& r : results) {
    std::snprintf(buf, sizeof buf, "%-4s %-42s worst %.3e (tol %.0e)\n",
                  r.passed ? "ok" : "FAIL", r.name.c_str(), r.worst, r.tolerance);
    os << buf;
    ok = ok && r.passed;
  }
  return ok;
}

}  // namespace tubalcs
