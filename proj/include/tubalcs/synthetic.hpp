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

#pragma once

#include <cstdint>
#include <random>

#include "tubalcs/algebra.hpp"

namespace tubalcs {

struct GroundTruthSpec {
  Index n1 = 0;
  Index n2 = 0;
  Index n3 = 0;
  Index r = 1;
  double kappa = 1.0;
  std::uint64_t seed = 0;
};

inline void validate(const GroundTruthSpec& s) {
  if (s.n1 < 1 || s.n2 < 1 || s.n3 < 1) {
    throw InvalidSpec("ground truth: dims must be positive");
  }
  if (s.r < 1 || s.r > std::min(s.n1, s.n2)) {
    throw InvalidSpec("ground truth: need 1 <= r <= min(n1, n2)");
  }
  if (!(s.kappa >= 1.0) || !std::isfinite(s.kappa)) {
    throw InvalidSpec("ground truth: kappa must be finite and >= 1");
  }
}

/// I.i.d. standard Gaussian tensor.
inline Tensor3d gaussian_tensor(Index n1, Index n2, Index n3,
                                std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal;
  Tensor3d t(n1, n2, n3);
  for (auto& v : t.data()) v = normal(engine);
  return t;
}

/// Singular values 1, ..., 1/kappa spaced linearly over r entries.
inline Eigen::VectorXd linear_spectrum(Index r, double kappa) {
  Eigen::VectorXd s(r);
  if (r == 1) {
    s(0) = 1.0;
    return s;
  }
  for (Index i = 0; i < r; ++i) {
    s(i) = 1.0 + (1.0 / kappa - 1.0) * static_cast<double>(i) /
                     static_cast<double>(r - 1);
  }
  return s;
}

/// Ground truth with tubal rank r and condition number kappa: take a Gaussian
/// tensor, SVD every spectral slice, replace the singular values by the same
/// linear ramp 1 .. 1/kappa (zero beyond r) and transform back.
inline Tensor3d generate_ground_truth(const GroundTruthSpec& spec) {
  validate(spec);
  const auto g = gaussian_tensor(spec.n1, spec.n2, spec.n3, spec.seed);
  const auto svd = spectral_svd(dft_tubes(g), spec.r);
  const Eigen::VectorXcd ramp =
      linear_spectrum(spec.r, spec.kappa).cast<std::complex<double>>();

  SpectralTensord x(spec.n1, spec.n2, spec.n3);
  for (Index k = 0; k < half_spectrum(spec.n3); ++k) {
    x.slice(k).noalias() =
        svd.U.slice(k) * ramp.asDiagonal() * svd.V.slice(k).adjoint();
  }
  x.mirror_upper_half();
  return idft_tubes(x);
}

/// Smallest mu with max_i ||Z(:, i, :)||_F <= mu sqrt(r / n2) ||x||, where
/// Z = S * V^c comes from the rank-r t-SVD of x.
inline double incoherence(const Tensor3d& x, Index r) {
  if (r < 1 || r > std::min(x.n1(), x.n2())) {
    throw RankExceeded("incoherence: r must lie in [1, min(n1, n2)]");
  }
  const Index rank = tubal_rank(x);
  if (rank > r) {
    throw RankExceeded("incoherence: tubal rank " + std::to_string(rank) +
                       " exceeds r = " + std::to_string(r));
  }
  const auto f = t_svd(x, r);
  const Tensor3d z = t_product(f.S, conj_transpose(f.V));
  double worst = 0;
  for (Index i = 0; i < z.n2(); ++i) {
    worst = std::max(worst, z.lateral(i).norm());
  }
  const double norm = spectral_norm(x);
  if (!(norm > 0)) throw ZeroTensor("incoherence: zero tensor");
  return worst * std::sqrt(static_cast<double>(x.n2()) / static_cast<double>(r)) /
         norm;
}

}  // namespace tubalcs
