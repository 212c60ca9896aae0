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

// Brute-force references for testing.  Nothing in the solver path includes
// this header; it exists so the spectral-domain code can be checked against
// explicit block-circulant algebra.

#pragma once

#include <complex>
#include <numbers>
#include <vector>

#include "tubalcs/tensor3.hpp"

namespace tubalcs::oracle {

/// Largest bcirc matrix the oracle agrees to build.
inline constexpr Index kMaxOracleEntries = 10'000'000;

/// Explicit block-circulant matrix: block (p, q) is frontal slice
/// (p - q) mod n3, giving an (n1 n3) x (n2 n3) matrix.
template <typename Real>
typename Tensor3<Real>::Matrix bcirc(const Tensor3<Real>& a) {
  const Index n1 = a.n1(), n2 = a.n2(), n3 = a.n3();
  if (n1 * n3 * n2 * n3 > kMaxOracleEntries) {
    throw TooLarge("bcirc_oracle: " + to_string(a.dims()) +
                   " exceeds the oracle size limit");
  }
  typename Tensor3<Real>::Matrix out(n1 * n3, n2 * n3);
  for (Index p = 0; p < n3; ++p) {
    for (Index q = 0; q < n3; ++q) {
      out.block(p * n1, q * n2, n1, n2) = a.frontal((p - q + n3) % n3);
    }
  }
  return out;
}

/// t-product via Fold(bcirc(a) * Unfold(b)).
template <typename Real>
Tensor3<Real> t_product(const Tensor3<Real>& a, const Tensor3<Real>& b) {
  if (a.n2() != b.n1() || a.n3() != b.n3()) {
    throw DimensionMismatch("oracle::t_product: dims disagree");
  }
  return fold(typename Tensor3<Real>::Matrix(bcirc(a) * unfold(b)), a.n1());
}

/// Direct O(n3^2) DFT of every tube; slice k returned as an n1 x n2 matrix.
template <typename Real>
std::vector<Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>>
naive_dft(const Tensor3<Real>& t) {
  using Complex = std::complex<Real>;
  const Index n3 = t.n3();
  std::vector<Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>> out;
  for (Index k = 0; k < n3; ++k) {
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic> s =
        Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>::Zero(t.n1(),
                                                                     t.n2());
    for (Index n = 0; n < n3; ++n) {
      const Real angle = -Real(2) * std::numbers::pi_v<Real> *
                         static_cast<Real>(k * n) / static_cast<Real>(n3);
      s += t.frontal(n).template cast<Complex>() *
           Complex(std::cos(angle), std::sin(angle));
    }
    out.push_back(std::move(s));
  }
  return out;
}

/// Dense design matrix of one lateral slice: H = bcirc(u^c) * probes, where
/// `probes` is Unfold of the n1 x m x n3 sensing tensor ((n1 n3) x m).
/// Row index of H is q + r * k for tube entry k of factor row q.
template <typename Real, typename Derived>
typename Tensor3<Real>::Matrix design_matrix(
    const Tensor3<Real>& u, const Eigen::MatrixBase<Derived>& probes) {
  const Index n1 = u.n1(), r = u.n2(), n3 = u.n3();
  Tensor3<Real> uc(r, n1, n3);
  uc.frontal(0) = u.frontal(0).transpose();
  for (Index k = 1; k < n3; ++k) uc.frontal(n3 - k) = u.frontal(k).transpose();
  return bcirc(uc) * probes;
}

}  // namespace tubalcs::oracle
