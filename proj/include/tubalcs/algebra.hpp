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

// t-product algebra.  Every product and factorization is carried out on the
// frontal slices of the tube-wise DFT, where the block-circulant structure
// becomes block diagonal.

#pragma once

#include <algorithm>
#include <limits>
#include <optional>

#include "tubalcs/spectral.hpp"

namespace tubalcs {

/// Skinny t-SVD: a = U * S * V^c with U n1 x rho x n3, S rho x rho x n3,
/// V n2 x rho x n3.
template <typename Real = double>
struct TSvdFactors {
  Tensor3<Real> U;
  Tensor3<Real> S;
  Tensor3<Real> V;
  Index rho = 0;
};

/// a = Q * R with Q n1 x rho x n3 orthogonal and R rho x n2 x n3
/// f-upper-triangular, rho = min(n1, n2).
template <typename Real = double>
struct TQrFactors {
  Tensor3<Real> Q;
  Tensor3<Real> R;
};

/// Relative cutoff below which a singular value counts as zero in
/// condition_number.
inline constexpr double kConditionCutoff = 1e-10;
/// Default relative tolerance of tubal_rank.
inline constexpr double kRankTolerance = 1e-8;
/// Orthogonality tolerance checked by subspace_distance.
inline constexpr double kOrthogonalityTolerance = 1e-6;

template <typename Real>
Tensor3<Real> identity_tensor(Index n, Index n3) {
  Tensor3<Real> out(n, n, n3);
  for (Index i = 0; i < n; ++i) out(i, i, 0) = Real(1);
  return out;
}

/// Slice-wise product of two spectra: out[k] = a[k] * b[k].
template <typename Real>
SpectralTensor<Real> spectral_product(const SpectralTensor<Real>& a,
                                      const SpectralTensor<Real>& b,
                                      SliceMode mode = SliceMode::mirror) {
  if (a.n2() != b.n1() || a.n3() != b.n3()) {
    throw DimensionMismatch("spectral_product: " + to_string(a.dims()) +
                            " * " + to_string(b.dims()));
  }
  SpectralTensor<Real> out(a.n1(), b.n2(), a.n3());
  for (Index k = 0; k < computed_slices(a.n3(), mode); ++k) {
    out.slice(k).noalias() = a.slice(k) * b.slice(k);
  }
  if (mode == SliceMode::mirror) out.mirror_upper_half();
  return out;
}

/// Slice-wise conjugate transpose of a spectrum (the spectrum of a^c).
template <typename Real>
SpectralTensor<Real> spectral_adjoint(const SpectralTensor<Real>& a) {
  SpectralTensor<Real> out(a.n2(), a.n1(), a.n3());
  for (Index k = 0; k < a.n3(); ++k) out.slice(k) = a.slice(k).adjoint();
  return out;
}

/// t-product a * b for a: n1 x n2 x n3, b: n2 x n4 x n3.
template <typename Real>
Tensor3<Real> t_product(const Tensor3<Real>& a, const Tensor3<Real>& b,
                        SliceMode mode = SliceMode::mirror) {
  if (a.n2() != b.n1() || a.n3() != b.n3()) {
    throw DimensionMismatch("t_product: " + to_string(a.dims()) + " * " +
                            to_string(b.dims()));
  }
  return idft_tubes(
      spectral_product(dft_tubes(a, mode), dft_tubes(b, mode), mode));
}

/// Conjugate transpose: slice 0 transposed, slice k moves to n3 - k and is
/// transposed.
template <typename Real>
Tensor3<Real> conj_transpose(const Tensor3<Real>& a) {
  const Index n3 = a.n3();
  Tensor3<Real> out(a.n2(), a.n1(), n3);
  out.frontal(0) = a.frontal(0).transpose();
  for (Index k = 1; k < n3; ++k) out.frontal(n3 - k) = a.frontal(k).transpose();
  return out;
}

namespace detail {

template <typename Complex>
Complex unit_phase(Complex z) {
  using Real = typename Complex::value_type;
  const Real mag = std::abs(z);
  return mag > Real(0) ? z / mag : Complex(1);
}

}  // namespace detail

/// Per-slice QR of a spectrum with the diagonal of every R slice made real
/// and nonnegative.  Returns (Q slices, R slices).
template <typename Real>
std::pair<SpectralTensor<Real>, SpectralTensor<Real>> spectral_qr(
    const SpectralTensor<Real>& a, SliceMode mode = SliceMode::mirror) {
  using CMatrix = typename SpectralTensor<Real>::CMatrix;
  const Index n1 = a.n1(), n2 = a.n2(), n3 = a.n3();
  const Index rho = std::min(n1, n2);
  SpectralTensor<Real> q(n1, rho, n3), r(rho, n2, n3);
  for (Index k = 0; k < computed_slices(n3, mode); ++k) {
    CMatrix qk, rk;
    if (self_conjugate(k, n3)) {
      // Real slice: factor in real arithmetic so Q and R stay exactly real.
      using RMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
      Eigen::HouseholderQR<RMatrix> qr(a.slice(k).real());
      qk = (qr.householderQ() * RMatrix::Identity(n1, rho))
               .template cast<std::complex<Real>>();
      rk = RMatrix(qr.matrixQR().topRows(rho).template triangularView<Eigen::Upper>())
               .template cast<std::complex<Real>>();
    } else {
      Eigen::HouseholderQR<CMatrix> qr(a.slice(k));
      qk = qr.householderQ() * CMatrix::Identity(n1, rho);
      rk = qr.matrixQR().topRows(rho).template triangularView<Eigen::Upper>();
    }
    for (Index i = 0; i < rho; ++i) {
      const auto d = detail::unit_phase(rk(i, i));
      qk.col(i) *= d;
      rk.row(i) *= std::conj(d);
      rk(i, i) = std::abs(rk(i, i));
    }
    q.slice(k) = std::move(qk);
    r.slice(k) = std::move(rk);
  }
  if (mode == SliceMode::mirror) {
    q.mirror_upper_half();
    r.mirror_upper_half();
  }
  return {std::move(q), std::move(r)};
}

/// t-QR.  Works for any shape: rho = min(n1, n2), so a fat input yields a
/// square orthogonal Q and an f-upper-trapezoidal R.
template <typename Real>
TQrFactors<Real> t_qr(const Tensor3<Real>& a,
                      SliceMode mode = SliceMode::mirror) {
  auto [q, r] = spectral_qr(dft_tubes(a, mode), mode);
  return {idft_tubes(q), idft_tubes(r)};
}

/// Per-slice thin SVD of a spectrum, truncated to `width` columns.  Returns
/// U, singular values (width x n3, column k for slice k), V.
template <typename Real>
struct SpectralSvd {
  SpectralTensor<Real> U;
  Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> sigma;
  SpectralTensor<Real> V;
};

template <typename Real>
SpectralSvd<Real> spectral_svd(const SpectralTensor<Real>& a, Index width,
                               SliceMode mode = SliceMode::mirror) {
  using CMatrix = typename SpectralTensor<Real>::CMatrix;
  const Index n1 = a.n1(), n2 = a.n2(), n3 = a.n3();
  SpectralSvd<Real> out{SpectralTensor<Real>(n1, width, n3),
                        Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>(width, n3),
                        SpectralTensor<Real>(n2, width, n3)};
  for (Index k = 0; k < computed_slices(n3, mode); ++k) {
    CMatrix u, v;
    if (self_conjugate(k, n3)) {
      // Real slice: a complex SVD may rotate degenerate singular subspaces
      // into complex vectors, so factor in real arithmetic.
      using RMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
      Eigen::JacobiSVD<RMatrix> svd(RMatrix(a.slice(k).real()),
                                    Eigen::ComputeThinU | Eigen::ComputeThinV);
      u = svd.matrixU().leftCols(width).template cast<std::complex<Real>>();
      v = svd.matrixV().leftCols(width).template cast<std::complex<Real>>();
      out.sigma.col(k) = svd.singularValues().head(width);
    } else {
      Eigen::JacobiSVD<CMatrix> svd(a.slice(k),
                                    Eigen::ComputeThinU | Eigen::ComputeThinV);
      u = svd.matrixU().leftCols(width);
      v = svd.matrixV().leftCols(width);
      out.sigma.col(k) = svd.singularValues().head(width);
    }
    if (mode == SliceMode::independent && !self_conjugate(k, n3)) {
      // Fix the phase of each singular pair so that partner slices come out
      // conjugate to each other: largest |u| entry of every column is real
      // and positive.
      for (Index i = 0; i < width; ++i) {
        Index arg = 0;
        u.col(i).cwiseAbs().maxCoeff(&arg);
        const auto d = std::conj(detail::unit_phase(u(arg, i)));
        u.col(i) *= d;
        v.col(i) *= d;
      }
    }
    out.U.slice(k) = std::move(u);
    out.V.slice(k) = std::move(v);
  }
  if (mode == SliceMode::mirror) {
    out.U.mirror_upper_half();
    out.V.mirror_upper_half();
    for (Index k = half_spectrum(n3); k < n3; ++k) {
      out.sigma.col(k) = out.sigma.col(n3 - k);
    }
  }
  return out;
}

/// t-SVD a = U * S * V^c.  Without `width` the full skinny factorization
/// (rho = min(n1, n2)) is returned; otherwise the leading `width` singular
/// tubes.
template <typename Real>
TSvdFactors<Real> t_svd(const Tensor3<Real>& a,
                        std::optional<Index> width = std::nullopt,
                        SliceMode mode = SliceMode::mirror) {
  const Index full = std::min(a.n1(), a.n2());
  const Index rho = width.value_or(full);
  if (rho < 1 || rho > full) {
    throw DimensionMismatch("t_svd: width must lie in [1, min(n1, n2)]");
  }
  auto svd = spectral_svd(dft_tubes(a, mode), rho, mode);
  SpectralTensor<Real> s(rho, rho, a.n3());
  for (Index k = 0; k < a.n3(); ++k) {
    s.slice(k).diagonal() = svd.sigma.col(k).template cast<std::complex<Real>>();
  }
  return {idft_tubes(svd.U), idft_tubes(s), idft_tubes(svd.V), rho};
}

/// All singular values of every spectral slice, slice k in column k.
template <typename Real>
Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> spectral_singular_values(
    const Tensor3<Real>& a) {
  using CMatrix = typename SpectralTensor<Real>::CMatrix;
  const auto s = dft_tubes(a);
  const Index n3 = a.n3();
  Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> out(
      std::min(a.n1(), a.n2()), n3);
  for (Index k = 0; k < half_spectrum(n3); ++k) {
    out.col(k) = Eigen::JacobiSVD<CMatrix>(s.slice(k)).singularValues();
  }
  for (Index k = half_spectrum(n3); k < n3; ++k) out.col(k) = out.col(n3 - k);
  return out;
}

/// Tensor spectral norm: the largest singular value over spectral slices.
template <typename Real>
Real spectral_norm(const Tensor3<Real>& a) {
  return spectral_singular_values(a).maxCoeff();
}

/// sigma_max / sigma_min+, where sigma_min+ is the smallest singular value of
/// any spectral slice above kConditionCutoff * sigma_max.
template <typename Real>
Real condition_number(const Tensor3<Real>& a) {
  const auto sv = spectral_singular_values(a);
  const Real top = sv.maxCoeff();
  if (!(top > Real(0))) throw ZeroTensor("condition_number: zero tensor");
  const Real cutoff = Real(kConditionCutoff) * top;
  Real bottom = top;
  for (Index k = 0; k < sv.cols(); ++k) {
    for (Index i = 0; i < sv.rows(); ++i) {
      if (sv(i, k) > cutoff) bottom = std::min(bottom, sv(i, k));
    }
  }
  return top / bottom;
}

/// Number of singular tubes with Frobenius norm above tol * sigma_max.
template <typename Real>
Index tubal_rank(const Tensor3<Real>& a, Real tol = Real(kRankTolerance)) {
  if (tol < Real(0)) throw DimensionMismatch("tubal_rank: tol must be >= 0");
  const auto sv = spectral_singular_values(a);
  const Real top = sv.maxCoeff();
  if (!(top > Real(0))) return 0;
  // Parseval: ||S(i,i,:)||_F^2 = (1/n3) sum_k sigma_k(i)^2.
  const auto tube_norms =
      (sv.rowwise().squaredNorm() / static_cast<Real>(a.n3())).cwiseSqrt();
  return static_cast<Index>((tube_norms.array() > tol * top).count());
}

/// Max over spectral slices of max |(U^H U - I)_{pq}|.
template <typename Real>
Real orthogonality_defect(const SpectralTensor<Real>& u) {
  using CMatrix = typename SpectralTensor<Real>::CMatrix;
  Real worst = 0;
  for (Index k = 0; k < u.n3(); ++k) {
    const CMatrix g = u.slice(k).adjoint() * u.slice(k);
    worst = std::max(
        worst, (g - CMatrix::Identity(u.n2(), u.n2())).cwiseAbs().maxCoeff());
  }
  return worst;
}

template <typename Real>
Real orthogonality_defect(const Tensor3<Real>& u) {
  return orthogonality_defect(dft_tubes(u));
}

/// Principal angle distance ||(I - u1 * u1^c) * u2||.
template <typename Real>
Real subspace_distance(const Tensor3<Real>& u1, const Tensor3<Real>& u2) {
  using CMatrix = typename SpectralTensor<Real>::CMatrix;
  if (u1.dims() != u2.dims()) {
    throw DimensionMismatch("subspace_distance: " + to_string(u1.dims()) +
                            " vs " + to_string(u2.dims()));
  }
  const auto s1 = dft_tubes(u1);
  const auto s2 = dft_tubes(u2);
  if (orthogonality_defect(s1) > Real(kOrthogonalityTolerance) ||
      orthogonality_defect(s2) > Real(kOrthogonalityTolerance)) {
    throw NotOrthogonal("subspace_distance: inputs must be orthogonal");
  }
  Real worst = 0;
  for (Index k = 0; k < half_spectrum(u1.n3()); ++k) {
    const CMatrix residual =
        s2.slice(k) - s1.slice(k) * (s1.slice(k).adjoint() * s2.slice(k));
    if (residual.size() == 0) continue;
    worst = std::max(worst, Eigen::JacobiSVD<CMatrix>(residual)
                                .singularValues()(0));
  }
  return worst;
}

/// Slice-wise inverse of a square spectrum.  Throws SingularTensor when some
/// slice has sigma_min <= rcond * sigma_max.
template <typename Real>
SpectralTensor<Real> spectral_inverse(const SpectralTensor<Real>& a,
                                      Real rcond = Real(kConditionCutoff)) {
  using CMatrix = typename SpectralTensor<Real>::CMatrix;
  if (a.n1() != a.n2()) throw DimensionMismatch("spectral_inverse: not square");
  SpectralTensor<Real> out(a.n1(), a.n1(), a.n3());
  for (Index k = 0; k < half_spectrum(a.n3()); ++k) {
    const auto sv = Eigen::JacobiSVD<CMatrix>(a.slice(k)).singularValues();
    if (!(sv(sv.size() - 1) > rcond * sv(0))) {
      throw SingularTensor("spectral_inverse: slice " + std::to_string(k) +
                           " is numerically singular");
    }
    out.slice(k) = a.slice(k).partialPivLu().inverse();
  }
  out.mirror_upper_half();
  return out;
}

/// Inverse of a square tensor under the t-product.
template <typename Real>
Tensor3<Real> t_inverse(const Tensor3<Real>& a,
                        Real rcond = Real(kConditionCutoff)) {
  return idft_tubes(spectral_inverse(dft_tubes(a), rcond));
}

}  // namespace tubalcs
