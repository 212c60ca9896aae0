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

#include <complex>
#include <numbers>
#include <vector>

#include "tubalcs/tensor3.hpp"

namespace tubalcs {

/// How per-slice spectral work is scheduled.
///
/// `mirror` computes slices 0 .. n3/2 and fills the rest by conjugation, which
/// is exact for anything derived from a real tensor.  `independent` computes
/// every slice on its own; tests use it to check the mirrored path.
enum class SliceMode { mirror, independent };

/// Number of leading slices that carry independent information.
inline Index half_spectrum(Index n3) noexcept { return n3 / 2 + 1; }

/// Slices 0 and n3/2 (even n3) equal their own conjugate partner and are
/// real for any real tensor.
inline bool self_conjugate(Index k, Index n3) noexcept {
  return k == 0 || 2 * k == n3;
}

inline Index computed_slices(Index n3, SliceMode mode) noexcept {
  return mode == SliceMode::mirror ? half_spectrum(n3) : n3;
}

/// Tube-wise DFT of a real tensor: n3 complex n1 x n2 frontal slices.
template <typename Real = double>
class SpectralTensor {
 public:
  using Complex = std::complex<Real>;
  using CMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;

  SpectralTensor() = default;

  SpectralTensor(Index n1, Index n2, Index n3)
      : dims_{n1, n2, n3},
        slices_(static_cast<std::size_t>(n3), CMatrix::Zero(n1, n2)) {
    if (n1 < 1 || n2 < 1 || n3 < 1) {
      throw DimensionMismatch("SpectralTensor: dims must be positive");
    }
  }

  const Dims& dims() const noexcept { return dims_; }
  Index n1() const noexcept { return dims_.n1; }
  Index n2() const noexcept { return dims_.n2; }
  Index n3() const noexcept { return dims_.n3; }

  CMatrix& slice(Index k) { return slices_[static_cast<std::size_t>(k)]; }
  const CMatrix& slice(Index k) const {
    return slices_[static_cast<std::size_t>(k)];
  }

  /// Replace slices above n3/2 by conjugates of their partners.
  void mirror_upper_half() {
    const Index n3 = dims_.n3;
    for (Index k = half_spectrum(n3); k < n3; ++k) {
      slice(k) = slice(n3 - k).conjugate();
    }
  }

  /// Reshape every slice (used after per-slice factorizations change widths).
  void reset_dims(Index n1, Index n2) {
    dims_.n1 = n1;
    dims_.n2 = n2;
  }

  Real frobenius_norm() const {
    Real s = 0;
    for (const auto& m : slices_) s += m.squaredNorm();
    return std::sqrt(s);
  }

  /// Largest deviation from conjugate symmetry, relative to the total norm.
  Real symmetry_defect() const {
    const Index n3 = dims_.n3;
    Real defect = slice(0).imag().squaredNorm();
    for (Index k = 1; k < n3; ++k) {
      defect += (slice(k) - slice(n3 - k).conjugate()).squaredNorm() / 2;
    }
    const Real norm = frobenius_norm();
    return norm > 0 ? std::sqrt(defect) / norm : std::sqrt(defect);
  }

 private:
  Dims dims_{};
  std::vector<CMatrix> slices_;
};

using SpectralTensord = SpectralTensor<double>;

namespace detail {

/// e^{sign * 2 pi i k n / n3}; k * n is reduced mod n3 first so the phase is
/// computed from an angle in [0, 2 pi).
template <typename Real>
std::complex<Real> twiddle(Index k, Index n, Index n3, int sign) {
  const Index e = (k * n) % n3;
  const Real angle = Real(2) * std::numbers::pi_v<Real> *
                     static_cast<Real>(e) / static_cast<Real>(n3);
  return {std::cos(angle), Real(sign) * std::sin(angle)};
}

/// Forward DFT matrix restricted to the first `count` output bins (n3 x count).
template <typename Real>
Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>
forward_dft_matrix(Index n3, Index count) {
  Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic> f(n3,
                                                                      count);
  for (Index k = 0; k < count; ++k) {
    for (Index n = 0; n < n3; ++n) f(n, k) = twiddle<Real>(k, n, n3, -1);
  }
  return f;
}

/// Weights turning the half spectrum of a real signal back into the signal:
/// x[n] = sum_k Re(X[k] * w(k, n)) for k < n3/2 + 1.
template <typename Real>
Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>
half_inverse_weights(Index n3) {
  const Index h = half_spectrum(n3);
  Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic> w(h, n3);
  for (Index k = 0; k < h; ++k) {
    const bool self_conjugate = (k == 0) || (2 * k == n3);
    const Real c = (self_conjugate ? Real(1) : Real(2)) / static_cast<Real>(n3);
    for (Index n = 0; n < n3; ++n) w(k, n) = c * twiddle<Real>(k, n, n3, +1);
  }
  return w;
}

}  // namespace detail

/// slice[k](p, q) = sum_n t(p, q, n) exp(-2 pi i k n / n3).
template <typename Real>
SpectralTensor<Real> dft_tubes(const Tensor3<Real>& t,
                               SliceMode mode = SliceMode::mirror) {
  using Matrix = typename Tensor3<Real>::Matrix;
  const Index n1 = t.n1(), n2 = t.n2(), n3 = t.n3();
  const Index count = computed_slices(n3, mode);
  const auto f = detail::forward_dft_matrix<Real>(n3, count);

  // Columns of `tubes` are the frontal slices flattened, so one product
  // transforms every tube at once.
  Eigen::Map<const Matrix> tubes(t.data().data(), n1 * n2, n3);
  const Matrix re = tubes * f.real();
  const Matrix im = tubes * f.imag();

  SpectralTensor<Real> out(n1, n2, n3);
  for (Index k = 0; k < count; ++k) {
    auto& s = out.slice(k);
    for (Index q = 0; q < n2; ++q) {
      for (Index p = 0; p < n1; ++p) {
        s(p, q) = {re(p + n1 * q, k), im(p + n1 * q, k)};
      }
    }
  }
  if (mode == SliceMode::mirror) out.mirror_upper_half();
  return out;
}

/// Default tolerance on the relative conjugate-symmetry defect of idft input.
inline constexpr double kSymmetryTolerance = 1e-8;

/// Inverse of dft_tubes.  Rejects stacks that are not conjugate symmetric,
/// since their inverse transform is not real.
template <typename Real>
Tensor3<Real> idft_tubes(const SpectralTensor<Real>& s,
                         Real tolerance = Real(kSymmetryTolerance)) {
  using Matrix = typename Tensor3<Real>::Matrix;
  const Real defect = s.symmetry_defect();
  if (!(defect <= tolerance)) {
    throw SymmetryViolation("idft_tubes: conjugate-symmetry defect " +
                            std::to_string(defect) + " exceeds tolerance");
  }
  const Index n1 = s.n1(), n2 = s.n2(), n3 = s.n3();
  const Index h = half_spectrum(n3);
  const auto w = detail::half_inverse_weights<Real>(n3);

  Matrix re(n1 * n2, h), im(n1 * n2, h);
  for (Index k = 0; k < h; ++k) {
    const auto& sl = s.slice(k);
    for (Index q = 0; q < n2; ++q) {
      for (Index p = 0; p < n1; ++p) {
        re(p + n1 * q, k) = sl(p, q).real();
        im(p + n1 * q, k) = sl(p, q).imag();
      }
    }
  }
  Tensor3<Real> out(n1, n2, n3);
  Eigen::Map<Matrix> tubes(out.data().data(), n1 * n2, n3);
  tubes.noalias() = re * w.real() - im * w.imag();
  return out;
}

}  // namespace tubalcs
