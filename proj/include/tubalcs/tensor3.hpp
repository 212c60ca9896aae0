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

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "tubalcs/error.hpp"

namespace tubalcs {

using Index = Eigen::Index;

struct Dims {
  Index n1 = 0;
  Index n2 = 0;
  Index n3 = 0;

  Index size() const noexcept { return n1 * n2 * n3; }
  friend bool operator==(const Dims&, const Dims&) = default;
};

inline std::string to_string(const Dims& d) {
  return std::to_string(d.n1) + "x" + std::to_string(d.n2) + "x" +
         std::to_string(d.n3);
}

/// Dense real third-order tensor.
///
/// Linearization: entry (i, j, k) lives at `i + n1 * (j + n2 * k)`, i.e. the
/// frontal slices are stored one after another and each n1 x n2 frontal slice
/// is column-major.  A lateral slice (:, j, :) is therefore an n1 x n3 matrix
/// with outer stride n1 * n2, and its column-major vectorization equals
/// Unfold() of the n1 x 1 x n3 tensor.
template <typename Real = double>
class Tensor3 {
  static_assert(std::is_floating_point_v<Real>);

 public:
  using Scalar = Real;
  using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
  using SliceMap = Eigen::Map<Matrix>;
  using ConstSliceMap = Eigen::Map<const Matrix>;
  using LateralMap = Eigen::Map<Matrix, 0, Eigen::OuterStride<>>;
  using ConstLateralMap = Eigen::Map<const Matrix, 0, Eigen::OuterStride<>>;

  Tensor3() = default;

  /// Zero tensor.
  Tensor3(Index n1, Index n2, Index n3) : dims_{n1, n2, n3} {
    check_dims(dims_);
    data_.assign(static_cast<std::size_t>(dims_.size()), Real(0));
  }

  explicit Tensor3(Dims d) : Tensor3(d.n1, d.n2, d.n3) {}

  Tensor3(Index n1, Index n2, Index n3, std::vector<Real> data)
      : dims_{n1, n2, n3}, data_(data.begin(), data.end()) {
    check_dims(dims_);
    if (static_cast<Index>(data_.size()) != dims_.size()) {
      throw DimensionMismatch("Tensor3: data length " +
                              std::to_string(data_.size()) +
                              " does not match dims " + to_string(dims_));
    }
    for (Real v : data_) {
      if (!std::isfinite(v)) {
        throw NonFiniteValue("Tensor3: non-finite entry");
      }
    }
  }

  const Dims& dims() const noexcept { return dims_; }
  Index n1() const noexcept { return dims_.n1; }
  Index n2() const noexcept { return dims_.n2; }
  Index n3() const noexcept { return dims_.n3; }
  Index size() const noexcept { return dims_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  Real& operator()(Index i, Index j, Index k) {
    return data_[static_cast<std::size_t>(i + dims_.n1 * (j + dims_.n2 * k))];
  }
  Real operator()(Index i, Index j, Index k) const {
    return data_[static_cast<std::size_t>(i + dims_.n1 * (j + dims_.n2 * k))];
  }

  std::span<Real> data() noexcept { return data_; }
  std::span<const Real> data() const noexcept { return data_; }

  /// Flat view of all entries.
  Eigen::Map<Vector> flat() { return {data_.data(), dims_.size()}; }
  Eigen::Map<const Vector> flat() const { return {data_.data(), dims_.size()}; }

  SliceMap frontal(Index k) {
    return {data_.data() + k * dims_.n1 * dims_.n2, dims_.n1, dims_.n2};
  }
  ConstSliceMap frontal(Index k) const {
    return {data_.data() + k * dims_.n1 * dims_.n2, dims_.n1, dims_.n2};
  }

  /// n1 x n3 view of lateral slice j; column k is the k-th tube entry.
  LateralMap lateral(Index j) {
    return {data_.data() + j * dims_.n1, dims_.n1, dims_.n3,
            Eigen::OuterStride<>(dims_.n1 * dims_.n2)};
  }
  ConstLateralMap lateral(Index j) const {
    return {data_.data() + j * dims_.n1, dims_.n1, dims_.n3,
            Eigen::OuterStride<>(dims_.n1 * dims_.n2)};
  }

  /// Lateral slices [first, first + count) as a new n1 x count x n3 tensor.
  Tensor3 lateral_range(Index first, Index count) const {
    if (first < 0 || count < 1 || first + count > dims_.n2) {
      throw DimensionMismatch("Tensor3::lateral_range out of bounds");
    }
    Tensor3 out(dims_.n1, count, dims_.n3);
    for (Index k = 0; k < dims_.n3; ++k) {
      out.frontal(k) = frontal(k).middleCols(first, count);
    }
    return out;
  }

  Real frobenius_norm() const { return flat().norm(); }

  bool all_finite() const { return flat().allFinite(); }

  Tensor3& operator+=(const Tensor3& o) {
    require_same(o, "operator+=");
    flat() += o.flat();
    return *this;
  }
  Tensor3& operator-=(const Tensor3& o) {
    require_same(o, "operator-=");
    flat() -= o.flat();
    return *this;
  }
  Tensor3& operator*=(Real s) {
    flat() *= s;
    return *this;
  }

  friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
  friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
  friend Tensor3 operator*(Real s, Tensor3 a) { return a *= s; }
  friend Tensor3 operator*(Tensor3 a, Real s) { return a *= s; }

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  static void check_dims(const Dims& d) {
    if (d.n1 < 1 || d.n2 < 1 || d.n3 < 1) {
      throw DimensionMismatch("Tensor3: dims must be positive, got " +
                              to_string(d));
    }
  }

  void require_same(const Tensor3& o, const char* op) const {
    if (o.dims_ != dims_) {
      throw DimensionMismatch(std::string("Tensor3::") + op + ": " +
                              to_string(dims_) + " vs " + to_string(o.dims_));
    }
  }

  Dims dims_{};
  // Fully aligned base, so vectorized reductions peel the same way every run.
  std::vector<Real, Eigen::aligned_allocator<Real>> data_;
};

using Tensor3d = Tensor3<double>;

/// Unfold: stack the frontal slices vertically into an (n1*n3) x n2 matrix.
template <typename Real>
typename Tensor3<Real>::Matrix unfold(const Tensor3<Real>& t) {
  typename Tensor3<Real>::Matrix out(t.n1() * t.n3(), t.n2());
  for (Index k = 0; k < t.n3(); ++k) {
    out.middleRows(k * t.n1(), t.n1()) = t.frontal(k);
  }
  return out;
}

/// Inverse of unfold; `n1` rows per frontal block.
template <typename Derived>
Tensor3<typename Derived::Scalar> fold(const Eigen::MatrixBase<Derived>& m,
                                       Index n1) {
  using Real = typename Derived::Scalar;
  if (n1 < 1 || m.rows() % n1 != 0) {
    throw DimensionMismatch("fold: row count not a multiple of n1");
  }
  const Index n3 = m.rows() / n1;
  Tensor3<Real> out(n1, m.cols(), n3);
  for (Index k = 0; k < n3; ++k) {
    out.frontal(k) = m.middleRows(k * n1, n1);
  }
  return out;
}

}  // namespace tubalcs
