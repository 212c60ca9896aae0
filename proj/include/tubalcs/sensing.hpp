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

// Local sensing of lateral slices: every slice i of an n1 x n2 x n3 tensor is
// probed by its own Gaussian tensor A_i (n1 x m x n3), giving
// y[j][i] = <A_i(:, j, :), X(:, i, :)>.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tubalcs/tensor3.hpp"

namespace tubalcs {

/// Half-open probe index range [begin, end).
struct ProbeRange {
  Index begin = 0;
  Index end = 0;

  Index size() const noexcept { return end - begin; }
  bool contains(Index j) const noexcept { return j >= begin && j < end; }
  friend bool operator==(const ProbeRange&, const ProbeRange&) = default;
};

enum class StorageMode { materialized, streamed };

namespace detail {

// SplitMix64 finalizer, used to derive one engine seed per (seed, i, j).
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t probe_key(std::uint64_t seed, Index slice, Index probe) {
  std::uint64_t k = mix64(seed);
  k = mix64(k ^ static_cast<std::uint64_t>(slice));
  return mix64(k ^ (static_cast<std::uint64_t>(probe) << 1 | 1u));
}

}  // namespace detail

/// The per-slice Gaussian sensing tensors {A_i}.
///
/// Probe (i, j) is an n1 x n3 matrix drawn from its own engine keyed by
/// (seed, i, j), so any probe can be regenerated without touching the others.
/// In materialized mode all probes are stored; in streamed mode they are
/// regenerated on every access.  Both modes yield bit-identical values.
///
/// Stored layout per slice: an (n1 n3) x m column-major matrix whose column j
/// is the column-major vectorization of probe j, i.e. Unfold(A_i).
class SensingEnsemble {
 public:
  using Matrix = Eigen::MatrixXd;

  SensingEnsemble() = default;

  SensingEnsemble(Index n1, Index n2, Index n3, Index m_total,
                  std::uint64_t seed,
                  StorageMode mode = StorageMode::materialized)
      : n1_(n1), n2_(n2), n3_(n3), m_total_(m_total), seed_(seed), mode_(mode) {
    if (n1 < 1 || n2 < 1 || n3 < 1 || m_total < 1) {
      throw DimensionMismatch("SensingEnsemble: dims must be positive");
    }
    if (mode_ == StorageMode::materialized) {
      data_.resize(static_cast<std::size_t>(probe_length() * m_total_ * n2_));
      for (Index i = 0; i < n2_; ++i) {
        for (Index j = 0; j < m_total_; ++j) {
          fill_probe(i, j, data_.data() + offset(i, j));
        }
      }
    }
  }

  Index n1() const noexcept { return n1_; }
  Index n2() const noexcept { return n2_; }
  Index n3() const noexcept { return n3_; }
  Index m_total() const noexcept { return m_total_; }
  std::uint64_t seed() const noexcept { return seed_; }
  StorageMode mode() const noexcept { return mode_; }
  Index probe_length() const noexcept { return n1_ * n3_; }

  /// Writes the n1 * n3 entries of probe (slice, probe) into `out`.
  void fill_probe(Index slice, Index probe, double* out) const {
    std::mt19937_64 engine(detail::probe_key(seed_, slice, probe));
    std::normal_distribution<double> normal;
    for (Index e = 0; e < probe_length(); ++e) out[e] = normal(engine);
  }

  /// Calls f with Unfold(A_slice) restricted to `range`, as an
  /// (n1 n3) x range.size() matrix.
  template <typename F>
  decltype(auto) with_probes(Index slice, ProbeRange range, F&& f) const {
    check_range(slice, range);
    if (mode_ == StorageMode::materialized) {
      Eigen::Map<const Matrix> block(data_.data() + offset(slice, range.begin),
                                     probe_length(), range.size());
      return f(Eigen::Ref<const Matrix>(block));
    }
    Matrix block(probe_length(), range.size());
    for (Index j = 0; j < range.size(); ++j) {
      fill_probe(slice, range.begin + j, block.col(j).data());
    }
    return f(Eigen::Ref<const Matrix>(block));
  }

  /// Copy of Unfold(A_slice) restricted to `range`.
  Matrix probes(Index slice, ProbeRange range) const {
    return with_probes(slice, range,
                       [](const Eigen::Ref<const Matrix>& b) { return Matrix(b); });
  }

  /// Probe (slice, probe) as an n1 x n3 matrix.
  Matrix probe(Index slice, Index probe) const {
    Matrix m(n1_, n3_);
    fill_probe(slice, probe, m.data());
    return m;
  }

 private:
  Index offset(Index slice, Index probe) const {
    return (slice * m_total_ + probe) * probe_length();
  }

  void check_range(Index slice, ProbeRange range) const {
    if (slice < 0 || slice >= n2_ || range.begin < 0 ||
        range.end > m_total_ || range.begin > range.end) {
      throw DimensionMismatch("SensingEnsemble: probe request out of range");
    }
  }

  Index n1_ = 0, n2_ = 0, n3_ = 0, m_total_ = 0;
  std::uint64_t seed_ = 0;
  StorageMode mode_ = StorageMode::materialized;
  std::vector<double, Eigen::aligned_allocator<double>> data_;
};

inline SensingEnsemble generate_ensemble(
    Index n1, Index n2, Index n3, Index m_total, std::uint64_t seed,
    StorageMode mode = StorageMode::materialized) {
  return SensingEnsemble(n1, n2, n3, m_total, seed, mode);
}

/// Measurements y[j][i] with the probe -> split-group assignment.
struct MeasurementSet {
  /// values(j, i): probe j of slice i.
  Eigen::MatrixXd values;
  /// Split group of every probe (1-based), or 0 for the pooled group.
  std::vector<int> group;

  Index m_total() const noexcept { return values.rows(); }
  Index n2() const noexcept { return values.cols(); }

  /// Measurements of slice i restricted to `range`.
  auto slice(Index i, ProbeRange range) const {
    return values.col(i).segment(range.begin, range.size());
  }
};

/// Contiguous copy of the lateral slice x(:, i, :) in Unfold order.
inline Eigen::VectorXd lateral_vector(const Tensor3d& x, Index i) {
  Eigen::MatrixXd m = x.lateral(i);
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

/// y[j][i] = <A_i(:, j, :), x(:, i, :)> for every probe of the ensemble.
/// `group` is filled with zeros (pooled); assign_groups attaches a schedule.
inline MeasurementSet measure(const SensingEnsemble& e, const Tensor3d& x) {
  if (x.n1() != e.n1() || x.n2() != e.n2() || x.n3() != e.n3()) {
    throw DimensionMismatch("measure: tensor " + to_string(x.dims()) +
                            " does not match ensemble");
  }
  MeasurementSet out;
  out.values.resize(e.m_total(), e.n2());
  out.group.assign(static_cast<std::size_t>(e.m_total()), 0);
  for (Index i = 0; i < e.n2(); ++i) {
    const Eigen::VectorXd xi = lateral_vector(x, i);
    e.with_probes(i, {0, e.m_total()},
                  [&](const Eigen::Ref<const Eigen::MatrixXd>& a) {
                    out.values.col(i).noalias() = a.transpose() * xi;
                  });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sample splitting

enum class SplitMode { split, pooled };

/// Algorithm stage that consumes probes.
struct Stage {
  enum class Kind { threshold, init, u_update, v_update };
  Kind kind = Kind::threshold;
  int t = 0;

  static Stage threshold() { return {Kind::threshold, 0}; }
  static Stage init() { return {Kind::init, 0}; }
  static Stage u_update(int t) { return {Kind::u_update, t}; }
  static Stage v_update(int t) { return {Kind::v_update, t}; }
};

/// Probe-to-group layout for one run with iteration budget T.
///
/// Split mode has 2T + 1 contiguous groups: groups 1 .. 2T-1 hold mc probes,
/// groups 2T and 2T+1 hold m0.  The threshold uses group 2T, initialization
/// group 2T+1, the U step of iteration t group T+t and the V solve of
/// iteration t group t+1.
///
/// Pooled mode has a single pool of max(m0, mc) probes; the threshold and
/// initialization read the first m0 of them and every iteration re-reads the
/// first mc.
struct SplitSchedule {
  SplitMode mode = SplitMode::pooled;
  int T = 1;
  Index m0 = 1;
  Index mc = 1;

  Index m_total() const {
    if (mode == SplitMode::pooled) return std::max(m0, mc);
    return 2 * m0 + (2 * static_cast<Index>(T) - 1) * mc;
  }

  int group_count() const { return mode == SplitMode::pooled ? 1 : 2 * T + 1; }

  /// Probes of split group k (1-based); the whole pool in pooled mode.
  ProbeRange group_range(int k) const {
    if (mode == SplitMode::pooled) return {0, m_total()};
    if (k < 1 || k > 2 * T + 1) {
      throw InvalidSchedule("group " + std::to_string(k) + " outside 1.." +
                            std::to_string(2 * T + 1));
    }
    const Index mc_groups = 2 * static_cast<Index>(T) - 1;
    if (k <= mc_groups) return {(k - 1) * mc, k * mc};
    const Index base = mc_groups * mc + (k - 1 - mc_groups) * m0;
    return {base, base + m0};
  }

  /// Split group consumed by `stage` (split mode).
  int group_of(Stage stage) const {
    switch (stage.kind) {
      case Stage::Kind::threshold:
        return 2 * T;
      case Stage::Kind::init:
        return 2 * T + 1;
      case Stage::Kind::u_update:
        if (stage.t < 1 || stage.t > T - 1) {
          throw InvalidSchedule("u_update(" + std::to_string(stage.t) +
                                ") outside 1.." + std::to_string(T - 1));
        }
        return T + stage.t;
      case Stage::Kind::v_update:
        if (stage.t < 0 || stage.t > T - 1) {
          throw InvalidSchedule("v_update(" + std::to_string(stage.t) +
                                ") outside 0.." + std::to_string(T - 1));
        }
        return stage.t + 1;
    }
    throw InvalidSchedule("unknown stage");
  }

  ProbeRange probes_for(Stage stage) const {
    const int k = group_of(stage);  // validates t in both modes
    if (mode == SplitMode::split) return group_range(k);
    const bool initial =
        stage.kind == Stage::Kind::threshold || stage.kind == Stage::Kind::init;
    return {0, initial ? m0 : mc};
  }

  /// Group index of every probe (0 for pooled).
  std::vector<int> group_map() const {
    std::vector<int> out(static_cast<std::size_t>(m_total()), 0);
    if (mode == SplitMode::pooled) return out;
    for (int k = 1; k <= group_count(); ++k) {
      const auto r = group_range(k);
      for (Index j = r.begin; j < r.end; ++j) out[static_cast<std::size_t>(j)] = k;
    }
    return out;
  }
};

inline SplitSchedule build_schedule(int T, Index m0, Index mc, SplitMode mode) {
  if (T < 1 || m0 < 1 || mc < 1) {
    throw InvalidSchedule("build_schedule: need T >= 1, m0 >= 1, mc >= 1");
  }
  return {mode, T, m0, mc};
}

inline ProbeRange probes_for(const SplitSchedule& s, Stage stage) {
  return s.probes_for(stage);
}

inline void assign_groups(MeasurementSet& y, const SplitSchedule& s) {
  if (y.m_total() != s.m_total()) {
    throw InvalidSchedule("assign_groups: measurement count " +
                          std::to_string(y.m_total()) +
                          " does not match schedule total " +
                          std::to_string(s.m_total()));
  }
  y.group = s.group_map();
}

// ---------------------------------------------------------------------------
// CSV exchange: columns slice, probe, group, value (one row per measurement,
// slice-major).

inline void write_measurements_csv(std::ostream& os, const MeasurementSet& y) {
  os << "slice,probe,group,value\n";
  char buf[64];
  for (Index i = 0; i < y.n2(); ++i) {
    for (Index j = 0; j < y.m_total(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", y.values(j, i));
      os << i << ',' << j << ',' << y.group[static_cast<std::size_t>(j)] << ','
         << buf << '\n';
    }
  }
}

inline MeasurementSet read_measurements_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "slice,probe,group,value") {
    throw IoError("measurement CSV: missing header");
  }
  struct Row {
    Index slice, probe;
    int group;
    double value;
  };
  std::vector<Row> rows;
  Index n2 = 0, m = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    Row r{};
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(ls >> r.slice >> c1 >> r.probe >> c2 >> r.group >> c3 >> r.value) ||
        c1 != ',' || c2 != ',' || c3 != ',' || r.slice < 0 || r.probe < 0) {
      throw IoError("measurement CSV: malformed row '" + line + "'");
    }
    n2 = std::max(n2, r.slice + 1);
    m = std::max(m, r.probe + 1);
    rows.push_back(r);
  }
  if (static_cast<Index>(rows.size()) != n2 * m) {
    throw IoError("measurement CSV: expected a full slice x probe grid");
  }
  MeasurementSet y;
  y.values = Eigen::MatrixXd::Constant(m, n2, std::nan(""));
  y.group.assign(static_cast<std::size_t>(m), -1);
  for (const auto& r : rows) {
    y.values(r.probe, r.slice) = r.value;
    auto& g = y.group[static_cast<std::size_t>(r.probe)];
    if (g != -1 && g != r.group) {
      throw IoError("measurement CSV: group map differs across slices");
    }
    g = r.group;
  }
  if (!y.values.allFinite()) {
    throw IoError("measurement CSV: duplicate or missing entries");
  }
  return y;
}

}  // namespace tubalcs
