#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tnperm/oracle.hpp"

namespace tnperm {

/// The subtensor obtained by varying 3 or 4 probe axes while every other axis
/// is frozen at a background index.
struct ProbeBlock {
  /// Probe axes in the order the caller labelled them (i_1, i_2, ...).
  std::vector<int> probes;
  /// The same axes ascending; `values` is row-major over these.
  std::vector<int> axes;
  /// Extents n over `axes`.
  std::vector<int> shape;
  /// Length d; background index per axis, -1 on probe axes.
  std::vector<int> background;
  std::vector<double> values;

  /// Value at local multi-index `local` (aligned with `axes`).
  double at(std::span<const int> local) const;
};

/// Queries exactly prod_{probe} n_i entries. Background indices are drawn
/// uniformly per non-probe axis from `y_seed`.
ProbeBlock sample_probe_block(EntryOracle& oracle, std::span<const int> probes, std::uint64_t y_seed);

/// A block reshaped into a matrix. Row and column groups are each flattened
/// row-major in ascending original-axis order.
struct Matricization {
  std::vector<int> row_axes;
  std::vector<int> col_axes;
  Eigen::MatrixXd matrix;

  /// (row, col) holding the block entry at `local` (aligned with block.axes).
  std::pair<Eigen::Index, Eigen::Index> locate(const ProbeBlock& block, std::span<const int> local) const;
};

Matricization matricize(const ProbeBlock& block, std::span<const int> row_axes);

/// Inverse of matricize: the block values (row-major over block.axes).
std::vector<double> restore_block(const Matricization& m, const ProbeBlock& block);

/// TR: [(i1,i2)|(i3,i4), (i1,i3)|(i2,i4), (i1,i4)|(i2,i3)].
/// TT: [i1|(i2,i3), i2|(i3,i1), i3|(i1,i2)].
struct MatricizationTriple {
  std::array<Matricization, 3> m;
};

MatricizationTriple reshape_tr_triple(const ProbeBlock& block);
MatricizationTriple reshape_tt_triple(const ProbeBlock& block);

}  // namespace tnperm
