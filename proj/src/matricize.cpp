#include "tnperm/matricize.hpp"

#include <algorithm>
#include <random>

#include <fmt/format.h>

#include "tnperm/errors.hpp"

namespace tnperm {

namespace {

/// Position of `axis` inside the ascending list `axes`.
std::size_t slot_of(const std::vector<int>& axes, int axis) {
  const auto it = std::lower_bound(axes.begin(), axes.end(), axis);
  if (it == axes.end() || *it != axis) throw DomainError(fmt::format("axis {} is not a probe axis", axis));
  return static_cast<std::size_t>(it - axes.begin());
}

bool next_index(std::vector<int>& idx, const std::vector<int>& shape) {
  for (std::size_t k = idx.size(); k-- > 0;) {
    if (++idx[k] < shape[k]) return true;
    idx[k] = 0;
  }
  return false;
}

Eigen::Index flatten(const ProbeBlock& block, const std::vector<int>& group, std::span<const int> local) {
  Eigen::Index out = 0;
  for (int axis : group) {
    const std::size_t s = slot_of(block.axes, axis);
    out = out * block.shape[s] + local[s];
  }
  return out;
}

Eigen::Index extent(const ProbeBlock& block, const std::vector<int>& group) {
  Eigen::Index out = 1;
  for (int axis : group) out *= block.shape[slot_of(block.axes, axis)];
  return out;
}

}  // namespace

double ProbeBlock::at(std::span<const int> local) const {
  std::size_t off = 0;
  for (std::size_t k = 0; k < shape.size(); ++k) off = off * static_cast<std::size_t>(shape[k]) + static_cast<std::size_t>(local[k]);
  return values.at(off);
}

ProbeBlock sample_probe_block(EntryOracle& oracle, std::span<const int> probes, std::uint64_t y_seed) {
  const PhysicalDims& dims = oracle.dims();
  const int d = dims.size();
  ProbeBlock block;
  block.probes.assign(probes.begin(), probes.end());
  block.axes = block.probes;
  std::sort(block.axes.begin(), block.axes.end());
  if (std::adjacent_find(block.axes.begin(), block.axes.end()) != block.axes.end()) {
    throw DomainError("probe axes must be distinct");
  }
  for (int a : block.axes) {
    if (a < 0 || a >= d) throw DomainError(fmt::format("probe axis {} outside [0, {})", a, d));
    block.shape.push_back(dims[a]);
  }

  std::mt19937_64 rng(y_seed);
  block.background.assign(static_cast<std::size_t>(d), -1);
  for (int i = 0; i < d; ++i) {
    if (std::binary_search(block.axes.begin(), block.axes.end(), i)) continue;
    std::uniform_int_distribution<int> pick(0, dims[i] - 1);
    block.background[static_cast<std::size_t>(i)] = pick(rng);
  }

  std::vector<int> x = block.background;
  std::vector<int> local(block.axes.size(), 0);
  do {
    for (std::size_t k = 0; k < local.size(); ++k) x[static_cast<std::size_t>(block.axes[k])] = local[k];
    block.values.push_back(oracle.query(x));
  } while (next_index(local, block.shape));
  return block;
}

std::pair<Eigen::Index, Eigen::Index> Matricization::locate(const ProbeBlock& block, std::span<const int> local) const {
  return {flatten(block, row_axes, local), flatten(block, col_axes, local)};
}

Matricization matricize(const ProbeBlock& block, std::span<const int> row_axes) {
  Matricization m;
  m.row_axes.assign(row_axes.begin(), row_axes.end());
  std::sort(m.row_axes.begin(), m.row_axes.end());
  for (int a : m.row_axes) slot_of(block.axes, a);
  for (int a : block.axes) {
    if (!std::binary_search(m.row_axes.begin(), m.row_axes.end(), a)) m.col_axes.push_back(a);
  }
  m.matrix.resize(extent(block, m.row_axes), extent(block, m.col_axes));

  std::vector<int> local(block.axes.size(), 0);
  std::size_t off = 0;
  do {
    const auto [row, col] = m.locate(block, local);
    m.matrix(row, col) = block.values[off++];
  } while (next_index(local, block.shape));
  return m;
}

std::vector<double> restore_block(const Matricization& m, const ProbeBlock& block) {
  std::vector<double> out;
  out.reserve(block.values.size());
  std::vector<int> local(block.axes.size(), 0);
  do {
    const auto [row, col] = m.locate(block, local);
    out.push_back(m.matrix(row, col));
  } while (next_index(local, block.shape));
  return out;
}

MatricizationTriple reshape_tr_triple(const ProbeBlock& block) {
  if (block.probes.size() != 4) {
    throw DomainError(fmt::format("TR triple needs 4 probes, block has {}", block.probes.size()));
  }
  const auto& i = block.probes;
  const std::array<int, 2> g12{i[0], i[1]};
  const std::array<int, 2> g13{i[0], i[2]};
  const std::array<int, 2> g14{i[0], i[3]};
  return {{matricize(block, g12), matricize(block, g13), matricize(block, g14)}};
}

MatricizationTriple reshape_tt_triple(const ProbeBlock& block) {
  if (block.probes.size() != 3) {
    throw DomainError(fmt::format("TT triple needs 3 probes, block has {}", block.probes.size()));
  }
  const auto& i = block.probes;
  const std::array<int, 1> g1{i[0]};
  const std::array<int, 1> g2{i[1]};
  const std::array<int, 1> g3{i[2]};
  return {{matricize(block, g1), matricize(block, g2), matricize(block, g3)}};
}

}  // namespace tnperm
